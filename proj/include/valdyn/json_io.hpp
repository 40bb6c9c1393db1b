/**
 * @file json_io.hpp
 * JSON documents for numbers, valuations, piecewise data and reports.
 * Rationals are {"num": "p", "den": "q"} with decimal strings so that
 * arbitrary sizes survive a round trip; key order is fixed.
 */
#pragma once

#include <nlohmann/json.hpp>

#include "valdyn/cfquad.hpp"
#include "valdyn/dynaffine.hpp"
#include "valdyn/dynlocal.hpp"
#include "valdyn/numbers.hpp"
#include "valdyn/potentials.hpp"
#include "valdyn/skpval.hpp"

namespace valdyn {

using Json = nlohmann::ordered_json;

Json to_json(const Rational& q);
Json to_json(const QuadraticNumber& x);
Json to_json(const QuadraticInteger& r);
Json to_json(const Valuation& nu);
Json to_json(const PiecewiseLinear& f);
Json to_json(const PiecewiseMoebius& m);
Json to_json(const QuadraInterval& iv);
Json to_json(const FixedPointCheck& c);
Json to_json(const WalkStep& s);
Json to_json(const JacobianCheck& j);
Json to_json(const OnePlaceReport& r);
Json to_json(const V1Certificate& c);
Json to_json(const BoundsReport& b);
Json to_json(const DichotomyReport& d);
/// bounds fills the "bounds" member ({n, c_n, ratio}); null when absent.
Json to_json(const EigenReport& r, const std::optional<BoundsReport>& bounds = std::nullopt);
Json to_json(const AffineReport& r, const std::optional<DichotomyReport>& growth = std::nullopt);

/// Inverses; ParseError (position 0) on malformed documents.
Rational rational_from_json(const Json& j);
QuadraticNumber quadratic_from_json(const Json& j);
Valuation valuation_from_json(const Json& j);

/// Two-space indentation, trailing newline.
std::string dump(const Json& j);

}  // namespace valdyn
