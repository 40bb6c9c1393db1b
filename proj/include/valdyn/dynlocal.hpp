/**
 * @file dynlocal.hpp
 * The action of a superattracting fixed point germ on normalized local
 * valuations: attraction rates, pushforwards, contracted curves, the
 * critical tree, and the search for an eigenvaluation.
 */
#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "valdyn/numbers.hpp"
#include "valdyn/poly.hpp"
#include "valdyn/potentials.hpp"
#include "valdyn/skpval.hpp"

namespace valdyn {

/// c(f, nu) = min(nu(f1), nu(f2)). ContractedError when both are infinite.
QuadraticNumber attraction_rate(const PlaneMap& f, const ValuationOracle& nu);

/**
 * f_bullet nu seen through its values: value(P) = nu(P o f) / c(f, nu).
 * A Valuation is copied; any other oracle is referenced and must outlive
 * the evaluator.
 */
class LocalPushforward : public ValuationOracle {
public:
    LocalPushforward(PlaneMap f, const ValuationOracle& nu);
    LocalPushforward(PlaneMap f, const Valuation& nu);

    std::optional<QuadraticNumber> value(const BiPoly& p) const override;
    Rational lead(const BiPoly& p) const override;
    Normalization normalization() const override { return Normalization::local; }
    const QuadraticNumber& rate() const { return c_; }

private:
    PlaneMap f_;
    std::shared_ptr<const Valuation> owned_;
    const ValuationOracle* nu_;
    QuadraticNumber c_;
};

LocalPushforward pushforward_eval(const PlaneMap& f, const ValuationOracle& nu);
LocalPushforward pushforward_eval(const PlaneMap& f, const Valuation& nu);
/// f_bullet nu rebuilt as an SKP (or curve) valuation.
Valuation pushforward_valuation(const PlaneMap& f, const ValuationOracle& nu, unsigned max_depth = 16);

struct ContractedCurves {
    std::vector<BiPoly> curves;  ///< normalized irreducible factors of gcd(f1, f2) through the origin
    bool complete = true;
};
ContractedCurves contracted_curves(const PlaneMap& f);

/// Piece of the subtree spanned by the curves dividing f1*f2: the last
/// value of prefix runs over [lo, hi] (hi = nullopt: up to the key curve).
struct CandidateSegment {
    CoordChange coords;
    Skp prefix;
    QuadraticNumber lo;
    std::optional<QuadraticNumber> hi;
    PiecewiseLinear cpotential;  ///< c(f, .) as a function of the last value
};
struct CandidateTree {
    std::vector<CandidateSegment> segments;
    bool complete = true;  ///< false when some factor or direction could not be split over Q
};
CandidateTree candidate_segments(const PlaneMap& f, unsigned max_depth = 12);

enum class EndKind { contracted_curve, preimage_of_root };

struct CriticalElement {
    Valuation valuation;
    EndKind kind = EndKind::contracted_curve;
    bool is_end = false;  ///< maximal among the elements found
};
struct CriticalTreeEnds {
    std::vector<CriticalElement> elements;
    bool complete = true;
};
/// Contracted curve valuations and divisorial preimages of nu_m other than nu_m.
CriticalTreeEnds critical_tree_ends(const PlaneMap& f);

enum class EigenType { divisorial, irrational, curve, infinitely_singular };
enum class NormalForm { type_i, type_ii, type_iii, type_iv };
std::string to_string(EigenType t);
std::string to_string(NormalForm n);

struct FixedPointCheck {
    unsigned degree = 0;        ///< monomials of total degree <= degree were compared
    std::size_t checked = 0;
    bool passed = false;
    std::string method;
    std::optional<BiPoly> counterexample;
};

struct WalkStep {
    std::string chart;
    std::size_t stage = 1;
    QuadraticNumber lo;                         ///< segment start (skewness)
    std::optional<QuadraticNumber> fixed_point; ///< fixed point of the segment map (skewness)
    std::string action;
};

struct EigenReport {
    Valuation eigen;
    QuadraticInteger rate;
    EigenType type = EigenType::divisorial;
    NormalForm normal_form = NormalForm::type_i;
    /// (a, b, c, d): the segment map t -> (c + d t)/(a + b t) near an irrational eigen.
    std::optional<std::array<Rational, 4>> matrix;
    FixedPointCheck verification;
    bool involutive = false;
    bool superattracting = false;
    /// Skewness alpha_0 giving the lower bound c(f^n) >= c_inf^n / alpha_0.
    QuadraticNumber bound_skewness{1};
    /// Skewness bracket around a truncated infinitely singular eigen.
    std::optional<std::pair<QuadraticNumber, std::optional<QuadraticNumber>>> bracket;
    bool rate_stable = true;
    std::vector<WalkStep> walk;
};

/// Keys of higher multiplicity are not built: the walk stops with a
/// truncated report instead (key sizes grow exponentially with the depth).
inline constexpr unsigned long kMaxKeyMultiplicity = 16;

/// test_degree = 0 picks 2 deg f + 2.
EigenReport eigenvaluation_search(const PlaneMap& f, unsigned max_depth = 16, unsigned test_degree = 0);

/// Compares nu(P o f) with c nu(P) for monomials up to the degree and the keys of nu.
FixedPointCheck check_fixed(const PlaneMap& f, const Valuation& nu, const QuadraticNumber& c, unsigned degree);

struct BoundsReport {
    unsigned n_max = 0;
    std::vector<unsigned long> c;       ///< c(f^n), n = 1..n_max
    QuadraticNumber delta;              ///< 1 / alpha_0
    QuadraticNumber min_ratio;          ///< min c(f^n) / c_inf^n
    unsigned min_ratio_at = 0;
};
/// Checks delta c_inf^n <= c(f^n) <= c_inf^n exactly; FalsificationError otherwise.
BoundsReport verify_bounds(const PlaneMap& f, const EigenReport& r, unsigned n_max);

struct JacobianCheck {
    bool skipped = false;
    std::string reason;
    QuadraticNumber lhs;  ///< c(f, nu) A(f_bullet nu)
    QuadraticNumber rhs;  ///< A(nu) + nu(Jf)
    bool holds = false;
};
JacobianCheck jacobian_identity_check(const PlaneMap& f, const Valuation& nu);

struct NormalFormInfo {
    NormalForm form = NormalForm::type_i;
    std::optional<std::array<Rational, 4>> matrix;
    std::string formula;
    bool consistent = false;
};
/// PreconditionError when the report contradicts its own rate formula.
NormalFormInfo classify_normal_form(const EigenReport& r);

}  // namespace valdyn
