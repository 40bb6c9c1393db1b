/**
 * @file cfquad.hpp
 * Continued fractions of real quadratic irrationals and invariant intervals
 * with unimodular endpoints around the fixed point of a Moebius map.
 */
#pragma once

#include <vector>

#include "valdyn/numbers.hpp"

namespace valdyn {

struct CfExpansion {
    std::vector<Integer> preperiod;
    std::vector<Integer> period;
    /// The first count partial quotients.
    std::vector<Integer> terms(std::size_t count) const;
};

/// Eventually periodic expansion of x > 0 irrational. ResourceError when the
/// period does not close within max_terms quotients.
CfExpansion cf_expand(const QuadraticNumber& x, std::size_t max_terms = 10000);

struct Convergent {
    Integer p;
    Integer q;
};
/// P_j/Q_j = [a_0, ..., a_j] for every prefix.
std::vector<Convergent> convergents(const std::vector<Integer>& terms);

struct QuadraInterval {
    Integer p, q, p2, q2;            ///< p/q < t+ < p2/q2
    Integer abar, bbar, cbar, dbar;  ///< M(t) = (abar t + bbar)/(cbar t + dbar)
    QuadraticNumber t_plus;
    std::size_t period = 0;          ///< period length l of the expansion used
    std::size_t k = 0;               ///< multiple of l that produced the interval
    Integer shift;                   ///< n with t- + n in (-1, 0)
    bool inverted = false;           ///< built for 1/t+ and mapped back
};

/// Positive irrational fixed point of M; PreconditionError when there is none.
QuadraticNumber moebius_positive_fixed_point(const Integer& a, const Integer& b, const Integer& c, const Integer& d);

/**
 * Unimodular interval around t+ mapped into itself by M, with both
 * denominators above size_floor. Every invariant is re-checked exactly
 * before returning; a failure is an InternalError.
 */
QuadraInterval quadra_interval(const Integer& abar, const Integer& bbar, const Integer& cbar, const Integer& dbar,
                               const Integer& size_floor = 0);

/// The invariants p2 q - p q2 = 1, p/q < t+ < p2/q2 and M[p/q, p2/q2] inside
/// [p/q, p2/q2], checked with exact arithmetic.
bool quadra_invariants_hold(const QuadraInterval& iv);

}  // namespace valdyn
