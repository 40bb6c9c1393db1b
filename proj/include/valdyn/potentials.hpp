/**
 * @file potentials.hpp
 * Exact piecewise-linear functions of the skewness parameter on a segment,
 * and piecewise-Moebius segment maps with their fixed points.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "valdyn/numbers.hpp"
#include "valdyn/skpval.hpp"

namespace valdyn {

/// intercept + slope * t.
struct Line {
    Rational intercept;
    Rational slope;
    QuadraticNumber at(const QuadraticNumber& t) const { return QuadraticNumber(intercept) + QuadraticNumber(slope) * t; }
    friend bool operator==(const Line&, const Line&) = default;
};

/**
 * Continuous function on [lo, hi] (hi = nullopt means +infinity), linear on
 * the pieces cut out by the strictly increasing interior breakpoints.
 */
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    PiecewiseLinear(QuadraticNumber lo, std::optional<QuadraticNumber> hi, std::vector<QuadraticNumber> breakpoints,
                    std::vector<Line> pieces);
    static PiecewiseLinear line(const Line& l, const QuadraticNumber& lo, const std::optional<QuadraticNumber>& hi);
    /// Pointwise minimum of the lines on the domain.
    static PiecewiseLinear lower_envelope(const std::vector<Line>& lines, const QuadraticNumber& lo,
                                          const std::optional<QuadraticNumber>& hi);

    const QuadraticNumber& lo() const { return lo_; }
    const std::optional<QuadraticNumber>& hi() const { return hi_; }
    const std::vector<QuadraticNumber>& breakpoints() const { return breakpoints_; }
    const std::vector<Line>& pieces() const { return pieces_; }
    /// Start and end of piece i (end nullopt for +infinity).
    QuadraticNumber piece_lo(std::size_t i) const;
    std::optional<QuadraticNumber> piece_hi(std::size_t i) const;

    bool contains(const QuadraticNumber& t) const;
    /// Index of the piece containing t (the left one at a breakpoint).
    std::size_t piece_index(const QuadraticNumber& t) const;
    QuadraticNumber eval(const QuadraticNumber& t) const;
    bool is_concave() const;
    bool has_integer_slopes() const;
    /// t -> f(k t) for k > 0.
    PiecewiseLinear reparam(const Rational& k) const;
    /// Restriction to [lo, hi] inside the domain.
    PiecewiseLinear restrict(const QuadraticNumber& lo, const std::optional<QuadraticNumber>& hi) const;

    std::string to_string() const;
    /// "t,value" rows at evenly spaced points; an infinite domain is sampled up
    /// to one unit past the last breakpoint.
    std::string to_csv(unsigned samples) const;

    friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;

private:
    QuadraticNumber lo_{0};
    std::optional<QuadraticNumber> hi_;
    std::vector<QuadraticNumber> breakpoints_;
    std::vector<Line> pieces_;
};

/// Domains must agree; PreconditionError otherwise.
PiecewiseLinear pl_min(const PiecewiseLinear& f, const PiecewiseLinear& g);
PiecewiseLinear pl_sum(const PiecewiseLinear& f, const PiecewiseLinear& g);
/// r * f for r > 0.
PiecewiseLinear pl_scale(const PiecewiseLinear& f, const Rational& r);

/**
 * t -> value of P under the SKP prefix completed by the last value t, on
 * [lo, hi]. lo may sit on the axiom boundary n_{k-1} beta_{k-1} (or 0 for
 * depth one), where the formula extends continuously.
 */
PiecewiseLinear potential_on_segment(const Skp& prefix, const BiPoly& p, const QuadraticNumber& lo,
                                     const std::optional<QuadraticNumber>& hi);

/// t -> (a + b t)/(c + d t).
struct Moebius {
    Rational a, b, c, d;

    QuadraticNumber eval(const QuadraticNumber& t) const;
    /// M'(t) = (bc - ad)/(c + d t)^2.
    QuadraticNumber derivative(const QuadraticNumber& t) const;
    bool is_identity() const { return a == 0 && d == 0 && b == c && b != 0; }
    bool is_degenerate() const { return a * d == b * c; }
    /// M o M = id (trace zero).
    bool is_involutive() const { return b + c == 0; }
    /// Coprime integer coefficients with a positive first nonzero among (c, d).
    Moebius normalized() const;
    /// Some representative (up to common sign) has all coefficients >= 0.
    bool has_nonnegative_form() const;
    std::string to_string() const;
    friend bool operator==(const Moebius&, const Moebius&) = default;
};

class PiecewiseMoebius {
public:
    PiecewiseMoebius() = default;
    PiecewiseMoebius(QuadraticNumber lo, std::optional<QuadraticNumber> hi, std::vector<QuadraticNumber> breakpoints,
                     std::vector<Moebius> pieces);

    const QuadraticNumber& lo() const { return lo_; }
    const std::optional<QuadraticNumber>& hi() const { return hi_; }
    const std::vector<QuadraticNumber>& breakpoints() const { return breakpoints_; }
    const std::vector<Moebius>& pieces() const { return pieces_; }
    QuadraticNumber piece_lo(std::size_t i) const;
    std::optional<QuadraticNumber> piece_hi(std::size_t i) const;
    std::size_t piece_index(const QuadraticNumber& t) const;
    QuadraticNumber eval(const QuadraticNumber& t) const;
    /// Every piece has a non-negative representative.
    bool nonnegative_certificate() const;
    std::string to_string() const;

private:
    QuadraticNumber lo_{0};
    std::optional<QuadraticNumber> hi_;
    std::vector<QuadraticNumber> breakpoints_;
    std::vector<Moebius> pieces_;
};

/**
 * numerator / (m_psi * cpotential) piece by piece. Throws ArithmeticError
 * when the denominator vanishes on the domain and PreconditionError naming
 * the piece for a degenerate quotient unless allow_constant is set.
 */
PiecewiseMoebius induced_moebius(const PiecewiseLinear& numerator, const PiecewiseLinear& cpotential,
                                 unsigned long m_psi, bool allow_constant = false);

struct MoebiusFixedPoint {
    QuadraticNumber t;
    bool attracting = false;
    /// The piece fixes every point of its subdomain (t is the piece start).
    bool everywhere = false;
    bool involutive = false;
    std::size_t piece = 0;
};

/// Fixed points inside each piece's closed subdomain, sorted by t, without
/// repeats at shared breakpoints.
std::vector<MoebiusFixedPoint> moebius_fixed_points(const PiecewiseMoebius& pm);

/// Real roots of d t^2 + (c - b) t - a = 0 for one piece, ascending.
std::vector<QuadraticNumber> moebius_fixed_points(const Moebius& m);

}  // namespace valdyn
