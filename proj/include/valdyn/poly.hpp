/**
 * @file poly.hpp
 * Sparse bivariate polynomials over Q, plane maps, composition oracles,
 * gcd and a partial factorizer.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "valdyn/numbers.hpp"

namespace valdyn {

/// Exponent pair (i, j) of x^i y^j.
using Exponent = std::pair<unsigned, unsigned>;

/// Variable names used for parsing and rendering.
struct VarNames {
    std::string x;
    std::string y;
};
inline const VarNames kLocalVars{"x", "y"};
inline const VarNames kAffineVars{"X", "Y"};
inline const VarNames kChartVars{"z", "w"};

class BiPoly {
public:
    using Terms = std::map<Exponent, Rational>;

    BiPoly() = default;
    explicit BiPoly(Terms terms);
    static BiPoly constant(const Rational& c);
    static BiPoly monomial(unsigned i, unsigned j, const Rational& c = 1);
    static BiPoly x() { return monomial(1, 0); }
    static BiPoly y() { return monomial(0, 1); }

    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }
    Rational coeff(unsigned i, unsigned j) const;
    /// Adds c*x^i*y^j, dropping the term if it cancels.
    void add_term(unsigned i, unsigned j, const Rational& c);

    /// Total degree; 0 for the zero polynomial.
    unsigned total_degree() const;
    unsigned degree_x() const;
    unsigned degree_y() const;
    bool is_constant() const { return terms_.empty() || (size() == 1 && terms_.begin()->first == Exponent{0, 0}); }
    bool is_homogeneous() const;
    /// Terms of total degree < order.
    BiPoly truncated(unsigned order) const;
    /// Homogeneous part of lowest total degree.
    BiPoly lowest_form() const;
    BiPoly swap_xy() const;
    BiPoly dx() const;
    BiPoly dy() const;
    BiPoly pow(unsigned n) const;
    /// Coefficient of y^j as a polynomial in x (stored with j = 0).
    BiPoly coeff_y(unsigned j) const;
    Rational eval(const Rational& x, const Rational& y) const;

    /// Canonical compact text, terms sorted by (i, j): "y^2-x^3".
    std::string to_string(const VarNames& v = kLocalVars) const;

    friend BiPoly operator+(const BiPoly& a, const BiPoly& b);
    friend BiPoly operator-(const BiPoly& a, const BiPoly& b);
    friend BiPoly operator*(const BiPoly& a, const BiPoly& b);
    friend BiPoly operator*(const Rational& c, const BiPoly& a);
    BiPoly operator-() const;
    BiPoly& operator+=(const BiPoly& b);
    BiPoly& operator-=(const BiPoly& b);
    BiPoly& operator*=(const BiPoly& b) { return *this = *this * b; }
    friend bool operator==(const BiPoly& a, const BiPoly& b) { return a.terms_ == b.terms_; }

private:
    Terms terms_;
};

/// Parses sums of products of integers, rationals, the two variables,
/// parentheses and non-negative integer powers. Throws ParseError.
BiPoly parse_poly(const std::string& text, const VarNames& v = kLocalVars);

/// Minimal total degree of the support; throws PreconditionError on 0.
unsigned multiplicity(const BiPoly& p);

/// Lower-left boundary of the Newton polygon.
struct NewtonDiagram {
    std::vector<Exponent> vertices;
};
NewtonDiagram newton_diagram(const BiPoly& p);

BiPoly mul_truncated(const BiPoly& a, const BiPoly& b, unsigned order);
/// P(g1, g2).
BiPoly substitute(const BiPoly& p, const BiPoly& g1, const BiPoly& g2);
/// P(g1, g2) keeping only terms of total degree < order.
BiPoly substitute_truncated(const BiPoly& p, const BiPoly& g1, const BiPoly& g2, unsigned order);

enum class MapKind { local_germ, affine };

struct PlaneMap {
    BiPoly f1;
    BiPoly f2;
    MapKind kind = MapKind::local_germ;

    /// Checks the germ condition for local maps; throws PreconditionError.
    void validate() const;
    bool is_dominant() const;
    unsigned degree() const { return std::max(f1.total_degree(), f2.total_degree()); }
    std::string to_string() const;
    friend bool operator==(const PlaneMap&, const PlaneMap&) = default;
};

/// Parses "(P, Q)"; local maps use x,y and affine maps X,Y.
PlaneMap parse_map(const std::string& text, MapKind kind);

BiPoly jacobian_det(const PlaneMap& f);
/// f o g.
PlaneMap compose(const PlaneMap& f, const PlaneMap& g);
PlaneMap compose_truncated(const PlaneMap& f, const PlaneMap& g, unsigned order);

/// Largest truncation order mult_sequence will try.
inline constexpr unsigned kMaxTruncationOrder = 1U << 22;
/// [c(f), c(f^2), ..., c(f^n_max)] via adaptively truncated composition.
std::vector<unsigned long> mult_sequence(const PlaneMap& f, unsigned n_max,
                                         unsigned max_order = kMaxTruncationOrder);

/// Default ceiling on intermediate term counts; overridden by VALDYN_TERM_BUDGET.
inline constexpr std::size_t kDefaultTermBudget = 2'000'000;
std::size_t term_budget_from_env();
/// [deg F, deg F^2, ..., deg F^n_max] by full composition.
std::vector<unsigned long> deg_sequence(const PlaneMap& F, unsigned n_max,
                                        std::size_t term_budget = term_budget_from_env());

/// z^deg(P) * P(1/z, w/z).
BiPoly at_infinity_transform(const BiPoly& p);

/// Division with remainder by u, which must be monic in y; the remainder has
/// y-degree below that of u.
std::pair<BiPoly, BiPoly> divmod_monic_y(const BiPoly& p, const BiPoly& u);
/// a / b when b divides a exactly.
std::optional<BiPoly> exact_div(const BiPoly& a, const BiPoly& b);
/// Integer-coefficient primitive form with positive leading term
/// (largest y-degree, then largest x-degree).
BiPoly normalize(const BiPoly& p);
/// Normalized greatest common divisor; gcd(0, 0) = 0.
BiPoly gcd(const BiPoly& a, const BiPoly& b);

struct Factorization {
    Rational unit{1};
    std::vector<std::pair<BiPoly, unsigned>> factors;  ///< normalized, sorted by text
    bool complete = true;  ///< false when some factor may still be reducible
};
/// Factorization into powers of normalized factors. Candidates are tried by
/// trial division first. Factors are reported as irreducible when a
/// sufficient test applies; otherwise complete = false.
Factorization factor(const BiPoly& p, const std::vector<BiPoly>& candidates = {});

}  // namespace valdyn
