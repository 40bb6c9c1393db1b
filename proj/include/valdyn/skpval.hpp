/**
 * @file skpval.hpp
 * Valuations given by sequences of key polynomials (SKPs), monomial
 * valuations and -deg, with evaluation and the numerical invariants
 * (skewness, multiplicity, thinness, generic multiplicity).
 *
 * Local SKPs live in a chart (x, y) at the origin; SKPs at infinity live in
 * the chart (z, w) = (1/X, Y/X). Both may be preceded by a rational
 * coordinate change that moves the relevant direction to the chart axes.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "valdyn/numbers.hpp"
#include "valdyn/poly.hpp"

namespace valdyn {

enum class Chart { local, infinity };
enum class Normalization { local, affine };

/**
 * Invertible degree-one change of coordinates over Q. u and v are the new
 * coordinates written in the original variables; local changes are linear.
 */
struct CoordChange {
    BiPoly u = BiPoly::x();
    BiPoly v = BiPoly::y();

    static CoordChange identity() { return {}; }
    static CoordChange swap() { return {BiPoly::y(), BiPoly::x()}; }
    /// (x, y - theta*x).
    static CoordChange shear(const Rational& theta);

    bool is_identity() const { return u == BiPoly::x() && v == BiPoly::y(); }
    bool is_swap() const { return u == BiPoly::y() && v == BiPoly::x(); }
    /// Throws PreconditionError unless degree one and invertible (and linear if local).
    void validate(bool local) const;
    /// Original coordinates written in the new ones.
    CoordChange inverse() const;
    /// P rewritten in the new coordinates.
    BiPoly to_chart(const BiPoly& p) const;
    /// A chart polynomial rewritten in the original coordinates.
    BiPoly from_chart(const BiPoly& q) const;
    /// The map written in the new coordinates.
    PlaneMap conjugate(const PlaneMap& f) const;

    friend bool operator==(const CoordChange&, const CoordChange&) = default;
};

/**
 * keys[0], keys[1] are the chart coordinates; values[0] = 1. A prefix (used
 * for potentials) carries one value fewer than keys: the last value is free.
 */
struct Skp {
    Chart chart = Chart::local;
    std::vector<BiPoly> keys;
    std::vector<QuadraticNumber> values;

    std::size_t depth() const { return keys.size() - 1; }
    bool is_prefix() const { return values.size() + 1 == keys.size(); }
    friend bool operator==(const Skp&, const Skp&) = default;
};

/// n*beta = sum_l m[l]*values[l], n minimal, 0 <= m[l] < n_l for l >= 1.
struct KeyRelation {
    unsigned long n = 1;
    std::vector<long> m;
};

/// Relation of beta against the rational prefix values[0..j-1];
/// nullopt when beta is irrational.
std::optional<KeyRelation> key_relation(const std::vector<QuadraticNumber>& prefix,
                                        const QuadraticNumber& beta);

/// Data recomputed by skp_validate; vectors are indexed by stage.
struct SkpData {
    std::vector<unsigned long> n;         ///< n[j], 1 <= j < k (n[0] = 1)
    std::vector<std::vector<long>> m;     ///< m[j][l], l < j
    std::vector<unsigned long> d;         ///< d[j], 0 <= j <= k (d[0] = 1)
    std::vector<Rational> theta;          ///< theta[j], 1 <= j < k
};

/// Checks every SKP axiom; throws SkpAxiomError carrying the stage index.
SkpData skp_validate(const Skp& s);

/// Product of keys[l]^m[l].
BiPoly key_monomial(const Skp& s, const std::vector<long>& m);

/// Appends U_{k+1} = U_k^n - theta*M for the current (rational) last value
/// and assigns it the value next; without next the result is a prefix.
Skp skp_extend(const Skp& s, const Rational& theta,
               const std::optional<QuadraticNumber>& next = std::nullopt);

/// Value of a chart polynomial; nullopt stands for +infinity (P = 0).
std::optional<QuadraticNumber> skp_eval(const Skp& s, const BiPoly& p);

/// Line c + j*t in the free last value t.
struct ValueLine {
    Rational intercept;
    unsigned long slope;
};
/// For a prefix: the lines whose minimum is t -> value of P under the SKP
/// with last value t. Empty for P = 0.
std::vector<ValueLine> skp_value_lines(const Skp& prefix, const BiPoly& p);

/// Leading coefficient of the initial form: equal for A and theta^-1*B
/// whenever the initial forms of A and B are proportional with ratio theta.
Rational skp_lead(const Skp& s, const BiPoly& p);

/**
 * Residual polynomial of P at the divisorial SKP s (rational last value):
 * its nonzero roots theta are the tangent directions U_k^n - theta*M along
 * which P continues. Coefficients in increasing degree.
 */
std::vector<Rational> residual_polynomial(const Skp& s, const BiPoly& p);

/// A valuation seen through its values and initial-form leading coefficients.
class ValuationOracle {
public:
    virtual ~ValuationOracle() = default;
    /// nullopt stands for +infinity.
    virtual std::optional<QuadraticNumber> value(const BiPoly& p) const = 0;
    virtual Rational lead(const BiPoly& p) const = 0;
    virtual Normalization normalization() const = 0;
};

class Valuation : public ValuationOracle {
public:
    enum class Kind { monomial, skp, neg_deg, curve };

    Valuation() = default;
    /// Local monomial valuation x -> s, y -> t.
    static Valuation monomial(const QuadraticNumber& s, const QuadraticNumber& t);
    /// Chart inferred from s.chart; local SKPs with depth 1 in the identity
    /// or swapped chart are stored as monomial valuations.
    static Valuation skp_based(Skp s, CoordChange coords = {}, bool truncated = false);
    static Valuation neg_deg();
    /// Valuation at infinity with nu(X) = vx, nu(Y) = vy, min(vx, vy) = -1.
    static Valuation affine_monomial(const QuadraticNumber& vx, const QuadraticNumber& vy);
    /// Local curve valuation; evaluation needs phi to be a graph over a coordinate axis.
    static Valuation curve(const BiPoly& phi);

    Kind kind() const { return kind_; }
    Normalization normalization() const override { return norm_; }
    const QuadraticNumber& s() const { return s_; }
    const QuadraticNumber& t() const { return t_; }
    const Skp& skp() const { return skp_; }
    const CoordChange& coords() const { return coords_; }
    const BiPoly& curve_poly() const { return curve_; }
    bool truncated() const { return truncated_; }
    bool is_divisorial() const;

    std::optional<QuadraticNumber> value(const BiPoly& p) const override;
    Rational lead(const BiPoly& p) const override;

    /// The same valuation as an SKP with coordinate change (monomials and
    /// local SKPs only).
    std::pair<Skp, CoordChange> as_skp() const;

    std::string to_string() const;
    friend bool operator==(const Valuation& a, const Valuation& b);

private:
    Kind kind_ = Kind::monomial;
    Normalization norm_ = Normalization::local;
    QuadraticNumber s_{1}, t_{1};
    Skp skp_;
    CoordChange coords_;
    BiPoly curve_;
    bool truncated_ = false;
};

std::optional<QuadraticNumber> skp_eval(const Valuation& nu, const BiPoly& p);
/// nu(P) = value of the transform of P minus deg P; -deg P for -deg.
std::optional<QuadraticNumber> affine_eval(const Valuation& nu, const BiPoly& p);

QuadraticNumber skewness(const Valuation& nu);
unsigned long valuation_multiplicity(const Valuation& nu);
QuadraticNumber thinness(const Valuation& nu);
/// nu(phi)/m(phi) = skewness of nu ^ nu_phi (local).
QuadraticNumber inf_skewness(const Valuation& nu, const BiPoly& phi);
/// Smallest b with b times the value group inside Z.
unsigned long generic_multiplicity(const Valuation& nu);

struct OnePlaceStage {
    unsigned j = 0;
    unsigned long d = 0;
    unsigned long D = 0;      ///< degree of the affine key
    bool beta_le_d = false;
};
struct OnePlaceReport {
    std::vector<OnePlaceStage> stages;
    QuadraticNumber sum{0};        ///< beta_1 + sum (beta_{j+1} - n_j beta_j)
    bool sum_condition = false;    ///< sum < 2
    bool hypotheses = false;       ///< beta_j <= d_j for every stage and sum < 2
    bool prefix_hypotheses = false; ///< the same conditions up to the last-but-one stage
    bool degrees_match = false;    ///< D_j = d_j checked directly
    bool certified = false;
};
OnePlaceReport one_place_certify(const Skp& s);

struct PencilGenus {
    Integer g;
    bool rational = false;
};
/// g = (A b + 1)/2; throws PreconditionError when not a non-negative integer.
PencilGenus pencil_genus(const QuadraticNumber& a, unsigned long b);

/**
 * Rebuilds the SKP of a valuation from its values and leading coefficients,
 * one key at a time; truncated when max_depth keys do not suffice.
 */
Valuation reconstruct_valuation(const ValuationOracle& oracle, unsigned max_depth = 16);

/// Text forms: monomial(s, t), negdeg, curve(P), and
/// skp{chart=local; coords=[x, y]; keys=[x, y, y^2-x^3]; values=[1, 3/2, 7/2]}.
std::string skp_to_string(const Skp& s, const CoordChange& coords = {}, bool truncated = false);
Valuation parse_valuation(const std::string& text);

}  // namespace valdyn
