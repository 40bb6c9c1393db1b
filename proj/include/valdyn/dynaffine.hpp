/**
 * @file dynaffine.hpp
 * Polynomial maps of C^2 acting on valuations centered at infinity: d(F, nu),
 * the V1 certificate, the affine eigenvaluation walk, the degree-growth
 * dichotomy and the affine Jacobian identity.
 *
 * Affine valuations are Valuation objects with affine normalization: -deg,
 * or an SKP at infinity behind a rational affine coordinate change.
 */
#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "valdyn/dynlocal.hpp"
#include "valdyn/numbers.hpp"
#include "valdyn/poly.hpp"
#include "valdyn/skpval.hpp"

namespace valdyn {

/// d(F, nu) = -min(nu(F1), nu(F2), 0).
QuadraticNumber d_of(const PlaneMap& F, const ValuationOracle& nu);

/// F_bullet nu through its values: value(P) = nu(P o F) / d(F, nu).
class AffinePushforward : public ValuationOracle {
public:
    /// PreconditionError when d(F, nu) = 0 (image not centered at infinity).
    AffinePushforward(PlaneMap F, const ValuationOracle& nu);
    AffinePushforward(PlaneMap F, const Valuation& nu);

    std::optional<QuadraticNumber> value(const BiPoly& p) const override;
    Rational lead(const BiPoly& p) const override;
    Normalization normalization() const override { return Normalization::affine; }
    const QuadraticNumber& d() const { return d_; }

private:
    PlaneMap F_;
    std::shared_ptr<const Valuation> owned_;
    const ValuationOracle* nu_;
    QuadraticNumber d_;
};

AffinePushforward affine_pushforward_eval(const PlaneMap& F, const Valuation& nu);
/// F_bullet nu rebuilt as -deg or an SKP at infinity.
Valuation affine_pushforward_valuation(const PlaneMap& F, const Valuation& nu, unsigned max_depth = 16);

enum class V1Status { certified_in_v1, certified_not, inconclusive };
std::string to_string(V1Status s);

struct V1Certificate {
    V1Status status = V1Status::inconclusive;
    std::optional<OnePlaceReport> one_place;  ///< absent for -deg
    bool beta_le_d = true;                    ///< beta_j <= d_j at every stage
    bool sum_condition = true;
    QuadraticNumber skewness{1};
    QuadraticNumber thinness{-2};
    bool thinness_ok = true;                  ///< A <= 0
    unsigned sample_degree = 0;
    bool values_ok = true;                    ///< nu(P) <= 0 on sampled monomials
    std::optional<BiPoly> positive_monomial;
};
/// Sufficient conditions for nu in V1; a positive value, A > 0 or a negative
/// skewness certify that nu is not in V1.
V1Certificate v1_certificate(const Valuation& nu, unsigned sample_degree);

enum class Dichotomy { bounded_ratio, skew_product };
std::string to_string(Dichotomy d);

struct AffineReport {
    Valuation eigen = Valuation::neg_deg();
    QuadraticInteger rate;  ///< d_inf
    EigenType type = EigenType::divisorial;
    /// Family of the rigid normal form; absent for skew products.
    std::optional<NormalForm> normal_form;
    /// (a, b, c, d): alpha -> (c + d alpha)/(a + b alpha) near an irrational eigen, with d(F, .) = a + b alpha.
    std::optional<std::array<Rational, 4>> matrix;
    Dichotomy dichotomy = Dichotomy::bounded_ratio;
    bool skew_product = false;
    /// Coordinates (L, M) in which F1 should depend on L only, when the pencil is linear.
    std::optional<CoordChange> skew_coords;
    /// Divisorial eigen with alpha > 0 and A = 0.
    bool open_case = false;
    bool involutive = false;
    FixedPointCheck verification;
    V1Certificate certificate;
    /// Skewness alpha_0 with deg(F^n) <= d_inf^n / alpha_0 (0 for skew products).
    QuadraticNumber bound_skewness{1};
    std::optional<std::pair<QuadraticNumber, std::optional<QuadraticNumber>>> bracket;
    bool rate_stable = true;
    /// Walk steps; lo and fixed_point are relative skewness 1 - alpha.
    std::vector<WalkStep> walk;
};

/// test_degree = 0 picks 2 deg F + 2.
AffineReport affine_eigenvaluation_search(const PlaneMap& F, unsigned max_depth = 16, unsigned test_degree = 0);

/// Compares nu(P o F) with d nu(P) for monomials up to the degree and the keys of nu.
FixedPointCheck affine_check_fixed(const PlaneMap& F, const Valuation& nu, const QuadraticNumber& d, unsigned degree);

struct DichotomyReport {
    Dichotomy branch = Dichotomy::bounded_ratio;
    std::vector<unsigned long> degrees;  ///< deg F^n, n = 1..n_max
    std::vector<QuadraticNumber> ratios; ///< deg F^n / d_inf^n
    QuadraticNumber observed_D{1};       ///< max ratio
    std::optional<QuadraticNumber> D_bound;
    bool single_variable = false;        ///< F1 depends on L only in skew_coords
    unsigned deg_p = 0;
    unsigned deg_y_q = 0;
    bool drop = false;                   ///< deg_Y Q = deg P and its leading coefficient is not constant
    std::optional<Rational> x0;          ///< a rational root of that leading coefficient
};
/// FalsificationError when the observed degrees contradict the reported branch.
DichotomyReport skew_dichotomy(const PlaneMap& F, const AffineReport& r, unsigned n_max);

/// lhs = d(F, nu) A(F_bullet nu), rhs = nu(JF) + A(nu).
JacobianCheck affine_jacobian_check(const PlaneMap& F, const Valuation& nu);

struct ActPolFactor {
    BiPoly factor;
    unsigned power = 1;
    unsigned long deg = 0;
    unsigned long m_center = 0;  ///< intersection with the line at infinity at the center of nu
    unsigned long m_top = 0;     ///< multiplicity of the center's direction in the top form
    QuadraticNumber meet_skewness{1};  ///< alpha(nu ^ branch) at the center
};
struct ActPolCheck {
    std::vector<ActPolFactor> factors;
    QuadraticNumber value;          ///< nu(prod P_i^k_i)
    QuadraticNumber decomposition;  ///< -sum k_i m alpha(nu ^ branch)
    unsigned long sum_m = 0;
    unsigned long degree = 0;
    bool holds = false;
};
/// PreconditionError for constant or zero factors.
ActPolCheck act_pol_check(const Valuation& nu, const std::vector<std::pair<BiPoly, unsigned>>& factors);

}  // namespace valdyn
