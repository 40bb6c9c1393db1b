#include "valdyn/dynaffine.hpp"

#include <algorithm>

#include "upoly.hpp"
#include "valdyn/errors.hpp"
#include "valdyn/potentials.hpp"

namespace valdyn {

using QN = QuadraticNumber;

namespace {

void require_affine_dominant(const PlaneMap& F) {
    if (F.kind != MapKind::affine) throw PreconditionError("expected an affine map");
    if (!F.is_dominant()) throw PreconditionError("map is not dominant");
}

void require_affine_valuation(const Valuation& nu) {
    if (nu.normalization() != Normalization::affine) throw PreconditionError("expected a valuation at infinity");
}

QN qn_of(unsigned long n) { return QN(Rational(Integer(n))); }

BiPoly top_form(const BiPoly& p) {
    BiPoly out;
    const unsigned d = p.total_degree();
    for (const auto& [e, c] : p.terms())
        if (e.first + e.second == d) out.add_term(e.first, e.second, c);
    return out;
}

std::string chart_label(const CoordChange& c) {
    if (c.is_identity()) return "identity";
    if (c.is_swap()) return "swap";
    return "(" + c.u.to_string(kAffineVars) + ", " + c.v.to_string(kAffineVars) + ")";
}

/// The polynomial Q with at_infinity_transform(Q) = psi, for psi not divisible by z.
BiPoly affine_key(const BiPoly& psi) {
    BiPoly q = at_infinity_transform(psi);
    unsigned k = q.total_degree();
    for (const auto& [e, c] : q.terms()) k = std::min(k, e.first);
    if (k == 0) return q;
    BiPoly out;
    for (const auto& [e, c] : q.terms()) out.add_term(e.first - k, e.second, c);
    return out;
}

PiecewiseLinear pl_const(const Rational& c, const QN& lo, const std::optional<QN>& hi) {
    return PiecewiseLinear::line({c, Rational(0)}, lo, hi);
}

PiecewiseLinear pl_negate(const PiecewiseLinear& f) {
    std::vector<Line> pieces;
    for (const auto& l : f.pieces()) pieces.push_back({Rational(-l.intercept), Rational(-l.slope)});
    return PiecewiseLinear(f.lo(), f.hi(), f.breakpoints(), pieces);
}

/// beta -> affine value of P under the prefix completed by beta.
PiecewiseLinear affine_potential(const Skp& prefix, const BiPoly& p, const QN& lo, const std::optional<QN>& hi) {
    return pl_sum(potential_on_segment(prefix, at_infinity_transform(p), lo, hi),
                  pl_const(Rational(-static_cast<long>(p.total_degree())), lo, hi));
}

/// Relative values and leading coefficients of chart polynomials under an affine oracle.
struct ChartView {
    const ValuationOracle& o;
    const CoordChange& coords;

    std::optional<QN> value(const BiPoly& q) const {
        auto v = o.value(coords.from_chart(at_infinity_transform(q)));
        if (!v) return v;
        return *v + qn_of(q.total_degree());
    }
    /// Normalized by lead(u)^deg q, since the transform multiplies by X^deg q.
    Rational lead(const BiPoly& q) const {
        Rational l = o.lead(coords.from_chart(at_infinity_transform(q)));
        const Rational lu = o.lead(coords.from_chart(BiPoly::x()));
        for (unsigned long i = 0; i < q.total_degree(); ++i) l = Rational(l / lu);
        return l;
    }
};

struct SkewShape {
    bool single_variable = false;
    unsigned deg_p = 0;
    unsigned deg_y_q = 0;
    bool drop = false;
    std::optional<Rational> x0;
};

/// Shape of F = (P, Q) in the coordinates c, when P depends on the first one only.
SkewShape skew_shape(const PlaneMap& F, const CoordChange& c) {
    SkewShape s;
    const PlaneMap g = c.conjugate(F);
    s.single_variable = g.f1.degree_y() == 0;
    if (!s.single_variable) return s;
    s.deg_p = g.f1.total_degree();
    s.deg_y_q = g.f2.degree_y();
    const BiPoly lead = g.f2.coeff_y(s.deg_y_q);
    s.drop = s.deg_y_q == s.deg_p && !lead.is_constant();
    if (s.drop) {
        detail::UPoly u(lead.degree_x() + 1);
        for (const auto& [e, cf] : lead.terms()) u[e.first] = cf;
        bool ok = true;
        auto roots = detail::rational_roots(u, ok);
        if (!roots.empty()) s.x0 = roots.front();
    }
    return s;
}

QuadraticInteger integer_rate(const QN& c, const char* what) {
    try {
        return QuadraticInteger::from_value(c);
    } catch (const PreconditionError&) {
        throw InternalError(std::string("rate at the ") + what + " is not an algebraic integer: " + c.to_string());
    }
}

}  // namespace

QN d_of(const PlaneMap& F, const ValuationOracle& nu) {
    if (nu.normalization() != Normalization::affine) throw PreconditionError("d(F, nu) needs a valuation at infinity");
    QN m(0);
    for (const BiPoly* p : {&F.f1, &F.f2}) {
        auto v = nu.value(*p);
        if (v) m = min(m, *v);
    }
    return -m;
}

AffinePushforward::AffinePushforward(PlaneMap F, const ValuationOracle& nu)
    : F_(std::move(F)), nu_(&nu), d_(d_of(F_, nu)) {
    if (d_.sign() <= 0) throw PreconditionError("d(F, nu) = 0: the image is not centered at infinity");
}

AffinePushforward::AffinePushforward(PlaneMap F, const Valuation& nu)
    : F_(std::move(F)), owned_(std::make_shared<const Valuation>(nu)), nu_(owned_.get()), d_(d_of(F_, *nu_)) {
    if (d_.sign() <= 0) throw PreconditionError("d(F, nu) = 0: the image is not centered at infinity");
}

std::optional<QN> AffinePushforward::value(const BiPoly& p) const {
    auto v = nu_->value(substitute(p, F_.f1, F_.f2));
    if (!v) return v;
    return *v / d_;
}

Rational AffinePushforward::lead(const BiPoly& p) const { return nu_->lead(substitute(p, F_.f1, F_.f2)); }

AffinePushforward affine_pushforward_eval(const PlaneMap& F, const Valuation& nu) {
    require_affine_valuation(nu);
    return AffinePushforward(F, nu);
}

Valuation affine_pushforward_valuation(const PlaneMap& F, const Valuation& nu, unsigned max_depth) {
    return reconstruct_valuation(affine_pushforward_eval(F, nu), max_depth);
}

std::string to_string(V1Status s) {
    switch (s) {
        case V1Status::certified_in_v1:
            return "certified-in-V1";
        case V1Status::certified_not:
            return "certified-not";
        case V1Status::inconclusive:
            return "inconclusive";
    }
    return "";
}

std::string to_string(Dichotomy d) { return d == Dichotomy::bounded_ratio ? "bounded-ratio" : "skew-product"; }

V1Certificate v1_certificate(const Valuation& nu, unsigned sample_degree) {
    require_affine_valuation(nu);
    V1Certificate c;
    c.sample_degree = sample_degree;
    c.skewness = skewness(nu);
    if (!nu.truncated()) {
        c.thinness = thinness(nu);
        c.thinness_ok = c.thinness <= QN(0);
    }
    if (nu.kind() == Valuation::Kind::skp) {
        c.one_place = one_place_certify(nu.skp());
        for (const auto& st : c.one_place->stages) c.beta_le_d = c.beta_le_d && st.beta_le_d;
        c.sum_condition = c.one_place->sum_condition;
    }
    for (unsigned k = 1; k <= sample_degree && c.values_ok; ++k)
        for (unsigned i = 0; i <= k; ++i) {
            BiPoly m = BiPoly::monomial(i, k - i);
            auto v = nu.value(m);
            if (v && v->sign() > 0) {
                c.values_ok = false;
                c.positive_monomial = m;
                break;
            }
        }
    const bool violated = !c.values_ok || !c.thinness_ok || c.skewness.sign() < 0;
    const bool sufficient = nu.kind() == Valuation::Kind::neg_deg ||
                            (c.one_place && c.one_place->certified && c.one_place->degrees_match);
    if (violated) c.status = V1Status::certified_not;
    else if (sufficient) c.status = V1Status::certified_in_v1;
    else c.status = V1Status::inconclusive;
    return c;
}

FixedPointCheck affine_check_fixed(const PlaneMap& F, const Valuation& nu, const QN& d, unsigned degree) {
    FixedPointCheck out;
    out.degree = degree;
    out.passed = true;
    out.method = "values";
    std::vector<BiPoly> tests;
    for (unsigned k = 1; k <= degree; ++k)
        for (unsigned i = 0; i <= k; ++i) tests.push_back(BiPoly::monomial(i, k - i));
    if (nu.kind() == Valuation::Kind::skp)
        for (std::size_t j = 2; j < nu.skp().keys.size(); ++j)
            tests.push_back(nu.coords().from_chart(affine_key(nu.skp().keys[j])));
    for (const auto& p : tests) {
        ++out.checked;
        auto v = nu.value(p);
        auto w = nu.value(substitute(p, F.f1, F.f2));
        if (!v || !w || *w != d * *v) {
            out.passed = false;
            out.counterexample = p;
            break;
        }
    }
    return out;
}

AffineReport affine_eigenvaluation_search(const PlaneMap& F, unsigned max_depth, unsigned test_degree) {
    require_affine_dominant(F);
    if (max_depth == 0) max_depth = 1;
    if (test_degree == 0) test_degree = 2 * F.degree() + 2;
    AffineReport r;
    const BiPoly X = BiPoly::x(), Y = BiPoly::y();

    // direction of F_bullet(-deg)
    const unsigned deg1 = F.f1.total_degree(), deg2 = F.f2.total_degree();
    CoordChange coords;
    bool root_fixed = false;
    if (deg1 > deg2) {
        coords = CoordChange::identity();
    } else if (deg1 < deg2) {
        coords = CoordChange::swap();
    } else {
        const BiPoly h1 = top_form(F.f1), h2 = top_form(F.f2);
        const auto& [e, c] = *h1.terms().begin();
        const Rational theta = h2.coeff(e.first, e.second) / c;
        if (theta != 0 && h2 == theta * h1) coords = CoordChange::shear(theta);
        else root_fixed = true;
    }

    auto finish = [&](const QN& d) {
        if (r.type == EigenType::divisorial && !r.skew_product) r.normal_form = NormalForm::type_i;
        if (r.type == EigenType::irrational) r.normal_form = NormalForm::type_ii;
        if (r.type == EigenType::infinitely_singular) r.normal_form = NormalForm::type_iii;
        r.dichotomy = r.skew_product ? Dichotomy::skew_product : Dichotomy::bounded_ratio;
        if (r.skew_product && r.skew_coords) {
            // a skew product in sight: degrees grow faster than d_inf^n only if deg_Y Q drops somewhere
            const SkewShape sh = skew_shape(F, *r.skew_coords);
            if (sh.single_variable && !sh.drop) r.dichotomy = Dichotomy::bounded_ratio;
        }
        r.verification = affine_check_fixed(F, r.eigen, d, test_degree);
        r.certificate = v1_certificate(r.eigen, 2 * F.degree());
        return r;
    };

    if (root_fixed) {
        r.eigen = Valuation::neg_deg();
        r.rate = integer_rate(qn_of(F.degree()), "root");
        r.walk.push_back({"identity", 0, QN(0), QN(0), "root is fixed"});
        return finish(r.rate.value);
    }

    const PlaneMap g = coords.conjugate(F);
    Skp prefix{Chart::infinity, {X, Y}, {QN(1)}};
    QN lo_beta(0);
    QN thin_base(1);  // relative thinness is thin_base + beta on the current segment
    unsigned long d = 1;
    for (std::size_t K = 1;; ++K) {
        const BiPoly& psi = prefix.keys[K];
        const BiPoly Q = affine_key(psi);
        const Rational dr{Integer(d)};
        // inside V1: alpha >= 0 and A <= 0
        const QN hi_beta = min(QN(dr), QN(3) - thin_base);
        if (hi_beta <= lo_beta) throw InternalError("segment leaves V1 at its start");
        auto v1 = affine_potential(prefix, g.f1, lo_beta, hi_beta);
        auto v2 = affine_potential(prefix, g.f2, lo_beta, hi_beta);
        auto dpot = pl_negate(pl_min(pl_min(v1, v2), pl_const(0, lo_beta, hi_beta)));
        if (dpot.eval(hi_beta).sign() <= 0)
            throw PreconditionError("d(F, .) vanishes on the segment at relative skewness " +
                                    (hi_beta / QN(dr)).to_string() + ": the image is a curve valuation");
        auto npot = affine_potential(prefix, substitute(Q, g.f1, g.f2), lo_beta, hi_beta);
        // relative image skewness (N + deg Q * D) / (d * D) in s = beta / d
        auto num = pl_sum(npot, pl_scale(dpot, Rational(Integer(Q.total_degree()))));
        auto ds = dpot.reparam(dr), ms = num.reparam(dr);
        auto M = induced_moebius(ms, ds, d, true);
        const QN s_lo = lo_beta / QN(dr);
        WalkStep step{chart_label(coords), K, s_lo, std::nullopt, ""};

        std::optional<MoebiusFixedPoint> fp;
        for (const auto& p : moebius_fixed_points(M))
            if (p.t > s_lo) {
                fp = p;
                break;
            }
        if (!fp) throw InternalError("segment map has no fixed point inside V1");

        step.fixed_point = fp->t;
        const QN beta = fp->t * QN(dr);
        Skp at = prefix;
        at.values.push_back(beta);
        const QN dstar = dpot.eval(beta);
        r.involutive = M.pieces()[fp->piece].is_involutive();

        if (!beta.is_rational()) {
            step.action = "irrational fixed point";
            r.walk.push_back(step);
            r.eigen = Valuation::skp_based(at, coords);
            r.rate = QuadraticInteger::from_value(dstar);
            r.type = EigenType::irrational;
            const Line dl = ds.pieces()[ds.piece_index(fp->t)];
            const Line nl = ms.pieces()[ms.piece_index(fp->t)];
            const Rational m0 = nl.intercept / dr, m1 = nl.slope / dr;
            // the same maps written in alpha = 1 - s
            r.matrix = std::array<Rational, 4>{Rational(dl.intercept + dl.slope), Rational(-dl.slope),
                                               Rational(dl.intercept + dl.slope - m0 - m1), Rational(m1 - dl.slope)};
            r.bound_skewness = QN(1) - fp->t;
            return finish(dstar);
        }

        if (fp->t == QN(1)) {
            // alpha = 0: a rational pencil valuation
            step.action = "pencil fixed point";
            r.walk.push_back(step);
            r.eigen = Valuation::skp_based(at, coords);
            r.rate = integer_rate(dstar, "pencil fixed point");
            r.type = EigenType::divisorial;
            r.skew_product = true;
            r.bound_skewness = QN(0);
            if (K == 1) r.skew_coords = CoordChange{coords.v, coords.u};
            return finish(dstar);
        }

        // does the image leave the segment at beta in a direction U^n - theta M?
        const auto rel = key_relation(prefix.values, beta);
        const Valuation here = Valuation::skp_based(at, coords);
        const AffinePushforward image(F, here);
        const ChartView view{image, coords};
        const BiPoly A = psi.pow(static_cast<unsigned>(rel->n));
        const BiPoly B = key_monomial(at, rel->m);
        const Rational theta = view.lead(A) / view.lead(B);
        const auto vA = view.value(A);
        const auto vC = view.value(A - theta * B);
        if (!vA || !vC) throw InternalError("image valuation is infinite on a polynomial");
        if (*vC <= *vA) {
            step.action = "divisorial fixed point";
            r.walk.push_back(step);
            r.eigen = here;
            r.rate = integer_rate(dstar, "divisorial fixed point");
            r.type = EigenType::divisorial;
            r.bound_skewness = QN(1) - fp->t;
            r.open_case = thinness(here).is_zero() && skewness(here).sign() > 0;
            return finish(dstar);
        }

        const Skp next = skp_extend(at, theta);
        const QN next_lo = beta * qn_of(rel->n);
        const QN next_thin = thin_base + beta - next_lo;
        if (K >= max_depth || d * rel->n > kMaxKeyMultiplicity) {
            step.action = "depth limit";
            r.walk.push_back(step);
            r.eigen = Valuation::skp_based(at, coords, true);
            r.type = EigenType::infinitely_singular;
            r.bound_skewness = QN(1) - fp->t;
            const unsigned long dn = d * rel->n;
            const Rational dnr{Integer(dn)};
            const QN next_hi = min(QN(dnr), QN(3) - next_thin);
            std::optional<QN> hi;
            bool stable = false;
            if (next_lo < next_hi) {
                auto w1 = affine_potential(next, g.f1, next_lo, next_hi);
                auto w2 = affine_potential(next, g.f2, next_lo, next_hi);
                auto dn_pot = pl_negate(pl_min(pl_min(w1, w2), pl_const(0, next_lo, next_hi)));
                const BiPoly Qn = affine_key(next.keys.back());
                auto nn = pl_sum(affine_potential(next, substitute(Qn, g.f1, g.f2), next_lo, next_hi),
                                 pl_scale(dn_pot, Rational(Integer(Qn.total_degree()))));
                if (dn_pot.eval(next_hi).sign() > 0) {
                    auto Mn = induced_moebius(nn.reparam(dnr), dn_pot.reparam(dnr), dn, true);
                    for (const auto& p : moebius_fixed_points(Mn))
                        if (p.t > fp->t) {
                            hi = p.t;
                            break;
                        }
                }
                const std::size_t i0 = dn_pot.piece_index(next_lo);
                stable = dn_pot.pieces()[i0].slope == 0 && (!hi || dn_pot.piece_index(*hi * QN(dnr)) == i0);
            }
            r.bracket = std::make_pair(fp->t, hi);
            r.rate_stable = stable;
            try {
                r.rate = QuadraticInteger::from_value(dstar);
            } catch (const PreconditionError&) {
                throw ResourceError("depth limit reached before d(F, .) stabilized at an integer");
            }
            return finish(dstar);
        }
        step.action = "extend by " + next.keys.back().to_string(kChartVars);
        r.walk.push_back(step);
        prefix = next;
        lo_beta = next_lo;
        thin_base = next_thin;
        d *= rel->n;
    }
}

DichotomyReport skew_dichotomy(const PlaneMap& F, const AffineReport& r, unsigned n_max) {
    require_affine_dominant(F);
    if (n_max == 0) throw PreconditionError("n_max must be positive");
    DichotomyReport out;
    out.degrees = deg_sequence(F, n_max);
    const QN dinf = r.rate.value;
    QN power(1);
    for (unsigned n = 1; n <= n_max; ++n) {
        power *= dinf;
        const QN dn = qn_of(out.degrees[n - 1]);
        if (dn < power)
            throw FalsificationError("deg F^" + std::to_string(n) + " = " + dn.to_string() + " is below d_inf^n = " +
                                     power.to_string());
        out.ratios.push_back(dn / power);
        out.observed_D = max(out.observed_D, out.ratios.back());
    }

    bool predicted_unbounded = r.skew_product;
    if (r.skew_product && r.skew_coords) {
        const SkewShape sh = skew_shape(F, *r.skew_coords);
        out.single_variable = sh.single_variable;
        if (sh.single_variable) {
            out.deg_p = sh.deg_p;
            out.deg_y_q = sh.deg_y_q;
            out.drop = sh.drop;
            out.x0 = sh.x0;
            // d(F, .) at the pencil valuation of {L = c} is deg_Y Q
            if (qn_of(out.deg_y_q) != dinf)
                throw FalsificationError("deg_Y Q = " + std::to_string(out.deg_y_q) + " differs from d_inf = " +
                                         dinf.to_string());
            if (qn_of(out.deg_p) > dinf)
                throw FalsificationError("deg P = " + std::to_string(out.deg_p) + " exceeds d_inf = " +
                                         dinf.to_string());
            predicted_unbounded = out.drop;
        }
    }

    if (predicted_unbounded) {
        out.branch = Dichotomy::skew_product;
        for (std::size_t i = 1; i < out.ratios.size(); ++i)
            if (out.ratios[i] < out.ratios[i - 1])
                throw FalsificationError("deg F^n / d_inf^n decreases at n = " + std::to_string(i + 1) +
                                         " for a skew product");
        if (out.single_variable && out.ratios.size() >= 2 && !(out.ratios.back() > out.ratios.front()))
            throw FalsificationError("deg F^n / d_inf^n does not grow although deg_Y Q drops");
        return out;
    }

    out.branch = Dichotomy::bounded_ratio;
    if (r.bound_skewness.sign() > 0) {
        out.D_bound = QN(1) / r.bound_skewness;
        for (std::size_t i = 0; i < out.ratios.size(); ++i)
            if (out.ratios[i] > *out.D_bound)
                throw FalsificationError("deg F^" + std::to_string(i + 1) + " / d_inf^n = " +
                                         out.ratios[i].to_string() + " exceeds 1/alpha = " + out.D_bound->to_string());
    }
    return out;
}

JacobianCheck affine_jacobian_check(const PlaneMap& F, const Valuation& nu) {
    require_affine_dominant(F);
    require_affine_valuation(nu);
    JacobianCheck out;
    if (nu.truncated()) {
        out.skipped = true;
        out.reason = "thinness of the source is not finite";
        return out;
    }
    const QN d = d_of(F, nu);
    if (d.sign() <= 0) {
        out.skipped = true;
        out.reason = "the image is not centered at infinity";
        return out;
    }
    AffinePushforward e(F, nu);
    Valuation image;
    try {
        image = reconstruct_valuation(e, 32);
    } catch (const PreconditionError& err) {
        out.skipped = true;
        out.reason = std::string("image is not representable: ") + err.what();
        return out;
    }
    if (image.truncated()) {
        out.skipped = true;
        out.reason = "image is not quasimonomial within the reconstruction depth";
        return out;
    }
    auto vj = nu.value(jacobian_det(F));
    out.lhs = d * thinness(image);
    out.rhs = *vj + thinness(nu);
    out.holds = out.lhs == out.rhs;
    return out;
}

ActPolCheck act_pol_check(const Valuation& nu, const std::vector<std::pair<BiPoly, unsigned>>& factors) {
    require_affine_valuation(nu);
    if (nu.truncated()) throw PreconditionError("act_pol_check needs a quasimonomial valuation");
    ActPolCheck out;
    BiPoly product = BiPoly::constant(1);
    out.decomposition = QN(0);
    out.holds = true;
    const bool centered = nu.kind() == Valuation::Kind::skp;
    // direction of the center: the linear part of the chart coordinate v vanishes there
    const BiPoly ell = centered ? top_form(nu.coords().v - BiPoly::constant(nu.coords().v.coeff(0, 0))) : BiPoly();
    for (const auto& [p, k] : factors) {
        if (p.total_degree() == 0) throw PreconditionError("act_pol_check factors must be nonconstant");
        ActPolFactor f;
        f.factor = p;
        f.power = k;
        f.deg = p.total_degree();
        product = product * p.pow(k);
        if (centered) {
            BiPoly h = top_form(p);
            while (auto q = exact_div(h, ell)) {
                h = *q;
                ++f.m_top;
            }
            const BiPoly tilde = at_infinity_transform(nu.coords().to_chart(p));
            unsigned m = 0;
            while (tilde.coeff(0, m) == 0) ++m;
            f.m_center = m;
            if (m > 0) f.meet_skewness = QN(1) - *skp_eval(nu.skp(), tilde) / qn_of(m);
            if (f.m_center != f.m_top) out.holds = false;
        }
        out.degree += k * f.deg;
        // points at infinity other than the center meet nu at -deg (alpha = 1)
        const unsigned long elsewhere = f.deg - f.m_top;
        out.sum_m += k * (elsewhere + f.m_center);
        out.decomposition -= qn_of(k) * (qn_of(elsewhere) + qn_of(f.m_center) * f.meet_skewness);
        out.factors.push_back(f);
    }
    out.value = *nu.value(product);
    out.holds = out.holds && out.value == out.decomposition && out.sum_m == out.degree;
    return out;
}

}  // namespace valdyn
