#include "valdyn/dynlocal.hpp"

#include <algorithm>
#include <functional>

#include "upoly.hpp"
#include "valdyn/errors.hpp"

namespace valdyn {

using QN = QuadraticNumber;

namespace {

void require_local_dominant(const PlaneMap& f) {
    if (f.kind != MapKind::local_germ) throw PreconditionError("expected a local germ");
    f.validate();
    if (!f.is_dominant()) throw PreconditionError("map is not dominant");
}

std::string chart_label(const CoordChange& c) {
    if (c.is_identity()) return "identity";
    if (c.is_swap()) return "swap";
    return "(" + c.u.to_string() + ", " + c.v.to_string() + ")";
}

/// Rational tangent directions of the branches of phi at the origin.
std::vector<CoordChange> rational_directions(const BiPoly& phi, bool& complete) {
    std::vector<CoordChange> out;
    Factorization fac = factor(phi.lowest_form());
    if (!fac.complete) complete = false;
    for (const auto& [l, e] : fac.factors) {
        if (l.total_degree() != 1) {
            complete = false;
            continue;
        }
        const Rational a = l.coeff(1, 0), b = l.coeff(0, 1);
        CoordChange c = b == 0 ? CoordChange::swap() : CoordChange::shear(-a / b);
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
}

/// Nonzero rational roots of a residual polynomial; complete = false when
/// some nonzero root is irrational or could not be enumerated.
std::vector<Rational> residual_directions(std::vector<Rational> R, bool& complete) {
    detail::trim(R);
    std::size_t low = 0;
    while (low < R.size() && R[low] == 0) ++low;
    detail::UPoly rest(R.begin() + static_cast<long>(low), R.end());
    std::vector<Rational> roots;
    bool ok = true;
    for (const auto& t : detail::rational_roots(rest, ok)) {
        if (t == 0) continue;
        roots.push_back(t);
        const detail::UPoly lin{-t, Rational(1)};
        while (rest.size() > 1) {
            auto [q, rem] = detail::u_divmod(rest, lin);
            if (!rem.empty()) break;
            rest = q;
        }
    }
    if (!ok || rest.size() > 1) complete = false;
    return roots;
}

/// Points of [lo, hi] where the two potentials agree and the initial forms
/// may change: crossings of pieces and shared breakpoints.
std::vector<QN> agreement_points(const PiecewiseLinear& p1, const PiecewiseLinear& p2) {
    std::vector<QN> cuts{p1.lo()};
    for (const auto& b : p1.breakpoints()) cuts.push_back(b);
    for (const auto& b : p2.breakpoints()) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<QN> out;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const QN a = cuts[i];
        const std::optional<QN> b = i + 1 < cuts.size() ? std::optional<QN>(cuts[i + 1]) : p1.hi();
        const Line l1 = p1.pieces()[p1.piece_index(a)];
        const Line l2 = p2.pieces()[p2.piece_index(a)];
        // the pieces valid just right of a
        const Line r1 = b && *b == a ? l1 : p1.pieces()[p1.piece_index(b ? (a + *b) / QN(2) : a + QN(1))];
        const Line r2 = b && *b == a ? l2 : p2.pieces()[p2.piece_index(b ? (a + *b) / QN(2) : a + QN(1))];
        if (p1.eval(a) == p2.eval(a)) out.push_back(a);
        if (r1.slope != r2.slope) {
            const QN t = QN(Rational((r2.intercept - r1.intercept) / (r1.slope - r2.slope)));
            if (t > a && (!b || t <= *b)) out.push_back(t);
        } else if (r1 == r2 && b) {
            out.push_back(*b);
        }
    }
    if (p1.hi() && p1.eval(*p1.hi()) == p2.eval(*p1.hi())) out.push_back(*p1.hi());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// nu <= mu in the valuative tree, for nu and mu found by critical_tree_ends.
bool dominated(const Valuation& nu, const Valuation& mu) {
    if (nu.kind() == Valuation::Kind::curve) return nu == mu;
    if (mu.kind() == Valuation::Kind::curve) {
        const BiPoly& phi = mu.curve_poly();
        auto v = nu.value(phi);
        return v && *v == skewness(nu) * QN(static_cast<long>(multiplicity(phi)));
    }
    auto [s, coords] = nu.as_skp();
    for (std::size_t j = 0; j < s.keys.size(); ++j) {
        auto v = mu.value(coords.from_chart(s.keys[j]));
        if (v && *v < s.values[j]) return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Attraction rate and pushforward

QN attraction_rate(const PlaneMap& f, const ValuationOracle& nu) {
    auto a = nu.value(f.f1), b = nu.value(f.f2);
    if (!a && !b) throw ContractedError("valuation is a contracted curve: both components vanish on it");
    if (!a) return *b;
    if (!b) return *a;
    return min(*a, *b);
}

LocalPushforward::LocalPushforward(PlaneMap f, const ValuationOracle& nu)
    : f_(std::move(f)), nu_(&nu), c_(attraction_rate(f_, nu)) {}

LocalPushforward::LocalPushforward(PlaneMap f, const Valuation& nu)
    : f_(std::move(f)), owned_(std::make_shared<const Valuation>(nu)), nu_(owned_.get()),
      c_(attraction_rate(f_, *owned_)) {}

std::optional<QN> LocalPushforward::value(const BiPoly& p) const {
    auto v = nu_->value(substitute(p, f_.f1, f_.f2));
    if (!v) return v;
    return *v / c_;
}

Rational LocalPushforward::lead(const BiPoly& p) const { return nu_->lead(substitute(p, f_.f1, f_.f2)); }

LocalPushforward pushforward_eval(const PlaneMap& f, const ValuationOracle& nu) { return LocalPushforward(f, nu); }
LocalPushforward pushforward_eval(const PlaneMap& f, const Valuation& nu) { return LocalPushforward(f, nu); }

Valuation pushforward_valuation(const PlaneMap& f, const ValuationOracle& nu, unsigned max_depth) {
    LocalPushforward e(f, nu);
    return reconstruct_valuation(e, max_depth);
}

// ---------------------------------------------------------------------------
// Contracted curves and the critical tree

ContractedCurves contracted_curves(const PlaneMap& f) {
    ContractedCurves out;
    BiPoly g = gcd(f.f1, f.f2);
    if (g.is_constant()) return out;
    Factorization fac = factor(g);
    out.complete = fac.complete;
    for (const auto& [phi, e] : fac.factors)
        if (phi.coeff(0, 0) == 0) out.curves.push_back(phi);
    return out;
}

CandidateTree candidate_segments(const PlaneMap& f, unsigned max_depth) {
    require_local_dominant(f);
    CandidateTree tree;
    Factorization fac = factor(f.f1 * f.f2);
    if (!fac.complete) tree.complete = false;

    std::function<void(const CoordChange&, const PlaneMap&, const Skp&, const QN&, const BiPoly&, unsigned)> explore =
        [&](const CoordChange& coords, const PlaneMap& g, const Skp& prefix, const QN& lo, const BiPoly& phi,
            unsigned depth) {
            auto P = potential_on_segment(prefix, phi, lo, std::nullopt);
            const bool open_end = P.pieces().back().slope > 0;
            if (!open_end && P.breakpoints().empty()) return;
            std::optional<QN> hi;
            if (!open_end) hi = P.breakpoints().back();
            auto c = pl_min(potential_on_segment(prefix, g.f1, lo, hi), potential_on_segment(prefix, g.f2, lo, hi));
            bool known = false;
            for (const auto& s : tree.segments)
                known = known || (s.coords == coords && s.prefix == prefix && s.lo == lo && s.hi == hi);
            if (!known) tree.segments.push_back({coords, prefix, lo, hi, c});
            if (P.breakpoints().empty()) return;
            if (depth >= max_depth) {
                tree.complete = false;
                return;
            }
            for (const auto& b : P.breakpoints()) {
                Skp at = prefix;
                at.values.push_back(b);
                auto rel = key_relation(prefix.values, b);
                for (const auto& theta : residual_directions(residual_polynomial(at, phi), tree.complete))
                    explore(coords, g, skp_extend(at, theta), b * QN(Rational(Integer(rel->n))), phi, depth + 1);
            }
        };

    for (const auto& [phi, e] : fac.factors) {
        if (phi.coeff(0, 0) != 0) continue;
        for (const auto& coords : rational_directions(phi, tree.complete)) {
            PlaneMap g = coords.conjugate(f);
            Skp root{Chart::local, {BiPoly::x(), BiPoly::y()}, {QN(1)}};
            explore(coords, g, root, QN(1), coords.to_chart(phi), 1);
        }
    }
    return tree;
}

CriticalTreeEnds critical_tree_ends(const PlaneMap& f) {
    require_local_dominant(f);
    CriticalTreeEnds out;
    ContractedCurves cc = contracted_curves(f);
    out.complete = cc.complete;
    for (const auto& phi : cc.curves) out.elements.push_back({Valuation::curve(phi), EndKind::contracted_curve, false});

    CandidateTree tree = candidate_segments(f);
    out.complete = out.complete && tree.complete;
    for (const auto& seg : tree.segments) {
        PlaneMap g = seg.coords.conjugate(f);
        auto p1 = potential_on_segment(seg.prefix, g.f1, seg.lo, seg.hi);
        auto p2 = potential_on_segment(seg.prefix, g.f2, seg.lo, seg.hi);
        for (const auto& t : agreement_points(p1, p2)) {
            if (t <= seg.lo || !t.is_rational()) continue;
            Skp at = seg.prefix;
            at.values.push_back(t);
            auto v1 = skp_eval(at, g.f1);
            Rational theta = skp_lead(at, g.f1) / skp_lead(at, g.f2);
            auto vd = skp_eval(at, g.f1 - theta * g.f2);
            if (!vd || *vd != *v1) continue;  // initial forms proportional: the image is not nu_m
            Valuation nu = Valuation::skp_based(at, seg.coords);
            bool seen = false;
            for (const auto& e : out.elements) seen = seen || e.valuation == nu;
            if (!seen) out.elements.push_back({nu, EndKind::preimage_of_root, false});
        }
    }
    for (std::size_t i = 0; i < out.elements.size(); ++i) {
        bool maximal = true;
        for (std::size_t j = 0; j < out.elements.size() && maximal; ++j)
            if (i != j && dominated(out.elements[i].valuation, out.elements[j].valuation)) maximal = false;
        out.elements[i].is_end = maximal;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Eigenvaluation search

std::string to_string(EigenType t) {
    switch (t) {
        case EigenType::divisorial: return "divisorial";
        case EigenType::irrational: return "irrational";
        case EigenType::curve: return "curve";
        case EigenType::infinitely_singular: return "infinitely-singular";
    }
    return "?";
}

std::string to_string(NormalForm n) {
    switch (n) {
        case NormalForm::type_i: return "type-i";
        case NormalForm::type_ii: return "type-ii";
        case NormalForm::type_iii: return "type-iii";
        case NormalForm::type_iv: return "type-iv";
    }
    return "?";
}

FixedPointCheck check_fixed(const PlaneMap& f, const Valuation& nu, const QN& c, unsigned degree) {
    FixedPointCheck out;
    out.degree = degree;
    out.passed = true;
    std::vector<BiPoly> tests;
    for (unsigned k = 1; k <= degree; ++k)
        for (unsigned i = 0; i <= k; ++i) tests.push_back(BiPoly::monomial(i, k - i));
    if (nu.kind() == Valuation::Kind::skp)
        for (std::size_t j = 2; j < nu.skp().keys.size(); ++j) tests.push_back(nu.coords().from_chart(nu.skp().keys[j]));

    if (nu.kind() == Valuation::Kind::curve) {
        const BiPoly& phi = nu.curve_poly();
        out.checked = 1;
        if (!exact_div(substitute(phi, f.f1, f.f2), phi)) {
            out.passed = false;
            out.counterexample = phi;
        }
        try {
            nu.value(BiPoly::x());
        } catch (const PreconditionError&) {
            out.method = "curve invariance";
            out.degree = 0;
            return out;
        }
        out.method = "curve invariance and values";
    } else {
        out.method = "values";
    }
    for (const auto& p : tests) {
        ++out.checked;
        auto v = nu.value(p);
        bool ok;
        if (!v) {
            ok = !nu.value(substitute(p, f.f1, f.f2));
        } else {
            // nu >= 1 on the maximal ideal: terms of degree above the target cannot matter
            const QN target = c * *v;
            const unsigned order = static_cast<unsigned>(target.floor().get_ui()) + 1;
            auto w = nu.value(substitute_truncated(p, f.f1, f.f2, order));
            ok = w && *w == target;
        }
        if (!ok) {
            out.passed = false;
            out.counterexample = p;
            break;
        }
    }
    return out;
}

namespace {

QuadraticInteger integer_rate(const QN& c, const char* what) {
    try {
        return QuadraticInteger::from_value(c);
    } catch (const PreconditionError&) {
        throw InternalError(std::string("rate at the ") + what + " is not an algebraic integer: " + c.to_string());
    }
}

}  // namespace

EigenReport eigenvaluation_search(const PlaneMap& f, unsigned max_depth, unsigned test_degree) {
    require_local_dominant(f);
    if (max_depth == 0) max_depth = 1;
    if (test_degree == 0) test_degree = 2 * f.degree() + 2;
    EigenReport r;
    const BiPoly X = BiPoly::x(), Y = BiPoly::y();

    // direction of f_bullet nu_m at the root
    const unsigned m1 = multiplicity(f.f1), m2 = multiplicity(f.f2);
    CoordChange coords;
    bool root_fixed = false;
    if (m1 < m2) {
        coords = CoordChange::identity();
    } else if (m2 < m1) {
        coords = CoordChange::swap();
    } else {
        const BiPoly l1 = f.f1.lowest_form(), l2 = f.f2.lowest_form();
        const auto& [e, c] = *l1.terms().begin();
        const Rational theta = l2.coeff(e.first, e.second) / c;
        if (theta != 0 && l2 == theta * l1) coords = CoordChange::shear(theta);
        else root_fixed = true;
    }

    auto finish = [&](const QN& c) {
        r.superattracting = r.rate.value > QN(1);
        r.verification = check_fixed(f, r.eigen, c, test_degree);
        r.normal_form = classify_normal_form(r).form;
        return r;
    };

    if (root_fixed) {
        r.eigen = Valuation::monomial(1, 1);
        r.rate = integer_rate(QN(static_cast<long>(m1)), "root");
        r.type = EigenType::divisorial;
        r.bound_skewness = QN(1);
        r.walk.push_back({"identity", 0, QN(1), QN(1), "root is fixed"});
        return finish(r.rate.value);
    }

    const PlaneMap g = coords.conjugate(f);
    Skp prefix{Chart::local, {X, Y}, {QN(1)}};
    QN lo_beta(1);
    unsigned long d = 1;
    for (std::size_t K = 1;; ++K) {
        const BiPoly& psi = prefix.keys[K];
        const Rational dr{Integer(d)};
        auto cb = pl_min(potential_on_segment(prefix, g.f1, lo_beta, std::nullopt),
                         potential_on_segment(prefix, g.f2, lo_beta, std::nullopt));
        auto nb = potential_on_segment(prefix, substitute(psi, g.f1, g.f2), lo_beta, std::nullopt);
        // skewness parameter s = beta / d, image skewness N / (d c)
        auto cs = cb.reparam(dr), ns = nb.reparam(dr);
        auto F = induced_moebius(ns, cs, d, true);
        const QN s_lo = lo_beta / QN(dr);
        WalkStep step{chart_label(coords), K, s_lo, std::nullopt, ""};

        std::optional<MoebiusFixedPoint> fp;
        for (const auto& p : moebius_fixed_points(F))
            if (p.t > s_lo) {
                fp = p;
                break;
            }

        if (!fp) {
            // F(s) > s up to the key curve: the curve is a weakly attracting end
            const Line& last = cb.pieces().back();
            if (last.slope != 0) throw InternalError("segment map without fixed point along a contracted curve");
            step.action = "curve end";
            r.walk.push_back(step);
            r.eigen = Valuation::curve(coords.from_chart(psi));
            r.rate = integer_rate(QN(last.intercept), "curve end");
            r.type = EigenType::curve;
            QN s0 = s_lo;
            for (const auto& b : cs.breakpoints()) s0 = max(s0, b);
            for (const auto& b : ns.breakpoints()) s0 = max(s0, b);
            r.bound_skewness = s0;
            return finish(r.rate.value);
        }

        step.fixed_point = fp->t;
        const QN beta = fp->t * QN(dr);
        Skp at = prefix;
        at.values.push_back(beta);
        const QN cstar = cb.eval(beta);
        r.involutive = F.pieces()[fp->piece].is_involutive();

        if (!beta.is_rational()) {
            step.action = "irrational fixed point";
            r.walk.push_back(step);
            r.eigen = Valuation::skp_based(at, coords);
            r.rate = QuadraticInteger::from_value(cstar);
            r.type = EigenType::irrational;
            const Line cl = cs.pieces()[cs.piece_index(fp->t)];
            const Line nl = ns.pieces()[ns.piece_index(fp->t)];
            r.matrix = std::array<Rational, 4>{cl.intercept, cl.slope, Rational(nl.intercept / dr),
                                               Rational(nl.slope / dr)};
            r.bound_skewness = fp->t;
            return finish(cstar);
        }

        // is f_bullet of the divisorial point beyond it, in a direction U^n - theta M?
        const auto rel = key_relation(prefix.values, beta);
        const BiPoly A = substitute(psi.pow(static_cast<unsigned>(rel->n)), g.f1, g.f2);
        const BiPoly B = substitute(key_monomial(at, rel->m), g.f1, g.f2);
        const Rational theta = skp_lead(at, A) / skp_lead(at, B);
        const auto vA = skp_eval(at, A);
        const auto vC = skp_eval(at, A - theta * B);
        if (vC && *vC <= *vA) {
            step.action = "divisorial fixed point";
            r.walk.push_back(step);
            r.eigen = Valuation::skp_based(at, coords);
            r.rate = integer_rate(cstar, "divisorial fixed point");
            r.type = EigenType::divisorial;
            r.bound_skewness = fp->t;
            return finish(cstar);
        }

        const Skp next = skp_extend(at, theta);
        const QN next_lo = beta * QN(Rational(Integer(rel->n)));
        if (K >= max_depth || d * rel->n > kMaxKeyMultiplicity) {
            step.action = "depth limit";
            r.walk.push_back(step);
            r.eigen = Valuation::skp_based(at, coords, true);
            r.type = EigenType::infinitely_singular;
            r.bound_skewness = fp->t;
            // bracket on the next segment: from its start to its first fixed point
            const Rational dn{Integer(d * rel->n)};
            auto cn = pl_min(potential_on_segment(next, g.f1, next_lo, std::nullopt),
                             potential_on_segment(next, g.f2, next_lo, std::nullopt));
            auto nn = potential_on_segment(next, substitute(next.keys.back(), g.f1, g.f2), next_lo, std::nullopt);
            auto Fn = induced_moebius(nn.reparam(dn), cn.reparam(dn), d * rel->n, true);
            std::optional<QN> hi;
            for (const auto& p : moebius_fixed_points(Fn))
                if (p.t > fp->t) {
                    hi = p.t;
                    break;
                }
            r.bracket = std::make_pair(fp->t, hi);
            const std::size_t i0 = cn.piece_index(next_lo);
            r.rate_stable = cn.pieces()[i0].slope == 0 &&
                            (!hi || cn.piece_index(*hi * QN(dn)) == i0);
            try {
                r.rate = QuadraticInteger::from_value(cstar);
            } catch (const PreconditionError&) {
                throw ResourceError("depth limit reached before c(f, .) stabilized at an integer");
            }
            return finish(cstar);
        }
        step.action = "extend by " + next.keys.back().to_string();
        r.walk.push_back(step);
        prefix = next;
        lo_beta = next_lo;
        d *= rel->n;
    }
}

// ---------------------------------------------------------------------------
// Bounds, Jacobian identity, normal forms

BoundsReport verify_bounds(const PlaneMap& f, const EigenReport& r, unsigned n_max) {
    BoundsReport out;
    out.n_max = n_max;
    out.c = mult_sequence(f, n_max);
    const QN cinf = r.rate.value;
    out.delta = QN(1) / r.bound_skewness;
    QN power(1);
    for (unsigned n = 1; n <= n_max; ++n) {
        power *= cinf;
        const QN cn(Rational(Integer(out.c[n - 1])));
        if (cn > power)
            throw FalsificationError("c(f^" + std::to_string(n) + ") = " + cn.to_string() + " exceeds c_inf^n = " +
                                     power.to_string());
        const QN ratio = cn / power;
        if (ratio < out.delta)
            throw FalsificationError("c(f^" + std::to_string(n) + ")/c_inf^n = " + ratio.to_string() +
                                     " is below delta = " + out.delta.to_string());
        if (n == 1 || ratio < out.min_ratio) {
            out.min_ratio = ratio;
            out.min_ratio_at = n;
        }
    }
    return out;
}

JacobianCheck jacobian_identity_check(const PlaneMap& f, const Valuation& nu) {
    JacobianCheck out;
    require_local_dominant(f);
    if (nu.normalization() != Normalization::local) throw PreconditionError("expected a local valuation");
    if (nu.kind() == Valuation::Kind::curve || nu.truncated()) {
        out.skipped = true;
        out.reason = "thinness of the source is not finite";
        return out;
    }
    LocalPushforward e(f, nu);
    Valuation image = reconstruct_valuation(e, 32);
    if (image.kind() == Valuation::Kind::curve || image.truncated()) {
        out.skipped = true;
        out.reason = "image is not quasimonomial within the reconstruction depth";
        return out;
    }
    auto vj = nu.value(jacobian_det(f));
    if (!vj) {
        out.skipped = true;
        out.reason = "the Jacobian vanishes on the valuation";
        return out;
    }
    out.lhs = e.rate() * thinness(image);
    out.rhs = thinness(nu) + *vj;
    out.holds = out.lhs == out.rhs;
    return out;
}

NormalFormInfo classify_normal_form(const EigenReport& r) {
    NormalFormInfo out;
    const QN& rate = r.rate.value;
    switch (r.type) {
        case EigenType::divisorial:
            out.form = NormalForm::type_i;
            break;
        case EigenType::irrational:
            out.form = NormalForm::type_ii;
            break;
        case EigenType::curve:
            out.form = NormalForm::type_iii;
            break;
        case EigenType::infinitely_singular:
            out.form = NormalForm::type_iv;
            break;
    }
    if (out.form == NormalForm::type_ii) {
        if (!r.matrix) throw PreconditionError("irrational report without its segment matrix");
        const auto& m = *r.matrix;
        out.matrix = m;
        const QN tr(Rational(m[0] + m[3])), det(Rational(m[0] * m[3] - m[1] * m[2]));
        out.formula = "c_inf = spectral radius of [[" + to_string(m[0]) + ", " + to_string(m[1]) + "], [" +
                      to_string(m[2]) + ", " + to_string(m[3]) + "]]";
        out.consistent = (rate * rate - tr * rate + det).is_zero() && QN(2) * rate >= tr && !det.is_zero();
    } else {
        out.formula = "c_inf = a = " + rate.to_string();
        out.consistent = r.rate.degree == 1;
    }
    if (!out.consistent) throw PreconditionError("report rate " + rate.to_string() + " contradicts " + out.formula);
    return out;
}

}  // namespace valdyn
