#include "valdyn/skpval.hpp"

#include <algorithm>
#include <cctype>

#include "valdyn/errors.hpp"

namespace valdyn {

using QN = QuadraticNumber;

namespace {

bool is_integer(const Rational& q) { return q.get_den() == 1; }

QN qn_of(unsigned long j) { return QN(Rational(Integer(j))); }

unsigned ord_x(const BiPoly& p) {
    unsigned best = ~0U;
    for (const auto& [e, c] : p.terms()) best = std::min(best, e.first);
    return best;
}

/// Coefficients of p in powers of the key u (monic in the second variable).
std::vector<BiPoly> expand(const BiPoly& p, const BiPoly& u) {
    std::vector<BiPoly> out;
    if (p.is_zero()) return out;
    if (u == BiPoly::y()) {
        out.resize(p.degree_y() + 1);
        for (const auto& [e, c] : p.terms()) out[e.second].add_term(e.first, 0, c);
        return out;
    }
    BiPoly rest = p;
    while (!rest.is_zero()) {
        auto [q, r] = divmod_monic_y(rest, u);
        out.push_back(std::move(r));
        rest = std::move(q);
    }
    return out;
}

class Engine {
public:
    explicit Engine(const Skp& s) : s_(s) {}

    /// Value at stage level (level 0 is ord_x on Q[x]); p nonzero.
    QN eval(std::size_t level, const BiPoly& p) const {
        if (level == 0) return QN(Rational(Integer(ord_x(p))));
        if (level == 1) {
            std::optional<QN> best;
            for (const auto& [e, c] : p.terms()) {
                QN v = QN(Rational(Integer(e.first))) + s_.values[1] * qn_of(e.second);
                if (!best || v < *best) best = v;
            }
            return *best;
        }
        auto phi = expand(p, s_.keys[level]);
        std::optional<QN> best;
        for (std::size_t j = 0; j < phi.size(); ++j) {
            if (phi[j].is_zero()) continue;
            QN v = eval(level - 1, phi[j]) + s_.values[level] * qn_of(j);
            if (!best || v < *best) best = v;
        }
        return *best;
    }

    /// Value and leading coefficient; ties resolved towards the largest power.
    std::pair<QN, Rational> lead(std::size_t level, const BiPoly& p) const {
        if (level == 0) {
            unsigned o = ord_x(p);
            return {QN(Rational(Integer(o))), p.coeff(o, 0)};
        }
        if (level == 1) {
            std::optional<QN> best;
            Exponent arg{0, 0};
            Rational c0;
            for (const auto& [e, c] : p.terms()) {
                QN v = QN(Rational(Integer(e.first))) + s_.values[1] * qn_of(e.second);
                if (!best || v < *best || (v == *best && e.second > arg.second)) {
                    best = v;
                    arg = e;
                    c0 = c;
                }
            }
            return {*best, c0};
        }
        auto phi = expand(p, s_.keys[level]);
        std::optional<QN> best;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < phi.size(); ++j) {
            if (phi[j].is_zero()) continue;
            QN v = eval(level - 1, phi[j]) + s_.values[level] * qn_of(j);
            if (!best || v <= *best) {
                best = v;
                arg = j;
            }
        }
        return {*best, lead(level - 1, phi[arg]).second};
    }

    /// Initial form of p as coefficient times a reduced monomial in the keys
    /// 0..level; p must have a unique minimizing term at each stage.
    std::pair<Rational, std::vector<long>> in_monomial(std::size_t level, const BiPoly& p) const {
        if (level == 0) {
            if (p.degree_y() != 0) throw InternalError("in_monomial: expected a polynomial in the first variable");
            unsigned o = ord_x(p);
            return {p.coeff(o, 0), {static_cast<long>(o)}};
        }
        auto phi = expand(p, s_.keys[level]);
        std::optional<QN> best;
        std::size_t arg = 0;
        bool tie = false;
        for (std::size_t j = 0; j < phi.size(); ++j) {
            if (phi[j].is_zero()) continue;
            QN v = eval(level - 1, phi[j]) + s_.values[level] * qn_of(j);
            if (!best || v < *best) {
                best = v;
                arg = j;
                tie = false;
            } else if (v == *best) {
                tie = true;
            }
        }
        if (tie) throw InternalError("in_monomial: initial form is not a monomial");
        auto r = in_monomial(level - 1, phi[arg]);
        r.second.push_back(static_cast<long>(arg));
        return r;
    }

    std::vector<BiPoly> expansion(std::size_t level, const BiPoly& p) const {
        return expand(p, s_.keys[level]);
    }

private:
    const Skp& s_;
};

BiPoly chart_var(bool second) { return second ? BiPoly::y() : BiPoly::x(); }

}  // namespace

// ---------------------------------------------------------------------------
// Coordinate changes

CoordChange CoordChange::shear(const Rational& theta) {
    return {BiPoly::x(), BiPoly::y() - theta * BiPoly::x()};
}

void CoordChange::validate(bool local) const {
    for (const auto* p : {&u, &v}) {
        if (p->total_degree() > 1) throw PreconditionError("coordinate change must have degree one");
        if (local && p->coeff(0, 0) != 0) throw PreconditionError("local coordinate change must be linear");
    }
    if (u.coeff(1, 0) * v.coeff(0, 1) - u.coeff(0, 1) * v.coeff(1, 0) == 0)
        throw PreconditionError("coordinate change is not invertible");
}

CoordChange CoordChange::inverse() const {
    Rational a = u.coeff(1, 0), b = u.coeff(0, 1), e = u.coeff(0, 0);
    Rational c = v.coeff(1, 0), d = v.coeff(0, 1), f = v.coeff(0, 0);
    Rational det = a * d - b * c;
    if (det == 0) throw PreconditionError("coordinate change is not invertible");
    BiPoly U = BiPoly::x() - BiPoly::constant(e), V = BiPoly::y() - BiPoly::constant(f);
    return {Rational(1 / det) * (d * U - b * V), Rational(1 / det) * (a * V - c * U)};
}

BiPoly CoordChange::to_chart(const BiPoly& p) const {
    if (is_identity()) return p;
    CoordChange inv = inverse();
    return substitute(p, inv.u, inv.v);
}

BiPoly CoordChange::from_chart(const BiPoly& q) const {
    if (is_identity()) return q;
    return substitute(q, u, v);
}

PlaneMap CoordChange::conjugate(const PlaneMap& f) const {
    if (is_identity()) return f;
    CoordChange inv = inverse();
    PlaneMap g = f;
    g.f1 = substitute(substitute(u, f.f1, f.f2), inv.u, inv.v);
    g.f2 = substitute(substitute(v, f.f1, f.f2), inv.u, inv.v);
    return g;
}

// ---------------------------------------------------------------------------
// SKP structure

std::optional<KeyRelation> key_relation(const std::vector<QN>& prefix, const QN& beta) {
    if (!beta.is_rational()) return std::nullopt;
    const std::size_t j = prefix.size();
    if (j == 0) throw PreconditionError("key_relation needs a non-empty prefix");
    // e[l]: the group generated by prefix[0..l-1] is (1/e[l]) Z
    std::vector<Integer> e(j + 1, Integer(1));
    for (std::size_t l = 1; l <= j; ++l) {
        e[l] = e[l - 1];
        const Rational& q = prefix[l - 1].as_rational();
        mpz_lcm(e[l].get_mpz_t(), e[l].get_mpz_t(), q.get_den_mpz_t());
    }
    auto order = [&](const Rational& q, std::size_t l) {
        Rational t = q * Rational(e[l]);
        return t.get_den().get_ui();
    };
    KeyRelation rel;
    const Rational& b = beta.as_rational();
    rel.n = order(b, j);
    Rational r = b * Rational(Integer(rel.n));
    rel.m.assign(j, 0);
    for (std::size_t l = j - 1; l >= 1; --l) {
        const Rational& q = prefix[l].as_rational();
        unsigned long nl = order(q, l);
        bool found = false;
        for (unsigned long mm = 0; mm < nl; ++mm) {
            Rational rest = r - q * Rational(Integer(mm));
            if (is_integer(Rational(rest * Rational(e[l])))) {
                rel.m[l] = static_cast<long>(mm);
                r = rest;
                found = true;
                break;
            }
        }
        if (!found) throw InternalError("key_relation: no representation found");
    }
    if (!is_integer(r)) throw InternalError("key_relation: non-integral first exponent");
    rel.m[0] = r.get_num().get_si();
    return rel;
}

BiPoly key_monomial(const Skp& s, const std::vector<long>& m) {
    BiPoly out = BiPoly::constant(1);
    for (std::size_t l = 0; l < m.size(); ++l) {
        if (m[l] < 0) throw PreconditionError("negative key exponent");
        if (m[l] > 0) out *= s.keys[l].pow(static_cast<unsigned>(m[l]));
    }
    return out;
}

SkpData skp_validate(const Skp& s) {
    if (s.keys.size() < 2) throw SkpAxiomError("an SKP needs at least two keys", 0);
    const std::size_t k = s.keys.size() - 1;
    if (s.values.size() != k + 1 && s.values.size() != k)
        throw SkpAxiomError("values and keys differ in length", 0);
    if (s.keys[0] != chart_var(false) || s.keys[1] != chart_var(true))
        throw SkpAxiomError("the first two keys must be the chart coordinates", 0);
    if (s.values[0] != QN(1)) throw SkpAxiomError("the first value must be 1", 0);
    if (s.values.size() > 1 && s.values[1].sign() <= 0) throw SkpAxiomError("beta_1 must be positive", 1);
    for (std::size_t j = 1; j < s.values.size(); ++j)
        if (j < k && !s.values[j].is_rational())
            throw SkpAxiomError("only the last value may be irrational", static_cast<int>(j));

    SkpData data;
    data.n.assign(k + 1, 0);
    data.n[0] = 1;
    data.m.assign(k + 1, {});
    data.d.assign(k + 1, 1);
    data.theta.assign(k, Rational(0));
    for (std::size_t j = 1; j < k; ++j) {
        std::vector<QN> prefix(s.values.begin(), s.values.begin() + static_cast<long>(j));
        auto rel = key_relation(prefix, s.values[j]);
        if (rel->m[0] < 0) throw SkpAxiomError("negative exponent of the first key", static_cast<int>(j));
        data.n[j] = rel->n;
        data.m[j] = rel->m;
        QN bound = s.values[j] * qn_of(rel->n);
        if (j + 1 < s.values.size() && !(s.values[j + 1] > bound))
            throw SkpAxiomError("beta_{j+1} must exceed n_j*beta_j", static_cast<int>(j + 1));
        BiPoly M = key_monomial(s, rel->m);
        BiPoly R = s.keys[j].pow(static_cast<unsigned>(rel->n)) - s.keys[j + 1];
        const auto& [e0, c0] = *M.terms().begin();
        Rational theta = R.coeff(e0.first, e0.second) / c0;
        if (theta == 0 || !(R == theta * M))
            throw SkpAxiomError("key is not U_j^n_j - theta*M with theta nonzero", static_cast<int>(j + 1));
        data.theta[j] = theta;
        data.d[j + 1] = data.d[j] * rel->n;
    }
    if (s.values.size() == k + 1 && k >= 1) {
        std::vector<QN> prefix(s.values.begin(), s.values.begin() + static_cast<long>(k));
        if (auto rel = key_relation(prefix, s.values[k])) {
            data.n[k] = rel->n;
            data.m[k] = rel->m;
        }
    }
    return data;
}

Skp skp_extend(const Skp& s, const Rational& theta, const std::optional<QN>& next) {
    const std::size_t k = s.depth();
    if (s.values.size() != k + 1) throw PreconditionError("skp_extend needs a value for the last key");
    if (theta == 0) throw PreconditionError("skp_extend needs theta != 0");
    std::vector<QN> prefix(s.values.begin(), s.values.end() - 1);
    auto rel = key_relation(prefix, s.values[k]);
    if (!rel) throw PreconditionError("cannot extend past an irrational value");
    Skp out = s;
    out.keys.push_back(s.keys[k].pow(static_cast<unsigned>(rel->n)) - theta * key_monomial(s, rel->m));
    if (next) out.values.push_back(*next);
    skp_validate(out);
    return out;
}

std::optional<QN> skp_eval(const Skp& s, const BiPoly& p) {
    if (p.is_zero()) return std::nullopt;
    if (s.values.size() != s.keys.size()) throw PreconditionError("skp_eval needs a value for every key");
    return Engine(s).eval(s.depth(), p);
}

std::vector<ValueLine> skp_value_lines(const Skp& prefix, const BiPoly& p) {
    if (!prefix.is_prefix()) throw PreconditionError("skp_value_lines needs a prefix (last value free)");
    Engine eng(prefix);
    const std::size_t k = prefix.depth();
    std::vector<ValueLine> lines;
    auto phi = eng.expansion(k, p);
    for (std::size_t j = 0; j < phi.size(); ++j) {
        if (phi[j].is_zero()) continue;
        lines.push_back({eng.eval(k - 1, phi[j]).as_rational(), j});
    }
    return lines;
}

Rational skp_lead(const Skp& s, const BiPoly& p) {
    if (p.is_zero()) throw PreconditionError("leading coefficient of the zero polynomial");
    return Engine(s).lead(s.depth(), p).second;
}

std::vector<Rational> residual_polynomial(const Skp& s, const BiPoly& p) {
    if (p.is_zero()) throw PreconditionError("residual polynomial of the zero polynomial");
    const std::size_t K = s.depth();
    SkpData data = skp_validate(s);
    std::vector<QN> prefix(s.values.begin(), s.values.begin() + static_cast<long>(K));
    auto rel = key_relation(prefix, s.values[K]);
    if (!rel) throw PreconditionError("residual polynomial needs a divisorial SKP");
    Engine eng(s);
    auto phi = eng.expansion(K, p);
    std::optional<QN> best;
    std::vector<std::size_t> J;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        if (phi[j].is_zero()) continue;
        QN v = eng.eval(K - 1, phi[j]) + s.values[K] * qn_of(j);
        if (!best || v < *best) {
            best = v;
            J = {j};
        } else if (v == *best) {
            J.push_back(j);
        }
    }
    const std::size_t j0 = J.front();
    std::vector<Rational> R;
    std::optional<std::vector<long>> common;
    for (std::size_t j : J) {
        if ((j - j0) % rel->n != 0) throw InternalError("residual polynomial: exponents out of step");
        std::size_t i = (j - j0) / rel->n;
        auto [coef, E] = eng.in_monomial(K - 1, phi[j]);
        for (std::size_t l = 0; l < K; ++l) E[l] += static_cast<long>(i) * rel->m[l];
        for (std::size_t l = K - 1; l >= 1; --l) {
            while (E[l] >= static_cast<long>(data.n[l])) {
                E[l] -= static_cast<long>(data.n[l]);
                for (std::size_t t = 0; t < l; ++t) E[t] += data.m[l][t];
                coef *= data.theta[l];
            }
        }
        if (common && *common != E) throw InternalError("residual polynomial: inhomogeneous initial form");
        common = E;
        if (R.size() <= i) R.resize(i + 1, Rational(0));
        R[i] = coef;
    }
    return R;
}

// ---------------------------------------------------------------------------
// Valuations

namespace {

/// (h1, h2) with phi(h1(t), h2(t)) = 0, t written as x; graphs only.
std::optional<std::pair<BiPoly, BiPoly>> graph_param(const BiPoly& phi) {
    if (phi.degree_y() == 1 && phi.coeff_y(1).is_constant()) {
        Rational c = phi.coeff(0, 1);
        BiPoly g = Rational(-1 / c) * phi.coeff_y(0);
        return std::make_pair(BiPoly::x(), g);
    }
    BiPoly sw = phi.swap_xy();
    if (sw.degree_y() == 1 && sw.coeff_y(1).is_constant()) {
        Rational c = sw.coeff(0, 1);
        BiPoly g = Rational(-1 / c) * sw.coeff_y(0);
        return std::make_pair(g, BiPoly::x());
    }
    return std::nullopt;
}

BiPoly curve_restriction(const BiPoly& phi, const BiPoly& p) {
    auto h = graph_param(phi);
    if (!h) throw PreconditionError("curve valuation evaluation needs a curve that is a graph over an axis");
    return substitute(p, h->first, h->second);
}

QN lowest_weight(const BiPoly& p, const QN& s, const QN& t, bool top, Rational* lead) {
    std::optional<QN> best;
    unsigned bestj = 0;
    for (const auto& [e, c] : p.terms()) {
        QN v = s * qn_of(e.first) + t * qn_of(e.second);
        if (top) v = -v;
        if (!best || v < *best || (v == *best && e.second > bestj)) {
            best = v;
            bestj = e.second;
            if (lead) *lead = c;
        }
    }
    return top ? -*best : *best;
}

Rational lcm_of_denominators(const std::vector<QN>& v) {
    Integer l = 1;
    for (const auto& q : v) {
        if (!q.is_rational()) throw PreconditionError("valuation is not divisorial (irrational value)");
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.as_rational().get_den_mpz_t());
    }
    return Rational(l);
}

}  // namespace

Valuation Valuation::monomial(const QN& s, const QN& t) {
    if (s.sign() <= 0 || t.sign() <= 0) throw PreconditionError("monomial weights must be positive");
    Valuation v;
    v.kind_ = Kind::monomial;
    v.norm_ = Normalization::local;
    v.s_ = s;
    v.t_ = t;
    return v;
}

Valuation Valuation::skp_based(Skp s, CoordChange coords, bool truncated) {
    if (s.values.size() != s.keys.size()) throw PreconditionError("SKP valuation needs a value for every key");
    skp_validate(s);
    Valuation v;
    if (s.chart == Chart::local) {
        coords.validate(true);
        if (s.values[1] < QN(1)) throw PreconditionError("local SKPs need beta_1 >= 1 (swap coordinates)");
        if (s.depth() == 1 && !truncated) {
            if (coords.is_identity()) return monomial(1, s.values[1]);
            if (coords.is_swap()) return monomial(s.values[1], 1);
        }
        v.norm_ = Normalization::local;
    } else {
        coords.validate(false);
        v.norm_ = Normalization::affine;
    }
    v.kind_ = Kind::skp;
    v.skp_ = std::move(s);
    v.coords_ = std::move(coords);
    v.truncated_ = truncated;
    return v;
}

Valuation Valuation::neg_deg() {
    Valuation v;
    v.kind_ = Kind::neg_deg;
    v.norm_ = Normalization::affine;
    return v;
}

Valuation Valuation::affine_monomial(const QN& vx, const QN& vy) {
    if (min(vx, vy) != QN(-1)) throw PreconditionError("affine monomial valuation needs min(nu(X), nu(Y)) = -1");
    if (vx == vy) return neg_deg();
    Skp s{Chart::infinity, {BiPoly::x(), BiPoly::y()}, {QN(1), QN(0)}};
    if (vy > vx) {
        s.values[1] = vy + QN(1);
        return skp_based(s);
    }
    s.values[1] = vx + QN(1);
    return skp_based(s, CoordChange::swap());
}

Valuation Valuation::curve(const BiPoly& phi) {
    if (phi.is_zero() || phi.coeff(0, 0) != 0) throw PreconditionError("curve must pass through the origin");
    Valuation v;
    v.kind_ = Kind::curve;
    v.norm_ = Normalization::local;
    v.curve_ = normalize(phi);
    return v;
}

bool Valuation::is_divisorial() const {
    switch (kind_) {
        case Kind::monomial:
            return (s_ / t_).is_rational();
        case Kind::skp:
            return !truncated_ && skp_.values.back().is_rational();
        case Kind::neg_deg:
            return true;
        case Kind::curve:
            return false;
    }
    return false;
}

std::optional<QN> Valuation::value(const BiPoly& p) const {
    if (p.is_zero()) return std::nullopt;
    switch (kind_) {
        case Kind::monomial:
            return lowest_weight(p, s_, t_, false, nullptr);
        case Kind::neg_deg:
            return QN(-static_cast<long>(p.total_degree()));
        case Kind::curve: {
            BiPoly r = curve_restriction(curve_, p);
            if (r.is_zero()) return std::nullopt;
            return QN(Rational(Integer(ord_x(r))));
        }
        case Kind::skp: {
            BiPoly q = coords_.to_chart(p);
            if (norm_ == Normalization::local) return skp_eval(skp_, q);
            return *skp_eval(skp_, at_infinity_transform(q)) - QN(static_cast<long>(q.total_degree()));
        }
    }
    return std::nullopt;
}

Rational Valuation::lead(const BiPoly& p) const {
    if (p.is_zero()) throw PreconditionError("leading coefficient of the zero polynomial");
    Rational c;
    switch (kind_) {
        case Kind::monomial:
            lowest_weight(p, s_, t_, false, &c);
            return c;
        case Kind::neg_deg:
            lowest_weight(p, QN(1), QN(1), true, &c);
            return c;
        case Kind::curve: {
            BiPoly r = curve_restriction(curve_, p);
            if (r.is_zero()) throw PreconditionError("polynomial vanishes on the curve");
            return r.coeff(ord_x(r), 0);
        }
        case Kind::skp: {
            BiPoly q = coords_.to_chart(p);
            if (norm_ == Normalization::local) return skp_lead(skp_, q);
            return skp_lead(skp_, at_infinity_transform(q));
        }
    }
    return c;
}

std::pair<Skp, CoordChange> Valuation::as_skp() const {
    if (kind_ == Kind::skp) return {skp_, coords_};
    if (kind_ != Kind::monomial) throw PreconditionError("valuation has no local SKP form");
    Skp s{Chart::local, {BiPoly::x(), BiPoly::y()}, {QN(1), QN(1)}};
    if (s_ <= t_) {
        s.values[1] = t_ / s_;
        return {s, CoordChange::identity()};
    }
    s.values[1] = s_ / t_;
    return {s, CoordChange::swap()};
}

bool operator==(const Valuation& a, const Valuation& b) {
    if (a.kind_ != b.kind_ || a.norm_ != b.norm_) return false;
    switch (a.kind_) {
        case Valuation::Kind::monomial:
            return a.s_ == b.s_ && a.t_ == b.t_;
        case Valuation::Kind::neg_deg:
            return true;
        case Valuation::Kind::curve:
            return a.curve_ == b.curve_;
        case Valuation::Kind::skp:
            return a.skp_ == b.skp_ && a.coords_ == b.coords_ && a.truncated_ == b.truncated_;
    }
    return false;
}

std::optional<QN> skp_eval(const Valuation& nu, const BiPoly& p) { return nu.value(p); }

std::optional<QN> affine_eval(const Valuation& nu, const BiPoly& p) {
    if (nu.normalization() != Normalization::affine) throw PreconditionError("affine_eval needs a valuation at infinity");
    return nu.value(p);
}

QN skewness(const Valuation& nu) {
    switch (nu.kind()) {
        case Valuation::Kind::monomial:
            return max(nu.s(), nu.t()) / min(nu.s(), nu.t());
        case Valuation::Kind::neg_deg:
            return QN(1);
        case Valuation::Kind::curve:
            throw PreconditionError("curve valuations have infinite skewness");
        case Valuation::Kind::skp: {
            const Skp& s = nu.skp();
            SkpData data = skp_validate(s);
            QN rel = s.values.back() / qn_of(data.d[s.depth()]);
            return nu.normalization() == Normalization::local ? rel : QN(1) - rel;
        }
    }
    return QN(0);
}

unsigned long valuation_multiplicity(const Valuation& nu) {
    switch (nu.kind()) {
        case Valuation::Kind::monomial:
        case Valuation::Kind::neg_deg:
            return 1;
        case Valuation::Kind::curve:
            throw PreconditionError("multiplicity of a curve valuation is not defined here");
        case Valuation::Kind::skp:
            return skp_validate(nu.skp()).d[nu.skp().depth()];
    }
    return 1;
}

QN thinness(const Valuation& nu) {
    switch (nu.kind()) {
        case Valuation::Kind::monomial:
            return (nu.s() + nu.t()) / min(nu.s(), nu.t());
        case Valuation::Kind::neg_deg:
            return QN(-2);
        case Valuation::Kind::curve:
            throw PreconditionError("curve valuations have infinite thinness");
        case Valuation::Kind::skp: {
            const Skp& s = nu.skp();
            SkpData data = skp_validate(s);
            QN a = QN(1) + s.values[1];
            for (std::size_t j = 1; j < s.depth(); ++j) a += s.values[j + 1] - s.values[j] * qn_of(data.n[j]);
            return nu.normalization() == Normalization::local ? a : a - QN(3);
        }
    }
    return QN(0);
}

QN inf_skewness(const Valuation& nu, const BiPoly& phi) {
    if (phi.is_zero()) throw PreconditionError("inf_skewness of the zero polynomial");
    if (nu.normalization() != Normalization::local) throw PreconditionError("inf_skewness is local");
    auto v = nu.value(phi);
    if (!v) throw PreconditionError("valuation is infinite on phi");
    return *v / qn_of(multiplicity(phi));
}

unsigned long generic_multiplicity(const Valuation& nu) {
    switch (nu.kind()) {
        case Valuation::Kind::monomial: {
            QN lo = min(nu.s(), nu.t());
            return lcm_of_denominators({nu.s() / lo, nu.t() / lo}).get_num().get_ui();
        }
        case Valuation::Kind::neg_deg:
            return 1;
        case Valuation::Kind::curve:
            throw PreconditionError("curve valuations are not divisorial");
        case Valuation::Kind::skp:
            if (nu.truncated()) throw PreconditionError("truncated valuation is not divisorial");
            return lcm_of_denominators(nu.skp().values).get_num().get_ui();
    }
    return 1;
}

OnePlaceReport one_place_certify(const Skp& s) {
    if (s.chart != Chart::infinity) throw PreconditionError("one_place_certify needs an SKP at infinity");
    SkpData data = skp_validate(s);
    const std::size_t k = s.depth();
    OnePlaceReport r;
    bool all_le = true, prefix_le = true, deg_ok = true;
    for (std::size_t j = 1; j <= k; ++j) {
        OnePlaceStage st;
        st.j = static_cast<unsigned>(j);
        st.d = data.d[j];
        st.D = at_infinity_transform(s.keys[j]).total_degree();
        st.beta_le_d = s.values[j] <= qn_of(st.d);
        all_le = all_le && st.beta_le_d;
        if (j < k) prefix_le = prefix_le && st.beta_le_d;
        deg_ok = deg_ok && st.D == st.d;
        r.stages.push_back(st);
    }
    QN sum = s.values[1], prefix_sum = s.values[1];
    for (std::size_t j = 1; j < k; ++j) {
        QN step = s.values[j + 1] - s.values[j] * qn_of(data.n[j]);
        sum += step;
        if (j + 1 < k) prefix_sum += step;
    }
    r.sum = sum;
    r.sum_condition = sum < QN(2);
    r.hypotheses = all_le && r.sum_condition;
    r.prefix_hypotheses = k == 1 || (prefix_le && prefix_sum < QN(2));
    r.degrees_match = deg_ok;
    r.certified = r.hypotheses;
    return r;
}

PencilGenus pencil_genus(const QN& a, unsigned long b) {
    if (b == 0) throw PreconditionError("generic multiplicity must be positive");
    if (!a.is_rational()) throw PreconditionError("thinness of a pencil valuation is rational");
    Rational twice_g = a.as_rational() * Rational(Integer(b)) + 1;
    if (!is_integer(twice_g) || twice_g < 0 || twice_g.get_num() % 2 != 0)
        throw PreconditionError("A = " + a.to_string() + ", b = " + std::to_string(b) +
                                " do not describe a pencil valuation");
    return {twice_g.get_num() / 2, a.as_rational() <= 0};
}

// ---------------------------------------------------------------------------
// Reconstruction from an oracle

namespace {

struct ChartOracle {
    const ValuationOracle& o;
    CoordChange coords;
    bool affine;

    /// Value of a chart polynomial (relative value at infinity).
    std::optional<QN> value(const BiPoly& q) const {
        if (!affine) return o.value(coords.from_chart(q));
        auto v = o.value(coords.from_chart(at_infinity_transform(q)));
        if (!v) return v;
        return *v + QN(static_cast<long>(q.total_degree()));
    }
    Rational lead(const BiPoly& q) const {
        if (!affine) return o.lead(coords.from_chart(q));
        return o.lead(coords.from_chart(at_infinity_transform(q)));
    }
};

}  // namespace

Valuation reconstruct_valuation(const ValuationOracle& oracle, unsigned max_depth) {
    const bool affine = oracle.normalization() == Normalization::affine;
    const QN unit = affine ? QN(-1) : QN(1);
    const BiPoly X = BiPoly::x(), Y = BiPoly::y();
    auto vx = oracle.value(X), vy = oracle.value(Y);
    if (!vx && !vy) throw PreconditionError("valuation is infinite on both coordinates");
    QN lo = !vx ? *vy : !vy ? *vx : min(*vx, *vy);
    if (lo != unit) throw PreconditionError("valuation is not normalized");

    CoordChange coords;
    if (vx && vy && *vx == *vy) {
        Rational theta = oracle.lead(Y) / oracle.lead(X);
        auto v = oracle.value(Y - theta * X);
        if (v && *v == unit) return affine ? Valuation::neg_deg() : Valuation::monomial(1, 1);
        coords = CoordChange::shear(theta);
    } else if (!vy || (vx && *vy > *vx)) {
        coords = CoordChange::identity();
    } else {
        coords = CoordChange::swap();
    }
    ChartOracle co{oracle, coords, affine};
    Skp s{affine ? Chart::infinity : Chart::local, {X, Y}, {QN(1)}};
    auto b1 = co.value(Y);
    if (!b1) return Valuation::curve(coords.v);
    s.values.push_back(*b1);
    while (s.values.back().is_rational()) {
        if (s.depth() >= max_depth) return Valuation::skp_based(s, coords, true);
        const std::size_t k = s.depth();
        std::vector<QN> prefix(s.values.begin(), s.values.end() - 1);
        auto rel = key_relation(prefix, s.values[k]);
        BiPoly A = s.keys[k].pow(static_cast<unsigned>(rel->n));
        BiPoly B = key_monomial(s, rel->m);
        Rational theta = co.lead(A) / co.lead(B);
        BiPoly C = A - theta * B;
        auto vc = co.value(C);
        QN base = s.values[k] * qn_of(rel->n);
        if (vc && *vc <= base) break;
        if (!vc) {
            if (affine) throw PreconditionError("valuation is infinite on a nonzero polynomial");
            return Valuation::curve(coords.from_chart(C));
        }
        s = skp_extend(s, theta, *vc);
    }
    return Valuation::skp_based(s, coords);
}

// ---------------------------------------------------------------------------
// Text forms

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

/// Splits at top-level separators, tracking bracket depth.
std::vector<std::pair<std::string, std::size_t>> split_top(const std::string& s, char sep, std::size_t base) {
    std::vector<std::pair<std::string, std::size_t>> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || (s[i] == sep && depth == 0)) {
            out.emplace_back(s.substr(start, i - start), base + start);
            start = i + 1;
        } else if (s[i] == '(' || s[i] == '[' || s[i] == '{') {
            ++depth;
        } else if (s[i] == ')' || s[i] == ']' || s[i] == '}') {
            --depth;
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::size_t>> parse_list(const std::string& s, std::size_t pos) {
    std::string t = trim(s);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw ParseError("expected a bracketed list", pos);
    std::size_t off = s.find('[');
    auto items = split_top(t.substr(1, t.size() - 2), ',', pos + off + 1);
    if (items.size() == 1 && trim(items[0].first).empty()) items.clear();
    return items;
}

QN parse_qn_at(const std::string& s, std::size_t pos) {
    try {
        return parse_quadratic(s);
    } catch (const ParseError& e) {
        throw ParseError(e.message(), pos + e.position());
    }
}

BiPoly parse_poly_at(const std::string& s, const VarNames& v, std::size_t pos) {
    try {
        return parse_poly(s, v);
    } catch (const ParseError& e) {
        throw ParseError(e.message(), pos + e.position());
    }
}

}  // namespace

std::string skp_to_string(const Skp& s, const CoordChange& coords, bool truncated) {
    const bool local = s.chart == Chart::local;
    const VarNames& kv = local ? kLocalVars : kChartVars;
    const VarNames& cv = local ? kLocalVars : kAffineVars;
    std::string out = std::string("skp{chart=") + (local ? "local" : "infinity") + "; ";
    if (!coords.is_identity()) out += "coords=[" + coords.u.to_string(cv) + ", " + coords.v.to_string(cv) + "]; ";
    out += "keys=[";
    for (std::size_t i = 0; i < s.keys.size(); ++i) out += (i ? ", " : "") + s.keys[i].to_string(kv);
    out += "]; values=[";
    for (std::size_t i = 0; i < s.values.size(); ++i) out += (i ? ", " : "") + s.values[i].to_string();
    out += "]";
    if (truncated) out += "; truncated";
    return out + "}";
}

std::string Valuation::to_string() const {
    switch (kind_) {
        case Kind::monomial:
            return "monomial(" + s_.to_string() + ", " + t_.to_string() + ")";
        case Kind::neg_deg:
            return "negdeg";
        case Kind::curve:
            return "curve(" + curve_.to_string() + ")";
        case Kind::skp:
            return skp_to_string(skp_, coords_, truncated_);
    }
    return {};
}

Valuation parse_valuation(const std::string& text) {
    const std::string t = trim(text);
    const std::size_t lead_ws = text.find_first_not_of(" \t\n\r");
    const std::size_t base = lead_ws == std::string::npos ? 0 : lead_ws;
    auto inner = [&](const std::string& head, char close) {
        if (t.back() != close) throw ParseError("missing closing '" + std::string(1, close) + "'", base + t.size());
        return t.substr(head.size(), t.size() - head.size() - 1);
    };
    if (t == "negdeg") return Valuation::neg_deg();
    if (t.rfind("monomial(", 0) == 0) {
        auto args = split_top(inner("monomial(", ')'), ',', base + 9);
        if (args.size() != 2) throw ParseError("monomial(s, t) takes two weights", base + 9);
        return Valuation::monomial(parse_qn_at(trim(args[0].first), args[0].second),
                                   parse_qn_at(trim(args[1].first), args[1].second));
    }
    if (t.rfind("curve(", 0) == 0) return Valuation::curve(parse_poly_at(inner("curve(", ')'), kLocalVars, base + 6));
    if (t.rfind("skp{", 0) != 0) throw ParseError("expected negdeg, monomial(...), curve(...) or skp{...}", base);

    Skp s;
    CoordChange coords;
    bool truncated = false, have_chart = false;
    std::vector<std::pair<std::string, std::size_t>> keys_txt, coords_txt;
    for (const auto& [field, pos] : split_top(inner("skp{", '}'), ';', base + 4)) {
        std::string f = trim(field);
        if (f.empty()) continue;
        if (f == "truncated") {
            truncated = true;
            continue;
        }
        auto eq = f.find('=');
        if (eq == std::string::npos) throw ParseError("expected name=value", pos);
        std::string name = trim(f.substr(0, eq)), val = f.substr(eq + 1);
        std::size_t vpos = pos + field.find('=') + 1;
        if (name == "chart") {
            std::string c = trim(val);
            if (c == "local") s.chart = Chart::local;
            else if (c == "infinity") s.chart = Chart::infinity;
            else throw ParseError("chart must be local or infinity", vpos);
            have_chart = true;
        } else if (name == "keys") {
            keys_txt = parse_list(val, vpos);
        } else if (name == "coords") {
            coords_txt = parse_list(val, vpos);
        } else if (name == "values") {
            for (const auto& [item, ipos] : parse_list(val, vpos)) s.values.push_back(parse_qn_at(trim(item), ipos));
        } else {
            throw ParseError("unknown SKP field '" + name + "'", pos);
        }
    }
    if (!have_chart) throw ParseError("SKP text needs chart=local or chart=infinity", base);
    const bool local = s.chart == Chart::local;
    for (const auto& [item, ipos] : keys_txt) s.keys.push_back(parse_poly_at(item, local ? kLocalVars : kChartVars, ipos));
    if (!coords_txt.empty()) {
        if (coords_txt.size() != 2) throw ParseError("coords takes two polynomials", coords_txt.front().second);
        coords.u = parse_poly_at(coords_txt[0].first, local ? kLocalVars : kAffineVars, coords_txt[0].second);
        coords.v = parse_poly_at(coords_txt[1].first, local ? kLocalVars : kAffineVars, coords_txt[1].second);
    }
    return Valuation::skp_based(s, coords, truncated);
}

}  // namespace valdyn
