#include "valdyn/cfquad.hpp"

#include <map>

#include "valdyn/errors.hpp"

namespace valdyn {

using QN = QuadraticNumber;

std::vector<Integer> CfExpansion::terms(std::size_t count) const {
    std::vector<Integer> out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i < preperiod.size()) out.push_back(preperiod[i]);
        else out.push_back(period[(i - preperiod.size()) % period.size()]);
    }
    return out;
}

namespace {

Integer floor_div(const Integer& a, const Integer& b) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

}  // namespace

CfExpansion cf_expand(const QN& x, std::size_t max_terms) {
    if (x.is_rational()) throw PreconditionError("continued fraction of a rational number is finite");
    if (x.sign() <= 0) throw PreconditionError("cf_expand needs x > 0");
    // x = (P + sqrt(N))/Q with Q | N - P^2
    Integer C = x.a().get_den();
    mpz_lcm(C.get_mpz_t(), C.get_mpz_t(), x.b().get_den_mpz_t());
    Rational bc = x.b() * Rational(C);
    Integer P = Rational(x.a() * Rational(C)).get_num();
    Integer N = bc.get_num() * bc.get_num() * x.D();
    Integer Q = sgn(bc) > 0 ? C : Integer(-C);
    if (sgn(bc) < 0) P = -P;
    if (Integer(N - P * P) % Q != 0) {
        Integer aq = abs(Q);
        P *= aq;
        N *= Q * Q;
        Q *= aq;
    }
    const Integer s = isqrt(N);
    std::map<std::pair<Integer, Integer>, std::size_t> seen;
    std::vector<Integer> quotients;
    while (quotients.size() < max_terms) {
        auto [it, fresh] = seen.try_emplace({P, Q}, quotients.size());
        if (!fresh) {
            CfExpansion e;
            e.preperiod.assign(quotients.begin(), quotients.begin() + static_cast<long>(it->second));
            e.period.assign(quotients.begin() + static_cast<long>(it->second), quotients.end());
            return e;
        }
        Integer a = Q > 0 ? floor_div(P + s, Q) : Integer(-floor_div(P + s, Integer(-Q)) - 1);
        quotients.push_back(a);
        P = a * Q - P;
        Q = (N - P * P) / Q;
    }
    throw ResourceError("continued fraction period not found within " + std::to_string(max_terms) + " terms");
}

std::vector<Convergent> convergents(const std::vector<Integer>& terms) {
    std::vector<Convergent> out;
    Integer p1 = 1, q1 = 0, p2 = 0, q2 = 1;
    for (const auto& a : terms) {
        Integer p = a * p1 + p2, q = a * q1 + q2;
        out.push_back({p, q});
        p2 = p1;
        q2 = q1;
        p1 = p;
        q1 = q;
    }
    return out;
}

QN moebius_positive_fixed_point(const Integer& a, const Integer& b, const Integer& c, const Integer& d) {
    if (a < 0 || b < 0 || c < 0 || d < 0) throw PreconditionError("Moebius coefficients must be non-negative");
    // c t^2 - (a - d) t - b = 0
    const Integer delta = a - d;
    const Integer disc = delta * delta + 4 * b * c;
    if (c == 0 || is_perfect_square(disc))
        throw PreconditionError("M(t) = (" + a.get_str() + "t + " + b.get_str() + ")/(" + c.get_str() + "t + " +
                                d.get_str() + ") has no positive irrational fixed point");
    auto [sq, core] = square_free_split(disc);
    Rational den(Integer(2 * c));
    return QN(Rational(delta) / den, Rational(sq) / den, core);
}

bool quadra_invariants_hold(const QuadraInterval& iv) {
    if (iv.q <= 0 || iv.q2 <= 0 || iv.p <= 0 || iv.p2 <= 0) return false;
    if (iv.p2 * iv.q - iv.p * iv.q2 != 1) return false;
    const Rational lo = make_rational(iv.p, iv.q), hi = make_rational(iv.p2, iv.q2);
    if (!(QN(lo) < iv.t_plus && iv.t_plus < QN(hi))) return false;
    auto M = [&](const Rational& t) -> Rational {
        return Rational(Rational(iv.abar) * t + Rational(iv.bbar)) / Rational(Rational(iv.cbar) * t + Rational(iv.dbar));
    };
    for (const Rational& t : {lo, hi}) {
        Rational m = M(t);
        if (m < lo || m > hi) return false;
    }
    return true;
}

QuadraInterval quadra_interval(const Integer& abar, const Integer& bbar, const Integer& cbar, const Integer& dbar,
                               const Integer& size_floor) {
    const QN tp = moebius_positive_fixed_point(abar, bbar, cbar, dbar);
    if (abar * dbar == bbar * cbar) throw PreconditionError("degenerate Moebius map");
    // t -> 1/t conjugates M to (d t + c)/(b t + a)
    const bool inverted = tp < QN(1);
    const Integer a = inverted ? dbar : abar, b = inverted ? cbar : bbar;
    const Integer c = inverted ? bbar : cbar, d = inverted ? abar : dbar;
    const QN t = inverted ? QN(1) / tp : tp;
    const QN tm = t.conjugate();
    const Integer n = (-tm).floor();
    const CfExpansion cf = cf_expand(t + QN(Rational(n)));
    const std::size_t l = cf.preperiod.size() + cf.period.size();
    if (!cf.preperiod.empty())
        throw InternalError("expansion of t+ + n is not purely periodic");

    bool floor_reached = false;
    for (std::size_t k = l; k <= 400 * l; k += l) {
        if (k < 2) continue;
        auto conv = convergents(cf.terms(k));
        const Integer &P1 = conv[k - 1].p, &Q1 = conv[k - 1].q;
        const Integer &P2 = conv[k - 2].p, &Q2 = conv[k - 2].q;
        QuadraInterval iv;
        iv.p2 = P1 - n * Q1;
        iv.q2 = Q1;
        iv.p = P2 + n * P1 - n * Q2 - n * n * Q1;
        iv.q = Q2 + n * Q1;
        iv.abar = a;
        iv.bbar = b;
        iv.cbar = c;
        iv.dbar = d;
        iv.t_plus = t;
        floor_reached = floor_reached || (iv.q > size_floor && iv.q2 > size_floor && iv.p > size_floor);
        if (!quadra_invariants_hold(iv)) continue;
        if (inverted) {
            // (p/q, p2/q2) around 1/t+ becomes (q2/p2, q/p) around t+
            QuadraInterval back = iv;
            back.p = iv.q2;
            back.q = iv.p2;
            back.p2 = iv.q;
            back.q2 = iv.p;
            back.abar = abar;
            back.bbar = bbar;
            back.cbar = cbar;
            back.dbar = dbar;
            back.t_plus = tp;
            iv = back;
        }
        iv.period = cf.period.size();
        iv.k = k;
        iv.shift = n;
        iv.inverted = inverted;
        if (!quadra_invariants_hold(iv)) throw InternalError("invariant interval lost its invariants when inverted");
        if (iv.q <= size_floor || iv.q2 <= size_floor) continue;
        return iv;
    }
    if (!floor_reached) throw ResourceError("size floor " + size_floor.get_str() + " not reached within 400 periods");
    throw InternalError("no invariant interval found among the first 400 period multiples");
}

}  // namespace valdyn
