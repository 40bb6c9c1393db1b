// Partial factorization over Q: monomial part, contents, square-free
// decomposition, then per square-free part a handful of sufficient
// irreducibility tests and splittings.

#include <algorithm>
#include <map>

#include "upoly.hpp"
#include "valdyn/errors.hpp"
#include "valdyn/poly.hpp"

namespace valdyn {
namespace {

using detail::UPoly;
using detail::rational_roots;
using detail::u_eval;

UPoly u_derivative(const UPoly& a) {
    UPoly r;
    for (std::size_t i = 1; i < a.size(); ++i) r.push_back(a[i] * static_cast<unsigned long>(i));
    detail::trim(r);
    return r;
}

/// Square-free decomposition (Yun) of a univariate polynomial.
std::vector<std::pair<UPoly, unsigned>> u_squarefree(const UPoly& f) {
    std::vector<std::pair<UPoly, unsigned>> out;
    if (f.size() <= 1) return out;
    UPoly fp = u_derivative(f);
    UPoly a0 = detail::u_gcd(f, fp);
    UPoly b = detail::u_divmod(f, a0).first, c = detail::u_divmod(fp, a0).first;
    UPoly d = c;
    {
        UPoly bp = u_derivative(b);
        d.resize(std::max(d.size(), bp.size()), Rational(0));
        for (std::size_t i = 0; i < bp.size(); ++i) d[i] -= bp[i];
        detail::trim(d);
    }
    unsigned i = 1;
    while (b.size() > 1) {
        UPoly a = detail::u_gcd(b, d);
        if (a.size() > 1) out.emplace_back(a, i);
        b = detail::u_divmod(b, a).first;
        c = detail::u_divmod(d, a).first;
        UPoly bp = u_derivative(b);
        d = c;
        d.resize(std::max(d.size(), bp.size()), Rational(0));
        for (std::size_t k = 0; k < bp.size(); ++k) d[k] -= bp[k];
        detail::trim(d);
        ++i;
    }
    return out;
}

/// Factors a univariate polynomial into linear factors over Q and a residue.
std::vector<std::pair<UPoly, unsigned>> u_factor(const UPoly& f, bool& complete) {
    std::vector<std::pair<UPoly, unsigned>> out;
    for (auto& [s, m] : u_squarefree(f)) {
        bool ok = true;
        UPoly rest = s;
        for (const auto& r : rational_roots(s, ok)) {
            UPoly lin{-r, Rational(1)};
            rest = detail::u_divmod(rest, lin).first;
            out.emplace_back(lin, m);
        }
        if (rest.size() > 1) {
            // no rational roots left: degree <= 3 means irreducible
            if (!ok || rest.size() > 4) complete = false;
            out.emplace_back(detail::u_monic(rest), m);
        }
    }
    return out;
}

BiPoly upoly_in_x(const UPoly& u) {
    BiPoly p;
    for (std::size_t i = 0; i < u.size(); ++i) p.add_term(static_cast<unsigned>(i), 0, u[i]);
    return p;
}

/// Square root in Q[x] when it exists.
std::optional<UPoly> u_sqrt(const UPoly& a) {
    if (a.empty()) return UPoly{};
    if ((a.size() - 1) % 2 != 0) return std::nullopt;
    const Rational& lc = a.back();
    if (lc < 0 || !is_perfect_square(lc.get_num()) || !is_perfect_square(lc.get_den())) return std::nullopt;
    std::size_t n = (a.size() - 1) / 2;
    UPoly r(n + 1, Rational(0));
    r[n] = make_rational(isqrt(lc.get_num()), isqrt(lc.get_den()));
    for (std::size_t k = n; k-- > 0;) {
        // coefficient of x^(n+k) in r^2 is 2 r_n r_k + (terms with indices > k)
        Rational acc = 0;
        for (std::size_t i = k + 1; i <= n; ++i) {
            std::size_t j = n + k - i;
            if (j > k && j <= n) acc += r[i] * r[j];
        }
        r[k] = (a[n + k] - acc) / (2 * r[n]);
    }
    if (detail::u_mul(r, r) != a) return std::nullopt;
    return r;
}

struct Split {
    std::vector<BiPoly> factors;
    bool complete = true;
};

BiPoly y_primitive(const BiPoly& p) {
    auto yp = detail::to_ypoly(p);
    return normalize(detail::from_ypoly(detail::y_divide_content(yp, detail::y_content(yp))));
}

/// S = A y^2 + B y + C primitive in y: splits iff B^2 - 4AC is a square.
std::optional<Split> split_quadratic_in_y(const BiPoly& s) {
    BiPoly A = s.coeff_y(2), B = s.coeff_y(1), C = s.coeff_y(0);
    BiPoly disc = B * B - Rational(4) * A * C;
    UPoly du = detail::to_ypoly(disc).empty() ? UPoly{} : detail::to_ypoly(disc)[0];
    auto r = u_sqrt(du);
    if (!r) return Split{{normalize(s)}, true};
    BiPoly root = upoly_in_x(*r);
    BiPoly lin = Rational(2) * A * BiPoly::y() + B;
    BiPoly f1 = y_primitive(lin - root), f2 = y_primitive(lin + root);
    auto q = exact_div(s, f1);
    if (!q || normalize(*q) != f2) throw InternalError("quadratic splitting failed for " + s.to_string());
    return Split{{f1, f2}, true};
}

bool newton_primitive_segment(const BiPoly& s) {
    const auto& t = s.terms();
    Exponent p0 = t.begin()->first, p1 = t.rbegin()->first;
    long long dx = static_cast<long long>(p1.first) - p0.first, dy = static_cast<long long>(p1.second) - p0.second;
    for (const auto& [e, c] : t) {
        long long ex = static_cast<long long>(e.first) - p0.first, ey = static_cast<long long>(e.second) - p0.second;
        if (ex * dy - ey * dx != 0) return false;
    }
    Integer g;
    Integer adx = Integer(std::to_string(std::llabs(dx))), ady = Integer(std::to_string(std::llabs(dy)));
    mpz_gcd(g.get_mpz_t(), adx.get_mpz_t(), ady.get_mpz_t());
    return g == 1;
}

/// S square-free, primitive in both variables, free of monomial factors.
Split split_squarefree(const BiPoly& s) {
    if (s.degree_y() == 1 || s.degree_x() == 1) return {{normalize(s)}, true};
    if (s.is_homogeneous()) {
        UPoly st(s.degree_y() + 1, Rational(0));
        for (const auto& [e, c] : s.terms()) st[e.second] = c;
        bool complete = true;
        Split out;
        for (auto& [g, m] : u_factor(st, complete)) {
            unsigned e = static_cast<unsigned>(g.size() - 1);
            BiPoly h;
            for (unsigned k = 0; k <= e; ++k) h.add_term(e - k, k, g[k]);
            out.factors.push_back(normalize(h));
        }
        out.complete = complete;
        return out;
    }
    if (s.degree_y() == 2) return *split_quadratic_in_y(s);
    if (s.degree_x() == 2) {
        Split sw = *split_quadratic_in_y(s.swap_xy());
        for (auto& f : sw.factors) f = normalize(f.swap_xy());
        return sw;
    }
    if (newton_primitive_segment(s)) return {{normalize(s)}, true};
    return {{normalize(s)}, false};
}

std::vector<std::pair<BiPoly, unsigned>> bivariate_squarefree(const BiPoly& f) {
    std::vector<std::pair<BiPoly, unsigned>> out;
    BiPoly fp = f.dy();
    BiPoly a0 = gcd(f, fp);
    BiPoly b = *exact_div(f, a0), c = *exact_div(fp, a0);
    BiPoly d = c - b.dy();
    unsigned i = 1;
    while (!b.is_constant()) {
        BiPoly a = gcd(b, d);
        if (!a.is_constant()) out.emplace_back(a, i);
        b = *exact_div(b, a);
        c = *exact_div(d, a);
        d = c - b.dy();
        ++i;
    }
    return out;
}

}  // namespace

Factorization factor(const BiPoly& p, const std::vector<BiPoly>& candidates) {
    if (p.is_zero()) throw PreconditionError("cannot factor the zero polynomial");
    Factorization out;
    BiPoly P = normalize(p);

    unsigned a = ~0U, b = ~0U;
    for (const auto& [e, c] : P.terms()) {
        a = std::min(a, e.first);
        b = std::min(b, e.second);
    }
    std::map<std::string, std::pair<BiPoly, unsigned>> acc;
    auto add = [&](const BiPoly& f, unsigned m) {
        BiPoly n = normalize(f);
        auto [it, inserted] = acc.try_emplace(n.to_string(), n, m);
        if (!inserted) it->second.second += m;
    };
    if (a > 0) add(BiPoly::x(), a);
    if (b > 0) add(BiPoly::y(), b);
    BiPoly Q;
    for (const auto& [e, c] : P.terms()) Q.add_term(e.first - a, e.second - b, c);

    // pure-x content, then pure-y content
    auto yq = detail::to_ypoly(Q);
    UPoly cx = detail::y_content(yq);
    Q = detail::from_ypoly(detail::y_divide_content(yq, cx));
    auto xq = detail::to_ypoly(Q.swap_xy());
    UPoly cy = detail::y_content(xq);
    Q = detail::from_ypoly(detail::y_divide_content(xq, cy)).swap_xy();

    for (auto& [g, m] : u_factor(cx, out.complete)) add(upoly_in_x(g), m);
    for (auto& [g, m] : u_factor(cy, out.complete)) add(upoly_in_x(g).swap_xy(), m);

    if (!Q.is_constant()) {
        for (auto& [s, m] : bivariate_squarefree(Q)) {
            BiPoly rest = s;
            for (const auto& cand : candidates) {
                if (cand.is_constant() || rest.is_constant()) continue;
                // candidates are only used when they are themselves certified irreducible
                Factorization cf = factor(cand);
                if (!cf.complete || cf.factors.size() != 1 || cf.factors[0].second != 1) continue;
                if (auto q = exact_div(rest, cand)) {
                    add(cand, m);
                    rest = *q;
                }
            }
            if (rest.is_constant()) continue;
            Split sp = split_squarefree(rest);
            if (!sp.complete) out.complete = false;
            for (const auto& f : sp.factors) add(f, m);
        }
    }
    for (auto& [k, v] : acc) out.factors.push_back(v);

    // the product must reproduce p up to the unit
    BiPoly prod = BiPoly::constant(1);
    for (const auto& [f, m] : out.factors) prod = prod * f.pow(m);
    const auto& [e0, c0] = *p.terms().begin();
    out.unit = c0 / prod.coeff(e0.first, e0.second);
    if (out.unit * prod != p) throw InternalError("factorization does not reproduce " + p.to_string());
    return out;
}

}  // namespace valdyn
