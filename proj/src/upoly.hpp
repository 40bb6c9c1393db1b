// Internal helpers: univariate polynomials over Q and polynomials in y with
// univariate coefficients in x.
#pragma once

#include <algorithm>
#include <vector>

#include "valdyn/poly.hpp"

namespace valdyn::detail {

/// Univariate polynomial over Q, index = degree.
using UPoly = std::vector<Rational>;

inline void trim(UPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline UPoly u_mul(const UPoly& a, const UPoly& b) {
    if (a.empty() || b.empty()) return {};
    UPoly r(a.size() + b.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}

inline std::pair<UPoly, UPoly> u_divmod(UPoly a, const UPoly& b) {
    UPoly q;
    if (a.size() >= b.size()) q.assign(a.size() - b.size() + 1, Rational(0));
    while (!a.empty() && a.size() >= b.size()) {
        std::size_t s = a.size() - b.size();
        Rational c = a.back() / b.back();
        q[s] = c;
        for (std::size_t i = 0; i < b.size(); ++i) a[s + i] -= c * b[i];
        trim(a);
    }
    trim(q);
    return {q, a};
}

inline UPoly u_monic(UPoly a) {
    if (a.empty()) return a;
    Rational l = a.back();
    for (auto& c : a) c /= l;
    return a;
}

inline UPoly u_gcd(UPoly a, UPoly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        UPoly r = u_divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return u_monic(a);
}

inline std::vector<Integer> divisors(Integer n) {
    n = abs(n);
    std::vector<Integer> small, large;
    if (n == 0 || n > Integer("1000000000000")) return {};
    for (Integer d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            small.push_back(d);
            if (d * d != n) large.push_back(n / d);
        }
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

inline Rational u_eval(const UPoly& a, const Rational& t) {
    Rational s = 0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) s = s * t + *it;
    return s;
}

/// Rational roots of a nonzero univariate polynomial; ok = false when the
/// candidate set was too large to enumerate.
inline std::vector<Rational> rational_roots(const UPoly& a, bool& ok) {
    ok = true;
    std::vector<Rational> roots;
    if (a.size() <= 1) return roots;
    Integer l = 1;
    for (const auto& c : a) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
    std::size_t low = 0;
    while (a[low] == 0) ++low;
    if (low > 0) roots.emplace_back(0);
    Integer a0 = Rational(a[low] * Rational(l)).get_num(), an = Rational(a.back() * Rational(l)).get_num();
    auto dp = divisors(a0), dq = divisors(an);
    if (dp.empty() || dq.empty()) {
        ok = false;
        return roots;
    }
    for (const auto& p : dp)
        for (const auto& q : dq)
            for (int s : {1, -1}) {
                Rational t = make_rational(p * s, q);
                if (u_eval(a, t) == 0 && std::find(roots.begin(), roots.end(), t) == roots.end())
                    roots.push_back(t);
            }
    return roots;
}

/// Polynomial in y whose coefficients are UPolys in x.
using YPoly = std::vector<UPoly>;

inline YPoly to_ypoly(const BiPoly& p) {
    YPoly r(p.is_zero() ? 0 : p.degree_y() + 1);
    for (const auto& [e, c] : p.terms()) {
        UPoly& u = r[e.second];
        if (u.size() <= e.first) u.resize(e.first + 1, Rational(0));
        u[e.first] = c;
    }
    return r;
}

inline BiPoly from_ypoly(const YPoly& y) {
    BiPoly p;
    for (std::size_t j = 0; j < y.size(); ++j)
        for (std::size_t i = 0; i < y[j].size(); ++i)
            p.add_term(static_cast<unsigned>(i), static_cast<unsigned>(j), y[j][i]);
    return p;
}

inline void y_trim(YPoly& a) {
    while (!a.empty() && a.back().empty()) a.pop_back();
}

inline UPoly y_content(const YPoly& a) {
    UPoly g;
    for (const auto& c : a) g = u_gcd(g, c);
    return g;
}

inline YPoly y_divide_content(const YPoly& a, const UPoly& c) {
    YPoly r;
    for (const auto& u : a) r.push_back(u_divmod(u, c).first);
    y_trim(r);
    return r;
}

inline YPoly y_prem(YPoly a, const YPoly& b) {
    const UPoly& lb = b.back();
    while (!a.empty() && a.size() >= b.size()) {
        std::size_t s = a.size() - b.size();
        UPoly la = a.back();
        for (auto& u : a) u = u_mul(u, lb);
        for (std::size_t i = 0; i < b.size(); ++i) {
            UPoly t = u_mul(la, b[i]);
            UPoly& target = a[s + i];
            if (target.size() < t.size()) target.resize(t.size(), Rational(0));
            for (std::size_t k = 0; k < t.size(); ++k) target[k] -= t[k];
            trim(target);
        }
        y_trim(a);
    }
    return a;
}
}  // namespace valdyn::detail
