// Multiplicity sequence c(f^n) by truncated iterated composition.
//
// f^k is built as (((f o f) o f) ...), each stage truncated by a weighted
// degree: a term x^a y^b of f^j ends up, after composing with f^(k-j), in a
// polynomial of multiplicity exactly a*m1 + b*m2 (m_l = multiplicity of the
// l-th component of f^(k-j)), so any lower bounds w_l <= m_l give a sound
// pruning rule a*w1 + b*w2 >= N.
//
// Each run tracks two things per term: whether the term can occur at all
// (support ignoring cancellation) and its residue modulo a 61-bit prime.
// The support minimum is a lower bound for the multiplicity, the smallest
// degree with a nonzero residue is an upper bound. When they differ the
// stage is redone with exact rationals.

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <unordered_map>

#include "valdyn/errors.hpp"
#include "valdyn/poly.hpp"

namespace valdyn {
namespace {

constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61U) - 1;

std::uint64_t add_mod(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    return s >= kPrime ? s - kPrime : s;
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b) {
    unsigned __int128 z = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(z) & kPrime;
    std::uint64_t hi = static_cast<std::uint64_t>(z >> 61U);
    return add_mod(lo, hi);
}

struct ModRing {
    using C = std::uint64_t;
    static C from(const Rational& q) {
        Integer p(std::to_string(kPrime));
        Integer n, d, inv;
        mpz_mod(n.get_mpz_t(), q.get_num_mpz_t(), p.get_mpz_t());
        mpz_mod(d.get_mpz_t(), q.get_den_mpz_t(), p.get_mpz_t());
        if (mpz_invert(inv.get_mpz_t(), d.get_mpz_t(), p.get_mpz_t()) == 0)
            throw ResourceError("coefficient denominator divisible by the oracle prime");
        Integer r = (n * inv) % p;
        return std::stoull(r.get_str());
    }
    static void fma(C& dst, const C& a, const C& b) { dst = add_mod(dst, mul_mod(a, b)); }
    static bool nonzero(const C& c) { return c != 0; }
    static constexpr bool kKeepZeros = true;  // zero residues still mark support
};

struct ExactRing {
    using C = Rational;
    static C from(const Rational& q) { return q; }
    static void fma(C& dst, const C& a, const C& b) { dst += a * b; }
    static bool nonzero(const C& c) { return c != 0; }
    static constexpr bool kKeepZeros = false;
};

inline std::uint64_t key_of(unsigned i, unsigned j) {
    return (static_cast<std::uint64_t>(i) << 32U) | j;
}
inline unsigned key_i(std::uint64_t k) { return static_cast<unsigned>(k >> 32U); }
inline unsigned key_j(std::uint64_t k) { return static_cast<unsigned>(k & 0xffffffffU); }

/// Linear pruning functional a*u + b*v < order.
struct Weight {
    unsigned long long u = 1, v = 1;
    unsigned long long order = 0;
    bool keep(unsigned a, unsigned b) const {
        unsigned __int128 l = static_cast<unsigned __int128>(a) * u + static_cast<unsigned __int128>(b) * v;
        return l < order;
    }
};

template <class R>
using SPoly = std::unordered_map<std::uint64_t, typename R::C>;

template <class R>
void clean(SPoly<R>& p) {
    if constexpr (!R::kKeepZeros) std::erase_if(p, [](const auto& kv) { return !R::nonzero(kv.second); });
}

template <class R>
SPoly<R> convert(const BiPoly& p, const Weight& w) {
    SPoly<R> out;
    for (const auto& [e, c] : p.terms())
        if (w.keep(e.first, e.second)) out.emplace(key_of(e.first, e.second), R::from(c));
    return out;
}

/// dst += a * b, pruned by w.
template <class R>
void mul_acc(SPoly<R>& dst, const SPoly<R>& a, const SPoly<R>& b, const Weight& w) {
    for (const auto& [ka, ca] : a) {
        if (!w.keep(key_i(ka), key_j(ka))) continue;
        for (const auto& [kb, cb] : b) {
            unsigned i = key_i(ka) + key_i(kb), j = key_j(ka) + key_j(kb);
            if (!w.keep(i, j)) continue;
            R::fma(dst[key_of(i, j)], ca, cb);
        }
    }
}

template <class R>
class Powers {
public:
    Powers(SPoly<R> base, const Weight& w) : w_(w) {
        SPoly<R> one;
        one.emplace(key_of(0, 0), R::from(Rational(1)));
        pows_.push_back(std::move(one));
        pows_.push_back(std::move(base));
    }
    const SPoly<R>& get(unsigned k) {
        while (pows_.size() <= k) {
            SPoly<R> next;
            mul_acc<R>(next, pows_.back(), pows_[1], w_);
            clean<R>(next);
            pows_.push_back(std::move(next));
        }
        return pows_[k];
    }

private:
    Weight w_;
    std::vector<SPoly<R>> pows_;
};

template <class R>
struct Pair {
    SPoly<R> c1, c2;
};

/// h o f, pruned by w.
template <class R>
Pair<R> compose_stage(const Pair<R>& h, const PlaneMap& f, const Weight& w, std::size_t budget) {
    Powers<R> p1(convert<R>(f.f1, w), w), p2(convert<R>(f.f2, w), w);
    auto one = [&](const SPoly<R>& comp) {
        std::map<unsigned, std::vector<std::pair<unsigned, const typename R::C*>>> by_b;
        for (const auto& [k, c] : comp) by_b[key_j(k)].emplace_back(key_i(k), &c);
        SPoly<R> out;
        for (auto& [b, list] : by_b) {
            const SPoly<R>& g2b = p2.get(b);
            if (g2b.empty()) continue;
            SPoly<R> inner;
            for (const auto& [a, cptr] : list) {
                for (const auto& [k, c] : p1.get(a)) {
                    if (!w.keep(key_i(k), key_j(k))) continue;
                    R::fma(inner[k], *cptr, c);
                }
            }
            clean<R>(inner);
            mul_acc<R>(out, inner, g2b, w);
            if (out.size() > budget) throw ResourceError("oracle term budget exceeded");
        }
        clean<R>(out);
        return out;
    };
    return {one(h.c1), one(h.c2)};
}

struct StageResult {
    unsigned long support_min[2];
    unsigned long value_min[2];
};

/// Runs f^k with truncation order N; lower[r] holds multiplicity lower bounds
/// of the components of f^r for 1 <= r < k.
template <class R>
StageResult run_iterate(const PlaneMap& f, unsigned k, unsigned long N,
                        const std::vector<std::array<unsigned long, 2>>& lower, std::size_t budget) {
    auto weight_for = [&](unsigned r) {
        Weight w;
        w.order = N;
        if (r > 0) {
            w.u = lower[r][0];
            w.v = lower[r][1];
        }
        return w;
    };
    Weight w0 = weight_for(k - 1);
    Pair<R> h{convert<R>(f.f1, w0), convert<R>(f.f2, w0)};
    for (unsigned j = 1; j < k; ++j) h = compose_stage<R>(h, f, weight_for(k - j - 1), budget);
    StageResult res{};
    const SPoly<R>* comps[2] = {&h.c1, &h.c2};
    for (int l = 0; l < 2; ++l) {
        unsigned long smin = N, vmin = N;
        for (const auto& [key, c] : *comps[l]) {
            unsigned long d = static_cast<unsigned long>(key_i(key)) + key_j(key);
            smin = std::min(smin, d);
            if (R::nonzero(c)) vmin = std::min(vmin, d);
        }
        res.support_min[l] = smin;
        res.value_min[l] = vmin;
    }
    return res;
}

}  // namespace

std::vector<unsigned long> mult_sequence(const PlaneMap& f, unsigned n_max, unsigned max_order) {
    f.validate();
    if (f.kind != MapKind::local_germ) throw PreconditionError("mult_sequence expects a local germ");
    if (!f.is_dominant()) throw PreconditionError("map is not dominant");
    std::vector<unsigned long> out;
    if (n_max == 0) return out;
    const std::size_t budget = term_budget_from_env();

    // lower[r] = multiplicity lower bounds for the two components of f^r
    std::vector<std::array<unsigned long, 2>> lower(2);
    lower[1] = {multiplicity(f.f1), multiplicity(f.f2)};
    out.push_back(std::min(lower[1][0], lower[1][1]));

    for (unsigned k = 2; k <= n_max; ++k) {
        // first guess extrapolates the largest growth ratio seen so far;
        // doubling corrects it when too small
        unsigned long N = out.back() * out.front() + 1;
        for (std::size_t i = 1; i < out.size(); ++i)
            N = std::max(N, (out.back() * out[i] + out[i - 1] - 1) / out[i - 1] + 1);
        for (;;) {
            if (N > max_order)
                throw ResourceError("truncation ceiling " + std::to_string(max_order) +
                                    " exceeded while computing c(f^" + std::to_string(k) + ")");
            StageResult r = run_iterate<ModRing>(f, k, N, lower, budget);
            unsigned long lo = std::min(r.support_min[0], r.support_min[1]);
            unsigned long hi = std::min(r.value_min[0], r.value_min[1]);
            if (hi >= N) {
                N *= 2;
                continue;
            }
            std::array<unsigned long, 2> lb{r.support_min[0], r.support_min[1]};
            unsigned long c = hi;
            if (lo != hi) {
                // residues may hide a nonzero coefficient: settle exactly below hi + 1
                StageResult e = run_iterate<ExactRing>(f, k, hi + 1, lower, budget);
                c = std::min(e.value_min[0], e.value_min[1]);
                for (int l = 0; l < 2; ++l) lb[l] = std::max(lb[l], e.value_min[l]);
            }
            lower.push_back(lb);
            out.push_back(c);
            break;
        }
    }
    return out;
}

}  // namespace valdyn
