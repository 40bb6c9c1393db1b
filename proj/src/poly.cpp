#include "valdyn/poly.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <unordered_map>

#include "upoly.hpp"
#include "valdyn/errors.hpp"

namespace valdyn {

BiPoly::BiPoly(Terms terms) : terms_(std::move(terms)) {
    std::erase_if(terms_, [](const auto& kv) { return kv.second == 0; });
}

BiPoly BiPoly::constant(const Rational& c) { return monomial(0, 0, c); }

BiPoly BiPoly::monomial(unsigned i, unsigned j, const Rational& c) {
    BiPoly p;
    if (c != 0) p.terms_.emplace(Exponent{i, j}, c);
    return p;
}

Rational BiPoly::coeff(unsigned i, unsigned j) const {
    auto it = terms_.find({i, j});
    return it == terms_.end() ? Rational(0) : it->second;
}

void BiPoly::add_term(unsigned i, unsigned j, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(Exponent{i, j}, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

unsigned BiPoly::total_degree() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e.first + e.second);
    return d;
}

unsigned BiPoly::degree_x() const {
    return terms_.empty() ? 0 : terms_.rbegin()->first.first;
}

unsigned BiPoly::degree_y() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e.second);
    return d;
}

bool BiPoly::is_homogeneous() const {
    if (terms_.empty()) return true;
    unsigned d = terms_.begin()->first.first + terms_.begin()->first.second;
    return std::all_of(terms_.begin(), terms_.end(),
                       [d](const auto& kv) { return kv.first.first + kv.first.second == d; });
}

BiPoly BiPoly::truncated(unsigned order) const {
    BiPoly out;
    for (const auto& [e, c] : terms_)
        if (e.first + e.second < order) out.terms_.emplace_hint(out.terms_.end(), e, c);
    return out;
}

BiPoly BiPoly::lowest_form() const {
    if (terms_.empty()) return {};
    return truncated(multiplicity(*this) + 1);
}

BiPoly BiPoly::swap_xy() const {
    BiPoly out;
    for (const auto& [e, c] : terms_) out.terms_.emplace(Exponent{e.second, e.first}, c);
    return out;
}

BiPoly BiPoly::dx() const {
    BiPoly out;
    for (const auto& [e, c] : terms_)
        if (e.first > 0) out.terms_.emplace(Exponent{e.first - 1, e.second}, c * e.first);
    return out;
}

BiPoly BiPoly::dy() const {
    BiPoly out;
    for (const auto& [e, c] : terms_)
        if (e.second > 0) out.terms_.emplace(Exponent{e.first, e.second - 1}, c * e.second);
    return out;
}

BiPoly BiPoly::pow(unsigned n) const {
    BiPoly r = constant(1), base = *this;
    while (n) {
        if (n & 1U) r = r * base;
        n >>= 1U;
        if (n) base = base * base;
    }
    return r;
}

BiPoly BiPoly::coeff_y(unsigned j) const {
    BiPoly out;
    for (const auto& [e, c] : terms_)
        if (e.second == j) out.terms_.emplace(Exponent{e.first, 0}, c);
    return out;
}

Rational BiPoly::eval(const Rational& x, const Rational& y) const {
    Rational s = 0;
    for (const auto& [e, c] : terms_) {
        Rational t = c;
        for (unsigned k = 0; k < e.first; ++k) t *= x;
        for (unsigned k = 0; k < e.second; ++k) t *= y;
        s += t;
    }
    return s;
}

namespace {
std::string monomial_text(unsigned i, unsigned j, const VarNames& v) {
    std::string s;
    auto var = [&](const std::string& name, unsigned k) {
        if (k == 0) return;
        if (!s.empty()) s += "*";
        s += name;
        if (k > 1) s += "^" + std::to_string(k);
    };
    var(v.x, i);
    var(v.y, j);
    return s;
}
}  // namespace

std::string BiPoly::to_string(const VarNames& v) const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        std::string mono = monomial_text(e.first, e.second, v);
        Rational mag = abs(c);
        if (c < 0)
            out += "-";
        else if (!first)
            out += "+";
        if (mono.empty())
            out += valdyn::to_string(mag);
        else if (mag == 1)
            out += mono;
        else
            out += valdyn::to_string(mag) + "*" + mono;
        first = false;
    }
    return out;
}

BiPoly& BiPoly::operator+=(const BiPoly& b) {
    for (const auto& [e, c] : b.terms_) add_term(e.first, e.second, c);
    return *this;
}

BiPoly& BiPoly::operator-=(const BiPoly& b) {
    for (const auto& [e, c] : b.terms_) add_term(e.first, e.second, -c);
    return *this;
}

BiPoly operator+(const BiPoly& a, const BiPoly& b) {
    BiPoly r = a;
    r += b;
    return r;
}

BiPoly operator-(const BiPoly& a, const BiPoly& b) {
    BiPoly r = a;
    r -= b;
    return r;
}

BiPoly BiPoly::operator-() const {
    BiPoly r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
}

BiPoly operator*(const Rational& c, const BiPoly& a) {
    if (c == 0) return {};
    BiPoly r = a;
    for (auto& [e, v] : r.terms_) v *= c;
    return r;
}

namespace {
inline std::uint64_t key_of(unsigned i, unsigned j) {
    return (static_cast<std::uint64_t>(i) << 32U) | j;
}

BiPoly mul_impl(const BiPoly& a, const BiPoly& b, unsigned order, bool truncate) {
    if (a.is_zero() || b.is_zero()) return {};
    std::unordered_map<std::uint64_t, Rational> acc;
    acc.reserve(a.size() * b.size());
    for (const auto& [ea, ca] : a.terms()) {
        if (truncate && ea.first + ea.second >= order) continue;
        for (const auto& [eb, cb] : b.terms()) {
            unsigned i = ea.first + eb.first, j = ea.second + eb.second;
            if (truncate && i + j >= order) continue;
            acc[key_of(i, j)] += ca * cb;
        }
    }
    BiPoly::Terms t;
    for (auto& [k, c] : acc)
        if (c != 0)
            t.emplace(Exponent{static_cast<unsigned>(k >> 32U), static_cast<unsigned>(k & 0xffffffffU)},
                      std::move(c));
    return BiPoly(std::move(t));
}
}  // namespace

BiPoly operator*(const BiPoly& a, const BiPoly& b) { return mul_impl(a, b, 0, false); }

BiPoly mul_truncated(const BiPoly& a, const BiPoly& b, unsigned order) {
    return mul_impl(a, b, order, true);
}

// ---------------------------------------------------------------- parsing

namespace {
class PolyParser {
public:
    PolyParser(const std::string& s, const VarNames& v, std::size_t offset = 0)
        : s_(s), v_(v), i_(offset) {}

    BiPoly parse_all() {
        BiPoly p = expr();
        skip();
        if (i_ != s_.size()) fail("unexpected character '" + std::string(1, s_[i_]) + "'");
        return p;
    }

    BiPoly expr() {
        skip();
        BiPoly acc;
        bool neg = false;
        if (peek('+') || peek('-')) neg = s_[i_++] == '-';
        BiPoly t = term();
        acc = neg ? -t : t;
        for (;;) {
            skip();
            if (peek('+')) {
                ++i_;
                acc += term();
            } else if (peek('-')) {
                ++i_;
                acc -= term();
            } else {
                return acc;
            }
        }
    }

    std::size_t pos() const { return i_; }
    void expect(char c) {
        skip();
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++i_;
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool peek(char c) const { return i_ < s_.size() && s_[i_] == c; }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, i_); }

private:
    BiPoly term() {
        BiPoly acc = power();
        for (;;) {
            skip();
            if (peek('*')) {
                ++i_;
                acc = acc * power();
            } else if (peek('/')) {
                ++i_;
                skip();
                Integer d = integer();
                if (d == 0) fail("division by zero");
                acc = Rational(1, 1) / Rational(d) * acc;
            } else {
                return acc;
            }
        }
    }

    BiPoly power() {
        BiPoly base = primary();
        skip();
        if (peek('^')) {
            ++i_;
            skip();
            if (peek('-')) fail("negative exponent");
            Integer e = integer();
            if (e > 100000) fail("exponent too large");
            base = base.pow(static_cast<unsigned>(e.get_ui()));
        }
        return base;
    }

    BiPoly primary() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end of input");
        char c = s_[i_];
        if (std::isdigit(static_cast<unsigned char>(c))) return BiPoly::constant(Rational(integer()));
        if (c == '(') {
            ++i_;
            BiPoly p = expr();
            expect(')');
            return p;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = i_;
            while (i_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[i_]))) ++i_;
            std::string name = s_.substr(start, i_ - start);
            if (name == v_.x) return BiPoly::x();
            if (name == v_.y) return BiPoly::y();
            i_ = start;
            fail("unknown variable '" + name + "' (expected " + v_.x + " or " + v_.y + ")");
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    Integer integer() {
        std::size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (start == i_) fail("expected integer");
        return Integer(s_.substr(start, i_ - start));
    }

    const std::string& s_;
    const VarNames& v_;
    std::size_t i_;
};
}  // namespace

BiPoly parse_poly(const std::string& text, const VarNames& v) {
    PolyParser p(text, v);
    return p.parse_all();
}

PlaneMap parse_map(const std::string& text, MapKind kind) {
    const VarNames& v = kind == MapKind::local_germ ? kLocalVars : kAffineVars;
    PolyParser p(text, v);
    p.expect('(');
    PlaneMap f;
    f.kind = kind;
    f.f1 = p.expr();
    p.expect(',');
    f.f2 = p.expr();
    p.expect(')');
    p.skip();
    if (p.pos() != text.size()) p.fail("trailing characters after map");
    return f;
}

// ---------------------------------------------------------------- basic invariants

unsigned multiplicity(const BiPoly& p) {
    if (p.is_zero()) throw PreconditionError("multiplicity of the zero polynomial is undefined");
    unsigned m = ~0U;
    for (const auto& [e, c] : p.terms()) m = std::min(m, e.first + e.second);
    return m;
}

NewtonDiagram newton_diagram(const BiPoly& p) {
    if (p.is_zero()) throw PreconditionError("Newton diagram of the zero polynomial");
    // staircase: minimal j for each i, keeping only strict decreases
    std::vector<Exponent> stair;
    for (const auto& [e, c] : p.terms()) {
        if (!stair.empty() && stair.back().first == e.first) continue;  // map order: smallest j first
        if (stair.empty() || e.second < stair.back().second) stair.push_back(e);
    }
    // lower convex hull (monotone chain)
    std::vector<Exponent> hull;
    auto cross = [](const Exponent& o, const Exponent& a, const Exponent& b) {
        long long ax = static_cast<long long>(a.first) - o.first, ay = static_cast<long long>(a.second) - o.second;
        long long bx = static_cast<long long>(b.first) - o.first, by = static_cast<long long>(b.second) - o.second;
        return ax * by - ay * bx;
    };
    for (const auto& pt : stair) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), pt) <= 0) hull.pop_back();
        hull.push_back(pt);
    }
    return {hull};
}

void PlaneMap::validate() const {
    if (kind == MapKind::local_germ && (f1.coeff(0, 0) != 0 || f2.coeff(0, 0) != 0))
        throw PreconditionError("local germ components must vanish at the origin");
}

bool PlaneMap::is_dominant() const { return !jacobian_det(*this).is_zero(); }

std::string PlaneMap::to_string() const {
    const VarNames& v = kind == MapKind::local_germ ? kLocalVars : kAffineVars;
    return "(" + f1.to_string(v) + ", " + f2.to_string(v) + ")";
}

BiPoly jacobian_det(const PlaneMap& f) {
    return f.f1.dx() * f.f2.dy() - f.f1.dy() * f.f2.dx();
}

// ---------------------------------------------------------------- composition

namespace {
/// Caches successive powers of g, optionally truncated.
class PowerCache {
public:
    PowerCache(const BiPoly& g, unsigned order, bool truncate)
        : order_(order), truncate_(truncate) {
        pows_.push_back(BiPoly::constant(1));
        pows_.push_back(truncate ? g.truncated(order) : g);
    }
    const BiPoly& get(unsigned k) {
        while (pows_.size() <= k) {
            const BiPoly& prev = pows_.back();
            pows_.push_back(truncate_ ? mul_truncated(prev, pows_[1], order_) : prev * pows_[1]);
        }
        return pows_[k];
    }

private:
    std::vector<BiPoly> pows_;
    unsigned order_;
    bool truncate_;
};

BiPoly substitute_impl(const BiPoly& p, PowerCache& c1, PowerCache& c2, unsigned order,
                       bool truncate, std::size_t budget) {
    // group by y-exponent: sum_j g2^j * (sum_i c_ij g1^i)
    std::map<unsigned, BiPoly> by_j;
    for (const auto& [e, c] : p.terms()) by_j[e.second] += c * c1.get(e.first);
    BiPoly out;
    for (auto& [j, inner] : by_j) {
        out += truncate ? mul_truncated(inner, c2.get(j), order) : inner * c2.get(j);
        if (out.size() > budget)
            throw ResourceError("term budget of " + std::to_string(budget) + " exceeded");
    }
    return out;
}
}  // namespace

BiPoly substitute(const BiPoly& p, const BiPoly& g1, const BiPoly& g2) {
    PowerCache c1(g1, 0, false), c2(g2, 0, false);
    return substitute_impl(p, c1, c2, 0, false, ~std::size_t{0});
}

BiPoly substitute_truncated(const BiPoly& p, const BiPoly& g1, const BiPoly& g2, unsigned order) {
    PowerCache c1(g1, order, true), c2(g2, order, true);
    return substitute_impl(p.truncated(order), c1, c2, order, true, ~std::size_t{0});
}

PlaneMap compose(const PlaneMap& f, const PlaneMap& g) {
    PowerCache c1(g.f1, 0, false), c2(g.f2, 0, false);
    const auto none = ~std::size_t{0};
    return {substitute_impl(f.f1, c1, c2, 0, false, none), substitute_impl(f.f2, c1, c2, 0, false, none),
            g.kind};
}

PlaneMap compose_truncated(const PlaneMap& f, const PlaneMap& g, unsigned order) {
    PowerCache c1(g.f1, order, true), c2(g.f2, order, true);
    const auto none = ~std::size_t{0};
    return {substitute_impl(f.f1.truncated(order), c1, c2, order, true, none),
            substitute_impl(f.f2.truncated(order), c1, c2, order, true, none), g.kind};
}

std::size_t term_budget_from_env() {
    const char* s = std::getenv("VALDYN_TERM_BUDGET");
    if (s == nullptr || *s == '\0') return kDefaultTermBudget;
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != std::string(s).size() || v == 0) throw std::invalid_argument("bad");
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ParseError(std::string("VALDYN_TERM_BUDGET must be a positive integer, got '") + s + "'", 0);
    }
}

std::vector<unsigned long> deg_sequence(const PlaneMap& F, unsigned n_max, std::size_t term_budget) {
    if (F.kind != MapKind::affine) throw PreconditionError("deg_sequence expects an affine map");
    if (!F.is_dominant()) throw PreconditionError("map is not dominant");
    std::vector<unsigned long> out;
    if (n_max == 0) return out;
    PowerCache c1(F.f1, 0, false), c2(F.f2, 0, false);
    PlaneMap h = F;
    out.push_back(h.degree());
    for (unsigned n = 2; n <= n_max; ++n) {
        h = PlaneMap{substitute_impl(h.f1, c1, c2, 0, false, term_budget),
                     substitute_impl(h.f2, c1, c2, 0, false, term_budget), MapKind::affine};
        out.push_back(h.degree());
    }
    return out;
}

BiPoly at_infinity_transform(const BiPoly& p) {
    if (p.is_zero()) throw PreconditionError("transform of the zero polynomial");
    unsigned d = p.total_degree();
    BiPoly out;
    for (const auto& [e, c] : p.terms()) out.add_term(d - e.first - e.second, e.second, c);
    return out;
}

// ---------------------------------------------------------------- division and gcd

std::pair<BiPoly, BiPoly> divmod_monic_y(const BiPoly& p, const BiPoly& u) {
    unsigned d = u.degree_y();
    if (u.coeff_y(d) != BiPoly::constant(1))
        throw PreconditionError("divisor " + u.to_string() + " is not monic in the second variable");
    BiPoly q, r = p;
    while (!r.is_zero()) {
        unsigned dr = r.degree_y();
        if (dr < d) break;
        BiPoly lead;
        for (const auto& [e, c] : r.terms())
            if (e.second == dr) lead.add_term(e.first, dr - d, c);
        q += lead;
        r -= lead * u;
    }
    return {q, r};
}

std::optional<BiPoly> exact_div(const BiPoly& a, const BiPoly& b) {
    if (b.is_zero()) throw ArithmeticError("division by the zero polynomial");
    const auto& [lb, lc] = *b.terms().rbegin();
    BiPoly q, r = a;
    while (!r.is_zero()) {
        const auto [lr, rc] = *r.terms().rbegin();
        if (lr.first < lb.first || lr.second < lb.second) return std::nullopt;
        BiPoly t = BiPoly::monomial(lr.first - lb.first, lr.second - lb.second, rc / lc);
        q += t;
        r -= t * b;
    }
    return q;
}

BiPoly normalize(const BiPoly& p) {
    if (p.is_zero()) return p;
    Integer l = 1, g = 0;
    for (const auto& [e, c] : p.terms()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
    for (const auto& [e, c] : p.terms()) {
        Integer v = c.get_num() * (l / c.get_den());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    }
    // leading term: largest y-degree, then largest x-degree
    Exponent lead{0, 0};
    Rational lc;
    bool first = true;
    for (const auto& [e, c] : p.terms()) {
        if (first || e.second > lead.second || (e.second == lead.second && e.first > lead.first)) {
            lead = e;
            lc = c;
            first = false;
        }
    }
    Rational scale = Rational(l) / Rational(g);
    if (lc < 0) scale = -scale;
    return scale * p;
}

BiPoly gcd(const BiPoly& a, const BiPoly& b) {
    using namespace detail;
    if (a.is_zero()) return normalize(b);
    if (b.is_zero()) return normalize(a);
    YPoly A = to_ypoly(a), B = to_ypoly(b);
    UPoly ca = y_content(A), cb = y_content(B);
    UPoly cg = u_gcd(ca, cb);
    A = y_divide_content(A, ca);
    B = y_divide_content(B, cb);
    if (A.size() < B.size()) std::swap(A, B);
    while (B.size() > 1) {
        YPoly R = y_prem(A, B);
        A = std::move(B);
        if (R.empty()) {
            B.clear();
            break;
        }
        B = y_divide_content(R, y_content(R));
    }
    YPoly g;
    if (B.size() == 1) {
        g = YPoly{UPoly{Rational(1)}};  // primitive parts are coprime
    } else {
        g = A;
    }
    YPoly out;
    for (const auto& u : g) out.push_back(u_mul(u, cg));
    return normalize(from_ypoly(out));
}

}  // namespace valdyn
