#include "valdyn/numbers.hpp"

#include <cctype>
#include <cmath>

#include "valdyn/errors.hpp"

namespace valdyn {

Rational make_rational(const Integer& n, const Integer& d) {
    if (d == 0) throw ArithmeticError("zero denominator");
    Rational r(n, d);
    r.canonicalize();
    return r;
}

std::string to_string(const Integer& z) { return z.get_str(); }

std::string to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(const std::string& s) {
    std::size_t i = 0;
    auto digits = [&](Integer& out) {
        std::size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (start == i) throw ParseError("expected digits in rational '" + s + "'", start);
        out = Integer(s.substr(start, i - start));
    };
    bool neg = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';
    Integer n, d = 1;
    digits(n);
    if (i < s.size() && s[i] == '/') {
        ++i;
        digits(d);
        if (d == 0) throw ParseError("zero denominator", i - 1);
    }
    if (i != s.size()) throw ParseError("trailing characters in rational '" + s + "'", i);
    return make_rational(neg ? Integer(-n) : n, d);
}

Integer floor_of(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

Integer ceil_of(const Rational& q) {
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

Integer isqrt(const Integer& n) {
    if (n < 0) throw ArithmeticError("square root of negative integer");
    Integer r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

bool is_perfect_square(const Integer& n) {
    return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

std::pair<Integer, Integer> square_free_split(const Integer& n) {
    if (n < 0) throw ArithmeticError("square-free split of negative integer");
    Integer s = 1, core = n;
    if (core == 0) return {0, 0};
    for (Integer p = 2; p * p <= core; ++p) {
        Integer p2 = p * p;
        while (mpz_divisible_p(core.get_mpz_t(), p2.get_mpz_t())) {
            core /= p2;
            s *= p;
        }
    }
    return {s, core};
}

QuadraticNumber::QuadraticNumber(const Rational& a, const Rational& b, const Integer& D)
    : a_(a), b_(b), D_(D) {
    if (D_ < 0) throw PreconditionError("negative radicand " + D_.get_str());
    if (b_ == 0 || D_ == 0) {
        b_ = 0;
        D_ = 0;
        return;
    }
    auto [s, core] = square_free_split(D_);
    b_ *= s;
    D_ = core;
    if (D_ == 1) {
        a_ += b_;
        b_ = 0;
        D_ = 0;
    }
}

const Rational& QuadraticNumber::as_rational() const {
    if (!is_rational()) throw PreconditionError("expected a rational number, got " + to_string());
    return a_;
}

Integer common_field(const QuadraticNumber& x, const QuadraticNumber& y) {
    if (x.D() == 0) return y.D();
    if (y.D() == 0 || x.D() == y.D()) return x.D();
    throw FieldMismatchError("fields Q(sqrt " + x.D().get_str() + ") and Q(sqrt " +
                             y.D().get_str() + ") differ");
}

QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y) {
    Integer D = common_field(x, y);
    return {x.a_ + y.a_, x.b_ + y.b_, D};
}

QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y) {
    Integer D = common_field(x, y);
    return {x.a_ - y.a_, x.b_ - y.b_, D};
}

QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y) {
    Integer D = common_field(x, y);
    Rational Dq(D);
    return {x.a_ * y.a_ + x.b_ * y.b_ * Dq, x.a_ * y.b_ + x.b_ * y.a_, D};
}

QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y) {
    Integer D = common_field(x, y);
    if (y.is_zero()) throw ArithmeticError("division by zero");
    Rational Dq(D);
    Rational norm = y.a_ * y.a_ - y.b_ * y.b_ * Dq;
    // x * conj(y) / N(y)
    return {(x.a_ * y.a_ - x.b_ * y.b_ * Dq) / norm, (x.b_ * y.a_ - x.a_ * y.b_) / norm, D};
}

QuadraticNumber QuadraticNumber::operator-() const { return {-a_, -b_, D_}; }

QuadraticNumber QuadraticNumber::conjugate() const { return {a_, -b_, D_}; }

int QuadraticNumber::sign() const {
    int sa = sgn(a_), sb = sgn(b_);
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // opposite signs: compare a^2 with b^2 D
    Rational lhs = a_ * a_, rhs = b_ * b_ * Rational(D_);
    int c = cmp(lhs, rhs);
    return c > 0 ? sa : (c < 0 ? sb : 0);
}

std::strong_ordering operator<=>(const QuadraticNumber& x, const QuadraticNumber& y) {
    int s = (x - y).sign();
    if (s < 0) return std::strong_ordering::less;
    if (s > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::strong_ordering qn_compare(const QuadraticNumber& x, const QuadraticNumber& y) {
    return x <=> y;
}

QuadraticNumber qn_arith(const QuadraticNumber& x, const QuadraticNumber& y, QnOp op) {
    switch (op) {
        case QnOp::add: return x + y;
        case QnOp::sub: return x - y;
        case QnOp::mul: return x * y;
        case QnOp::div: return x / y;
    }
    throw InternalError("unknown operation");
}

Integer QuadraticNumber::floor() const {
    if (is_rational()) return floor_of(a_);
    // b*sqrt(D) = sign(b) * sqrt(b^2 D); bracket it between consecutive integers
    Rational s2 = b_ * b_ * Rational(D_);
    Integer lo = isqrt(floor_of(s2));  // lo <= sqrt(s2) < lo + 1
    Integer guess = floor_of(a_ + (b_ > 0 ? Rational(lo) : Rational(-lo - 1)));
    // adjust by exact comparison
    while (QuadraticNumber(Rational(guess)) > *this) --guess;
    while (QuadraticNumber(Rational(guess + 1)) <= *this) ++guess;
    return guess;
}

double QuadraticNumber::to_double() const {
    return a_.get_d() + b_.get_d() * std::sqrt(D_.get_d());
}

std::string QuadraticNumber::to_string() const {
    if (is_rational()) return valdyn::to_string(a_);
    std::string out;
    Rational mag = abs(b_);
    std::string radical = "sqrt(" + D_.get_str() + ")";
    std::string bpart = mag == 1 ? radical : valdyn::to_string(mag) + "*" + radical;
    if (a_ == 0) return (b_ < 0 ? "-" : "") + bpart;
    return valdyn::to_string(a_) + (b_ < 0 ? " - " : " + ") + bpart;
}

namespace {

class QnParser {
public:
    explicit QnParser(const std::string& t) : s_(t) {}

    QuadraticNumber run() {
        QuadraticNumber v = expr();
        skip();
        if (i_ != s_.size()) fail("unexpected character");
        return v;
    }

private:
    const std::string& s_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " in number '" + s_ + "'", i_);
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    QuadraticNumber expr() {
        QuadraticNumber v = eat('-') ? -term() : (eat('+'), term());
        for (;;) {
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }
    QuadraticNumber term() {
        QuadraticNumber v = factor();
        for (;;) {
            if (eat('*')) {
                v *= factor();
            } else if (eat('/')) {
                QuadraticNumber d = factor();
                if (d.is_zero()) fail("division by zero");
                v /= d;
            } else {
                return v;
            }
        }
    }
    QuadraticNumber factor() {
        if (eat('(')) {
            QuadraticNumber v = expr();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        if (eat('-')) return -factor();
        skip();
        if (s_.compare(i_, 4, "sqrt") == 0) {
            i_ += 4;
            if (!eat('(')) fail("expected '(' after sqrt");
            skip();
            std::size_t start = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            if (start == i_) fail("expected a non-negative integer under sqrt");
            Integer n(s_.substr(start, i_ - start));
            if (!eat(')')) fail("expected ')'");
            auto [sq, core] = square_free_split(n);
            if (core == 1 || n == 0) return QuadraticNumber(Rational(sq));
            return QuadraticNumber(0, Rational(sq), core);
        }
        std::size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (start == i_) fail("expected a number");
        return QuadraticNumber(Rational(Integer(s_.substr(start, i_ - start))));
    }
};

}  // namespace

QuadraticNumber parse_quadratic(const std::string& text) { return QnParser(text).run(); }

QuadraticNumber min(const QuadraticNumber& x, const QuadraticNumber& y) { return y < x ? y : x; }
QuadraticNumber max(const QuadraticNumber& x, const QuadraticNumber& y) { return x < y ? y : x; }

QuadraticNumber pow(const QuadraticNumber& x, unsigned n) {
    QuadraticNumber r(1), base = x;
    while (n) {
        if (n & 1U) r *= base;
        base *= base;
        n >>= 1U;
    }
    return r;
}

QuadraticInteger QuadraticInteger::from_value(const QuadraticNumber& v) {
    QuadraticInteger out;
    out.value = v;
    if (v.is_rational()) {
        if (v.a().get_den() != 1)
            throw PreconditionError(v.to_string() + " is not an algebraic integer");
        out.degree = 1;
        out.p = -v.a().get_num();
        out.q = 0;
        return out;
    }
    Rational p = -2 * v.a();
    Rational q = v.a() * v.a() - v.b() * v.b() * Rational(v.D());
    if (p.get_den() != 1 || q.get_den() != 1)
        throw PreconditionError(v.to_string() + " is not an algebraic integer");
    out.degree = 2;
    out.p = p.get_num();
    out.q = q.get_num();
    return out;
}

namespace {
std::string signed_term(const Integer& c, const std::string& mono, bool first) {
    std::string s;
    if (first) {
        if (c < 0) s += "-";
    } else {
        s += c < 0 ? " - " : " + ";
    }
    Integer m = abs(c);
    if (mono.empty()) return s + m.get_str();
    if (m != 1) s += m.get_str();
    return s + mono;
}
}  // namespace

std::string QuadraticInteger::minpoly_string() const {
    if (degree == 1) {
        if (p == 0) return "X";
        return "X" + signed_term(p, "", false);
    }
    std::string s = "X^2";
    if (p != 0) s += signed_term(p, "X", false);
    if (q != 0) s += signed_term(q, "", false);
    return s;
}

std::string QuadraticInteger::human() const {
    return value.to_string() + " (minpoly: " + minpoly_string() + ")";
}

QuadraticNumber QuadraticInteger::minpoly_at_value() const {
    if (degree == 1) return value + QuadraticNumber(Rational(p));
    return value * value + QuadraticNumber(Rational(p)) * value + QuadraticNumber(Rational(q));
}

QuadraticInteger spectral_radius_2x2(const Integer& a, const Integer& b, const Integer& c,
                                     const Integer& d) {
    if (a < 0 || b < 0 || c < 0 || d < 0)
        throw PreconditionError("spectral_radius_2x2 expects non-negative entries");
    if (a * d == b * c) throw PreconditionError("degenerate matrix: ad = bc");
    Integer tr = a + d, det = a * d - b * c;
    Integer disc = tr * tr - 4 * det;  // = (a-d)^2 + 4bc >= 0
    QuadraticInteger out;
    if (is_perfect_square(disc)) {
        Integer r = (tr + isqrt(disc)) / 2;
        out.value = QuadraticNumber(Rational(r));
        out.degree = 1;
        out.p = -r;
        return out;
    }
    out.value = QuadraticNumber(make_rational(tr, 2), make_rational(1, 2), disc);
    out.degree = 2;
    out.p = -tr;
    out.q = det;
    return out;
}

QuadraticInteger spectral_radius_2x2(long a, long b, long c, long d) {
    return spectral_radius_2x2(Integer(a), Integer(b), Integer(c), Integer(d));
}

}  // namespace valdyn
