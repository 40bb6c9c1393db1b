/**
 * @file numbers.hpp
 * Exact rationals (GMP) and elements of real quadratic fields Q(sqrt D).
 */
#pragma once

#include <gmpxx.h>

#include <compare>
#include <optional>
#include <string>

namespace valdyn {

using Integer = mpz_class;
using Rational = mpq_class;

/// Canonical n/d; throws ArithmeticError when d == 0.
Rational make_rational(const Integer& n, const Integer& d = 1);
std::string to_string(const Integer& z);
std::string to_string(const Rational& q);
/// Parses "p" or "p/q" (optional leading sign).
Rational parse_rational(const std::string& s);
Integer floor_of(const Rational& q);
Integer ceil_of(const Rational& q);
Integer isqrt(const Integer& n);
bool is_perfect_square(const Integer& n);
/// Largest square-free divisor decomposition: n = s^2 * core, returns {s, core}.
std::pair<Integer, Integer> square_free_split(const Integer& n);

/**
 * a + b*sqrt(D), D square-free and non-negative. Rationals are stored with
 * b = 0 and D = 0, so they combine with any field.
 */
class QuadraticNumber {
public:
    QuadraticNumber() = default;
    QuadraticNumber(long v) : a_(v) {}  // NOLINT(google-explicit-constructor)
    QuadraticNumber(const Rational& a) : a_(a) { a_.canonicalize(); }  // NOLINT
    QuadraticNumber(const Rational& a, const Rational& b, const Integer& D);

    const Rational& a() const noexcept { return a_; }
    const Rational& b() const noexcept { return b_; }
    const Integer& D() const noexcept { return D_; }
    bool is_rational() const noexcept { return b_ == 0; }
    /// Throws PreconditionError when irrational.
    const Rational& as_rational() const;
    int sign() const;
    bool is_zero() const noexcept { return a_ == 0 && b_ == 0; }

    QuadraticNumber conjugate() const;
    /// Exact floor.
    Integer floor() const;
    double to_double() const;

    /// "1 + sqrt(22)", "-1/3 + 1/3*sqrt(22)", "3/2".
    std::string to_string() const;

    friend QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y);
    friend QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y);
    friend QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y);
    friend QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y);
    QuadraticNumber operator-() const;
    QuadraticNumber& operator+=(const QuadraticNumber& y) { return *this = *this + y; }
    QuadraticNumber& operator-=(const QuadraticNumber& y) { return *this = *this - y; }
    QuadraticNumber& operator*=(const QuadraticNumber& y) { return *this = *this * y; }
    QuadraticNumber& operator/=(const QuadraticNumber& y) { return *this = *this / y; }

    friend bool operator==(const QuadraticNumber& x, const QuadraticNumber& y) {
        return x.a_ == y.a_ && x.b_ == y.b_ && x.D_ == y.D_;
    }
    friend std::strong_ordering operator<=>(const QuadraticNumber& x, const QuadraticNumber& y);

private:
    Rational a_{0};
    Rational b_{0};
    Integer D_{0};
};

enum class QnOp { add, sub, mul, div };
QuadraticNumber qn_arith(const QuadraticNumber& x, const QuadraticNumber& y, QnOp op);
std::strong_ordering qn_compare(const QuadraticNumber& x, const QuadraticNumber& y);
/// Common field of two numbers (0 when both rational); FieldMismatchError otherwise.
Integer common_field(const QuadraticNumber& x, const QuadraticNumber& y);

/// Parses sums, products and quotients of rationals, sqrt(n) and
/// parenthesized subexpressions, e.g. "(-1 + sqrt(22))/3". Throws ParseError.
QuadraticNumber parse_quadratic(const std::string& text);

QuadraticNumber min(const QuadraticNumber& x, const QuadraticNumber& y);
QuadraticNumber max(const QuadraticNumber& x, const QuadraticNumber& y);
QuadraticNumber pow(const QuadraticNumber& x, unsigned n);

/**
 * An algebraic integer of degree <= 2 with its minimal polynomial
 * X^2 + pX + q (degree 2) or X - root (degree 1). Degree 2 values are the
 * larger real root.
 */
struct QuadraticInteger {
    QuadraticNumber value;
    int degree = 1;
    Integer p{0};
    Integer q{0};

    /// Minimal polynomial of an element of Q(sqrt D); throws PreconditionError
    /// if it is not an algebraic integer.
    static QuadraticInteger from_value(const QuadraticNumber& v);
    /// Integer root for degree 1.
    Integer root() const { return -p; }
    /// "X^2 - 2X - 21" or "X - 2".
    std::string minpoly_string() const;
    /// "1 + sqrt(22) (minpoly: X^2 - 2X - 21)".
    std::string human() const;
    /// Evaluates the minimal polynomial at value (always 0).
    QuadraticNumber minpoly_at_value() const;
    friend bool operator==(const QuadraticInteger&, const QuadraticInteger&) = default;
};

/// Spectral radius of [[a,b],[c,d]] with non-negative entries, ad != bc.
QuadraticInteger spectral_radius_2x2(long a, long b, long c, long d);
QuadraticInteger spectral_radius_2x2(const Integer& a, const Integer& b, const Integer& c,
                                     const Integer& d);

}  // namespace valdyn
