#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "printers.hpp"
#include "valdyn/dynaffine.hpp"
#include "valdyn/errors.hpp"

using namespace valdyn;
using QN = QuadraticNumber;

namespace {
PlaneMap A(const std::string& s) { return parse_map(s, MapKind::affine); }
BiPoly P(const std::string& s) { return parse_poly(s, kAffineVars); }
QN Q(const std::string& s) { return parse_quadratic(s); }

PlaneMap monomial_map(unsigned a, unsigned b, unsigned c, unsigned d) {
    return {BiPoly::monomial(a, b), BiPoly::monomial(c, d), MapKind::affine};
}

/// nu_t: nu(X) = -1, nu(Y) = 1, nu(XY - 1) = t.
Valuation nu_t(const Rational& t) {
    Skp s{Chart::infinity, {BiPoly::x(), BiPoly::y()}, {QN(1), QN(2)}};
    return Valuation::skp_based(skp_extend(s, 1, QN(t + 2)));
}

Valuation at_infinity(const QN& beta, CoordChange c = {}) {
    return Valuation::skp_based(Skp{Chart::infinity, {BiPoly::x(), BiPoly::y()}, {QN(1), beta}}, c);
}

// deg of the n-th iterate of a monomial map from powers of its exponent matrix
unsigned long monomial_degree(std::array<unsigned long, 4> m, unsigned n) {
    std::array<unsigned long, 4> p{1, 0, 0, 1};
    for (unsigned k = 0; k < n; ++k)
        p = {p[0] * m[0] + p[1] * m[2], p[0] * m[1] + p[1] * m[3], p[2] * m[0] + p[3] * m[2],
             p[2] * m[1] + p[3] * m[3]};
    return std::max(p[0] + p[1], p[2] + p[3]);
}
}  // namespace

TEST_CASE("d(F, nu)") {
    for (const char* f : {"(X^2, Y^2)", "(Y, X*Y)", "(X^2, (1+X)*Y^2)", "(X, Y^2*(X*Y-1))"}) {
        PlaneMap F = A(f);
        CHECK(d_of(F, Valuation::neg_deg()) == QN(static_cast<long>(F.degree())));
    }
    // nu(X) = -1, nu(Y) = 1
    Valuation nu = at_infinity(QN(2));
    CHECK(*nu.value(BiPoly::y()) == QN(1));
    CHECK(d_of(A("(X^2, Y^2)"), nu) == QN(2));
    for (int k : {1, 2, 4}) {
        Valuation v = nu_t(make_rational(k, 2));
        CHECK(*v.value(P("X")) == QN(-1));
        CHECK(*v.value(P("Y")) == QN(1));
        CHECK(*v.value(P("X*Y-1")) == QN(make_rational(k, 2)));
        CHECK(d_of(A("(X, Y^2*(X*Y-1))"), v) == QN(1));
    }
    // centered at a finite point: both components positive
    CHECK(d_of(A("(Y, X*Y)"), at_infinity(QN(3))) == QN(0));
    CHECK_THROWS_AS(affine_pushforward_eval(A("(Y, X*Y)"), at_infinity(QN(3))), PreconditionError);
}

TEST_CASE("affine pushforward") {
    std::mt19937 rng(11);
    PlaneMap sq = A("(X^2, Y^2)");
    auto e = affine_pushforward_eval(sq, Valuation::neg_deg());
    for (int i = 0; i < 20; ++i) {
        BiPoly p = testgen::random_poly(rng, 4, 4);
        CHECK(*e.value(p) == QN(-static_cast<long>(p.total_degree())));
    }
    CHECK(affine_pushforward_valuation(sq, Valuation::neg_deg()) == Valuation::neg_deg());

    auto fib = affine_pushforward_eval(A("(Y, X*Y)"), Valuation::neg_deg());
    CHECK(fib.d() == QN(2));
    CHECK(*fib.value(P("X")) == QN(make_rational(-1, 2)));
    CHECK(*fib.value(P("Y")) == QN(-1));
    CHECK(affine_pushforward_valuation(A("(Y, X*Y)"), Valuation::neg_deg()) ==
          Valuation::affine_monomial(QN(make_rational(-1, 2)), QN(-1)));

    // the image of nu_t is monomial with values -1 and 2 + t; its skewness drops by one
    PlaneMap F = A("(X, Y^2*(X*Y-1))");
    for (int k : {1, 2, 4}) {
        const Rational t = make_rational(k, 2);
        Valuation img = affine_pushforward_valuation(F, nu_t(t));
        CHECK(img == Valuation::affine_monomial(QN(-1), QN(t + 2)));
        CHECK(skewness(nu_t(t)) == QN(-t - 1));
        CHECK(skewness(img) == skewness(nu_t(t)) - QN(1));
    }
}

TEST_CASE("V1 certificate") {
    auto neg = v1_certificate(Valuation::neg_deg(), 6);
    CHECK(neg.status == V1Status::certified_in_v1);
    CHECK(neg.thinness == QN(-2));
    CHECK(neg.skewness == QN(1));

    auto half = v1_certificate(at_infinity(QN(make_rational(1, 2))), 6);
    CHECK(half.status == V1Status::certified_in_v1);
    CHECK(half.thinness == QN(make_rational(-3, 2)));

    // the pencil {X = c}: skewness 0, an end of V1
    auto pencil = v1_certificate(at_infinity(QN(1)), 6);
    CHECK(pencil.status == V1Status::certified_in_v1);
    CHECK(pencil.skewness == QN(0));
    CHECK(pencil.thinness == QN(-1));

    // nu(Y) = 1 > 0
    auto out = v1_certificate(at_infinity(QN(2)), 6);
    CHECK(out.status == V1Status::certified_not);
    CHECK(out.thinness == QN(0));
    CHECK(!out.values_ok);
    REQUIRE(out.positive_monomial);
    CHECK(*out.positive_monomial == P("Y"));

    CHECK(v1_certificate(nu_t(1), 4).status == V1Status::certified_not);
}

TEST_CASE("skewness and thinness stay in range on certified valuations") {
    std::mt19937 rng(5);
    for (int i = 0; i < 40; ++i) {
        Valuation nu = Valuation::skp_based(testgen::random_one_place_skp(rng, 3));
        auto c = v1_certificate(nu, 5);
        REQUIRE(c.status == V1Status::certified_in_v1);
        CHECK(c.skewness >= QN(0));
        CHECK(c.skewness <= QN(1));
        CHECK(c.thinness >= QN(-2));
        CHECK(c.thinness <= QN(0));
    }
}

TEST_CASE("V1 is invariant") {
    std::mt19937 rng(21);
    std::uniform_int_distribution<unsigned> e(0, 3);
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
        PlaneMap F = monomial_map(e(rng), e(rng), e(rng), e(rng));
        if (!F.is_dominant()) continue;
        Valuation nu = Valuation::skp_based(testgen::random_one_place_skp(rng, 2));
        Valuation img = affine_pushforward_valuation(F, nu);
        if (img.truncated()) continue;
        auto c = v1_certificate(img, 5);
        CHECK(c.status != V1Status::certified_not);
        CHECK(c.thinness <= QN(0));
        CHECK(c.skewness >= QN(0));
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("affine composition law") {
    for (const char* f : {"(Y, X*Y)", "(X^2, (1+X)*Y^2)", "(X^2, Y^2+X)", "(Y^2+X^2*Y, X)", "(X*Y, X^2*Y^3)"}) {
        PlaneMap F = A(f);
        auto degs = deg_sequence(F, 5);
        Valuation nu = Valuation::neg_deg();
        QN prod(1);
        for (unsigned n = 1; n <= 5; ++n) {
            prod *= d_of(F, nu);
            CHECK(prod == QN(static_cast<long>(degs[n - 1])));
            nu = affine_pushforward_valuation(F, nu);
        }
    }
}

TEST_CASE("d(F, .) is non-increasing along segments") {
    std::mt19937 rng(8);
    PlaneMap maps[] = {A("(Y, X*Y)"), A("(X^2, (1+X)*Y^2)"), A("(X, Y^2*(X*Y-1))"), A("(Y^2+X^2*Y, X+Y)")};
    for (const auto& F : maps) {
        // depth one from -deg towards a point at infinity, then along a second key
        for (const CoordChange& c : {CoordChange::identity(), CoordChange::swap(), CoordChange::shear(1)}) {
            QN prev = d_of(F, Valuation::neg_deg());
            for (int k = 1; k <= 12; ++k) {
                QN d = d_of(F, at_infinity(QN(make_rational(k, 4)), c));
                CHECK(d <= prev);
                prev = d;
            }
        }
        Skp s{Chart::infinity, {BiPoly::x(), BiPoly::y()}, {QN(1), QN(make_rational(1, 2))}};
        QN prev = d_of(F, Valuation::skp_based(s));
        for (int k = 1; k <= 8; ++k) {
            QN d = d_of(F, Valuation::skp_based(skp_extend(s, 3, QN(1 + make_rational(k, 4)))));
            CHECK(d <= prev);
            prev = d;
        }
    }
}

TEST_CASE("affine eigenvaluations") {
    SUBCASE("(X^2, Y^2): -deg is fixed") {
        auto r = affine_eigenvaluation_search(A("(X^2, Y^2)"));
        CHECK(r.eigen == Valuation::neg_deg());
        CHECK(r.rate.value == QN(2));
        CHECK(r.type == EigenType::divisorial);
        REQUIRE(r.normal_form);
        CHECK(*r.normal_form == NormalForm::type_i);
        CHECK(!r.skew_product);
        CHECK(r.verification.passed);
    }
    SUBCASE("(Y, XY): golden mean") {
        auto r = affine_eigenvaluation_search(A("(Y, X*Y)"));
        CHECK(r.rate.value == Q("(1 + sqrt(5))/2"));
        CHECK(r.rate.minpoly_string() == "X^2 - X - 1");
        CHECK(r.type == EigenType::irrational);
        REQUIRE(r.normal_form);
        CHECK(*r.normal_form == NormalForm::type_ii);
        REQUIRE(r.matrix);
        CHECK(*r.matrix == std::array<Rational, 4>{1, 1, 1, 0});
        CHECK(spectral_radius_2x2(1, 1, 1, 0) == r.rate);
        CHECK(skewness(r.eigen) == Q("(sqrt(5) - 1)/2"));
        CHECK(r.verification.passed);
        CHECK(r.certificate.status == V1Status::certified_in_v1);
    }
    SUBCASE("(X^2, (1+X)Y^2): skew product") {
        auto r = affine_eigenvaluation_search(A("(X^2, (1+X)*Y^2)"));
        CHECK(r.skew_product);
        CHECK(r.dichotomy == Dichotomy::skew_product);
        CHECK(!r.normal_form);
        CHECK(r.rate.value == QN(2));
        CHECK(skewness(r.eigen) == QN(0));
        REQUIRE(r.skew_coords);
        CHECK(r.skew_coords->u == P("X"));
    }
    SUBCASE("(X, Y^2(XY-1)): a skew product with bounded degree ratio") {
        auto r = affine_eigenvaluation_search(A("(X, Y^2*(X*Y-1))"));
        CHECK(r.skew_product);
        CHECK(r.rate.value == QN(3));
        CHECK(r.dichotomy == Dichotomy::bounded_ratio);
    }
    SUBCASE("a divisorial eigen off -deg") {
        // exponent matrix ((3, 0), (2, 2)): eigenvalue 3 with nu(Y) = 2 nu(X)
        auto r = affine_eigenvaluation_search(A("(X^3, X^2*Y^2)"));
        CHECK(r.type == EigenType::divisorial);
        CHECK(!r.skew_product);
        CHECK(r.rate.value == QN(3));
        CHECK(*r.eigen.value(P("X")) == QN(make_rational(-1, 2)));
        CHECK(*r.eigen.value(P("Y")) == QN(-1));
        CHECK(skewness(r.eigen) == QN(make_rational(1, 2)));
        CHECK(r.verification.passed);
    }
    SUBCASE("an infinitely singular eigen") {
        // relative fixed points 1/2, 5/8, 21/32, ... tend to 2/3
        auto r = affine_eigenvaluation_search(A("((X+Y)^2, (X+Y)^2+X)"), 5);
        CHECK(r.type == EigenType::infinitely_singular);
        REQUIRE(r.normal_form);
        CHECK(*r.normal_form == NormalForm::type_iii);
        CHECK(r.rate.value == QN(2));
        REQUIRE(r.walk.size() == 5);
        CHECK(r.walk.front().chart == "(X, Y-X)");
        const Rational fps[] = {make_rational(1, 2), make_rational(5, 8), make_rational(21, 32),
                                make_rational(85, 128), make_rational(341, 512)};
        for (std::size_t i = 0; i < 5; ++i) CHECK(*r.walk[i].fixed_point == QN(fps[i]));
        REQUIRE(r.bracket);
        CHECK(r.bracket->first == QN(fps[4]));
        CHECK(r.verification.passed);
    }
}

TEST_CASE("affine monomial maps: rate is the spectral radius") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<unsigned> e(0, 4);
    int done = 0;
    while (done < 25) {
        const unsigned a = e(rng), b = e(rng), c = e(rng), d = e(rng);
        if (a * d == b * c || a + b == 0 || c + d == 0) continue;
        PlaneMap F = monomial_map(a, b, c, d);
        auto r = affine_eigenvaluation_search(F);
        CAPTURE(F.to_string());
        CHECK(r.rate == spectral_radius_2x2(a, b, c, d));
        CHECK(r.verification.passed);
        auto dd = skew_dichotomy(F, r, 5);
        for (unsigned n = 1; n <= 5; ++n) CHECK(dd.degrees[n - 1] == monomial_degree({a, b, c, d}, n));
        ++done;
    }
}

TEST_CASE("degree growth dichotomy") {
    SUBCASE("(X^2, Y^2 + X)") {
        PlaneMap F = A("(X^2, Y^2+X)");
        auto dd = skew_dichotomy(F, affine_eigenvaluation_search(F), 6);
        CHECK(dd.branch == Dichotomy::bounded_ratio);
        CHECK(dd.degrees == std::vector<unsigned long>{2, 4, 8, 16, 32, 64});
        CHECK(dd.observed_D == QN(1));
    }
    SUBCASE("(Y, XY): Fibonacci") {
        PlaneMap F = A("(Y, X*Y)");
        auto dd = skew_dichotomy(F, affine_eigenvaluation_search(F), 8);
        CHECK(dd.branch == Dichotomy::bounded_ratio);
        CHECK(dd.degrees == std::vector<unsigned long>{2, 3, 5, 8, 13, 21, 34, 55});
        CHECK(dd.observed_D <= QN(2));
        REQUIRE(dd.D_bound);
        CHECK(*dd.D_bound == Q("(1 + sqrt(5))/2"));
    }
    SUBCASE("(X^2, (1+X)Y^2)") {
        PlaneMap F = A("(X^2, (1+X)*Y^2)");
        auto dd = skew_dichotomy(F, affine_eigenvaluation_search(F), 6);
        CHECK(dd.branch == Dichotomy::skew_product);
        for (unsigned n = 1; n <= 6; ++n) CHECK(dd.degrees[n - 1] == (1UL << (n - 1)) * (n + 2));
        for (std::size_t i = 1; i < dd.ratios.size(); ++i) CHECK(dd.ratios[i] > dd.ratios[i - 1]);
        CHECK(dd.single_variable);
        CHECK(dd.deg_p == 2);
        CHECK(dd.deg_y_q == 2);
        CHECK(dd.drop);
        REQUIRE(dd.x0);
        CHECK(*dd.x0 == -1);
    }
    SUBCASE("(X, Y^2(XY-1))") {
        PlaneMap F = A("(X, Y^2*(X*Y-1))");
        auto dd = skew_dichotomy(F, affine_eigenvaluation_search(F), 6);
        CHECK(dd.branch == Dichotomy::bounded_ratio);
        // deg F^n = (3^(n+1) - 1)/2
        unsigned long p3 = 9;
        for (unsigned n = 1; n <= 6; ++n, p3 *= 3) CHECK(dd.degrees[n - 1] == (p3 - 1) / 2);
        CHECK(dd.observed_D < QN(make_rational(3, 2)));
    }
    SUBCASE("a wrong rate is falsified") {
        PlaneMap F = A("(Y, X*Y)");
        AffineReport r = affine_eigenvaluation_search(F);
        r.rate = QuadraticInteger::from_value(QN(2));
        CHECK_THROWS_AS(skew_dichotomy(F, r, 4), FalsificationError);
    }
}

TEST_CASE("affine Jacobian identity") {
    SUBCASE("worked examples") {
        auto j = affine_jacobian_check(A("(X^2, Y^2)"), Valuation::neg_deg());
        CHECK(j.holds);
        CHECK(j.lhs == QN(-4));
        for (unsigned a = 2; a <= 5; ++a) {
            auto ja = affine_jacobian_check(monomial_map(a, 0, 0, a), Valuation::neg_deg());
            CHECK(ja.holds);
            CHECK(ja.rhs == QN(-static_cast<long>(2 * a - 2) - 2));
        }
        auto jf = affine_jacobian_check(A("(Y, X*Y)"), Valuation::neg_deg());
        CHECK(jf.holds);
        CHECK(jf.rhs == QN(-3));
        CHECK(thinness(at_infinity(QN(make_rational(1, 2)))) == QN(make_rational(-3, 2)));
    }
    SUBCASE("random monomial maps and valuations") {
        std::mt19937 rng(17);
        std::uniform_int_distribution<unsigned> e(0, 4);
        int done = 0;
        while (done < 50) {
            const unsigned a = e(rng), b = e(rng), c = e(rng), d = e(rng);
            if (a * d == b * c) continue;
            const QN beta(testgen::small_fraction(rng, 4, 5));
            if (beta > QN(1)) continue;
            Valuation nu = at_infinity(beta, std::uniform_int_distribution<int>(0, 1)(rng) ? CoordChange::swap()
                                                                                           : CoordChange::identity());
            auto j = affine_jacobian_check(monomial_map(a, b, c, d), nu);
            CAPTURE(monomial_map(a, b, c, d).to_string());
            CAPTURE(nu.to_string());
            REQUIRE(!j.skipped);
            CHECK(j.holds);
            ++done;
        }
    }
    SUBCASE("general maps along the walk") {
        for (const char* f : {"(Y^2+X^2*Y, X)", "(X, Y^2*(X*Y-1))", "(X^3, X^2*Y^2)", "(X^2*Y+Y^3, X^3)"}) {
            PlaneMap F = A(f);
            auto r = affine_eigenvaluation_search(F);
            auto j = affine_jacobian_check(F, r.eigen);
            const std::string fs = f;
            CAPTURE(fs);
            REQUIRE(!j.skipped);
            CHECK(j.holds);
        }
    }
}

TEST_CASE("values of polynomials decompose over the points at infinity") {
    auto x = act_pol_check(Valuation::neg_deg(), {{P("X"), 1}});
    CHECK(x.holds);
    CHECK(x.value == QN(-1));
    auto xy = act_pol_check(Valuation::neg_deg(), {{P("X"), 1}, {P("Y"), 1}});
    CHECK(xy.holds);
    CHECK(xy.value == QN(-2));
    CHECK(xy.sum_m == 2);

    for (int k : {1, 2, 4}) {
        const Rational t = make_rational(k, 2);
        auto h = act_pol_check(nu_t(t), {{P("X*Y-1"), 1}});
        CHECK(h.holds);
        CHECK(h.value == QN(t));
        REQUIRE(h.factors.size() == 1);
        CHECK(h.factors[0].m_center == 1);
        CHECK(h.factors[0].m_top == 1);
        CHECK(h.factors[0].meet_skewness == QN(-t - 1));
    }

    std::mt19937 rng(2);
    for (int i = 0; i < 30; ++i) {
        Valuation nu = Valuation::skp_based(testgen::random_one_place_skp(rng, 3),
                                            i % 2 ? CoordChange::swap() : CoordChange::shear(2));
        std::vector<std::pair<BiPoly, unsigned>> fs;
        for (int k = 0; k < 2; ++k) {
            BiPoly p = testgen::random_poly(rng, 3, 3);
            if (p.total_degree() > 0) fs.push_back({p, 1U + static_cast<unsigned>(k)});
        }
        if (fs.empty()) continue;
        auto c = act_pol_check(nu, fs);
        CHECK(c.holds);
        CHECK(c.sum_m == c.degree);
    }
    CHECK_THROWS_AS(act_pol_check(Valuation::neg_deg(), {{P("3"), 1}}), PreconditionError);
}
