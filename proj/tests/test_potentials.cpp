#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "printers.hpp"
#include "valdyn/errors.hpp"
#include "valdyn/potentials.hpp"

using namespace valdyn;
using QN = QuadraticNumber;

namespace {
BiPoly P(const std::string& s) { return parse_poly(s); }
QN Q(const std::string& s) { return parse_quadratic(s); }
Skp monomial_prefix() { return Skp{Chart::local, {BiPoly::x(), BiPoly::y()}, {QN(1)}}; }
Line L(long c, long s) { return {Rational(c), Rational(s)}; }
}  // namespace

TEST_CASE("potentials on the monomial segment") {
    auto f = potential_on_segment(monomial_prefix(), P("x^2*y^3+x^7"), 1, Q("5/3"));
    REQUIRE(f.pieces().size() == 1);
    CHECK(f.pieces()[0] == L(2, 3));
    auto g = potential_on_segment(monomial_prefix(), P("x^7"), 1, QN(2));
    REQUIRE(g.pieces().size() == 1);
    CHECK(g.pieces()[0] == L(7, 0));
    auto h = potential_on_segment(monomial_prefix(), P("x^2*y^3+x^7"), 1, QN(3));
    REQUIRE(h.breakpoints().size() == 1);
    CHECK(h.breakpoints()[0] == Q("5/3"));
    CHECK(h.pieces()[0] == L(2, 3));
    CHECK(h.pieces()[1] == L(7, 0));
    auto inf = potential_on_segment(monomial_prefix(), P("x^2*y^3+x^7"), 1, std::nullopt);
    CHECK(inf.breakpoints() == h.breakpoints());
    CHECK(inf.eval(QN(100)) == 7);
}

TEST_CASE("potentials agree with evaluation at sample points") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> num(0, 40);
    for (int trial = 0; trial < 40; ++trial) {
        Skp s = testgen::random_local_skp(rng, 3);
        Skp prefix = s;
        prefix.values.pop_back();
        QN lo = s.depth() == 1 ? QN(1) : s.values.back() - QN(make_rational(1, 8));
        if (s.depth() >= 2) {
            std::vector<QN> pre(prefix.values.begin(), prefix.values.end() - 1);
            lo = prefix.values.back() * QN(Rational(Integer(key_relation(pre, prefix.values.back())->n)));
        }
        QN hi = lo + QN(5);
        BiPoly p = testgen::random_poly(rng, 5, 5);
        if (trial % 2) p = p * s.keys.back() + testgen::random_poly(rng, 4, 2);
        auto f = potential_on_segment(prefix, p, lo, hi);
        CHECK(f.is_concave());
        CHECK(f.has_integer_slopes());
        for (const auto& l : f.pieces()) CHECK(abs(l.slope) <= p.total_degree());
        for (int k = 0; k < 25; ++k) {
            QN t = lo + QN(Rational(num(rng), 8));
            if (t == lo && s.depth() >= 2) continue;  // boundary value is not a valid SKP
            Skp at = prefix;
            at.values.push_back(t);
            CHECK(f.eval(t) == *skp_eval(at, p));
        }
    }
}

TEST_CASE("potential range checks") {
    Skp prefix{Chart::local, {BiPoly::x(), BiPoly::y(), P("y^2-x^3")}, {QN(1), Q("3/2")}};
    CHECK_NOTHROW(potential_on_segment(prefix, P("y"), QN(3), QN(5)));
    CHECK_THROWS_AS(potential_on_segment(prefix, P("y"), Q("5/2"), QN(5)), PreconditionError);
    Skp bad{Chart::local, {BiPoly::x(), BiPoly::y(), P("y^2-x^2")}, {QN(1), Q("3/2")}};
    CHECK_THROWS_AS(potential_on_segment(bad, P("y"), QN(3), QN(5)), SkpAxiomError);
}

TEST_CASE("piecewise-linear algebra") {
    auto a = PiecewiseLinear::line(L(2, 3), 1, QN(3));
    auto b = PiecewiseLinear::line(L(7, 0), 1, QN(3));
    auto m = pl_min(a, b);
    REQUIRE(m.breakpoints().size() == 1);
    CHECK(m.breakpoints()[0] == Q("5/3"));
    auto s = pl_sum(PiecewiseLinear::line(L(0, 1), 0, QN(1)), PiecewiseLinear::line(L(1, -1), 0, QN(1)));
    CHECK(s.pieces().size() == 1);
    CHECK(s.pieces()[0] == L(1, 0));
    CHECK(pl_min(m, m) == m);
    auto sc = pl_scale(m, make_rational(1, 2));
    CHECK(sc.eval(QN(3)) == Q("7/2"));
    CHECK_FALSE(pl_scale(PiecewiseLinear::line(L(0, 1), 0, QN(1)), make_rational(1, 2)).has_integer_slopes());
    CHECK_THROWS_AS(pl_min(a, PiecewiseLinear::line(L(7, 0), 1, QN(2))), PreconditionError);
    CHECK_THROWS_AS(pl_scale(a, -1), PreconditionError);

    // random envelopes: min and sum are pointwise
    std::mt19937 rng(8);
    std::uniform_int_distribution<int> c(-6, 6), sl(-3, 3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Line> l1, l2;
        for (int k = 0; k < 4; ++k) l1.push_back(L(c(rng), sl(rng)));
        for (int k = 0; k < 3; ++k) l2.push_back(L(c(rng), sl(rng)));
        auto f = PiecewiseLinear::lower_envelope(l1, QN(-2), QN(4));
        auto g = PiecewiseLinear::lower_envelope(l2, QN(-2), QN(4));
        auto mn = pl_min(f, g), sm = pl_sum(f, g);
        for (int k = 0; k <= 24; ++k) {
            QN t = QN(-2) + QN(make_rational(k, 4));
            QN direct1 = l1[0].at(t), direct2 = l2[0].at(t);
            for (const auto& l : l1) direct1 = min(direct1, l.at(t));
            for (const auto& l : l2) direct2 = min(direct2, l.at(t));
            CHECK(f.eval(t) == direct1);
            CHECK(mn.eval(t) == min(direct1, direct2));
            CHECK(sm.eval(t) == direct1 + direct2);
        }
        CHECK(f.is_concave());
        CHECK(sm.is_concave());
    }
}

TEST_CASE("reparametrization and restriction") {
    auto f = potential_on_segment(monomial_prefix(), P("x^2*y^3+x^7"), 1, QN(3));
    auto g = f.reparam(2);
    CHECK(g.lo() == Q("1/2"));
    CHECK(g.eval(QN(1)) == f.eval(QN(2)));
    auto r = f.restrict(Q("5/3"), QN(2));
    CHECK(r.pieces().size() == 1);
    CHECK(r.pieces()[0] == L(7, 0));
    CHECK_THROWS_AS(f.restrict(QN(0), QN(2)), PreconditionError);
    auto csv = f.to_csv(3);
    CHECK(csv.rfind("t,value\n1,5\n", 0) == 0);
}

TEST_CASE("induced Moebius maps") {
    auto num = PiecewiseLinear::line(L(7, 0), 1, Q("3/2"));
    auto den = PiecewiseLinear::line(L(2, 3), 1, Q("3/2"));
    auto pm = induced_moebius(num, den, 1);
    REQUIRE(pm.pieces().size() == 1);
    CHECK(pm.pieces()[0] == Moebius{7, 0, 2, 3});
    CHECK(pm.nonnegative_certificate());
    auto id = induced_moebius(PiecewiseLinear::line(L(0, 1), 1, QN(2)), PiecewiseLinear::line(L(1, 0), 1, QN(2)), 1);
    CHECK(id.pieces()[0].is_identity());
    auto lin = induced_moebius(PiecewiseLinear::line(L(1, 2), 1, QN(2)), PiecewiseLinear::line(L(2, 0), 1, QN(2)), 1);
    CHECK(lin.pieces()[0] == Moebius{1, 2, 2, 0});
    CHECK(lin.eval(QN(1)) == Q("3/2"));
    CHECK_THROWS_AS(induced_moebius(num, PiecewiseLinear::line(L(-2, 1), 1, Q("3/2")), 1), ArithmeticError);
    CHECK_THROWS_AS(induced_moebius(num, PiecewiseLinear::line(L(1, 0), 1, Q("3/2")), 1), PreconditionError);
    CHECK_NOTHROW(induced_moebius(num, PiecewiseLinear::line(L(1, 0), 1, Q("3/2")), 1, true));
    CHECK_FALSE(Moebius{-1, 2, 1, 1}.has_nonnegative_form());
    CHECK(Moebius{-1, -2, 0, -1}.has_nonnegative_form());
    CHECK(Moebius{make_rational(1, 2), 0, 3, 0}.normalized() == Moebius{1, 0, 6, 0});
}

TEST_CASE("Moebius fixed points") {
    PiecewiseMoebius pm(1, Q("3/2"), {}, {Moebius{7, 0, 2, 3}});
    auto fps = moebius_fixed_points(pm);
    REQUIRE(fps.size() == 1);
    CHECK(fps[0].t == Q("(sqrt(22)-1)/3"));
    CHECK(fps[0].attracting);
    CHECK(QN(3) * fps[0].t + QN(2) == Q("1+sqrt(22)"));

    PiecewiseMoebius idm(1, QN(2), {}, {Moebius{0, 1, 1, 0}});
    auto fi = moebius_fixed_points(idm);
    REQUIRE(fi.size() == 1);
    CHECK(fi[0].everywhere);

    PiecewiseMoebius gold(1, QN(2), {}, {Moebius{1, 1, 0, 1}});
    auto fg = moebius_fixed_points(gold);
    REQUIRE(fg.size() == 1);
    CHECK(fg[0].t == Q("(1+sqrt(5))/2"));
    CHECK(fg[0].attracting);

    // t -> 2/t is an involution: fixed point sqrt(2), not attracting
    PiecewiseMoebius inv(1, QN(2), {}, {Moebius{2, 0, 0, 1}});
    auto fv = moebius_fixed_points(inv);
    REQUIRE(fv.size() == 1);
    CHECK(fv[0].involutive);
    CHECK_FALSE(fv[0].attracting);

    // fixed points satisfy M(t) = t exactly
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> e(0, 7);
    for (int trial = 0; trial < 100; ++trial) {
        Moebius m{e(rng), e(rng), e(rng), e(rng)};
        if (m.is_degenerate()) continue;
        for (const auto& t : moebius_fixed_points(m)) {
            if ((QN(m.c) + QN(m.d) * t).is_zero()) continue;
            CHECK(m.eval(t) == t);
        }
    }
}
