#include <cstdlib>
#include <random>

#include "doctest.h"
#include "valdyn/errors.hpp"
#include "valdyn/poly.hpp"

using namespace valdyn;

namespace {
BiPoly P(const std::string& s) { return parse_poly(s); }
PlaneMap L(const std::string& s) { return parse_map(s, MapKind::local_germ); }
PlaneMap A(const std::string& s) { return parse_map(s, MapKind::affine); }

BiPoly random_poly(std::mt19937& rng, unsigned max_deg, int terms, bool germ) {
    std::uniform_int_distribution<unsigned> e(0, max_deg);
    std::uniform_int_distribution<int> c(-4, 4);
    BiPoly p;
    while (p.is_zero()) {
        for (int k = 0; k < terms; ++k) {
            unsigned i = e(rng), j = e(rng);
            if (germ && i + j == 0) continue;
            p.add_term(i, j, c(rng));
        }
    }
    return p;
}

// Independent oracle: full composition by repeated multiplication, no caching.
BiPoly naive_subst(const BiPoly& p, const BiPoly& g1, const BiPoly& g2) {
    BiPoly out;
    for (const auto& [e, c] : p.terms()) {
        BiPoly t = BiPoly::constant(c);
        for (unsigned k = 0; k < e.first; ++k) t = t * g1;
        for (unsigned k = 0; k < e.second; ++k) t = t * g2;
        out += t;
    }
    return out;
}

unsigned long oracle_mult_of_iterate(const PlaneMap& f, unsigned n) {
    BiPoly h1 = f.f1, h2 = f.f2;
    for (unsigned k = 1; k < n; ++k) {
        BiPoly n1 = naive_subst(h1, f.f1, f.f2), n2 = naive_subst(h2, f.f1, f.f2);
        h1 = n1;
        h2 = n2;
    }
    return std::min(multiplicity(h1), multiplicity(h2));
}
}  // namespace

TEST_CASE("parsing and canonical rendering") {
    CHECK(P("x^2*y^3+x^7").to_string() == "x^2*y^3+x^7");
    CHECK(P("x^7 + x^2*y^3").to_string() == "x^2*y^3+x^7");
    CHECK(P("y^2-x^3").to_string() == "y^2-x^3");
    CHECK(P("-x^3 + y^2").to_string() == "y^2-x^3");
    CHECK(P("3/2*x^2*y^3").to_string() == "3/2*x^2*y^3");
    CHECK(P("(1+x)*y^2").to_string() == "y^2+x*y^2");
    CHECK(P("(x+y)^2 - 2*x*y").to_string() == "y^2+x^2");
    CHECK(P("0").to_string() == "0");
    CHECK(P("x - x").is_zero());
    CHECK(parse_poly("X*Y-1", kAffineVars).to_string(kAffineVars) == "-1+X*Y");
    CHECK(L("(x^2*y^3+x^7, x^7)").to_string() == "(x^2*y^3+x^7, x^7)");

    try {
        P("x^2 + z");
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.position() == 6);
    }
    CHECK_THROWS_AS(P("x^-1"), ParseError);
    CHECK_THROWS_AS(P("x^2 +"), ParseError);
    CHECK_THROWS_AS(P("x/0"), ParseError);
    CHECK_THROWS_AS(L("(x, y"), ParseError);
    CHECK_THROWS_AS(parse_map("(X, y)", MapKind::affine), ParseError);

    std::mt19937 rng(3);
    for (int k = 0; k < 50; ++k) {
        BiPoly p = random_poly(rng, 6, 5, false);
        CHECK(P(p.to_string()) == p);
    }
}

TEST_CASE("multiplicity") {
    CHECK(multiplicity(P("x^2*y^3+x^7")) == 5);
    CHECK(multiplicity(P("1")) == 0);
    CHECK(multiplicity(P("x^2*y + x*y^3")) == 3);
    CHECK_THROWS_AS(multiplicity(BiPoly{}), PreconditionError);

    std::mt19937 rng(7);
    for (int k = 0; k < 200; ++k) {
        BiPoly a = random_poly(rng, 5, 4, false), b = random_poly(rng, 5, 4, false);
        CHECK(multiplicity(a * b) == multiplicity(a) + multiplicity(b));
    }
}

TEST_CASE("Newton diagram") {
    auto nd = newton_diagram(P("x^2*y^3+x^7"));
    REQUIRE(nd.vertices.size() == 2);
    CHECK(nd.vertices[0] == Exponent{2, 3});
    CHECK(nd.vertices[1] == Exponent{7, 0});
    // (1,3) lies above the segment from (0,4) to (4,0)
    auto nd2 = newton_diagram(P("y^4 + x*y^3 + x^2*y^3 + x^4"));
    REQUIRE(nd2.vertices.size() == 2);
    CHECK(nd2.vertices[0] == Exponent{0, 4});
    CHECK(nd2.vertices[1] == Exponent{4, 0});
    auto nd3 = newton_diagram(P("y^5 + x*y + x^6"));
    CHECK(nd3.vertices.size() == 3);
}

TEST_CASE("Jacobian determinant") {
    CHECK(jacobian_det(L("(x^2, y^2)")) == P("4*x*y"));
    CHECK(jacobian_det(L("(x^2*y, x*y^3)")) == P("5*x^2*y^3"));
    CHECK(jacobian_det(L("(y, x)")) == P("-1"));
    CHECK_FALSE(L("(x*y, x^2*y^2)").is_dominant());
}

TEST_CASE("truncated composition") {
    CHECK(compose_truncated(L("(x^2, y^2)"), L("(x, y)"), 10) == L("(x^2, y^2)"));
    CHECK(compose_truncated(L("(x^2, y^2)"), L("(x^2, y^2)"), 10) == L("(x^4, y^4)"));
    PlaneMap f = L("(x^2*y^3+x^7, x^7)");
    PlaneMap g = compose_truncated(f, f, 40);
    CHECK(multiplicity(g.f1) == 31);
    CHECK(multiplicity(g.f2) == 35);

    std::mt19937 rng(19);
    for (int k = 0; k < 30; ++k) {
        PlaneMap a{random_poly(rng, 3, 3, true), random_poly(rng, 3, 3, true), MapKind::local_germ};
        PlaneMap b{random_poly(rng, 3, 3, true), random_poly(rng, 3, 3, true), MapKind::local_germ};
        unsigned order = 4 + k % 6;
        PlaneMap t = compose_truncated(a, b, order);
        CHECK(t.f1 == naive_subst(a.f1, b.f1, b.f2).truncated(order));
        CHECK(t.f2 == naive_subst(a.f2, b.f1, b.f2).truncated(order));
        CHECK(compose(a, b).f1 == naive_subst(a.f1, b.f1, b.f2));
    }
}

TEST_CASE("multiplicity sequence") {
    using V = std::vector<unsigned long>;
    CHECK(mult_sequence(L("(x^2, y^2)"), 3) == V{2, 4, 8});
    CHECK(mult_sequence(L("(x^2*y^3+x^7, x^7)"), 2) == V{5, 31});
    CHECK(mult_sequence(L("(x^2*y, x*y^3)"), 2) == V{3, 10});
    CHECK_THROWS_AS(mult_sequence(L("(x*y, x^2*y^2)"), 2), PreconditionError);
    CHECK_THROWS_AS(mult_sequence(L("(x^2*y^3+x^7, x^7)"), 4, 64), ResourceError);

    // cancellation in the lowest terms forces the exact path
    PlaneMap canc = L("(x + y^2, x - y)");
    CHECK(mult_sequence(canc, 4) == V{1, 1, 1, 1});
    PlaneMap c2 = L("(x^2 - y^2 + x^3, x*y + y^3)");
    CHECK(mult_sequence(c2, 3) == V{2, oracle_mult_of_iterate(c2, 2), oracle_mult_of_iterate(c2, 3)});

    std::mt19937 rng(23);
    for (int k = 0; k < 25; ++k) {
        PlaneMap f{random_poly(rng, 3, 3, true), random_poly(rng, 3, 3, true), MapKind::local_germ};
        if (!f.is_dominant()) continue;
        auto seq = mult_sequence(f, 3);
        for (unsigned n = 1; n <= 3; ++n) CHECK(seq[n - 1] == oracle_mult_of_iterate(f, n));
        CHECK(seq[1] >= seq[0] * seq[0]);
        CHECK(seq[2] >= seq[1] * seq[0]);
    }
}

TEST_CASE("degree sequence") {
    using V = std::vector<unsigned long>;
    CHECK(deg_sequence(A("(X^2, Y^2)"), 3) == V{2, 4, 8});
    CHECK(deg_sequence(A("(Y, X*Y)"), 5) == V{2, 3, 5, 8, 13});
    CHECK(deg_sequence(A("(X^2, (1+X)*Y^2)"), 4) == V{3, 8, 20, 48});
    CHECK_THROWS_AS(deg_sequence(A("(X^2+Y^3+X*Y, Y^2+X^3)"), 6, 100), ResourceError);

    std::mt19937 rng(29);
    for (int k = 0; k < 15; ++k) {
        PlaneMap F{random_poly(rng, 2, 3, false), random_poly(rng, 2, 3, false), MapKind::affine};
        if (!F.is_dominant()) continue;
        auto d = deg_sequence(F, 4);
        for (unsigned m = 1; m <= 3; ++m)
            for (unsigned n = 1; m + n <= 4; ++n) CHECK(d[m + n - 1] <= d[m - 1] * d[n - 1]);
    }
}

TEST_CASE("term budget from the environment") {
    setenv("VALDYN_TERM_BUDGET", "12", 1);
    CHECK(term_budget_from_env() == 12);
    setenv("VALDYN_TERM_BUDGET", "abc", 1);
    CHECK_THROWS_AS(term_budget_from_env(), ParseError);
    unsetenv("VALDYN_TERM_BUDGET");
    CHECK(term_budget_from_env() == kDefaultTermBudget);
}

TEST_CASE("transform at infinity") {
    auto T = [](const std::string& s) { return at_infinity_transform(parse_poly(s, kAffineVars)); };
    CHECK(T("X") == BiPoly::constant(1));
    CHECK(T("Y") == BiPoly::y());
    CHECK(T("X*Y-1") == P("y - x^2"));  // w - z^2 with (z, w) stored as (x, y)
    std::mt19937 rng(31);
    for (int k = 0; k < 100; ++k) {
        BiPoly a = random_poly(rng, 4, 4, false), b = random_poly(rng, 4, 4, false);
        CHECK(at_infinity_transform(a * b) == at_infinity_transform(a) * at_infinity_transform(b));
    }
}

TEST_CASE("division and gcd") {
    auto [q, r] = divmod_monic_y(P("y^3 + x*y + x^5"), P("y^2 - x^3"));
    CHECK(q * P("y^2 - x^3") + r == P("y^3 + x*y + x^5"));
    CHECK(r.degree_y() < 2);
    CHECK_THROWS_AS(divmod_monic_y(P("y^2"), P("x*y^2 + 1")), PreconditionError);

    CHECK(exact_div(P("x^2 - y^2"), P("x + y")) == P("x - y"));
    CHECK_FALSE(exact_div(P("x^2 + y^2"), P("x + y")).has_value());

    CHECK(gcd(P("x^2*y"), P("x*y^3")) == P("x*y"));
    CHECK(gcd(P("x^2*(x+y)"), P("x*(x+y)^2")) == P("x*(x+y)"));
    CHECK(gcd(P("x^2"), P("y^2")) == P("1"));
    CHECK(gcd(P("2*y^2 - 2*x^3"), P("(y^2 - x^3)*(x + 1)")) == P("y^2 - x^3"));

    std::mt19937 rng(37);
    for (int k = 0; k < 40; ++k) {
        BiPoly g = random_poly(rng, 2, 3, false);
        BiPoly a = random_poly(rng, 2, 3, false) * g, b = random_poly(rng, 2, 3, false) * g;
        BiPoly d = gcd(a, b);
        CHECK(exact_div(a, d).has_value());
        CHECK(exact_div(b, d).has_value());
        CHECK(exact_div(d, normalize(g)).has_value());
    }
}

TEST_CASE("factorization") {
    auto texts = [](const Factorization& f) {
        std::vector<std::pair<std::string, unsigned>> out;
        for (const auto& [p, m] : f.factors) out.emplace_back(p.to_string(), m);
        return out;
    };
    using V = std::vector<std::pair<std::string, unsigned>>;
    CHECK(texts(factor(P("x^2*y^3 + x^7"))) == V{{"x", 2}, {"y^3+x^5", 1}});
    auto f1 = factor(P("x^2*y^3 + x^7"));
    CHECK(f1.complete);
    CHECK(texts(factor(P("y^2 - x^2"))) == V{{"y+x", 1}, {"y-x", 1}});
    CHECK(texts(factor(P("x*(x+y)"))) == V{{"x", 1}, {"y+x", 1}});
    CHECK(texts(factor(P("3*(y^2 - x^3)^2*(1+x)"))) == V{{"1+x", 1}, {"y^2-x^3", 2}});
    CHECK(factor(P("3*(y^2 - x^3)^2*(1+x)")).unit == 3);
    CHECK(texts(factor(P("y^2 - x^2 - x^3"))) == V{{"y^2-x^2-x^3", 1}});  // disc 4x^2(1+x) not a square
    CHECK(texts(factor(P("(y - x^2)*(y + x^3)"))) == V{{"y+x^3", 1}, {"y-x^2", 1}});
    CHECK(texts(factor(P("(x^2 + 1)*y"))) == V{{"1+x^2", 1}, {"y", 1}});

    std::mt19937 rng(41);
    const char* irreducibles[] = {"x+y", "y-x^2", "y^2-x^3", "y+x+x*y", "y^3+x^5", "x-2*y", "1+x"};
    std::uniform_int_distribution<int> pick(0, 6), mult(1, 2);
    for (int k = 0; k < 40; ++k) {
        BiPoly prod = BiPoly::constant(1);
        std::map<std::string, unsigned> expected;
        for (int t = 0; t < 3; ++t) {
            BiPoly g = normalize(P(irreducibles[pick(rng)]));
            unsigned m = static_cast<unsigned>(mult(rng));
            prod = prod * g.pow(m);
            expected[g.to_string()] += m;
        }
        // soundness: a complete answer is the true factorization
        auto fz = factor(prod);
        std::map<std::string, unsigned> got;
        for (const auto& [p, m] : fz.factors) got[p.to_string()] += m;
        if (fz.complete) CHECK(got == expected);
        // with the right candidates the answer is always complete and correct
        std::vector<BiPoly> cands;
        for (const char* t : irreducibles) cands.push_back(P(t));
        auto fc = factor(prod, cands);
        std::map<std::string, unsigned> got2;
        for (const auto& [p, m] : fc.factors) got2[p.to_string()] += m;
        CHECK(fc.complete);
        CHECK(got2 == expected);
    }
}
