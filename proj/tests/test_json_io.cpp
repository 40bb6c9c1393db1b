#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "printers.hpp"
#include "valdyn/errors.hpp"
#include "valdyn/json_io.hpp"

using namespace valdyn;
using QN = QuadraticNumber;

namespace {
// parse the text and serialize it again
std::string reserialize(const std::string& s) { return dump(Json::parse(s)); }
}  // namespace

TEST_CASE("number documents") {
    const QN x = parse_quadratic("(-1 + sqrt(22))/3");
    const Json j = to_json(x);
    CHECK(j["a"]["num"] == "-1");
    CHECK(j["a"]["den"] == "3");
    CHECK(j["b"]["num"] == "1");
    CHECK(j["D"] == "22");
    CHECK(quadratic_from_json(j) == x);

    const Rational big = make_rational(Integer("123456789012345678901234567890"), Integer(7));
    CHECK(rational_from_json(to_json(big)) == big);
    CHECK(quadratic_from_json(to_json(QN(big))) == QN(big));

    const Json r = to_json(spectral_radius_2x2(2, 3, 7, 0));
    CHECK(r["minpoly"] == "X^2 - 2X - 21");
    CHECK(r["value"]["text"] == "1 + sqrt(22)");

    CHECK_THROWS_AS(rational_from_json(Json{{"num", "x"}, {"den", "1"}}), ParseError);
    CHECK_THROWS_AS(rational_from_json(Json{{"num", "1"}}), ParseError);
}

TEST_CASE("valuation documents invert") {
    std::mt19937 rng(4);
    std::vector<Valuation> vs{Valuation::neg_deg(), Valuation::monomial(QN(1), parse_quadratic("(sqrt(22) - 1)/3")),
                              Valuation::affine_monomial(QN(make_rational(-1, 2)), QN(-1)),
                              parse_valuation("skp{chart=local; keys=[x, y, y^2-x^3]; values=[1, 3/2, 7/2]}"),
                              Valuation::curve(parse_poly("y - x^2"))};
    for (int i = 0; i < 20; ++i) vs.push_back(Valuation::skp_based(testgen::random_local_skp(rng, 3, i % 2 == 0)));
    for (int i = 0; i < 20; ++i)
        vs.push_back(Valuation::skp_based(testgen::random_one_place_skp(rng, 3),
                                          i % 2 ? CoordChange::swap() : CoordChange::shear(make_rational(i, 3))));
    for (const auto& nu : vs) {
        CAPTURE(nu.to_string());
        const Json j = to_json(nu);
        CHECK(j["text"] == nu.to_string());
        CHECK(valuation_from_json(j) == nu);
        CHECK(reserialize(dump(j)) == dump(j));
    }
    CHECK_THROWS_AS(valuation_from_json(Json{{"kind", "spline"}}), ParseError);
}

TEST_CASE("report documents round-trip byte for byte") {
    const PlaneMap f = parse_map("(x^2*y^3+x^7, x^7)", MapKind::local_germ);
    const EigenReport r = eigenvaluation_search(f);
    const Json j = to_json(r, verify_bounds(f, r, 4));
    CHECK(j["rate"]["minpoly"] == "X^2 - 2X - 21");
    CHECK(j["type"] == "irrational");
    CHECK(j["normal_form"] == "type-ii");
    CHECK(j["verified_to_degree"] == 16);
    CHECK(j["bounds"]["n"] == 4);
    CHECK(j["bounds"]["c_n"] == Json::array({5, 31, 167, 985}));
    CHECK(valuation_from_json(j["eigen"]) == r.eigen);
    CHECK(reserialize(dump(j)) == dump(j));

    const PlaneMap F = parse_map("(X^2, (1+X)*Y^2)", MapKind::affine);
    const AffineReport a = affine_eigenvaluation_search(F);
    const Json ja = to_json(a, skew_dichotomy(F, a, 5));
    CHECK(ja["dichotomy"] == "skew-product");
    CHECK(ja["normal_form"].is_null());
    CHECK(ja["growth"]["degrees"] == Json::array({3, 8, 20, 48, 112}));
    CHECK(ja["certificate"]["status"] == "certified-in-V1");
    CHECK(reserialize(dump(ja)) == dump(ja));

    const QuadraInterval iv = quadra_interval(1, 1, 1, 0, 10);
    const Json jq = to_json(iv);
    CHECK(jq["determinant"] == "1");
    CHECK(reserialize(dump(jq)) == dump(jq));
}

TEST_CASE("piecewise documents") {
    const PiecewiseLinear f = PiecewiseLinear::lower_envelope({{2, 3}, {7, 0}}, QN(1), std::nullopt);
    const Json j = to_json(f);
    CHECK(j["hi"].is_null());
    CHECK(j["breakpoints"].size() == 1);
    CHECK(j["breakpoints"][0]["text"] == "5/3");
    CHECK(j["pieces"][1]["intercept"]["num"] == "7");
    CHECK(reserialize(dump(j)) == dump(j));

    const PiecewiseMoebius m = induced_moebius(PiecewiseLinear::line({7, 0}, QN(1), QN(make_rational(3, 2))),
                                               PiecewiseLinear::line({2, 3}, QN(1), QN(make_rational(3, 2))), 1);
    const Json jm = to_json(m);
    CHECK(jm["pieces"].size() == 1);
    CHECK(jm["hi"]["text"] == "3/2");
}
