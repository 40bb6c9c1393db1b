#include "valdyn/json_io.hpp"

#include "valdyn/errors.hpp"

namespace valdyn {

namespace {

const char* chart_name(Chart c) { return c == Chart::local ? "local" : "infinity"; }

const VarNames& coord_vars(Chart c) { return c == Chart::local ? kLocalVars : kAffineVars; }
const VarNames& key_vars(Chart c) { return c == Chart::local ? kLocalVars : kChartVars; }

Json optional_qn(const std::optional<QuadraticNumber>& x) { return x ? to_json(*x) : Json(nullptr); }

Json matrix_json(const std::optional<std::array<Rational, 4>>& m) {
    if (!m) return nullptr;
    Json out = Json::array();
    for (const auto& e : *m) out.push_back(to_json(e));
    return out;
}

Json bracket_json(const std::optional<std::pair<QuadraticNumber, std::optional<QuadraticNumber>>>& b) {
    if (!b) return nullptr;
    return Json{{"lo", to_json(b->first)}, {"hi", optional_qn(b->second)}};
}

const Json& member(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing JSON member '") + key + "'", 0);
    return j.at(key);
}

std::string string_member(const Json& j, const char* key) {
    const Json& v = member(j, key);
    if (!v.is_string()) throw ParseError(std::string("JSON member '") + key + "' must be a string", 0);
    return v.get<std::string>();
}

Json integers(const std::vector<unsigned long>& v) {
    Json out = Json::array();
    for (auto x : v) out.push_back(x);
    return out;
}

}  // namespace

Json to_json(const Rational& q) { return Json{{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}}; }

Json to_json(const QuadraticNumber& x) {
    return Json{{"a", to_json(x.a())}, {"b", to_json(x.b())}, {"D", x.D().get_str()}, {"text", x.to_string()}};
}

Json to_json(const QuadraticInteger& r) {
    return Json{{"value", to_json(r.value)}, {"minpoly", r.minpoly_string()}, {"degree", r.degree}};
}

Json to_json(const Valuation& nu) {
    Json out{{"kind", ""}, {"text", nu.to_string()}};
    switch (nu.kind()) {
        case Valuation::Kind::neg_deg:
            out["kind"] = "negdeg";
            break;
        case Valuation::Kind::monomial:
            out["kind"] = "monomial";
            out["s"] = to_json(nu.s());
            out["t"] = to_json(nu.t());
            break;
        case Valuation::Kind::curve:
            out["kind"] = "curve";
            out["phi"] = nu.curve_poly().to_string(kLocalVars);
            break;
        case Valuation::Kind::skp: {
            const Skp& s = nu.skp();
            out["kind"] = "skp";
            out["chart"] = chart_name(s.chart);
            out["coords"] = Json::array({nu.coords().u.to_string(coord_vars(s.chart)),
                                         nu.coords().v.to_string(coord_vars(s.chart))});
            Json keys = Json::array(), values = Json::array();
            for (const auto& k : s.keys) keys.push_back(k.to_string(key_vars(s.chart)));
            for (const auto& v : s.values) values.push_back(to_json(v));
            out["keys"] = keys;
            out["values"] = values;
            out["truncated"] = nu.truncated();
            break;
        }
    }
    return out;
}

Json to_json(const PiecewiseLinear& f) {
    Json bps = Json::array(), pieces = Json::array();
    for (const auto& b : f.breakpoints()) bps.push_back(to_json(b));
    for (const auto& l : f.pieces()) pieces.push_back({{"intercept", to_json(l.intercept)}, {"slope", to_json(l.slope)}});
    return Json{{"lo", to_json(f.lo())}, {"hi", optional_qn(f.hi())}, {"breakpoints", bps}, {"pieces", pieces}};
}

Json to_json(const PiecewiseMoebius& m) {
    Json bps = Json::array(), pieces = Json::array();
    for (const auto& b : m.breakpoints()) bps.push_back(to_json(b));
    for (const auto& p : m.pieces())
        pieces.push_back({{"a", to_json(p.a)}, {"b", to_json(p.b)}, {"c", to_json(p.c)}, {"d", to_json(p.d)},
                          {"text", p.to_string()}});
    return Json{{"lo", to_json(m.lo())}, {"hi", optional_qn(m.hi())}, {"breakpoints", bps}, {"pieces", pieces}};
}

Json to_json(const QuadraInterval& iv) {
    return Json{{"p", iv.p.get_str()},
                {"q", iv.q.get_str()},
                {"p2", iv.p2.get_str()},
                {"q2", iv.q2.get_str()},
                {"matrix", Json::array({iv.abar.get_str(), iv.bbar.get_str(), iv.cbar.get_str(), iv.dbar.get_str()})},
                {"t_plus", to_json(iv.t_plus)},
                {"period", iv.period},
                {"k", iv.k},
                {"shift", iv.shift.get_str()},
                {"inverted", iv.inverted},
                {"determinant", Integer(iv.p2 * iv.q - iv.p * iv.q2).get_str()}};
}

Json to_json(const FixedPointCheck& c) {
    return Json{{"degree", c.degree},
                {"checked", c.checked},
                {"passed", c.passed},
                {"method", c.method},
                {"counterexample", c.counterexample ? Json(c.counterexample->to_string()) : Json(nullptr)}};
}

Json to_json(const WalkStep& s) {
    return Json{{"chart", s.chart},
                {"stage", s.stage},
                {"lo", to_json(s.lo)},
                {"fixed_point", optional_qn(s.fixed_point)},
                {"action", s.action}};
}

Json to_json(const JacobianCheck& j) {
    return Json{{"skipped", j.skipped},
                {"reason", j.reason},
                {"lhs", to_json(j.lhs)},
                {"rhs", to_json(j.rhs)},
                {"holds", j.holds}};
}

Json to_json(const OnePlaceReport& r) {
    Json stages = Json::array();
    for (const auto& s : r.stages) stages.push_back({{"j", s.j}, {"d", s.d}, {"D", s.D}, {"beta_le_d", s.beta_le_d}});
    return Json{{"stages", stages},
                {"sum", to_json(r.sum)},
                {"sum_condition", r.sum_condition},
                {"hypotheses", r.hypotheses},
                {"prefix_hypotheses", r.prefix_hypotheses},
                {"degrees_match", r.degrees_match},
                {"certified", r.certified}};
}

Json to_json(const V1Certificate& c) {
    return Json{{"status", to_string(c.status)},
                {"one_place", c.one_place ? to_json(*c.one_place) : Json(nullptr)},
                {"beta_le_d", c.beta_le_d},
                {"sum_condition", c.sum_condition},
                {"skewness", to_json(c.skewness)},
                {"thinness", to_json(c.thinness)},
                {"thinness_ok", c.thinness_ok},
                {"sample_degree", c.sample_degree},
                {"values_ok", c.values_ok},
                {"positive_monomial",
                 c.positive_monomial ? Json(c.positive_monomial->to_string(kAffineVars)) : Json(nullptr)}};
}

Json to_json(const BoundsReport& b) {
    return Json{{"n", b.n_max},
                {"c_n", integers(b.c)},
                {"delta", to_json(b.delta)},
                {"ratio", to_json(b.min_ratio)},
                {"ratio_at", b.min_ratio_at}};
}

Json to_json(const DichotomyReport& d) {
    Json ratios = Json::array();
    for (const auto& r : d.ratios) ratios.push_back(to_json(r));
    return Json{{"branch", to_string(d.branch)},
                {"degrees", integers(d.degrees)},
                {"ratios", ratios},
                {"observed_D", to_json(d.observed_D)},
                {"D_bound", optional_qn(d.D_bound)},
                {"single_variable", d.single_variable},
                {"deg_p", d.deg_p},
                {"deg_y_q", d.deg_y_q},
                {"drop", d.drop},
                {"x0", d.x0 ? to_json(*d.x0) : Json(nullptr)}};
}

Json to_json(const EigenReport& r, const std::optional<BoundsReport>& bounds) {
    Json walk = Json::array();
    for (const auto& s : r.walk) walk.push_back(to_json(s));
    return Json{{"eigen", to_json(r.eigen)},
                {"rate", to_json(r.rate)},
                {"type", to_string(r.type)},
                {"normal_form", to_string(r.normal_form)},
                {"matrix", matrix_json(r.matrix)},
                {"verified_to_degree", r.verification.passed ? Json(r.verification.degree) : Json(nullptr)},
                {"verification", to_json(r.verification)},
                {"involutive", r.involutive},
                {"superattracting", r.superattracting},
                {"bound_skewness", to_json(r.bound_skewness)},
                {"bracket", bracket_json(r.bracket)},
                {"rate_stable", r.rate_stable},
                {"bounds", bounds ? to_json(*bounds) : Json(nullptr)},
                {"walk", walk}};
}

Json to_json(const AffineReport& r, const std::optional<DichotomyReport>& growth) {
    Json walk = Json::array();
    for (const auto& s : r.walk) walk.push_back(to_json(s));
    Json skew_coords = nullptr;
    if (r.skew_coords)
        skew_coords = Json::array({r.skew_coords->u.to_string(kAffineVars), r.skew_coords->v.to_string(kAffineVars)});
    return Json{{"eigen", to_json(r.eigen)},
                {"rate", to_json(r.rate)},
                {"type", to_string(r.type)},
                {"normal_form", r.normal_form ? Json(to_string(*r.normal_form)) : Json(nullptr)},
                {"matrix", matrix_json(r.matrix)},
                {"dichotomy", to_string(r.dichotomy)},
                {"skew_product", r.skew_product},
                {"skew_coords", skew_coords},
                {"open_case", r.open_case},
                {"involutive", r.involutive},
                {"verified_to_degree", r.verification.passed ? Json(r.verification.degree) : Json(nullptr)},
                {"verification", to_json(r.verification)},
                {"certificate", to_json(r.certificate)},
                {"bound_skewness", to_json(r.bound_skewness)},
                {"bracket", bracket_json(r.bracket)},
                {"rate_stable", r.rate_stable},
                {"growth", growth ? to_json(*growth) : Json(nullptr)},
                {"walk", walk}};
}

Rational rational_from_json(const Json& j) {
    const std::string num = string_member(j, "num"), den = string_member(j, "den");
    try {
        return make_rational(Integer(num), Integer(den));
    } catch (const std::invalid_argument&) {
        throw ParseError("malformed rational {" + num + ", " + den + "}", 0);
    }
}

QuadraticNumber quadratic_from_json(const Json& j) {
    const Rational a = rational_from_json(member(j, "a")), b = rational_from_json(member(j, "b"));
    const std::string d = string_member(j, "D");
    Integer D;
    try {
        D = Integer(d);
    } catch (const std::invalid_argument&) {
        throw ParseError("malformed radicand '" + d + "'", 0);
    }
    if (b == 0) return QuadraticNumber(a);
    return QuadraticNumber(a, b, D);
}

Valuation valuation_from_json(const Json& j) {
    const std::string kind = string_member(j, "kind");
    if (kind == "negdeg") return Valuation::neg_deg();
    if (kind == "monomial")
        return Valuation::monomial(quadratic_from_json(member(j, "s")), quadratic_from_json(member(j, "t")));
    if (kind == "curve") return Valuation::curve(parse_poly(string_member(j, "phi"), kLocalVars));
    if (kind != "skp") throw ParseError("unknown valuation kind '" + kind + "'", 0);

    const std::string chart = string_member(j, "chart");
    if (chart != "local" && chart != "infinity") throw ParseError("unknown chart '" + chart + "'", 0);
    Skp s;
    s.chart = chart == "local" ? Chart::local : Chart::infinity;
    const Json& coords = member(j, "coords");
    if (!coords.is_array() || coords.size() != 2) throw ParseError("coords must hold two polynomials", 0);
    const CoordChange c{parse_poly(coords[0].get<std::string>(), coord_vars(s.chart)),
                        parse_poly(coords[1].get<std::string>(), coord_vars(s.chart))};
    for (const auto& k : member(j, "keys")) s.keys.push_back(parse_poly(k.get<std::string>(), key_vars(s.chart)));
    for (const auto& v : member(j, "values")) s.values.push_back(quadratic_from_json(v));
    const Json& t = member(j, "truncated");
    if (!t.is_boolean()) throw ParseError("truncated must be a boolean", 0);
    return Valuation::skp_based(s, c, t.get<bool>());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace valdyn
