// valdyn: command-line front end.
//
// Exit status: 0 success, 1 other errors, 2 parse errors, 3 falsified
// checks, 4 resource limits.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "valdyn/cfquad.hpp"
#include "valdyn/dynaffine.hpp"
#include "valdyn/dynlocal.hpp"
#include "valdyn/errors.hpp"
#include "valdyn/json_io.hpp"
#include "valdyn/poly.hpp"

using namespace valdyn;

namespace {

enum Exit { ok = 0, other = 1, parse = 2, falsified = 3, resource = 4 };

struct Options {
    std::string map;
    std::string valuation;
    std::string poly;
    unsigned n = 6;
    unsigned max_depth = 16;
    unsigned test_degree = 0;
    bool json = false;
    std::string floor = "0";
    std::vector<long> matrix;
};

/// Parse errors in user input, echoed with a caret under the failing byte.
class InputError : public std::runtime_error {
public:
    InputError(const std::string& label, const std::string& text, const ParseError& e)
        : std::runtime_error(describe(label, text, e)) {}

private:
    static std::string describe(const std::string& label, const std::string& text, const ParseError& e) {
        std::ostringstream os;
        os << "cannot parse " << label << ": " << e.what() << "\n  " << text << "\n  "
           << std::string(std::min(e.position(), text.size()), ' ') << "^";
        return os.str();
    }
};

template <class F>
auto parse_input(const std::string& label, const std::string& text, F&& f) {
    try {
        return f(text);
    } catch (const ParseError& e) {
        throw InputError(label, text, e);
    }
}

PlaneMap read_map(const std::string& text, MapKind kind) {
    return parse_input("--map", text, [kind](const std::string& t) { return parse_map(t, kind); });
}

Valuation read_valuation(const std::string& text) {
    return parse_input("--valuation", text, [](const std::string& t) { return parse_valuation(t); });
}

std::string join(const std::vector<unsigned long>& v, const char* sep = ", ") {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? sep : "") << v[i];
    return os.str();
}

std::string matrix_text(const std::optional<std::array<Rational, 4>>& m) {
    if (!m) return "-";
    return "(" + to_string((*m)[0]) + ", " + to_string((*m)[1]) + ", " + to_string((*m)[2]) + ", " +
           to_string((*m)[3]) + ")";
}

void print_walk(const std::vector<WalkStep>& walk) {
    for (const auto& s : walk)
        std::cout << "  " << s.chart << " stage " << s.stage << ": from " << s.lo.to_string() << ", fixed point "
                  << (s.fixed_point ? s.fixed_point->to_string() : "-") << ", " << s.action << "\n";
}

int run_local(const Options& o) {
    const PlaneMap f = read_map(o.map, MapKind::local_germ);
    const EigenReport r = eigenvaluation_search(f, o.max_depth, o.test_degree);
    const BoundsReport b = verify_bounds(f, r, o.n);
    if (o.json) {
        std::cout << dump(to_json(r, b));
        return ok;
    }
    std::cout << "map: " << f.to_string() << "\n"
              << "eigenvaluation: " << r.eigen.to_string() << "\n"
              << "rate: " << r.rate.human() << "\n"
              << "type: " << to_string(r.type) << "\n"
              << "normal form: " << to_string(r.normal_form) << "\n"
              << "matrix: " << matrix_text(r.matrix) << "\n"
              << "verified to degree " << r.verification.degree << ": " << (r.verification.passed ? "yes" : "no")
              << "\n"
              << "c(f^n), n <= " << b.n_max << ": " << join(b.c) << "\n"
              << "delta: " << b.delta.to_string() << ", min ratio " << b.min_ratio.to_string() << "\n"
              << "walk:\n";
    print_walk(r.walk);
    return ok;
}

int run_affine(const Options& o) {
    const PlaneMap F = read_map(o.map, MapKind::affine);
    const AffineReport r = affine_eigenvaluation_search(F, o.max_depth, o.test_degree);
    const DichotomyReport d = skew_dichotomy(F, r, o.n);
    if (o.json) {
        std::cout << dump(to_json(r, d));
        return ok;
    }
    std::cout << "map: " << F.to_string() << "\n"
              << "eigenvaluation: " << r.eigen.to_string() << "\n"
              << "dynamical degree: " << r.rate.human() << "\n"
              << "type: " << to_string(r.type) << "\n"
              << "normal form: " << (r.normal_form ? to_string(*r.normal_form) : "-") << "\n"
              << "matrix: " << matrix_text(r.matrix) << "\n"
              << "branch: " << to_string(d.branch) << (r.skew_product ? " (pencil eigenvaluation)" : "") << "\n"
              << "V1 certificate: " << to_string(r.certificate.status) << "\n"
              << "verified to degree " << r.verification.degree << ": " << (r.verification.passed ? "yes" : "no")
              << "\n"
              << "deg F^n, n <= " << o.n << ": " << join(d.degrees) << "\n"
              << "max deg F^n / d^n: " << d.observed_D.to_string() << "\n";
    if (r.open_case) std::cout << "note: divisorial eigenvaluation with alpha > 0 and A = 0\n";
    std::cout << "walk:\n";
    print_walk(r.walk);
    return ok;
}

int run_skp_eval(const Options& o) {
    const Valuation nu = read_valuation(o.valuation);
    const VarNames& vars = nu.normalization() == Normalization::affine ? kAffineVars : kLocalVars;
    const BiPoly p = parse_input("polynomial", o.poly, [&](const std::string& t) { return parse_poly(t, vars); });
    const auto v = nu.value(p);
    if (o.json) {
        std::cout << dump(Json{{"valuation", to_json(nu)},
                               {"polynomial", p.to_string(vars)},
                               {"value", v ? to_json(*v) : Json(nullptr)}});
        return ok;
    }
    std::cout << (v ? v->to_string() : "inf") << "\n";
    return ok;
}

int run_sequence(const Options& o, bool affine) {
    const PlaneMap f = read_map(o.map, affine ? MapKind::affine : MapKind::local_germ);
    const auto seq = affine ? deg_sequence(f, o.n) : mult_sequence(f, o.n);
    if (o.json) {
        std::cout << dump(Json{{"map", f.to_string()}, {"n", o.n}, {affine ? "degrees" : "multiplicities", seq}});
        return ok;
    }
    std::cout << join(seq, ",") << "\n";
    return ok;
}

int run_quadra(const Options& o) {
    if (o.matrix.size() != 4) throw InputError("--matrix", "", ParseError("expected four integers a,b,c,d", 0));
    const Integer floor = parse_input("--floor", o.floor, [](const std::string& t) {
        try {
            return Integer(t);
        } catch (const std::invalid_argument&) {
            throw ParseError("expected an integer", 0);
        }
    });
    const QuadraInterval iv = quadra_interval(o.matrix[0], o.matrix[1], o.matrix[2], o.matrix[3], floor);
    if (o.json) {
        std::cout << dump(to_json(iv));
        return ok;
    }
    std::cout << "t+ = " << iv.t_plus.to_string() << "\n"
              << "interval: [" << iv.p.get_str() << "/" << iv.q.get_str() << ", " << iv.p2.get_str() << "/"
              << iv.q2.get_str() << "]\n"
              << "p'q - pq' = " << Integer(iv.p2 * iv.q - iv.p * iv.q2).get_str() << "\n";
    return ok;
}

int run_certify(const Options& o) {
    const Valuation nu = read_valuation(o.valuation);
    const V1Certificate c = v1_certificate(nu, o.test_degree ? o.test_degree : 6);
    if (o.json) {
        std::cout << dump(Json{{"valuation", to_json(nu)}, {"certificate", to_json(c)}});
        return ok;
    }
    std::cout << to_string(c.status) << "\n"
              << "skewness: " << c.skewness.to_string() << "\n"
              << "thinness: " << c.thinness.to_string() << "\n";
    if (c.positive_monomial) std::cout << "positive on: " << c.positive_monomial->to_string(kAffineVars) << "\n";
    return ok;
}

int run_jacobian(const Options& o) {
    const Valuation nu = read_valuation(o.valuation);
    const bool affine = nu.normalization() == Normalization::affine;
    const PlaneMap f = read_map(o.map, affine ? MapKind::affine : MapKind::local_germ);
    const JacobianCheck j = affine ? affine_jacobian_check(f, nu) : jacobian_identity_check(f, nu);
    if (o.json) {
        std::cout << dump(Json{{"map", f.to_string()}, {"valuation", to_json(nu)}, {"check", to_json(j)}});
    } else if (j.skipped) {
        std::cout << "skipped: " << j.reason << "\n";
    } else {
        std::cout << "lhs = " << j.lhs.to_string() << "\nrhs = " << j.rhs.to_string() << "\n"
                  << (j.holds ? "holds" : "FAILS") << "\n";
    }
    if (!j.skipped && !j.holds) throw FalsificationError("Jacobian identity fails");
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Valuative dynamics of plane maps: attraction rates, dynamical degrees and eigenvaluations"};
    app.require_subcommand(1);
    Options o;

    auto add_map = [&](CLI::App* c) { c->add_option("--map", o.map, "map \"(P, Q)\"")->required(); };
    auto add_valuation = [&](CLI::App* c) {
        c->add_option("--valuation", o.valuation, "negdeg, monomial(s, t) or skp{...}")->required();
    };
    auto add_search = [&](CLI::App* c) {
        c->add_option("--max-depth", o.max_depth, "walk depth limit")->capture_default_str();
        c->add_option("--test-degree", o.test_degree, "fixed-point check degree (0: 2 deg + 2)");
        c->add_option("--n", o.n, "iterates to compare against the rate")->capture_default_str();
    };

    auto* local = app.add_subcommand("local", "eigenvaluation and attraction rate of a fixed-point germ");
    add_map(local);
    add_search(local);
    auto* affine = app.add_subcommand("affine", "eigenvaluation and dynamical degree of a polynomial map");
    add_map(affine);
    add_search(affine);
    auto* skp_eval = app.add_subcommand("skp-eval", "value of a polynomial under a valuation");
    add_valuation(skp_eval);
    skp_eval->add_option("poly", o.poly, "polynomial")->required();
    auto* degseq = app.add_subcommand("degseq", "deg F^n by full composition");
    add_map(degseq);
    degseq->add_option("--n", o.n)->capture_default_str();
    auto* multseq = app.add_subcommand("multseq", "c(f^n) by truncated composition");
    add_map(multseq);
    multseq->add_option("--n", o.n)->capture_default_str();
    auto* quadra = app.add_subcommand("quadra", "unimodular interval invariant under a Moebius map");
    quadra->add_option("--matrix", o.matrix, "a,b,c,d")->delimiter(',')->required();
    quadra->add_option("--floor", o.floor, "minimal denominator size")->capture_default_str();
    auto* certify = app.add_subcommand("certify-v1", "certificate for membership in V1");
    add_valuation(certify);
    certify->add_option("--test-degree", o.test_degree, "degree of sampled monomials (0: 6)");
    auto* jacobian = app.add_subcommand("jacobian-check", "Jacobian identity at a valuation");
    add_map(jacobian);
    add_valuation(jacobian);
    for (auto* c : {local, affine, skp_eval, degseq, multseq, quadra, certify, jacobian})
        c->add_flag("--json", o.json, "emit one JSON document");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : parse;
    }

    try {
        if (*local) return run_local(o);
        if (*affine) return run_affine(o);
        if (*skp_eval) return run_skp_eval(o);
        if (*degseq) return run_sequence(o, true);
        if (*multseq) return run_sequence(o, false);
        if (*quadra) return run_quadra(o);
        if (*certify) return run_certify(o);
        if (*jacobian) return run_jacobian(o);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return parse;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return parse;
    } catch (const FalsificationError& e) {
        std::cerr << "falsified: " << e.what() << "\n";
        return falsified;
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return resource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return other;
    }
    return other;
}
