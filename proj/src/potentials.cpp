#include "valdyn/potentials.hpp"

#include <algorithm>
#include <sstream>

#include "valdyn/errors.hpp"

namespace valdyn {

using QN = QuadraticNumber;

namespace {

bool below_hi(const QN& t, const std::optional<QN>& hi) { return !hi || t < *hi; }

std::string hi_string(const std::optional<QN>& hi) { return hi ? hi->to_string() : "inf"; }

/// Sorted union of the interior breakpoints of two functions on one domain.
std::vector<QN> merged_breakpoints(const std::vector<QN>& a, const std::vector<QN>& b) {
    std::vector<QN> out;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Drops breakpoints between equal lines.
void coalesce(std::vector<QN>& bps, std::vector<Line>& pieces) {
    std::vector<QN> nb;
    std::vector<Line> np{pieces.front()};
    for (std::size_t i = 1; i < pieces.size(); ++i) {
        if (pieces[i] == np.back()) continue;
        nb.push_back(bps[i - 1]);
        np.push_back(pieces[i]);
    }
    bps = std::move(nb);
    pieces = std::move(np);
}

/// sqrt of a non-negative rational as a quadratic number.
QN qn_sqrt(const Rational& r) {
    Integer n = r.get_num() * r.get_den();
    auto [s, core] = square_free_split(n);
    Rational coef = make_rational(s, r.get_den());
    if (core == 1) return QN(coef);
    return QN(Rational(0), coef, core);
}

std::string rat(const Rational& q) { return to_string(q); }

}  // namespace

// ---------------------------------------------------------------------------
// Piecewise-linear functions

PiecewiseLinear::PiecewiseLinear(QN lo, std::optional<QN> hi, std::vector<QN> breakpoints, std::vector<Line> pieces)
    : lo_(std::move(lo)), hi_(std::move(hi)), breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    if (pieces_.size() != breakpoints_.size() + 1) throw PreconditionError("pieces and breakpoints do not match");
    if (hi_ && *hi_ < lo_) throw PreconditionError("empty domain");
    QN prev = lo_;
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (!(breakpoints_[i] > prev) || !below_hi(breakpoints_[i], hi_))
            throw PreconditionError("breakpoints must increase strictly inside the domain");
        if (pieces_[i].at(breakpoints_[i]) != pieces_[i + 1].at(breakpoints_[i]))
            throw PreconditionError("piecewise-linear function is discontinuous at " + breakpoints_[i].to_string());
        prev = breakpoints_[i];
    }
}

PiecewiseLinear PiecewiseLinear::line(const Line& l, const QN& lo, const std::optional<QN>& hi) {
    return PiecewiseLinear(lo, hi, {}, {l});
}

PiecewiseLinear PiecewiseLinear::lower_envelope(const std::vector<Line>& lines, const QN& lo,
                                                const std::optional<QN>& hi) {
    if (lines.empty()) throw PreconditionError("lower envelope of no lines");
    // line attaining the minimum at lo; ties go to the smaller slope
    std::size_t cur = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        QN vi = lines[i].at(lo), vc = lines[cur].at(lo);
        if (vi < vc || (vi == vc && lines[i].slope < lines[cur].slope)) cur = i;
    }
    std::vector<QN> bps;
    std::vector<Line> pieces{lines[cur]};
    QN t = lo;
    while (true) {
        std::optional<Rational> next;
        std::size_t arg = cur;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (!(lines[i].slope < lines[cur].slope)) continue;
            Rational x = (lines[i].intercept - lines[cur].intercept) / (lines[cur].slope - lines[i].slope);
            if (!(QN(x) > t)) continue;
            if (!next || x < *next || (x == *next && lines[i].slope < lines[arg].slope)) {
                next = x;
                arg = i;
            }
        }
        if (!next || !below_hi(QN(*next), hi)) break;
        bps.push_back(QN(*next));
        pieces.push_back(lines[arg]);
        cur = arg;
        t = QN(*next);
    }
    return PiecewiseLinear(lo, hi, std::move(bps), std::move(pieces));
}

QN PiecewiseLinear::piece_lo(std::size_t i) const { return i == 0 ? lo_ : breakpoints_.at(i - 1); }

std::optional<QN> PiecewiseLinear::piece_hi(std::size_t i) const {
    return i < breakpoints_.size() ? std::optional<QN>(breakpoints_[i]) : hi_;
}

bool PiecewiseLinear::contains(const QN& t) const { return t >= lo_ && (!hi_ || t <= *hi_); }

std::size_t PiecewiseLinear::piece_index(const QN& t) const {
    if (!contains(t)) throw PreconditionError(t.to_string() + " lies outside [" + lo_.to_string() + ", " + hi_string(hi_) + "]");
    return static_cast<std::size_t>(std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t) - breakpoints_.begin());
}

QN PiecewiseLinear::eval(const QN& t) const { return pieces_[piece_index(t)].at(t); }

bool PiecewiseLinear::is_concave() const {
    for (std::size_t i = 1; i < pieces_.size(); ++i)
        if (pieces_[i].slope > pieces_[i - 1].slope) return false;
    return true;
}

bool PiecewiseLinear::has_integer_slopes() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const Line& l) { return l.slope.get_den() == 1; });
}

PiecewiseLinear PiecewiseLinear::reparam(const Rational& k) const {
    if (k <= 0) throw PreconditionError("reparametrization factor must be positive");
    QN inv = QN(Rational(1 / k));
    std::vector<QN> bps;
    for (const auto& b : breakpoints_) bps.push_back(b * inv);
    std::vector<Line> pieces;
    for (const auto& l : pieces_) pieces.push_back({l.intercept, l.slope * k});
    std::optional<QN> hi;
    if (hi_) hi = *hi_ * inv;
    return PiecewiseLinear(lo_ * inv, hi, std::move(bps), std::move(pieces));
}

PiecewiseLinear PiecewiseLinear::restrict(const QN& lo, const std::optional<QN>& hi) const {
    if (!contains(lo) || (hi && !contains(*hi)) || (!hi && hi_) || (hi && *hi < lo))
        throw PreconditionError("restriction leaves the domain");
    std::vector<QN> bps;
    piece_index(lo);
    std::vector<Line> pieces{pieces_[static_cast<std::size_t>(
        std::upper_bound(breakpoints_.begin(), breakpoints_.end(), lo) - breakpoints_.begin())]};
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (breakpoints_[i] > lo && below_hi(breakpoints_[i], hi)) {
            bps.push_back(breakpoints_[i]);
            pieces.push_back(pieces_[i + 1]);
        }
    }
    return PiecewiseLinear(lo, hi, std::move(bps), std::move(pieces));
}

std::string PiecewiseLinear::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (i) os << "; ";
        os << "[" << piece_lo(i).to_string() << ", " << hi_string(piece_hi(i)) << "]: " << rat(pieces_[i].intercept);
        if (pieces_[i].slope != 0) os << (pieces_[i].slope > 0 ? " + " : " - ") << rat(abs(pieces_[i].slope)) << "*t";
    }
    return os.str();
}

std::string PiecewiseLinear::to_csv(unsigned samples) const {
    if (samples < 2) throw PreconditionError("need at least two samples");
    double a = lo_.to_double();
    double b = hi_ ? hi_->to_double() : (breakpoints_.empty() ? a : breakpoints_.back().to_double()) + 1.0;
    std::ostringstream os;
    os.precision(17);
    os << "t,value\n";
    for (unsigned i = 0; i < samples; ++i) {
        double t = a + (b - a) * i / (samples - 1);
        std::size_t k = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t,
                                         [](const QN& q, double x) { return q.to_double() < x; }) -
                        breakpoints_.begin();
        double v = pieces_[k].intercept.get_d() + pieces_[k].slope.get_d() * t;
        os << t << "," << v << "\n";
    }
    return os.str();
}

namespace {

void require_same_domain(const PiecewiseLinear& f, const PiecewiseLinear& g) {
    if (f.lo() != g.lo() || f.hi() != g.hi()) throw PreconditionError("piecewise-linear domains differ");
}

}  // namespace

PiecewiseLinear pl_min(const PiecewiseLinear& f, const PiecewiseLinear& g) {
    require_same_domain(f, g);
    std::vector<QN> grid = merged_breakpoints(f.breakpoints(), g.breakpoints());
    std::vector<QN> bps;
    std::vector<Line> pieces;
    for (std::size_t i = 0; i <= grid.size(); ++i) {
        QN a = i == 0 ? f.lo() : grid[i - 1];
        std::optional<QN> b = i < grid.size() ? std::optional<QN>(grid[i]) : f.hi();
        // the pieces valid on (a, b) are the ones to the right of a
        std::size_t kf = static_cast<std::size_t>(std::upper_bound(f.breakpoints().begin(), f.breakpoints().end(), a) -
                                                  f.breakpoints().begin());
        std::size_t kg = static_cast<std::size_t>(std::upper_bound(g.breakpoints().begin(), g.breakpoints().end(), a) -
                                                  g.breakpoints().begin());
        auto sub = PiecewiseLinear::lower_envelope({f.pieces()[kf], g.pieces()[kg]}, a, b);
        if (i > 0) bps.push_back(a);
        for (std::size_t k = 0; k < sub.pieces().size(); ++k) {
            if (k > 0) bps.push_back(sub.breakpoints()[k - 1]);
            pieces.push_back(sub.pieces()[k]);
        }
    }
    coalesce(bps, pieces);
    return PiecewiseLinear(f.lo(), f.hi(), std::move(bps), std::move(pieces));
}

PiecewiseLinear pl_sum(const PiecewiseLinear& f, const PiecewiseLinear& g) {
    require_same_domain(f, g);
    std::vector<QN> grid = merged_breakpoints(f.breakpoints(), g.breakpoints());
    std::vector<Line> pieces;
    for (std::size_t i = 0; i <= grid.size(); ++i) {
        QN a = i == 0 ? f.lo() : grid[i - 1];
        std::size_t kf = static_cast<std::size_t>(std::upper_bound(f.breakpoints().begin(), f.breakpoints().end(), a) -
                                                  f.breakpoints().begin());
        std::size_t kg = static_cast<std::size_t>(std::upper_bound(g.breakpoints().begin(), g.breakpoints().end(), a) -
                                                  g.breakpoints().begin());
        const Line &lf = f.pieces()[kf], &lg = g.pieces()[kg];
        pieces.push_back({lf.intercept + lg.intercept, lf.slope + lg.slope});
    }
    coalesce(grid, pieces);
    return PiecewiseLinear(f.lo(), f.hi(), std::move(grid), std::move(pieces));
}

PiecewiseLinear pl_scale(const PiecewiseLinear& f, const Rational& r) {
    if (r <= 0) throw PreconditionError("scale factor must be positive");
    std::vector<Line> pieces;
    for (const auto& l : f.pieces()) pieces.push_back({l.intercept * r, l.slope * r});
    return PiecewiseLinear(f.lo(), f.hi(), f.breakpoints(), std::move(pieces));
}

PiecewiseLinear potential_on_segment(const Skp& prefix, const BiPoly& p, const QN& lo, const std::optional<QN>& hi) {
    if (!prefix.is_prefix()) throw PreconditionError("potential_on_segment needs an SKP prefix");
    if (p.is_zero()) throw PreconditionError("potential of the zero polynomial");
    const std::size_t k = prefix.depth();
    QN floor_value(0);
    if (k >= 2) {
        std::vector<QN> pre(prefix.values.begin(), prefix.values.end() - 1);
        auto rel = key_relation(pre, prefix.values.back());
        if (!rel) throw PreconditionError("only the last SKP value may be irrational");
        floor_value = prefix.values.back() * QN(Rational(Integer(rel->n)));
    }
    Skp check = prefix;
    check.values.push_back(floor_value + QN(1));
    skp_validate(check);
    if (lo < floor_value) throw PreconditionError("segment starts below " + floor_value.to_string());
    if (hi && *hi < lo) throw PreconditionError("empty segment");
    std::vector<Line> lines;
    for (const auto& l : skp_value_lines(prefix, p)) lines.push_back({l.intercept, Rational(Integer(l.slope))});
    return PiecewiseLinear::lower_envelope(lines, lo, hi);
}

// ---------------------------------------------------------------------------
// Moebius maps

QN Moebius::eval(const QN& t) const {
    QN den = QN(c) + QN(d) * t;
    if (den.is_zero()) throw ArithmeticError("Moebius map has a pole at " + t.to_string());
    return (QN(a) + QN(b) * t) / den;
}

QN Moebius::derivative(const QN& t) const {
    QN den = QN(c) + QN(d) * t;
    if (den.is_zero()) throw ArithmeticError("Moebius map has a pole at " + t.to_string());
    return QN(Rational(b * c - a * d)) / (den * den);
}

Moebius Moebius::normalized() const {
    Integer l = 1, g = 0;
    for (const Rational* r : {&a, &b, &c, &d}) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), r->get_den_mpz_t());
    Moebius m{a * l, b * l, c * l, d * l};
    for (const Rational* r : {&m.a, &m.b, &m.c, &m.d}) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), r->get_num_mpz_t());
    if (g == 0) return m;
    Rational s = make_rational(1, g);
    if (m.c < 0 || (m.c == 0 && m.d < 0)) s = -s;
    return {m.a * s, m.b * s, m.c * s, m.d * s};
}

bool Moebius::has_nonnegative_form() const {
    bool pos = true, neg = true;
    for (const Rational* r : {&a, &b, &c, &d}) {
        pos = pos && *r >= 0;
        neg = neg && *r <= 0;
    }
    return pos || neg;
}

std::string Moebius::to_string() const {
    Moebius n = normalized();
    return "(" + rat(n.a) + " + " + rat(n.b) + "*t)/(" + rat(n.c) + " + " + rat(n.d) + "*t)";
}

std::vector<QN> moebius_fixed_points(const Moebius& m) {
    // d t^2 + (c - b) t - a = 0
    Rational A = m.d, B = m.c - m.b, C = -m.a;
    if (A == 0) {
        if (B == 0) return {};
        return {QN(Rational(-C / B))};
    }
    Rational disc = B * B - 4 * A * C;
    if (disc < 0) return {};
    QN r = qn_sqrt(disc);
    QN base = QN(Rational(-B / (2 * A)));
    QN half = QN(Rational(1 / (2 * A)));
    if (disc == 0) return {base};
    QN t1 = base - half * r, t2 = base + half * r;
    if (t2 < t1) std::swap(t1, t2);
    return {t1, t2};
}

PiecewiseMoebius::PiecewiseMoebius(QN lo, std::optional<QN> hi, std::vector<QN> breakpoints,
                                   std::vector<Moebius> pieces)
    : lo_(std::move(lo)), hi_(std::move(hi)), breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    if (pieces_.size() != breakpoints_.size() + 1) throw PreconditionError("pieces and breakpoints do not match");
}

QN PiecewiseMoebius::piece_lo(std::size_t i) const { return i == 0 ? lo_ : breakpoints_.at(i - 1); }

std::optional<QN> PiecewiseMoebius::piece_hi(std::size_t i) const {
    return i < breakpoints_.size() ? std::optional<QN>(breakpoints_[i]) : hi_;
}

std::size_t PiecewiseMoebius::piece_index(const QN& t) const {
    if (t < lo_ || (hi_ && t > *hi_)) throw PreconditionError(t.to_string() + " lies outside the segment");
    return static_cast<std::size_t>(std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t) - breakpoints_.begin());
}

QN PiecewiseMoebius::eval(const QN& t) const { return pieces_[piece_index(t)].eval(t); }

bool PiecewiseMoebius::nonnegative_certificate() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const Moebius& m) { return m.has_nonnegative_form(); });
}

std::string PiecewiseMoebius::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (i) out += "; ";
        out += "[" + piece_lo(i).to_string() + ", " + hi_string(piece_hi(i)) + "]: " + pieces_[i].to_string();
    }
    return out;
}

PiecewiseMoebius induced_moebius(const PiecewiseLinear& numerator, const PiecewiseLinear& cpotential,
                                 unsigned long m_psi, bool allow_constant) {
    require_same_domain(numerator, cpotential);
    if (m_psi == 0) throw PreconditionError("multiplicity must be positive");
    std::vector<QN> grid = merged_breakpoints(numerator.breakpoints(), cpotential.breakpoints());
    std::vector<Moebius> pieces;
    const Rational m{Integer(m_psi)};
    for (std::size_t i = 0; i <= grid.size(); ++i) {
        QN a = i == 0 ? numerator.lo() : grid[i - 1];
        std::optional<QN> b = i < grid.size() ? std::optional<QN>(grid[i]) : numerator.hi();
        auto pick = [&](const PiecewiseLinear& f) {
            return f.pieces()[static_cast<std::size_t>(
                std::upper_bound(f.breakpoints().begin(), f.breakpoints().end(), a) - f.breakpoints().begin())];
        };
        Line n = pick(numerator), c = pick(cpotential);
        // a linear denominator is positive on the piece iff it is at both ends
        bool pos = c.at(a).sign() > 0 && (b ? c.at(*b).sign() > 0 : c.slope >= 0);
        if (!pos) throw ArithmeticError("denominator potential vanishes on piece " + std::to_string(i));
        Moebius mb{n.intercept, n.slope, c.intercept * m, c.slope * m};
        if (mb.is_degenerate() && !allow_constant)
            throw PreconditionError("degenerate Moebius piece " + std::to_string(i) + " on [" + a.to_string() + ", " +
                                    hi_string(b) + "]");
        pieces.push_back(mb.normalized());
    }
    // merge neighbouring pieces given by the same map
    std::vector<QN> bps;
    std::vector<Moebius> merged{pieces.front()};
    for (std::size_t i = 1; i < pieces.size(); ++i) {
        if (pieces[i] == merged.back()) continue;
        bps.push_back(grid[i - 1]);
        merged.push_back(pieces[i]);
    }
    return PiecewiseMoebius(numerator.lo(), numerator.hi(), std::move(bps), std::move(merged));
}

std::vector<MoebiusFixedPoint> moebius_fixed_points(const PiecewiseMoebius& pm) {
    std::vector<MoebiusFixedPoint> out;
    for (std::size_t i = 0; i < pm.pieces().size(); ++i) {
        const Moebius& m = pm.pieces()[i];
        QN a = pm.piece_lo(i);
        std::optional<QN> b = pm.piece_hi(i);
        if (m.is_identity()) {
            out.push_back({a, false, true, true, i});
            continue;
        }
        for (const QN& t : moebius_fixed_points(m)) {
            if (t < a || (b && t > *b)) continue;
            QN der = m.derivative(t);
            QN absd = der.sign() < 0 ? -der : der;
            out.push_back({t, absd < QN(1), false, m.is_involutive(), i});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.t < y.t; });
    std::vector<MoebiusFixedPoint> uniq;
    for (auto& fp : out)
        if (uniq.empty() || uniq.back().t != fp.t || fp.everywhere) uniq.push_back(fp);
    return uniq;
}

}  // namespace valdyn
