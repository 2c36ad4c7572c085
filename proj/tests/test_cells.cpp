#include <gtest/gtest.h>

#include "generators.hpp"

using namespace motive;

namespace {

const RatFuncQ Q = RatFuncQ(PolyQ::x());
RatFuncQ rf(std::vector<Rat> n, std::vector<Rat> d) { return RatFuncQ::make(PolyQ(std::move(n)), PolyQ(std::move(d))); }
MotivicValue mv(const RatFuncQ& f) { return MotivicValue(f); }

Rat interval_tolerance(std::uint64_t p, unsigned depth) { return pow_rat(Rat(static_cast<unsigned long>(p)), -static_cast<long>(depth) + 1); }

} // namespace

TEST(Cell, MeasureExamples) {
    EXPECT_EQ(measure_cell(Cell::annular(0, -1, std::nullopt)), MotivicValue(1));
    EXPECT_EQ(measure_cell(Cell::annular(0, -1, std::nullopt, 2, 0, classes::squares())), mv(rf({0, 1}, {2, 2})));
    EXPECT_TRUE(measure_cell(Cell::singleton(0)).is_zero());
    EXPECT_THROW(measure_cell(Cell::annular(0, std::nullopt, std::nullopt)), InfiniteMeasure);
    EXPECT_TRUE(measure_cell(Cell::annular(0, std::nullopt, std::nullopt, 1, 0, classes::empty(), true)).is_zero());
}

TEST(Cell, ConstructorsValidate) {
    EXPECT_THROW(Cell::annular(0, 3, 2), InvalidArgument);
    EXPECT_THROW(Cell::annular(0, 0, 5, 0, 0), InvalidArgument);
    EXPECT_THROW(Cell::annular(0, 0, 5, 2, 2), InvalidArgument);
    Cell e = Cell::annular(0, 3, 2, 1, 0, classes::units(), true);
    EXPECT_TRUE(e.is_empty());
    EXPECT_TRUE(measure_cell(e).is_zero());
    EXPECT_TRUE(Cell::annular(0, 1, 3, 2, 1, classes::units(), true).is_empty());
    EXPECT_FALSE(Cell::annular(0, 0, 2, 2, 1).is_empty());
    EXPECT_EQ(Cell::annular(make_rat(1, 3), 0, 4).threshold(), 4u);
}

TEST(Cell, ShellConsistency) {
    for (std::int64_t r = -2; r <= 4; ++r) {
        for (auto z : {classes::units(), classes::squares(), classes::one()}) {
            MotivicValue shell = measure_cell(Cell::annular(5, r - 1, r + 1, 1, 0, z));
            EXPECT_EQ(shell, MotivicValue::count_of(z) * MotivicValue::q_power(-r - 1));
        }
    }
    // Shells 0..R plus the tail {v >= R+1} reproduce the valuation ring.
    for (std::int64_t R = 0; R < 6; ++R) {
        MotivicValue total = measure_cell(Cell::annular(0, R, std::nullopt));
        for (std::int64_t r = 0; r <= R; ++r) total += measure_cell(Cell::annular(0, r - 1, r + 1));
        EXPECT_EQ(total, MotivicValue(1));
    }
}

TEST(CellProperty, TranslationInvariance) {
    testgen::Rng g(21);
    for (int i = 0; i < 80; ++i) {
        std::int64_t lo = g.range(-3, 3);
        std::optional<std::int64_t> hi;
        if (g.coin()) hi = lo + g.range(1, 8);
        std::int64_t m = g.range(1, 4);
        Cell a = Cell::annular(0, lo, hi, m, g.range(0, m - 1), g.pick(testgen::class_pool()), true);
        Cell b = a;
        b.center = g.pick(testgen::center_pool()) + Rat(static_cast<long>(g.range(-5, 5)));
        EXPECT_EQ(measure_cell(a), measure_cell(b));
    }
}

TEST(CellProperty, ClosedFormMatchesShellSums) {
    testgen::Rng g(22);
    for (int i = 0; i < 80; ++i) {
        std::int64_t lo = g.range(-3, 3);
        std::int64_t hi = lo + g.range(1, 12);
        std::int64_t m = g.range(1, 4);
        std::int64_t lam = g.range(0, m - 1);
        Cell c = Cell::annular(0, lo, hi, m, lam);
        for (std::uint64_t p : {3, 5}) {
            Rat direct = 0;
            for (std::int64_t r = lo + 1; r < hi; ++r)
                if (mod_floor(r - lam, m) == 0) direct += Rat(static_cast<unsigned long>(p - 1)) * pow_rat(Rat(static_cast<unsigned long>(p)), -r - 1);
            EXPECT_EQ(measure_cell(c).eval(p), direct);
        }
    }
}

TEST(NthPowerCells, SquaresOnValuationRing) {
    CellList l = nth_power_cells({2, {{ValuationConstraint::Kind::GreaterEq, 0}}});
    ASSERT_EQ(l.cells.size(), 2u);
    EXPECT_TRUE(l.cells[0].is_singleton());
    EXPECT_EQ(l.cells[1], Cell::annular(0, -1, std::nullopt, 2, 0, classes::squares()));
    EXPECT_EQ(l.threshold, 3u);
    EXPECT_EQ(measure_cells(l.cells), mv(rf({0, 1}, {2, 2})));
}

TEST(NthPowerCells, RangeRestriction) {
    CellList l = nth_power_cells({2, {{ValuationConstraint::Kind::Equal, 0}}});
    ASSERT_EQ(l.cells.size(), 1u);
    EXPECT_EQ(l.cells[0], Cell::annular(0, -1, 1, 2, 0, classes::squares()));
    CellList odd = nth_power_cells({2, {{ValuationConstraint::Kind::GreaterEq, 0}, {ValuationConstraint::Kind::Congruent, 1, 2}}});
    EXPECT_TRUE(odd.cells.empty());
    EXPECT_THROW(nth_power_cells({1, {}}), InvalidArgument);
}

TEST(NthPowerCells, CubesAgreeWithOracle) {
    CellList l = nth_power_cells({3, {{ValuationConstraint::Kind::GreaterEq, 0}}});
    EXPECT_EQ(l.threshold, 4u);
    Rat exact = measure_cells(l.cells).eval(7);
    Interval iv = empirical_measure(l.cells, 7, 8);
    EXPECT_TRUE(iv.contains(exact)) << iv.to_string() << " vs " << to_string(exact);
    EXPECT_LE(iv.width(), pow_rat(7, -7));
    // #cubes in F_7^x is 2: 2 * sum_{3 | r} 7^{-r-1}.
    EXPECT_EQ(exact, make_rat(2, 7) / (Rat(1) - pow_rat(7, -3)));
}

TEST(NthPowerCells, SquaresAgreeWithDirectCount) {
    CellList l = nth_power_cells({2, {{ValuationConstraint::Kind::GreaterEq, 0}}});
    for (std::uint64_t p : {3, 5, 7}) {
        // x mod p^6 is a square of a p-adic integer iff (v even, unit part a square) or x = 0 mod p^6 region.
        std::uint64_t mod = 1;
        for (int i = 0; i < 6; ++i) mod *= p;
        std::uint64_t sq = 0, deep = 0;
        for (std::uint64_t x = 0; x < mod; ++x) {
            if (x == 0) {
                ++deep;
                continue;
            }
            std::uint64_t v = 0, u = x;
            while (u % p == 0) {
                u /= p;
                ++v;
            }
            bool res = false;
            for (std::uint64_t y = 1; y < p; ++y) res = res || y * y % p == u % p;
            sq += (v % 2 == 0 && res) ? 1 : 0;
        }
        Rat lo = make_rat(static_cast<std::int64_t>(sq), static_cast<std::int64_t>(mod));
        Rat hi = make_rat(static_cast<std::int64_t>(sq + deep), static_cast<std::int64_t>(mod));
        Rat exact = measure_cells(l.cells).eval(p);
        EXPECT_LE(lo, exact);
        EXPECT_LE(exact, hi);
    }
}

TEST(Decompose, SingleAtom) {
    Decomposition d = decompose(DefSet::val(0, Cmp::Ge, 0));
    ASSERT_EQ(d.cells.size(), 2u);
    EXPECT_EQ(d.cells[0], Cell::annular(0, -1, std::nullopt));
    EXPECT_EQ(d.cells[1], Cell::singleton(0));
    EXPECT_EQ(measure_set(DefSet::val(0, Cmp::Ge, 0)), MotivicValue(1));
}

TEST(Decompose, TwoDisjointBalls) {
    DefSet s = DefSet::disj({DefSet::val(1, Cmp::Ge, 1), DefSet::val(-1, Cmp::Ge, 1)});
    Decomposition d = decompose(s);
    std::vector<Cell> annular;
    for (const auto& c : d.cells)
        if (!c.is_singleton()) annular.push_back(c);
    ASSERT_EQ(annular.size(), 2u);
    EXPECT_EQ(annular[0].center, Rat(-1));
    EXPECT_EQ(annular[1].center, Rat(1));
    EXPECT_EQ(d.threshold, 3u);
    for (std::uint64_t p : {5, 7}) {
        MembershipReport r = membership_check(s, d.cells, p, 6);
        EXPECT_EQ(r.agree, r.decidable);
        EXPECT_EQ(r.overlaps, 0u);
    }
    EXPECT_EQ(measure_set(s), MotivicValue(RatFuncQ(2) * RatFuncQ::q_power(-1)));
}

TEST(Decompose, Contradiction) {
    DefSet s = DefSet::conj({DefSet::val(0, Cmp::Ge, 0), DefSet::negate(DefSet::val(0, Cmp::Ge, 0))});
    EXPECT_TRUE(decompose(s).cells.empty());
}

TEST(Decompose, DegenerateCentersAreRejected) {
    DefSet s = DefSet::conj({DefSet::val(Center{make_rat(1, 2), "1/2"}, Cmp::Ge, 0),
                             DefSet::val(Center{make_rat(1, 2), "2/4"}, Cmp::Ge, 1)});
    EXPECT_THROW(decompose(s), DegenerateCenters);
}

TEST(MeasureSet, Examples) {
    EXPECT_EQ(measure_set(DefSet::val(0, Cmp::Eq, 0)), MotivicValue(1) - MotivicValue::q_power(-1));
    EXPECT_EQ(measure_set(DefSet::conj({DefSet::val(0, Cmp::Ge, 0), DefSet::cong(0, 0, 1)})), MotivicValue(1));
    DefSet squares = DefSet::conj({DefSet::val(0, Cmp::Ge, 0), DefSet::cong(0, 0, 2), DefSet::ac(0, classes::squares())});
    EXPECT_EQ(measure_set(squares), mv(rf({0, 1}, {2, 2})));
    EXPECT_THROW(measure_set(DefSet::val(0, Cmp::Le, 0)), InfiniteMeasure);
    // {x : v(x - 1/2) = 0, ac(x) = 1}: ac(x) = 1 is one residue class, and v(x - 1/2) = 0 removes the class of 1/2.
    DefSet s = DefSet::conj({DefSet::val(0, Cmp::Eq, 0), DefSet::ac(0, classes::one()), DefSet::val(make_rat(1, 2), Cmp::Eq, 0)});
    for (std::uint64_t p : {5, 7, 11}) EXPECT_EQ(measure_set(s).eval(p), make_rat(1, static_cast<std::int64_t>(p)));
}

TEST(MeasureFamily, Examples) {
    FamilyPiece ball;
    ball.cell.center = 0;
    ball.cell.vmin = AffineBound{1, -1};
    FiberFunction f = measure_family(ball);
    FamilyPiece shell;
    shell.cell.center = 0;
    shell.cell.vmin = AffineBound{1, -1};
    shell.cell.vmax = AffineBound{1, 1};
    FiberFunction g = measure_family(shell);
    FamilyPiece even = ball, odd = ball;
    even.cell.vmin = AffineBound{make_rat(1, 2), -1};
    even.s_modulus = 2;
    odd.cell.vmin = AffineBound{make_rat(1, 2), make_rat(-1, 2)};
    odd.s_modulus = 2;
    odd.s_residue = 1;
    FiberFunction he = measure_family(even), ho = measure_family(odd);
    for (std::int64_t s = 0; s < 10; ++s) {
        EXPECT_EQ(f.at(s), MotivicValue::q_power(-s));
        EXPECT_EQ(g.at(s), MotivicValue(Q - RatFuncQ(1)) * MotivicValue::q_power(-s - 1));
        MotivicValue h = s % 2 == 0 ? he.at(s) : ho.at(s);
        EXPECT_EQ(h, MotivicValue::q_power(-div_ceil(s, 2)));
    }
}

TEST(MeasureFamily, HalfBallMatchesPointCounts) {
    // #{x mod p^s : x^2 = 0 mod p^s} / p^s = p^{-ceil(s/2)}.
    for (std::uint64_t p : {3, 5}) {
        for (std::int64_t s = 0; s <= 5; ++s) {
            std::uint64_t mod = 1;
            for (std::int64_t i = 0; i < s; ++i) mod *= p;
            std::uint64_t n = 0;
            for (std::uint64_t x = 0; x < mod; ++x) n += (x * x) % mod == 0 ? 1 : 0;
            EXPECT_EQ(make_rat(static_cast<std::int64_t>(n), static_cast<std::int64_t>(mod)),
                      MotivicValue::q_power(-div_ceil(s, 2)).eval(p));
        }
    }
}

TEST(DecomposeProperty, MembershipAgreesWithSemantics) {
    testgen::Rng g(31);
    for (int i = 0; i < 60; ++i) {
        DefSet s = testgen::random_defset(g);
        Decomposition d = decompose(s);
        for (std::uint64_t p : {5, 7}) {
            if (p < d.threshold) continue;
            unsigned depth = p == 5 ? 5 : 4;
            MembershipReport r = membership_check(s, d.cells, p, depth);
            EXPECT_EQ(r.overlaps, 0u) << s.to_string();
            EXPECT_EQ(r.agree, r.decidable) << s.to_string() << " at p = " << p;
        }
    }
}

TEST(DecomposeProperty, MeasureIsAdditiveAndMatchesDirectCounts) {
    testgen::Rng g(32);
    for (int i = 0; i < 40; ++i) {
        DefSet s = testgen::random_bounded_defset(g);
        Decomposition d = decompose(s);
        MotivicValue total = measure_set(s);
        MotivicValue sum;
        for (const auto& c : d.cells) sum += measure_cell(c);
        EXPECT_EQ(total, sum);
        for (std::uint64_t p : {5, 7}) {
            if (p < d.threshold) continue;
            unsigned depth = 4;
            auto [lo, hi] = testgen::direct_measure_bounds(s, p, depth);
            Rat v = total.eval(p);
            EXPECT_LE(lo, v) << s.to_string() << " at p = " << p;
            EXPECT_LE(v, hi) << s.to_string() << " at p = " << p;
            Interval iv = empirical_measure(d.cells, p, depth + 2);
            EXPECT_TRUE(iv.contains(v));
            EXPECT_LE(iv.width(), interval_tolerance(p, depth + 2) * Rat(4));
        }
    }
}

TEST(Cell, JsonMirrorsFields) {
    auto j = Cell::annular(make_rat(1, 2), -1, std::nullopt, 2, 1, classes::squares()).to_json();
    EXPECT_EQ(j.dump(), R"({"kind":"annular","center":"1/2","vmin":-1,"vmax":null,"modulus":2,"residue":1,"ac_class":"sq"})");
    EXPECT_EQ(Cell::singleton(3).to_json().dump(), R"({"kind":"singleton","center":"3","guard":"units"})");
}
