#pragma once

// Constructive cell decomposition of DefSets. For p at or above the
// reported threshold every pair of distinct centers is at valuation 0 and
// all centers are integral, so the line splits into: the far region
// (v(x - c1) < 0, where all centers look alike), the generic residue disc
// (v(x - c1) = 0 with x avoiding every center's residue), and one ball
// around each center. In each region every atom is a condition on
// (r, t) = (v(x - c_dom), ac(x - c_dom)) for the dominant center.

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "motive/cells.hpp"
#include "motive/defset.hpp"

namespace motive {

namespace detail {

/// An atom specialized to one region: constant, a condition on r, or a
/// class condition on t. Boolean structure is kept.
struct RegionFormula {
    enum class Kind { Const, RVal, RCong, TClass, And, Or, Not };
    Kind kind = Kind::Const;
    bool value = true;
    Cmp cmp = Cmp::Ge;
    std::int64_t bound = 0;
    std::int64_t modulus = 1;
    ClassRef cls;
    std::vector<RegionFormula> args;

    static RegionFormula constant(bool v) {
        RegionFormula f;
        f.value = v;
        return f;
    }

    /// With r fixed, reduces to a class of admissible t (inside the units).
    ClassRef reduce(std::int64_t r) const {
        switch (kind) {
        case Kind::Const: return value ? classes::units() : classes::empty();
        case Kind::RVal: return compare(r, cmp, bound) ? classes::units() : classes::empty();
        case Kind::RCong: return mod_floor(r - bound, modulus) == 0 ? classes::units() : classes::empty();
        case Kind::TClass: return classes::intersect(classes::units(), cls);
        case Kind::And: {
            ClassRef acc = classes::units();
            for (const auto& a : args) {
                acc = classes::intersect(acc, a.reduce(r));
                if (acc->id == "empty") break;
            }
            return acc;
        }
        case Kind::Or: {
            ClassRef acc = classes::empty();
            for (const auto& a : args) {
                acc = classes::unite(acc, a.reduce(r));
                if (acc->id == "units") break;
            }
            return acc;
        }
        case Kind::Not: return classes::units_minus(args[0].reduce(r));
        }
        return classes::empty();
    }

    void collect(std::set<std::int64_t>& breaks, std::int64_t& period) const {
        if (kind == Kind::RVal) breaks.insert(bound);
        if (kind == Kind::RCong) period = std::lcm(period, modulus);
        for (const auto& a : args) a.collect(breaks, period);
    }
};

/// How the atoms of one region read in terms of the dominant center.
struct Region {
    Rat dominant;
    std::optional<std::int64_t> rmin; // inclusive
    std::optional<std::int64_t> rmax; // inclusive
    ClassRef base;
    /// For each center: nullopt if v(x - c) = r and ac(x - c) = t + shift,
    /// otherwise the constant x - c residue (v = 0).
    std::map<Rat, std::optional<Rat>> fixed;
    std::map<Rat, Rat> shift;
};

inline RegionFormula specialize(const DefSet& s, const Region& g) {
    using K = DefSet::Kind;
    RegionFormula f;
    switch (s.kind) {
    case K::True: return RegionFormula::constant(true);
    case K::False: return RegionFormula::constant(false);
    case K::Eq: return RegionFormula::constant(false);
    case K::Val: {
        const auto& fx = g.fixed.at(s.center.value);
        if (fx) return RegionFormula::constant(compare(0, s.cmp, s.bound));
        f.kind = RegionFormula::Kind::RVal;
        f.cmp = s.cmp;
        f.bound = s.bound;
        return f;
    }
    case K::Cong: {
        const auto& fx = g.fixed.at(s.center.value);
        if (fx) return RegionFormula::constant(mod_floor(-s.bound, s.modulus) == 0);
        f.kind = RegionFormula::Kind::RCong;
        f.bound = s.bound;
        f.modulus = s.modulus;
        return f;
    }
    case K::Ac: {
        const auto& fx = g.fixed.at(s.center.value);
        f.kind = RegionFormula::Kind::TClass;
        if (fx) f.cls = classes::preimage_affine(s.cls, 0, *fx);
        else f.cls = classes::preimage_affine(s.cls, 1, g.shift.at(s.center.value));
        if (f.cls->id == "rf") return RegionFormula::constant(true);
        if (f.cls->id == "empty") return RegionFormula::constant(false);
        return f;
    }
    case K::And:
    case K::Or:
    case K::Not:
        f.kind = s.kind == K::And ? RegionFormula::Kind::And
                 : s.kind == K::Or ? RegionFormula::Kind::Or
                                   : RegionFormula::Kind::Not;
        for (const auto& a : s.args) f.args.push_back(specialize(a, g));
        return f;
    }
    return f;
}

/// Membership of the center point c itself, as a class that is units when
/// c always belongs, empty when it never does, and otherwise p-dependent.
inline ClassRef point_guard(const DefSet& s, const Rat& c) {
    using K = DefSet::Kind;
    switch (s.kind) {
    case K::True: return classes::units();
    case K::False: return classes::empty();
    case K::Eq: return s.center.value == c ? classes::units() : classes::empty();
    case K::Val:
        if (s.center.value == c) return (s.cmp == Cmp::Ge || s.cmp == Cmp::Gt) ? classes::units() : classes::empty();
        return compare(0, s.cmp, s.bound) ? classes::units() : classes::empty();
    case K::Cong:
        if (s.center.value == c) return classes::empty();
        return mod_floor(-s.bound, s.modulus) == 0 ? classes::units() : classes::empty();
    case K::Ac: {
        ClassRef z = classes::preimage_affine(s.cls, 0, c - s.center.value);
        if (z->id == "rf") return classes::units();
        return classes::intersect(classes::units(), z);
    }
    case K::And: {
        ClassRef acc = classes::units();
        for (const auto& a : s.args) acc = classes::intersect(acc, point_guard(a, c));
        return acc;
    }
    case K::Or: {
        ClassRef acc = classes::empty();
        for (const auto& a : s.args) acc = classes::unite(acc, point_guard(a, c));
        return acc;
    }
    case K::Not: return classes::units_minus(point_guard(s.args[0], c));
    }
    return classes::empty();
}

/// Emits the annular cells of one region.
inline void cells_of_region(const RegionFormula& f, const Region& g, std::vector<Cell>& out) {
    std::set<std::int64_t> breaks;
    std::int64_t period = 1;
    f.collect(breaks, period);

    // Segments of the region's r-range on which every VAL atom is constant.
    struct Segment {
        std::optional<std::int64_t> lo, hi; // inclusive
        std::vector<ClassRef> pattern;      // by r mod period; null where absent
    };
    std::vector<std::int64_t> pts;
    for (auto b : breaks)
        if ((!g.rmin || b >= *g.rmin) && (!g.rmax || b <= *g.rmax)) pts.push_back(b);
    std::vector<Segment> segs;
    std::optional<std::int64_t> cursor = g.rmin;
    auto push_gap = [&](std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) {
        if (lo && hi && *lo > *hi) return;
        segs.push_back({lo, hi, {}});
    };
    for (auto b : pts) {
        push_gap(cursor, b - 1);
        push_gap(b, b);
        cursor = b + 1;
    }
    push_gap(cursor, g.rmax);

    for (auto& sg : segs) {
        sg.pattern.assign(static_cast<std::size_t>(period), nullptr);
        for (std::int64_t k = 0; k < period; ++k) {
            // Representative r in the segment with r = k mod period.
            std::int64_t r;
            if (sg.lo) r = *sg.lo + mod_floor(k - *sg.lo, period);
            else if (sg.hi) r = *sg.hi - mod_floor(*sg.hi - k, period);
            else r = k;
            if (sg.hi && r > *sg.hi) continue;
            ClassRef z = classes::intersect(g.base, f.reduce(r));
            sg.pattern[static_cast<std::size_t>(k)] = z;
        }
    }

    // Merge adjacent segments with compatible patterns.
    std::vector<Segment> merged;
    for (auto& sg : segs) {
        if (!merged.empty()) {
            auto& last = merged.back();
            bool ok = true;
            for (std::size_t k = 0; k < sg.pattern.size() && ok; ++k)
                if (sg.pattern[k] && last.pattern[k] && !same_class(sg.pattern[k], last.pattern[k])) ok = false;
            if (ok) {
                for (std::size_t k = 0; k < sg.pattern.size(); ++k)
                    if (!last.pattern[k]) last.pattern[k] = sg.pattern[k];
                last.hi = sg.hi;
                continue;
            }
        }
        merged.push_back(sg);
    }

    for (const auto& sg : merged) {
        // Smallest divisor of the period compatible with the pattern.
        std::int64_t m = period;
        for (std::int64_t d = 1; d <= period; ++d) {
            if (period % d != 0) continue;
            bool ok = true;
            for (std::int64_t lam = 0; lam < d && ok; ++lam) {
                ClassRef first;
                for (std::int64_t k = lam; k < period && ok; k += d) {
                    const auto& a = sg.pattern[static_cast<std::size_t>(k)];
                    if (!a) continue;
                    if (!first) first = a;
                    else if (!same_class(a, first)) ok = false;
                }
            }
            if (ok) {
                m = d;
                break;
            }
        }
        for (std::int64_t lam = 0; lam < m; ++lam) {
            ClassRef z;
            for (std::int64_t k = lam; k < period && !z; k += m) z = sg.pattern[static_cast<std::size_t>(k)];
            if (!z || z->id == "empty") continue;
            std::optional<std::int64_t> vmin, vmax;
            if (sg.lo) vmin = *sg.lo - 1;
            if (sg.hi) vmax = *sg.hi + 1;
            Cell c = Cell::annular(g.dominant, vmin, vmax, m, lam, z, true);
            if (!c.is_empty()) out.push_back(c);
        }
    }
}

} // namespace detail

struct Decomposition {
    std::vector<Cell> cells;
    std::uint64_t threshold = 2;
};

/// Splits a DefSet into pairwise disjoint cells whose union is the set, for
/// every p >= the returned threshold.
/// `extra_centers` are added to the centers so that each of them is the
/// center of every cell close to it (used for integrands).
inline Decomposition decompose(const DefSet& s, const std::vector<Rat>& extra_centers = {}) {
    std::vector<Center> raw;
    s.collect_centers(raw);
    std::map<Rat, std::string> spelled;
    for (const auto& c : raw) {
        auto [it, fresh] = spelled.emplace(c.value, c.spelling);
        if (!fresh && it->second != c.spelling)
            throw DegenerateCenters("centers '" + it->second + "' and '" + c.spelling + "' denote the same point");
    }
    for (const auto& c : extra_centers) spelled.emplace(c, to_string(c));
    std::vector<Rat> centers;
    for (const auto& [v, sp] : spelled) centers.push_back(v);
    if (centers.empty()) centers.push_back(0);

    Decomposition out;
    std::uint64_t thr = 2;
    auto bump = [&thr](const Int& z) {
        Int m = max_prime_factor(z);
        if (m != 0) thr = std::max<std::uint64_t>(thr, to_int64(m) + 1);
    };
    for (std::size_t i = 0; i < centers.size(); ++i) {
        bump(centers[i].get_den());
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            Rat d = centers[j] - centers[i];
            bump(d.get_num());
            bump(d.get_den());
        }
    }

    std::vector<detail::Region> regions;
    const Rat& c1 = centers.front();
    if (centers.size() == 1) {
        detail::Region g{c1, std::nullopt, std::nullopt, classes::units(), {}, {}};
        g.fixed[c1] = std::nullopt;
        g.shift[c1] = 0;
        regions.push_back(g);
    } else {
        detail::Region far{c1, std::nullopt, -1, classes::units(), {}, {}};
        for (const auto& c : centers) {
            far.fixed[c] = std::nullopt;
            far.shift[c] = 0;
        }
        regions.push_back(far);

        // ac(x - c_j) = ac(x - c1) - (c_j - c1) when v(x - c1) = 0 avoids all residues.
        std::vector<Rat> avoid;
        detail::Region disc{c1, 0, 0, nullptr, {}, {}};
        for (const auto& c : centers) {
            disc.fixed[c] = std::nullopt;
            disc.shift[c] = -(c - c1);
            if (c != c1) avoid.push_back(c - c1);
        }
        disc.base = classes::units_except(avoid, thr);
        regions.push_back(disc);

        for (const auto& ci : centers) {
            detail::Region ball{ci, 1, std::nullopt, classes::units(), {}, {}};
            for (const auto& c : centers) {
                if (c == ci) {
                    ball.fixed[c] = std::nullopt;
                    ball.shift[c] = 0;
                } else {
                    ball.fixed[c] = ci - c;
                }
            }
            regions.push_back(ball);
        }
    }

    for (const auto& g : regions) detail::cells_of_region(detail::specialize(s, g), g, out.cells);
    for (const auto& c : centers) {
        ClassRef guard = detail::point_guard(s, c);
        if (guard->id != "empty") out.cells.push_back(Cell::singleton(c, guard));
    }
    for (const auto& c : out.cells) thr = std::max(thr, c.threshold());
    out.threshold = thr;
    return out;
}

/// Exact measure of a DefSet via its decomposition.
inline MotivicValue measure_set(const DefSet& s) {
    Decomposition d = decompose(s);
    return measure_cells(d.cells).with_threshold(d.threshold);
}

} // namespace motive
