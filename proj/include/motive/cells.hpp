#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "motive/motivic.hpp"

namespace motive {

/// Singleton {c} or annular cell {c + x : vmin < v(x) < vmax,
/// v(x) = residue mod modulus, ac(x) in ac}. Bounds are exclusive; an absent
/// vmin means -infinity and an absent vmax +infinity.
struct Cell {
    enum class Kind { Singleton, Annular };

    Kind kind = Kind::Annular;
    Rat center;
    std::optional<std::int64_t> vmin;
    std::optional<std::int64_t> vmax;
    std::int64_t modulus = 1;
    std::int64_t residue = 0;
    ClassRef ac = classes::units();
    /// Singletons only: the point belongs to the set iff this class is
    /// nonempty (p-dependent membership); units means unconditionally.
    ClassRef guard = classes::units();

    static Cell singleton(const Rat& c, ClassRef guard = classes::units()) {
        Cell cell;
        cell.kind = Kind::Singleton;
        cell.center = c;
        cell.guard = std::move(guard);
        return cell;
    }

    static Cell annular(const Rat& c, std::optional<std::int64_t> vmin, std::optional<std::int64_t> vmax,
                        std::int64_t modulus = 1, std::int64_t residue = 0, ClassRef ac = classes::units(),
                        bool allow_empty = false) {
        if (modulus < 1) throw InvalidArgument("cell modulus must be >= 1");
        if (residue < 0 || residue >= modulus) throw InvalidArgument("cell residue must lie in [0, modulus)");
        if (!allow_empty && vmin && vmax && *vmin >= *vmax)
            throw InvalidArgument("empty cell: vmin " + std::to_string(*vmin) + " >= vmax " + std::to_string(*vmax));
        if (!ac->nonzero) ac = classes::intersect(classes::units(), ac);
        Cell cell;
        cell.center = c;
        cell.vmin = vmin;
        cell.vmax = vmax;
        cell.modulus = modulus;
        cell.residue = residue;
        cell.ac = std::move(ac);
        return cell;
    }

    bool is_singleton() const { return kind == Kind::Singleton; }

    /// Least admissible valuation, if vmin is finite.
    std::optional<std::int64_t> first_shell() const {
        if (!vmin) return std::nullopt;
        return *vmin + 1 + mod_floor(residue - (*vmin + 1), modulus);
    }

    /// True if no valuation satisfies the bounds and congruence, or the
    /// ac class is the empty class.
    bool is_empty() const {
        if (is_singleton()) return guard->id == "empty";
        if (ac->id == "empty") return true;
        if (vmin && vmax) return *first_shell() >= *vmax;
        return false;
    }

    bool admits(std::int64_t r) const {
        if (vmin && r <= *vmin) return false;
        if (vmax && r >= *vmax) return false;
        return mod_floor(r - residue, modulus) == 0;
    }

    std::uint64_t threshold() const {
        std::uint64_t t = is_singleton() ? guard->threshold : ac->threshold;
        Int m = max_prime_factor(center.get_den());
        if (m != 0) t = std::max<std::uint64_t>(t, to_int64(m) + 1);
        return t;
    }

    friend bool operator==(const Cell& a, const Cell& b) {
        return a.kind == b.kind && a.center == b.center && a.vmin == b.vmin && a.vmax == b.vmax &&
               a.modulus == b.modulus && a.residue == b.residue && a.ac->id == b.ac->id && a.guard->id == b.guard->id;
    }

    std::string to_string() const {
        std::string c = motive::to_string(center);
        if (is_singleton()) return "{" + c + "}" + (guard->id == "units" ? "" : " if " + guard->id + " nonempty");
        std::string out = "{" + c + " + x : ";
        out += vmin ? std::to_string(*vmin) : "-inf";
        out += " < v(x) < ";
        out += vmax ? std::to_string(*vmax) : "inf";
        if (modulus > 1) out += ", v(x) = " + std::to_string(residue) + " mod " + std::to_string(modulus);
        out += ", ac(x) in " + ac->id + "}";
        return out;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["kind"] = is_singleton() ? "singleton" : "annular";
        j["center"] = motive::to_string(center);
        if (is_singleton()) {
            j["guard"] = guard->id;
            return j;
        }
        j["vmin"] = vmin ? nlohmann::ordered_json(*vmin) : nlohmann::ordered_json(nullptr);
        j["vmax"] = vmax ? nlohmann::ordered_json(*vmax) : nlohmann::ordered_json(nullptr);
        j["modulus"] = modulus;
        j["residue"] = residue;
        j["ac_class"] = ac->id;
        return j;
    }
};

/// Sum of q^{-r-1} over r = r0, r0 + m, ... below vmax (all r >= r0 when vmax is absent).
inline RatFuncQ shell_sum(std::int64_t r0, std::int64_t m, std::optional<std::int64_t> vmax) {
    // q^{-r0-1} / (1 - q^{-m}) = q^{m-r0-1} / (q^m - 1)
    PolyQ qm1 = PolyQ::monomial(1, static_cast<std::size_t>(m)) - PolyQ(1);
    RatFuncQ head = RatFuncQ::q_power(m - r0 - 1) / RatFuncQ(qm1);
    if (!vmax) return head;
    if (r0 >= *vmax) return {};
    std::int64_t terms = div_ceil(*vmax - r0, m);
    return head * (RatFuncQ(1) - RatFuncQ::q_power(-m * terms));
}

/// Exact measure of a cell.
inline MotivicValue measure_cell(const Cell& c) {
    if (c.is_singleton() || c.is_empty()) return MotivicValue().with_threshold(c.threshold());
    if (!c.vmin) throw InfiniteMeasure("cell " + c.to_string() + " has infinite measure (no lower valuation bound)");
    RatFuncQ s = shell_sum(*c.first_shell(), c.modulus, c.vmax);
    return (MotivicValue::count_of(c.ac) * MotivicValue(s)).with_threshold(c.threshold());
}

inline MotivicValue measure_cells(const std::vector<Cell>& cells) {
    MotivicValue total;
    for (const auto& c : cells) total += measure_cell(c);
    return total;
}

/// A constraint on v(x) alone, as used by the n-th power constructor.
struct ValuationConstraint {
    enum class Kind { Less, LessEq, Equal, GreaterEq, Greater, Congruent };
    Kind kind;
    std::int64_t value = 0;   // bound, or residue for Congruent
    std::int64_t modulus = 1; // Congruent only

    /// Whether v(0) = +infinity satisfies the constraint.
    bool holds_at_infinity() const { return kind == Kind::GreaterEq || kind == Kind::Greater; }
};

struct NthPowerSpec {
    unsigned n = 2;
    std::vector<ValuationConstraint> constraints;
};

struct CellList {
    std::vector<Cell> cells;
    std::uint64_t threshold = 2;
};

/// Nonzero n-th powers (n | v(x), ac(x) an n-th power; valid for p > n)
/// restricted by the range constraints, plus {0} when 0 satisfies them.
inline CellList nth_power_cells(const NthPowerSpec& spec) {
    if (spec.n < 2) throw InvalidArgument("n-th power cells need n >= 2");
    std::optional<std::int64_t> lo, hi; // exclusive
    std::int64_t m = spec.n, lam = 0;
    bool consistent = true;
    bool zero_in = true;
    for (const auto& k : spec.constraints) {
        zero_in = zero_in && k.holds_at_infinity();
        auto raise_lo = [&](std::int64_t v) { lo = lo ? std::max(*lo, v) : v; };
        auto lower_hi = [&](std::int64_t v) { hi = hi ? std::min(*hi, v) : v; };
        switch (k.kind) {
        case ValuationConstraint::Kind::Less: lower_hi(k.value); break;
        case ValuationConstraint::Kind::LessEq: lower_hi(k.value + 1); break;
        case ValuationConstraint::Kind::Equal:
            raise_lo(k.value - 1);
            lower_hi(k.value + 1);
            break;
        case ValuationConstraint::Kind::GreaterEq: raise_lo(k.value - 1); break;
        case ValuationConstraint::Kind::Greater: raise_lo(k.value); break;
        case ValuationConstraint::Kind::Congruent: {
            if (k.modulus < 1) throw InvalidArgument("congruence modulus must be >= 1");
            // Merge r = lam (mod m) with r = value (mod modulus).
            std::int64_t g = std::gcd(m, k.modulus);
            std::int64_t target = mod_floor(k.value, k.modulus);
            if (mod_floor(target - lam, g) != 0) {
                consistent = false;
                break;
            }
            std::int64_t l = m / g * k.modulus;
            std::int64_t r = lam;
            while (mod_floor(r - target, k.modulus) != 0) r += m;
            m = l;
            lam = mod_floor(r, m);
            break;
        }
        }
    }
    CellList out;
    out.threshold = spec.n + 1;
    if (zero_in) out.cells.push_back(Cell::singleton(0));
    if (!consistent) return out;
    Cell c = Cell::annular(0, lo, hi, m, lam, classes::power(spec.n), true);
    if (!c.is_empty()) out.cells.push_back(c);
    return out;
}

/// Affine bound s -> slope * s + offset; must be an integer on the
/// parameters where it is used.
struct AffineBound {
    Rat slope = 0;
    Rat offset = 0;
    std::int64_t at(std::int64_t s) const {
        Rat v = slope * Rat(static_cast<long>(s)) + offset;
        if (!is_integer(v)) throw InvalidArgument("family bound is not an integer at s = " + std::to_string(s));
        return to_int64(v.get_num());
    }
};

/// Annular cell whose exclusive valuation bounds depend affinely on s >= 0.
struct CellFamily {
    Rat center;
    std::optional<AffineBound> vmin;
    std::optional<AffineBound> vmax;
    std::int64_t modulus = 1;
    std::int64_t residue = 0;
    ClassRef ac = classes::units();

    Cell at(std::int64_t s) const {
        std::optional<std::int64_t> lo, hi;
        if (vmin) lo = vmin->at(s);
        if (vmax) hi = vmax->at(s);
        return Cell::annular(center, lo, hi, modulus, residue, ac, true);
    }
};

} // namespace motive
