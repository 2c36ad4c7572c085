#pragma once

// Definable subsets of the residue field: quantifier-light ring formulas
// evaluated over F_p, and the residue classes built from them.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "motive/mpoly.hpp"
#include "motive/poly.hpp"

namespace motive {

/// Ring-language formula over the residue field. Free variables are the
/// slots 0..arity-1; an Exists node binds `bound` consecutive slots
/// starting at `base`.
class Formula {
public:
    enum class Op { True, False, Zero, NonZero, And, Or, Not, Exists };

    static Formula truth(bool v) { return Formula(v ? Op::True : Op::False); }
    static Formula zero(MPoly p) {
        Formula f(Op::Zero);
        f.poly_ = std::move(p);
        return f;
    }
    static Formula nonzero(MPoly p) {
        Formula f(Op::NonZero);
        f.poly_ = std::move(p);
        return f;
    }
    static Formula conj(std::vector<Formula> args) {
        if (args.empty()) return truth(true);
        if (args.size() == 1) return std::move(args.front());
        Formula f(Op::And);
        f.args_ = std::move(args);
        return f;
    }
    static Formula disj(std::vector<Formula> args) {
        if (args.empty()) return truth(false);
        if (args.size() == 1) return std::move(args.front());
        Formula f(Op::Or);
        f.args_ = std::move(args);
        return f;
    }
    static Formula negate(Formula a) {
        Formula f(Op::Not);
        f.args_.push_back(std::move(a));
        return f;
    }
    static Formula exists(std::size_t base, std::size_t count, Formula body) {
        Formula f(Op::Exists);
        f.base_ = base;
        f.bound_ = count;
        f.args_.push_back(std::move(body));
        return f;
    }

    Op op() const { return op_; }
    const MPoly& poly() const { return poly_; }
    const std::vector<Formula>& args() const { return args_; }
    std::size_t base() const { return base_; }
    std::size_t bound() const { return bound_; }

    /// Number of variable slots needed to evaluate (free plus bound).
    std::size_t slots() const {
        std::size_t n = poly_.arity();
        if (op_ == Op::Exists) n = std::max(n, base_ + bound_);
        for (const auto& a : args_) n = std::max(n, a.slots());
        return n;
    }

    /// Replaces free variable `var` by a polynomial in the free variables.
    Formula substitute(std::size_t var, const MPoly& value) const {
        Formula f = *this;
        if (op_ == Op::Zero || op_ == Op::NonZero) f.poly_ = poly_.substitute(var, value);
        for (auto& a : f.args_) a = a.substitute(var, value);
        return f;
    }

    std::string to_string(std::size_t arity = 1) const {
        auto names = variable_names(arity, slots());
        return render(names);
    }

    static std::vector<std::string> variable_names(std::size_t arity, std::size_t slots) {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < std::max(slots, arity); ++i) {
            if (i < arity) names.push_back(arity == 1 ? "x" : "x" + std::to_string(i));
            else names.push_back("y" + std::to_string(i - arity + 1));
        }
        return names;
    }

    std::string render(const std::vector<std::string>& names) const {
        switch (op_) {
        case Op::True: return "true";
        case Op::False: return "false";
        case Op::Zero: return poly_.to_string(names) + " == 0";
        case Op::NonZero: return poly_.to_string(names) + " != 0";
        case Op::Not: return "!(" + args_[0].render(names) + ")";
        case Op::And:
        case Op::Or: {
            std::string out;
            for (const auto& a : args_) {
                if (!out.empty()) out += op_ == Op::And ? " && " : " || ";
                out += "(" + a.render(names) + ")";
            }
            return out;
        }
        case Op::Exists: {
            std::string vars;
            for (std::size_t i = 0; i < bound_; ++i) {
                if (i) vars += ", ";
                vars += names.at(base_ + i);
            }
            return "exists " + vars + ": (" + args_[0].render(names) + ")";
        }
        }
        return "?";
    }

private:
    explicit Formula(Op op) : op_(op) {}

    Op op_;
    MPoly poly_;
    std::vector<Formula> args_;
    std::size_t base_ = 0;
    std::size_t bound_ = 0;
};

/// A Formula compiled for evaluation over one prime field.
class CompiledFormula {
public:
    CompiledFormula(const Formula& f, std::uint64_t p) : p_(p), root_(build(f)), slots_(f.slots()) {}

    std::uint64_t prime() const { return p_; }
    std::size_t slots() const { return slots_; }

    /// Evaluates with `point` holding at least slots() entries; bound slots
    /// are overwritten during evaluation.
    bool eval(std::vector<std::uint64_t>& point) const { return eval_node(root_, point); }

private:
    struct Node {
        Formula::Op op;
        std::optional<ModPoly> poly;
        std::vector<Node> args;
        std::size_t base = 0;
        std::size_t bound = 0;
    };

    Node build(const Formula& f) const {
        Node n{f.op(), std::nullopt, {}, f.base(), f.bound()};
        if (f.op() == Formula::Op::Zero || f.op() == Formula::Op::NonZero) n.poly.emplace(f.poly(), p_);
        for (const auto& a : f.args()) n.args.push_back(build(a));
        return n;
    }

    bool eval_node(const Node& n, std::vector<std::uint64_t>& pt) const {
        switch (n.op) {
        case Formula::Op::True: return true;
        case Formula::Op::False: return false;
        case Formula::Op::Zero: return n.poly->eval(pt.data()) == 0;
        case Formula::Op::NonZero: return n.poly->eval(pt.data()) != 0;
        case Formula::Op::Not: return !eval_node(n.args[0], pt);
        case Formula::Op::And:
            for (const auto& a : n.args)
                if (!eval_node(a, pt)) return false;
            return true;
        case Formula::Op::Or:
            for (const auto& a : n.args)
                if (eval_node(a, pt)) return true;
            return false;
        case Formula::Op::Exists: return exists_from(n, pt, 0);
        }
        return false;
    }

    bool exists_from(const Node& n, std::vector<std::uint64_t>& pt, std::size_t k) const {
        if (k == n.bound) return eval_node(n.args[0], pt);
        for (std::uint64_t v = 0; v < p_; ++v) {
            pt[n.base + k] = v;
            if (exists_from(n, pt, k + 1)) return true;
        }
        return false;
    }

    std::uint64_t p_;
    Node root_;
    std::size_t slots_;
};

/// A definable subset Z of RF^arity, known to the engine by its id.
/// Classes with a polynomial count carry h with #Z(F_p) = h(p) for every
/// prime p >= threshold; all others are counted by enumeration.
struct ResidueClass {
    std::string id;
    std::size_t arity = 1;
    Formula definition = Formula::truth(true);
    std::optional<PolyQ> polynomial_count;
    std::uint64_t threshold = 2;
    /// Arity-1 classes only: the definition implies x != 0.
    bool nonzero = false;

    bool oracle_only() const { return !polynomial_count.has_value(); }
};

using ClassRef = std::shared_ptr<const ResidueClass>;

inline bool same_class(const ClassRef& a, const ClassRef& b) { return a->id == b->id; }

/// Enumeration budget in candidate evaluations (default 10^8).
struct Budget {
    std::uint64_t limit = 100'000'000ULL;
};

/// Exhaustive count of the class over F_p^arity.
inline std::uint64_t brute_force_count(const ResidueClass& z, std::uint64_t p, Budget budget = {}) {
    if (p < z.threshold)
        throw ThresholdViolation("class " + z.id + " requires p >= " + std::to_string(z.threshold));
    // Cost estimate includes the existential search.
    long double cost = 1;
    for (std::size_t i = 0; i < z.definition.slots(); ++i) cost *= static_cast<long double>(p);
    if (cost > static_cast<long double>(budget.limit))
        throw BudgetExceeded("counting class " + z.id + " over F_" + std::to_string(p) + " exceeds budget");
    CompiledFormula cf(z.definition, p);
    std::vector<std::uint64_t> pt(std::max<std::size_t>(cf.slots(), z.arity), 0);
    std::uint64_t count = 0;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == z.arity) {
            if (cf.eval(pt)) ++count;
            return;
        }
        for (std::uint64_t v = 0; v < p; ++v) {
            pt[i] = v;
            rec(i + 1);
        }
    };
    rec(0);
    return count;
}

/// Membership table of an arity-1 class over F_p.
inline std::vector<bool> membership_table(const ResidueClass& z, std::uint64_t p) {
    if (z.arity != 1) throw UnsupportedFormula("membership table needs an arity-1 class");
    if (p < z.threshold)
        throw ThresholdViolation("class " + z.id + " requires p >= " + std::to_string(z.threshold));
    CompiledFormula cf(z.definition, p);
    std::vector<std::uint64_t> pt(std::max<std::size_t>(cf.slots(), 1), 0);
    std::vector<bool> table(p);
    for (std::uint64_t v = 0; v < p; ++v) {
        pt[0] = v;
        table[v] = cf.eval(pt);
    }
    return table;
}

namespace classes {

namespace detail {
inline MPoly x() { return MPoly::var(0); }
inline MPoly y() { return MPoly::var(1); }

inline ClassRef make(ResidueClass z) { return std::make_shared<const ResidueClass>(std::move(z)); }

inline std::uint64_t prime_bound(const Rat& r) {
    Int m = max_prime_factor(r);
    return m == 0 ? 0 : to_int64(m) + 1;
}
} // namespace detail

/// The whole residue field; #RF = q.
inline ClassRef rf() {
    static const ClassRef z = detail::make({"rf", 1, Formula::truth(true), PolyQ::x(), 2, false});
    return z;
}

/// Nonzero residues; #units = q - 1.
inline ClassRef units() {
    static const ClassRef z =
        detail::make({"units", 1, Formula::nonzero(detail::x()), PolyQ(std::vector<Rat>{-1, 1}), 2, true});
    return z;
}

/// The singleton {1}.
inline ClassRef one() {
    static const ClassRef z = detail::make({"one", 1, Formula::zero(detail::x() - MPoly(1)), PolyQ(1), 2, true});
    return z;
}

inline ClassRef empty() {
    static const ClassRef z = detail::make({"empty", 1, Formula::truth(false), PolyQ(), 2, true});
    return z;
}

/// Nonzero n-th powers. Only n = 2 has a polynomial count, (q-1)/2 for odd p.
inline ClassRef power(unsigned n) {
    if (n < 2) throw InvalidArgument("n-th power class needs n >= 2");
    Formula def = Formula::conj({Formula::exists(1, 1, Formula::zero(detail::y().pow(n) - detail::x())),
                                 Formula::nonzero(detail::x())});
    if (n == 2) {
        static const ClassRef sq =
            detail::make({"sq", 1, def, PolyQ(std::vector<Rat>{make_rat(-1, 2), make_rat(1, 2)}), 3, true});
        return sq;
    }
    return detail::make({"pow" + std::to_string(n), 1, def, std::nullopt, n + 1, true});
}

inline ClassRef squares() { return power(2); }

/// Nonzero non-squares; kept symbolic even though #nsq = #sq for odd p.
inline ClassRef non_squares() {
    static const ClassRef z = detail::make(
        {"nsq", 1,
         Formula::conj({Formula::nonzero(detail::x()),
                        Formula::negate(Formula::exists(1, 1, Formula::zero(detail::y().pow(2) - detail::x())))}),
         std::nullopt, 3, true});
    return z;
}

/// Units with finitely many further residues removed; the points are
/// pairwise distinct and nonzero for every p >= threshold.
inline ClassRef units_except(std::vector<Rat> points, std::uint64_t threshold) {
    if (points.empty()) return units();
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    std::vector<Formula> parts{Formula::nonzero(detail::x())};
    std::string id = "units\\{";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i] == 0) throw InvalidArgument("units_except: point 0 is not a unit");
        parts.push_back(Formula::nonzero(detail::x() - MPoly(points[i])));
        id += (i ? "," : "") + to_string(points[i]);
        threshold = std::max(threshold, detail::prime_bound(points[i]));
        for (std::size_t j = 0; j < i; ++j) threshold = std::max(threshold, detail::prime_bound(points[i] - points[j]));
    }
    id += "}";
    Rat k = static_cast<unsigned long>(points.size());
    return detail::make(
        {id, 1, Formula::conj(std::move(parts)), PolyQ(std::vector<Rat>{Rat(-1) - k, 1}), threshold, true});
}

/// Intersection.
inline ClassRef intersect(ClassRef a, ClassRef b) {
    if (a->arity != 1 || b->arity != 1) throw UnsupportedFormula("class intersection needs arity-1 classes");
    if (a->id > b->id) std::swap(a, b);
    if (same_class(a, b)) return a;
    if (a->id == "empty" || b->id == "empty") return empty();
    if (a->id == "rf") return b;
    if (b->id == "rf") return a;
    if (a->id == "units" && b->nonzero) return b;
    if (b->id == "units" && a->nonzero) return a;
    return detail::make({"(" + a->id + "&" + b->id + ")", 1, Formula::conj({a->definition, b->definition}),
                         std::nullopt, std::max(a->threshold, b->threshold), a->nonzero || b->nonzero});
}

/// Union.
inline ClassRef unite(ClassRef a, ClassRef b) {
    if (a->arity != 1 || b->arity != 1) throw UnsupportedFormula("class union needs arity-1 classes");
    if (a->id > b->id) std::swap(a, b);
    if (same_class(a, b)) return a;
    if (a->id == "empty") return b;
    if (b->id == "empty") return a;
    if (a->id == "rf" || b->id == "rf") return rf();
    if (a->id == "units" && b->nonzero) return a;
    if (b->id == "units" && a->nonzero) return b;
    return detail::make({"(" + a->id + "|" + b->id + ")", 1, Formula::disj({a->definition, b->definition}),
                         std::nullopt, std::max(a->threshold, b->threshold), a->nonzero && b->nonzero});
}

/// Complement inside the units: {t != 0 : t not in a}.
inline ClassRef units_minus(const ClassRef& a) {
    if (a->arity != 1) throw UnsupportedFormula("class complement needs an arity-1 class");
    if (a->id == "units" || a->id == "rf") return empty();
    if (a->id == "empty") return units();
    return detail::make({"~" + a->id, 1,
                         Formula::conj({Formula::nonzero(detail::x()), Formula::negate(a->definition)}),
                         std::nullopt, a->threshold, true});
}

/// Preimage {t : u*t + b in a}. With u = 0 the result is either everything
/// or nothing, depending (possibly on p) on whether b lies in a.
inline ClassRef preimage_affine(const ClassRef& a, const Rat& u, const Rat& b) {
    if (a->arity != 1) throw UnsupportedFormula("affine preimage needs an arity-1 class");
    if (u == 1 && b == 0) return a;
    if (a->id == "rf") return rf();
    if (a->id == "empty") return empty();
    if (u != 0 && b == 0) {
        if (a->id == "units") return units();
        if (a->id == "sq" && is_perfect_power(u, 2)) return a;
        if (a->id == "nsq" && is_perfect_power(u, 2)) return a;
        if (a->id.rfind("pow", 0) == 0) {
            unsigned n = static_cast<unsigned>(std::stoul(a->id.substr(3)));
            if (is_perfect_power(u, n)) return a;
        }
    }
    if (u == 0) {
        if (b == 0 && a->nonzero) return empty();
        if (b != 0 && (a->id == "units" || (a->id == "sq" && is_perfect_power(b, 2)) ||
                       (a->id.rfind("pow", 0) == 0 && is_perfect_power(b, std::stoul(a->id.substr(3)))) ||
                       (a->id == "one" && b == 1)))
            return rf();
    }
    std::uint64_t thr = std::max({a->threshold, detail::prime_bound(u), detail::prime_bound(b)});
    std::string id;
    if (u == 0) id = "[" + to_string(b) + " in " + a->id + "]";
    else if (u == 1) id = a->id + "(t" + (b < 0 ? "-" + to_string(Rat(-b)) : "+" + to_string(b)) + ")";
    else id = a->id + "(" + to_string(u) + "*t" + (b == 0 ? "" : (b < 0 ? "-" + to_string(Rat(-b)) : "+" + to_string(b))) + ")";
    MPoly image = MPoly(u) * detail::x() + MPoly(b);
    bool nz = u != 0 && b == 0 && a->nonzero;
    // For u a unit mod p the map t -> u*t + b permutes F_p, so counts carry over.
    std::optional<PolyQ> count = u != 0 ? a->polynomial_count : std::nullopt;
    return detail::make({id, 1, a->definition.substitute(0, image), count, thr, nz});
}

/// A user-defined class; always enumerated.
inline ClassRef custom(std::string id, std::size_t arity, Formula definition, std::uint64_t threshold = 2,
                       std::optional<PolyQ> polynomial_count = std::nullopt) {
    bool nz = false;
    return detail::make({std::move(id), arity, std::move(definition), std::move(polynomial_count),
                         std::max<std::uint64_t>(threshold, 2), nz});
}

/// Built-in catalog lookup by name: rf, units, one, empty, sq, nsq, cube,
/// powN (N >= 2).
inline std::optional<ClassRef> builtin(const std::string& name) {
    if (name == "rf") return rf();
    if (name == "units") return units();
    if (name == "one") return one();
    if (name == "empty") return empty();
    if (name == "sq") return squares();
    if (name == "nsq") return non_squares();
    if (name == "cube") return power(3);
    if (name.rfind("pow", 0) == 0 && name.size() > 3 &&
        std::all_of(name.begin() + 3, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        unsigned long n = std::stoul(name.substr(3));
        if (n >= 2 && n <= 64) return power(static_cast<unsigned>(n));
    }
    return std::nullopt;
}

} // namespace classes

} // namespace motive
