#pragma once

// Boolean combinations of valuation, congruence, angular-component and
// point atoms around rational centers.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "motive/residue_class.hpp"

namespace motive {

enum class Cmp { Lt, Le, Eq, Ge, Gt };

inline bool compare(std::int64_t a, Cmp op, std::int64_t b) {
    switch (op) {
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Eq: return a == b;
    case Cmp::Ge: return a >= b;
    case Cmp::Gt: return a > b;
    }
    return false;
}

inline const char* cmp_symbol(Cmp op) {
    switch (op) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Eq: return "==";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
    }
    return "?";
}

/// The term x - c as written. `spelling` keeps the literal so that equal
/// centers written differently can be told apart.
struct Center {
    Rat value;
    std::string spelling;

    static Center of(const Rat& c) { return {c, to_string(c)}; }
};

struct DefSet {
    enum class Kind { True, False, Val, Cong, Ac, Eq, And, Or, Not };

    Kind kind = Kind::True;
    Center center;
    Cmp cmp = Cmp::Ge;
    std::int64_t bound = 0;   // Val: gamma; Cong: residue
    std::int64_t modulus = 1; // Cong
    ClassRef cls;             // Ac
    std::vector<DefSet> args;

    static DefSet truth(bool v) {
        DefSet d;
        d.kind = v ? Kind::True : Kind::False;
        return d;
    }
    static DefSet val(Center c, Cmp op, std::int64_t g) {
        DefSet d;
        d.kind = Kind::Val;
        d.center = std::move(c);
        d.cmp = op;
        d.bound = g;
        return d;
    }
    static DefSet val(const Rat& c, Cmp op, std::int64_t g) { return val(Center::of(c), op, g); }
    static DefSet cong(Center c, std::int64_t lambda, std::int64_t m) {
        if (m < 1) throw InvalidArgument("congruence modulus must be >= 1");
        DefSet d;
        d.kind = Kind::Cong;
        d.center = std::move(c);
        d.bound = lambda;
        d.modulus = m;
        return d;
    }
    static DefSet cong(const Rat& c, std::int64_t lambda, std::int64_t m) { return cong(Center::of(c), lambda, m); }
    static DefSet ac(Center c, ClassRef z) {
        if (z->arity != 1) throw UnsupportedFormula("ac atom needs an arity-1 class, got " + z->id);
        DefSet d;
        d.kind = Kind::Ac;
        d.center = std::move(c);
        d.cls = std::move(z);
        return d;
    }
    static DefSet ac(const Rat& c, ClassRef z) { return ac(Center::of(c), std::move(z)); }
    static DefSet point(Center c) {
        DefSet d;
        d.kind = Kind::Eq;
        d.center = std::move(c);
        return d;
    }
    static DefSet point(const Rat& c) { return point(Center::of(c)); }
    static DefSet conj(std::vector<DefSet> a) { return combine(Kind::And, std::move(a)); }
    static DefSet disj(std::vector<DefSet> a) { return combine(Kind::Or, std::move(a)); }
    static DefSet negate(DefSet a) {
        DefSet d;
        d.kind = Kind::Not;
        d.args.push_back(std::move(a));
        return d;
    }

    bool is_atom() const { return kind == Kind::Val || kind == Kind::Cong || kind == Kind::Ac || kind == Kind::Eq; }

    void collect_centers(std::vector<Center>& out) const {
        if (is_atom()) out.push_back(center);
        for (const auto& a : args) a.collect_centers(out);
    }

    std::size_t atom_count() const {
        std::size_t n = is_atom() ? 1 : 0;
        for (const auto& a : args) n += a.atom_count();
        return n;
    }

    /// Evaluates the set at a point described by its distances to centers:
    /// `dist(c)` returns v(x - c) (nullopt for +infinity) and `ac_in(c, Z)`
    /// decides ac(x - c) in Z.
    template <typename Dist, typename AcIn>
    bool eval(const Dist& dist, const AcIn& ac_in) const {
        switch (kind) {
        case Kind::True: return true;
        case Kind::False: return false;
        case Kind::Val: {
            std::optional<std::int64_t> d = dist(center.value);
            if (!d) return cmp == Cmp::Ge || cmp == Cmp::Gt;
            return compare(*d, cmp, bound);
        }
        case Kind::Cong: {
            std::optional<std::int64_t> d = dist(center.value);
            return d && mod_floor(*d - bound, modulus) == 0;
        }
        case Kind::Ac: return ac_in(center.value, *cls);
        case Kind::Eq: return !dist(center.value).has_value();
        case Kind::And:
            for (const auto& a : args)
                if (!a.eval(dist, ac_in)) return false;
            return true;
        case Kind::Or:
            for (const auto& a : args)
                if (a.eval(dist, ac_in)) return true;
            return false;
        case Kind::Not: return !args[0].eval(dist, ac_in);
        }
        return false;
    }

    /// DSL text; reparses to the same tree.
    std::string to_string() const {
        switch (kind) {
        case Kind::True: return "true";
        case Kind::False: return "false";
        case Kind::Val: return "v(" + lin() + ") " + cmp_symbol(cmp) + " " + std::to_string(bound);
        case Kind::Cong: return "v(" + lin() + ") == " + std::to_string(bound) + " mod " + std::to_string(modulus);
        case Kind::Ac: return "ac(" + lin() + ") in " + cls->id;
        case Kind::Eq: return "x == " + center.spelling;
        case Kind::And:
        case Kind::Or: {
            std::string out;
            for (const auto& a : args) {
                if (!out.empty()) out += kind == Kind::And ? " && " : " || ";
                out += a.is_atom() ? a.to_string() : "(" + a.to_string() + ")";
            }
            return out;
        }
        case Kind::Not: return "!" + (args[0].is_atom() ? args[0].to_string() : "(" + args[0].to_string() + ")");
        }
        return "?";
    }

    friend bool operator==(const DefSet& a, const DefSet& b) {
        if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
        switch (a.kind) {
        case Kind::Val:
            if (a.cmp != b.cmp || a.bound != b.bound) return false;
            [[fallthrough]];
        case Kind::Eq:
            if (a.center.value != b.center.value || a.center.spelling != b.center.spelling) return false;
            break;
        case Kind::Cong:
            if (a.bound != b.bound || a.modulus != b.modulus) return false;
            if (a.center.value != b.center.value || a.center.spelling != b.center.spelling) return false;
            break;
        case Kind::Ac:
            if (a.cls->id != b.cls->id) return false;
            if (a.center.value != b.center.value || a.center.spelling != b.center.spelling) return false;
            break;
        default: break;
        }
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (!(a.args[i] == b.args[i])) return false;
        return true;
    }

private:
    static DefSet combine(Kind k, std::vector<DefSet> a) {
        if (a.empty()) return truth(k == Kind::And);
        if (a.size() == 1) return std::move(a.front());
        DefSet d;
        d.kind = k;
        d.args = std::move(a);
        return d;
    }

    /// "x", "x - c" or "x + c" using the center's spelling.
    std::string lin() const {
        if (center.spelling == "0" && center.value == 0) return "x";
        if (!center.spelling.empty() && center.spelling[0] == '-') return "x + " + center.spelling.substr(1);
        return "x - " + center.spelling;
    }
};

} // namespace motive
