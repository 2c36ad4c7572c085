#pragma once

// Motivic values: finite sums of (rational function in q) x (product of
// residue-class counts), normalized so structural equality is meaningful.

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "motive/ratfunc.hpp"
#include "motive/residue_class.hpp"

namespace motive {

class MotivicValue {
public:
    /// Class multiset, sorted by id. Only oracle-only classes appear here.
    using Classes = std::vector<ClassRef>;

    struct Term {
        Classes classes;
        RatFuncQ coeff;
    };

    MotivicValue() = default;
    MotivicValue(const RatFuncQ& c) { // NOLINT
        if (!c.is_zero()) terms_.emplace(Key{}, Term{{}, c});
    }
    MotivicValue(const Rat& c) : MotivicValue(RatFuncQ(c)) {} // NOLINT
    MotivicValue(int c) : MotivicValue(RatFuncQ(c)) {}        // NOLINT

    /// The count #Z as a motivic value. Polynomial-count classes are
    /// folded into the coefficient immediately.
    static MotivicValue count_of(const ClassRef& z) {
        MotivicValue r;
        r.threshold_ = z->threshold;
        if (z->polynomial_count) {
            if (!z->polynomial_count->is_zero())
                r.terms_.emplace(Key{}, Term{{}, RatFuncQ(*z->polynomial_count)});
            return r;
        }
        r.terms_.emplace(Key{z->id}, Term{{z}, RatFuncQ(1)});
        return r;
    }

    static MotivicValue q_power(long k) { return MotivicValue(RatFuncQ::q_power(k)); }

    bool is_zero() const { return terms_.empty(); }
    std::uint64_t threshold() const { return threshold_; }
    std::vector<Term> terms() const {
        std::vector<Term> out;
        for (const auto& [k, t] : terms_) out.push_back(t);
        return out;
    }

    /// Raises the recorded validity threshold.
    MotivicValue with_threshold(std::uint64_t t) const {
        MotivicValue r = *this;
        r.threshold_ = std::max(r.threshold_, t);
        return r;
    }

    /// The coefficient of the class-free term, or zero.
    RatFuncQ constant_part() const {
        auto it = terms_.find(Key{});
        return it == terms_.end() ? RatFuncQ() : it->second.coeff;
    }

    /// True if no class symbols remain, i.e. the value is a rational function of q.
    bool is_rational() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

    friend MotivicValue operator+(const MotivicValue& a, const MotivicValue& b) {
        MotivicValue r = a;
        r.threshold_ = std::max(a.threshold_, b.threshold_);
        for (const auto& [k, t] : b.terms_) r.add_term(k, t);
        return r;
    }
    friend MotivicValue operator-(const MotivicValue& a) {
        MotivicValue r = a;
        for (auto& [k, t] : r.terms_) t.coeff = -t.coeff;
        return r;
    }
    friend MotivicValue operator-(const MotivicValue& a, const MotivicValue& b) { return a + (-b); }
    friend MotivicValue operator*(const MotivicValue& a, const MotivicValue& b) {
        MotivicValue r;
        r.threshold_ = std::max(a.threshold_, b.threshold_);
        for (const auto& [ka, ta] : a.terms_)
            for (const auto& [kb, tb] : b.terms_) {
                Classes cls = ta.classes;
                cls.insert(cls.end(), tb.classes.begin(), tb.classes.end());
                std::stable_sort(cls.begin(), cls.end(), [](const ClassRef& x, const ClassRef& y) { return x->id < y->id; });
                Key k;
                for (const auto& c : cls) k.push_back(c->id);
                r.add_term(k, Term{std::move(cls), ta.coeff * tb.coeff});
            }
        return r;
    }
    MotivicValue& operator+=(const MotivicValue& o) { return *this = *this + o; }
    MotivicValue& operator*=(const MotivicValue& o) { return *this = *this * o; }

    /// Equality of normal forms; thresholds are metadata and not compared.
    friend bool operator==(const MotivicValue& a, const MotivicValue& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        for (auto ia = a.terms_.begin(), ib = b.terms_.begin(); ia != a.terms_.end(); ++ia, ++ib)
            if (ia->first != ib->first || ia->second.coeff != ib->second.coeff) return false;
        return true;
    }
    friend bool operator!=(const MotivicValue& a, const MotivicValue& b) { return !(a == b); }

    /// Interpretation at K = Q_p: q := p, each class counted over F_p.
    Rat eval(std::uint64_t p, Budget budget = {}) const {
        if (p < threshold_)
            throw ThresholdViolation("value requires p >= " + std::to_string(threshold_) + ", got " + std::to_string(p));
        std::map<std::string, Rat> counts;
        Rat total = 0;
        Rat qv(static_cast<unsigned long>(p));
        for (const auto& [k, t] : terms_) {
            Rat term = t.coeff.eval(qv);
            for (const auto& c : t.classes) {
                auto it = counts.find(c->id);
                if (it == counts.end())
                    it = counts.emplace(c->id, Rat(static_cast<unsigned long>(brute_force_count(*c, p, budget)))).first;
                term *= it->second;
            }
            total += term;
        }
        return total;
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        for (const auto& [k, t] : terms_) {
            if (!out.empty()) out += " + ";
            std::string c = t.coeff.to_string();
            std::string cls;
            for (const auto& z : t.classes) cls += "[" + z->id + "]";
            if (cls.empty()) out += c;
            else if (t.coeff == RatFuncQ(1)) out += cls;
            else out += "(" + c + ")*" + cls;
        }
        return out;
    }

    std::string to_latex() const {
        if (terms_.empty()) return "0";
        std::string out;
        for (const auto& [k, t] : terms_) {
            if (!out.empty()) out += " + ";
            std::string c = latex(t.coeff);
            std::string cls;
            for (const auto& z : t.classes) cls += "\\#\\mathrm{" + escape_latex(z->id) + "}";
            if (cls.empty()) out += c;
            else if (t.coeff == RatFuncQ(1)) out += cls;
            else out += "\\left(" + c + "\\right)" + cls;
        }
        return out;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json terms = nlohmann::ordered_json::array();
        for (const auto& [k, t] : terms_) {
            nlohmann::ordered_json j;
            j["coeff_num"] = poly_json(t.coeff.num());
            j["coeff_den"] = poly_json(t.coeff.den());
            j["classes"] = k;
            terms.push_back(std::move(j));
        }
        nlohmann::ordered_json out;
        out["terms"] = std::move(terms);
        return out;
    }

    static nlohmann::ordered_json poly_json(const PolyQ& p) {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [e, c] : p.sparse()) j[std::to_string(e)] = motive::to_string(c);
        return j;
    }

    static std::string latex(const PolyQ& p, const std::string& var = "q") {
        if (p.is_zero()) return "0";
        std::string out;
        for (std::size_t i = p.coeffs().size(); i-- > 0;) {
            const Rat& c = p.coeffs()[i];
            if (c == 0) continue;
            Rat mag = abs(c);
            out += out.empty() ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
            if (mag != 1 || i == 0) {
                if (mag.get_den() == 1) out += mag.get_num().get_str();
                else out += "\\tfrac{" + mag.get_num().get_str() + "}{" + mag.get_den().get_str() + "}";
            }
            if (i > 0) out += var;
            if (i > 1) out += "^{" + std::to_string(i) + "}";
        }
        return out;
    }

    static std::string latex(const RatFuncQ& f) {
        if (f.is_polynomial()) return latex(f.num());
        return "\\frac{" + latex(f.num()) + "}{" + latex(f.den()) + "}";
    }

    static std::string escape_latex(const std::string& s) {
        std::string out;
        for (char ch : s) {
            if (ch == '\\' || ch == '{' || ch == '}' || ch == '&' || ch == '#' || ch == '_' || ch == '%' || ch == '$')
                out += std::string("\\") + (ch == '\\' ? "setminus " : std::string(1, ch));
            else out += ch;
        }
        return out;
    }

private:
    using Key = std::vector<std::string>;

    void add_term(const Key& k, const Term& t) {
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            if (!t.coeff.is_zero()) terms_.emplace(k, t);
            return;
        }
        it->second.coeff = it->second.coeff + t.coeff;
        if (it->second.coeff.is_zero()) terms_.erase(it);
    }

    std::map<Key, Term> terms_;
    std::uint64_t threshold_ = 2;
};

inline MotivicValue mv_add(const MotivicValue& a, const MotivicValue& b) { return a + b; }
inline MotivicValue mv_mul(const MotivicValue& a, const MotivicValue& b) { return a * b; }
inline Rat mv_eval(const MotivicValue& a, std::uint64_t p, Budget budget = {}) { return a.eval(p, budget); }

} // namespace motive
