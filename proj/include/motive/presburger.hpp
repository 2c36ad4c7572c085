#pragma once

// Closed forms for sums of s^a q^{e(s)} T^s with e eventually affine on
// congruence classes.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "motive/bivariate.hpp"
#include "motive/motivic.hpp"

namespace motive {

/// Integer-valued function of s >= 0: explicit values below `threshold`,
/// then slope * s + intercept on each residue class mod `modulus`.
/// Slopes may be rational as long as every value is an integer.
class StepLinear {
public:
    struct Branch {
        Rat slope;
        Rat intercept;
    };

    StepLinear() : branches_{{0, 0}} {}

    static StepLinear affine(const Rat& slope, const Rat& intercept) {
        return StepLinear(0, {}, 1, {{slope, intercept}});
    }
    static StepLinear constant(std::int64_t c) { return affine(0, c); }

    StepLinear(std::int64_t threshold, std::vector<std::int64_t> prefix, std::int64_t modulus,
               std::vector<Branch> branches)
        : threshold_(threshold), prefix_(std::move(prefix)), modulus_(modulus), branches_(std::move(branches)) {
        if (threshold_ < 0) throw InvalidArgument("step-linear threshold must be >= 0");
        if (static_cast<std::int64_t>(prefix_.size()) != threshold_)
            throw InvalidArgument("step-linear prefix must list every value below the threshold");
        if (modulus_ < 1 || static_cast<std::int64_t>(branches_.size()) != modulus_)
            throw InvalidArgument("step-linear function needs one branch per residue class");
        for (std::int64_t k = 0; k < modulus_; ++k) {
            const auto& b = branches_[static_cast<std::size_t>(k)];
            std::int64_t s = first_at_least(threshold_, k, modulus_);
            if (!is_integer(b.slope * Rat(static_cast<long>(modulus_))) ||
                !is_integer(b.slope * Rat(static_cast<long>(s)) + b.intercept))
                throw InvalidArgument("step-linear branch " + std::to_string(k) + " takes non-integer values");
        }
    }

    std::int64_t threshold() const { return threshold_; }
    const std::vector<std::int64_t>& prefix() const { return prefix_; }
    std::int64_t modulus() const { return modulus_; }
    const std::vector<Branch>& branches() const { return branches_; }

    std::int64_t operator()(std::int64_t s) const {
        if (s < 0) throw InvalidArgument("step-linear functions are defined on s >= 0");
        if (s < threshold_) return prefix_[static_cast<std::size_t>(s)];
        const auto& b = branches_[static_cast<std::size_t>(mod_floor(s, modulus_))];
        Rat v = b.slope * Rat(static_cast<long>(s)) + b.intercept;
        return to_int64(v.get_num());
    }

    static std::int64_t first_at_least(std::int64_t start, std::int64_t residue, std::int64_t m) {
        return start + mod_floor(residue - start, m);
    }

private:
    std::int64_t threshold_ = 0;
    std::vector<std::int64_t> prefix_;
    std::int64_t modulus_ = 1;
    std::vector<Branch> branches_;
};

/// Sum over s in [lo, hi] with s = residue mod modulus of s^power q^{exponent(s)} T^s.
struct SeriesTerm {
    unsigned s_power = 0;
    StepLinear q_exponent;
    std::int64_t residue = 0;
    std::int64_t modulus = 1;
    std::int64_t lo = 0;
    std::optional<std::int64_t> hi;

    void validate() const {
        if (modulus < 1) throw InvalidArgument("series congruence modulus must be >= 1");
        if (residue < 0 || residue >= modulus) throw InvalidArgument("series residue must lie in [0, modulus)");
        if (lo < 0) throw InvalidArgument("series range must start at s >= 0");
        if (hi && *hi < lo) throw InvalidArgument("series range has hi < lo");
    }

    bool admits(std::int64_t s) const {
        return s >= lo && (!hi || s <= *hi) && mod_floor(s - residue, modulus) == 0;
    }

    /// Value of the summand coefficient at s (for s admitted), as a function of q.
    RatFuncQ coefficient(std::int64_t s) const {
        Rat pw = pow_rat(Rat(static_cast<long>(s)), s_power);
        return RatFuncQ(pw) * RatFuncQ::q_power(q_exponent(s));
    }
};

/// Sum over j0 <= j <= j1 (j1 absent: infinite) of
/// P(j) q^{q_slope*j + q_offset} T^{t_offset + t_step*j}.
struct BranchSum {
    PolyQ poly;
    std::int64_t q_slope = 0;
    std::int64_t q_offset = 0;
    std::int64_t t_offset = 0;
    std::int64_t t_step = 1;
    std::int64_t j0 = 0;
    std::optional<std::int64_t> j1;

    bool empty() const { return poly.is_zero() || (j1 && *j1 < j0); }
};

namespace detail {

/// G(z) = sum_{j0 <= j <= j1} P(j) z^j as a rational function of z.
inline RatFuncQ grouped_sum(const PolyQ& p, std::int64_t j0, std::optional<std::int64_t> j1) {
    if (j0 < 0) throw InvalidArgument("grouped sum must start at j >= 0");
    PolyQ head = PolyQ::monomial(1, static_cast<std::size_t>(j0));
    PolyQ top = head;
    if (j1) top = head - PolyQ::monomial(1, static_cast<std::size_t>(*j1 + 1));
    RatFuncQ g = RatFuncQ::reduced(top, PolyQ(std::vector<Rat>{1, -1}));
    RatFuncQ acc;
    RatFuncQ cur = g;
    for (std::size_t k = 0; k < p.coeffs().size(); ++k) {
        if (k > 0) cur = RatFuncQ(PolyQ::x()) * cur.derivative();
        if (p.coeffs()[k] != 0) acc += RatFuncQ(p.coeffs()[k]) * cur;
    }
    return acc;
}

/// Substitutes z := q^a T^n into a polynomial in z, multiplied by q^{shift}
/// (shift chosen by the caller so that no negative q-power remains).
inline PolyQT substitute_monomial(const PolyQ& f, std::int64_t a, std::int64_t n, std::int64_t shift) {
    PolyQT out;
    for (std::size_t i = 0; i < f.coeffs().size(); ++i) {
        if (f.coeffs()[i] == 0) continue;
        std::int64_t qe = a * static_cast<std::int64_t>(i) + shift;
        if (qe < 0) throw InvalidArgument("internal: negative q exponent in substitution");
        out = out + PolyQT::monomial(PolyQ::monomial(f.coeffs()[i], static_cast<std::size_t>(qe)),
                                     static_cast<std::size_t>(n * static_cast<std::int64_t>(i)));
    }
    return out;
}

inline RatFuncQT q_power_t(std::int64_t k) {
    if (k >= 0) return RatFuncQT::make(PolyQT(PolyQ::monomial(1, static_cast<std::size_t>(k))), PolyQT(1));
    return RatFuncQT::make(PolyQT(1), PolyQT(PolyQ::monomial(1, static_cast<std::size_t>(-k))));
}

} // namespace detail

/// Prefix-sum polynomial: F(n) = sum_{0 <= j < n} P(j).
inline PolyQ prefix_sum_poly(const PolyQ& p) {
    // Newton forward differences: P(j) = sum c_k C(j, k), F(n) = sum c_k C(n, k+1).
    std::size_t d = p.coeffs().size();
    std::vector<Rat> vals(d);
    for (std::size_t j = 0; j < d; ++j) vals[j] = p.eval(Rat(static_cast<unsigned long>(j)));
    PolyQ out;
    for (std::size_t k = 0; k < d; ++k) {
        Rat c = vals[0];
        for (std::size_t j = 0; j + 1 < vals.size(); ++j) vals[j] = vals[j + 1] - vals[j];
        if (!vals.empty()) vals.pop_back();
        if (c == 0) continue;
        // C(n, k+1) = n (n-1) ... (n-k) / (k+1)!
        PolyQ binom(1);
        for (std::size_t i = 0; i <= k; ++i) binom *= PolyQ(std::vector<Rat>{Rat(-static_cast<long>(i)), 1});
        Int fact = 1;
        for (std::size_t i = 2; i <= k + 1; ++i) fact *= static_cast<unsigned long>(i);
        out += binom.scaled(c / Rat(fact));
    }
    return out;
}

/// Closed form in (q, T) of a branch sum. Requires t_step >= 1 when infinite.
inline RatFuncQT closed_form(const BranchSum& b) {
    if (b.empty()) return {};
    if (!b.j1 && b.t_step < 1) throw InvalidArgument("infinite branch sum needs a positive T step");
    RatFuncQ g = detail::grouped_sum(b.poly, b.j0, b.j1);
    long deg = std::max(g.num().degree(), g.den().degree());
    std::int64_t shift = b.q_slope < 0 ? -b.q_slope * deg : 0;
    PolyQT num = detail::substitute_monomial(g.num(), b.q_slope, b.t_step, shift);
    PolyQT den = detail::substitute_monomial(g.den(), b.q_slope, b.t_step, shift);
    return RatFuncQT::make(num, den) * detail::q_power_t(b.q_offset) *
           RatFuncQT::t_power(static_cast<std::size_t>(b.t_offset));
}

/// Closed form in q of the T-free branch sum; the q-series must converge
/// for every q > 1.
inline RatFuncQ closed_form_q(const BranchSum& b) {
    if (b.empty()) return {};
    if (!b.j1) {
        if (b.q_slope >= 0)
            throw Divergent("sum of q^(" + std::to_string(b.q_slope) + "*j + ...) over infinitely many j diverges");
    }
    RatFuncQ scale = RatFuncQ::q_power(b.q_offset);
    if (b.q_slope == 0) {
        PolyQ f = prefix_sum_poly(b.poly);
        Rat total = f.eval(Rat(static_cast<long>(*b.j1 + 1))) - f.eval(Rat(static_cast<long>(b.j0)));
        return RatFuncQ(total) * scale;
    }
    RatFuncQ g = detail::grouped_sum(b.poly, b.j0, b.j1);
    long deg = std::max(g.num().degree(), g.den().degree());
    std::int64_t shift = b.q_slope < 0 ? -b.q_slope * deg : 0;
    auto sub = [&](const PolyQ& f) {
        PolyQ out;
        for (std::size_t i = 0; i < f.coeffs().size(); ++i) {
            if (f.coeffs()[i] == 0) continue;
            out += PolyQ::monomial(f.coeffs()[i], static_cast<std::size_t>(b.q_slope * static_cast<std::int64_t>(i) + shift));
        }
        return out;
    };
    return RatFuncQ::reduced(sub(g.num()), sub(g.den())) * scale;
}

/// Splits a series term into branch sums, plus explicit prefix terms.
struct SeriesSplit {
    std::vector<std::pair<std::int64_t, RatFuncQ>> explicit_terms; // (s, coefficient)
    std::vector<BranchSum> branches;
};

inline SeriesSplit split_series(const SeriesTerm& t) {
    t.validate();
    SeriesSplit out;
    const StepLinear& e = t.q_exponent;
    std::int64_t head_end = e.threshold();
    if (t.hi) head_end = std::min(head_end, *t.hi + 1);
    for (std::int64_t s = t.lo; s < head_end; ++s)
        if (t.admits(s)) out.explicit_terms.emplace_back(s, t.coefficient(s));
    std::int64_t start = std::max(t.lo, e.threshold());
    if (t.hi && start > *t.hi) return out;
    for (std::int64_t mu = 0; mu < e.modulus(); ++mu) {
        // s = residue (mod modulus) and s = mu (mod e.modulus), merged by CRT.
        std::int64_t g = std::gcd(t.modulus, e.modulus());
        if (mod_floor(t.residue - mu, g) != 0) continue;
        std::int64_t big = t.modulus / g * e.modulus();
        std::int64_t sigma = t.residue;
        while (mod_floor(sigma - mu, e.modulus()) != 0) sigma += t.modulus;
        std::int64_t t0 = StepLinear::first_at_least(start, mod_floor(sigma, big), big);
        if (t.hi && t0 > *t.hi) continue;
        const auto& br = e.branches()[static_cast<std::size_t>(mu)];
        BranchSum b;
        // (t0 + big*j)^a
        b.poly = PolyQ(std::vector<Rat>{Rat(static_cast<long>(t0)), Rat(static_cast<long>(big))}).pow(t.s_power);
        b.q_slope = to_int64(Rat(br.slope * Rat(static_cast<long>(big))).get_num());
        b.q_offset = e(t0);
        b.t_offset = t0;
        b.t_step = big;
        b.j0 = 0;
        if (t.hi) b.j1 = div_floor(*t.hi - t0, big);
        out.branches.push_back(std::move(b));
    }
    return out;
}

/// Closed form of a series term as a rational function of q and T.
inline RatFuncQT sum_series(const SeriesTerm& t) {
    SeriesSplit sp = split_series(t);
    RatFuncQT total;
    for (const auto& [s, c] : sp.explicit_terms) total += RatFuncQT(c) * RatFuncQT::t_power(static_cast<std::size_t>(s));
    for (const auto& b : sp.branches) total += closed_form(b);
    return total;
}

/// Geometric case (s_power = 0).
inline RatFuncQT sum_geometric(const SeriesTerm& t) {
    if (t.s_power != 0) throw InvalidArgument("sum_geometric needs s_power = 0");
    return sum_series(t);
}

/// Polynomial-times-geometric case (s_power >= 1), via the Euler operator.
inline RatFuncQT sum_poly_geometric(const SeriesTerm& t) {
    if (t.s_power == 0) throw InvalidArgument("sum_poly_geometric needs s_power >= 1");
    return sum_series(t);
}

/// The T-free sum of s^a q^{e(s)}; every infinite branch must have negative slope.
inline RatFuncQ sum_power_q(const SeriesTerm& t) {
    SeriesSplit sp = split_series(t);
    RatFuncQ total;
    for (const auto& [s, c] : sp.explicit_terms) total += c;
    for (const auto& b : sp.branches) total += closed_form_q(b);
    return total;
}

/// Finite sum of (class product) x (rational function of q and T).
class MotivicSeries {
public:
    struct Entry {
        MotivicValue::Classes classes;
        RatFuncQT series;
    };

    bool is_zero() const { return entries_.empty(); }
    std::uint64_t threshold() const { return threshold_; }
    std::vector<Entry> entries() const {
        std::vector<Entry> out;
        for (const auto& [k, e] : entries_) out.push_back(e);
        return out;
    }

    /// Adds coefficient * series, distributing over the coefficient's terms.
    void add(const MotivicValue& coeff, const RatFuncQT& series) {
        threshold_ = std::max(threshold_, coeff.threshold());
        if (series.is_zero()) return;
        for (const auto& t : coeff.terms()) {
            Key k;
            for (const auto& c : t.classes) k.push_back(c->id);
            RatFuncQT v = RatFuncQT(t.coeff) * series;
            auto it = entries_.find(k);
            if (it == entries_.end()) {
                entries_.emplace(k, Entry{t.classes, v});
            } else {
                it->second.series += v;
                if (it->second.series.is_zero()) entries_.erase(it);
            }
        }
    }

    void add(const MotivicSeries& o) {
        threshold_ = std::max(threshold_, o.threshold_);
        for (const auto& [k, e] : o.entries_) {
            MotivicValue cls(1);
            for (const auto& c : e.classes) cls *= MotivicValue::count_of(c);
            add(cls, e.series);
        }
    }

    void raise_threshold(std::uint64_t t) { threshold_ = std::max(threshold_, t); }

    /// The substitution T := q^k T.
    MotivicSeries subst_t_scale(long k) const {
        MotivicSeries r = *this;
        for (auto& [key, e] : r.entries_) e.series = e.series.subst_t_scale(k);
        return r;
    }

    /// First n coefficients as motivic values.
    std::vector<MotivicValue> expand(std::size_t n) const {
        std::vector<MotivicValue> out(n);
        for (const auto& [k, e] : entries_) {
            MotivicValue cls(1);
            for (const auto& c : e.classes) cls *= MotivicValue::count_of(c);
            auto coeffs = e.series.expand(n);
            for (std::size_t i = 0; i < n; ++i) out[i] += cls * MotivicValue(coeffs[i]);
        }
        for (auto& v : out) v = v.with_threshold(threshold_);
        return out;
    }

    /// First n coefficients at q := p with classes counted over F_p.
    std::vector<Rat> expand_at(std::uint64_t p, std::size_t n, Budget budget = {}) const {
        if (p < threshold_) throw ThresholdViolation("series requires p >= " + std::to_string(threshold_));
        std::vector<Rat> out(n);
        for (const auto& [k, e] : entries_) {
            Rat cnt = 1;
            for (const auto& c : e.classes) cnt *= Rat(static_cast<unsigned long>(brute_force_count(*c, p, budget)));
            auto coeffs = e.series.expand_at(Rat(static_cast<unsigned long>(p)), n);
            for (std::size_t i = 0; i < n; ++i) out[i] += cnt * coeffs[i];
        }
        return out;
    }

    /// The series at q := p as a single rational function of T (variable
    /// written T), numerator and denominator with denominator(0) = 1.
    std::pair<PolyQ, PolyQ> specialize(std::uint64_t p, Budget budget = {}) const {
        if (p < threshold_) throw ThresholdViolation("series requires p >= " + std::to_string(threshold_));
        RatFuncQ total;
        Rat qv(static_cast<unsigned long>(p));
        for (const auto& [k, e] : entries_) {
            Rat cnt = 1;
            for (const auto& c : e.classes) cnt *= Rat(static_cast<unsigned long>(brute_force_count(*c, p, budget)));
            total += RatFuncQ::reduced(e.series.num().at_q(qv), e.series.den().at_q(qv)) * RatFuncQ(cnt);
        }
        Rat d0 = total.den().coeff(0);
        if (d0 == 0) return {total.num(), total.den()};
        return {total.num().scaled(Rat(1) / d0), total.den().scaled(Rat(1) / d0)};
    }

    /// Single rational function when no class symbols are present.
    std::optional<RatFuncQT> as_rational() const {
        if (entries_.empty()) return RatFuncQT();
        if (entries_.size() == 1 && entries_.begin()->first.empty()) return entries_.begin()->second.series;
        return std::nullopt;
    }

    friend bool operator==(const MotivicSeries& a, const MotivicSeries& b) {
        if (a.entries_.size() != b.entries_.size()) return false;
        for (auto ia = a.entries_.begin(), ib = b.entries_.begin(); ia != a.entries_.end(); ++ia, ++ib)
            if (ia->first != ib->first || ia->second.series != ib->second.series) return false;
        return true;
    }

    std::string to_string() const;
    std::string to_latex() const;
    nlohmann::ordered_json to_json() const;

private:
    using Key = std::vector<std::string>;
    std::map<Key, Entry> entries_;
    std::uint64_t threshold_ = 2;
};

/// A summand f(s) = coeff * s^a * q^{e(s)} over a range and congruence class.
struct MotivicSeriesTerm {
    MotivicValue coeff;
    SeriesTerm term;
};

/// Sum over s of f(s) T^s, with class factors pulled out of the sum.
inline MotivicSeries sum_motivic_series(const std::vector<MotivicSeriesTerm>& f) {
    MotivicSeries out;
    for (const auto& t : f) out.add(t.coeff, sum_series(t.term));
    return out;
}

// Printing.

inline std::string latex_qt(const PolyQT& p) {
    if (p.is_zero()) return "0";
    std::string out;
    for (std::size_t i = 0; i < p.coeffs().size(); ++i) {
        const PolyQ& c = p.coeffs()[i];
        if (c.is_zero()) continue;
        std::string cs = MotivicValue::latex(c);
        bool single = c.sparse().size() == 1;
        std::string tpart = i == 0 ? "" : (i == 1 ? "T" : "T^{" + std::to_string(i) + "}");
        std::string term;
        if (tpart.empty()) term = cs;
        else if (c == PolyQ(1)) term = tpart;
        else if (c == PolyQ(-1)) term = "-" + tpart;
        else term = (single ? cs : "\\left(" + cs + "\\right)") + tpart;
        if (!out.empty() && term[0] != '-') out += " + ";
        else if (!out.empty()) {
            out += " - ";
            term.erase(0, 1);
        }
        out += term;
    }
    return out;
}

inline std::string latex(const RatFuncQT& f) {
    if (f.den() == PolyQT(1)) return latex_qt(f.num());
    return "\\frac{" + latex_qt(f.num()) + "}{" + latex_qt(f.den()) + "}";
}

inline nlohmann::ordered_json qt_json(const PolyQT& p) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < p.coeffs().size(); ++i)
        if (!p.coeffs()[i].is_zero()) j[std::to_string(i)] = MotivicValue::poly_json(p.coeffs()[i]);
    return j;
}

/// {"num": {T-exponent: {q-exponent: coefficient}}, "den": ...}
inline nlohmann::ordered_json to_json(const RatFuncQT& f) {
    nlohmann::ordered_json j;
    j["num"] = qt_json(f.num());
    j["den"] = qt_json(f.den());
    return j;
}

inline std::string MotivicSeries::to_string() const {
    if (entries_.empty()) return "0";
    std::string out;
    for (const auto& [k, e] : entries_) {
        if (!out.empty()) out += " + ";
        std::string cls;
        for (const auto& c : e.classes) cls += "[" + c->id + "]";
        out += cls.empty() ? e.series.to_string() : cls + "*(" + e.series.to_string() + ")";
    }
    return out;
}

inline std::string MotivicSeries::to_latex() const {
    if (entries_.empty()) return "0";
    std::string out;
    for (const auto& [k, e] : entries_) {
        if (!out.empty()) out += " + ";
        std::string cls;
        for (const auto& c : e.classes) cls += "\\#\\mathrm{" + MotivicValue::escape_latex(c->id) + "}";
        out += cls.empty() ? latex(e.series) : cls + "\\left(" + latex(e.series) + "\\right)";
    }
    return out;
}

inline nlohmann::ordered_json MotivicSeries::to_json() const {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto& [k, e] : entries_) {
        nlohmann::ordered_json j;
        j["classes"] = k;
        j["series"] = motive::to_json(e.series);
        terms.push_back(std::move(j));
    }
    nlohmann::ordered_json out;
    out["terms"] = std::move(terms);
    return out;
}

} // namespace motive
