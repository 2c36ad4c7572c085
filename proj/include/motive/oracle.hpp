#pragma once

// Ground truth by exhaustive arithmetic: point counts mod p^s, minimal
// recurrences for count sequences, and shell-wise measures and integrals at
// a fixed prime.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "motive/decompose.hpp"
#include "motive/integrate.hpp"
#include "motive/mpoly.hpp"

namespace motive {

/// Common zero set of integer polynomials in n variables.
struct VarietySpec {
    std::size_t n = 1;
    std::vector<MPoly> polys;

    void validate() const {
        for (const auto& f : polys) {
            if (!f.has_integer_coefficients()) throw InvalidArgument("variety equations need integer coefficients");
            if (f.arity() > n) throw InvalidArgument("equation uses more than " + std::to_string(n) + " variables");
        }
    }
};

/// Budget from MOTIVE_BUDGET if set, else the default.
inline Budget default_budget() {
    Budget b;
    if (const char* env = std::getenv("MOTIVE_BUDGET")) {
        try {
            b.limit = std::stoull(env);
        } catch (const std::exception&) {
            throw InvalidArgument(std::string("MOTIVE_BUDGET is not a number: ") + env);
        }
    }
    return b;
}

namespace detail {

inline std::uint64_t ipow(std::uint64_t b, unsigned e) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) {
        if (r > (std::uint64_t{1} << 62) / b) throw InvalidArgument("modulus p^s exceeds 2^62");
        r *= b;
    }
    return r;
}

inline unsigned valuation_u64(std::uint64_t z, std::uint64_t p, unsigned cap) {
    if (z == 0) return cap;
    unsigned v = 0;
    while (v < cap && z % p == 0) {
        z /= p;
        ++v;
    }
    return v;
}

/// Hasse derivative (1/alpha!) d^alpha f, which has integer coefficients.
inline MPoly hasse(const MPoly& f, const std::vector<unsigned>& alpha) {
    MPoly r;
    for (const auto& [e, c] : f.terms()) {
        Rat coef = c;
        MPoly::Exponents ne = e;
        bool zero = false;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            unsigned ei = i < e.size() ? e[i] : 0;
            if (alpha[i] > ei) {
                zero = true;
                break;
            }
            coef *= Rat(binomial(ei, alpha[i]));
            if (i < ne.size()) ne[i] -= alpha[i];
        }
        if (zero) continue;
        MPoly mono(coef);
        for (std::size_t i = 0; i < ne.size(); ++i)
            if (ne[i]) mono = mono * MPoly::var(i).pow(ne[i]);
        r += mono;
    }
    return r;
}

} // namespace detail

/// Counts N_{p^t} for t = 0..s by lifting every solution one p-adic digit
/// at a time. A node whose whole subtree is forced (every Taylor coefficient
/// of f(x + p^t y) divisible by p^s) is counted without expansion.
inline std::vector<Int> poincare_coeffs_dfs(const VarietySpec& v, std::uint64_t p, unsigned s_max, Budget budget = default_budget()) {
    v.validate();
    if (!is_prime(p)) throw InvalidArgument(std::to_string(p) + " is not prime");
    std::vector<Int> res(s_max + 1, 0);
    if (v.polys.empty()) {
        for (unsigned t = 0; t <= s_max; ++t) mpz_pow_ui(res[t].get_mpz_t(), Int(static_cast<unsigned long>(p)).get_mpz_t(), t * v.n);
        return res;
    }
    const std::size_t n = v.n;
    const std::uint64_t mod = detail::ipow(p, s_max);

    // Hasse derivatives of every equation, indexed by multi-index with |alpha| >= 0.
    struct Deriv {
        ModPoly poly;
        unsigned order;
    };
    std::vector<Deriv> derivs;
    for (const auto& f : v.polys) {
        unsigned deg = 0;
        for (const auto& [e, c] : f.terms()) {
            unsigned d = 0;
            for (auto x : e) d += x;
            deg = std::max(deg, d);
        }
        std::vector<unsigned> alpha(n, 0);
        std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
            if (i == n) {
                unsigned ord = 0;
                for (auto a : alpha) ord += a;
                MPoly h = detail::hasse(f, alpha);
                if (!h.is_zero()) derivs.push_back({ModPoly(h, mod), ord});
                return;
            }
            for (unsigned a = 0; a <= left; ++a) {
                alpha[i] = a;
                rec(i + 1, left - a);
            }
            alpha[i] = 0;
        };
        rec(0, deg);
    }
    std::vector<ModPoly> eqs;
    for (const auto& f : v.polys) eqs.emplace_back(f, mod);

    std::vector<std::uint64_t> pw(s_max + 1);
    for (unsigned t = 0; t <= s_max; ++t) pw[t] = detail::ipow(p, t);

    std::uint64_t work = 0;
    auto charge = [&](std::uint64_t k) {
        work += k;
        if (work > budget.limit)
            throw BudgetExceeded("point count mod " + std::to_string(p) + "^" + std::to_string(s_max) +
                                 " exceeds budget of " + std::to_string(budget.limit) + " candidate tests");
    };

    struct Node {
        std::vector<std::uint64_t> x;
        unsigned t;
    };
    std::vector<Node> stack;
    stack.push_back({std::vector<std::uint64_t>(n, 0), 0});
    std::vector<std::uint64_t> cand(n);
    const std::uint64_t children = detail::ipow(p, static_cast<unsigned>(n));
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        const unsigned t = node.t;
        res[t] += 1;
        if (t == s_max) continue;
        // Valuation of the content of f(x + p^t y), capped at s_max.
        unsigned c = s_max;
        for (const auto& d : derivs) {
            unsigned base = std::min<unsigned>(s_max, t * d.order);
            if (base >= c) continue;
            unsigned val = detail::valuation_u64(d.poly.eval(node.x.data()), p, s_max);
            c = std::min(c, std::min(s_max, base + val));
        }
        charge(1);
        if (c >= s_max) {
            for (unsigned u = t + 1; u <= s_max; ++u) {
                Int add;
                mpz_pow_ui(add.get_mpz_t(), Int(static_cast<unsigned long>(p)).get_mpz_t(), (u - t) * n);
                res[u] += add;
            }
            continue;
        }
        // Children x + p^t a, a in [0, p)^n.
        charge(children);
        const std::uint64_t mod_next = pw[t + 1];
        for (std::uint64_t idx = 0; idx < children; ++idx) {
            std::uint64_t rem = idx;
            for (std::size_t i = 0; i < n; ++i) {
                cand[i] = node.x[i] + pw[t] * (rem % p);
                rem /= p;
            }
            bool ok = true;
            if (c < t + 1) {
                for (const auto& e : eqs)
                    if (e.eval(cand.data()) % mod_next != 0) {
                        ok = false;
                        break;
                    }
            }
            if (ok) stack.push_back({cand, t + 1});
        }
    }
    return res;
}

namespace detail {

/// Lifting with memoization. A state is a system of primitive integer
/// polynomials H_i with shifts d_i <= 0; A[k] counts z mod p^k with
/// H_i(z) = 0 mod p^{k + d_i} for all i. Lifting z = y0 + p z' turns
/// H_i(y0 + p z') = p^c H'_i(z') into the state (H'_i, d_i + 1 - c), so
/// residues with the same normalized expansion share one computation.
class LiftCounter {
public:
    LiftCounter(std::size_t n, std::uint64_t p, Budget budget) : n_(n), p_(p), budget_(budget) {}

    using System = std::vector<std::pair<MPoly, std::int64_t>>;

    std::vector<Int> counts(System sys, unsigned k_max) {
        normalize(sys, k_max);
        if (sys.empty()) {
            std::vector<Int> out(k_max + 1);
            for (unsigned k = 0; k <= k_max; ++k) out[k] = pow_p(static_cast<unsigned long>(n_ * k));
            return out;
        }
        std::string key = std::to_string(k_max);
        for (const auto& [h, d] : sys) key += "|" + std::to_string(d) + ":" + h.to_string(names());
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        std::vector<Int> out(k_max + 1, 0);
        out[0] = 1;
        if (sys.size() == 1 && smooth_count(sys[0], k_max, out)) {
            memo_.emplace(std::move(key), out);
            return out;
        }
        const std::uint64_t children = ipow(p_, static_cast<unsigned>(n_));
        work_ += children * sys.size();
        if (work_ > budget_.limit)
            throw BudgetExceeded("point count at p = " + std::to_string(p_) + " exceeds budget of " +
                                 std::to_string(budget_.limit) + " steps");
        std::vector<MPoly> shift(n_);
        for (std::uint64_t idx = 0; idx < children; ++idx) {
            std::uint64_t rem = idx;
            for (std::size_t i = 0; i < n_; ++i) {
                shift[i] = MPoly(Rat(static_cast<unsigned long>(rem % p_))) + MPoly(Rat(static_cast<unsigned long>(p_))) * MPoly::var(i);
                rem /= p_;
            }
            std::int64_t limit = k_max; // levels k this residue can reach
            System child;
            for (const auto& [h, d] : sys) {
                MPoly g = h;
                for (std::size_t i = 0; i < n_; ++i)
                    if (g.degree_in(i) > 0) g = g.substitute(i, shift[i]);
                unsigned c = content_valuation(g);
                if (c == 0) {
                    limit = std::min<std::int64_t>(limit, -d);
                    continue;
                }
                child.emplace_back(divide_p(g, c), d + 1 - static_cast<std::int64_t>(c));
            }
            if (limit < 1) continue;
            auto sub = counts(std::move(child), static_cast<unsigned>(limit - 1));
            for (std::int64_t k = 1; k <= limit; ++k) out[k] += sub[k - 1];
        }
        memo_.emplace(std::move(key), out);
        return out;
    }

private:
    static const std::vector<std::string>& names() {
        static const std::vector<std::string> v = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
        return v;
    }

    Int pow_p(unsigned long e) const {
        Int r;
        mpz_pow_ui(r.get_mpz_t(), Int(static_cast<unsigned long>(p_)).get_mpz_t(), e);
        return r;
    }

    /// Hensel: if H has no singular zero mod p, each zero mod p lifts to
    /// exactly p^{n-1} zeros per further digit.
    bool smooth_count(const std::pair<MPoly, std::int64_t>& eq, unsigned k_max, std::vector<Int>& out) {
        const auto& [h, d] = eq;
        ModPoly hm(h, p_);
        std::vector<ModPoly> grad;
        for (std::size_t i = 0; i < n_; ++i) {
            std::vector<unsigned> alpha(n_, 0);
            alpha[i] = 1;
            grad.emplace_back(hasse(h, alpha), p_);
        }
        const std::uint64_t points = ipow(p_, static_cast<unsigned>(n_));
        work_ += points;
        if (work_ > budget_.limit)
            throw BudgetExceeded("point count at p = " + std::to_string(p_) + " exceeds budget of " +
                                 std::to_string(budget_.limit) + " steps");
        std::vector<std::uint64_t> z(n_);
        std::uint64_t zeros = 0;
        for (std::uint64_t idx = 0; idx < points; ++idx) {
            std::uint64_t rem = idx;
            for (std::size_t i = 0; i < n_; ++i) {
                z[i] = rem % p_;
                rem /= p_;
            }
            if (hm.eval(z.data()) != 0) continue;
            bool singular = true;
            for (const auto& g : grad)
                if (g.eval(z.data()) != 0) {
                    singular = false;
                    break;
                }
            if (singular) return false;
            ++zeros;
        }
        for (unsigned k = 1; k <= k_max; ++k) {
            std::int64_t e = static_cast<std::int64_t>(k) + d;
            if (e <= 0) out[k] = pow_p(static_cast<unsigned long>(n_ * k));
            else
                out[k] = Int(static_cast<unsigned long>(zeros)) * pow_p(static_cast<unsigned long>((n_ - 1) * (e - 1) + n_ * (k - e)));
        }
        return true;
    }

    unsigned content_valuation(const MPoly& g) const {
        unsigned best = ~0u;
        for (const auto& [e, c] : g.terms()) best = std::min<unsigned>(best, static_cast<unsigned>(padic_val(c.get_num(), p_)));
        return best;
    }

    MPoly divide_p(const MPoly& g, unsigned c) const {
        if (c == 0) return g;
        return g * MPoly(Rat(1) / Rat(pow_p(c)));
    }

    /// Reduces H_i mod p^{k_max + d_i}, dropping equations that no longer
    /// constrain any level up to k_max.
    void normalize(System& sys, unsigned k_max) const {
        System out;
        for (auto& [h, d] : sys) {
            std::int64_t prec = static_cast<std::int64_t>(k_max) + d;
            if (prec <= 0) continue;
            Int m = pow_p(static_cast<unsigned long>(prec));
            MPoly r;
            for (const auto& [e, c] : h.terms()) {
                Int z = c.get_num() % m;
                if (z < 0) z += m;
                if (z == 0) continue;
                MPoly mono{Rat(z)};
                for (std::size_t i = 0; i < e.size(); ++i)
                    if (e[i]) mono = mono * MPoly::var(i).pow(e[i]);
                r += mono;
            }
            if (!r.is_zero()) out.emplace_back(std::move(r), d);
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second < b.second : a.first.terms() < b.first.terms();
        });
        sys = std::move(out);
    }

    std::size_t n_;
    std::uint64_t p_;
    Budget budget_;
    std::uint64_t work_ = 0;
    std::map<std::string, std::vector<Int>> memo_;
};

} // namespace detail

/// Counts N_{p^t} for t = 0..s_max by digit-wise lifting with memoization
/// on normalized Taylor expansions.
inline std::vector<Int> poincare_coeffs(const VarietySpec& v, std::uint64_t p, unsigned s_max, Budget budget = default_budget()) {
    v.validate();
    if (!is_prime(p)) throw InvalidArgument(std::to_string(p) + " is not prime");
    if (v.n > 10) throw InvalidArgument("at most 10 variables are supported");
    detail::LiftCounter lc(v.n, p, budget);
    detail::LiftCounter::System sys;
    for (const auto& f : v.polys) sys.emplace_back(f, 0);
    return lc.counts(std::move(sys), s_max);
}

inline Int count_points(const VarietySpec& v, std::uint64_t p, unsigned s, Budget budget = default_budget()) {
    return poincare_coeffs(v, p, s, budget).back();
}

/// Direct count of solutions in (Z/mZ)^n by full enumeration.
inline Int count_mod(const VarietySpec& v, std::uint64_t m, Budget budget = default_budget()) {
    v.validate();
    long double total = 1;
    for (std::size_t i = 0; i < v.n; ++i) total *= static_cast<long double>(m);
    if (total > static_cast<long double>(budget.limit))
        throw BudgetExceeded("full enumeration mod " + std::to_string(m) + " exceeds budget");
    std::vector<ModPoly> eqs;
    for (const auto& f : v.polys) eqs.emplace_back(f, m);
    std::vector<std::uint64_t> x(std::max<std::size_t>(v.n, 1), 0);
    std::uint64_t count = 0;
    std::uint64_t n_total = static_cast<std::uint64_t>(total);
    for (std::uint64_t idx = 0; idx < n_total; ++idx) {
        std::uint64_t rem = idx;
        for (std::size_t i = 0; i < v.n; ++i) {
            x[i] = rem % m;
            rem /= m;
        }
        bool ok = true;
        for (const auto& e : eqs)
            if (e.eval(x.data()) != 0) {
                ok = false;
                break;
            }
        if (ok) ++count;
    }
    return Int(static_cast<unsigned long>(count));
}

/// Full enumeration mod p^s (no lifting); for cross-checking.
inline Int count_points_naive(const VarietySpec& v, std::uint64_t p, unsigned s, Budget budget = default_budget()) {
    return count_mod(v, detail::ipow(p, s), budget);
}

/// Exact counts over a grid of primes and depths.
struct CountReport {
    std::map<std::pair<std::uint64_t, unsigned>, Int> grid;
    std::map<std::uint64_t, double> millis;

    static CountReport build(const VarietySpec& v, const std::vector<std::uint64_t>& primes, unsigned s_max,
                             Budget budget = default_budget()) {
        CountReport r;
        for (auto p : primes) {
            auto start = std::chrono::steady_clock::now();
            auto c = poincare_coeffs(v, p, s_max, budget);
            auto stop = std::chrono::steady_clock::now();
            for (unsigned s = 0; s <= s_max; ++s) r.grid[{p, s}] = c[s];
            r.millis[p] = std::chrono::duration<double, std::milli>(stop - start).count();
        }
        return r;
    }

    std::vector<Int> row(std::uint64_t p) const {
        std::vector<Int> out;
        for (const auto& [k, c] : grid)
            if (k.first == p) out.push_back(c);
        return out;
    }

    std::string to_csv(bool with_timings = false) const {
        std::ostringstream out;
        out << "p,s,count" << (with_timings ? ",millis" : "") << "\n";
        for (const auto& [k, c] : grid) {
            out << k.first << "," << k.second << "," << c.get_str();
            if (with_timings) out << "," << millis.at(k.first);
            out << "\n";
        }
        return out.str();
    }

    /// Timings are omitted unless asked for, so output is reproducible.
    nlohmann::ordered_json to_json(bool with_timings = false) const {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& [k, c] : grid) rows.push_back({{"p", k.first}, {"s", k.second}, {"count", c.get_str()}});
        nlohmann::ordered_json j;
        j["grid"] = std::move(rows);
        if (with_timings) {
            nlohmann::ordered_json t = nlohmann::ordered_json::object();
            for (const auto& [p, ms] : millis) t[std::to_string(p)] = ms;
            j["millis"] = std::move(t);
        }
        return j;
    }
};

/// Rational function num/den in T (den(0) = 1) agreeing with a coefficient list.
struct RecurrenceFit {
    PolyQ num;
    PolyQ den;
    std::size_t order = 0; // degree of the recurrence (denominator)
    std::size_t holdout_verified = 0;

    std::vector<Rat> expand(std::size_t n) const {
        std::vector<Rat> c(n);
        for (std::size_t k = 0; k < n; ++k) {
            Rat acc = num.coeff(k);
            for (std::size_t j = 1; j <= k && j < den.coeffs().size(); ++j) acc -= den.coeffs()[j] * c[k - j];
            c[k] = acc; // den(0) = 1
        }
        return c;
    }

    std::string to_string() const {
        auto wrap = [](const PolyQ& p) {
            std::string s = p.to_string("T");
            return p.sparse().size() <= 1 ? s : "(" + s + ")";
        };
        if (den == PolyQ(1)) return num.to_string("T");
        return wrap(num) + "/" + wrap(den);
    }
};

namespace detail {

/// Solves A x = b over Q; free variables are set to 0. nullopt if inconsistent.
inline std::optional<std::vector<Rat>> solve_linear(std::vector<std::vector<Rat>> a, std::vector<Rat> b) {
    const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[r]);
        std::swap(b[piv], b[r]);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || a[i][c] == 0) continue;
            Rat f = a[i][c] / a[r][c];
            for (std::size_t k = c; k < cols; ++k) a[i][k] -= f * a[r][k];
            b[i] -= f * b[r];
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < rows; ++i)
        if (b[i] != 0) return std::nullopt;
    std::vector<Rat> x(cols, 0);
    for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = b[i] / a[i][pivot_col[i]];
    return x;
}

} // namespace detail

/// Smallest recurrence (denominator degree L <= max_order, numerator degree
/// N <= max_order) reproducing every coefficient, with at least two
/// coefficients beyond those used to determine it.
inline RecurrenceFit fit_rational(const std::vector<Rat>& c, std::size_t max_order) {
    if (c.size() < 2 * max_order + 2)
        throw InvalidArgument("fit_rational needs at least " + std::to_string(2 * max_order + 2) + " coefficients, got " +
                              std::to_string(c.size()));
    auto at = [&](long k) { return k < 0 ? Rat(0) : c[static_cast<std::size_t>(k)]; };
    for (std::size_t L = 0; L <= max_order; ++L) {
        for (std::size_t N = 0; N <= max_order; ++N) {
            if (N + L + 3 > c.size()) break;
            std::vector<Rat> d(L + 1, 0);
            d[0] = 1;
            if (L > 0) {
                std::vector<std::vector<Rat>> a(L, std::vector<Rat>(L));
                std::vector<Rat> b(L);
                for (std::size_t e = 0; e < L; ++e) {
                    long k = static_cast<long>(N + 1 + e);
                    for (std::size_t i = 1; i <= L; ++i) a[e][i - 1] = at(k - static_cast<long>(i));
                    b[e] = -at(k);
                }
                auto sol = detail::solve_linear(a, b);
                if (!sol) continue;
                for (std::size_t i = 1; i <= L; ++i) d[i] = (*sol)[i - 1];
            }
            bool ok = true;
            for (std::size_t k = N + 1; k < c.size() && ok; ++k) {
                Rat acc = 0;
                for (std::size_t i = 0; i <= L && i <= k; ++i) acc += d[i] * c[k - i];
                if (acc != 0) ok = false;
            }
            if (!ok) continue;
            std::vector<Rat> num(N + 1, 0);
            for (std::size_t k = 0; k <= N; ++k)
                for (std::size_t i = 0; i <= L && i <= k; ++i) num[k] += d[i] * c[k - i];
            RecurrenceFit fit;
            fit.num = PolyQ(num);
            fit.den = PolyQ(d);
            fit.order = static_cast<std::size_t>(std::max<long>(fit.den.degree(), 0));
            fit.holdout_verified = c.size() - (N + L + 1);
            return fit;
        }
    }
    throw NoFit("no recurrence of order <= " + std::to_string(max_order) + " fits " + std::to_string(c.size()) +
                " coefficients with two held out");
}

inline RecurrenceFit fit_rational(const std::vector<Int>& c, std::size_t max_order) {
    std::vector<Rat> r;
    for (const auto& x : c) r.emplace_back(x);
    return fit_rational(r, max_order);
}

/// Closed interval of rationals.
struct Interval {
    Rat lo;
    Rat hi;

    bool contains(const Rat& x) const { return lo <= x && x <= hi; }
    Rat width() const { return hi - lo; }
    Interval& operator+=(const Interval& o) {
        lo += o.lo;
        hi += o.hi;
        return *this;
    }
    std::string to_string() const { return "[" + motive::to_string(lo) + ", " + motive::to_string(hi) + "]"; }
};

/// Measure at p from the shells v(x - c) = r < depth, each counted as
/// (#ac residues over F_p) * p^{-r-1}; everything at valuation >= depth
/// lies in balls of radius depth around the cell centers and only widens the
/// interval.
inline Interval empirical_measure(const std::vector<Cell>& cells, std::uint64_t p, unsigned depth,
                                  Budget budget = default_budget()) {
    Interval out{0, 0};
    std::map<Rat, bool> deep_centers;
    const Rat pr(static_cast<unsigned long>(p));
    for (const auto& c : cells) {
        if (p < c.threshold()) throw ThresholdViolation("cell " + c.to_string() + " needs p >= " + std::to_string(c.threshold()));
        if (c.is_singleton() || c.ac->id == "empty") continue;
        if (!c.vmin) throw InfiniteMeasure("cell " + c.to_string() + " has infinite measure");
        Rat zc(static_cast<unsigned long>(brute_force_count(*c.ac, p, budget)));
        if (zc == 0) continue;
        std::int64_t top = static_cast<std::int64_t>(depth);
        if (c.vmax) top = std::min(top, *c.vmax);
        for (std::int64_t r = *c.vmin + 1; r < top; ++r)
            if (c.admits(r)) out.lo += zc * pow_rat(pr, -r - 1);
        if (!c.vmax || *c.vmax > static_cast<std::int64_t>(depth)) deep_centers[c.center] = true;
    }
    out.hi = out.lo + Rat(static_cast<unsigned long>(deep_centers.size())) * pow_rat(pr, -static_cast<long>(depth));
    return out;
}

/// Integral at p: exact shells r < depth plus a geometric-majorant bound
/// on the remaining shells.
inline Interval empirical_integral(const PreparedFunction& f, std::uint64_t p, unsigned depth,
                                   Budget budget = default_budget()) {
    Interval out{0, 0};
    const Rat pr(static_cast<unsigned long>(p));
    for (const auto& piece : f.pieces) {
        const Cell& c = piece.cell;
        if (p < c.threshold()) throw ThresholdViolation("cell " + c.to_string() + " needs p >= " + std::to_string(c.threshold()));
        if (c.is_singleton() || c.is_empty()) continue;
        for (const auto& t : piece.terms) {
            ClassRef z = t.ac_factor ? classes::intersect(c.ac, t.ac_factor) : c.ac;
            Rat zc(static_cast<unsigned long>(brute_force_count(*z, p, budget)));
            Rat coeff = t.coeff.eval(p, budget) * zc;
            if (coeff == 0) continue;
            if (!c.vmin) throw NotIntegrable("cell " + c.to_string() + " is unbounded below");
            auto shell = [&](std::int64_t r) -> Rat {
                return coeff * pow_rat(Rat(static_cast<long>(r)), t.v_power) * pow_rat(pr, t.q_slope * r - r - 1);
            };
            std::int64_t r = *c.vmin + 1;
            std::int64_t stop = static_cast<std::int64_t>(depth);
            if (c.vmax) stop = std::min(stop, *c.vmax);
            for (; r < stop; ++r)
                if (c.admits(r)) out += Interval{shell(r), shell(r)};
            if (c.vmax && r >= *c.vmax) continue;
            if (t.q_slope >= 1) throw NotIntegrable("q^(" + std::to_string(t.q_slope) + "*v(x)) diverges on " + c.to_string());
            // Remaining shells r' >= r: |term(r'+1)/term(r')| <= ((r+1)/r)^a p^{e-1}
            // once r >= 1; move r forward until that ratio is below 1.
            auto ratio = [&](std::int64_t rr) -> Rat {
                return pow_rat(Rat(static_cast<long>(rr + 1)) / Rat(static_cast<long>(rr)), t.v_power) *
                       pow_rat(pr, t.q_slope - 1);
            };
            while (r < 1 || ratio(r) >= 1) {
                if (c.vmax && r >= *c.vmax) break;
                if (c.admits(r)) out += Interval{shell(r), shell(r)};
                ++r;
            }
            if (c.vmax && r >= *c.vmax) continue;
            Rat head = abs(coeff) * pow_rat(Rat(static_cast<long>(r)), t.v_power) * pow_rat(pr, t.q_slope * r - r - 1);
            Rat bound = head / (Rat(1) - ratio(r));
            if (coeff > 0 && (t.v_power == 0 || r > 0)) out.hi += bound;
            else {
                out.lo -= bound;
                out.hi += bound;
            }
        }
    }
    return out;
}

inline std::uint64_t count_residue_class(const ResidueClass& z, std::uint64_t p, Budget budget = default_budget()) {
    return brute_force_count(z, p, budget);
}

/// v(x - c) and ac(x - c) for x a residue mod p^depth, when decided.
struct Distance {
    bool decided = false;
    std::int64_t v = 0;
    std::uint64_t ac = 0;
};

inline Distance distance_at(std::uint64_t x, const Rat& c, std::uint64_t p, unsigned depth) {
    std::uint64_t mod = detail::ipow(p, depth);
    // x - c = (x * den - num) / den with den a unit.
    Int z = Int(static_cast<unsigned long>(x)) * c.get_den() - c.get_num();
    Int zm = z % Int(static_cast<unsigned long>(mod));
    if (zm < 0) zm += static_cast<unsigned long>(mod);
    Distance d;
    if (zm == 0) return d;
    std::uint64_t zu = zm.get_ui();
    unsigned v = detail::valuation_u64(zu, p, depth);
    std::uint64_t unit = zu;
    for (unsigned i = 0; i < v; ++i) unit /= p;
    d.decided = true;
    d.v = v;
    Rat acv = make_rat(Int(static_cast<unsigned long>(unit % p)), c.get_den());
    d.ac = residue_mod(acv, p);
    return d;
}

/// Result of comparing a DefSet with a cell list on all residues mod p^depth.
struct MembershipReport {
    std::uint64_t decidable = 0;
    std::uint64_t agree = 0;
    std::uint64_t overlaps = 0; // points in two or more cells
    std::vector<std::uint64_t> mismatches;
};

/// Checks, for every x mod p^depth whose distance to every center is
/// below depth, that x is in the set iff it lies in exactly one cell.
inline MembershipReport membership_check(const DefSet& s, const std::vector<Cell>& cells, std::uint64_t p, unsigned depth,
                                         Budget budget = default_budget()) {
    std::vector<Center> raw;
    s.collect_centers(raw);
    std::vector<Rat> centers;
    for (const auto& c : raw) centers.push_back(c.value);
    for (const auto& c : cells) centers.push_back(c.center);
    std::sort(centers.begin(), centers.end());
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());

    std::uint64_t mod = detail::ipow(p, depth);
    if (mod > budget.limit) throw BudgetExceeded("membership check mod " + std::to_string(p) + "^" + std::to_string(depth) + " exceeds budget");
    std::map<std::string, std::vector<bool>> tables;
    auto table = [&](const ResidueClass& z) -> const std::vector<bool>& {
        auto it = tables.find(z.id);
        if (it == tables.end()) it = tables.emplace(z.id, membership_table(z, p)).first;
        return it->second;
    };

    MembershipReport rep;
    std::map<Rat, Distance> dist;
    for (std::uint64_t x = 0; x < mod; ++x) {
        bool decided = true;
        for (const auto& c : centers) {
            Distance d = distance_at(x, c, p, depth);
            if (!d.decided) {
                decided = false;
                break;
            }
            dist[c] = d;
        }
        if (!decided) continue;
        ++rep.decidable;
        bool in_set = s.eval([&](const Rat& c) -> std::optional<std::int64_t> { return dist.at(c).v; },
                             [&](const Rat& c, const ResidueClass& z) { return table(z)[dist.at(c).ac]; });
        int hits = 0;
        for (const auto& cell : cells) {
            if (cell.is_singleton()) continue;
            const Distance& d = dist.at(cell.center);
            if (cell.admits(d.v) && table(*cell.ac)[d.ac]) ++hits;
        }
        if (hits > 1) ++rep.overlaps;
        if ((in_set && hits == 1) || (!in_set && hits == 0)) ++rep.agree;
        else if (rep.mismatches.size() < 16) rep.mismatches.push_back(x);
    }
    return rep;
}

} // namespace motive
