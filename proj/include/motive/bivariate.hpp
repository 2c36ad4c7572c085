#pragma once

// Polynomials and rational functions in (q, T), stored as polynomials in T
// whose coefficients are polynomials in q.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "motive/ratfunc.hpp"

namespace motive {

class PolyQT {
public:
    PolyQT() = default;
    PolyQT(const PolyQ& c) { // NOLINT
        if (!c.is_zero()) coeffs_.push_back(c);
    }
    PolyQT(const Rat& c) : PolyQT(PolyQ(c)) {} // NOLINT
    PolyQT(int c) : PolyQT(PolyQ(c)) {}        // NOLINT
    explicit PolyQT(std::vector<PolyQ> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    /// c(q) * T^k
    static PolyQT monomial(const PolyQ& c, std::size_t k) {
        if (c.is_zero()) return {};
        std::vector<PolyQ> v(k + 1);
        v[k] = c;
        return PolyQT(std::move(v));
    }

    bool is_zero() const { return coeffs_.empty(); }
    long degree() const { return static_cast<long>(coeffs_.size()) - 1; }
    const PolyQ& lead() const { return coeffs_.back(); }
    PolyQ coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : PolyQ{}; }
    const std::vector<PolyQ>& coeffs() const { return coeffs_; }

    std::size_t low_degree() const {
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            if (!coeffs_[i].is_zero()) return i;
        return 0;
    }

    /// Largest q-degree among the coefficients.
    long q_degree() const {
        long d = -1;
        for (const auto& c : coeffs_) d = std::max(d, c.degree());
        return d;
    }

    friend PolyQT operator+(PolyQT a, const PolyQT& b) {
        if (b.coeffs_.size() > a.coeffs_.size()) a.coeffs_.resize(b.coeffs_.size());
        for (std::size_t i = 0; i < b.coeffs_.size(); ++i) a.coeffs_[i] += b.coeffs_[i];
        a.trim();
        return a;
    }
    friend PolyQT operator-(PolyQT a) {
        for (auto& c : a.coeffs_) c = -c;
        return a;
    }
    friend PolyQT operator-(const PolyQT& a, const PolyQT& b) { return a + (-b); }
    friend PolyQT operator*(const PolyQT& a, const PolyQT& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<PolyQ> r(a.coeffs_.size() + b.coeffs_.size() - 1);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
            if (a.coeffs_[i].is_zero()) continue;
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) r[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
        return PolyQT(std::move(r));
    }

    PolyQT scaled(const PolyQ& c) const {
        if (c.is_zero()) return {};
        PolyQT r = *this;
        for (auto& x : r.coeffs_) x *= c;
        r.trim();
        return r;
    }

    /// Multiplication by T^k.
    PolyQT t_shifted(std::size_t k) const {
        if (is_zero() || k == 0) return *this;
        std::vector<PolyQ> r(k);
        r.insert(r.end(), coeffs_.begin(), coeffs_.end());
        return PolyQT(std::move(r));
    }

    /// gcd over Q[q] of all T-coefficients (monic).
    PolyQ content() const {
        PolyQ g;
        for (const auto& c : coeffs_) {
            g = gcd(g, c);
            if (g.degree() == 0) return PolyQ(1);
        }
        return g;
    }

    /// Divides every coefficient exactly by c.
    PolyQT div_coeffs(const PolyQ& c) const {
        PolyQT r = *this;
        for (auto& x : r.coeffs_) x = x.exact_div(c);
        return r;
    }

    PolyQT primitive_part() const {
        if (is_zero()) return {};
        return div_coeffs(content());
    }

    /// Pseudo-remainder: lc(d)^(deg a - deg d + 1) * a mod d.
    PolyQT prem(const PolyQT& d) const {
        PolyQT r = *this;
        if (d.is_zero()) throw InvalidArgument("pseudo-division by zero");
        while (!r.is_zero() && r.degree() >= d.degree()) {
            std::size_t shift = static_cast<std::size_t>(r.degree() - d.degree());
            PolyQ lr = r.lead();
            r = r.scaled(d.lead()) - d.scaled(lr).t_shifted(shift);
        }
        return r;
    }

    /// Exact division in Q[q][T]; throws if d does not divide *this.
    PolyQT exact_div(const PolyQT& d) const {
        if (d.is_zero()) throw InvalidArgument("division by zero polynomial");
        if (is_zero()) return {};
        if (degree() < d.degree()) throw InvalidArgument("inexact bivariate division");
        std::vector<PolyQ> quo(static_cast<std::size_t>(degree() - d.degree() + 1));
        PolyQT r = *this;
        while (!r.is_zero() && r.degree() >= d.degree()) {
            std::size_t shift = static_cast<std::size_t>(r.degree() - d.degree());
            PolyQ f = r.lead().exact_div(d.lead());
            quo[shift] = f;
            r = r - d.scaled(f).t_shifted(shift);
        }
        if (!r.is_zero()) throw InvalidArgument("inexact bivariate division");
        return PolyQT(std::move(quo));
    }

    /// gcd in Q[q,T] via content/primitive-part pseudo-remainder sequences.
    friend PolyQT gcd_prs(const PolyQT& a, const PolyQT& b) {
        if (a.is_zero()) return b.normalized_unit();
        if (b.is_zero()) return a.normalized_unit();
        PolyQ c = gcd(a.content(), b.content());
        PolyQT x = a.primitive_part(), y = b.primitive_part();
        if (x.degree() < y.degree()) std::swap(x, y);
        while (!y.is_zero()) {
            PolyQT r = x.prem(y);
            x = std::move(y);
            y = r.is_zero() ? PolyQT{} : r.primitive_part();
        }
        return x.primitive_part().scaled(c).normalized_unit();
    }

    friend PolyQT gcd(const PolyQT& a, const PolyQT& b);

    /// Scales by a rational so that the leading q-coefficient of the lowest
    /// nonzero T-coefficient is 1.
    PolyQT normalized_unit() const {
        if (is_zero()) return {};
        Rat l = coeffs_[low_degree()].lead();
        return scaled(PolyQ(Rat(1) / l));
    }

    PolyQ eval_t(const Rat& t) const {
        PolyQ r;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r.scaled(t) + *it;
        return r;
    }

    /// Specializes q := value, leaving a polynomial in T.
    PolyQ at_q(const Rat& value) const {
        std::vector<Rat> v;
        v.reserve(coeffs_.size());
        for (const auto& c : coeffs_) v.push_back(c.eval(value));
        return PolyQ(std::move(v));
    }

    /// Substitutes T := q^k * T for k >= 0.
    PolyQT scale_t(std::size_t k) const {
        PolyQT r = *this;
        for (std::size_t i = 0; i < r.coeffs_.size(); ++i) r.coeffs_[i] = r.coeffs_[i].shifted(k * i);
        return r;
    }

    friend bool operator==(const PolyQT& a, const PolyQT& b) { return a.coeffs_ == b.coeffs_; }
    friend bool operator!=(const PolyQT& a, const PolyQT& b) { return !(a == b); }

    std::string to_string() const {
        if (is_zero()) return "0";
        std::string out;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            const PolyQ& c = coeffs_[i];
            if (c.is_zero()) continue;
            std::string cs = c.to_string("q");
            bool single = c.sparse().size() == 1;
            bool negative = c.lead() < 0 && single;
            if (negative) cs = (-c).to_string("q");
            if (!out.empty()) out += negative ? " - " : " + ";
            else if (negative) out += "-";
            std::string tpart = i == 0 ? "" : (i == 1 ? "T" : "T^" + std::to_string(i));
            if (tpart.empty()) out += single ? cs : "(" + cs + ")";
            else if (cs == "1") out += tpart;
            else out += (single ? cs : "(" + cs + ")") + "*" + tpart;
        }
        return out;
    }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
    }

    std::vector<PolyQ> coeffs_;
};

namespace detail {

// Dense integer polynomials: Z1[i] is the coefficient of T^i (or q^i),
// Z2[i][j] the coefficient of T^i q^j.
using Z1 = std::vector<Int>;
using Z2 = std::vector<Z1>;

inline void trim(Z1& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}
inline void trim(Z2& a) {
    for (auto& r : a) trim(r);
    while (!a.empty() && a.back().empty()) a.pop_back();
}

inline Int max_abs(const Z1& a) {
    Int m = 0;
    for (const auto& c : a) m = std::max<Int>(m, abs(c));
    return m;
}
inline Int max_abs(const Z2& a) {
    Int m = 0;
    for (const auto& r : a) m = std::max(m, max_abs(r));
    return m;
}

inline Int content(const Z1& a) {
    Int g = 0;
    for (const auto& c : a) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
        if (g == 1) break;
    }
    return g;
}
inline Int content(const Z2& a) {
    Int g = 0;
    for (const auto& r : a) {
        Int c = content(r);
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
        if (g == 1) break;
    }
    return g;
}

inline void divide_content(Z1& a) {
    Int g = content(a);
    if (g > 1)
        for (auto& c : a) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
    if (!a.empty() && a.back() < 0)
        for (auto& c : a) c = -c;
}
inline void divide_content(Z2& a) {
    Int g = content(a);
    if (g > 1)
        for (auto& r : a)
            for (auto& c : r) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
    if (!a.empty() && a.back().back() < 0)
        for (auto& r : a)
            for (auto& c : r) c = -c;
}

/// Integer multiple of a with content 1.
inline Z2 to_z2(const PolyQT& a) {
    Int l = 1;
    for (const auto& c : a.coeffs())
        for (const auto& r : c.coeffs()) l = lcm(l, Int(r.get_den()));
    Z2 out(a.coeffs().size());
    for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
        const auto& cs = a.coeffs()[i].coeffs();
        out[i].resize(cs.size());
        for (std::size_t j = 0; j < cs.size(); ++j) out[i][j] = cs[j].get_num() * (l / cs[j].get_den());
    }
    trim(out);
    divide_content(out);
    return out;
}

inline PolyQT from_z2(const Z2& a) {
    std::vector<PolyQ> cs;
    for (const auto& r : a) {
        std::vector<Rat> v(r.begin(), r.end());
        cs.emplace_back(std::move(v));
    }
    return PolyQT(std::move(cs));
}

/// Exact quotient a / d in Z[x] if it exists.
inline std::optional<Z1> divide(Z1 a, const Z1& d) {
    trim(a);
    if (d.empty()) return std::nullopt;
    if (a.empty()) return Z1{};
    if (a.size() < d.size()) return std::nullopt;
    Z1 quo(a.size() - d.size() + 1);
    Int q, r;
    for (std::size_t k = quo.size(); k-- > 0;) {
        const Int& top = a[k + d.size() - 1];
        if (top == 0) continue;
        mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), top.get_mpz_t(), d.back().get_mpz_t());
        if (r != 0) return std::nullopt;
        quo[k] = q;
        for (std::size_t j = 0; j < d.size(); ++j)
            if (d[j] != 0) a[k + j] -= q * d[j];
    }
    for (std::size_t i = 0; i + 1 < d.size() && i < a.size(); ++i)
        if (a[i] != 0) return std::nullopt;
    trim(quo);
    return quo;
}

inline Z1 mul(const Z1& a, const Z1& b) {
    if (a.empty() || b.empty()) return {};
    Z1 r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            if (b[j] != 0) r[i + j] += a[i] * b[j];
    }
    return r;
}

inline void sub_into(Z1& a, const Z1& b) {
    if (a.size() < b.size()) a.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b[i] != 0) a[i] -= b[i];
    trim(a);
}

/// Exact quotient a / d in Z[q][T] if it exists.
inline bool divides(const Z2& d, Z2 a) {
    trim(a);
    if (d.empty()) return a.empty();
    if (a.empty()) return true;
    if (a.size() < d.size()) return false;
    for (std::size_t k = a.size() - d.size() + 1; k-- > 0;) {
        Z1& top = a[k + d.size() - 1];
        trim(top);
        if (top.empty()) continue;
        auto f = divide(top, d.back());
        if (!f) return false;
        for (std::size_t j = 0; j < d.size(); ++j) sub_into(a[k + j], mul(*f, d[j]));
    }
    for (const auto& r : a)
        for (const auto& c : r)
            if (c != 0) return false;
    return true;
}

inline Int eval(const Z1& a, const Int& x) {
    Int acc = 0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * x + *it;
    return acc;
}

/// Digits of z in base xi with symmetric remainders.
inline Z1 symmetric_digits(Int z, const Int& xi) {
    Z1 out;
    Int half = xi / 2, r;
    while (z != 0) {
        mpz_fdiv_r(r.get_mpz_t(), z.get_mpz_t(), xi.get_mpz_t());
        if (r > half) r -= xi;
        out.push_back(r);
        z -= r;
        mpz_divexact(z.get_mpz_t(), z.get_mpz_t(), xi.get_mpz_t());
    }
    return out;
}

inline Int next_point(const Int& xi) { return xi * 73794 / 27011; }

/// Heuristic gcd of nonzero a, b in Z[x]; the result divides both and is
/// the full gcd (content included) when returned.
inline std::optional<Z1> gcd_heuristic(const Z1& a, const Z1& b) {
    if (a.size() == 1 || b.size() == 1) {
        Int g = content(a);
        Int cb = content(b);
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), cb.get_mpz_t());
        return Z1{g};
    }
    Int ca = content(a), cb = content(b), cg;
    mpz_gcd(cg.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
    Z1 pa = a, pb = b;
    divide_content(pa);
    divide_content(pb);
    Int xi = 2 * std::min(max_abs(pa), max_abs(pb)) + 29;
    for (int attempt = 0; attempt < 6; ++attempt, xi = next_point(xi)) {
        Int ga = eval(pa, xi), gb = eval(pb, xi), g;
        mpz_gcd(g.get_mpz_t(), ga.get_mpz_t(), gb.get_mpz_t());
        Z1 cand = symmetric_digits(g, xi);
        if (cand.empty()) continue;
        divide_content(cand);
        if (divide(pa, cand) && divide(pb, cand)) {
            for (auto& c : cand) c *= cg;
            return cand;
        }
    }
    return std::nullopt;
}

inline std::optional<Z2> gcd_heuristic(const Z2& a, const Z2& b) {
    Int xi = 2 * std::min(max_abs(a), max_abs(b)) + 29;
    for (int attempt = 0; attempt < 6; ++attempt, xi = next_point(xi)) {
        Z1 ea(a.size()), eb(b.size());
        for (std::size_t i = 0; i < a.size(); ++i) ea[i] = eval(a[i], xi);
        for (std::size_t i = 0; i < b.size(); ++i) eb[i] = eval(b[i], xi);
        trim(ea);
        trim(eb);
        if (ea.size() != a.size() || eb.size() != b.size()) continue;
        auto g1 = gcd_heuristic(ea, eb);
        if (!g1) continue;
        Z2 cand;
        for (const auto& c : *g1) cand.push_back(symmetric_digits(c, xi));
        trim(cand);
        if (cand.empty()) continue;
        divide_content(cand);
        if (divides(cand, a) && divides(cand, b)) return cand;
    }
    return std::nullopt;
}

constexpr std::uint64_t kGcdPrime = 2305843009213693951ULL; // 2^61 - 1

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % kGcdPrime);
}
inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    for (; e; e >>= 1, a = mulmod(a, a))
        if (e & 1) r = mulmod(r, a);
    return r;
}

inline std::vector<std::uint64_t> image_mod(const Z2& a, std::uint64_t q0) {
    const Int P(static_cast<unsigned long>(kGcdPrime));
    std::vector<std::uint64_t> out(a.size());
    Int t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::uint64_t acc = 0;
        for (auto it = a[i].rbegin(); it != a[i].rend(); ++it) {
            mpz_fdiv_r(t.get_mpz_t(), it->get_mpz_t(), P.get_mpz_t());
            acc = (mulmod(acc, q0) + t.get_ui()) % kGcdPrime;
        }
        out[i] = acc;
    }
    return out;
}

inline std::size_t gcd_degree_mod(std::vector<std::uint64_t> x, std::vector<std::uint64_t> y) {
    auto trim_mod = [](std::vector<std::uint64_t>& v) {
        while (!v.empty() && v.back() == 0) v.pop_back();
    };
    trim_mod(x);
    trim_mod(y);
    if (x.size() < y.size()) std::swap(x, y);
    while (!y.empty()) {
        std::uint64_t inv = powmod(y.back(), kGcdPrime - 2);
        while (x.size() >= y.size()) {
            std::uint64_t f = mulmod(x.back(), inv);
            std::size_t shift = x.size() - y.size();
            for (std::size_t j = 0; j < y.size(); ++j)
                x[shift + j] = (x[shift + j] + kGcdPrime - mulmod(f, y[j])) % kGcdPrime;
            trim_mod(x);
            if (x.empty()) break;
        }
        std::swap(x, y);
    }
    return x.empty() ? 0 : x.size() - 1;
}

/// True if a and b (integer, primitive) have no common factor of positive
/// T-degree. Uses the image at q = q0 mod 2^61 - 1; a leading coefficient
/// that survives the reduction makes a coprime image conclusive.
inline bool t_coprime(const Z2& a, const Z2& b) {
    static const std::uint64_t points[] = {1000003ULL, 998244353ULL, 1234567891011ULL};
    for (std::uint64_t q0 : points) {
        auto ia = image_mod(a, q0), ib = image_mod(b, q0);
        if (ia.back() == 0 || ib.back() == 0) continue;
        return gcd_degree_mod(ia, ib) == 0;
    }
    return false;
}

} // namespace detail

/// gcd in Q[q,T], normalized as in normalized_unit().
inline PolyQT gcd(const PolyQT& a, const PolyQT& b) {
    if (a.is_zero()) return b.normalized_unit();
    if (b.is_zero()) return a.normalized_unit();
    detail::Z2 x = detail::to_z2(a), y = detail::to_z2(b);
    if (detail::t_coprime(x, y)) return PolyQT(gcd(a.content(), b.content())).normalized_unit();
    if (auto g = detail::gcd_heuristic(x, y)) return detail::from_z2(*g).normalized_unit();
    return gcd_prs(a, b);
}

/// Reduced rational function in (q, T): num and den coprime in Q[q,T], den
/// scaled so that the leading q-coefficient of its lowest T-coefficient is 1.
/// Expansions in T need den(q, 0) != 0, which holds for every series built
/// by this library.
class RatFuncQT {
public:
    RatFuncQT() : den_(1) {}
    RatFuncQT(const RatFuncQ& f) // NOLINT
        : num_(PolyQT(f.num())), den_(PolyQT(f.den())) {
        normalize_scalar();
    }
    RatFuncQT(const Rat& c) : RatFuncQT(RatFuncQ(c)) {} // NOLINT
    RatFuncQT(int c) : RatFuncQT(RatFuncQ(c)) {}        // NOLINT

    static RatFuncQT make(PolyQT num, PolyQT den) {
        if (den.is_zero()) throw DenominatorVanishes("zero denominator in Q(q,T)");
        RatFuncQT r;
        if (num.is_zero()) return r;
        PolyQT g = gcd(num, den);
        if (g.degree() > 0 || g.q_degree() > 0) {
            num = num.exact_div(g);
            den = den.exact_div(g);
        }
        r.num_ = std::move(num);
        r.den_ = std::move(den);
        r.normalize_scalar();
        return r;
    }

    /// T^k
    static RatFuncQT t_power(std::size_t k) { return make(PolyQT::monomial(PolyQ(1), k), PolyQT(1)); }

    const PolyQT& num() const { return num_; }
    const PolyQT& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }

    friend RatFuncQT operator+(const RatFuncQT& a, const RatFuncQT& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) return make(a.num_ + b.num_, a.den_);
        return make(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFuncQT operator-(const RatFuncQT& a) {
        RatFuncQT r = a;
        r.num_ = -r.num_;
        return r;
    }
    friend RatFuncQT operator-(const RatFuncQT& a, const RatFuncQT& b) { return a + (-b); }
    friend RatFuncQT operator*(const RatFuncQT& a, const RatFuncQT& b) {
        if (a.is_zero() || b.is_zero()) return {};
        return make(a.num_ * b.num_, a.den_ * b.den_);
    }
    RatFuncQT& operator+=(const RatFuncQT& o) { return *this = *this + o; }

    /// Substitutes T := q^k * T (k may be negative).
    RatFuncQT subst_t_scale(long k) const {
        if (k >= 0) return make(num_.scale_t(static_cast<std::size_t>(k)), den_.scale_t(static_cast<std::size_t>(k)));
        // T := q^{-j} T, then multiply both sides by q^{j*deg}.
        std::size_t j = static_cast<std::size_t>(-k);
        std::size_t deg = static_cast<std::size_t>(std::max(num_.degree(), den_.degree()));
        auto conv = [&](const PolyQT& p) {
            std::vector<PolyQ> v;
            for (std::size_t i = 0; i < p.coeffs().size(); ++i) v.push_back(p.coeffs()[i].shifted(j * (deg - i)));
            return PolyQT(std::move(v));
        };
        return make(conv(num_), conv(den_));
    }

    /// First n coefficients of the expansion in T, as functions of q.
    std::vector<RatFuncQ> expand(std::size_t n) const {
        PolyQ d0 = den_.coeff(0);
        if (d0.is_zero()) throw InvalidArgument("series has a pole at T = 0");
        RatFuncQ inv = RatFuncQ::reduced(PolyQ(1), d0);
        std::vector<RatFuncQ> c(n);
        for (std::size_t k = 0; k < n; ++k) {
            RatFuncQ acc(num_.coeff(k));
            for (std::size_t j = 1; j <= k && j < den_.coeffs().size(); ++j) {
                if (den_.coeffs()[j].is_zero()) continue;
                acc = acc - RatFuncQ(den_.coeffs()[j]) * c[k - j];
            }
            c[k] = acc * inv;
        }
        return c;
    }

    /// First n coefficients of the expansion after specializing q := value.
    std::vector<Rat> expand_at(const Rat& q, std::size_t n) const {
        PolyQ nq = num_.at_q(q), dq = den_.at_q(q);
        if (dq.coeff(0) == 0) throw DenominatorVanishes("series denominator vanishes at T = 0 for q = " + to_string_rat(q));
        std::vector<Rat> c(n);
        Rat inv = Rat(1) / dq.coeff(0);
        for (std::size_t k = 0; k < n; ++k) {
            Rat acc = nq.coeff(k);
            for (std::size_t j = 1; j <= k && j < dq.coeffs().size(); ++j) acc -= dq.coeffs()[j] * c[k - j];
            c[k] = acc * inv;
        }
        return c;
    }

    friend bool operator==(const RatFuncQT& a, const RatFuncQT& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator!=(const RatFuncQT& a, const RatFuncQT& b) { return !(a == b); }

    std::string to_string() const {
        if (den_ == PolyQT(1)) return num_.to_string();
        auto wrap = [](const PolyQT& p) {
            std::string s = p.to_string();
            bool simple = p.coeffs().size() == 1 && p.coeffs()[0].sparse().size() == 1 && p.coeffs()[0].lead() > 0;
            return simple ? s : "(" + s + ")";
        };
        return wrap(num_) + "/" + wrap(den_);
    }

private:
    static std::string to_string_rat(const Rat& r) { return motive::to_string(r); }

    void normalize_scalar() {
        if (num_.is_zero()) {
            den_ = PolyQT(1);
            return;
        }
        Rat l = den_.coeffs()[den_.low_degree()].lead();
        if (l != 1) {
            num_ = num_.scaled(PolyQ(Rat(1) / l));
            den_ = den_.scaled(PolyQ(Rat(1) / l));
        }
    }

    PolyQT num_;
    PolyQT den_;
};

} // namespace motive
