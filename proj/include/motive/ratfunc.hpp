#pragma once

#include <string>
#include <utility>

#include "motive/poly.hpp"

namespace motive {

/// Reduced rational function num/den in one variable over Q.
/// Canonical form: gcd(num, den) = 1 and den monic, so structural equality
/// is equality of functions.
class RatFuncQ {
public:
    RatFuncQ() : den_(1) {}
    RatFuncQ(const Rat& c) : num_(c), den_(1) {} // NOLINT
    RatFuncQ(int c) : RatFuncQ(Rat(c)) {}        // NOLINT
    RatFuncQ(const PolyQ& p) : num_(p), den_(1) {} // NOLINT

    /// Reduces without any admissibility check on the denominator.
    static RatFuncQ reduced(PolyQ num, PolyQ den) {
        if (den.is_zero()) throw DenominatorVanishes("rational function with zero denominator");
        RatFuncQ r;
        if (num.is_zero()) return r;
        PolyQ g = gcd(num, den);
        if (g.degree() > 0) {
            num = num.exact_div(g);
            den = den.exact_div(g);
        }
        Rat l = den.lead();
        r.num_ = num.scaled(Rat(1) / l);
        r.den_ = den.scaled(Rat(1) / l);
        return r;
    }

    /// Checked constructor for values of q: the denominator must not vanish
    /// at any integer q >= 2.
    static RatFuncQ make(PolyQ num, PolyQ den) {
        RatFuncQ r = reduced(std::move(num), std::move(den));
        if (has_integer_root_at_least_two(r.den_))
            throw DenominatorVanishes("denominator " + r.den_.to_string() + " vanishes at an integer q >= 2");
        return r;
    }

    /// q^k for any integer k.
    static RatFuncQ q_power(long k) {
        if (k >= 0) return RatFuncQ(PolyQ::monomial(1, static_cast<std::size_t>(k)));
        return reduced(PolyQ(1), PolyQ::monomial(1, static_cast<std::size_t>(-k)));
    }

    const PolyQ& num() const { return num_; }
    const PolyQ& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.degree() == 0; }

    friend RatFuncQ operator+(const RatFuncQ& a, const RatFuncQ& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) return reduced(a.num_ + b.num_, a.den_);
        return reduced(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFuncQ operator-(const RatFuncQ& a) {
        RatFuncQ r = a;
        r.num_ = -r.num_;
        return r;
    }
    friend RatFuncQ operator-(const RatFuncQ& a, const RatFuncQ& b) { return a + (-b); }
    friend RatFuncQ operator*(const RatFuncQ& a, const RatFuncQ& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.is_polynomial() && b.is_polynomial()) return RatFuncQ(a.num_ * b.num_);
        return reduced(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RatFuncQ operator/(const RatFuncQ& a, const RatFuncQ& b) {
        if (b.is_zero()) throw DenominatorVanishes("division by the zero rational function");
        return reduced(a.num_ * b.den_, a.den_ * b.num_);
    }
    RatFuncQ& operator+=(const RatFuncQ& o) { return *this = *this + o; }
    RatFuncQ& operator*=(const RatFuncQ& o) { return *this = *this * o; }

    RatFuncQ pow(unsigned e) const { return reduced(num_.pow(e), den_.pow(e)); }

    /// Formal derivative d/dx.
    RatFuncQ derivative() const {
        return reduced(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
    }

    Rat eval(const Rat& x) const {
        Rat d = den_.eval(x);
        if (d == 0) throw DenominatorVanishes("denominator " + den_.to_string() + " vanishes at " + motive::to_string(x));
        return num_.eval(x) / d;
    }

    friend bool operator==(const RatFuncQ& a, const RatFuncQ& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator!=(const RatFuncQ& a, const RatFuncQ& b) { return !(a == b); }

    std::string to_string(const std::string& var = "q") const {
        if (den_.degree() == 0) return num_.to_string(var);
        auto wrap = [&](const PolyQ& p) {
            std::string s = p.to_string(var);
            bool simple = p.sparse().size() == 1 && p.lead() > 0;
            return simple ? s : "(" + s + ")";
        };
        return wrap(num_) + "/" + wrap(den_);
    }

    /// True if the polynomial (over Q) has an integer root n >= 2.
    static bool has_integer_root_at_least_two(const PolyQ& p) {
        if (p.degree() <= 0) return false;
        // Clear denominators and strip the factor x^k (root 0 is irrelevant).
        Int l = 1;
        for (const auto& c : p.coeffs()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
        std::vector<Int> z;
        for (std::size_t i = p.low_degree(); i < p.coeffs().size(); ++i) {
            Rat c = p.coeffs()[i] * Rat(l);
            z.push_back(c.get_num());
        }
        if (z.size() <= 1) return false;
        // Integer roots divide z[0] and are bounded by the Cauchy bound.
        Int bound = 0;
        for (std::size_t i = 0; i + 1 < z.size(); ++i) {
            Int q = abs(z[i]) / abs(z.back()) + 1;
            if (q > bound) bound = q;
        }
        bound += 1;
        Int a0 = abs(z[0]);
        if (a0 < bound) bound = a0;
        for (Int r = 2; r <= bound; ++r) {
            if (!mpz_divisible_p(a0.get_mpz_t(), r.get_mpz_t())) continue;
            Int acc = 0;
            for (std::size_t i = z.size(); i-- > 0;) acc = acc * r + z[i];
            if (acc == 0) return true;
        }
        return false;
    }

private:
    PolyQ num_;
    PolyQ den_;
};

} // namespace motive
