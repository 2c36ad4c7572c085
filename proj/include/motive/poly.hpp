#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "motive/rational.hpp"

namespace motive {

/// Dense univariate polynomial over Q. The variable is q unless the caller
/// says otherwise (the series engine also uses it for a grouped variable z).
/// Leading zeros are never stored; the zero polynomial has no coefficients.
class PolyQ {
public:
    PolyQ() = default;
    PolyQ(const Rat& c) { // NOLINT: implicit constant promotion is convenient
        if (c != 0) coeffs_.push_back(c);
    }
    PolyQ(int c) : PolyQ(Rat(c)) {} // NOLINT
    explicit PolyQ(std::vector<Rat> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    static PolyQ monomial(const Rat& c, std::size_t degree) {
        if (c == 0) return {};
        std::vector<Rat> v(degree + 1);
        v[degree] = c;
        return PolyQ(std::move(v));
    }
    static PolyQ x() { return monomial(1, 1); }

    bool is_zero() const { return coeffs_.empty(); }
    /// Degree; -1 for the zero polynomial.
    long degree() const { return static_cast<long>(coeffs_.size()) - 1; }
    const Rat& lead() const { return coeffs_.back(); }
    Rat coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Rat(0); }
    const std::vector<Rat>& coeffs() const { return coeffs_; }
    bool is_constant() const { return coeffs_.size() <= 1; }

    /// Lowest exponent with nonzero coefficient (0 for the zero polynomial).
    std::size_t low_degree() const {
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            if (coeffs_[i] != 0) return i;
        return 0;
    }

    PolyQ& operator+=(const PolyQ& o) {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
        for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        trim();
        return *this;
    }
    PolyQ& operator-=(const PolyQ& o) {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
        for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        trim();
        return *this;
    }
    friend PolyQ operator+(PolyQ a, const PolyQ& b) { return a += b; }
    friend PolyQ operator-(PolyQ a, const PolyQ& b) { return a -= b; }
    friend PolyQ operator-(PolyQ a) {
        for (auto& c : a.coeffs_) c = -c;
        return a;
    }

    friend PolyQ operator*(const PolyQ& a, const PolyQ& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rat> r(a.coeffs_.size() + b.coeffs_.size() - 1);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
            if (a.coeffs_[i] == 0) continue;
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) r[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
        return PolyQ(std::move(r));
    }
    PolyQ& operator*=(const PolyQ& o) { return *this = *this * o; }

    PolyQ scaled(const Rat& c) const {
        if (c == 0) return {};
        PolyQ r = *this;
        for (auto& x : r.coeffs_) x *= c;
        return r;
    }

    /// Multiplication by x^k.
    PolyQ shifted(std::size_t k) const {
        if (is_zero() || k == 0) return *this;
        std::vector<Rat> r(k);
        r.insert(r.end(), coeffs_.begin(), coeffs_.end());
        return PolyQ(std::move(r));
    }

    PolyQ pow(unsigned e) const {
        PolyQ r(1), b = *this;
        while (e) {
            if (e & 1U) r *= b;
            e >>= 1U;
            if (e) b *= b;
        }
        return r;
    }

    PolyQ derivative() const {
        if (coeffs_.size() <= 1) return {};
        std::vector<Rat> r(coeffs_.size() - 1);
        for (std::size_t i = 1; i < coeffs_.size(); ++i) r[i - 1] = coeffs_[i] * static_cast<unsigned long>(i);
        return PolyQ(std::move(r));
    }

    /// Composition this(inner).
    PolyQ compose(const PolyQ& inner) const {
        PolyQ r;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r * inner + PolyQ(*it);
        return r;
    }

    Rat eval(const Rat& x) const {
        Rat r = 0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r * x + *it;
        return r;
    }

    PolyQ monic() const { return is_zero() ? PolyQ{} : scaled(Rat(1) / lead()); }

    /// Euclidean division: *this = q * d + r with deg r < deg d.
    std::pair<PolyQ, PolyQ> divmod(const PolyQ& d) const {
        if (d.is_zero()) throw InvalidArgument("polynomial division by zero");
        if (degree() < d.degree()) return {PolyQ{}, *this};
        std::vector<Rat> rem = coeffs_;
        std::vector<Rat> quo(coeffs_.size() - d.coeffs_.size() + 1);
        const Rat inv = Rat(1) / d.lead();
        for (long i = static_cast<long>(rem.size()) - 1; i >= d.degree(); --i) {
            if (rem[i] == 0) continue;
            Rat f = rem[i] * inv;
            std::size_t shift = static_cast<std::size_t>(i - d.degree());
            quo[shift] = f;
            for (std::size_t j = 0; j < d.coeffs_.size(); ++j) rem[shift + j] -= f * d.coeffs_[j];
        }
        return {PolyQ(std::move(quo)), PolyQ(std::move(rem))};
    }

    /// Exact division; throws if the remainder is nonzero.
    PolyQ exact_div(const PolyQ& d) const {
        auto [q, r] = divmod(d);
        if (!r.is_zero()) throw InvalidArgument("inexact polynomial division");
        return q;
    }

    friend PolyQ gcd(PolyQ a, PolyQ b) {
        while (!b.is_zero()) {
            PolyQ r = a.divmod(b).second;
            a = std::move(b);
            b = std::move(r);
        }
        return a.monic();
    }

    friend bool operator==(const PolyQ& a, const PolyQ& b) { return a.coeffs_ == b.coeffs_; }
    friend bool operator!=(const PolyQ& a, const PolyQ& b) { return !(a == b); }
    friend bool operator<(const PolyQ& a, const PolyQ& b) {
        if (a.coeffs_.size() != b.coeffs_.size()) return a.coeffs_.size() < b.coeffs_.size();
        for (std::size_t i = a.coeffs_.size(); i-- > 0;)
            if (a.coeffs_[i] != b.coeffs_[i]) return a.coeffs_[i] < b.coeffs_[i];
        return false;
    }

    /// Sparse exponent -> coefficient view (no zero entries).
    std::map<std::size_t, Rat> sparse() const {
        std::map<std::size_t, Rat> m;
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            if (coeffs_[i] != 0) m.emplace(i, coeffs_[i]);
        return m;
    }

    std::string to_string(const std::string& var = "q") const {
        if (is_zero()) return "0";
        std::string out;
        for (std::size_t i = coeffs_.size(); i-- > 0;) {
            const Rat& c = coeffs_[i];
            if (c == 0) continue;
            Rat mag = abs(c);
            if (out.empty()) {
                if (c < 0) out += "-";
            } else {
                out += c < 0 ? " - " : " + ";
            }
            bool unit = (mag == 1);
            if (!unit || i == 0) out += motive::to_string(mag);
            if (i > 0) {
                if (!unit) out += "*";
                out += var;
                if (i > 1) out += "^" + std::to_string(i);
            }
        }
        return out;
    }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
    }

    std::vector<Rat> coeffs_;
};

} // namespace motive
