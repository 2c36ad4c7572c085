#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "motive/rational.hpp"

namespace motive {

/// Sparse multivariate polynomial over Q in variables indexed 0..n-1.
class MPoly {
public:
    using Exponents = std::vector<unsigned>;

    MPoly() = default;
    MPoly(const Rat& c) { // NOLINT
        if (c != 0) terms_.emplace(Exponents{}, c);
    }
    MPoly(int c) : MPoly(Rat(c)) {} // NOLINT

    static MPoly var(std::size_t index) {
        Exponents e(index + 1, 0);
        e[index] = 1;
        MPoly p;
        p.terms_.emplace(std::move(e), Rat(1));
        return p;
    }

    bool is_zero() const { return terms_.empty(); }
    const std::map<Exponents, Rat>& terms() const { return terms_; }

    /// Number of variable slots referenced (max index + 1).
    std::size_t arity() const {
        std::size_t n = 0;
        for (const auto& [e, c] : terms_)
            for (std::size_t i = 0; i < e.size(); ++i)
                if (e[i] != 0) n = std::max(n, i + 1);
        return n;
    }

    unsigned degree_in(std::size_t var) const {
        unsigned d = 0;
        for (const auto& [e, c] : terms_)
            if (var < e.size()) d = std::max(d, e[var]);
        return d;
    }

    MPoly& operator+=(const MPoly& o) {
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    friend MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
    friend MPoly operator-(MPoly a) {
        for (auto& [e, c] : a.terms_) c = -c;
        return a;
    }
    friend MPoly operator-(const MPoly& a, const MPoly& b) { return a + (-b); }
    friend MPoly operator*(const MPoly& a, const MPoly& b) {
        MPoly r;
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exponents e(std::max(ea.size(), eb.size()), 0);
                for (std::size_t i = 0; i < ea.size(); ++i) e[i] += ea[i];
                for (std::size_t i = 0; i < eb.size(); ++i) e[i] += eb[i];
                r.add_term(e, ca * cb);
            }
        return r;
    }

    MPoly pow(unsigned k) const {
        MPoly r(1), b = *this;
        while (k) {
            if (k & 1U) r = r * b;
            k >>= 1U;
            if (k) b = b * b;
        }
        return r;
    }

    /// Replaces variable `var` by `value`.
    MPoly substitute(std::size_t var, const MPoly& value) const {
        MPoly r;
        std::vector<MPoly> powers{MPoly(1)};
        for (const auto& [e, c] : terms_) {
            unsigned k = var < e.size() ? e[var] : 0;
            while (powers.size() <= k) powers.push_back(powers.back() * value);
            Exponents rest = e;
            if (var < rest.size()) rest[var] = 0;
            MPoly mono;
            mono.add_term(rest, c);
            r += mono * powers[k];
        }
        return r;
    }

    /// Renames variable indices: new index = map[old index].
    MPoly remap(const std::vector<std::size_t>& map) const {
        MPoly r;
        for (const auto& [e, c] : terms_) {
            Exponents ne;
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (e[i] == 0) continue;
                std::size_t j = map.at(i);
                if (ne.size() <= j) ne.resize(j + 1, 0);
                ne[j] += e[i];
            }
            r.add_term(ne, c);
        }
        return r;
    }

    bool has_integer_coefficients() const {
        for (const auto& [e, c] : terms_)
            if (c.get_den() != 1) return false;
        return true;
    }

    Int denominator_lcm() const {
        Int l = 1;
        for (const auto& [e, c] : terms_) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
        return l;
    }

    friend bool operator==(const MPoly& a, const MPoly& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const MPoly& a, const MPoly& b) { return !(a == b); }

    /// Human-readable form with caller-supplied variable names.
    std::string to_string(const std::vector<std::string>& names) const {
        if (terms_.empty()) return "0";
        std::string out;
        // Highest total degree first for readability.
        std::vector<std::pair<Exponents, Rat>> ordered(terms_.rbegin(), terms_.rend());
        for (const auto& [e, c] : ordered) {
            std::string mono;
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (e[i] == 0) continue;
                if (!mono.empty()) mono += "*";
                mono += i < names.size() ? names[i] : "v" + std::to_string(i);
                if (e[i] > 1) mono += "^" + std::to_string(e[i]);
            }
            Rat mag = abs(c);
            if (out.empty()) out += c < 0 ? "-" : "";
            else out += c < 0 ? " - " : " + ";
            if (mono.empty()) out += motive::to_string(mag);
            else if (mag == 1) out += mono;
            else out += motive::to_string(mag) + "*" + mono;
        }
        return out;
    }

private:
    void add_term(Exponents e, const Rat& c) {
        while (!e.empty() && e.back() == 0) e.pop_back();
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            if (c != 0) terms_.emplace(std::move(e), c);
            return;
        }
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }

    std::map<Exponents, Rat> terms_;
};

/// An MPoly with coefficients reduced modulo a fixed modulus, for fast
/// repeated evaluation over Z/mZ (m < 2^62).
class ModPoly {
public:
    ModPoly(const MPoly& p, std::uint64_t modulus) : mod_(modulus) {
        Int m(static_cast<unsigned long>(modulus));
        for (const auto& [e, c] : p.terms()) {
            Int den = c.get_den() % m;
            Int inv;
            if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t()) == 0)
                throw ThresholdViolation("coefficient denominator not invertible modulo " + std::to_string(modulus));
            Int num = c.get_num() % m;
            if (num < 0) num += m;
            Int r = (num * inv) % m;
            if (r != 0) terms_.push_back({e, r.get_ui()});
            for (std::size_t i = 0; i < e.size(); ++i)
                if (e[i] != 0) nvars_ = std::max(nvars_, i + 1);
        }
    }

    std::uint64_t modulus() const { return mod_; }
    std::size_t arity() const { return nvars_; }

    std::uint64_t eval(const std::uint64_t* point) const {
        unsigned __int128 acc = 0;
        for (const auto& t : terms_) {
            unsigned __int128 v = t.coeff;
            for (std::size_t i = 0; i < t.exps.size(); ++i)
                for (unsigned k = 0; k < t.exps[i]; ++k) v = (v * point[i]) % mod_;
            acc = (acc + v) % mod_;
        }
        return static_cast<std::uint64_t>(acc);
    }

private:
    struct Term {
        MPoly::Exponents exps;
        std::uint64_t coeff;
    };
    std::uint64_t mod_;
    std::size_t nvars_ = 0;
    std::vector<Term> terms_;
};

} // namespace motive
