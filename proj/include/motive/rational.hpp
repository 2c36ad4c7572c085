#pragma once

// Exact integers and rationals (GMP-backed) plus the small number-theory
// helpers shared by the symbolic and brute-force sides.

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include "motive/errors.hpp"

namespace motive {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(std::int64_t num, std::int64_t den = 1) {
    if (den == 0) throw InvalidArgument("zero denominator");
    Rat r(Int(static_cast<long>(num)), Int(static_cast<long>(den)));
    r.canonicalize();
    return r;
}

inline Rat make_rat(const Int& num, const Int& den = 1) {
    if (den == 0) throw InvalidArgument("zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline bool is_integer(const Rat& r) { return r.get_den() == 1; }

inline std::string to_string(const Int& z) { return z.get_str(); }

inline std::string to_string(const Rat& r) {
    if (r.get_den() == 1) return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Parses "-12", "3/4" or "+5". Throws InvalidArgument on malformed input.
inline Rat parse_rat(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw InvalidArgument("empty rational literal");
    if (s.front() == '+') s.erase(0, 1);
    auto slash = s.find('/');
    auto valid_int = [](const std::string& t) {
        if (t.empty()) return false;
        std::size_t i = (t[0] == '-') ? 1 : 0;
        if (i == t.size()) return false;
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') return false;
        return true;
    };
    if (slash == std::string::npos) {
        if (!valid_int(s)) throw InvalidArgument("bad rational literal '" + s + "'");
        return Rat(Int(s));
    }
    std::string n = s.substr(0, slash), d = s.substr(slash + 1);
    if (!valid_int(n) || !valid_int(d)) throw InvalidArgument("bad rational literal '" + s + "'");
    return make_rat(Int(n), Int(d));
}

inline std::int64_t to_int64(const Int& z) {
    if (!z.fits_slong_p()) throw InvalidArgument("integer out of 64-bit range: " + z.get_str());
    return z.get_si();
}

/// Floor-mod for possibly negative a; m > 0.
constexpr std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

constexpr std::int64_t div_floor(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

constexpr std::int64_t div_ceil(std::int64_t a, std::int64_t b) { return -div_floor(-a, b); }

inline Int binomial(unsigned long n, unsigned long k) {
    Int r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

inline Rat pow_rat(const Rat& base, long e) {
    if (e < 0) {
        if (base == 0) throw InvalidArgument("zero to a negative power");
        return pow_rat(Rat(1) / base, -e);
    }
    Int n, d;
    mpz_pow_ui(n.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(e));
    mpz_pow_ui(d.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(e));
    return Rat(n, d);
}

/// p-adic valuation of a nonzero integer.
inline std::int64_t padic_val(const Int& z, unsigned long p) {
    if (z == 0) throw InvalidArgument("valuation of zero");
    Int t = z;
    std::int64_t v = 0;
    while (mpz_divisible_ui_p(t.get_mpz_t(), p)) {
        mpz_divexact_ui(t.get_mpz_t(), t.get_mpz_t(), p);
        ++v;
    }
    return v;
}

inline std::int64_t padic_val(const Rat& r, unsigned long p) {
    return padic_val(r.get_num(), p) - padic_val(r.get_den(), p);
}

/// Residue of r in F_p; requires p not dividing the denominator.
inline std::uint64_t residue_mod(const Rat& r, std::uint64_t p) {
    Int den = r.get_den() % Int(static_cast<unsigned long>(p));
    if (den == 0) throw ThresholdViolation("prime " + std::to_string(p) + " divides a denominator of " + to_string(r));
    Int inv;
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), Int(static_cast<unsigned long>(p)).get_mpz_t());
    Int num = r.get_num() % Int(static_cast<unsigned long>(p));
    if (num < 0) num += static_cast<unsigned long>(p);
    Int res = (num * inv) % Int(static_cast<unsigned long>(p));
    return res.get_ui();
}

/// Largest prime factor of |z| (0 for |z| <= 1). Factors above 10^6 are not
/// split: the remaining cofactor is returned, which is an upper bound.
inline Int max_prime_factor(Int z) {
    if (z < 0) z = -z;
    if (z <= 1) return 0;
    Int best = 0;
    for (unsigned long d = 2; d <= 1000000UL; ++d) {
        if (Int(d) * Int(d) > z) break;
        if (mpz_divisible_ui_p(z.get_mpz_t(), d)) {
            best = d;
            while (mpz_divisible_ui_p(z.get_mpz_t(), d)) mpz_divexact_ui(z.get_mpz_t(), z.get_mpz_t(), d);
        }
    }
    if (z > 1) best = z;
    return best;
}

/// Largest prime dividing the numerator or denominator of r.
inline Int max_prime_factor(const Rat& r) {
    Int a = max_prime_factor(r.get_num());
    Int b = max_prime_factor(r.get_den());
    return a > b ? a : b;
}

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    return mpz_probab_prime_p(Int(static_cast<unsigned long>(n)).get_mpz_t(), 30) > 0;
}

/// True if r is the n-th power of a rational.
inline bool is_perfect_power(const Rat& r, unsigned long n) {
    if (r == 0) return true;
    auto root_exact = [n](const Int& z) {
        if (z < 0) {
            if (n % 2 == 0) return false;
            return static_cast<bool>(mpz_root(Int().get_mpz_t(), Int(-z).get_mpz_t(), n));
        }
        return static_cast<bool>(mpz_root(Int().get_mpz_t(), z.get_mpz_t(), n));
    };
    return root_exact(r.get_num()) && root_exact(r.get_den());
}

inline std::int64_t lcm64(std::int64_t a, std::int64_t b) { return std::lcm(a, b); }

} // namespace motive
