#pragma once

#include <cstdint>
#include <vector>

#include "motive/integrate.hpp"
#include "motive/oracle.hpp"

namespace motive {

/// Rational root with multiplicity.
struct RootMult {
    Rat root;
    unsigned mult;
};

namespace detail {

inline std::vector<Int> divisors(Int n) {
    if (n < 0) n = -n;
    if (n == 0) return {};
    if (n > Int("1000000000000")) throw UnsupportedFormula("coefficients too large for rational root search");
    std::vector<Int> small, large;
    for (Int d = 1; d * d <= n; ++d) {
        if (n % d != 0) continue;
        small.push_back(d);
        if (d * d != n) large.push_back(n / d);
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

} // namespace detail

/// Writes f = c * prod (x - r_i)^{m_i} with rational r_i; throws
/// UnsupportedFormula if f has an irreducible factor of degree > 1.
inline std::pair<Rat, std::vector<RootMult>> rational_factorization(PolyQ f) {
    if (f.is_zero()) throw InvalidArgument("cannot factor the zero polynomial");
    Rat lead = f.lead();
    std::vector<RootMult> roots;
    if (std::size_t k = f.low_degree(); k > 0) {
        roots.push_back({0, static_cast<unsigned>(k)});
        std::vector<Rat> c(f.coeffs().begin() + static_cast<long>(k), f.coeffs().end());
        f = PolyQ(c);
    }
    // Integer primitive form.
    Int l = 1;
    for (const auto& c : f.coeffs()) l = lcm(l, Int(c.get_den()));
    PolyQ g = f.scaled(Rat(l));
    Int a0 = g.coeff(0).get_num(), an = g.lead().get_num();
    for (const auto& num : detail::divisors(a0)) {
        for (const auto& den : detail::divisors(an)) {
            if (gcd(num, den) != 1) continue;
            for (int sign : {1, -1}) {
                Rat r = make_rat(Int(num * sign), den);
                PolyQ lin({-r, Rat(1)});
                unsigned m = 0;
                while (g.degree() >= 1 && g.eval(r) == 0) {
                    g = g.exact_div(lin);
                    ++m;
                }
                if (m) roots.push_back({r, m});
            }
        }
    }
    if (g.degree() >= 1) throw UnsupportedFormula("polynomial has a nonlinear irreducible factor over Q");
    std::sort(roots.begin(), roots.end(), [](const RootMult& a, const RootMult& b) { return a.root < b.root; });
    return {lead, roots};
}

/// Poincaré series sum_s N_{p^s} T^s as a motivic series, valid for p >= threshold.
struct SymbolicPoincare {
    MotivicSeries series;
    std::uint64_t threshold = 2;
};

/// Closed form for affine space and for one equation in a single
/// variable whose roots are all rational. Other varieties raise
/// UnsupportedFormula.
inline SymbolicPoincare symbolic_poincare(const VarietySpec& v) {
    v.validate();
    const long n = static_cast<long>(v.n);
    std::vector<MPoly> eqs;
    for (const auto& f : v.polys)
        if (!f.is_zero()) eqs.push_back(f);

    std::vector<FamilyPiece> pieces;
    FamilyPiece base; // X_0 = O
    base.cell.center = 0;
    base.cell.vmin = AffineBound{0, -1};
    std::uint64_t thr = 2;

    if (eqs.empty()) {
        base.s_hi.reset();
        pieces.push_back(base);
    } else {
        if (eqs.size() > 1) throw UnsupportedFormula("symbolic series supports a single equation");
        const MPoly& f = eqs[0];
        std::size_t var = 0, used = 0;
        for (std::size_t i = 0; i < v.n; ++i)
            if (f.degree_in(i) > 0) {
                var = i;
                ++used;
            }
        if (used > 1) throw UnsupportedFormula("symbolic series supports equations in one variable");
        std::vector<Rat> c(f.degree_in(var) + 1, 0);
        for (const auto& [e, coef] : f.terms()) c[var < e.size() ? e[var] : 0] += coef;
        auto [lead, roots] = rational_factorization(PolyQ(c));
        auto bump = [&](const Int& m) {
            if (m != 0) thr = std::max<std::uint64_t>(thr, to_int64(m) + 1);
        };
        bump(max_prime_factor(lead));
        for (std::size_t i = 0; i < roots.size(); ++i) {
            bump(max_prime_factor(Int(roots[i].root.get_den())));
            for (std::size_t j = i + 1; j < roots.size(); ++j) bump(max_prime_factor(roots[j].root - roots[i].root));
        }
        base.s_hi = 0;
        pieces.push_back(base);
        // s >= 1: disjoint balls v(x - r) >= ceil(s / m).
        for (const auto& [r, m] : roots) {
            for (unsigned sigma = 1; sigma <= m; ++sigma) {
                FamilyPiece fp;
                fp.cell.center = r;
                fp.cell.vmin = AffineBound{make_rat(1, m), make_rat(-static_cast<long>(sigma), m)};
                fp.s_residue = sigma % m;
                fp.s_modulus = m;
                fp.s_lo = 1;
                pieces.push_back(fp);
            }
        }
    }
    SymbolicPoincare out;
    out.series = measure_family_series(pieces).subst_t_scale(n);
    out.series.raise_threshold(thr);
    out.threshold = std::max(thr, out.series.threshold());
    return out;
}

} // namespace motive
