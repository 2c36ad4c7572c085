#pragma once

// Integration of prepared functions: per cell, coeff * v(x - c)^a *
// q^{e v(x - c)} restricted to an ac refinement, summed shell by shell.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "motive/decompose.hpp"
#include "motive/presburger.hpp"

namespace motive {

struct PreparedTerm {
    MotivicValue coeff = MotivicValue(1);
    unsigned v_power = 0;
    std::int64_t q_slope = 0;
    ClassRef ac_factor; // null: no refinement

    std::string to_string() const {
        std::string out = "(" + coeff.to_string() + ")";
        if (v_power > 0) out += " * v(x)^" + std::to_string(v_power);
        if (q_slope != 0) out += " * q^(" + std::to_string(q_slope) + "*v(x))";
        if (ac_factor) out += " * [ac(x) in " + ac_factor->id + "]";
        return out;
    }
};

struct PreparedPiece {
    Cell cell;
    std::vector<PreparedTerm> terms;
};

struct PreparedFunction {
    std::vector<PreparedPiece> pieces;
};

namespace detail {

inline ClassRef refined_class(const Cell& c, const PreparedTerm& t) {
    return t.ac_factor ? classes::intersect(c.ac, t.ac_factor) : c.ac;
}

} // namespace detail

/// Integral of one prepared term over one cell.
inline MotivicValue integrate_cell(const Cell& c, const PreparedTerm& t) {
    if (c.is_singleton() || c.is_empty() || t.coeff.is_zero()) return MotivicValue().with_threshold(c.threshold());
    ClassRef z = detail::refined_class(c, t);
    if (z->id == "empty") return MotivicValue().with_threshold(c.threshold());
    if (!c.vmin) throw NotIntegrable("cell " + c.to_string() + " is unbounded below in valuation (infinite measure)");
    if (!c.vmax && t.q_slope >= 1)
        throw NotIntegrable("q^(" + std::to_string(t.q_slope) + "*v(x)) is not integrable on " + c.to_string());
    // r = r0 + m j; summand r^a q^{(e-1) r - 1}.
    std::int64_t r0 = *c.first_shell();
    BranchSum b;
    b.poly = PolyQ(std::vector<Rat>{Rat(static_cast<long>(r0)), Rat(static_cast<long>(c.modulus))}).pow(t.v_power);
    b.q_slope = (t.q_slope - 1) * c.modulus;
    b.q_offset = (t.q_slope - 1) * r0 - 1;
    b.t_step = 0;
    if (c.vmax) b.j1 = div_floor(*c.vmax - 1 - r0, c.modulus);
    RatFuncQ shells;
    try {
        shells = closed_form_q(b);
    } catch (const Divergent& e) {
        throw NotIntegrable(std::string("shell sum diverges on ") + c.to_string() + ": " + e.what());
    }
    return (t.coeff * MotivicValue::count_of(z) * MotivicValue(shells))
        .with_threshold(std::max(c.threshold(), t.coeff.threshold()));
}

inline MotivicValue integrate(const PreparedFunction& f) {
    MotivicValue total;
    for (std::size_t i = 0; i < f.pieces.size(); ++i) {
        const auto& piece = f.pieces[i];
        for (const auto& t : piece.terms) {
            try {
                total += integrate_cell(piece.cell, t);
            } catch (const NotIntegrable& e) {
                throw NotIntegrable("piece " + std::to_string(i) + " " + piece.cell.to_string() + ": " + e.what());
            }
        }
    }
    return total;
}

/// Integrand term written against its own center: coeff * v(x - c)^a * q^{e v(x - c)}.
struct CenteredTerm {
    MotivicValue coeff = MotivicValue(1);
    unsigned v_power = 0;
    std::int64_t q_slope = 0;
    Rat center = 0;
};

/// Adapts centered terms to the cells of a DefSet and integrates.
/// Returns the prepared function so callers can inspect or validate it.
inline PreparedFunction prepare(const DefSet& s, const std::vector<CenteredTerm>& terms, std::uint64_t* threshold = nullptr) {
    std::vector<Rat> centers;
    for (const auto& t : terms) centers.push_back(t.center);
    Decomposition d = decompose(s, centers);
    if (threshold) *threshold = d.threshold;
    PreparedFunction f;
    for (const auto& c : d.cells) {
        if (c.is_singleton()) continue;
        PreparedPiece piece{c, {}};
        for (const auto& t : terms) {
            // v(x - c_t) equals v(x - center) unless the cell is a ball
            // around another center, where it is 0.
            bool tracks = t.center == c.center || (c.vmax && *c.vmax <= 1);
            if (tracks) {
                piece.terms.push_back({t.coeff, t.v_power, t.q_slope, nullptr});
            } else if (t.v_power == 0) {
                piece.terms.push_back({t.coeff, 0, 0, nullptr});
            }
        }
        f.pieces.push_back(std::move(piece));
    }
    return f;
}

inline MotivicValue integrate_over(const DefSet& s, const std::vector<CenteredTerm>& terms) {
    std::uint64_t thr = 2;
    PreparedFunction f = prepare(s, terms, &thr);
    return integrate(f).with_threshold(thr);
}

/// Product of one-variable integrals over a rectangle, in the given order
/// of coordinates (identity order when empty).
inline MotivicValue iterated_integrate(const std::vector<std::pair<Cell, PreparedTerm>>& rect,
                                       std::vector<std::size_t> order = {}) {
    if (order.empty())
        for (std::size_t i = 0; i < rect.size(); ++i) order.push_back(i);
    if (order.size() != rect.size()) throw InvalidArgument("integration order must list every coordinate once");
    std::vector<bool> seen(rect.size(), false);
    MotivicValue acc(1);
    for (auto i : order) {
        if (i >= rect.size() || seen[i]) throw InvalidArgument("integration order must list every coordinate once");
        seen[i] = true;
        try {
            acc = acc * integrate_cell(rect[i].first, rect[i].second);
        } catch (const NotIntegrable& e) {
            throw NotIntegrable("coordinate " + std::to_string(i) + ": " + e.what());
        }
    }
    return acc;
}

/// The piece pulled back along x -> pi^w * u * (x - new_center) + cell center,
/// with pi a uniformizer (ac(pi) = 1) and u a unit for p above the returned
/// threshold. The integral of the pulled-back piece times q^{-w} equals the
/// integral of the original piece.
inline PreparedPiece pull_back(const PreparedPiece& piece, std::int64_t w, const Rat& u, const Rat& new_center) {
    if (u == 0) throw InvalidArgument("change of variables needs a nonzero unit factor");
    const Cell& c = piece.cell;
    PreparedPiece out;
    if (c.is_singleton()) {
        out.cell = Cell::singleton(new_center, c.guard);
        return out;
    }
    std::optional<std::int64_t> lo, hi;
    if (c.vmin) lo = *c.vmin - w;
    if (c.vmax) hi = *c.vmax - w;
    out.cell = Cell::annular(new_center, lo, hi, c.modulus, mod_floor(c.residue - w, c.modulus),
                             classes::preimage_affine(c.ac, u, 0), true);
    for (const auto& t : piece.terms) {
        // v(y) = v(x) + w: (v + w)^a q^{e (v + w)}.
        for (unsigned k = 0; k <= t.v_power; ++k) {
            Rat binom(binomial(t.v_power, k));
            Rat coef = binom * pow_rat(Rat(static_cast<long>(w)), static_cast<long>(t.v_power - k));
            if (coef == 0) continue;
            PreparedTerm nt;
            nt.coeff = t.coeff * MotivicValue(RatFuncQ(coef) * RatFuncQ::q_power(t.q_slope * w));
            nt.v_power = k;
            nt.q_slope = t.q_slope;
            if (t.ac_factor) nt.ac_factor = classes::preimage_affine(t.ac_factor, u, 0);
            out.terms.push_back(std::move(nt));
        }
    }
    return out;
}

// Families over s >= 0.

/// A cell family restricted to s = s_residue mod s_modulus within
/// [s_lo, s_hi], carrying prepared terms measured from the family center.
struct FamilyPiece {
    CellFamily cell;
    std::vector<PreparedTerm> terms;
    std::int64_t s_residue = 0;
    std::int64_t s_modulus = 1;
    std::int64_t s_lo = 0;
    std::optional<std::int64_t> s_hi;

    bool admits(std::int64_t s) const {
        return s >= s_lo && (!s_hi || s <= *s_hi) && mod_floor(s - s_residue, s_modulus) == 0;
    }
};

/// Fiber integral as a function of s: a sum of closed-form branches,
/// each coeff * P(j) q^{slope j + offset} for s = t_offset + t_step j.
class FiberFunction {
public:
    struct Term {
        MotivicValue coeff;
        BranchSum branch;
    };

    void add(MotivicValue coeff, BranchSum b) {
        if (coeff.is_zero() || b.empty()) return;
        terms_.push_back({std::move(coeff), std::move(b)});
    }
    const std::vector<Term>& terms() const { return terms_; }

    MotivicValue at(std::int64_t s) const {
        MotivicValue total;
        for (const auto& t : terms_) {
            const BranchSum& b = t.branch;
            if (mod_floor(s - b.t_offset, b.t_step) != 0) continue;
            std::int64_t j = (s - b.t_offset) / b.t_step;
            if (j < b.j0 || (b.j1 && j > *b.j1)) continue;
            Rat pj = b.poly.eval(Rat(static_cast<long>(j)));
            total += t.coeff * MotivicValue(RatFuncQ(pj) * RatFuncQ::q_power(b.q_slope * j + b.q_offset));
        }
        return total;
    }

    MotivicSeries series() const {
        MotivicSeries out;
        for (const auto& t : terms_) out.add(t.coeff, closed_form(t.branch));
        for (const auto& t : terms_) out.raise_threshold(t.coeff.threshold());
        return out;
    }

    std::string to_string() const {
        std::string out;
        for (const auto& t : terms_) {
            const BranchSum& b = t.branch;
            if (!out.empty()) out += "\n";
            out += "s = " + std::to_string(b.t_offset) + " + " + std::to_string(b.t_step) + "*j, j in [" +
                   std::to_string(b.j0) + ", " + (b.j1 ? std::to_string(*b.j1) : "inf") + "]: (" +
                   t.coeff.to_string() + ") * (" + b.poly.to_string("j") + ") * q^(" + std::to_string(b.q_slope) +
                   "*j + " + std::to_string(b.q_offset) + ")";
        }
        return out.empty() ? "0" : out;
    }

private:
    std::vector<Term> terms_;
};

namespace detail {

inline std::int64_t lcm_den(std::int64_t acc, const Rat& r) { return std::lcm(acc, to_int64(r.get_den())); }

inline std::int64_t affine_int(const Rat& slope, const Rat& offset, std::int64_t s) {
    Rat v = slope * Rat(static_cast<long>(s)) + offset;
    if (!is_integer(v)) throw InvalidArgument("family bound is not an integer at s = " + std::to_string(s));
    return to_int64(v.get_num());
}

/// (alpha + beta j)^k as a polynomial in j.
inline PolyQ affine_pow(std::int64_t alpha, std::int64_t beta, unsigned k) {
    return PolyQ(std::vector<Rat>{Rat(static_cast<long>(alpha)), Rat(static_cast<long>(beta))}).pow(k);
}

/// S_k(w) = sum_{i >= 0} i^k w^i as a rational function of w.
inline RatFuncQ euler_series(unsigned k) {
    RatFuncQ cur = RatFuncQ::reduced(PolyQ(1), PolyQ(std::vector<Rat>{1, -1}));
    for (unsigned i = 0; i < k; ++i) cur = RatFuncQ(PolyQ::x()) * cur.derivative();
    return cur;
}

/// Composes f(w) with w = q^d (d != 0).
inline RatFuncQ at_q_power(const RatFuncQ& f, std::int64_t d) {
    auto sub = [d](const PolyQ& p, std::int64_t shift) {
        PolyQ out;
        for (std::size_t i = 0; i < p.coeffs().size(); ++i)
            if (p.coeffs()[i] != 0)
                out += PolyQ::monomial(p.coeffs()[i], static_cast<std::size_t>(d * static_cast<std::int64_t>(i) + shift));
        return out;
    };
    long deg = std::max(f.num().degree(), f.den().degree());
    std::int64_t shift = d < 0 ? -d * deg : 0;
    return RatFuncQ::reduced(sub(f.num(), shift), sub(f.den(), shift));
}

} // namespace detail

/// Fiber integrals of a family piece as closed-form branches in s.
inline FiberFunction fiber_function(const FamilyPiece& piece) {
    FiberFunction out;
    const CellFamily& fam = piece.cell;
    if (fam.modulus < 1 || fam.residue < 0 || fam.residue >= fam.modulus)
        throw InvalidArgument("family congruence must satisfy 0 <= residue < modulus");
    if (piece.s_modulus < 1) throw InvalidArgument("family parameter modulus must be >= 1");
    if (!fam.ac->nonzero && fam.ac->id != "empty")
        throw InvalidArgument("family ac class must exclude 0");
    std::int64_t m = fam.modulus;
    std::int64_t big = piece.s_modulus * m;
    if (fam.vmin) big *= to_int64(fam.vmin->slope.get_den());
    if (fam.vmax) big *= to_int64(fam.vmax->slope.get_den());
    for (std::int64_t sigma = 0; sigma < big; ++sigma) {
        if (mod_floor(sigma - piece.s_residue, piece.s_modulus) != 0) continue;
        // s = s0 + big*j for j >= 0, with s0 the first admissible s >= s_lo in this class.
        std::int64_t s0 = StepLinear::first_at_least(std::max<std::int64_t>(piece.s_lo, 0), sigma, big);
        std::optional<std::int64_t> jmax;
        if (piece.s_hi) {
            if (s0 > *piece.s_hi) continue;
            jmax = div_floor(*piece.s_hi - s0, big);
        }
        if (!fam.vmin) {
            // Nonempty fibers without a lower bound have infinite measure.
            Cell probe = fam.at(s0);
            if (!probe.is_empty()) throw NotIntegrable("family fiber at s = " + std::to_string(s0) + " is unbounded below");
            continue;
        }
        std::int64_t vmin0 = detail::affine_int(fam.vmin->slope, fam.vmin->offset, s0);
        std::int64_t vmin1 = detail::affine_int(fam.vmin->slope, fam.vmin->offset, s0 + big);
        std::int64_t r00 = vmin0 + 1 + mod_floor(fam.residue - vmin0 - 1, m);
        std::int64_t dr = vmin1 - vmin0; // multiple of m by construction of big
        // Number of shells K(j) = k0 + dk j when vmax is finite.
        std::optional<std::int64_t> k0, dk;
        std::int64_t jstart = 0;
        std::optional<std::int64_t> jend = jmax;
        if (fam.vmax) {
            std::int64_t vmax0 = detail::affine_int(fam.vmax->slope, fam.vmax->offset, s0);
            std::int64_t vmax1 = detail::affine_int(fam.vmax->slope, fam.vmax->offset, s0 + big);
            k0 = div_ceil(vmax0 - r00, m);
            dk = ((vmax1 - vmax0) - dr) / m;
            // Restrict to fibers with at least one shell.
            if (*dk > 0) jstart = std::max<std::int64_t>(0, div_ceil(1 - *k0, *dk));
            else if (*dk < 0) {
                if (*k0 < 1) continue;
                std::int64_t last = div_floor(*k0 - 1, -*dk);
                jend = jend ? std::min(*jend, last) : last;
            } else if (*k0 < 1) {
                continue;
            }
        }
        if (jend && *jend < jstart) continue;

        for (const auto& t : piece.terms) {
            if (t.coeff.is_zero()) continue;
            ClassRef z = t.ac_factor ? classes::intersect(fam.ac, t.ac_factor) : fam.ac;
            if (z->id == "empty") continue;
            MotivicValue base = t.coeff * MotivicValue::count_of(z);
            std::int64_t e1 = t.q_slope - 1;
            if (!fam.vmax && e1 >= 0)
                throw NotIntegrable("q^(" + std::to_string(t.q_slope) + "*v(x)) is not integrable on family fibers without an upper bound");
            auto emit = [&](const MotivicValue& coeff, PolyQ poly, std::int64_t qslope, std::int64_t qoff) {
                BranchSum b;
                b.poly = std::move(poly);
                b.q_slope = qslope;
                b.q_offset = qoff;
                b.t_offset = s0;
                b.t_step = big;
                b.j0 = jstart;
                b.j1 = jend;
                out.add(coeff, std::move(b));
            };
            unsigned a = t.v_power;
            if (e1 == 0) {
                // sum_{i < K} (r0 + m i)^a q^{-1}, a polynomial in (r0, K).
                PolyQ total;
                for (unsigned k = 0; k <= a; ++k) {
                    PolyQ ps = prefix_sum_poly(PolyQ::monomial(1, k));
                    PolyQ kj(std::vector<Rat>{Rat(static_cast<long>(*k0)), Rat(static_cast<long>(*dk))});
                    Rat c = Rat(binomial(a, k)) * pow_rat(Rat(static_cast<long>(m)), k);
                    total += detail::affine_pow(r00, dr, a - k) * ps.compose(kj).scaled(c);
                }
                emit(base, total, 0, -1);
                continue;
            }
            // H(r) = q^{e1 r - 1} sum_k C(a,k) m^k S_k(q^{e1 m}) r^{a-k}; fiber = H(r0) - H(r0 + m K).
            auto tail = [&](std::int64_t alpha, std::int64_t beta, int sign) {
                for (unsigned k = 0; k <= a; ++k) {
                    RatFuncQ sk = detail::at_q_power(detail::euler_series(k), e1 * m);
                    Rat c = Rat(binomial(a, k)) * pow_rat(Rat(static_cast<long>(m)), k) * sign;
                    emit(base * MotivicValue(sk * RatFuncQ(c)), detail::affine_pow(alpha, beta, a - k), e1 * beta,
                         e1 * alpha - 1);
                }
            };
            tail(r00, dr, 1);
            if (fam.vmax) tail(r00 + m * *k0, dr + m * *dk, -1);
        }
    }
    return out;
}

/// Sum over s of the fiber integrals times T^s.
inline MotivicSeries integrate_family(const std::vector<FamilyPiece>& pieces) {
    MotivicSeries out;
    for (const auto& p : pieces) out.add(fiber_function(p).series());
    return out;
}

/// Fiber measures of a family (constant integrand 1).
inline FiberFunction measure_family(const FamilyPiece& piece) {
    FamilyPiece p = piece;
    p.terms = {PreparedTerm{}};
    return fiber_function(p);
}

inline MotivicSeries measure_family_series(const std::vector<FamilyPiece>& pieces) {
    MotivicSeries out;
    for (const auto& piece : pieces) out.add(measure_family(piece).series());
    return out;
}

} // namespace motive
