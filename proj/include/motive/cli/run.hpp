#pragma once

#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "motive/cli/parse.hpp"
#include "motive/poincare.hpp"

namespace motive::cli {

using Json = nlohmann::ordered_json;

/// Result of one command: payload, threshold, notes, and renderings.
struct ReportEnvelope {
    std::string command;
    std::string input;
    Json result = Json::object();
    std::uint64_t threshold = 2;
    std::vector<std::string> notes;
    std::string text;  // human-readable body
    std::string latex; // LaTeX of the main result
    int exit_code = 0;

    Json to_json() const {
        Json j;
        j["command"] = command;
        j["input"] = input;
        j["result"] = result;
        j["validity_threshold"] = threshold;
        j["notes"] = notes;
        return j;
    }
};

inline Json rat_json(const Rat& r) { return to_string(r); }

inline Json poly_coeffs_json(const PolyQ& p) {
    Json a = Json::array();
    for (const auto& c : p.coeffs()) a.push_back(to_string(c));
    return a;
}

inline Json fit_json(const RecurrenceFit& f) {
    Json j;
    j["numerator"] = poly_coeffs_json(f.num);
    j["denominator"] = poly_coeffs_json(f.den);
    j["text"] = f.to_string();
    j["order"] = f.order;
    j["holdout_verified"] = f.holdout_verified;
    return j;
}

namespace detail {

inline Budget budget_of(const Command& c) {
    Budget b = default_budget();
    if (c.budget) b.limit = *c.budget;
    return b;
}

inline std::string join_rats(const std::vector<Rat>& v) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : ", ") + to_string(x);
    return out;
}

/// Valuation constraints from a conjunction of v(x) atoms centered at 0.
inline void collect_constraints(const DefSet& d, std::vector<ValuationConstraint>& out) {
    using K = ValuationConstraint::Kind;
    switch (d.kind) {
    case DefSet::Kind::True: return;
    case DefSet::Kind::And:
        for (const auto& a : d.args) collect_constraints(a, out);
        return;
    case DefSet::Kind::Val:
        if (d.center.value == 0) {
            K k = K::GreaterEq;
            switch (d.cmp) {
            case Cmp::Lt: k = K::Less; break;
            case Cmp::Le: k = K::LessEq; break;
            case Cmp::Eq: k = K::Equal; break;
            case Cmp::Ge: k = K::GreaterEq; break;
            case Cmp::Gt: k = K::Greater; break;
            }
            out.push_back({k, d.bound, 1});
            return;
        }
        break;
    case DefSet::Kind::Cong:
        if (d.center.value == 0) {
            out.push_back({K::Congruent, d.bound, d.modulus});
            return;
        }
        break;
    default: break;
    }
    throw UnsupportedFormula("--power takes only a conjunction of v(x) conditions, got " + d.to_string());
}

struct Checked {
    Json rows = Json::array();
    std::string text;
    bool all_inside = true;
    std::size_t checked = 0;
};

/// Evaluates `value` at each prime and compares with an oracle interval.
template <typename Oracle>
Checked check_primes(const MotivicValue& value, std::uint64_t thr, const Command& c, unsigned depth, ReportEnvelope& env,
                     Oracle&& oracle) {
    Checked out;
    Budget budget = budget_of(c);
    for (auto p : c.primes) {
        if (p < thr) {
            env.notes.push_back("p = " + std::to_string(p) + " is below the validity threshold " + std::to_string(thr) +
                                "; skipped");
            continue;
        }
        Rat at = value.eval(p, budget);
        Interval iv = oracle(p, depth, budget);
        bool inside = iv.contains(at);
        out.all_inside = out.all_inside && inside;
        ++out.checked;
        Json row;
        row["p"] = p;
        row["value"] = to_string(at);
        row["depth"] = depth;
        row["oracle"] = Json::array({to_string(iv.lo), to_string(iv.hi)});
        row["inside"] = inside;
        out.rows.push_back(std::move(row));
        out.text += "  p = " + std::to_string(p) + ": " + to_string(at) + " in " + iv.to_string() +
                    (inside ? " (inside)" : " (OUTSIDE)") + "\n";
    }
    return out;
}

inline void value_report(ReportEnvelope& env, const MotivicValue& value, std::uint64_t thr, const std::string& label) {
    env.threshold = std::max(thr, value.threshold());
    env.result["value"] = value.to_json();
    env.result["value_text"] = value.to_string();
    env.text = label + " = " + value.to_string() + "\nvalid for p >= " + std::to_string(env.threshold) + "\n";
    env.latex = value.to_latex();
}

inline ReportEnvelope run_measure(const Command& c) {
    ReportEnvelope env;
    std::vector<Cell> cells;
    std::uint64_t thr = 2;
    if (c.power) {
        NthPowerSpec spec;
        spec.n = *c.power;
        if (c.defset) collect_constraints(*c.defset, spec.constraints);
        else spec.constraints.push_back({ValuationConstraint::Kind::GreaterEq, 0, 1});
        CellList cl = nth_power_cells(spec);
        cells = cl.cells;
        thr = cl.threshold;
        env.notes.push_back(std::to_string(spec.n) + "-th powers" + (c.defset ? "" : " in the valuation ring"));
    } else {
        Decomposition d = decompose(*c.defset);
        cells = d.cells;
        thr = d.threshold;
    }
    for (const auto& cell : cells) thr = std::max(thr, cell.threshold());
    MotivicValue value = measure_cells(cells).with_threshold(thr);
    value_report(env, value, thr, "measure");
    Json cj = Json::array();
    env.text += "cells:\n";
    for (const auto& cell : cells) {
        cj.push_back(cell.to_json());
        env.text += "  " + cell.to_string() + "\n";
    }
    env.result["cells"] = std::move(cj);
    if (!c.primes.empty()) {
        unsigned depth = c.depth.value_or(8);
        auto chk = check_primes(value, env.threshold, c, depth, env,
                                [&](std::uint64_t p, unsigned d, Budget b) { return empirical_measure(cells, p, d, b); });
        env.result["evaluations"] = chk.rows;
        env.text += "at primes (oracle depth " + std::to_string(depth) + "):\n" + chk.text;
    }
    return env;
}

inline ReportEnvelope run_integrate(const Command& c) {
    ReportEnvelope env;
    std::uint64_t thr = 2;
    auto terms = centered_terms(*c.integrand, &c.catalog);
    PreparedFunction f = prepare(c.integrand->domain, terms, &thr);
    MotivicValue value = integrate(f).with_threshold(thr);
    value_report(env, value, thr, "integral");
    if (!c.primes.empty()) {
        unsigned depth = c.depth.value_or(10);
        auto chk = check_primes(value, env.threshold, c, depth, env,
                                [&](std::uint64_t p, unsigned d, Budget b) { return empirical_integral(f, p, d, b); });
        env.result["evaluations"] = chk.rows;
        env.text += "at primes (oracle depth " + std::to_string(depth) + "):\n" + chk.text;
    }
    return env;
}

inline ReportEnvelope run_validate(const Command& c) {
    Command inner = c;
    if (inner.primes.empty()) inner.primes = {5, 7, 11};
    ReportEnvelope env = c.integrand ? run_integrate(inner) : run_measure(inner);
    bool ok = true;
    std::size_t checked = 0;
    for (const auto& row : env.result["evaluations"]) {
        ok = ok && row["inside"].get<bool>();
        ++checked;
    }
    if (checked == 0) throw InvalidArgument("no requested prime is above the validity threshold " + std::to_string(env.threshold));
    std::string verdict = ok ? "MATCH" : "MISMATCH";
    env.result["verdict"] = verdict;
    env.text += "verdict: " + verdict + "\n";
    if (!ok) env.exit_code = 1;
    return env;
}

inline ReportEnvelope run_count(const Command& c) {
    ReportEnvelope env;
    if (c.primes.empty()) throw InvalidArgument("count needs --primes");
    unsigned s = c.smax.value_or(4);
    CountReport rep = CountReport::build(*c.variety, c.primes, s, budget_of(c));
    env.result = rep.to_json();
    env.result["variables"] = c.variety->n;
    env.text = rep.to_csv();
    std::string rows;
    for (const auto& [k, n] : rep.grid)
        rows += std::to_string(k.first) + " & " + std::to_string(k.second) + " & " + n.get_str() + " \\\\\n";
    env.latex = "\\begin{tabular}{rrr}\np & s & N_{p^s} \\\\\n" + rows + "\\end{tabular}";
    env.notes.push_back("counts are exact; N_{p^s} = #solutions in (Z/p^s Z)^n");
    return env;
}

inline ReportEnvelope run_poincare(const Command& c) {
    ReportEnvelope env;
    Budget budget = budget_of(c);
    const VarietySpec& v = *c.variety;
    bool want_symbolic = c.mode != Command::Mode::Numeric;
    bool want_numeric = c.mode != Command::Mode::Symbolic;

    std::optional<SymbolicPoincare> sym;
    if (want_symbolic) {
        try {
            sym = symbolic_poincare(v);
        } catch (const UnsupportedFormula& e) {
            env.notes.push_back(std::string("no closed form for this variety (") + e.what() + "); using counts only");
            want_numeric = true;
        }
    }
    if (sym) {
        env.threshold = sym->threshold;
        Json sj;
        sj["series"] = sym->series.to_json();
        sj["text"] = sym->series.to_string();
        sj["threshold"] = sym->threshold;
        env.result["symbolic"] = sj;
        env.text += "P(T) = " + sym->series.to_string() + "\nvalid for p >= " + std::to_string(sym->threshold) + "\n";
        env.latex = sym->series.to_latex();
    } else {
        env.result["symbolic"] = nullptr;
    }
    if (!want_numeric) return env;
    if (c.primes.empty()) throw InvalidArgument("numeric Poincare series need --primes");

    std::size_t max_order = c.max_order;
    unsigned smax = c.smax.value_or(static_cast<unsigned>(2 * max_order + 1));
    if (smax + 1 < 2 * max_order + 2) {
        std::size_t fitted = (smax + 1 >= 2) ? (smax + 1 - 2) / 2 : 0;
        env.notes.push_back("s_max = " + std::to_string(smax) + " supports recurrences of order <= " + std::to_string(fitted));
        max_order = fitted;
    }
    Json rows = Json::array();
    bool all_match = true;
    std::size_t compared = 0;
    for (auto p : c.primes) {
        Json row;
        row["p"] = p;
        std::vector<Int> counts = poincare_coeffs(v, p, smax, budget);
        Json cj = Json::array();
        for (const auto& n : counts) cj.push_back(n.get_str());
        row["coefficients"] = cj;
        env.text += "p = " + std::to_string(p) + ": N = [";
        for (std::size_t i = 0; i < counts.size(); ++i) env.text += (i ? ", " : "") + counts[i].get_str();
        env.text += "]\n";
        std::optional<RecurrenceFit> fit;
        if (smax + 1 >= 2) {
            try {
                fit = fit_rational(counts, max_order);
                row["fit"] = fit_json(*fit);
                env.text += "  fit: " + fit->to_string() + " (order " + std::to_string(fit->order) + ", " +
                            std::to_string(fit->holdout_verified) + " held out)\n";
            } catch (const NoFit& e) {
                row["fit"] = nullptr;
                row["fit_error"] = e.what();
                env.text += "  fit: none (" + std::string(e.what()) + ")\n";
            }
        }
        if (sym) {
            std::string verdict;
            if (p < sym->threshold) {
                verdict = "BELOW_THRESHOLD";
            } else {
                auto expect = sym->series.expand_at(p, counts.size(), budget);
                bool same = true;
                for (std::size_t i = 0; i < counts.size(); ++i) same = same && expect[i] == Rat(counts[i]);
                if (same && fit) {
                    auto [num, den] = sym->series.specialize(p, budget);
                    same = num * fit->den == den * fit->num;
                }
                verdict = same ? "MATCH" : "MISMATCH";
                all_match = all_match && same;
                ++compared;
            }
            row["verdict"] = verdict;
            env.text += "  verdict: " + verdict + "\n";
        }
        rows.push_back(std::move(row));
    }
    env.result["numeric"] = std::move(rows);
    if (sym && compared > 0) {
        env.result["verdict"] = all_match ? "MATCH" : "MISMATCH";
        if (!all_match) env.exit_code = 1;
    }
    return env;
}

inline ReportEnvelope run_series(const Command& c) {
    ReportEnvelope env;
    MotivicSeriesTerm t = c.series->term();
    MotivicSeries s = sum_motivic_series({t});
    env.threshold = s.threshold();
    env.result["series"] = s.to_json();
    env.result["text"] = s.to_string();
    env.text = "sum = " + s.to_string() + "\n";
    env.latex = s.to_latex();
    if (c.terms) {
        Json ej = Json::array();
        auto coeffs = s.expand(*c.terms);
        env.text += "coefficients:";
        for (const auto& v : coeffs) {
            ej.push_back(v.to_string());
            env.text += " " + v.to_string();
        }
        env.text += "\n";
        env.result["coefficients"] = ej;
    }
    for (auto p : c.primes) {
        auto [num, den] = s.specialize(p, budget_of(c));
        Json pj;
        pj["p"] = p;
        pj["numerator"] = poly_coeffs_json(num);
        pj["denominator"] = poly_coeffs_json(den);
        env.result["at"].push_back(pj);
        env.text += "at q = " + std::to_string(p) + ": (" + num.to_string("T") + ")/(" + den.to_string("T") + ")\n";
    }
    return env;
}

} // namespace detail

inline ReportEnvelope run(const Command& c) {
    ReportEnvelope env;
    switch (c.kind) {
    case Command::Kind::Measure: env = detail::run_measure(c); break;
    case Command::Kind::Integrate: env = detail::run_integrate(c); break;
    case Command::Kind::Count: env = detail::run_count(c); break;
    case Command::Kind::Poincare: env = detail::run_poincare(c); break;
    case Command::Kind::Series: env = detail::run_series(c); break;
    case Command::Kind::Validate: env = detail::run_validate(c); break;
    }
    env.command = kind_name(c.kind);
    env.input = c.input;
    return env;
}

inline Json error_json(const Error& e) {
    Json j;
    j["kind"] = e.kind();
    j["message"] = e.what();
    j["exit_code"] = e.exit_code();
    if (const auto* se = dynamic_cast<const SyntaxError*>(&e)) {
        j["line"] = se->line();
        j["column"] = se->column();
        j["expected"] = se->expected();
    }
    Json out;
    out["error"] = std::move(j);
    return out;
}

/// Full command-line behavior; returns the process exit code.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    bool json = std::find(args.begin(), args.end(), "--json") != args.end();
    try {
        Command c = parse_command(args);
        ReportEnvelope env = run(c);
        if (c.json) out << env.to_json().dump(2) << "\n";
        else if (c.latex) out << env.latex << "\n";
        else {
            out << env.text;
            for (const auto& n : env.notes) out << "note: " << n << "\n";
        }
        return env.exit_code;
    } catch (const Error& e) {
        if (json) out << error_json(e).dump(2) << "\n";
        else err << "error (" << e.kind() << "): " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        if (json) out << Json{{"error", {{"kind", "Internal"}, {"message", e.what()}, {"exit_code", 1}}}}.dump(2) << "\n";
        else err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace motive::cli
