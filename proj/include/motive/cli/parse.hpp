#pragma once

// Text front end: set DSL, integrands, series summands, polynomials,
// residue-class formulas, and command lines.

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "motive/defset.hpp"
#include "motive/integrate.hpp"
#include "motive/oracle.hpp"
#include "motive/presburger.hpp"

namespace motive::cli {

struct Token {
    enum class Kind { Ident, Number, Symbol, End };
    Kind kind;
    std::string text;
    std::size_t line;
    std::size_t col;
};

inline std::vector<Token> tokenize(const std::string& src) {
    static const char* two[] = {"==", "!=", ">=", "<=", "&&", "||"};
    std::vector<Token> out;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < src.size();) {
        char c = src[i];
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            ++col;
            continue;
        }
        std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
            out.push_back({Token::Kind::Ident, src.substr(start, i - start), line, col});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            out.push_back({Token::Kind::Number, src.substr(start, i - start), line, col});
        } else {
            std::string sym(1, c);
            if (i + 1 < src.size())
                for (const char* t : two)
                    if (src.compare(i, 2, t) == 0) sym = t;
            if (sym.size() == 1 && std::string("()[],;+-*/^<>!:#=").find(c) == std::string::npos)
                throw SyntaxError(line, col, "a token (unexpected character '" + std::string(1, c) + "')");
            i += sym.size();
            out.push_back({Token::Kind::Symbol, sym, line, col});
        }
        col += i - start;
    }
    out.push_back({Token::Kind::End, "", line, col});
    return out;
}

/// Residue classes available by name: built-ins plus user definitions.
class ClassCatalog {
public:
    void define(const std::string& name, ClassRef z) { user_[name] = std::move(z); }

    std::optional<ClassRef> find(const std::string& name) const {
        if (auto it = user_.find(name); it != user_.end()) return it->second;
        return classes::builtin(name);
    }

private:
    std::map<std::string, ClassRef> user_;
};

/// coeff * q^k * #Z... * v(x - c)^a * q^(e * v(x - c))
struct IntegrandTerm {
    Rat coeff = 1;
    std::int64_t q_power = 0;
    std::vector<std::string> counts;
    unsigned v_power = 0;
    std::int64_t q_slope = 0;
    Center center = Center::of(0);

    friend bool operator==(const IntegrandTerm& a, const IntegrandTerm& b) {
        return a.coeff == b.coeff && a.q_power == b.q_power && a.counts == b.counts && a.v_power == b.v_power &&
               a.q_slope == b.q_slope && a.center.value == b.center.value && a.center.spelling == b.center.spelling;
    }
};

struct Integrand {
    std::vector<IntegrandTerm> terms;
    DefSet domain;

    friend bool operator==(const Integrand& a, const Integrand& b) { return a.terms == b.terms && a.domain == b.domain; }
};

/// Exponent of q in a series summand: sum of mult * atom, atom one of
/// 1, s, floor(s/k), ceil(s/k).
struct ExponentAtom {
    enum class Kind { One, S, Floor, Ceil };
    Kind kind = Kind::One;
    std::int64_t mult = 1;
    std::int64_t k = 1;

    friend bool operator==(const ExponentAtom& a, const ExponentAtom& b) {
        return a.kind == b.kind && a.mult == b.mult && a.k == b.k;
    }
};

/// coeff * s^a * q^(exponent) T^s summed over lo <= s <= hi, s = residue mod modulus.
struct SeriesSpec {
    Rat coeff = 1;
    unsigned s_power = 0;
    std::vector<ExponentAtom> exponent;
    std::int64_t lo = 0;
    std::optional<std::int64_t> hi;
    std::int64_t residue = 0;
    std::int64_t modulus = 1;

    friend bool operator==(const SeriesSpec& a, const SeriesSpec& b) {
        return a.coeff == b.coeff && a.s_power == b.s_power && a.exponent == b.exponent && a.lo == b.lo && a.hi == b.hi &&
               a.residue == b.residue && a.modulus == b.modulus;
    }

    StepLinear step_linear() const {
        std::int64_t m = 1;
        for (const auto& e : exponent)
            if (e.kind == ExponentAtom::Kind::Floor || e.kind == ExponentAtom::Kind::Ceil) m = std::lcm(m, e.k);
        std::vector<StepLinear::Branch> branches;
        for (std::int64_t lam = 0; lam < m; ++lam) {
            Rat slope = 0, icpt = 0;
            for (const auto& e : exponent) {
                Rat mu(static_cast<long>(e.mult));
                Rat kk(static_cast<long>(e.k));
                switch (e.kind) {
                case ExponentAtom::Kind::One: icpt += mu; break;
                case ExponentAtom::Kind::S: slope += mu; break;
                case ExponentAtom::Kind::Floor:
                    slope += mu / kk;
                    icpt -= mu * Rat(static_cast<long>(lam % e.k)) / kk;
                    break;
                case ExponentAtom::Kind::Ceil:
                    slope += mu / kk;
                    icpt += mu * Rat(static_cast<long>(mod_floor(-lam, e.k))) / kk;
                    break;
                }
            }
            branches.push_back({slope, icpt});
        }
        return StepLinear(0, {}, m, branches);
    }

    MotivicSeriesTerm term() const {
        MotivicSeriesTerm t;
        t.coeff = MotivicValue(coeff);
        t.term.s_power = s_power;
        t.term.q_exponent = step_linear();
        t.term.residue = residue;
        t.term.modulus = modulus;
        t.term.lo = lo;
        t.term.hi = hi;
        t.term.validate();
        return t;
    }
};

class Parser {
public:
    Parser(const std::string& text, const ClassCatalog* catalog = nullptr)
        : toks_(tokenize(text)), catalog_(catalog) {}

    DefSet defset_only() {
        DefSet d = defset();
        expect_end();
        return d;
    }

    Integrand integrand_only() {
        Integrand f = integrand();
        expect_end();
        return f;
    }

    SeriesSpec series_only() {
        SeriesSpec s = series();
        expect_end();
        return s;
    }

    /// Comma-separated integer polynomials in x0..x9.
    std::vector<MPoly> polynomials_only() {
        std::vector<MPoly> out;
        if (peek().kind == Token::Kind::End) return out;
        out.push_back(poly_expr(nullptr));
        while (accept(",")) out.push_back(poly_expr(nullptr));
        expect_end();
        return out;
    }

    /// Arity-1 residue-class formula in the free variable x.
    Formula formula_only() {
        std::vector<std::string> scope = {"x"};
        Formula f = formula(scope);
        expect_end();
        return f;
    }

    // Grammar pieces.

    DefSet defset() {
        std::vector<DefSet> parts{conjunction()};
        while (accept("||")) parts.push_back(conjunction());
        return DefSet::disj(std::move(parts));
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const Token& next() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool is(const std::string& s, std::size_t k = 0) const {
        const Token& t = peek(k);
        return t.kind != Token::Kind::End && t.kind != Token::Kind::Number && t.text == s;
    }
    bool accept(const std::string& s) {
        if (!is(s)) return false;
        next();
        return true;
    }
    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = peek();
        std::string got = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
        throw SyntaxError(t.line, t.col, expected + ", got " + got);
    }
    void expect(const std::string& s) {
        if (!accept(s)) fail("'" + s + "'");
    }
    void expect_end() {
        if (peek().kind != Token::Kind::End) fail("end of input");
    }

    std::string number_text() {
        if (peek().kind != Token::Kind::Number) fail("a number");
        return next().text;
    }

    std::int64_t integer() {
        bool neg = accept("-");
        std::string t = number_text();
        if (t.size() > 17) fail("an integer of at most 17 digits");
        std::int64_t v = std::stoll(t);
        return neg ? -v : v;
    }

    /// Unsigned rational literal "n" or "n/d"; returns value and spelling.
    std::pair<Rat, std::string> rational_literal() {
        std::string t = number_text();
        if (is("/") && peek(1).kind == Token::Kind::Number) {
            next();
            std::string d = next().text;
            if (Int(d) == 0) fail("a nonzero denominator");
            t += "/" + d;
        }
        return {parse_rat(t), t};
    }

    /// 'x' [('-' | '+') ['-'] rational]
    Center lin() {
        expect("x");
        if (!is("-") && !is("+")) return Center::of(0);
        bool plus = next().text == "+";
        bool neg = accept("-");
        auto [val, spell] = rational_literal();
        bool negative = plus != neg; // center is -val
        if (val == 0) return {0, spell};
        return {negative ? Rat(-val) : val, negative ? "-" + spell : spell};
    }

    ClassRef class_name() {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident) fail("a residue class name");
        std::optional<ClassRef> z = catalog_ ? catalog_->find(t.text) : classes::builtin(t.text);
        if (!z) fail("a known residue class name");
        next();
        return *z;
    }

    DefSet conjunction() {
        std::vector<DefSet> parts{unary()};
        while (accept("&&")) parts.push_back(unary());
        return DefSet::conj(std::move(parts));
    }

    DefSet unary() {
        if (accept("!")) return DefSet::negate(unary());
        if (accept("(")) {
            DefSet d = defset();
            expect(")");
            return d;
        }
        if (accept("true")) return DefSet::truth(true);
        if (accept("false")) return DefSet::truth(false);
        return atom();
    }

    static Cmp comparison(const std::string& s) {
        if (s == "<") return Cmp::Lt;
        if (s == "<=") return Cmp::Le;
        if (s == "==") return Cmp::Eq;
        if (s == ">=") return Cmp::Ge;
        return Cmp::Gt;
    }

    DefSet atom() {
        if (accept("v")) {
            expect("(");
            Center c = lin();
            expect(")");
            for (const char* op : {"<", "<=", "==", ">=", ">"}) {
                if (!accept(op)) continue;
                std::int64_t g = integer();
                if (std::string(op) == "==" && accept("mod")) {
                    std::int64_t m = integer();
                    if (m < 1) fail("a modulus >= 1");
                    return DefSet::cong(c, mod_floor(g, m), m);
                }
                return DefSet::val(c, comparison(op), g);
            }
            fail("a comparison (<, <=, ==, >=, >)");
        }
        if (accept("ac")) {
            expect("(");
            Center c = lin();
            expect(")");
            expect("in");
            return DefSet::ac(c, class_name());
        }
        if (is("x")) {
            next();
            expect("==");
            bool neg = accept("-");
            auto [val, spell] = rational_literal();
            if (neg && val != 0) return DefSet::point({Rat(-val), "-" + spell});
            return DefSet::point({val, spell});
        }
        fail("an atom (v(...), ac(...), x == c) or '('");
    }

    // Integrands.

    Integrand integrand() {
        expect("f");
        expect("(");
        expect("x");
        expect(")");
        expect("=");
        Integrand f;
        bool neg = accept("-");
        f.terms.push_back(integrand_term(neg));
        while (is("+") || is("-")) {
            neg = next().text == "-";
            f.terms.push_back(integrand_term(neg));
        }
        expect("over");
        f.domain = defset();
        return f;
    }

    IntegrandTerm integrand_term(bool negative) {
        IntegrandTerm t;
        bool centered = false;
        auto set_center = [&](const Center& c) {
            if (centered && (c.value != t.center.value || c.spelling != t.center.spelling)) fail("the same center as the other factors");
            t.center = c;
            centered = true;
        };
        do {
            if (peek().kind == Token::Kind::Number) {
                t.coeff *= rational_literal().first;
            } else if (accept("#")) {
                const Token& name = peek();
                ClassRef z = class_name();
                (void)z;
                t.counts.push_back(name.text);
            } else if (accept("v")) {
                expect("(");
                set_center(lin());
                expect(")");
                unsigned a = 1;
                if (accept("^")) {
                    std::int64_t e = integer();
                    if (e < 0 || e > 64) fail("an exponent in [0, 64]");
                    a = static_cast<unsigned>(e);
                }
                t.v_power += a;
            } else if (accept("q")) {
                expect("^");
                if (!accept("(")) {
                    t.q_power += integer();
                    continue;
                }
                // q^(k) or q^(e*v(lin)) or q^(v(lin)) or q^(-v(lin))
                bool neg = accept("-");
                if (accept("v")) {
                    expect("(");
                    set_center(lin());
                    expect(")");
                    t.q_slope += neg ? -1 : 1;
                } else {
                    std::int64_t k = static_cast<std::int64_t>(std::stoll(number_text()));
                    if (neg) k = -k;
                    if (accept("*")) {
                        expect("v");
                        expect("(");
                        set_center(lin());
                        expect(")");
                        t.q_slope += k;
                    } else {
                        t.q_power += k;
                    }
                }
                expect(")");
            } else {
                fail("a factor (number, #class, v(...), q^...)");
            }
        } while (accept("*"));
        if (negative) t.coeff = -t.coeff;
        if (t.v_power == 0 && t.q_slope == 0) t.center = Center::of(0);
        return t;
    }

    // Series summands.

    SeriesSpec series() {
        SeriesSpec s;
        bool neg = accept("-");
        do {
            if (peek().kind == Token::Kind::Number) {
                s.coeff *= rational_literal().first;
            } else if (accept("s")) {
                unsigned a = 1;
                if (accept("^")) {
                    std::int64_t e = integer();
                    if (e < 0 || e > 64) fail("an exponent in [0, 64]");
                    a = static_cast<unsigned>(e);
                }
                s.s_power += a;
            } else if (accept("q")) {
                expect("^");
                expect("(");
                exponent(s.exponent);
                expect(")");
            } else if (accept("T")) {
                expect("^");
                expect("s");
            } else {
                fail("a factor (number, s^a, q^(...), T^s)");
            }
        } while (accept("*"));
        if (neg) s.coeff = -s.coeff;
        expect("for");
        bool first = true;
        do {
            expect("s");
            if (accept(">=")) {
                if (!first) fail("'<=' or '=='");
                s.lo = integer();
            } else if (accept("<=")) {
                s.hi = integer();
            } else if (accept("==")) {
                std::int64_t l = integer();
                expect("mod");
                std::int64_t m = integer();
                if (m < 1) fail("a modulus >= 1");
                s.residue = mod_floor(l, m);
                s.modulus = m;
            } else {
                fail("'>=', '<=' or '=='");
            }
            first = false;
        } while (accept("&&"));
        return s;
    }

    void exponent(std::vector<ExponentAtom>& out) {
        bool neg = accept("-");
        while (true) {
            ExponentAtom a;
            std::int64_t mult = 1;
            bool have_number = false;
            if (peek().kind == Token::Kind::Number) {
                mult = static_cast<std::int64_t>(std::stoll(number_text()));
                have_number = true;
            }
            if (have_number && !accept("*")) {
                a.kind = ExponentAtom::Kind::One;
            } else if (accept("s")) {
                a.kind = ExponentAtom::Kind::S;
            } else if (is("floor") || is("ceil")) {
                a.kind = next().text == "floor" ? ExponentAtom::Kind::Floor : ExponentAtom::Kind::Ceil;
                expect("(");
                expect("s");
                expect("/");
                a.k = integer();
                if (a.k < 1) fail("a positive divisor");
                expect(")");
            } else {
                fail("an exponent term (integer, s, floor(s/k), ceil(s/k))");
            }
            a.mult = neg ? -mult : mult;
            out.push_back(a);
            if (is("+") || is("-")) neg = next().text == "-";
            else break;
        }
    }

    // Polynomials.

    /// Variables are x0..x9, or names in `scope` (slot = index) for formulas.
    MPoly poly_expr(const std::vector<std::string>* scope) {
        MPoly acc;
        bool neg = accept("-");
        MPoly t = poly_term(scope);
        acc = neg ? -t : t;
        while (is("+") || is("-")) {
            bool minus = next().text == "-";
            MPoly u = poly_term(scope);
            acc = minus ? acc - u : acc + u;
        }
        return acc;
    }

    MPoly poly_term(const std::vector<std::string>* scope) {
        MPoly acc = poly_power(scope);
        while (accept("*")) acc = acc * poly_power(scope);
        return acc;
    }

    MPoly poly_power(const std::vector<std::string>* scope) {
        MPoly base = poly_primary(scope);
        if (accept("^")) {
            std::string e = number_text();
            if (e.size() > 3 || std::stoi(e) > 256) fail("an exponent <= 256");
            base = base.pow(static_cast<unsigned>(std::stoi(e)));
        }
        return base;
    }

    MPoly poly_primary(const std::vector<std::string>* scope) {
        if (peek().kind == Token::Kind::Number) return MPoly(Rat(Int(next().text)));
        if (accept("(")) {
            MPoly p = poly_expr(scope);
            expect(")");
            return p;
        }
        if (accept("-")) return -poly_primary(scope);
        const Token& t = peek();
        if (t.kind == Token::Kind::Ident) {
            if (scope) {
                for (std::size_t i = scope->size(); i-- > 0;)
                    if ((*scope)[i] == t.text) {
                        next();
                        return MPoly::var(i);
                    }
                fail("a bound variable");
            }
            if (t.text.size() == 2 && t.text[0] == 'x' && std::isdigit(static_cast<unsigned char>(t.text[1]))) {
                next();
                return MPoly::var(static_cast<std::size_t>(t.text[1] - '0'));
            }
            fail("a variable x0..x9");
        }
        fail("a polynomial term");
    }

    // Residue-class formulas.

    Formula formula(std::vector<std::string>& scope) {
        std::vector<Formula> parts{formula_and(scope)};
        while (accept("||")) parts.push_back(formula_and(scope));
        return Formula::disj(std::move(parts));
    }

    Formula formula_and(std::vector<std::string>& scope) {
        std::vector<Formula> parts{formula_unary(scope)};
        while (accept("&&")) parts.push_back(formula_unary(scope));
        return Formula::conj(std::move(parts));
    }

    Formula formula_unary(std::vector<std::string>& scope) {
        if (accept("!")) return Formula::negate(formula_unary(scope));
        if (accept("true")) return Formula::truth(true);
        if (accept("false")) return Formula::truth(false);
        if (accept("exists")) {
            std::size_t base = scope.size();
            do {
                const Token& t = peek();
                if (t.kind != Token::Kind::Ident) fail("a variable name");
                scope.push_back(next().text);
            } while (accept(","));
            expect(":");
            Formula body = formula_unary(scope);
            std::size_t count = scope.size() - base;
            scope.resize(base);
            return Formula::exists(base, count, std::move(body));
        }
        if (is("(")) {
            // Either a parenthesized formula or a polynomial comparison.
            std::size_t save = pos_;
            try {
                next();
                Formula f = formula(scope);
                expect(")");
                if (!is("==") && !is("!=") && !is("+") && !is("-") && !is("*") && !is("^")) return f;
            } catch (const SyntaxError&) {
            }
            pos_ = save;
        }
        MPoly lhs = poly_expr(&scope);
        bool eq;
        if (accept("==")) eq = true;
        else if (accept("!=")) eq = false;
        else fail("'==' or '!='");
        MPoly rhs = poly_expr(&scope);
        return eq ? Formula::zero(lhs - rhs) : Formula::nonzero(lhs - rhs);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const ClassCatalog* catalog_;
};

inline DefSet parse_defset(const std::string& text, const ClassCatalog* catalog = nullptr) {
    return Parser(text, catalog).defset_only();
}
inline Integrand parse_integrand(const std::string& text, const ClassCatalog* catalog = nullptr) {
    return Parser(text, catalog).integrand_only();
}
inline SeriesSpec parse_series(const std::string& text) { return Parser(text).series_only(); }
inline std::vector<MPoly> parse_polynomials(const std::string& text) { return Parser(text).polynomials_only(); }
inline Formula parse_formula(const std::string& text) { return Parser(text).formula_only(); }

// Printers; each output reparses to the same value.

inline std::string lin_text(const Center& c) {
    if (c.value == 0 && c.spelling == "0") return "x";
    if (!c.spelling.empty() && c.spelling[0] == '-') return "x + " + c.spelling.substr(1);
    return "x - " + c.spelling;
}

inline std::string to_text(const DefSet& d) { return d.to_string(); }

inline std::string to_text(const IntegrandTerm& t) {
    std::vector<std::string> f;
    Rat c = abs(t.coeff);
    if (c != 1) f.push_back(to_string(c));
    if (t.q_power != 0) f.push_back("q^(" + std::to_string(t.q_power) + ")");
    for (const auto& n : t.counts) f.push_back("#" + n);
    if (t.v_power > 0) f.push_back("v(" + lin_text(t.center) + ")" + (t.v_power > 1 ? "^" + std::to_string(t.v_power) : ""));
    if (t.q_slope != 0) f.push_back("q^(" + std::to_string(t.q_slope) + "*v(" + lin_text(t.center) + "))");
    if (f.empty()) f.push_back("1");
    std::string out;
    for (const auto& s : f) out += (out.empty() ? "" : " * ") + s;
    return out;
}

inline std::string to_text(const Integrand& f) {
    std::string out = "f(x) = ";
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
        bool neg = f.terms[i].coeff < 0;
        if (i == 0) out += neg ? "-" : "";
        else out += neg ? " - " : " + ";
        out += to_text(f.terms[i]);
    }
    return out + " over " + to_text(f.domain);
}

inline std::string to_text(const SeriesSpec& s) {
    std::vector<std::string> f;
    Rat c = abs(s.coeff);
    if (c != 1) f.push_back(to_string(c));
    if (s.s_power > 0) f.push_back(s.s_power == 1 ? "s" : "s^" + std::to_string(s.s_power));
    if (!s.exponent.empty()) {
        std::string e;
        for (std::size_t i = 0; i < s.exponent.size(); ++i) {
            const auto& a = s.exponent[i];
            std::int64_t m = a.mult;
            if (i == 0) e += m < 0 ? "-" : "";
            else e += m < 0 ? " - " : " + ";
            m = m < 0 ? -m : m;
            std::string atom;
            switch (a.kind) {
            case ExponentAtom::Kind::One: e += std::to_string(m); continue;
            case ExponentAtom::Kind::S: atom = "s"; break;
            case ExponentAtom::Kind::Floor: atom = "floor(s/" + std::to_string(a.k) + ")"; break;
            case ExponentAtom::Kind::Ceil: atom = "ceil(s/" + std::to_string(a.k) + ")"; break;
            }
            e += std::to_string(m) + "*" + atom;
        }
        f.push_back("q^(" + e + ")");
    }
    f.push_back("T^s");
    std::string out = s.coeff < 0 ? "-" : "";
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? " * " : "") + f[i];
    out += " for s >= " + std::to_string(s.lo);
    if (s.hi) out += " && s <= " + std::to_string(*s.hi);
    if (s.modulus > 1) out += " && s == " + std::to_string(s.residue) + " mod " + std::to_string(s.modulus);
    return out;
}

inline std::string to_text(const std::vector<MPoly>& polys) {
    static const std::vector<std::string> names = {"x0", "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9"};
    std::string out;
    for (const auto& p : polys) out += (out.empty() ? "" : ", ") + p.to_string(names);
    return out;
}

/// Integrand terms with coefficients resolved against the catalog.
inline std::vector<CenteredTerm> centered_terms(const Integrand& f, const ClassCatalog* catalog = nullptr) {
    std::vector<CenteredTerm> out;
    for (const auto& t : f.terms) {
        CenteredTerm c;
        MotivicValue coeff = MotivicValue(t.coeff) * MotivicValue::q_power(t.q_power);
        for (const auto& n : t.counts) {
            auto z = catalog ? catalog->find(n) : classes::builtin(n);
            if (!z) throw InvalidArgument("unknown residue class " + n);
            coeff = coeff * MotivicValue::count_of(*z);
        }
        c.coeff = coeff;
        c.v_power = t.v_power;
        c.q_slope = t.q_slope;
        c.center = t.center.value;
        out.push_back(std::move(c));
    }
    return out;
}

/// Parsed command line.
struct Command {
    enum class Kind { Measure, Integrate, Count, Poincare, Series, Validate };
    enum class Mode { Symbolic, Numeric, Both };

    Kind kind = Kind::Measure;
    std::string input;

    bool json = false;
    bool latex = false;
    std::vector<std::uint64_t> primes;
    std::optional<unsigned> depth;
    std::optional<std::uint64_t> budget;
    std::optional<unsigned> smax;
    std::optional<std::size_t> vars;
    std::optional<unsigned> power;
    std::size_t max_order = 4;
    std::optional<unsigned> terms; // series expansion length
    Mode mode = Mode::Both;

    ClassCatalog catalog;
    std::vector<std::string> class_defs;

    std::optional<DefSet> defset;
    std::optional<Integrand> integrand;
    std::optional<VarietySpec> variety;
    std::optional<SeriesSpec> series;
};

inline const char* kind_name(Command::Kind k) {
    switch (k) {
    case Command::Kind::Measure: return "measure";
    case Command::Kind::Integrate: return "integrate";
    case Command::Kind::Count: return "count";
    case Command::Kind::Poincare: return "poincare";
    case Command::Kind::Series: return "series";
    case Command::Kind::Validate: return "validate";
    }
    return "?";
}

namespace detail {

/// Command-line errors point at the argument: line 1, column = argument index.
[[noreturn]] inline void arg_error(std::size_t index, const std::string& expected) {
    throw SyntaxError(1, index, expected);
}

inline std::uint64_t parse_u64(const std::string& s, std::size_t index, const std::string& what) {
    if (s.empty() || s.size() > 18 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        arg_error(index, what);
    return std::stoull(s);
}

/// Reports DSL errors relative to the argument they came from.
template <typename F>
auto within_argument(std::size_t index, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SyntaxError& e) {
        throw SyntaxError(e.line(), e.column(), e.expected() + " (argument " + std::to_string(index) + ")");
    }
}

} // namespace detail

/// Parses argv (without the program name).
inline Command parse_command(const std::vector<std::string>& args) {
    Command cmd;
    if (args.empty()) detail::arg_error(0, "a command (measure, integrate, count, poincare, series, validate)");
    const std::string& verb = args[0];
    if (verb == "measure") cmd.kind = Command::Kind::Measure;
    else if (verb == "integrate") cmd.kind = Command::Kind::Integrate;
    else if (verb == "count") cmd.kind = Command::Kind::Count;
    else if (verb == "poincare") cmd.kind = Command::Kind::Poincare;
    else if (verb == "series") cmd.kind = Command::Kind::Series;
    else if (verb == "validate") cmd.kind = Command::Kind::Validate;
    else detail::arg_error(1, "a command (measure, integrate, count, poincare, series, validate), got '" + verb + "'");

    std::vector<std::pair<std::size_t, std::string>> positional;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        std::size_t idx = i + 1;
        auto value = [&](const std::string& flag) -> std::string {
            if (i + 1 >= args.size()) detail::arg_error(idx, "a value after " + flag);
            ++i;
            return args[i];
        };
        if (a == "--json") cmd.json = true;
        else if (a == "--latex") cmd.latex = true;
        else if (a == "--symbolic") cmd.mode = Command::Mode::Symbolic;
        else if (a == "--numeric") cmd.mode = Command::Mode::Numeric;
        else if (a == "--both") cmd.mode = Command::Mode::Both;
        else if (a == "--primes" || a == "-p") {
            std::string v = value(a);
            cmd.primes.clear();
            std::size_t start = 0;
            while (start <= v.size()) {
                std::size_t comma = v.find(',', start);
                std::string part = v.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
                std::uint64_t p = detail::parse_u64(part, idx + 1, "a comma-separated list of primes");
                if (!is_prime(p)) detail::arg_error(idx + 1, "primes only, " + part + " is not prime");
                cmd.primes.push_back(p);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        } else if (a == "--depth") {
            cmd.depth = static_cast<unsigned>(detail::parse_u64(value(a), idx + 1, "a depth"));
        } else if (a == "--budget") {
            cmd.budget = detail::parse_u64(value(a), idx + 1, "a budget (candidate tests)");
        } else if (a == "--smax" || a == "-smax" || a == "-s") {
            cmd.smax = static_cast<unsigned>(detail::parse_u64(value(a), idx + 1, "a nonnegative integer"));
        } else if (a == "--vars" || a == "-n") {
            cmd.vars = detail::parse_u64(value(a), idx + 1, "a number of variables");
            if (*cmd.vars < 1 || *cmd.vars > 10) detail::arg_error(idx + 1, "a number of variables in 1..10");
        } else if (a == "--power") {
            cmd.power = static_cast<unsigned>(detail::parse_u64(value(a), idx + 1, "an exponent n >= 2"));
            if (*cmd.power < 2 || *cmd.power > 64) detail::arg_error(idx + 1, "an exponent n in 2..64");
        } else if (a == "--max-order") {
            cmd.max_order = detail::parse_u64(value(a), idx + 1, "a recurrence order");
        } else if (a == "--terms") {
            cmd.terms = static_cast<unsigned>(detail::parse_u64(value(a), idx + 1, "a number of coefficients"));
        } else if (a == "--class") {
            std::string def = value(a);
            auto eq = def.find('=');
            if (eq == std::string::npos || eq == 0) detail::arg_error(idx + 1, "NAME=FORMULA");
            auto trim = [](std::string t) {
                t.erase(0, t.find_first_not_of(" \t"));
                t.erase(t.find_last_not_of(" \t") + 1);
                return t;
            };
            std::string name = trim(def.substr(0, eq));
            if (name.empty()) detail::arg_error(idx + 1, "NAME=FORMULA");
            for (char c : name)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') detail::arg_error(idx + 1, "a class name of letters, digits and '_'");
            Formula f = detail::within_argument(idx + 1, [&] { return parse_formula(def.substr(eq + 1)); });
            cmd.catalog.define(name, classes::custom(name, 1, f));
            cmd.class_defs.push_back(def);
        } else if (a.size() > 1 && a[0] == '-' && !std::isdigit(static_cast<unsigned char>(a[1]))) {
            detail::arg_error(idx, "a known option, got '" + a + "'");
        } else {
            positional.emplace_back(idx, a);
        }
    }

    const bool needs_input = !(cmd.kind == Command::Kind::Measure && cmd.power);
    if (positional.size() > 1) detail::arg_error(positional[1].first, "a single quoted input");
    if (positional.empty() && needs_input && cmd.kind != Command::Kind::Count && cmd.kind != Command::Kind::Poincare)
        detail::arg_error(args.size() + 1, "an input expression");
    std::size_t at = positional.empty() ? args.size() + 1 : positional[0].first;
    cmd.input = positional.empty() ? "" : positional[0].second;

    switch (cmd.kind) {
    case Command::Kind::Measure:
        if (!cmd.input.empty() || !cmd.power)
            cmd.defset = detail::within_argument(at, [&] { return parse_defset(cmd.input, &cmd.catalog); });
        break;
    case Command::Kind::Integrate:
        cmd.integrand = detail::within_argument(at, [&] { return parse_integrand(cmd.input, &cmd.catalog); });
        break;
    case Command::Kind::Count:
    case Command::Kind::Poincare: {
        VarietySpec v;
        v.polys = detail::within_argument(at, [&] { return parse_polynomials(cmd.input); });
        std::size_t n = 1;
        for (const auto& f : v.polys) n = std::max(n, f.arity());
        if (cmd.vars) {
            if (*cmd.vars < n) detail::arg_error(at, "--vars at least " + std::to_string(n) + " for this input");
            n = *cmd.vars;
        }
        v.n = n;
        cmd.variety = v;
        break;
    }
    case Command::Kind::Series:
        cmd.series = detail::within_argument(at, [&] { return parse_series(cmd.input); });
        break;
    case Command::Kind::Validate: {
        std::string trimmed = cmd.input.substr(std::min(cmd.input.find_first_not_of(" \t\n"), cmd.input.size()));
        if (trimmed.rfind("f", 0) == 0 && trimmed.find('=') != std::string::npos && trimmed.find("f(") == 0)
            cmd.integrand = detail::within_argument(at, [&] { return parse_integrand(cmd.input, &cmd.catalog); });
        else
            cmd.defset = detail::within_argument(at, [&] { return parse_defset(cmd.input, &cmd.catalog); });
        break;
    }
    }
    return cmd;
}

} // namespace motive::cli
