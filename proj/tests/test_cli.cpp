#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

#include "generators.hpp"
#include "motive/cli/run.hpp"

using namespace motive;
using namespace motive::cli;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = main_entry(args, out, err);
    return {code, out.str(), err.str()};
}

Json invoke_json(std::vector<std::string> args) {
    args.push_back("--json");
    return Json::parse(invoke(std::move(args)).out);
}

IntegrandTerm random_integrand_term(testgen::Rng& g) {
    static const std::vector<std::string> names = {"units", "sq", "nsq", "one", "rf", "cube", "pow5"};
    IntegrandTerm t;
    t.coeff = make_rat(g.range(-5, 5), g.range(1, 4));
    if (t.coeff == 0) t.coeff = 1;
    if (g.coin()) t.q_power = g.range(-3, 3);
    for (std::int64_t i = g.range(0, 2); i > 0; --i) t.counts.push_back(g.pick(names));
    t.v_power = static_cast<unsigned>(g.range(0, 3));
    t.q_slope = g.range(-2, 2);
    // A term without v(x - c) has no center to print.
    if (t.v_power > 0 || t.q_slope != 0) t.center = Center::of(g.pick(testgen::center_pool()));
    return t;
}

SeriesSpec random_series_spec(testgen::Rng& g) {
    SeriesSpec s;
    s.coeff = make_rat(g.range(1, 6), g.range(1, 3));
    if (g.coin()) s.coeff = -s.coeff;
    s.s_power = static_cast<unsigned>(g.range(0, 3));
    for (std::int64_t i = g.range(0, 3); i > 0; --i) {
        ExponentAtom a;
        a.kind = static_cast<ExponentAtom::Kind>(g.range(0, 3));
        a.mult = g.range(1, 3) * (g.coin() ? 1 : -1);
        if (a.kind == ExponentAtom::Kind::Floor || a.kind == ExponentAtom::Kind::Ceil) a.k = g.range(1, 4);
        s.exponent.push_back(a);
    }
    s.lo = g.range(0, 3);
    if (g.coin(0.3)) s.hi = s.lo + g.range(0, 8);
    s.modulus = g.range(1, 4);
    s.residue = g.range(0, s.modulus - 1);
    return s;
}

MPoly random_mpoly(testgen::Rng& g) {
    MPoly f;
    for (std::int64_t t = g.range(1, 4); t > 0; --t) {
        MPoly m(static_cast<int>(g.range(-4, 4)));
        for (std::size_t k = 0; k < 3; ++k) m = m * MPoly::var(k).pow(static_cast<unsigned>(g.range(0, 3)));
        f = f + m;
    }
    return f;
}

} // namespace

TEST(Parse, CommandExamples) {
    Command m = parse_command({"measure", "v(x) >= 0"});
    EXPECT_EQ(m.kind, Command::Kind::Measure);
    ASSERT_TRUE(m.defset);
    EXPECT_EQ(*m.defset, DefSet::val(0, Cmp::Ge, 0));

    Command p = parse_command({"poincare", "--both", "-p", "3,5", "-smax", "6", "x0^2"});
    EXPECT_EQ(p.kind, Command::Kind::Poincare);
    EXPECT_EQ(p.mode, Command::Mode::Both);
    EXPECT_EQ(p.primes, (std::vector<std::uint64_t>{3, 5}));
    EXPECT_EQ(p.smax, 6u);
    ASSERT_TRUE(p.variety);
    EXPECT_EQ(p.variety->n, 1u);
    EXPECT_EQ(p.variety->polys, std::vector<MPoly>{MPoly::var(0).pow(2)});

    EXPECT_THROW(parse_command({"measure", "v(x -"}), SyntaxError);
    EXPECT_THROW(parse_command({"frobnicate", "x"}), SyntaxError);
    EXPECT_THROW(parse_command({"measure", "--depth", "lots", "v(x) >= 0"}), SyntaxError);
}

TEST(Parse, ReportsErrorLocation) {
    try {
        parse_defset("v(x) >= 0 &&\n  ac(x) in");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 11u);
    }
    try {
        parse_defset("v(x - 1/2) >= 0 && v(x) == 1 mod");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 1u);
        EXPECT_EQ(e.column(), 33u);
    }
}

TEST(Parse, DslForms) {
    DefSet d = parse_defset("!(v(x + 1/3) < 2) || x == 2 && ac(x - 2) in nsq");
    EXPECT_EQ(d.kind, DefSet::Kind::Or);
    Integrand f = parse_integrand("f(x) = 2 * v(x)^2 * q^(-1*v(x)) + #sq * q^(3) over v(x) >= 0");
    ASSERT_EQ(f.terms.size(), 2u);
    EXPECT_EQ(f.terms[0].coeff, 2);
    EXPECT_EQ(f.terms[0].v_power, 2u);
    EXPECT_EQ(f.terms[0].q_slope, -1);
    EXPECT_EQ(f.terms[1].counts, std::vector<std::string>{"sq"});
    EXPECT_EQ(f.terms[1].q_power, 3);
    SeriesSpec s = parse_series("s^2 * q^(-s + floor(s/2)) * T^s for s >= 1 && s == 1 mod 3");
    EXPECT_EQ(s.s_power, 2u);
    EXPECT_EQ(s.exponent.size(), 2u);
    EXPECT_EQ(s.modulus, 3);
    EXPECT_EQ(parse_polynomials("x0*x1 - 3, x2^2").size(), 2u);
    EXPECT_THROW(parse_defset("ac(x) in nosuchclass"), SyntaxError);
}

TEST(ParseProperty, DefSetsRoundTrip) {
    testgen::Rng g(71);
    for (int i = 0; i < 300; ++i) {
        DefSet d = testgen::random_defset(g);
        std::string text = to_text(d);
        DefSet back = parse_defset(text);
        EXPECT_EQ(back, d) << text;
        EXPECT_EQ(to_text(back), text);
    }
}

TEST(ParseProperty, IntegrandsRoundTrip) {
    testgen::Rng g(72);
    for (int i = 0; i < 200; ++i) {
        Integrand f;
        for (std::int64_t k = g.range(1, 3); k > 0; --k) f.terms.push_back(random_integrand_term(g));
        f.domain = testgen::random_defset(g);
        std::string text = to_text(f);
        Integrand back = parse_integrand(text);
        EXPECT_EQ(back, f) << text;
    }
}

TEST(ParseProperty, SeriesRoundTrip) {
    testgen::Rng g(73);
    for (int i = 0; i < 200; ++i) {
        SeriesSpec s = random_series_spec(g);
        std::string text = to_text(s);
        SeriesSpec back = parse_series(text);
        EXPECT_EQ(back, s) << text;
        for (std::int64_t k = 0; k < 30; ++k) EXPECT_EQ(back.step_linear()(k), s.step_linear()(k));
    }
}

TEST(ParseProperty, PolynomialsRoundTrip) {
    testgen::Rng g(74);
    for (int i = 0; i < 200; ++i) {
        std::vector<MPoly> polys = {random_mpoly(g), random_mpoly(g)};
        std::string text = to_text(polys);
        EXPECT_EQ(parse_polynomials(text), polys) << text;
    }
}

TEST(Run, SquaresMeasure) {
    Json j = invoke_json({"measure", "--power", "2"});
    EXPECT_EQ(j["validity_threshold"], 3);
    EXPECT_EQ(j["result"]["value_text"], "1/2*q/(q + 1)");
    Command c = parse_command({"measure", "--power", "2"});
    ReportEnvelope env = run(c);
    EXPECT_EQ(env.threshold, 3u);
}

TEST(Run, PoincareAffineLine) {
    Json j = invoke_json({"poincare", "--both", "-p", "3", "x0 - x0"});
    EXPECT_EQ(j["result"]["symbolic"]["text"], "1/(1 - q*T)");
    EXPECT_EQ(j["result"]["numeric"][0]["fit"]["numerator"], Json::array({"1"}));
    EXPECT_EQ(j["result"]["numeric"][0]["fit"]["denominator"], Json::array({"1", "-3"}));
    EXPECT_EQ(j["result"]["verdict"], "MATCH");
}

TEST(Run, PoincareFallsBackToCounts) {
    Outcome o = invoke({"poincare", "-p", "3", "--smax", "9", "x0^2 - x1^3"});
    EXPECT_EQ(o.code, 0);
    EXPECT_NE(o.out.find("no closed form"), std::string::npos);
    EXPECT_NE(o.out.find("fit:"), std::string::npos);
}

TEST(Run, ValidateExampleIntegral) {
    Json j = invoke_json({"validate", "-p", "5", "--depth", "10", "f(x) = v(x) over v(x) >= 0 && ac(x) in one"});
    EXPECT_EQ(j["result"]["verdict"], "MATCH");
    EXPECT_EQ(j["result"]["evaluations"][0]["value"], "1/16");
    EXPECT_TRUE(j["result"]["evaluations"][0]["inside"].get<bool>());
}

TEST(Run, SeriesAndCount) {
    Json s = invoke_json({"series", "--terms", "4", "-p", "5", "q^(-s) * T^s for s >= 0"});
    EXPECT_EQ(s["result"]["text"], "q/(q - T)");
    EXPECT_EQ(s["result"]["coefficients"], Json::array({"1", "1/q", "1/q^2", "1/q^3"}));
    Json c = invoke_json({"count", "-p", "3", "-s", "3", "x0*x1"});
    EXPECT_EQ(c["result"]["grid"][3]["count"], "81");
    Outcome csv = invoke({"count", "-p", "3", "-s", "1", "x0*x1"});
    EXPECT_EQ(csv.out.rfind("p,s,count\n3,0,1\n3,1,5\nnote: ", 0), 0u);
}

TEST(Run, UserDefinedClass) {
    Json j = invoke_json({"measure", "--class", "half=exists y1: (x - y1^2 == 0)", "v(x) == 0 && ac(x) in half"});
    EXPECT_EQ(j["exit_code"], nullptr);
    EXPECT_FALSE(j.contains("error"));
}

TEST(ExitCodes, ByErrorKind) {
    EXPECT_EQ(invoke({"measure", "v(x) >= 0"}).code, 0);
    Outcome syn = invoke({"measure", "v(x -"});
    EXPECT_EQ(syn.code, 2);
    EXPECT_NE(syn.err.find("SyntaxError"), std::string::npos);
    EXPECT_EQ(invoke({"integrate", "f(x) = 1 over v(x) <= 0"}).code, 3);
    EXPECT_EQ(invoke({"validate", "-p", "3", "v(x) == 0 && ac(x) in cube"}).code, 3);
    EXPECT_EQ(invoke({"measure", "v(x) >= 0 && v(x - 0) >= 1"}).code, 0);
    EXPECT_EQ(invoke({"count", "-p", "7", "-s", "6", "--budget", "100", "x0*x1"}).code, 4);
    EXPECT_EQ(invoke({}).code, 2);
}

TEST(ExitCodes, ErrorsAreMachineReadable) {
    Json e = invoke_json({"measure", "v(x) >= 0 && v(x) == 1 mod 0"});
    EXPECT_EQ(e["error"]["kind"], "SyntaxError");
    EXPECT_EQ(e["error"]["exit_code"], 2);
    EXPECT_EQ(e["error"]["line"], 1);
    Json b = invoke_json({"count", "-p", "7", "-s", "6", "--budget", "100", "x0*x1"});
    EXPECT_EQ(b["error"]["kind"], "BudgetExceeded");
    EXPECT_EQ(b["error"]["exit_code"], 4);
}

TEST(ExitCodes, Binary) {
    std::string bin = MOTIVE_CLI_PATH;
    auto status = [&](const std::string& args) {
        int rc = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    EXPECT_EQ(status("measure 'v(x) >= 0'"), 0);
    EXPECT_EQ(status("measure 'v(x -'"), 2);
    EXPECT_EQ(status("integrate 'f(x) = 1 over v(x) <= 0'"), 3);
    EXPECT_EQ(status("count -p 7 -s 6 --budget 100 x0*x1"), 4);
}

TEST(Json, ByteDeterministic) {
    std::vector<std::vector<std::string>> cmds = {
        {"measure", "--json", "v(x) >= 0 && ac(x - 1) in nsq || x == 1/2"},
        {"integrate", "--json", "-p", "5,7", "f(x) = 3 * v(x)^2 + q^(-1) * #sq over v(x - 1) >= 0 && ac(x - 1) in sq"},
        {"poincare", "--json", "--both", "-p", "2,3", "x0*x1"},
        {"series", "--json", "--terms", "5", "s * q^(-ceil(s/2)) * T^s for s >= 1"},
        {"count", "--json", "-p", "5", "-s", "3", "x0^2 - x1^3"},
    };
    for (const auto& c : cmds) {
        std::string first = invoke(c).out;
        EXPECT_FALSE(first.empty());
        for (int i = 0; i < 3; ++i) EXPECT_EQ(invoke(c).out, first);
        Json j = Json::parse(first);
        for (const char* key : {"command", "input", "result", "validity_threshold", "notes"}) EXPECT_TRUE(j.contains(key)) << key;
    }
}
