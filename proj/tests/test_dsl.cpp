#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <pfaffkit/session.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

using namespace pfaffkit;
namespace d = pfaffkit::dsl;

static std::filesystem::path g_fixtures;

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        if (argv[i][0] != '-') {
            g_fixtures = argv[i];
            break;
        }
    }
    if (g_fixtures.empty()) g_fixtures = "../../fixtures";
    doctest::Context ctx;
    return ctx.run();
}

namespace {

const char* kTorusSource = R"(
chart T2 (periodic x, periodic y)
system S = dy
algebra g (e1)
action A of g on S with e1 = d/dy
cohomology vertical A
compare-theorem1 A
)";

}  // namespace

TEST_CASE("torus source round-trips into a full session") {
    auto spec = d::parse(kTorusSource);
    CHECK(spec.chart_name == "T2");
    CHECK(spec.chart->dimension() == 2);
    CHECK(spec.chart->coord(0).kind == CoordKind::Periodic);
    CHECK(spec.systems.count("S") == 1);
    CHECK(spec.actions.size() == 1);
    REQUIRE(spec.commands.size() == 2);
    CHECK(spec.commands[0].name == "cohomology vertical");
    CHECK(spec.commands[1].name == "compare-theorem1");

    const std::string printed = d::print(spec);
    CHECK(d::print(d::parse(printed)) == printed);
}

TEST_CASE("field expressions build the expected vector fields") {
    auto spec = d::parse(
        "chart Cyl (flat t, periodic theta)\n"
        "field xi = t*d/dt + d/dtheta\n");
    const auto& chart = spec.chart;
    VectorField expected =
        ScalarExpr::coordinate(chart, "t") * VectorField::coordinate_field(chart, "t") +
        VectorField::coordinate_field(chart, "theta");
    CHECK(spec.fields.at("xi") == expected);
}

TEST_CASE("syntax and binding diagnostics carry positions and expectations") {
    // dangling wedge, written with the UTF-8 wedge sign
    try {
        d::parse("chart C (flat x, flat y)\nform w = dx ∧\n");
        FAIL("expected a parse error");
    } catch (const d::ParseError& e) {
        CHECK(e.line >= 2);
        CHECK(!e.expected.empty());
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }

    // second chart: one chart per session
    try {
        d::parse("chart C (flat x)\nchart D (flat y)\n");
        FAIL("expected a parse error");
    } catch (const d::ParseError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.reason).find("one chart per session") != std::string::npos);
    }

    // unknown names are rejected with their position
    try {
        d::parse("chart C (flat x)\nscalar f = x + zz\n");
        FAIL("expected a parse error");
    } catch (const d::ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 16);
        CHECK(std::string(e.reason).find("zz") != std::string::npos);
    }

    // reserved words cannot be bound
    CHECK_THROWS_AS(d::parse("chart C (flat x)\nscalar form = x\n"), d::ParseError);
    // names must be bound before use in commands
    CHECK_THROWS_AS(d::parse("chart C (flat x, flat y)\ncheck-integrable S\n"), d::ParseError);
    // command arguments are type-checked at parse time
    CHECK_THROWS_AS(d::parse("chart C (flat x)\nscalar f = x\ncheck-integrable f\n"),
                    d::ParseError);
    // periodic coordinates only enter through sin/cos
    CHECK_THROWS_AS(d::parse("chart C (periodic x)\nscalar f = x\n"), d::ParseError);
    // division by a non-unit points at the missing localization
    try {
        d::parse("chart C (flat x, flat y)\nscalar f = x/y\n");
        FAIL("expected a parse error");
    } catch (const d::ParseError& e) {
        CHECK(std::string(e.reason).find("denominator") != std::string::npos);
    }
    // statements before the chart are rejected
    CHECK_THROWS_AS(d::parse("scalar f = 1\n"), d::ParseError);
}

TEST_CASE("expression grammar: rationals, powers, trig, wedges, localization") {
    auto spec = d::parse(
        "chart C (periodic x, flat y, flat v) denominators v\n"
        "scalar f = 3/2*y^2*sin(3*x) - cos(x) + 1/3\n"
        "scalar g = (y + 1)/v^2\n"
        "form w = f*dy^dv - v*dx^dy\n"
        "form z = 0\n");
    const auto& chart = spec.chart;
    ScalarExpr f = Rational(3, 2) * ScalarExpr::coordinate(chart, "y").pow(2) *
                       ScalarExpr::trig(chart, "x", 3, true) -
                   ScalarExpr::trig(chart, "x", 1, false) +
                   ScalarExpr::constant(chart, Rational(1, 3));
    CHECK(spec.scalars.at("f") == f);
    ScalarExpr v = ScalarExpr::coordinate(chart, "v");
    CHECK(spec.scalars.at("g") * v * v == ScalarExpr::coordinate(chart, "y") + ScalarExpr::one(chart));
    CHECK(spec.forms.at("w").degree() == 2);
    CHECK(spec.forms.at("z").is_zero());

    // scalar * form, unary minus, and the ASCII wedge agree with the library
    DifferentialForm w =
        wedge(f * DifferentialForm::coordinate_differential(chart, "y"),
              DifferentialForm::coordinate_differential(chart, "v")) +
        (-v) * wedge(DifferentialForm::coordinate_differential(chart, "x"),
                     DifferentialForm::coordinate_differential(chart, "y"));
    CHECK(spec.forms.at("w") == w);
}

TEST_CASE("printer emits replayable text for random values") {
    auto chart = Chart::make("C", {{"x", CoordKind::Periodic}, {"y", CoordKind::Flat},
                                   {"z", CoordKind::Flat}});
    testing::Gen gen(4711);
    for (int it = 0; it < 120; ++it) {
        // the parsed session lives on its own Chart instance, so compare the
        // canonical prints (injective on normal forms) rather than values
        ScalarExpr f = gen.scalar(chart, 3, 3, 3);
        auto spec = d::parse("chart C (periodic x, flat y, flat z)\nscalar f = " + d::print(f) +
                             "\n");
        CHECK(d::print(spec.scalars.at("f")) == d::print(f));

        DifferentialForm w = gen.form(chart, 1 + unsigned(it % 3), 3);
        auto spec2 =
            d::parse("chart C (periodic x, flat y, flat z)\nform w = " + d::print(w) + "\n");
        CHECK(d::print(spec2.forms.at("w")) == d::print(w));
    }
    // localized scalars round-trip including denominators
    auto lbase = Chart::make("L", {{"u", CoordKind::Flat}, {"v", CoordKind::Flat}});
    auto lchart = localized(lbase, {ScalarExpr::coordinate(lbase, "v")});
    testing::Gen lg(99);
    for (int it = 0; it < 40; ++it) {
        ScalarExpr f = lg.scalar(lchart, 3, 3, 0) * ScalarExpr::denominator_inverse(lchart, 0, 1 + it % 3);
        auto spec = d::parse("chart L (flat u, flat v) denominators v\nscalar f = " + d::print(f) +
                             "\n");
        CHECK(d::print(spec.scalars.at("f")) == d::print(f));
    }
}

TEST_CASE("fixture corpus: parse, print fixpoint, and clean runs") {
    REQUIRE(std::filesystem::is_directory(g_fixtures));
    auto entries = d::run_corpus(g_fixtures);
    CHECK(entries.size() >= 8);
    for (const auto& e : entries) {
        INFO(e.file << " " << e.diagnostic);
        CHECK(e.parsed);
        CHECK(e.fixpoint);
        CHECK(!e.result.command_error);
    }
}

TEST_CASE("session reports are deterministic and carry the documented keys") {
    std::ifstream in(g_fixtures / "torus.pk");
    std::stringstream buf;
    buf << in.rdbuf();
    auto spec = d::parse(buf.str());
    auto r1 = d::run(spec);
    auto r2 = d::run(spec);
    CHECK(r1.report.dump() == r2.report.dump());
    CHECK(r1.report["schema"] == "pfaffkit-report/1");
    CHECK(r1.report["cohomology"]["vertical"]["1"] == 1);
    CHECK(r1.report["compare-theorem1"]["verdict"] == "equal");
    CHECK(r1.exit_code({}) == 0);

    // contact fixture: non-integrable with a replayable witness
    std::ifstream cin(g_fixtures / "contact.pk");
    std::stringstream cbuf;
    cbuf << cin.rdbuf();
    auto cres = d::run(d::parse(cbuf.str()));
    CHECK(cres.report["check-integrable"] == false);
    const std::string gen = cres.report["commands"][0]["witness"]["generator"];
    auto replay = d::parse("chart Contact (flat x, flat y, flat z)\nform w = " + gen + "\n");
    CHECK(replay.forms.at("w").degree() == 1);

    // empty command list
    auto empty = d::run(d::parse("chart C (flat x)\n"));
    CHECK(empty.report["commands"].is_array());
    CHECK(empty.report["commands"].empty());
    CHECK(!empty.command_error);
}

TEST_CASE("strict theorem-1 flag escalates an unequal comparison") {
    // sabotage: compare the cylinder against a wrong bracket by hand-running
    // a session whose action algebra is the 1-dim abelian algebra but whose
    // truncation kills the match is not available; instead check the flag
    // wiring on an equal comparison and on a synthetic unequal result.
    d::RunOptions strict;
    strict.strict_theorem1 = true;
    std::ifstream in(g_fixtures / "cylinder.pk");
    std::stringstream buf;
    buf << in.rdbuf();
    auto res = d::run(d::parse(buf.str()), strict);
    CHECK(!res.theorem1_unequal);
    CHECK(res.exit_code(strict) == 0);

    d::RunResult synthetic;
    synthetic.theorem1_unequal = true;
    CHECK(synthetic.exit_code(strict) == 2);
    CHECK(synthetic.exit_code({}) == 0);
}

TEST_CASE("truncation override and errors surface as structured objects") {
    auto spec = d::parse(kTorusSource);
    d::RunOptions opt;
    opt.truncation_override = Truncation{3, 5};
    auto res = d::run(spec, opt);
    CHECK(res.report["truncation"]["freq"] == 5);
    CHECK(res.report["cohomology"]["vertical"]["1"] == 1);

    // euler on a non-horizontal form errors without aborting the session
    auto bad = d::parse(
        "chart Cyl (periodic x, flat y)\n"
        "system S = dy\n"
        "algebra g (e1)\n"
        "action A of g on S with e1 = d/dy\n"
        "form w = y*dy\n"
        "euler w A\n"
        "check-integrable S\n");
    auto bres = d::run(bad);
    CHECK(bres.command_error);
    CHECK(bres.report["commands"][0].contains("error"));
    CHECK(bres.report["commands"][1]["integrable"] == true);
    CHECK(bres.exit_code({}) == 1);
}
