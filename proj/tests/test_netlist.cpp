#include "circadj/errors.hpp"
#include "circadj/netlist.hpp"

#include <catch_amalgamated.hpp>

using namespace circadj;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string error_of(std::string_view text) {
    try {
        (void)parse_netlist(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("single resistor line maps directly to fields", "[netlist]") {
    const auto n = parse_netlist("R1 1 0 2.0\n");
    REQUIRE(n.elements.size() == 1);
    CHECK(n.elements[0].kind == ElementKind::Resistor);
    CHECK(n.elements[0].value == 2.0);
    CHECK(n.nodes == std::vector<std::string>{"0", "1"});
    REQUIRE(n.params.size() == 1);
    CHECK(n.params[0].name == "R1");
}

TEST_CASE("SI suffixes", "[netlist]") {
    CHECK(parse_si_number("10n").value() == Catch::Approx(10e-9));
    CHECK(parse_si_number("2.2u").value() == Catch::Approx(2.2e-6));
    CHECK(parse_si_number("1meg").value() == Catch::Approx(1e6));
    CHECK(parse_si_number("4.7kOhm").value() == Catch::Approx(4.7e3));
    CHECK(parse_si_number("1e-3").value() == 1e-3);
    CHECK(parse_si_number("10m").value() == Catch::Approx(0.01));
    CHECK_FALSE(parse_si_number("abc"));
    CHECK_FALSE(parse_si_number("1.5x2"));
    CHECK_FALSE(parse_si_number(""));
}

TEST_CASE("rectifier fixture has the four Fig. 3 elements", "[netlist]") {
    const auto n = builtin_circuit("half_wave_rectifier");
    CHECK(n.elements.size() == 4);
    CHECK(n.nodes == std::vector<std::string>{"0", "in", "out"});
    // the diode is not differentiable
    REQUIRE(n.params.size() == 2);
    CHECK(n.params[0].name == "C1");
    CHECK(n.params[1].name == "R1");
    REQUIRE(n.tran);
    REQUIRE(n.sens);
    CHECK(n.sens->qoi == "v(out)");
}

TEST_CASE("parse errors carry line and column", "[netlist]") {
    CHECK_THAT(error_of("R1 1 0 -5\n"), ContainsSubstring("nonpositive"));
    CHECK_THAT(error_of("R1 1 0 2\nX1 1 0 3\n"), ContainsSubstring("line 2, column 1"));
    CHECK_THAT(error_of("R1 1 0 2\nX1 1 0 3\n"), ContainsSubstring("unknown element kind"));
    CHECK_THAT(error_of("R1 1 0 2\nr1 1 0 3\n"), ContainsSubstring("duplicate element name"));
    CHECK_THAT(error_of("R1 1 0 2\nR2 1 2 3\n"), ContainsSubstring("dangling node '2'"));
    CHECK_THAT(error_of("R1 1 2 2\nR2 1 2 3\n"), ContainsSubstring("ground"));
    CHECK_THAT(error_of("V1 1 0 DC 1\nR1 1 2 3\nC1 2 3 1\n"), ContainsSubstring("dangling node '3'"));
    CHECK_THAT(error_of("R1 1 0 2\nR2 1 0 abc\n"), ContainsSubstring("line 2, column 8"));
    CHECK_THAT(error_of("R1 1 1 2\nR2 1 0 3\n"), ContainsSubstring("both terminals"));
    CHECK_THAT(error_of("R1 1 0 2\n.tran 1u\n"), ContainsSubstring(".tran"));
    CHECK_THAT(error_of("R1 1 0 2\n.bogus\n"), ContainsSubstring("unknown directive"));
    CHECK_THAT(error_of("S1 1 0 RON=1 ROFF=0.5 PERIOD=1u DUTY=0.5\nR1 1 0 1\n"), ContainsSubstring("ROFF must exceed"));
    CHECK_THAT(error_of("V1 1 0 SIN(1 -5)\nR1 1 0 1\n"), ContainsSubstring("frequency"));
    CHECK_THAT(error_of("V1 1 0 PWM(0 1 1u 1.5)\nR1 1 0 1\n"), ContainsSubstring("duty"));
    CHECK_THAT(error_of("R1 1 0 2\n.params D1\n"), ContainsSubstring("unknown element"));
    CHECK_THAT(error_of(""), ContainsSubstring("no elements"));
}

TEST_CASE("InputError exposes the location", "[netlist]") {
    try {
        (void)parse_netlist("* comment\nR1 a 0 1\nC1 a 0 zero\n");
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 8);
    }
}

TEST_CASE(".params restricts the parameter set", "[netlist]") {
    const auto n = parse_netlist("V1 a 0 DC 1\nR1 a b 1\nC1 b 0 1\nR2 b 0 5\n.params r2 C1\n");
    REQUIRE(n.params.size() == 2);
    CHECK(n.params[0].name == "C1");
    CHECK(n.params[1].name == "R2");
    CHECK_THROWS_AS(parse_netlist("V1 a 0 DC 1\nR1 a 0 1\n.params V1\n"), InputError);
}

TEST_CASE("parameters are sorted by name with contiguous ids", "[netlist]") {
    const auto n = builtin_circuit("b6_bridge_reduced");
    for (std::size_t i = 0; i < n.params.size(); ++i) {
        CHECK(n.params[i].id == i);
        if (i > 0) CHECK(n.params[i - 1].name < n.params[i].name);
        CHECK(n.params[i].nominal > 0.0);
        CHECK(n.elements[n.params[i].element].name == n.params[i].name);
    }
}

TEST_CASE("serialize round-trips", "[netlist]") {
    const char* texts[] = {
        "V1 in 0 SIN(10 50 0.3)\nD1 in out IS=2e-12 N=1.5 VT=0.03\nR1 out 0 100\nC1 out 0 1m\n.tran 1u 0.1\n"
        ".sens 0.08 0.1 v(out)\n",
        "V1 a 0 PWM(0 5 1u 0.25 10n 20n 3n)\nR1 a b 1k\nL1 b 0 1u\nI1 b 0 DC 1m\n.params L1\n",
        "V1 a 0 DC 12\nS1 a b RON=0.1 ROFF=1meg PERIOD=10u DUTY=0.4 DELAY=1u RAMP=5n\nR1 b 0 3\n",
    };
    for (const char* text : texts) {
        const auto n = parse_netlist(text);
        CHECK(parse_netlist(serialize(n)) == n);
    }
    for (int m : {0, 1, 3}) {
        const auto b6 = builtin_circuit("b6_bridge_reduced", {m});
        CHECK(parse_netlist(serialize(b6)) == b6);
    }
}

TEST_CASE("b6 skeleton and ladder growth", "[netlist]") {
    const auto skeleton = builtin_circuit("b6_bridge_reduced", {0});
    int switches = 0, cds = 0;
    for (const auto& e : skeleton.elements) {
        if (e.kind == ElementKind::Switch) ++switches;
        if (e.name.rfind("C_DS_", 0) == 0) ++cds;
    }
    CHECK(switches == 6);
    CHECK(cds == 6);
    CHECK(skeleton.find_element("L_uh-vh3") != nullptr);
    CHECK(skeleton.find_element("V_dc") != nullptr);

    // six Z_par positions, three elements per stage
    for (int m = 1; m <= 3; ++m) {
        const auto prev = builtin_circuit("b6_bridge_reduced", {m - 1});
        const auto cur = builtin_circuit("b6_bridge_reduced", {m});
        CHECK(cur.elements.size() == prev.elements.size() + 6 * 3);
        CHECK(cur.nodes.size() > prev.nodes.size());
    }
    CHECK_THROWS_AS(builtin_circuit("b6_bridge_reduced", {-1}), InputError);
    CHECK_THROWS_AS(builtin_circuit("nope"), InputError);
    CHECK_THROWS_AS(load_netlist("builtin:b6_bridge_reduced:x"), InputError);
    CHECK(load_netlist("builtin:b6_bridge_reduced:1") == builtin_circuit("b6_bridge_reduced", {1}));
}

TEST_CASE("with_element_value re-finalizes", "[netlist]") {
    const auto n = builtin_circuit("half_wave_rectifier");
    const auto r = n.element_index("R1");
    const auto changed = with_element_value(n, r, 200.0);
    CHECK(changed.param("R1").nominal == 200.0);
    CHECK_THROWS_AS(with_element_value(n, r, -1.0), InputError);
    CHECK_THROWS_AS(with_element_value(n, n.element_index("D1"), 1.0), InputError);
}

TEST_CASE("missing file is an input error", "[netlist]") {
    CHECK_THROWS_AS(load_netlist("/nonexistent/x.cir"), InputError);
}

TEST_CASE("shipped circuit files match the builtins", "[netlist]") {
    CHECK(load_netlist(CIRCADJ_CIRCUITS_DIR "/rectifier.cir") == builtin_circuit("half_wave_rectifier"));
    CHECK(load_netlist(CIRCADJ_CIRCUITS_DIR "/b6.cir") == builtin_circuit("b6_bridge_reduced"));
}
