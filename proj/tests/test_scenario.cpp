#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <decphase/scenario.hpp>

using namespace decphase;
using Catch::Matchers::ContainsSubstring;

namespace {

json base() {
    return json::parse(R"({
        "name": "unit",
        "system_dim": 2,
        "components": [
            {"weight": 0.7, "density": {"bloch": [0.6, 0.0, 0.3]}},
            {"weight": 0.3, "density": {"bloch": [0.6, 0.0, 0.3]}}
        ],
        "paths": [
            {"segments": [{"hamiltonian": {"pauli": [0.0, 0.0, 0.0, 0.5]}, "duration": 1.0}]},
            {"segments": [{"hamiltonian": {"pauli": [0.0, 0.0, 0.0, -0.5]}, "duration": 1.0}]}
        ]
    })");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string line_starting(const ScenarioReport& rep, const std::string& prefix) {
    for (const auto& l : rep.lines)
        if (l.rfind(prefix, 0) == 0) return l;
    return "";
}

}  // namespace

TEST_CASE("syntax errors carry line and column") {
    CHECK_THROWS_MATCHES(parse_scenario_text("{\n  \"a\": 1,\n}"), ParseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("line 3") &&
                                                         ContainsSubstring("column 1")));
    CHECK_NOTHROW(parse_scenario_text("{}"));
}

TEST_CASE("validation errors name the offending field") {
    json j = base();
    j["components"][0].erase("weight");
    CHECK_THROWS_MATCHES(build_scenario(j), ValidationError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("components[0].weight")));

    j = base();
    j["checks"] = json::array({"frobnicate"});
    CHECK_THROWS_MATCHES(build_scenario(j), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("checks[0]")));

    j = base();
    j["components"][1]["density"] = json::parse(R"([[0.5, 0.0], [0.0]])");
    CHECK_THROWS_MATCHES(build_scenario(j), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("ragged")));

    j = base();
    j["shared"] = true;  // but two path entries remain
    CHECK_THROWS_MATCHES(build_scenario(j), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("paths")));

    j = base();
    j["paths"][0]["segments"][0]["duration"] = "missing_knob";
    CHECK_THROWS_MATCHES(build_scenario(j), ValidationError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("unknown parameter 'missing_knob'")));

    j = base();
    j["components"][0]["density"]["bloch"] = json::array({1.2, 0.0, 0.0});
    CHECK_THROWS_MATCHES(build_scenario(j), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("unit ball")));
}

TEST_CASE("parameter leaves resolve with scale and offset") {
    json j = base();
    j["parameters"] = json::object({{"a", 0.25}});
    j["paths"][0]["segments"][0]["duration"] =
        json::object({{"param", "a"}, {"scale", 2.0}, {"offset", 0.5}});

    Scenario sc = build_scenario(j);
    CHECK(sc.paths[0].duration() == Catch::Approx(1.0).margin(1e-15));

    BuildOptions opts;
    opts.parameter_overrides["a"] = 0.5;
    Scenario sc2 = build_scenario(j, opts);
    CHECK(sc2.paths[0].duration() == Catch::Approx(1.5).margin(1e-15));
}

TEST_CASE("polar and cartesian state forms agree") {
    const double r = 0.5, th = 0.93;
    json cart = base();
    cart["components"][0]["density"]["bloch"] =
        json::array({r * std::sin(th), 0.0, r * std::cos(th)});
    json polar = base();
    polar["components"][0]["density"] = json::object(
        {{"bloch_polar", json::array({r, th, 0.0})}});

    Scenario a = build_scenario(cart);
    Scenario b = build_scenario(polar);
    CHECK(max_abs(a.decomposition.component(0).matrix() -
                  b.decomposition.component(0).matrix()) < 1e-15);
}

TEST_CASE("grid resolution comes from steps per unit time") {
    Scenario sc = build_scenario(base());
    CHECK(sc.paths[0].nodes() == 1001);  // default 1000 per unit time

    BuildOptions opts;
    opts.steps_per_unit_time = 50.0;
    Scenario coarse = build_scenario(base(), opts);
    CHECK(coarse.paths[0].nodes() == 51);
}

TEST_CASE("running a channel scenario reports branches and passes its checks") {
    BuildOptions opts;
    opts.steps_per_unit_time = 400.0;  // keep the unit test quick
    Scenario sc = build_scenario(base(), opts);
    const ScenarioReport rep = run_scenario(sc);

    CHECK(rep.passed);
    CHECK(line_starting(rep, "scenario,") == "scenario,unit");
    CHECK(line_starting(rep, "cp_shaped,") == "cp_shaped,true");
    CHECK(line_starting(rep, "passed,") == "passed,true");
    CHECK_FALSE(line_starting(rep, "relative_phase,").empty());
    CHECK_FALSE(line_starting(rep, "geometric_magnitude,").empty());
    CHECK_FALSE(line_starting(rep, "branch_0_amplitude,").empty());
    CHECK_FALSE(line_starting(rep, "branch_1_visibility,").empty());
    CHECK_FALSE(line_starting(rep, "transport_residual_max,").empty());
    CHECK_FALSE(line_starting(rep, "one_term_sum,").empty());
    CHECK(line_starting(rep, "check,gauge,").rfind("check,gauge,pass", 0) == 0);
    CHECK(line_starting(rep, "check,transport,").rfind("check,transport,pass", 0) == 0);
    CHECK(line_starting(rep, "check,oracle,").rfind("check,oracle,pass", 0) == 0);
    CHECK(line_starting(rep, "check,recombination,").rfind("check,recombination,pass", 0) == 0);
    CHECK(line_starting(rep, "check,common_basis,").empty());  // not a shared path

    // reports are deterministic
    const ScenarioReport again = run_scenario(build_scenario(base(), opts));
    CHECK(rep.text() == again.text());
}

TEST_CASE("explicit check lists skip what does not apply") {
    json j = base();
    j["checks"] = json::array({"common_basis", "recombination"});
    BuildOptions opts;
    opts.steps_per_unit_time = 100.0;
    const ScenarioReport rep = run_scenario(build_scenario(j, opts));
    CHECK(line_starting(rep, "check,common_basis,").rfind("check,common_basis,skip", 0) == 0);
    CHECK(rep.passed);  // skips never fail a run
}

TEST_CASE("sweeps tabulate phases and mark dark fringes") {
    json j = json::parse(R"({
        "system_dim": 2,
        "parameters": {"angle": 0.0},
        "components": [{"weight": 1.0, "density": {"bloch": [1.0, 0.0, 0.0]}}],
        "paths": [{"segments": [{
            "hamiltonian": {"pauli": [0.0, 0.0, 0.0, {"param": "angle", "scale": 0.5}]},
            "duration": 1.0}]}]
    })");

    SweepSpec spec;
    spec.parameter = "angle";
    spec.from = 0.0;
    spec.to = 2.0 * kPi;
    spec.samples = 3;
    BuildOptions opts;
    opts.steps_per_unit_time = 50.0;

    const std::string csv = run_sweep(j, spec, opts);
    const std::vector<std::string> rows = split(csv, '\n');
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] ==
          "angle,relative_phase,relative_magnitude,geometric_phase,geometric_magnitude,"
          "visibility_0");
    CHECK(split(rows[1], ',')[1] == "0");                      // identity loop
    CHECK(rows[2].find("UNDEFINED") != std::string::npos);     // half turn darkens the fringe
    CHECK(std::stod(split(rows[2], ',')[5]) < 1e-9);           // visibility column near zero

    SweepSpec bad = spec;
    bad.parameter = "nope";
    CHECK_THROWS_AS(run_sweep(j, bad, opts), ValidationError);
}

TEST_CASE("unwrapping keeps swept phases continuous") {
    json j = json::parse(R"({
        "system_dim": 2,
        "parameters": {"angle": 0.0},
        "components": [{"weight": 1.0, "density": {"bloch": [0.0, 0.0, 1.0]}}],
        "paths": [{"segments": [{
            "hamiltonian": {"pauli": [0.0, 0.0, 0.0, {"param": "angle", "scale": 0.5}]},
            "duration": 1.0}]}]
    })");

    SweepSpec spec;
    spec.parameter = "angle";
    spec.from = 0.0;
    spec.to = 3.0 * kPi;
    spec.samples = 4;
    BuildOptions opts;
    opts.steps_per_unit_time = 40.0;

    // the pole state picks up phase -angle/2: wrapped it folds back, unwrapped
    // it marches to -3 pi / 2
    const std::string wrapped = run_sweep(j, spec, opts);
    CHECK(std::stod(split(split(wrapped, '\n')[4], ',')[1]) ==
          Catch::Approx(kPi / 2.0).margin(1e-9));

    spec.unwrap = true;
    const std::string smooth = run_sweep(j, spec, opts);
    CHECK(std::stod(split(split(smooth, '\n')[4], ',')[1]) ==
          Catch::Approx(-3.0 * kPi / 2.0).margin(1e-9));
}
