// Acceptance gate: one test per criterion, each printing its pass/fail line,
// plus end-to-end checks of the installed command line binary.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <decphase/selftest.hpp>

using namespace decphase;
namespace fs = std::filesystem;

namespace {

void criterion(acceptance::CriterionResult (*fn)()) {
    const acceptance::CriterionResult r = fn();
    std::cout << acceptance::render(r) << std::endl;
    INFO(r.name << ": " << r.detail);
    REQUIRE(r.pass);
}

struct CommandResult {
    int code = -1;
    std::string output;
};

CommandResult run_command(const std::string& cmd) {
    CommandResult res;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return res;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) res.output.append(buf, n);
    const int status = pclose(pipe);
    if (WIFEXITED(status)) res.code = WEXITSTATUS(status);
    return res;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t at = hay.find(needle); at != std::string::npos;
         at = hay.find(needle, at + needle.size()))
        ++count;
    return count;
}

std::string write_temp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p.string();
}

const std::string kCli = DECPHASE_CLI_PATH;
const std::string kScenarioDir = DECPHASE_SCENARIO_DIR;

}  // namespace

TEST_CASE("acceptance 01: one member ensembles reduce to the plain functional") {
    criterion(acceptance::reduction_single_member);
}

TEST_CASE("acceptance 02: enlarged space oracles confirm the interference phase") {
    criterion(acceptance::oracle_agreement);
}

TEST_CASE("acceptance 03: the geometric functional is gauge invariant") {
    criterion(acceptance::gauge_invariance);
}

TEST_CASE("acceptance 04: parallel transport is the fixed point of the functional") {
    criterion(acceptance::transport_fixed_point);
}

TEST_CASE("acceptance 05: commuting members collapse to the mixture phase") {
    criterion(acceptance::common_basis_identity);
}

TEST_CASE("acceptance 06: branch fringes recombine into the channel phase") {
    criterion(acceptance::recombination_identity);
}

TEST_CASE("acceptance 07: the tilted loop benchmark converges at second order") {
    criterion(acceptance::cone_benchmark);
}

TEST_CASE("acceptance 08: squared weights bound single term attainability") {
    criterion(acceptance::obstruction_bound);
}

TEST_CASE("acceptance 09: branch families stay complete on the whole grid") {
    criterion(acceptance::completeness_residual);
}

TEST_CASE("acceptance 10: the scenario pipeline parses, validates and reports") {
    criterion(acceptance::scenario_io);
}

TEST_CASE("cli: selftest prints one line per criterion and exits cleanly") {
    const CommandResult r = run_command(kCli + " selftest");
    INFO(r.output);
    CHECK(r.code == 0);
    for (int i = 1; i <= 10; ++i)
        CHECK(r.output.find("[" + std::to_string(i) + "/10] pass") != std::string::npos);
    CHECK(r.output.find("passed 10/10") != std::string::npos);
}

TEST_CASE("cli: the bundled scenarios all pass at default resolution") {
    const std::vector<std::string> names = {
        "cone_loop_sweep.json", "one_term_unitary.json", "common_eigenbasis.json",
        "phase_damping.json", "noncommuting_witness.json"};
    std::string cmd = kCli + " run --workers 2";
    for (const auto& n : names) {
        const std::string p = kScenarioDir + "/" + n;
        REQUIRE(fs::exists(p));
        cmd += " " + p;
    }
    const CommandResult r = run_command(cmd);
    INFO(r.output);
    CHECK(r.code == 0);
    CHECK(count_occurrences(r.output, "passed,true") == names.size());
    CHECK(r.output.find("passed,false") == std::string::npos);
    // the witness scenario demonstrates an inapplicable check being skipped
    CHECK(r.output.find("check,common_basis,skip,members_do_not_commute") != std::string::npos);
    // the shared diagonal pair exercises the same check for real
    CHECK(count_occurrences(r.output, "check,common_basis,pass") == 1);
}

TEST_CASE("cli: exit codes separate parse, validation and usage failures") {
    const std::string bad = write_temp("decphase_accept_bad.json", "{ \"system_dim\": 2,, }\n");
    const CommandResult parse = run_command(kCli + " run " + bad);
    INFO(parse.output);
    CHECK(parse.code == 2);
    CHECK(parse.output.find("error,parse,") != std::string::npos);
    CHECK(parse.output.find("line 1") != std::string::npos);

    const std::string invalid = write_temp("decphase_accept_invalid.json", R"({
        "system_dim": 2,
        "components": [{"weight": 2.0, "density": {"bloch": [0.0, 0.0, 0.5]}}],
        "paths": [{"segments": [{"hamiltonian": {"pauli": [0, 0, 0, 0.5]}, "duration": 1.0}]}]
    })");
    const CommandResult val = run_command(kCli + " run " + invalid);
    INFO(val.output);
    CHECK(val.code == 3);
    CHECK(val.output.find("components[0].weight") != std::string::npos);

    const CommandResult usage = run_command(kCli + " run");
    CHECK(usage.code != 0);
    CHECK(usage.code != 2);
    CHECK(usage.code != 3);
    CHECK(usage.code != 4);

    fs::remove(bad);
    fs::remove(invalid);
}

TEST_CASE("cli: sweeping a declared parameter tabulates the functionals") {
    const std::string file = kScenarioDir + "/cone_loop_sweep.json";
    const CommandResult r = run_command(kCli + " sweep " + file +
                                        " --param tilt --from 0.3 --to 1.2 --samples 3"
                                        " --steps 200");
    INFO(r.output);
    CHECK(r.code == 0);
    CHECK(r.output.rfind("tilt,relative_phase,relative_magnitude,geometric_phase,"
                         "geometric_magnitude,visibility_0",
                         0) == 0);
    CHECK(count_occurrences(r.output, "\n") == 4);

    const CommandResult undeclared = run_command(kCli + " sweep " + file +
                                                 " --param nope --from 0 --to 1 --samples 2");
    CHECK(undeclared.code == 3);
}
