// Command line front end: evaluate scenario files, sweep a parameter, or run
// the built-in acceptance suite.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <decphase/decphase.hpp>

namespace {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kParse = 2,
    kValidation = 3,
    kNumerical = 4,
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw decphase::ParseError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

struct CommonFlags {
    std::optional<double> steps;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_phase;
    std::string output;

    decphase::BuildOptions build_options(const std::string& file) const {
        decphase::BuildOptions opts;
        opts.steps_per_unit_time = steps;
        opts.seed = seed;
        opts.tol_phase = tol_phase;
        opts.default_name = stem_of(file);
        return opts;
    }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--steps", flags.steps, "Override steps per unit time")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", flags.seed, "Override the scenario seed");
    cmd->add_option("--tol-phase", flags.tol_phase, "Override the phase tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("-o,--output", flags.output, "Write the report here instead of stdout");
}

int emit(const std::string& text, const std::string& output) {
    if (output.empty()) {
        std::cout << text;
        return kOk;
    }
    std::ofstream out(output, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << output << '\n';
        return kUsage;
    }
    out << text;
    return kOk;
}

// Evaluate scenario files, a worker pool deep, reports emitted in input order.
int run_files(const std::vector<std::string>& files, const CommonFlags& flags, int workers) {
    struct Slot {
        std::string text;
        int code = kOk;
    };
    std::vector<Slot> slots(files.size());
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
            Slot& slot = slots[i];
            try {
                const decphase::json root =
                    decphase::parse_scenario_text(read_file(files[i]), files[i]);
                const decphase::Scenario sc =
                    decphase::build_scenario(root, flags.build_options(files[i]));
                const decphase::ScenarioReport rep = decphase::run_scenario(sc);
                slot.text = rep.text();
                slot.code = rep.passed ? kOk : kNumerical;
            } catch (const decphase::ParseError& e) {
                slot.text = std::string("error,parse,") + e.what() + '\n';
                slot.code = kParse;
            } catch (const decphase::ValidationError& e) {
                slot.text = std::string("error,validation,") + files[i] + ": " + e.what() + '\n';
                slot.code = kValidation;
            } catch (const decphase::Error& e) {
                slot.text = std::string("error,numerical,") + files[i] + ": " + e.what() + '\n';
                slot.code = kNumerical;
            }
        }
    };

    const int pool = std::max(1, std::min<int>(workers, static_cast<int>(files.size())));
    if (pool == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (int t = 0; t < pool; ++t) threads.emplace_back(work);
        for (auto& t : threads) t.join();
    }

    std::string all;
    int code = kOk;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i) all += '\n';
        all += slots[i].text;
        code = std::max(code, slots[i].code);
    }
    const int emit_code = emit(all, flags.output);
    return emit_code != kOk ? emit_code : code;
}

int run_sweep_cmd(const std::string& file, const decphase::SweepSpec& spec,
                  const CommonFlags& flags) {
    const decphase::json root = decphase::parse_scenario_text(read_file(file), file);
    const std::string csv = decphase::run_sweep(root, spec, flags.build_options(file));
    return emit(csv, flags.output);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase functionals of independently evolving state ensembles"};
    app.require_subcommand(1);

    // run
    std::vector<std::string> files;
    CommonFlags run_flags;
    int workers = 1;
    CLI::App* run = app.add_subcommand("run", "Evaluate scenario files");
    run->add_option("files", files, "Scenario JSON files")->required()->expected(-1);
    add_common(run, run_flags);
    run->add_option("--workers", workers, "Parallel scenario evaluations")
        ->check(CLI::Range(1, 256));

    // sweep
    std::string sweep_file;
    decphase::SweepSpec spec;
    CommonFlags sweep_flags;
    CLI::App* sweep = app.add_subcommand("sweep", "Vary one declared parameter");
    sweep->add_option("file", sweep_file, "Scenario JSON file")->required();
    sweep->add_option("--param", spec.parameter, "Declared parameter to sweep")->required();
    sweep->add_option("--from", spec.from, "First value")->required();
    sweep->add_option("--to", spec.to, "Last value")->required();
    sweep->add_option("--samples", spec.samples, "Sample count")->check(CLI::Range(2, 1000000));
    sweep->add_flag("--unwrap", spec.unwrap, "Make phase columns continuous across branch cuts");
    add_common(sweep, sweep_flags);

    // selftest
    CLI::App* selftest = app.add_subcommand("selftest", "Run the built-in acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) return run_files(files, run_flags, workers);
        if (sweep->parsed()) return run_sweep_cmd(sweep_file, spec, sweep_flags);
        if (selftest->parsed())
            return decphase::acceptance::run_all(std::cout) ? kOk : kNumerical;
    } catch (const decphase::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParse;
    } catch (const decphase::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const decphase::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}
