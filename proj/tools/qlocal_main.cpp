// Command line front end: run a scenario file, parse-check it, or execute
// the shipped verification corpus. Exit codes: 0 pass, 1 verification
// failure, 2 usage or parse error, 3 runtime abort.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "qlocal/runner.hpp"
#include "qlocal/scenario.hpp"

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCorpus = {
    "free_gaussian", "plane_wave",  "box_eigenstate", "harmonic_ground",
    "driven_single", "driven_pair", "symmetric_pair"};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"local energy and power diagnostics for driven few-electron systems"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path;
    std::string out_dir;
    std::string scenario_dir = "scenarios";
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress per-check output");
    app.add_option("--out", out_dir, "output root directory (QLOCAL_OUT overrides)");

    CLI::App* cmd_run = app.add_subcommand("run", "run one scenario file");
    cmd_run->add_option("scenario", scenario_path, "scenario file")->required();

    CLI::App* cmd_check = app.add_subcommand("check", "parse and validate a scenario file");
    cmd_check->add_option("scenario", scenario_path, "scenario file")->required();

    CLI::App* cmd_suite = app.add_subcommand("suite", "run the shipped verification corpus");
    cmd_suite->add_option("--scenarios", scenario_dir, "directory holding the corpus")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_check->parsed()) {
            const auto scenario = qlocal::load_scenario_file(scenario_path);
            if (!quiet) {
                std::cout << "ok: " << scenario.id << "\n";
                for (const auto& o : scenario.omegas)
                    std::cout << "  omega [" << o.requested_lo << ", " << o.requested_hi
                              << "] -> indices [" << o.region.lower_index << ", "
                              << o.region.upper_index << "], snap distance " << o.snap_distance
                              << "\n";
            }
            return 0;
        }
        if (cmd_run->parsed()) {
            const auto scenario = qlocal::load_scenario_file(scenario_path);
            const auto result = qlocal::run_scenario(scenario, out_dir);
            if (!quiet) {
                std::cout << (result.exit_status == 0 ? "PASS " : "FAIL ") << scenario.id
                          << "  (artifacts in " << result.out_dir << ")\n";
                for (const auto& m : result.messages) std::cout << "  " << m << "\n";
            }
            return result.exit_status;
        }
        // suite
        std::vector<std::string> paths;
        for (const auto& name : kCorpus) {
            const fs::path p = fs::path(scenario_dir) / (name + ".scn");
            if (!fs::exists(p)) {
                std::cerr << "suite: missing scenario file " << p << "\n";
                return 2;
            }
            paths.push_back(p.string());
        }
        return qlocal::run_suite(paths, out_dir, quiet);
    } catch (const qlocal::ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cmd_check->parsed() ? 2 : 3;
    }
}
