#ifndef QLOCAL_RUNNER_HPP
#define QLOCAL_RUNNER_HPP

#include <map>
#include <string>
#include <vector>

#include "qlocal/scenario.hpp"
#include "qlocal/verify.hpp"

// Scenario execution: preparation, propagation with rolling three-snapshot
// windows, observer time series, identity report, run manifest.

namespace qlocal {

struct OmegaSummary {
    double balance_norm_max = 0.0;
    double balance_abs_max = 0.0;
    double balance_abs_rms = 0.0;
    double presence_gap_max = 0.0;
};

struct RunResult {
    // 0 pass, 1 verification failure, 3 runtime abort.
    int exit_status = 0;
    std::string out_dir;
    std::vector<std::string> messages;

    double norm_drift_max = 0.0;
    double energy_rel_drift_max = 0.0;
    double boundary_density_max = 0.0;
    double continuity_max = 0.0;
    std::vector<OmegaSummary> omegas;
    double closed_eq_quantum_norm_max = 0.0;
    double closed_eq_coulomb_max = 0.0;
    double closed_eq_qpot_time_norm_max = 0.0;
    double closed_cross_norm_max = 0.0;
    double closed_eq_quantum_abs_max = 0.0;
    double closed_eq_qpot_time_abs_max = 0.0;
    double closed_cross_abs_max = 0.0;
    int steps_completed = 0;
};

// Builds grid + potential assembly + initial state as declared. Exposed
// separately so tests and the acceptance suite can reuse the preparation.
struct PreparedScenario {
    GridPtr grid;
    AssemblyPtr assembly;
    WavefunctionField initial;
    std::vector<OmegaSpec> omegas;  // resolved; full domain when none given
};

PreparedScenario prepare_scenario(const Scenario& scenario);

// out_root overrides the scenario's output directory; the QLOCAL_OUT
// environment variable overrides both. Artifacts land in <root>/<id>/.
RunResult run_scenario(const Scenario& scenario, const std::string& out_root = "");

// Executes the shipped verification corpus plus the textbook example rows.
// Returns 0 if everything passed.
int run_suite(const std::vector<std::string>& scenario_paths, const std::string& out_root,
              bool quiet);

std::string format_double(double v);  // fixed 17-significant-digit scientific

}  // namespace qlocal

#endif
