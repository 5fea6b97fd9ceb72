#ifndef QLOCAL_SCENARIO_HPP
#define QLOCAL_SCENARIO_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlocal/grid.hpp"

// Declarative run description parsed from a flat sectioned key=value file
// (syntax documented in the README). Validation collects every error, not
// just the first one.

namespace qlocal {

struct ScenarioError : std::runtime_error {
    explicit ScenarioError(std::vector<std::string> errors);
    std::vector<std::string> errors;
};

struct GridBlock {
    int particles = 1;
    int points = 64;
    double length = 10.0;
    bool periodic = true;
};

struct PotentialsBlock {
    std::string profile = "zero";  // zero uniform_field sine_field harmonic barrier well
    double f0 = 0.0;
    double wavelength = 0.0;
    double omega0 = 1.0;
    double height = 0.0;
    double center = 0.0;
    double width = 1.0;
    double softness = 0.1;
    std::string envelope = "constant";  // constant ramp sinusoid
    double value = 1.0;
    double ramp_time = 1.0;
    double amplitude = 1.0;
    double frequency = 1.0;
    double phase = 0.0;
    double soft_core = 1.0;
};

struct InitialBlock {
    std::string kind = "gaussian";  // gaussian relax plane_wave
    std::vector<double> center;     // per particle; single value broadcasts
    std::vector<double> width;
    std::vector<double> momentum;
    double plane_momentum = 0.0;
    std::string symmetry = "none";  // none symmetric antisymmetric
    double perturb = 0.0;
    unsigned long seed = 0;
    double relax_dtau = 1e-3;
    double relax_tol = 1e-10;
    int relax_max_iters = 200000;
};

struct TimeBlock {
    double t_end = 1.0;
    double dt = 1e-3;
    int sample_stride = 10;
};

struct ResolvedOmega {
    double requested_lo = 0.0;
    double requested_hi = 0.0;
    Region region;               // snapped to grid indices
    double snap_distance = 0.0;  // worst of the two ends
};

struct VerifyBlock {
    double norm_drift_max = 1e-9;
    std::optional<double> energy_drift_max;         // |E(t)-E(0)|/|E(0)|, Eq. energy3 content
    std::optional<double> balance_normalized_max;
    std::optional<double> balance_abs_max;          // for runs with P_Omega near zero
    std::optional<double> continuity_max;
    std::optional<double> closed_cross_max;         // normalized |P - sum J.F^ext|
    std::optional<double> closed_cancel_max;        // normalized cancellation residuals
    std::optional<double> closed_cross_abs_max;
    std::optional<double> closed_cancel_abs_max;
    std::optional<double> presence_symmetry_max;
    double node_epsilon = 1e-8;
    double boundary_density_max = 1e-8;             // relative to peak density
};

struct OutputBlock {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
};

struct Scenario {
    std::string id = "scenario";
    GridBlock grid;
    PotentialsBlock potentials;
    InitialBlock initial;
    TimeBlock time;
    std::vector<ResolvedOmega> omegas;              // empty = full domain
    std::vector<std::string> observers;
    VerifyBlock verify;
    OutputBlock output;
    double plane_momentum_snapped = 0.0;
    double plane_momentum_snap_distance = 0.0;
};

// Names accepted in [observers] names = ...
const std::vector<std::string>& known_observers();

Scenario parse_scenario(const std::string& text, const std::string& id_hint = "scenario");
Scenario load_scenario_file(const std::string& path);

}  // namespace qlocal

#endif
