#ifndef QLOCAL_VERIFY_HPP
#define QLOCAL_VERIFY_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlocal/hydro.hpp"
#include "qlocal/local_obs.hpp"
#include "qlocal/potentials.hpp"

// Identity harness: the centered finite difference of E_Omega arbitrates
// the transcription of the local-power expression, and the closed-system
// limit checks the three cancellation identities plus the reduction of the
// total power to sum_k int J_k F^ext.

namespace qlocal {

inline constexpr double kResidualFloor = 1e-12;

// Three consecutive propagation snapshots at t-dt, t, t+dt.
struct TrajectoryWindow {
    WavefunctionField prev, mid, next;
};

// Hydro fields shared by every Omega evaluated on the same window.
struct WindowFields {
    HydroFields prev, mid, next;
};

WindowFields window_fields(const TrajectoryWindow& window, const NodePolicy& policy);

struct BalanceSample {
    double t = 0.0;
    EnergyBreakdown energy;
    PowerBreakdown power;
    double energy_prev = 0.0;
    double energy_next = 0.0;
    double dEdt_fd = 0.0;
    double residual_abs = 0.0;
    double residual_norm = 0.0;  // set by finalize_balance_series
};

BalanceSample evaluate_balance(const TrajectoryWindow& window, const WindowFields& fields,
                               const OmegaSpec& omega, const PotentialAssembly& assembly);

// Fills residual_norm = residual_abs / max(|P(t)|, mean |P|, floor) and
// returns the series maximum of the normalized residual.
double finalize_balance_series(std::span<BalanceSample> series, double floor = kResidualFloor);

struct ClosedLimitSample {
    double t = 0.0;
    double eq_quantum = 0.0;   // |sum int J.F^qua + sum int J.grad Q|
    double eq_coulomb = 0.0;   // |sum int J.F^{cou,ext}|, exactly 0 for full Omega
    double eq_qpot_time = 0.0; // |sum int R^2 dQ/dt|
    double surface_flux = 0.0;
    double power_total = 0.0;
    double power_external = 0.0;
    double cross = 0.0;        // |power_total - power_external|
};

ClosedLimitSample evaluate_closed_limit(const TrajectoryWindow& window,
                                        const WindowFields& fields,
                                        const PotentialAssembly& assembly);

// Spec-op form over a materialized list of windows (tests and small runs;
// the scenario runner streams windows instead).
std::vector<BalanceSample> energy_power_balance(std::span<const TrajectoryWindow> trajectory,
                                                const OmegaSpec& omega,
                                                const PotentialAssembly& assembly,
                                                const NodePolicy& policy,
                                                double floor = kResidualFloor);

std::vector<ClosedLimitSample> closed_limit_checks(std::span<const TrajectoryWindow> trajectory,
                                                   const PotentialAssembly& assembly,
                                                   const NodePolicy& policy);

struct SeriesStats {
    double max_abs = 0.0;
    double rms = 0.0;
    bool finite = true;
};

SeriesStats stats_of(std::span<const double> values);

// Textbook checks taken straight from the worked examples: a plane wave
// has zero quantum potential and kinetic energy p^2/2, infinite-well
// eigenstates carry no current, and identical particles have equal
// presence probabilities.
struct ExampleRow {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::string detail;
};

std::vector<ExampleRow> paper_examples_suite();

}  // namespace qlocal

#endif
