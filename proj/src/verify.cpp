#include "qlocal/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qlocal/propagator.hpp"

namespace qlocal {

WindowFields window_fields(const TrajectoryWindow& window, const NodePolicy& policy) {
    return WindowFields{extract(window.prev, policy), extract(window.mid, policy),
                        extract(window.next, policy)};
}

BalanceSample evaluate_balance(const TrajectoryWindow& window, const WindowFields& fields,
                               const OmegaSpec& omega, const PotentialAssembly& assembly) {
    BalanceSample s;
    s.t = window.mid.time;
    s.energy = local_energy(window.mid, fields.mid, omega, assembly.pair());
    s.energy_prev = local_energy(window.prev, fields.prev, omega, assembly.pair()).total;
    s.energy_next = local_energy(window.next, fields.next, omega, assembly.pair()).total;
    s.power = local_power(window.mid, fields.prev, fields.mid, fields.next, omega,
                          assembly, s.t);
    const double separation = window.next.time - window.prev.time;
    s.dEdt_fd = (s.energy_next - s.energy_prev) / separation;
    s.residual_abs = std::abs(s.dEdt_fd - s.power.total);
    return s;
}

double finalize_balance_series(std::span<BalanceSample> series, double floor) {
    if (series.empty()) return 0.0;
    long double acc = 0.0L;
    for (const auto& s : series) acc += (long double)std::abs(s.power.total);
    const double mean_p = double(acc / (long double)series.size());
    double worst = 0.0;
    for (auto& s : series) {
        const double denom = std::max({std::abs(s.power.total), mean_p, floor});
        s.residual_norm = s.residual_abs / denom;
        worst = std::max(worst, s.residual_norm);
    }
    return worst;
}

ClosedLimitSample evaluate_closed_limit(const TrajectoryWindow& window,
                                        const WindowFields& fields,
                                        const PotentialAssembly& assembly) {
    const OmegaSpec omega = full_domain(*window.mid.grid);
    const PowerBreakdown p =
        local_power(window.mid, fields.prev, fields.mid, fields.next, omega, assembly,
                    window.mid.time);
    ClosedLimitSample s;
    s.t = window.mid.time;
    s.eq_quantum = std::abs(p.quantum_work + p.qpot_advect);
    s.eq_coulomb = std::abs(p.env_coulomb);
    s.eq_qpot_time = std::abs(p.qpot_time);
    s.surface_flux = std::abs(p.surface_flux);
    s.power_total = p.total;
    s.power_external = total_power_external(window.mid, assembly, window.mid.time);
    s.cross = std::abs(s.power_total - s.power_external);
    return s;
}

std::vector<BalanceSample> energy_power_balance(std::span<const TrajectoryWindow> trajectory,
                                                const OmegaSpec& omega,
                                                const PotentialAssembly& assembly,
                                                const NodePolicy& policy, double floor) {
    if (trajectory.empty())
        throw std::invalid_argument("energy_power_balance: needs at least one snapshot window");
    std::vector<BalanceSample> series;
    series.reserve(trajectory.size());
    for (const auto& window : trajectory) {
        const WindowFields fields = window_fields(window, policy);
        series.push_back(evaluate_balance(window, fields, omega, assembly));
    }
    finalize_balance_series(series, floor);
    return series;
}

std::vector<ClosedLimitSample> closed_limit_checks(std::span<const TrajectoryWindow> trajectory,
                                                   const PotentialAssembly& assembly,
                                                   const NodePolicy& policy) {
    std::vector<ClosedLimitSample> series;
    series.reserve(trajectory.size());
    for (const auto& window : trajectory) {
        const WindowFields fields = window_fields(window, policy);
        series.push_back(evaluate_closed_limit(window, fields, assembly));
    }
    return series;
}

SeriesStats stats_of(std::span<const double> values) {
    SeriesStats st;
    if (values.empty()) return st;
    long double acc = 0.0L;
    for (const double v : values) {
        if (!std::isfinite(v)) st.finite = false;
        st.max_abs = std::max(st.max_abs, std::abs(v));
        acc += (long double)(v * v);
    }
    st.rms = std::sqrt(double(acc / (long double)values.size()));
    return st;
}

namespace {

ExampleRow row(std::string name, double measured, double bound, std::string detail) {
    ExampleRow r;
    r.name = std::move(name);
    r.measured = measured;
    r.bound = bound;
    r.pass = std::isfinite(measured) && measured < bound;
    r.detail = std::move(detail);
    return r;
}

}  // namespace

std::vector<ExampleRow> paper_examples_suite() {
    std::vector<ExampleRow> rows;

    // (i) plane wave with grid wavenumber p = 2: constant amplitude, zero
    // quantum potential, kinetic energy p^2/2 carried entirely by the flow.
    {
        GridSpec spec;
        spec.particle_count = 1;
        spec.points_per_axis = 64;
        spec.box_length = 4.0 * std::numbers::pi;
        GridPtr grid = make_grid(spec);
        WavefunctionField psi = make_field(grid);
        const double p = 2.0;
        for (int i = 0; i < spec.points_per_axis; ++i) {
            const double x = grid->coordinate(i);
            psi.amplitudes[std::size_t(i)] = {std::cos(p * x), std::sin(p * x)};
        }
        psi = normalize(std::move(psi));
        const HydroFields fields = extract(psi);
        double qmax = 0.0;
        for (std::size_t i = 0; i < grid->size(); ++i)
            if (!fields.node_mask[i]) qmax = std::max(qmax, std::abs(fields.qpot_total[i]));
        const OmegaSpec omega = full_domain(*grid);
        const KineticParts kin = local_kinetic(psi, fields, omega);
        const double current = local_current(psi, 0, omega);
        rows.push_back(row("plane_wave_qpot_max", qmax, 1e-9, "max |Q| for exp(i p x)"));
        rows.push_back(row("plane_wave_kinetic_flow", std::abs(kin.flow - 0.5 * p * p), 1e-8,
                           "|flow - p^2/2|, p = 2"));
        rows.push_back(row("plane_wave_current", std::abs(current - p), 1e-8,
                           "|<J_Omega> - p| over the full box"));
    }

    // (ii) lowest state of a deep well of width 1: no current, kinetic
    // energy at the particle-in-a-box value (wall softness budgeted at 2%).
    {
        GridSpec spec;
        spec.particle_count = 1;
        spec.points_per_axis = 1024;
        spec.box_length = 4.0;
        GridPtr grid = make_grid(spec);
        ProfileSpec prof;
        prof.kind = ProfileKind::Well;
        prof.height = 8000.0;
        prof.center = 0.0;
        prof.width = 1.0;
        prof.softness = 0.008;
        AssemblyPtr assembly =
            make_assembly(grid, ExternalPotential(prof, EnvelopeSpec{}), PairPotential{1.0});
        WavefunctionField guess = make_field(grid);
        for (int i = 0; i < spec.points_per_axis; ++i) {
            const double x = grid->coordinate(i);
            guess.amplitudes[std::size_t(i)] = {std::exp(-x * x), 0.0};
        }
        RelaxOptions opt;
        opt.dtau = 5e-5;
        opt.tol = 1e-11;
        const RelaxResult relaxed = imaginary_time_relax(assembly, std::move(guess), opt);
        const HydroFields fields = extract(relaxed.state);
        const OmegaSpec omega = full_domain(*grid);
        const KineticParts kin = local_kinetic(relaxed.state, fields, omega);
        const double current = std::abs(local_current(relaxed.state, 0, omega));
        const double box_level = 0.5 * std::numbers::pi * std::numbers::pi;
        rows.push_back(row("box_eigenstate_current", current, 1e-8, "|<J_Omega>| of a real state"));
        rows.push_back(row("box_eigenstate_kinetic",
                           std::abs(kin.flow + kin.quantum - box_level) / box_level, 0.02,
                           "relative error of <K> against pi^2/2, L = 1"));
    }

    // Identical particles: exchange-symmetric state has k-independent
    // presence probabilities for any Omega.
    {
        GridSpec spec;
        spec.particle_count = 2;
        spec.points_per_axis = 64;
        spec.box_length = 16.0;
        GridPtr grid = make_grid(spec);
        WavefunctionField psi = make_field(grid);
        const int n = spec.points_per_axis;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x1 = grid->coordinate(i);
                const double x2 = grid->coordinate(j);
                const double a = std::exp(-0.5 * (x1 + 2.0) * (x1 + 2.0)) *
                                 std::exp(-0.5 * (x2 - 2.0) * (x2 - 2.0));
                psi.amplitudes[std::size_t(i) * std::size_t(n) + std::size_t(j)] = {a, 0.0};
            }
        psi = apply_symmetry(normalize(std::move(psi)), SymmetryKind::Symmetric);
        double worst = 0.0;
        for (const auto& region : {Region{0, n / 2}, Region{n / 4, 3 * n / 4}, Region{3, 17}}) {
            const OmegaSpec omega{region};
            worst = std::max(worst, std::abs(presence_probability(psi, 0, omega) -
                                             presence_probability(psi, 1, omega)));
        }
        rows.push_back(row("symmetric_presence_gap", worst, 1e-10,
                           "max_k |<Pi_1,Omega> - <Pi_2,Omega>| over sampled Omega"));
    }

    return rows;
}

}  // namespace qlocal
