#include "qlocal/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <nlohmann/json.hpp>

#include "qlocal/propagator.hpp"

namespace qlocal {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

namespace {

ProfileKind profile_kind_of(const std::string& name) {
    if (name == "zero") return ProfileKind::Zero;
    if (name == "uniform_field") return ProfileKind::UniformField;
    if (name == "sine_field") return ProfileKind::SineField;
    if (name == "harmonic") return ProfileKind::Harmonic;
    if (name == "barrier") return ProfileKind::Barrier;
    return ProfileKind::Well;
}

EnvelopeKind envelope_kind_of(const std::string& name) {
    if (name == "constant") return EnvelopeKind::Constant;
    if (name == "ramp") return EnvelopeKind::Ramp;
    return EnvelopeKind::Sinusoid;
}

SymmetryKind symmetry_kind_of(const std::string& name) {
    if (name == "symmetric") return SymmetryKind::Symmetric;
    if (name == "antisymmetric") return SymmetryKind::Antisymmetric;
    return SymmetryKind::None;
}

bool has_observer(const Scenario& s, const std::string& name) {
    return std::find(s.observers.begin(), s.observers.end(), name) != s.observers.end();
}

// One CSV time series, buffered so normalization passes can run first.
struct CsvTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void write(const fs::path& dir) const {
        std::ofstream out(dir / (name + ".csv"));
        for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << format_double(row[i]);
            out << "\n";
        }
    }
};

json scenario_to_json(const Scenario& s) {
    json j;
    j["id"] = s.id;
    j["grid"] = {{"particles", s.grid.particles},
                 {"points", s.grid.points},
                 {"length", s.grid.length},
                 {"periodic", s.grid.periodic}};
    j["potentials"] = {{"profile", s.potentials.profile},
                       {"f0", s.potentials.f0},
                       {"wavelength", s.potentials.wavelength},
                       {"omega0", s.potentials.omega0},
                       {"height", s.potentials.height},
                       {"center", s.potentials.center},
                       {"width", s.potentials.width},
                       {"softness", s.potentials.softness},
                       {"envelope", s.potentials.envelope},
                       {"value", s.potentials.value},
                       {"ramp_time", s.potentials.ramp_time},
                       {"amplitude", s.potentials.amplitude},
                       {"frequency", s.potentials.frequency},
                       {"phase", s.potentials.phase},
                       {"soft_core", s.potentials.soft_core}};
    j["initial"] = {{"kind", s.initial.kind},
                    {"center", s.initial.center},
                    {"width", s.initial.width},
                    {"momentum", s.initial.momentum},
                    {"plane_momentum", s.initial.plane_momentum},
                    {"symmetry", s.initial.symmetry},
                    {"perturb", s.initial.perturb},
                    {"seed", s.initial.seed},
                    {"relax_dtau", s.initial.relax_dtau},
                    {"relax_tol", s.initial.relax_tol},
                    {"relax_max_iters", s.initial.relax_max_iters}};
    j["time"] = {{"t_end", s.time.t_end},
                 {"dt", s.time.dt},
                 {"sample_stride", s.time.sample_stride}};
    json omegas = json::array();
    for (const auto& o : s.omegas)
        omegas.push_back({{"requested_lo", o.requested_lo},
                          {"requested_hi", o.requested_hi},
                          {"lower_index", o.region.lower_index},
                          {"upper_index", o.region.upper_index},
                          {"snap_distance", o.snap_distance}});
    j["omega"] = omegas;
    j["observers"] = s.observers;
    json verify;
    verify["norm_drift_max"] = s.verify.norm_drift_max;
    auto put_opt = [&](const char* key, const std::optional<double>& v) {
        if (v) verify[key] = *v;
    };
    put_opt("energy_drift_max", s.verify.energy_drift_max);
    put_opt("balance_normalized_max", s.verify.balance_normalized_max);
    put_opt("balance_abs_max", s.verify.balance_abs_max);
    put_opt("continuity_max", s.verify.continuity_max);
    put_opt("closed_cross_max", s.verify.closed_cross_max);
    put_opt("closed_cancel_max", s.verify.closed_cancel_max);
    put_opt("closed_cross_abs_max", s.verify.closed_cross_abs_max);
    put_opt("closed_cancel_abs_max", s.verify.closed_cancel_abs_max);
    put_opt("presence_symmetry_max", s.verify.presence_symmetry_max);
    verify["node_epsilon"] = s.verify.node_epsilon;
    verify["boundary_density_max"] = s.verify.boundary_density_max;
    j["verify"] = verify;
    j["output"] = {{"directory", s.output.directory},
                   {"csv", s.output.csv},
                   {"json", s.output.json}};
    if (s.initial.kind == "plane_wave") {
        j["initial"]["plane_momentum_snapped"] = s.plane_momentum_snapped;
        j["initial"]["plane_momentum_snap_distance"] = s.plane_momentum_snap_distance;
    }
    return j;
}

double seam_density_relative(const WavefunctionField& psi) {
    const ConfigurationGrid& grid = *psi.grid;
    const int n = grid.points_per_axis();
    const int margin = 5;
    double peak = 0.0;
    double seam = 0.0;
    const std::size_t total = grid.size();
    for (std::size_t i = 0; i < total; ++i) {
        const double rho = std::norm(psi.amplitudes[i]);
        peak = std::max(peak, rho);
        bool near = false;
        for (int a = 0; a < grid.axes() && !near; ++a) {
            const int idx = grid.axis_index(i, a);
            near = idx < margin || idx >= n - margin;
        }
        if (near) seam = std::max(seam, rho);
    }
    return peak > 0.0 ? seam / peak : 0.0;
}

}  // namespace

PreparedScenario prepare_scenario(const Scenario& scenario) {
    GridSpec gs;
    gs.particle_count = scenario.grid.particles;
    gs.dims_per_particle = 1;
    gs.points_per_axis = scenario.grid.points;
    gs.box_length = scenario.grid.length;
    gs.periodic = scenario.grid.periodic;
    GridPtr grid = make_grid(gs);

    ProfileSpec prof;
    prof.kind = profile_kind_of(scenario.potentials.profile);
    prof.strength = scenario.potentials.f0;
    prof.wavelength = scenario.potentials.wavelength;
    prof.omega0 = scenario.potentials.omega0;
    prof.height = scenario.potentials.height;
    prof.center = scenario.potentials.center;
    prof.width = scenario.potentials.width;
    prof.softness = scenario.potentials.softness;
    EnvelopeSpec env;
    env.kind = envelope_kind_of(scenario.potentials.envelope);
    env.value = scenario.potentials.value;
    env.ramp_time = scenario.potentials.ramp_time;
    env.amplitude = scenario.potentials.amplitude;
    env.omega = scenario.potentials.frequency;
    env.phase = scenario.potentials.phase;
    AssemblyPtr assembly = make_assembly(grid, ExternalPotential(prof, env),
                                         PairPotential{scenario.potentials.soft_core});

    const int n = gs.points_per_axis;
    const int N = gs.particle_count;
    WavefunctionField psi = make_field(grid);
    const SymmetryKind symmetry = symmetry_kind_of(scenario.initial.symmetry);

    if (scenario.initial.kind == "plane_wave") {
        const double p = scenario.plane_momentum_snapped;
        std::vector<int> idx(static_cast<std::size_t>(grid->axes()));
        for (std::size_t flat = 0; flat < grid->size(); ++flat) {
            grid->unravel(flat, idx);
            double phase = 0.0;
            for (int a = 0; a < grid->axes(); ++a)
                phase += p * grid->coordinate(idx[std::size_t(a)]);
            psi.amplitudes[flat] = {std::cos(phase), std::sin(phase)};
        }
        psi = normalize(std::move(psi));
    } else {
        // Per-particle Gaussians; the relax path uses them as the guess.
        std::vector<int> idx(static_cast<std::size_t>(grid->axes()));
        for (std::size_t flat = 0; flat < grid->size(); ++flat) {
            grid->unravel(flat, idx);
            double log_amp = 0.0;
            double phase = 0.0;
            for (int k = 0; k < N; ++k) {
                const double x = grid->coordinate(idx[std::size_t(k)]);
                const double c = scenario.initial.center[std::size_t(k)];
                const double w = scenario.initial.width[std::size_t(k)];
                const double pk = scenario.initial.kind == "gaussian"
                                      ? scenario.initial.momentum[std::size_t(k)]
                                      : 0.0;
                log_amp += -(x - c) * (x - c) / (4.0 * w * w);
                phase += pk * x;
            }
            const double amp = std::exp(log_amp);
            psi.amplitudes[flat] = {amp * std::cos(phase), amp * std::sin(phase)};
        }
        psi = normalize(std::move(psi));
        if (scenario.initial.kind == "relax") {
            RelaxOptions opt;
            opt.dtau = scenario.initial.relax_dtau;
            opt.tol = scenario.initial.relax_tol;
            opt.max_iters = scenario.initial.relax_max_iters;
            opt.symmetry = symmetry;
            psi = imaginary_time_relax(assembly, std::move(psi), opt).state;
        }
    }

    if (scenario.initial.perturb > 0.0) {
        std::mt19937_64 rng(scenario.initial.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double amax = 0.0;
        for (const auto& a : psi.amplitudes) amax = std::max(amax, std::abs(a));
        for (auto& a : psi.amplitudes)
            a += scenario.initial.perturb * amax * std::complex<double>(u(rng), u(rng));
        psi = normalize(std::move(psi));
    }
    if (symmetry != SymmetryKind::None && scenario.initial.kind != "relax")
        psi = apply_symmetry(psi, symmetry);

    PreparedScenario prep;
    prep.grid = grid;
    prep.assembly = assembly;
    prep.initial = std::move(psi);
    if (scenario.omegas.empty())
        prep.omegas.push_back(full_domain(*grid));
    else
        for (const auto& o : scenario.omegas) prep.omegas.push_back(OmegaSpec{o.region});
    return prep;
}

RunResult run_scenario(const Scenario& scenario, const std::string& out_root) {
    const auto wall_start = std::chrono::steady_clock::now();
    RunResult result;

    std::string root = out_root.empty() ? scenario.output.directory : out_root;
    if (const char* env_root = std::getenv("QLOCAL_OUT"); env_root && *env_root) root = env_root;
    const fs::path dir = fs::path(root) / scenario.id;
    fs::create_directories(dir);
    result.out_dir = dir.string();

    PreparedScenario prep = prepare_scenario(scenario);
    const NodePolicy node_policy{scenario.verify.node_epsilon};
    const double dt = scenario.time.dt;
    const long steps = std::lround(scenario.time.t_end / dt);
    const int stride = scenario.time.sample_stride;
    const int N = scenario.grid.particles;
    const std::size_t n_omega = prep.omegas.size();

    StrangPlan plan(prep.assembly, dt);
    WavefunctionField psi = prep.initial;

    // Buffered observer tables.
    const bool obs_norm = has_observer(scenario, "norm");
    const bool obs_energy = has_observer(scenario, "energy_total");
    const bool obs_total_power = has_observer(scenario, "total_power");
    const bool obs_boundary = has_observer(scenario, "boundary_density");
    const bool obs_presence = has_observer(scenario, "presence");
    const bool obs_local_energy = has_observer(scenario, "local_energy");
    const bool obs_local_power = has_observer(scenario, "local_power");
    const bool obs_balance = has_observer(scenario, "balance");
    const bool obs_continuity = has_observer(scenario, "continuity");
    const bool obs_closed = has_observer(scenario, "closed_limit");
    const bool needs_windows =
        obs_local_energy || obs_local_power || obs_balance || obs_continuity || obs_closed;

    CsvTable csv_norm{"norm", {"t", "norm_sq", "drift"}, {}};
    CsvTable csv_energy{"energy_total", {"t", "kinetic", "coulomb", "internal_total"}, {}};
    CsvTable csv_total_power{"total_power", {"t", "power_external"}, {}};
    CsvTable csv_boundary{"boundary_density", {"t", "seam_density_rel"}, {}};
    CsvTable csv_continuity{"continuity", {"t", "l2_residual"}, {}};
    CsvTable csv_closed{"closed_limit",
                        {"t", "eq_quantum", "eq_coulomb", "eq_qpot_time", "surface_flux",
                         "power_total", "power_external", "cross"},
                        {}};
    std::vector<CsvTable> csv_presence(n_omega), csv_local_energy(n_omega),
        csv_local_power(n_omega), csv_balance(n_omega);
    for (std::size_t w = 0; w < n_omega; ++w) {
        const std::string suffix = "_omega" + std::to_string(w);
        csv_presence[w].name = "presence" + suffix;
        csv_presence[w].header = {"t"};
        for (int k = 0; k < N; ++k) csv_presence[w].header.push_back("p" + std::to_string(k + 1));
        if (N >= 2) csv_presence[w].header.push_back("pair_12");
        csv_local_energy[w].name = "local_energy" + suffix;
        csv_local_energy[w].header = {"t",           "kinetic_flow",     "kinetic_quantum",
                                      "kinetic_imag", "coulomb_internal", "total"};
        csv_local_power[w].name = "local_power" + suffix;
        csv_local_power[w].header = {"t",           "drive",     "env_coulomb", "quantum_work",
                                     "surface_flux", "qpot_time", "qpot_advect", "total"};
        csv_balance[w].name = "balance" + suffix;
        csv_balance[w].header = {"t",           "e_omega",      "dEdt_fd",
                                 "p_omega",     "residual_abs", "residual_norm"};
    }

    std::vector<std::vector<BalanceSample>> balance_series(n_omega);
    std::vector<ClosedLimitSample> closed_series;
    std::vector<double> continuity_series;
    result.omegas.assign(n_omega, OmegaSummary{});

    double energy0 = 0.0;
    bool aborted = false;
    long abort_step = -1;

    auto instantaneous_sample = [&](const WavefunctionField& state) {
        const double t = state.time;
        if (obs_norm) {
            const double n2 = norm_squared(state);
            csv_norm.rows.push_back({t, n2, std::abs(n2 - 1.0)});
        }
        if (obs_energy) {
            const double kin = kinetic_expectation(state);
            const double internal = internal_energy(state, *prep.assembly);
            csv_energy.rows.push_back({t, kin, internal - kin, internal});
            const double drift = std::abs(internal - energy0) /
                                 std::max(std::abs(energy0), 1e-300);
            result.energy_rel_drift_max = std::max(result.energy_rel_drift_max, drift);
        }
        if (obs_total_power)
            csv_total_power.rows.push_back(
                {t, total_power_external(state, *prep.assembly, t)});
        if (obs_boundary) {
            const double seam = seam_density_relative(state);
            result.boundary_density_max = std::max(result.boundary_density_max, seam);
            csv_boundary.rows.push_back({t, seam});
        }
        if (obs_presence) {
            for (std::size_t w = 0; w < n_omega; ++w) {
                std::vector<double> row{t};
                double pmin = 1.0, pmax = 0.0;
                for (int k = 0; k < N; ++k) {
                    const double pk = presence_probability(state, k, prep.omegas[w]);
                    row.push_back(pk);
                    pmin = std::min(pmin, pk);
                    pmax = std::max(pmax, pk);
                }
                if (N >= 2) row.push_back(pair_presence(state, 0, 1, prep.omegas[w]));
                csv_presence[w].rows.push_back(row);
                if (N >= 2)
                    result.omegas[w].presence_gap_max =
                        std::max(result.omegas[w].presence_gap_max, pmax - pmin);
            }
        }
    };

    auto window_sample = [&](const TrajectoryWindow& window) {
        const WindowFields fields = window_fields(window, node_policy);
        const double t = window.mid.time;
        if (obs_continuity) {
            const double res = continuity_residual(window.prev, window.mid, window.next);
            continuity_series.push_back(res);
            csv_continuity.rows.push_back({t, res});
            result.continuity_max = std::max(result.continuity_max, res);
        }
        for (std::size_t w = 0; w < n_omega; ++w) {
            if (obs_balance) {
                balance_series[w].push_back(
                    evaluate_balance(window, fields, prep.omegas[w], *prep.assembly));
            } else if (obs_local_energy || obs_local_power) {
                // Without the balance observer still emit the breakdowns.
            }
            if (obs_local_energy) {
                const EnergyBreakdown e =
                    obs_balance ? balance_series[w].back().energy
                                : local_energy(window.mid, fields.mid, prep.omegas[w],
                                               prep.assembly->pair());
                csv_local_energy[w].rows.push_back({t, e.kinetic_flow, e.kinetic_quantum,
                                                    e.kinetic_imag_diag, e.coulomb_internal,
                                                    e.total});
            }
            if (obs_local_power) {
                const PowerBreakdown p =
                    obs_balance ? balance_series[w].back().power
                                : local_power(window.mid, fields.prev, fields.mid,
                                              fields.next, prep.omegas[w], *prep.assembly, t);
                csv_local_power[w].rows.push_back({t, p.drive, p.env_coulomb, p.quantum_work,
                                                   p.surface_flux, p.qpot_time, p.qpot_advect,
                                                   p.total});
            }
        }
        if (obs_closed) {
            closed_series.push_back(evaluate_closed_limit(window, fields, *prep.assembly));
            const auto& c = closed_series.back();
            csv_closed.rows.push_back({t, c.eq_quantum, c.eq_coulomb, c.eq_qpot_time,
                                       c.surface_flux, c.power_total, c.power_external,
                                       c.cross});
        }
    };

    if (obs_energy) energy0 = internal_energy(psi, *prep.assembly);
    instantaneous_sample(psi);

    std::deque<WavefunctionField> window;
    window.push_back(psi);
    for (long s = 1; s <= steps && !aborted; ++s) {
        plan.step(psi);
        const double drift = std::abs(norm_squared(psi) - 1.0);
        result.norm_drift_max = std::max(result.norm_drift_max, drift);
        // Negated comparison so a NaN norm (overflowed potential) aborts too.
        if (!(drift <= 1e-6)) {
            aborted = true;
            abort_step = s;
            break;
        }
        window.push_back(psi);
        if (window.size() > 3) window.pop_front();
        if (s % std::max(stride, 1) == 0 && s < steps) instantaneous_sample(psi);
        if (s == steps) instantaneous_sample(psi);
        if (needs_windows && window.size() == 3) {
            const long mid_step = s - 1;
            if (mid_step >= 1 && mid_step % stride == 0)
                window_sample(TrajectoryWindow{window[0], window[1], window[2]});
        }
        result.steps_completed = int(s);
    }

    // Normalized residuals need the series mean, so they are filled here.
    for (std::size_t w = 0; w < n_omega; ++w) {
        if (!balance_series[w].empty()) {
            result.omegas[w].balance_norm_max = finalize_balance_series(balance_series[w]);
            std::vector<double> abs_res;
            abs_res.reserve(balance_series[w].size());
            for (const auto& b : balance_series[w]) {
                abs_res.push_back(b.residual_abs);
                csv_balance[w].rows.push_back({b.t, b.energy.total, b.dEdt_fd, b.power.total,
                                               b.residual_abs, b.residual_norm});
            }
            const SeriesStats st = stats_of(abs_res);
            result.omegas[w].balance_abs_rms = st.rms;
            result.omegas[w].balance_abs_max = st.max_abs;
        }
    }
    if (!closed_series.empty()) {
        long double acc = 0.0L;
        for (const auto& c : closed_series) acc += (long double)std::abs(c.power_total);
        const double mean_p = double(acc / (long double)closed_series.size());
        for (const auto& c : closed_series) {
            const double denom = std::max({std::abs(c.power_total), mean_p, kResidualFloor});
            result.closed_eq_quantum_norm_max =
                std::max(result.closed_eq_quantum_norm_max, c.eq_quantum / denom);
            result.closed_eq_coulomb_max = std::max(result.closed_eq_coulomb_max, c.eq_coulomb);
            result.closed_eq_qpot_time_norm_max =
                std::max(result.closed_eq_qpot_time_norm_max, c.eq_qpot_time / denom);
            result.closed_cross_norm_max =
                std::max(result.closed_cross_norm_max, c.cross / denom);
            result.closed_eq_quantum_abs_max =
                std::max(result.closed_eq_quantum_abs_max, c.eq_quantum);
            result.closed_eq_qpot_time_abs_max =
                std::max(result.closed_eq_qpot_time_abs_max, c.eq_qpot_time);
            result.closed_cross_abs_max = std::max(result.closed_cross_abs_max, c.cross);
        }
    }

    // Verification verdicts against the declared bounds.
    auto check = [&](bool ok, const std::string& message) {
        if (!ok) result.messages.push_back(message);
    };
    bool nan_found = false;
    auto scan_nan = [&](const CsvTable& t) {
        for (const auto& row : t.rows)
            for (double v : row)
                if (!std::isfinite(v)) nan_found = true;
    };
    for (const auto* t : {&csv_norm, &csv_energy, &csv_total_power, &csv_boundary,
                          &csv_continuity, &csv_closed})
        scan_nan(*t);
    for (const auto& tables : {csv_presence, csv_local_energy, csv_local_power, csv_balance})
        for (const auto& t : tables) scan_nan(t);

    if (aborted) {
        result.exit_status = 3;
        result.messages.push_back("aborted at step " + std::to_string(abort_step) +
                                  ": norm drift " + format_double(result.norm_drift_max) +
                                  " exceeded 1e-6");
    } else {
        check(!nan_found, "non-finite value in an observer series");
        check(result.norm_drift_max < scenario.verify.norm_drift_max,
              "norm drift " + format_double(result.norm_drift_max) + " exceeds bound " +
                  format_double(scenario.verify.norm_drift_max));
        if (scenario.verify.energy_drift_max && obs_energy)
            check(result.energy_rel_drift_max < *scenario.verify.energy_drift_max,
                  "energy drift " + format_double(result.energy_rel_drift_max) +
                      " exceeds bound " + format_double(*scenario.verify.energy_drift_max));
        if (scenario.verify.balance_normalized_max && obs_balance)
            for (std::size_t w = 0; w < n_omega; ++w)
                check(result.omegas[w].balance_norm_max < *scenario.verify.balance_normalized_max,
                      "omega " + std::to_string(w) + ": balance residual " +
                          format_double(result.omegas[w].balance_norm_max) + " exceeds bound " +
                          format_double(*scenario.verify.balance_normalized_max));
        if (scenario.verify.balance_abs_max && obs_balance)
            for (std::size_t w = 0; w < n_omega; ++w)
                check(result.omegas[w].balance_abs_max < *scenario.verify.balance_abs_max,
                      "omega " + std::to_string(w) + ": absolute balance residual " +
                          format_double(result.omegas[w].balance_abs_max) + " exceeds bound " +
                          format_double(*scenario.verify.balance_abs_max));
        if (scenario.verify.continuity_max && obs_continuity)
            check(result.continuity_max < *scenario.verify.continuity_max,
                  "continuity residual " + format_double(result.continuity_max) +
                      " exceeds bound " + format_double(*scenario.verify.continuity_max));
        if (obs_closed && (scenario.verify.closed_cross_max || scenario.verify.closed_cancel_max))
            check(result.boundary_density_max < scenario.verify.boundary_density_max,
                  "closed-limit checks need a green boundary monitor; seam density " +
                      format_double(result.boundary_density_max));
        if (scenario.verify.closed_cross_max && obs_closed)
            check(result.closed_cross_norm_max < *scenario.verify.closed_cross_max,
                  "closed-limit cross check " + format_double(result.closed_cross_norm_max) +
                      " exceeds bound " + format_double(*scenario.verify.closed_cross_max));
        if (scenario.verify.closed_cancel_max && obs_closed) {
            const double worst =
                std::max({result.closed_eq_quantum_norm_max, result.closed_eq_coulomb_max,
                          result.closed_eq_qpot_time_norm_max});
            check(worst < *scenario.verify.closed_cancel_max,
                  "closed-limit cancellation residual " + format_double(worst) +
                      " exceeds bound " + format_double(*scenario.verify.closed_cancel_max));
        }
        if (scenario.verify.closed_cross_abs_max && obs_closed)
            check(result.closed_cross_abs_max < *scenario.verify.closed_cross_abs_max,
                  "closed-limit absolute cross check " +
                      format_double(result.closed_cross_abs_max) + " exceeds bound " +
                      format_double(*scenario.verify.closed_cross_abs_max));
        if (scenario.verify.closed_cancel_abs_max && obs_closed) {
            const double worst =
                std::max({result.closed_eq_quantum_abs_max, result.closed_eq_coulomb_max,
                          result.closed_eq_qpot_time_abs_max});
            check(worst < *scenario.verify.closed_cancel_abs_max,
                  "closed-limit absolute cancellation residual " + format_double(worst) +
                      " exceeds bound " + format_double(*scenario.verify.closed_cancel_abs_max));
        }
        if (scenario.verify.presence_symmetry_max && obs_presence) {
            double worst = 0.0;
            for (const auto& o : result.omegas) worst = std::max(worst, o.presence_gap_max);
            check(worst < *scenario.verify.presence_symmetry_max,
                  "presence symmetry gap " + format_double(worst) + " exceeds bound " +
                      format_double(*scenario.verify.presence_symmetry_max));
        }
        if (obs_boundary)
            check(result.boundary_density_max < scenario.verify.boundary_density_max,
                  "seam density " + format_double(result.boundary_density_max) +
                      " exceeds bound " + format_double(scenario.verify.boundary_density_max));
        if (!result.messages.empty()) result.exit_status = 1;
    }

    // Artifacts.
    if (scenario.output.csv) {
        if (obs_norm) csv_norm.write(dir);
        if (obs_energy) csv_energy.write(dir);
        if (obs_total_power) csv_total_power.write(dir);
        if (obs_boundary) csv_boundary.write(dir);
        if (obs_continuity) csv_continuity.write(dir);
        if (obs_closed) csv_closed.write(dir);
        for (std::size_t w = 0; w < n_omega; ++w) {
            if (obs_presence) csv_presence[w].write(dir);
            if (obs_local_energy) csv_local_energy[w].write(dir);
            if (obs_local_power) csv_local_power[w].write(dir);
            if (obs_balance) csv_balance[w].write(dir);
        }
    }

    if (scenario.output.json) {
        json report;
        report["scenario"] = scenario.id;
        report["note"] =
            "all bounds are implementation-chosen discretization budgets; the source "
            "equalities carry no numerical tolerances";
        report["config"] = scenario_to_json(scenario);
        report["summary"] = {
            {"steps", result.steps_completed},
            {"norm_drift_max", result.norm_drift_max},
            {"energy_rel_drift_max", result.energy_rel_drift_max},
            {"boundary_density_max", result.boundary_density_max},
            {"continuity_max", result.continuity_max},
            {"closed_eq_quantum_norm_max", result.closed_eq_quantum_norm_max},
            {"closed_eq_coulomb_max", result.closed_eq_coulomb_max},
            {"closed_eq_qpot_time_norm_max", result.closed_eq_qpot_time_norm_max},
            {"closed_cross_norm_max", result.closed_cross_norm_max},
            {"closed_eq_quantum_abs_max", result.closed_eq_quantum_abs_max},
            {"closed_eq_qpot_time_abs_max", result.closed_eq_qpot_time_abs_max},
            {"closed_cross_abs_max", result.closed_cross_abs_max}};
        json omegas = json::array();
        for (std::size_t w = 0; w < n_omega; ++w)
            omegas.push_back({{"balance_norm_max", result.omegas[w].balance_norm_max},
                              {"balance_abs_max", result.omegas[w].balance_abs_max},
                              {"balance_abs_rms", result.omegas[w].balance_abs_rms},
                              {"presence_gap_max", result.omegas[w].presence_gap_max}});
        report["omegas"] = omegas;
        report["pass"] = result.exit_status == 0;
        report["failures"] = result.messages;
        std::ofstream(dir / "report.json") << report.dump(2) << "\n";
    }

    {
        const auto wall_end = std::chrono::steady_clock::now();
        json manifest;
        manifest["scenario"] = scenario.id;
        manifest["version"] = "0.1.0";
        manifest["config"] = scenario_to_json(scenario);
        manifest["grid_stats"] = {{"total_points", double(prep.grid->size())},
                                  {"spacing", prep.grid->spacing()},
                                  {"axes", prep.grid->axes()}};
        manifest["steps_completed"] = result.steps_completed;
        manifest["aborted"] = aborted;
        if (aborted) manifest["abort_step"] = abort_step;
        manifest["exit_status"] = result.exit_status;
        // Wall clock is the one volatile field; rerun comparisons skip it.
        manifest["wall_clock_seconds"] =
            std::chrono::duration<double>(wall_end - wall_start).count();
        std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
    }

    return result;
}

int run_suite(const std::vector<std::string>& scenario_paths, const std::string& out_root,
              bool quiet) {
    int failures = 0;
    for (const auto& path : scenario_paths) {
        Scenario scenario;
        try {
            scenario = load_scenario_file(path);
        } catch (const std::exception& e) {
            std::cerr << "suite: " << path << ": " << e.what() << "\n";
            ++failures;
            continue;
        }
        const RunResult r = run_scenario(scenario, out_root);
        if (!quiet) {
            std::cout << (r.exit_status == 0 ? "PASS " : "FAIL ") << scenario.id << "\n";
            for (const auto& m : r.messages) std::cout << "     " << m << "\n";
        }
        if (r.exit_status != 0) ++failures;
    }
    for (const auto& row : paper_examples_suite()) {
        if (!quiet)
            std::cout << (row.pass ? "PASS " : "FAIL ") << row.name << "  measured "
                      << format_double(row.measured) << "  bound " << format_double(row.bound)
                      << "\n";
        if (!row.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace qlocal
