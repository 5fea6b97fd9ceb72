// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// any fails. Scenario directory comes from argv[1] (default: scenarios).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "qlocal/propagator.hpp"
#include "qlocal/runner.hpp"
#include "qlocal/verify.hpp"

using namespace qlocal;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::vector<std::string> kCorpus = {
    "free_gaussian", "plane_wave",  "box_eigenstate", "harmonic_ground",
    "driven_single", "driven_pair", "symmetric_pair"};

}  // namespace

int main(int argc, char** argv) {
    const std::string scen_dir = argc > 1 ? argv[1] : "scenarios";
    const fs::path root_a = fs::temp_directory_path() / "qlocal_acceptance_a";
    const fs::path root_b = fs::temp_directory_path() / "qlocal_acceptance_b";
    fs::remove_all(root_a);
    fs::remove_all(root_b);

    std::map<std::string, Scenario> scenarios;
    std::map<std::string, RunResult> results;
    for (const auto& name : kCorpus) {
        const fs::path path = fs::path(scen_dir) / (name + ".scn");
        scenarios[name] = load_scenario_file(path.string());
        results[name] = run_scenario(scenarios[name], root_a.string());
    }

    // 1. Norm conservation on every shipped scenario.
    {
        double worst = 0.0;
        bool all_ran = true;
        for (const auto& name : kCorpus) {
            worst = std::max(worst, results[name].norm_drift_max);
            all_ran = all_ran && results[name].exit_status != 3;
        }
        report("1 norm-conservation", all_ran && worst < 1e-9,
               "max |norm^2 - 1| = " + num(worst) + " (bound 1e-9)");
    }

    // 2. Isolated-system energy conservation: driven_pair geometry, drive off.
    {
        Scenario isolated = scenarios["driven_pair"];
        isolated.id = "driven_pair_isolated";
        isolated.potentials.envelope = "constant";
        isolated.potentials.value = 0.0;
        isolated.observers = {"norm", "energy_total"};
        isolated.verify = VerifyBlock{};
        isolated.verify.energy_drift_max = 1e-6;
        const RunResult r = run_scenario(isolated, root_a.string());
        report("2 isolated-energy", r.exit_status == 0 && r.energy_rel_drift_max < 1e-6,
               "max |E(t)-E(0)|/|E(0)| = " + num(r.energy_rel_drift_max) + " (bound 1e-6)");
    }

    // 3. Local balance on driven_pair, with dt refinement.
    RunResult pair_half;
    {
        const RunResult& r = results["driven_pair"];
        const double resid = r.omegas.empty() ? 1.0 : r.omegas[0].balance_norm_max;
        Scenario refined = scenarios["driven_pair"];
        refined.id = "driven_pair_dt_half";
        refined.time.dt = 5e-4;
        refined.time.sample_stride = 50;
        pair_half = run_scenario(refined, root_a.string());
        const double rms_coarse = r.omegas.empty() ? 0.0 : r.omegas[0].balance_abs_rms;
        const double rms_fine = pair_half.omegas.empty() ? 1.0 : pair_half.omegas[0].balance_abs_rms;
        const double order = std::log2(rms_coarse / rms_fine);
        const bool pass = resid < 1e-2 && order > 1.7 && order < 2.3;
        report("3 local-balance", pass,
               "normalized residual " + num(resid) + " (bound 1e-2), measured order " +
                   num(order) + " (window [1.7, 2.3])");
    }

    // 4. Closed-system limit on driven_single over the full box.
    {
        const RunResult& r = results["driven_single"];
        const double cancel =
            std::max({r.closed_eq_quantum_norm_max, r.closed_eq_coulomb_max,
                      r.closed_eq_qpot_time_norm_max});
        const bool pass = r.closed_cross_norm_max < 1e-3 && cancel < 1e-4;
        report("4 closed-limit", pass,
               "|P - sum J.F|/denom = " + num(r.closed_cross_norm_max) +
                   " (bound 1e-3), worst cancellation " + num(cancel) + " (bound 1e-4)");
    }

    // 5. Plane-wave example: Q = 0, flow = p^2/2, current = p.
    // 6. Box and harmonic eigenstate examples.
    {
        const auto rows = paper_examples_suite();
        auto find = [&](const std::string& name) -> const ExampleRow& {
            for (const auto& row : rows)
                if (row.name == name) return row;
            throw std::runtime_error("missing example row " + name);
        };
        const auto& qrow = find("plane_wave_qpot_max");
        const auto& frow = find("plane_wave_kinetic_flow");
        const auto& crow = find("plane_wave_current");
        report("5 plane-wave-example", qrow.pass && frow.pass && crow.pass,
               "max|Q| = " + num(qrow.measured) + ", |flow - 2| = " + num(frow.measured) +
                   ", |J - 2| = " + num(crow.measured));

        const auto& bc = find("box_eigenstate_current");
        const auto& bk = find("box_eigenstate_kinetic");

        // Harmonic ground state: relaxation energy and the QHJ constancy.
        GridSpec gs;
        gs.particle_count = 1;
        gs.points_per_axis = 256;
        gs.box_length = 20.0;
        GridPtr grid = make_grid(gs);
        ProfileSpec prof;
        prof.kind = ProfileKind::Harmonic;
        prof.omega0 = 1.0;
        AssemblyPtr assembly =
            make_assembly(grid, ExternalPotential(prof, EnvelopeSpec{}), PairPotential{1.0});
        WavefunctionField guess = make_field(grid);
        for (int i = 0; i < gs.points_per_axis; ++i) {
            const double x = grid->coordinate(i);
            guess.amplitudes[std::size_t(i)] = {std::exp(-0.4 * (x - 0.5) * (x - 0.5)), 0.0};
        }
        RelaxOptions opt;
        opt.dtau = 1e-3;
        opt.tol = 1e-12;
        const RelaxResult relaxed = imaginary_time_relax(assembly, normalize(std::move(guess)), opt);
        const HydroFields fields = extract(relaxed.state);
        double qhj_worst = 0.0;
        for (std::size_t i = 0; i < grid->size(); ++i) {
            if (fields.node_mask[i]) continue;
            const double x = grid->coordinate(int(i));
            qhj_worst = std::max(qhj_worst,
                                 std::abs(fields.qpot_total[i] + 0.5 * x * x - 0.5));
        }
        const bool harmonic_pass = std::abs(relaxed.energy - 0.5) < 1e-4 && qhj_worst < 1e-3;
        report("6 eigenstate-examples", bc.pass && bk.pass && harmonic_pass,
               "box |J| = " + num(bc.measured) + ", box kinetic rel err = " + num(bk.measured) +
                   ", harmonic |E - 0.5| = " + num(std::abs(relaxed.energy - 0.5)) +
                   ", max|Q+U-E| = " + num(qhj_worst));
    }

    // 7. Coulomb locality with narrow disjoint packets.
    {
        GridSpec gs;
        gs.particle_count = 2;
        gs.points_per_axis = 256;
        gs.box_length = 40.0;
        GridPtr grid = make_grid(gs);
        const PairPotential pair{4.0};
        auto packet_pair = [&](double c2) {
            WavefunctionField psi = make_field(grid);
            const int n = gs.points_per_axis;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double x1 = grid->coordinate(i);
                    const double x2 = grid->coordinate(j);
                    psi.amplitudes[std::size_t(i) * std::size_t(n) + std::size_t(j)] = {
                        std::exp(-(x1 + 1.5) * (x1 + 1.5) / (4.0 * 0.25 * 0.25) -
                                 (x2 - c2) * (x2 - c2) / (4.0 * 0.25 * 0.25)),
                        0.0};
                }
            return normalize(std::move(psi));
        };
        const double dx = grid->spacing();
        const int lo = int(std::lround((-5.0 + 20.0) / dx));
        const int hi = int(std::lround((5.0 + 20.0) / dx));
        const OmegaSpec omega{Region{lo, hi}};
        const double inside = local_coulomb(packet_pair(1.5), omega, pair);
        const double outside = local_coulomb(packet_pair(8.0), omega, pair);
        const bool pass = std::abs(inside - 0.2) / 0.2 < 0.01 && outside < 1e-6;
        report("7 coulomb-locality", pass,
               "C_Omega = " + num(inside) + " (0.2 within 1%), partner outside: " +
                   num(outside) + " (bound 1e-6)");
    }

    // 8. Identical-particle symmetry of presence probabilities.
    {
        const RunResult& r = results["symmetric_pair"];
        double worst = 0.0;
        for (const auto& o : r.omegas) worst = std::max(worst, o.presence_gap_max);
        report("8 presence-symmetry", worst < 1e-10,
               "max |<Pi_1> - <Pi_2>| = " + num(worst) + " (bound 1e-10)");
    }

    // 9. Continuity residual and its second-order decay on driven_pair.
    {
        const double coarse = results["driven_pair"].continuity_max;
        const double fine = pair_half.continuity_max;
        const double order = std::log2(coarse / fine);
        const bool pass = coarse < 1e-5 && order > 1.5 && order < 2.5;
        report("9 continuity", pass,
               "L2 residual " + num(coarse) + " (bound 1e-5), decay order " + num(order));
    }

    // 10. Determinism: a second full corpus run is byte identical.
    {
        bool identical = true;
        std::string first_diff;
        for (const auto& name : kCorpus) run_scenario(scenarios[name], root_b.string());
        for (const auto& name : kCorpus) {
            const fs::path dir_a = root_a / name;
            const fs::path dir_b = root_b / name;
            for (const auto& entry : fs::directory_iterator(dir_a)) {
                const std::string fname = entry.path().filename().string();
                if (fname == "manifest.json") continue;  // carries wall-clock time
                if (read_file(entry.path()) != read_file(dir_b / fname)) {
                    identical = false;
                    if (first_diff.empty()) first_diff = name + "/" + fname;
                }
            }
        }
        report("10 determinism", identical,
               identical ? "all CSV and report artifacts byte-identical across reruns"
                         : "first differing artifact: " + first_diff);
    }

    std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
