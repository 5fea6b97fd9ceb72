#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qlocal/propagator.hpp"

using namespace qlocal;

namespace {

GridPtr grid_1d(int n, double L, int particles = 1) {
    GridSpec s;
    s.particle_count = particles;
    s.points_per_axis = n;
    s.box_length = L;
    return make_grid(s);
}

AssemblyPtr free_assembly(GridPtr grid) {
    return make_assembly(std::move(grid), ExternalPotential{}, PairPotential{1.0});
}

AssemblyPtr harmonic_assembly(GridPtr grid, double omega0, double soft_core = 1.0) {
    ProfileSpec p;
    p.kind = ProfileKind::Harmonic;
    p.omega0 = omega0;
    return make_assembly(std::move(grid), ExternalPotential(p, EnvelopeSpec{}),
                         PairPotential{soft_core});
}

WavefunctionField plane_wave(GridPtr grid, double p) {
    WavefunctionField psi = make_field(grid);
    for (int i = 0; i < grid->points_per_axis(); ++i) {
        const double x = grid->coordinate(i);
        psi.amplitudes[std::size_t(i)] = {std::cos(p * x), std::sin(p * x)};
    }
    return normalize(std::move(psi));
}

WavefunctionField gaussian_1d(GridPtr grid, double center, double width, double momentum) {
    WavefunctionField psi = make_field(grid);
    for (int i = 0; i < grid->points_per_axis(); ++i) {
        const double x = grid->coordinate(i);
        const double amp = std::exp(-(x - center) * (x - center) / (4.0 * width * width));
        psi.amplitudes[std::size_t(i)] = {amp * std::cos(momentum * x),
                                          amp * std::sin(momentum * x)};
    }
    return normalize(std::move(psi));
}

double rms_difference(const ComplexField& a, const ComplexField& b) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (long double)std::norm(a[i] - b[i]);
    return std::sqrt(double(acc / (long double)a.size()));
}

}  // namespace

TEST_CASE("free plane wave picks up the kinetic phase only") {
    GridPtr grid = grid_1d(64, 4.0 * std::numbers::pi);
    const double p = 2.0;  // grid mode
    WavefunctionField psi = plane_wave(grid, p);
    const ComplexField before = psi.amplitudes;
    const double dt = 0.01;
    StrangPlan plan(free_assembly(grid), dt);
    plan.step(psi);
    const std::complex<double> expected_phase =
        std::exp(std::complex<double>(0.0, -0.5 * p * p * dt));
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(std::abs(std::abs(psi.amplitudes[i]) - std::abs(before[i])) < 1e-12);
        CHECK(std::abs(psi.amplitudes[i] - expected_phase * before[i]) < 1e-10);
    }
    CHECK(psi.time == doctest::Approx(dt));
}

TEST_CASE("constant potential contributes a global phase -c dt") {
    GridPtr grid = grid_1d(64, 8.0);
    const double c = 0.7;
    ProfileSpec prof;
    prof.kind = ProfileKind::Barrier;  // plateau spanning the whole box
    prof.height = c;
    prof.width = 64.0;
    prof.softness = 0.1;
    AssemblyPtr assembly =
        make_assembly(grid, ExternalPotential(prof, EnvelopeSpec{}), PairPotential{1.0});
    WavefunctionField psi = gaussian_1d(grid, 0.0, 1.0, 1.0);
    const ComplexField before = psi.amplitudes;
    const double dt = 0.005;
    StrangPlan plan(assembly, dt);
    plan.step(psi);
    // Remove the free-particle step and compare against exp(-i c dt).
    WavefunctionField ref;
    ref.grid = grid;
    ref.time = 0.0;
    ref.amplitudes = before;
    StrangPlan free_plan(free_assembly(grid), dt);
    free_plan.step(ref);
    const std::complex<double> expected = std::exp(std::complex<double>(0.0, -c * dt));
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(std::abs(psi.amplitudes[i] - expected * ref.amplitudes[i]) < 1e-10);
}

TEST_CASE("imaginary-time relaxation finds textbook ground states") {
    SUBCASE("harmonic well, omega0 = 1") {
        GridPtr grid = grid_1d(128, 16.0);
        AssemblyPtr assembly = harmonic_assembly(grid, 1.0);
        RelaxOptions opt;
        opt.dtau = 1e-3;
        opt.tol = 1e-12;
        const RelaxResult r = imaginary_time_relax(assembly, gaussian_1d(grid, 1.5, 1.3, 0.0), opt);
        CHECK(std::abs(r.energy - 0.5) < 1e-4);
    }

    SUBCASE("two noninteracting fermions in a harmonic well") {
        GridPtr grid = grid_1d(64, 16.0, 2);
        // A huge soft core switches the pair term off to 1e-8.
        AssemblyPtr assembly = harmonic_assembly(grid, 1.0, 1e8);
        WavefunctionField guess = make_field(grid);
        const int n = 64;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x1 = grid->coordinate(i);
                const double x2 = grid->coordinate(j);
                guess.amplitudes[std::size_t(i * n + j)] = {
                    std::exp(-0.5 * (x1 + 1.0) * (x1 + 1.0) - 0.5 * (x2 - 1.0) * (x2 - 1.0)),
                    0.0};
            }
        RelaxOptions opt;
        opt.dtau = 2e-3;
        opt.tol = 1e-11;
        opt.symmetry = SymmetryKind::Antisymmetric;
        const RelaxResult r = imaginary_time_relax(assembly, normalize(std::move(guess)), opt);

        // Oracle: two single-particle relaxations, even and odd sectors.
        GridPtr grid1 = grid_1d(64, 16.0);
        AssemblyPtr assembly1 = harmonic_assembly(grid1, 1.0);
        RelaxOptions opt1;
        opt1.dtau = 2e-3;
        opt1.tol = 1e-12;
        const double e0 =
            imaginary_time_relax(assembly1, gaussian_1d(grid1, 0.0, 1.0, 0.0), opt1).energy;
        WavefunctionField odd = make_field(grid1);
        for (int i = 0; i < 64; ++i) {
            const double x = grid1->coordinate(i);
            odd.amplitudes[std::size_t(i)] = {x * std::exp(-0.5 * x * x), 0.0};
        }
        const double e1 = imaginary_time_relax(assembly1, normalize(std::move(odd)), opt1).energy;
        CHECK(std::abs(r.energy - (e0 + e1)) < 1e-3);
        CHECK(std::abs(r.energy - 2.0) < 1e-3);
    }
}

TEST_CASE("relaxed state is stationary under real-time stepping") {
    GridPtr grid = grid_1d(128, 16.0);
    AssemblyPtr assembly = harmonic_assembly(grid, 1.0);
    RelaxOptions opt;
    opt.dtau = 5e-4;
    opt.tol = 1e-13;
    WavefunctionField psi = imaginary_time_relax(assembly, gaussian_1d(grid, 0.8, 1.0, 0.0), opt).state;
    const RealField rho0 = density_of(psi);
    StrangPlan plan(assembly, 5e-3);
    for (int s = 0; s < 100; ++s) plan.step(psi);
    const RealField rho1 = density_of(psi);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < rho0.size(); ++i)
        acc += (long double)((rho1[i] - rho0[i]) * (rho1[i] - rho0[i]));
    CHECK(std::sqrt(double(acc / (long double)rho0.size())) < 1e-6);
}

TEST_CASE("run invokes observers and conserves norm and energy") {
    GridPtr grid = grid_1d(128, 20.0);
    AssemblyPtr assembly = harmonic_assembly(grid, 0.5);
    WavefunctionField psi = gaussian_1d(grid, 2.0, 1.0, 0.0);

    SUBCASE("zero steps still reports the initial state") {
        int calls = 0;
        StepObserver count = [&](const WavefunctionField&, int) { ++calls; };
        StrangPlan plan(assembly, 1e-2);
        const RunSummary sum = run(plan, psi, psi.time, {&count, 1});
        CHECK(calls == 1);
        CHECK(sum.steps == 0);
    }

    SUBCASE("norm stays at 1 and the isolated energy is flat") {
        const double e0 = total_energy(psi, *assembly, 0.0);
        double norm_worst = 0.0;
        double energy_worst = 0.0;
        StepObserver watch = [&](const WavefunctionField& state, int) {
            norm_worst = std::max(norm_worst, std::abs(norm_squared(state) - 1.0));
            energy_worst =
                std::max(energy_worst, std::abs(total_energy(state, *assembly, 0.0) - e0));
        };
        StrangPlan plan(assembly, 1e-3);
        run(plan, psi, 2.0, {&watch, 1});
        CHECK(norm_worst < 1e-10);
        CHECK(energy_worst / std::abs(e0) < 1e-6);
    }

    SUBCASE("fractional step counts are rejected") {
        StrangPlan plan(assembly, 1e-2);
        CHECK_THROWS_AS(run(plan, psi, 0.105, {}), std::invalid_argument);
    }
}

TEST_CASE("unitarity over ten thousand steps") {
    GridPtr grid = grid_1d(64, 16.0);
    AssemblyPtr assembly = harmonic_assembly(grid, 1.0);
    WavefunctionField psi = gaussian_1d(grid, 1.0, 1.0, 0.5);
    StrangPlan plan(assembly, 1e-3);
    double prev = norm_squared(psi);
    double per_step_worst = 0.0;
    for (int s = 0; s < 10000; ++s) {
        plan.step(psi);
        const double now = norm_squared(psi);
        per_step_worst = std::max(per_step_worst, std::abs(now - prev));
        prev = now;
    }
    CHECK(per_step_worst < 1e-12);
    CHECK(std::abs(norm_squared(psi) - 1.0) < 1e-9);
}

TEST_CASE("time reversal recovers the initial state") {
    GridPtr grid = grid_1d(128, 20.0);
    AssemblyPtr assembly = harmonic_assembly(grid, 0.7);
    WavefunctionField psi = gaussian_1d(grid, 2.0, 1.2, 0.8);
    const ComplexField start = psi.amplitudes;
    StrangPlan forward(assembly, 1e-2);
    StrangPlan backward(assembly, -1e-2);
    for (int s = 0; s < 100; ++s) forward.step(psi);
    for (int s = 0; s < 100; ++s) backward.step(psi);
    CHECK(rms_difference(psi.amplitudes, start) < 1e-8);
    CHECK(std::abs(psi.time) < 1e-12);
}

TEST_CASE("strang stepping is second order in dt") {
    GridPtr grid = grid_1d(128, 20.0);
    AssemblyPtr assembly = harmonic_assembly(grid, 1.0);
    const WavefunctionField start = gaussian_1d(grid, 2.0, 1.0, 0.0);
    const double t_end = 1.0;
    auto propagate = [&](double dt) {
        WavefunctionField psi = start;
        StrangPlan plan(assembly, dt);
        const int steps = int(std::lround(t_end / dt));
        for (int s = 0; s < steps; ++s) plan.step(psi);
        return psi.amplitudes;
    };
    const ComplexField ref = propagate(0.0025);
    const double err_coarse = rms_difference(propagate(0.02), ref);
    const double err_fine = rms_difference(propagate(0.01), ref);
    const double ratio = err_coarse / err_fine;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("exchange symmetry projection") {
    GridPtr grid = grid_1d(48, 16.0, 2);
    const int n = 48;
    WavefunctionField product = make_field(grid);
    WavefunctionField same = make_field(grid);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x1 = grid->coordinate(i);
            const double x2 = grid->coordinate(j);
            const double a = std::exp(-0.5 * (x1 + 1.5) * (x1 + 1.5));
            const double b = std::exp(-0.5 * (x2 - 1.5) * (x2 - 1.5));
            product.amplitudes[std::size_t(i * n + j)] = {a * b, 0.0};
            same.amplitudes[std::size_t(i * n + j)] = {
                std::exp(-0.5 * x1 * x1 - 0.5 * x2 * x2), 0.0};
        }
    product = normalize(std::move(product));
    same = normalize(std::move(same));

    SUBCASE("antisymmetrizing a symmetric product annihilates it") {
        CHECK_THROWS_AS(apply_symmetry(same, SymmetryKind::Antisymmetric), std::invalid_argument);
    }

    SUBCASE("symmetric projection is exchange even and idempotent") {
        const WavefunctionField sym = apply_symmetry(product, SymmetryKind::Symmetric);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(std::abs(sym.amplitudes[std::size_t(i * n + j)] -
                               sym.amplitudes[std::size_t(j * n + i)]) < 1e-12);
        const WavefunctionField again = apply_symmetry(sym, SymmetryKind::Symmetric);
        CHECK(rms_difference(sym.amplitudes, again.amplitudes) < 1e-12);
    }

    SUBCASE("antisymmetric states pass through unchanged") {
        const WavefunctionField anti = apply_symmetry(product, SymmetryKind::Antisymmetric);
        const WavefunctionField again = apply_symmetry(anti, SymmetryKind::Antisymmetric);
        CHECK(rms_difference(anti.amplitudes, again.amplitudes) < 1e-12);
    }

    SUBCASE("propagation conserves exchange symmetry") {
        WavefunctionField sym = apply_symmetry(product, SymmetryKind::Symmetric);
        AssemblyPtr assembly = harmonic_assembly(grid, 0.5);
        StrangPlan plan(assembly, 1e-3);
        for (int s = 0; s < 500; ++s) plan.step(sym);
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, std::abs(sym.amplitudes[std::size_t(i * n + j)] -
                                                 sym.amplitudes[std::size_t(j * n + i)]));
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("strang plan refuses non-periodic grids") {
    GridSpec s;
    s.particle_count = 1;
    s.points_per_axis = 64;
    s.box_length = 10.0;
    s.periodic = false;
    AssemblyPtr assembly = make_assembly(make_grid(s), ExternalPotential{}, PairPotential{1.0});
    CHECK_THROWS_AS(StrangPlan(assembly, 1e-3), std::invalid_argument);
}
