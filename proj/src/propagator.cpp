#include "qlocal/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qlocal {

namespace {

double mode_kinetic(const ConfigurationGrid& grid, std::size_t flat) {
    double k2 = 0.0;
    const auto& ks = grid.wavenumbers();
    for (int a = 0; a < grid.axes(); ++a) {
        const double k = ks[std::size_t(grid.axis_index(flat, a))];
        k2 += k * k;
    }
    return 0.5 * k2;
}

std::vector<std::vector<int>> particle_permutations(int n_particles) {
    std::vector<int> perm(static_cast<std::size_t>(n_particles));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> all;
    do {
        all.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return all;
}

int permutation_parity(const std::vector<int>& perm) {
    int parity = 0;
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (seen[i]) continue;
        std::size_t j = i;
        int cycle = 0;
        while (!seen[j]) {
            seen[j] = true;
            j = std::size_t(perm[j]);
            ++cycle;
        }
        parity ^= (cycle - 1) & 1;
    }
    return parity ? -1 : 1;
}

}  // namespace

WavefunctionField apply_symmetry(const WavefunctionField& psi, SymmetryKind policy) {
    if (policy == SymmetryKind::None) return psi;
    const ConfigurationGrid& grid = *psi.grid;
    const int N = grid.spec().particle_count;
    const int d = grid.spec().dims_per_particle;
    if (N < 2) throw std::invalid_argument("apply_symmetry: needs at least two particles");

    const auto perms = particle_permutations(N);
    const std::size_t total = grid.size();
    const int axes = grid.axes();
    ComplexField acc(total, {0.0, 0.0});
    std::vector<int> idx(static_cast<std::size_t>(axes));
    std::vector<int> pidx(static_cast<std::size_t>(axes));
    for (const auto& perm : perms) {
        const double sign =
            (policy == SymmetryKind::Antisymmetric) ? double(permutation_parity(perm)) : 1.0;
        for (std::size_t flat = 0; flat < total; ++flat) {
            grid.unravel(flat, idx);
            // Axis block of particle p maps to the block of perm[p].
            for (int p = 0; p < N; ++p)
                for (int c = 0; c < d; ++c)
                    pidx[std::size_t(perm[std::size_t(p)] * d + c)] = idx[std::size_t(p * d + c)];
            acc[flat] += sign * psi.amplitudes[grid.ravel(pidx)];
        }
    }

    WavefunctionField out;
    out.grid = psi.grid;
    out.time = psi.time;
    out.amplitudes = std::move(acc);
    const double n2 = norm_squared(out);
    if (n2 < 1e-24)
        throw std::invalid_argument("apply_symmetry: projection annihilates the state");
    return normalize(std::move(out));
}

StrangPlan::StrangPlan(AssemblyPtr assembly, double dt) : assembly_(std::move(assembly)), dt_(dt) {
    const ConfigurationGrid& grid = assembly_->grid();
    if (!grid.periodic())
        throw std::invalid_argument("strang plan: spectral kinetic step needs a periodic grid");
    if (dt_ == 0.0) throw std::invalid_argument("strang plan: dt must be nonzero");
    const std::size_t total = grid.size();
    kinetic_half_.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        const double phase = -mode_kinetic(grid, i) * dt_ * 0.5;
        kinetic_half_[i] = {std::cos(phase), std::sin(phase)};
    }
    scratch_a_.resize(total);
    scratch_b_.resize(total);
    static_potential_ = assembly_->external().time_independent();
    if (static_potential_) {
        phase_cache_.resize(total);
        potential_phase(0.0, phase_cache_);
    }
}

void StrangPlan::potential_phase(double t_mid, ComplexField& phase) const {
    const RealField u = assembly_->potential_grid(t_mid);
    phase.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double p = -u[i] * dt_;
        phase[i] = {std::cos(p), std::sin(p)};
    }
}

void StrangPlan::step(WavefunctionField& psi) const {
    const ConfigurationGrid& grid = assembly_->grid();
    if (psi.grid.get() != &grid) throw std::invalid_argument("strang step: field grid mismatch");
    const std::size_t total = grid.size();
    ComplexField& hat = scratch_a_;
    ComplexField& work = scratch_b_;

    grid.forward(psi.amplitudes.data(), hat.data());
    for (std::size_t i = 0; i < total; ++i) hat[i] *= kinetic_half_[i];
    grid.inverse(hat.data(), work.data());

    if (static_potential_) {
        for (std::size_t i = 0; i < total; ++i) work[i] *= phase_cache_[i];
    } else {
        ComplexField phase;
        potential_phase(psi.time + 0.5 * dt_, phase);
        for (std::size_t i = 0; i < total; ++i) work[i] *= phase[i];
    }

    grid.forward(work.data(), hat.data());
    for (std::size_t i = 0; i < total; ++i) hat[i] *= kinetic_half_[i];
    grid.inverse(hat.data(), psi.amplitudes.data());

    psi.time += dt_;
}

RunSummary run(const StrangPlan& plan, WavefunctionField& psi, double t_end,
               std::span<const StepObserver> observers) {
    const double span = t_end - psi.time;
    const double dt = plan.dt();
    const double steps_real = span / dt;
    const long steps = std::lround(steps_real);
    if (steps < 0 || std::abs(steps_real - double(steps)) > 1e-9 * std::max(1.0, std::abs(steps_real)))
        throw std::invalid_argument("run: (t_end - t_start)/dt must be a whole number of steps");

    for (const auto& obs : observers) obs(psi, 0);
    for (long s = 1; s <= steps; ++s) {
        plan.step(psi);
        for (const auto& obs : observers) obs(psi, int(s));
    }
    return RunSummary{int(steps), psi.time};
}

double kinetic_expectation(const WavefunctionField& psi) {
    const ConfigurationGrid& grid = *psi.grid;
    const std::size_t total = grid.size();
    ComplexField hat(total);
    grid.forward(psi.amplitudes.data(), hat.data());
    long double acc = 0.0L;
    long double norm = 0.0L;
    for (std::size_t i = 0; i < total; ++i) {
        const double w = std::norm(hat[i]);
        acc += (long double)(mode_kinetic(grid, i) * w);
        norm += (long double)w;
    }
    // Parseval: sum |psi_hat|^2 = size * sum |psi|^2; normalizing by the
    // actual spectral norm keeps the estimate exact for unit-norm fields.
    return double(acc / norm);
}

double internal_energy(const WavefunctionField& psi, const PotentialAssembly& assembly) {
    const RealField rho = density_of(psi);
    long double pot = 0.0L;
    const RealField& ucou = assembly.coulomb_grid();
    for (std::size_t i = 0; i < rho.size(); ++i) pot += (long double)(rho[i] * ucou[i]);
    return kinetic_expectation(psi) +
           double(pot * (long double)psi.grid->cell_volume());
}

double total_energy(const WavefunctionField& psi, const PotentialAssembly& assembly, double t) {
    const RealField rho = density_of(psi);
    const RealField u = assembly.potential_grid(t);
    long double pot = 0.0L;
    for (std::size_t i = 0; i < rho.size(); ++i) pot += (long double)(rho[i] * u[i]);
    return kinetic_expectation(psi) +
           double(pot * (long double)psi.grid->cell_volume());
}

RelaxResult imaginary_time_relax(const AssemblyPtr& assembly, WavefunctionField psi_guess,
                                 const RelaxOptions& options) {
    const ConfigurationGrid& grid = assembly->grid();
    if (!grid.periodic())
        throw std::invalid_argument("imaginary_time_relax: needs a periodic grid");
    if (!assembly->external().time_independent())
        throw std::invalid_argument("imaginary_time_relax: potential must be time independent");
    if (!(options.dtau > 0.0)) throw std::invalid_argument("imaginary_time_relax: dtau must be > 0");

    const std::size_t total = grid.size();
    RealField kin_half(total), pot(total);
    for (std::size_t i = 0; i < total; ++i)
        kin_half[i] = std::exp(-mode_kinetic(grid, i) * options.dtau * 0.5);
    pot = assembly->potential_grid(0.0);
    RealField pot_factor(total);
    for (std::size_t i = 0; i < total; ++i) pot_factor[i] = std::exp(-pot[i] * options.dtau);

    WavefunctionField psi = normalize(std::move(psi_guess));
    if (options.symmetry != SymmetryKind::None) psi = apply_symmetry(psi, options.symmetry);

    ComplexField hat(total), work(total);
    double e_prev = total_energy(psi, *assembly, 0.0);
    for (int it = 1; it <= options.max_iters; ++it) {
        grid.forward(psi.amplitudes.data(), hat.data());
        for (std::size_t i = 0; i < total; ++i) hat[i] *= kin_half[i];
        grid.inverse(hat.data(), work.data());
        for (std::size_t i = 0; i < total; ++i) work[i] *= pot_factor[i];
        grid.forward(work.data(), hat.data());
        for (std::size_t i = 0; i < total; ++i) hat[i] *= kin_half[i];
        grid.inverse(hat.data(), psi.amplitudes.data());
        psi = normalize(std::move(psi));
        if (options.symmetry != SymmetryKind::None && (it & 15) == 0)
            psi = apply_symmetry(psi, options.symmetry);

        if ((it & 7) == 0 || it == options.max_iters) {
            const double e = total_energy(psi, *assembly, 0.0);
            if (std::abs(e - e_prev) < options.tol) {
                if (options.symmetry != SymmetryKind::None)
                    psi = apply_symmetry(psi, options.symmetry);
                psi.time = 0.0;
                return RelaxResult{std::move(psi), e, it};
            }
            e_prev = e;
        }
    }
    throw std::runtime_error("imaginary_time_relax: no convergence after " +
                             std::to_string(options.max_iters) + " iterations");
}

}  // namespace qlocal
