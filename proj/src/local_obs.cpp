#include "qlocal/local_obs.hpp"

#include <cmath>
#include <stdexcept>

namespace qlocal {

namespace {

void check_particle(const ConfigurationGrid& grid, int k) {
    if (grid.spec().dims_per_particle != 1)
        throw std::invalid_argument("local observables are implemented for d = 1 per particle");
    if (k < 0 || k >= grid.spec().particle_count)
        throw std::out_of_range("particle index out of range");
}

// J_k = Im(psi* d_k psi) straight from the wavefunction.
RealField current_of(const WavefunctionField& psi, int k) {
    const ComplexField dpsi = gradient_axis(*psi.grid, psi.amplitudes, k);
    RealField J(dpsi.size());
    for (std::size_t i = 0; i < J.size(); ++i)
        J[i] = std::imag(std::conj(psi.amplitudes[i]) * dpsi[i]);
    return J;
}

}  // namespace

OmegaSpec full_domain(const ConfigurationGrid& grid) {
    return OmegaSpec{Region{0, grid.points_per_axis() - 1}};
}

bool is_full_domain(const ConfigurationGrid& grid, const OmegaSpec& omega) {
    return omega.region.lower_index == 0 &&
           omega.region.upper_index == grid.points_per_axis() - 1;
}

double presence_probability(const WavefunctionField& psi, int k, const OmegaSpec& omega) {
    check_particle(*psi.grid, k);
    const AxisRegion constraint{k, omega.region};
    return integrate_region(*psi.grid, density_of(psi), {&constraint, 1});
}

double pair_presence(const WavefunctionField& psi, int k, int j, const OmegaSpec& omega) {
    check_particle(*psi.grid, k);
    check_particle(*psi.grid, j);
    if (k == j) throw std::invalid_argument("pair_presence: k and j must differ");
    const AxisRegion constraints[2] = {{k, omega.region}, {j, omega.region}};
    return integrate_region(*psi.grid, density_of(psi), constraints);
}

double local_current(const WavefunctionField& psi, int k, const OmegaSpec& omega) {
    check_particle(*psi.grid, k);
    const AxisRegion constraint{k, omega.region};
    return integrate_region(*psi.grid, current_of(psi, k), {&constraint, 1});
}

KineticParts local_kinetic(const WavefunctionField& psi, const HydroFields& fields,
                           const OmegaSpec& omega) {
    const ConfigurationGrid& grid = *psi.grid;
    const std::size_t total = grid.size();
    KineticParts parts;
    ComplexField psi_hat(total);
    grid.forward(psi.amplitudes.data(), psi_hat.data());
    const auto& ks = grid.wavenumbers();
    ComplexField modes(total), lap(total);
    RealField integrand(total);
    for (int k = 0; k < grid.axes(); ++k) {
        const AxisRegion constraint{k, omega.region};
        // The flow and quantum densities come from the psi-routed fields,
        // which stay smooth in time (no mask-set jumps, no |psi| kinks).
        parts.flow += integrate_region(grid, fields.flow_density[std::size_t(k)],
                                       {&constraint, 1});
        parts.quantum += integrate_region(grid, fields.qpot_density[std::size_t(k)],
                                          {&constraint, 1});

        // Imaginary part of int_Omega psi* (-d_k^2/2) psi, reported but not
        // bounded; it is a pure surface-transit artifact of the open limits.
        for (std::size_t i = 0; i < total; ++i) {
            const double kk = ks[std::size_t(grid.axis_index(i, k))];
            modes[i] = psi_hat[i] * (-kk * kk);
        }
        grid.inverse(modes.data(), lap.data());
        for (std::size_t i = 0; i < total; ++i)
            integrand[i] = std::imag(std::conj(psi.amplitudes[i]) * (-0.5) * lap[i]);
        parts.imag_diag += integrate_region(grid, integrand, {&constraint, 1});
    }
    return parts;
}

double local_coulomb(const WavefunctionField& psi, const OmegaSpec& omega,
                     const PairPotential& pair) {
    const ConfigurationGrid& grid = *psi.grid;
    const int N = grid.spec().particle_count;
    if (N < 2) return 0.0;
    check_particle(grid, 0);
    const RealField rho = density_of(psi);
    const std::size_t total = grid.size();
    RealField integrand(total);
    double sum = 0.0;
    for (int k = 0; k < N; ++k)
        for (int j = k + 1; j < N; ++j) {
            for (std::size_t i = 0; i < total; ++i) {
                const double s = grid.coordinate(grid.axis_index(i, k)) -
                                 grid.coordinate(grid.axis_index(i, j));
                integrand[i] = rho[i] * pair.value(s);
            }
            const AxisRegion constraints[2] = {{k, omega.region}, {j, omega.region}};
            sum += integrate_region(grid, integrand, constraints);
        }
    return sum;
}

EnergyBreakdown local_energy(const WavefunctionField& psi, const HydroFields& fields,
                             const OmegaSpec& omega, const PairPotential& pair) {
    EnergyBreakdown e;
    const KineticParts kin = local_kinetic(psi, fields, omega);
    e.kinetic_flow = kin.flow;
    e.kinetic_quantum = kin.quantum;
    e.kinetic_imag_diag = kin.imag_diag;
    e.coulomb_internal = local_coulomb(psi, omega, pair);
    e.total = e.kinetic_flow + e.kinetic_quantum + e.coulomb_internal;
    return e;
}

namespace {

struct PowerTermsOptions {
    bool quantum_terms = true;
    const HydroFields* fields_prev = nullptr;
    const HydroFields* fields_next = nullptr;
};

PowerBreakdown power_terms(const WavefunctionField& psi, const HydroFields& fields,
                           const OmegaSpec& omega, const PotentialAssembly& assembly, double t,
                           const PowerTermsOptions& opt) {
    const ConfigurationGrid& grid = *psi.grid;
    check_particle(grid, 0);
    validate_region(grid, omega.region);
    const int N = grid.spec().particle_count;
    const std::size_t total = grid.size();
    const int n = grid.points_per_axis();

    PowerBreakdown p;
    RealField integrand(total);

    // Per-axis external force and the inside-Omega window by grid index.
    std::vector<double> fext(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) fext[std::size_t(i)] = assembly.external_force(grid.coordinate(i), t);
    std::vector<uint8_t> inside(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        inside[std::size_t(i)] =
            uint8_t(i >= omega.region.lower_index && i <= omega.region.upper_index);

    std::vector<int> idx(static_cast<std::size_t>(grid.axes()));
    for (int k = 0; k < N; ++k) {
        const AxisRegion constraint{k, omega.region};
        const RealField& J = fields.current[std::size_t(k)];

        // J_k . F^ext
        for (std::size_t i = 0; i < total; ++i)
            integrand[i] = J[i] * fext[std::size_t(grid.axis_index(i, k))];
        p.drive += integrate_region(grid, integrand, {&constraint, 1});

        // J_k . F_k^{cou,ext}: only partners outside Omega push.
        if (N >= 2) {
            for (std::size_t i = 0; i < total; ++i) {
                grid.unravel(i, idx);
                double f = 0.0;
                for (int j = 0; j < N; ++j) {
                    if (j == k || inside[std::size_t(idx[std::size_t(j)])]) continue;
                    f += assembly.pair().force(grid.coordinate(idx[std::size_t(k)]) -
                                               grid.coordinate(idx[std::size_t(j)]));
                }
                integrand[i] = J[i] * f;
            }
            p.env_coulomb += integrate_region(grid, integrand, {&constraint, 1});
        }

        if (opt.quantum_terms) {
            // J_k . F_k^{qua} = -sum_xi v_k (R^2 dQ_xi/dx_k): the velocity
            // carries the mask, the gradient factor is division free.
            for (std::size_t i = 0; i < total; ++i) {
                double sum_g = 0.0;
                for (int xi = 0; xi < N; ++xi)
                    sum_g += fields.qpot_grad_density[std::size_t(xi)][std::size_t(k)][i];
                integrand[i] = -fields.velocity[std::size_t(k)][i] * sum_g;
            }
            p.quantum_work += integrate_region(grid, integrand, {&constraint, 1});

            // R^2 dQ_k/dt = d_t(R^2 Q_k) - Q_k d_t R^2 with both rates as
            // centered differences of smooth fields.
            const double window = opt.fields_next->time - opt.fields_prev->time;
            const RealField& w_prev = opt.fields_prev->qpot_density[std::size_t(k)];
            const RealField& w_next = opt.fields_next->qpot_density[std::size_t(k)];
            const RealField& rho_prev = opt.fields_prev->density;
            const RealField& rho_next = opt.fields_next->density;
            for (std::size_t i = 0; i < total; ++i) {
                const double w_dot = (w_next[i] - w_prev[i]) / window;
                const double rho_dot = (rho_next[i] - rho_prev[i]) / window;
                integrand[i] = w_dot - fields.qpot[std::size_t(k)][i] * rho_dot;
            }
            p.qpot_time += integrate_region(grid, integrand, {&constraint, 1});

            // sum_j J_j dQ_k/dx_j = sum_j v_j (R^2 dQ_k/dx_j)
            for (std::size_t i = 0; i < total; ++i) {
                double adv = 0.0;
                for (int j = 0; j < N; ++j)
                    adv += fields.velocity[std::size_t(j)][i] *
                           fields.qpot_grad_density[std::size_t(k)][std::size_t(j)][i];
                integrand[i] = adv;
            }
            p.qpot_advect += integrate_region(grid, integrand, {&constraint, 1});
        }

        // Energy flux through the open surfaces: the masked kernel fields
        // are zero on masked points, so a boundary parked in the far tail
        // contributes nothing.
        for (std::size_t i = 0; i < total; ++i) {
            if (fields.node_mask[i]) {
                integrand[i] = 0.0;
                continue;
            }
            double kernel = 0.5 * fields.velocity[std::size_t(k)][i] *
                            fields.velocity[std::size_t(k)][i];
            if (opt.quantum_terms) kernel += fields.qpot[std::size_t(k)][i];
            if (N >= 2) {
                grid.unravel(i, idx);
                for (int j = 0; j < N; ++j) {
                    if (j == k || !inside[std::size_t(idx[std::size_t(j)])]) continue;
                    kernel += assembly.pair().value(grid.coordinate(idx[std::size_t(k)]) -
                                                    grid.coordinate(idx[std::size_t(j)]));
                }
            }
            integrand[i] = J[i] * kernel;
        }
        const double at_s4 = surface_slice(grid, integrand, k, omega.region.upper_index);
        const double at_s1 = surface_slice(grid, integrand, k, omega.region.lower_index);
        p.surface_flux -= at_s4 - at_s1;
    }

    p.total = p.drive + p.env_coulomb + p.quantum_work + p.surface_flux + p.qpot_time +
              p.qpot_advect;
    return p;
}

}  // namespace

PowerBreakdown local_power(const WavefunctionField& psi, const HydroFields& fields_prev,
                           const HydroFields& fields, const HydroFields& fields_next,
                           const OmegaSpec& omega, const PotentialAssembly& assembly, double t) {
    if (fields_prev.grid.get() != fields.grid.get() ||
        fields_next.grid.get() != fields.grid.get())
        throw std::invalid_argument("local_power: snapshots live on different grids");
    if (!(fields_next.time > fields_prev.time))
        throw std::invalid_argument("local_power: missing time-derivative snapshots");
    PowerTermsOptions opt;
    opt.quantum_terms = true;
    opt.fields_prev = &fields_prev;
    opt.fields_next = &fields_next;
    return power_terms(psi, fields, omega, assembly, t, opt);
}

PowerBreakdown classical_limit_power(const WavefunctionField& psi, const HydroFields& fields,
                                     const OmegaSpec& omega, const PotentialAssembly& assembly,
                                     double t) {
    PowerTermsOptions opt;
    opt.quantum_terms = false;
    return power_terms(psi, fields, omega, assembly, t, opt);
}

double total_power_external(const WavefunctionField& psi, const PotentialAssembly& assembly,
                            double t) {
    const ConfigurationGrid& grid = *psi.grid;
    check_particle(grid, 0);
    const int n = grid.points_per_axis();
    std::vector<double> fext(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) fext[std::size_t(i)] = assembly.external_force(grid.coordinate(i), t);
    double sum = 0.0;
    for (int k = 0; k < grid.spec().particle_count; ++k) {
        const RealField J = current_of(psi, k);
        RealField integrand(J.size());
        for (std::size_t i = 0; i < J.size(); ++i)
            integrand[i] = J[i] * fext[std::size_t(grid.axis_index(i, k))];
        sum += integrate_full(grid, integrand);
    }
    return sum;
}

}  // namespace qlocal
