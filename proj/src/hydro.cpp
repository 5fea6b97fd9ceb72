#include "qlocal/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qlocal {

namespace {

// Inverse transform of hat multiplied per mode by (i k_grad) and/or
// (-k_lap^2); pass axis -1 to skip a factor. Returns the real part.
RealField inverse_with_multipliers(const ConfigurationGrid& grid, const ComplexField& hat,
                                   int grad_axis, int lap_axis) {
    const std::size_t total = grid.size();
    const int n = grid.points_per_axis();
    const auto& ks = grid.wavenumbers();
    ComplexField modes(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::complex<double> v = hat[i];
        if (grad_axis >= 0) {
            const int j = grid.axis_index(i, grad_axis);
            const double k = (n % 2 == 0 && j == n / 2) ? 0.0 : ks[std::size_t(j)];
            v *= std::complex<double>(0.0, k);
        }
        if (lap_axis >= 0) {
            const double k = ks[std::size_t(grid.axis_index(i, lap_axis))];
            v *= -k * k;
        }
        modes[i] = v;
    }
    ComplexField out(total);
    grid.inverse(modes.data(), out.data());
    RealField re(total);
    for (std::size_t i = 0; i < total; ++i) re[i] = out[i].real();
    return re;
}

}  // namespace

HydroFields extract(const WavefunctionField& psi, const NodePolicy& policy) {
    if (!(policy.epsilon_rel > 0.0) || policy.epsilon_rel > 1e-2)
        throw std::invalid_argument("node policy: epsilon_rel must lie in (0, 1e-2]");
    const ConfigurationGrid& grid = *psi.grid;
    const std::size_t total = grid.size();
    const int axes = grid.axes();

    HydroFields f;
    f.grid = psi.grid;
    f.time = psi.time;
    f.density.resize(total);
    f.amplitude.resize(total);
    double rho_max = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        const double rho = std::norm(psi.amplitudes[i]);
        f.density[i] = rho;
        f.amplitude[i] = std::sqrt(rho);
        rho_max = std::max(rho_max, rho);
    }
    const double cut = policy.epsilon_rel * rho_max;
    f.node_mask.resize(total);
    std::size_t masked = 0;
    for (std::size_t i = 0; i < total; ++i) {
        f.node_mask[i] = uint8_t(f.density[i] < cut);
        masked += f.node_mask[i];
    }
    f.fully_masked = (masked == total) || rho_max == 0.0;

    // Currents and kinetic densities from one forward transform of psi.
    ComplexField psi_hat(total);
    grid.forward(psi.amplitudes.data(), psi_hat.data());
    f.current.resize(static_cast<std::size_t>(axes));
    f.kinetic_density.assign(static_cast<std::size_t>(axes), RealField(total, 0.0));
    f.flow_density.assign(static_cast<std::size_t>(axes), RealField(total, 0.0));
    f.qpot_density.assign(static_cast<std::size_t>(axes), RealField(total, 0.0));
    {
        ComplexField modes(total), dpsi(total), lap_psi(total);
        const auto& ks = grid.wavenumbers();
        const int n = grid.points_per_axis();
        for (int a = 0; a < axes; ++a) {
            for (std::size_t i = 0; i < total; ++i) {
                const int j = grid.axis_index(i, a);
                const double k = (n % 2 == 0 && j == n / 2) ? 0.0 : ks[std::size_t(j)];
                modes[i] = psi_hat[i] * std::complex<double>(0.0, k);
            }
            grid.inverse(modes.data(), dpsi.data());
            for (std::size_t i = 0; i < total; ++i) {
                const double k = ks[std::size_t(grid.axis_index(i, a))];
                modes[i] = psi_hat[i] * (-k * k);
            }
            grid.inverse(modes.data(), lap_psi.data());
            RealField& J = f.current[std::size_t(a)];
            J.resize(total);
            for (std::size_t i = 0; i < total; ++i) {
                J[i] = std::imag(std::conj(psi.amplitudes[i]) * dpsi[i]);
                const double kin =
                    -0.5 * std::real(std::conj(psi.amplitudes[i]) * lap_psi[i]);
                const double rho = f.density[i];
                const double flow = rho > 1e-300 ? 0.5 * J[i] * J[i] / rho : 0.0;
                f.kinetic_density[std::size_t(a)][i] = kin;
                f.flow_density[std::size_t(a)][i] = flow;
                f.qpot_density[std::size_t(a)][i] = kin - flow;
            }
        }
    }

    // Amplitude derivatives from one forward transform of R.
    ComplexField r_complex(total);
    for (std::size_t i = 0; i < total; ++i) r_complex[i] = {f.amplitude[i], 0.0};
    ComplexField r_hat(total);
    grid.forward(r_complex.data(), r_hat.data());

    std::vector<RealField> grad_r(static_cast<std::size_t>(axes));
    std::vector<RealField> lap_r(static_cast<std::size_t>(axes));
    for (int a = 0; a < axes; ++a) {
        grad_r[std::size_t(a)] = inverse_with_multipliers(grid, r_hat, a, -1);
        lap_r[std::size_t(a)] = inverse_with_multipliers(grid, r_hat, -1, a);
    }

    f.velocity.assign(static_cast<std::size_t>(axes), RealField(total, 0.0));
    f.qpot.assign(static_cast<std::size_t>(axes), RealField(total, 0.0));
    f.qpot_total.assign(total, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
        if (f.node_mask[i]) continue;
        const double rho = f.density[i];
        const double r = f.amplitude[i];
        double q_sum = 0.0;
        for (int a = 0; a < axes; ++a) {
            f.velocity[std::size_t(a)][i] = f.current[std::size_t(a)][i] / rho;
            const double q = -lap_r[std::size_t(a)][i] / (2.0 * r);
            f.qpot[std::size_t(a)][i] = q;
            q_sum += q;
        }
        f.qpot_total[i] = q_sum;
    }

    // grad_j Q_k by the quotient rule on smooth spectral derivatives:
    // d_j Q_k = -[R d_j d_k^2 R - (d_k^2 R)(d_j R)] / (2 R^2).
    f.qpot_grad.assign(static_cast<std::size_t>(axes), std::vector<RealField>(static_cast<std::size_t>(axes)));
    f.qpot_grad_density.assign(static_cast<std::size_t>(axes),
                               std::vector<RealField>(static_cast<std::size_t>(axes)));
    for (int k = 0; k < axes; ++k) {
        for (int j = 0; j < axes; ++j) {
            RealField third = inverse_with_multipliers(grid, r_hat, j, k);
            RealField& g = f.qpot_grad[std::size_t(k)][std::size_t(j)];
            RealField& gd = f.qpot_grad_density[std::size_t(k)][std::size_t(j)];
            g.assign(total, 0.0);
            gd.assign(total, 0.0);
            for (std::size_t i = 0; i < total; ++i) {
                const double numer = -0.5 * (f.amplitude[i] * third[i] -
                                             lap_r[std::size_t(k)][i] * grad_r[std::size_t(j)][i]);
                gd[i] = numer;
                if (!f.node_mask[i]) g[i] = numer / f.density[i];
            }
        }
    }

    f.qforce.assign(static_cast<std::size_t>(axes), RealField(total, 0.0));
    for (int a = 0; a < axes; ++a)
        for (std::size_t i = 0; i < total; ++i) {
            if (f.node_mask[i]) continue;
            double s = 0.0;
            for (int k = 0; k < axes; ++k) s += f.qpot_grad[std::size_t(k)][std::size_t(a)][i];
            f.qforce[std::size_t(a)][i] = -s;
        }

    return f;
}

std::vector<RealField> qpot_time_derivative(const HydroFields& fields_prev,
                                            const HydroFields& fields_next, double dt_eval) {
    if (fields_prev.grid.get() != fields_next.grid.get())
        throw std::invalid_argument("qpot_time_derivative: snapshots live on different grids");
    if (!(dt_eval > 0.0))
        throw std::invalid_argument("qpot_time_derivative: dt_eval must be positive");
    const std::size_t total = fields_prev.grid->size();
    const std::size_t axes = fields_prev.qpot.size();
    std::vector<RealField> dq(axes, RealField(total, 0.0));
    for (std::size_t a = 0; a < axes; ++a)
        for (std::size_t i = 0; i < total; ++i) {
            if (fields_prev.node_mask[i] || fields_next.node_mask[i]) continue;
            dq[a][i] = (fields_next.qpot[a][i] - fields_prev.qpot[a][i]) / dt_eval;
        }
    return dq;
}

double continuity_residual(const WavefunctionField& prev, const WavefunctionField& mid,
                           const WavefunctionField& next) {
    if (prev.grid.get() != mid.grid.get() || mid.grid.get() != next.grid.get())
        throw std::invalid_argument("continuity_residual: snapshots live on different grids");
    const ConfigurationGrid& grid = *mid.grid;
    const std::size_t total = grid.size();
    const double window = next.time - prev.time;
    if (!(window > 0.0))
        throw std::invalid_argument("continuity_residual: snapshots must be time ordered");

    RealField res(total);
    for (std::size_t i = 0; i < total; ++i)
        res[i] = (std::norm(next.amplitudes[i]) - std::norm(prev.amplitudes[i])) / window;

    ComplexField psi_hat(total);
    grid.forward(mid.amplitudes.data(), psi_hat.data());
    const auto& ks = grid.wavenumbers();
    const int n = grid.points_per_axis();
    ComplexField modes(total), dpsi(total);
    for (int a = 0; a < grid.axes(); ++a) {
        for (std::size_t i = 0; i < total; ++i) {
            const int j = grid.axis_index(i, a);
            const double k = (n % 2 == 0 && j == n / 2) ? 0.0 : ks[std::size_t(j)];
            modes[i] = psi_hat[i] * std::complex<double>(0.0, k);
        }
        grid.inverse(modes.data(), dpsi.data());
        RealField J(total);
        for (std::size_t i = 0; i < total; ++i)
            J[i] = std::imag(std::conj(mid.amplitudes[i]) * dpsi[i]);
        const RealField divJ = gradient_axis(grid, J, a);
        for (std::size_t i = 0; i < total; ++i) res[i] += divJ[i];
    }

    long double acc = 0.0L;
    for (const double v : res) acc += (long double)(v * v);
    return std::sqrt(double(acc * (long double)grid.cell_volume()));
}

}  // namespace qlocal
