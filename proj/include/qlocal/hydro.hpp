#ifndef QLOCAL_HYDRO_HPP
#define QLOCAL_HYDRO_HPP

#include <vector>

#include "qlocal/grid.hpp"

// Hydrodynamic decomposition psi = R e^{iS} without phase unwrapping:
// currents give grad S, amplitude curvature gives the quantum potential.
// Derivatives are always taken on the smooth fields psi and R; divisions
// by R happen pointwise afterwards and the node mask is applied last.

namespace qlocal {

struct NodePolicy {
    // Mask rule: density < epsilon_rel * max(density).
    double epsilon_rel = 1e-8;
};

struct HydroFields {
    GridPtr grid;
    double time = 0.0;
    RealField density;                 // R^2
    RealField amplitude;               // R
    std::vector<RealField> current;    // J_a = Im(psi* d_a psi) per axis
    std::vector<RealField> velocity;   // (grad_a S) = J_a / R^2, 0 on mask
    std::vector<RealField> qpot;       // Q_a = -(d_a^2 R)/(2R), 0 on mask
    RealField qpot_total;              // Q = sum_a Q_a
    // Kinetic energy densities routed through psi, which stays smooth when
    // near-nodes sweep by (R = |psi| kinks there and its spectral
    // derivatives ring):
    //   kinetic_density_a = Re[psi* (-d_a^2 psi)] / 2
    //   flow_density_a    = J_a^2 / (2 rho)   (bounded by |d_a psi|^2 / 2)
    //   qpot_density_a    = kinetic_density_a - flow_density_a == R^2 Q_a
    std::vector<RealField> kinetic_density;
    std::vector<RealField> flow_density;
    std::vector<RealField> qpot_density;
    std::vector<RealField> qforce;     // F^qua_a = -d_a Q, 0 on mask
    // qpot_grad[k][j] = d Q_k / d x_j, 0 on mask.
    std::vector<std::vector<RealField>> qpot_grad;
    // qpot_grad_density[k][j] = R^2 d Q_k / d x_j in the division-free form
    // -[R d_j d_k^2 R - (d_k^2 R)(d_j R)] / 2, smooth everywhere.
    std::vector<std::vector<RealField>> qpot_grad_density;
    std::vector<uint8_t> node_mask;    // 1 = masked
    bool fully_masked = false;
};

HydroFields extract(const WavefunctionField& psi, const NodePolicy& policy = {});

// Centered difference (Q_a(t+delta) - Q_a(t-delta)) / dt_eval per axis,
// where dt_eval = 2*delta is the separation of the two snapshots. Zero on
// the union of both masks.
std::vector<RealField> qpot_time_derivative(const HydroFields& fields_prev,
                                            const HydroFields& fields_next, double dt_eval);

// L2 norm over the grid of d(R^2)/dt (centered difference of the outer
// snapshots) plus div J at the middle time.
double continuity_residual(const WavefunctionField& prev, const WavefunctionField& mid,
                           const WavefunctionField& next);

}  // namespace qlocal

#endif
