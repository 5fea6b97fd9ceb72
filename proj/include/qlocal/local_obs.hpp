#ifndef QLOCAL_LOCAL_OBS_HPP
#define QLOCAL_LOCAL_OBS_HPP

#include <vector>

#include "qlocal/grid.hpp"
#include "qlocal/hydro.hpp"
#include "qlocal/potentials.hpp"

// Expectation values restricted to an open interval Omega = [x_S1, x_S4]:
// presence and pair probabilities, restricted currents, the local energy
// decomposition and the six-term local power balance, including the
// energy flux through the two open surfaces.

namespace qlocal {

// The same physical interval, tested against each particle coordinate.
struct OmegaSpec {
    Region region;
};

OmegaSpec full_domain(const ConfigurationGrid& grid);
bool is_full_domain(const ConfigurationGrid& grid, const OmegaSpec& omega);

// Probability of finding particle k inside Omega, the rest anywhere.
double presence_probability(const WavefunctionField& psi, int k, const OmegaSpec& omega);

// Probability of finding particles k and j both inside Omega.
double pair_presence(const WavefunctionField& psi, int k, int j, const OmegaSpec& omega);

// Restricted expectation of the particle-k probability current.
double local_current(const WavefunctionField& psi, int k, const OmegaSpec& omega);

struct KineticParts {
    double flow = 0.0;       // sum_k int_Omega R^2 (grad_k S)^2 / 2
    double quantum = 0.0;    // sum_k int_Omega R^2 Q_k
    double imag_diag = 0.0;  // discarded Im part of the restricted integral
};

KineticParts local_kinetic(const WavefunctionField& psi, const HydroFields& fields,
                           const OmegaSpec& omega);

// Pair energy counted only when both partners are inside Omega.
double local_coulomb(const WavefunctionField& psi, const OmegaSpec& omega,
                     const PairPotential& pair);

struct EnergyBreakdown {
    double kinetic_flow = 0.0;
    double kinetic_quantum = 0.0;
    double kinetic_imag_diag = 0.0;  // diagnostic only, not part of total
    double coulomb_internal = 0.0;
    double total = 0.0;
};

EnergyBreakdown local_energy(const WavefunctionField& psi, const HydroFields& fields,
                             const OmegaSpec& omega, const PairPotential& pair);

struct PowerBreakdown {
    double drive = 0.0;         // sum_k int_Omega J_k F^ext
    double env_coulomb = 0.0;   // sum_k int_Omega J_k F_k^{cou,ext}
    double quantum_work = 0.0;  // sum_k int_Omega J_k F_k^{qua}
    double surface_flux = 0.0;  // -sum_k [J_k (Q_k + v_k^2/2 + U^int)]_{S1}^{S4}
    double qpot_time = 0.0;     // sum_k int_Omega R^2 dQ_k/dt
    double qpot_advect = 0.0;   // sum_k int_Omega sum_j J_j dQ_k/dx_j
    double total = 0.0;
};

// fields_prev/fields_next are the hydro snapshots at t -/+ dt; the
// R^2 dQ/dt term is evaluated through the division-free split
// d_t(R^2 Q) - Q d_t R^2, which stays smooth when the node-mask set
// changes between snapshots (a raw centered difference of the masked Q
// injects O(noise/dt) at the mask edge and ruins the balance's dt order).
PowerBreakdown local_power(const WavefunctionField& psi, const HydroFields& fields_prev,
                           const HydroFields& fields, const HydroFields& fields_next,
                           const OmegaSpec& omega, const PotentialAssembly& assembly, double t);

// Same with every quantum-potential contribution set to zero.
PowerBreakdown classical_limit_power(const WavefunctionField& psi, const HydroFields& fields,
                                     const OmegaSpec& omega, const PotentialAssembly& assembly,
                                     double t);

// Unrestricted electrical power sum_k int J_k F^ext.
double total_power_external(const WavefunctionField& psi, const PotentialAssembly& assembly,
                            double t);

}  // namespace qlocal

#endif
