#ifndef QLOCAL_PROPAGATOR_HPP
#define QLOCAL_PROPAGATOR_HPP

#include <functional>
#include <vector>

#include "qlocal/grid.hpp"
#include "qlocal/potentials.hpp"

// Strang split-operator stepping psi(t+dt) = e^{-iK dt/2} e^{-iU(t+dt/2) dt}
// e^{-iK dt/2} psi(t) with the kinetic factor applied spectrally, plus
// imaginary-time relaxation for state preparation and exchange-symmetry
// projection for identical particles.

namespace qlocal {

enum class SymmetryKind { None, Symmetric, Antisymmetric };

WavefunctionField apply_symmetry(const WavefunctionField& psi, SymmetryKind policy);

class StrangPlan {
public:
    StrangPlan(AssemblyPtr assembly, double dt);

    double dt() const { return dt_; }
    const PotentialAssembly& assembly() const { return *assembly_; }

    // Advance by one step in place; the time stamp moves to t + dt.
    void step(WavefunctionField& psi) const;

private:
    AssemblyPtr assembly_;
    double dt_ = 0.0;
    ComplexField kinetic_half_;          // exp(-i |k|^2/2 * dt/2) per mode
    mutable ComplexField phase_cache_;   // potential phase for static U
    bool static_potential_ = false;
    mutable ComplexField scratch_a_, scratch_b_;

    void potential_phase(double t_mid, ComplexField& phase) const;
};

// Called after every accepted step (and once for the initial state).
using StepObserver = std::function<void(const WavefunctionField& psi, int step)>;

struct RunSummary {
    int steps = 0;
    double t_final = 0.0;
};

// Runs from psi.time to t_end in whole steps of plan.dt(); throws if
// (t_end - t_start)/dt is not a whole number within rounding slack.
RunSummary run(const StrangPlan& plan, WavefunctionField& psi, double t_end,
               std::span<const StepObserver> observers);

struct RelaxOptions {
    double dtau = 1e-3;
    int max_iters = 200000;
    double tol = 1e-12;            // Rayleigh-quotient energy change per sweep
    SymmetryKind symmetry = SymmetryKind::None;
};

struct RelaxResult {
    WavefunctionField state;
    double energy = 0.0;
    int iterations = 0;
};

// Imaginary-time relaxation toward the lowest state (within the requested
// symmetry sector) of the assembly's static potential.
RelaxResult imaginary_time_relax(const AssemblyPtr& assembly, WavefunctionField psi_guess,
                                 const RelaxOptions& options);

// <psi| K + U(t) |psi> with the kinetic part evaluated spectrally.
double total_energy(const WavefunctionField& psi, const PotentialAssembly& assembly, double t);
// Kinetic-only and Coulomb-only pieces (Coulomb excludes U_ext).
double kinetic_expectation(const WavefunctionField& psi);
double internal_energy(const WavefunctionField& psi, const PotentialAssembly& assembly);

}  // namespace qlocal

#endif
