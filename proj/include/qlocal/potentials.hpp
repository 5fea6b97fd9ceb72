#ifndef QLOCAL_POTENTIALS_HPP
#define QLOCAL_POTENTIALS_HPP

#include <memory>
#include <span>
#include <string>

#include "qlocal/grid.hpp"

// One-body external potential U_ext(x,t) = profile(x) * envelope(t) with
// analytic forces, softened electron-electron repulsion, and the
// inside/outside pair bookkeeping relative to an open interval.

namespace qlocal {

enum class ProfileKind { Zero, UniformField, SineField, Harmonic, Barrier, Well };

struct ProfileSpec {
    ProfileKind kind = ProfileKind::Zero;
    double strength = 0.0;   // uniform_field: slope F0 in U = -F0*x;
                             // sine_field: U = -F0*(wavelength/2pi)*sin(2pi(x-c)/wavelength),
                             // a box-periodic stand-in for a uniform force near the center
    double wavelength = 0.0; // sine_field: spatial period (the box length, typically)
    double omega0 = 0.0;     // harmonic: U = 0.5*omega0^2*(x-center)^2
    double height = 0.0;     // barrier/well: plateau/wall height
    double center = 0.0;
    double width = 0.0;      // barrier/well: plateau width
    double softness = 0.1;   // barrier/well: logistic wall scale
};

enum class EnvelopeKind { Constant, Ramp, Sinusoid };

struct EnvelopeSpec {
    EnvelopeKind kind = EnvelopeKind::Constant;
    double value = 1.0;      // constant
    double ramp_time = 1.0;  // ramp: f = clamp(t/ramp_time, 0, 1)
    double amplitude = 1.0;  // sinusoid: f = amplitude*sin(omega*t + phase)
    double omega = 1.0;
    double phase = 0.0;
};

class ExternalPotential {
public:
    ExternalPotential() = default;
    ExternalPotential(ProfileSpec profile, EnvelopeSpec envelope);

    double profile(double x) const;
    double profile_derivative(double x) const;
    double envelope(double t) const;

    double value(double x, double t) const { return profile(x) * envelope(t); }
    // F = -dU/dx, analytic (never grid differentiation).
    double force(double x, double t) const { return -profile_derivative(x) * envelope(t); }

    bool time_independent() const;
    const ProfileSpec& profile_spec() const { return profile_; }
    const EnvelopeSpec& envelope_spec() const { return envelope_; }

private:
    ProfileSpec profile_;
    EnvelopeSpec envelope_;
};

// Soft-core pair repulsion U(s) = 1/sqrt(s^2 + a^2) for unit charges.
struct PairPotential {
    double soft_core = 1.0;

    double value(double s) const;
    // -dU/ds: force on the particle whose coordinate enters s with + sign.
    double force(double s) const;
};

class PotentialAssembly {
public:
    PotentialAssembly(GridPtr grid, ExternalPotential external, PairPotential pair);

    const ConfigurationGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const ExternalPotential& external() const { return external_; }
    const PairPotential& pair() const { return pair_; }
    int particle_count() const { return particles_; }

    double eval_external(double x, double t) const { return external_.value(x, t); }
    double external_force(double x, double t) const { return external_.force(x, t); }

    // Full potential U(r,t) = U_cou(r) + sum_k U_ext(x_k,t) on the grid.
    RealField potential_grid(double t) const;
    const RealField& coulomb_grid() const { return coulomb_grid_; }
    const RealField& external_profile_grid() const { return profile_grid_; }

    // Coulomb force on particle k at the configuration point r (one
    // coordinate per particle, d = 1). Equal charges repel.
    double coulomb_force_on_k(std::span<const double> r, int k) const;

    // 1 if the partner coordinate lies in [x_S1, x_S4] (both surfaces
    // closed, matching the full-weight boundary cells), else 0.
    double pair_window_internal(double x_j, const Region& omega) const;

    // Force on particle k from partners outside omega only.
    double coulomb_force_external_on_k(std::span<const double> r, int k,
                                       const Region& omega) const;

private:
    GridPtr grid_;
    ExternalPotential external_;
    PairPotential pair_;
    int particles_ = 1;
    RealField coulomb_grid_;   // U_cou(r), time independent
    RealField profile_grid_;   // sum_k profile(x_k)
};

using AssemblyPtr = std::shared_ptr<const PotentialAssembly>;

AssemblyPtr make_assembly(GridPtr grid, ExternalPotential external, PairPotential pair);

}  // namespace qlocal

#endif
