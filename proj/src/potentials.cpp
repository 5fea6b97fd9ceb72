#include "qlocal/potentials.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qlocal {

namespace {

double logistic(double u) {
    if (u > 40.0) return 1.0;
    if (u < -40.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-u));
}

double logistic_derivative(double u) {
    if (u > 40.0 || u < -40.0) return 0.0;
    const double s = logistic(u);
    return s * (1.0 - s);
}

}  // namespace

ExternalPotential::ExternalPotential(ProfileSpec profile, EnvelopeSpec envelope)
    : profile_(profile), envelope_(envelope) {
    if ((profile.kind == ProfileKind::Barrier || profile.kind == ProfileKind::Well) &&
        !(profile.softness > 0.0))
        throw std::invalid_argument("potential: wall softness must be positive");
    if (profile.kind == ProfileKind::SineField && !(profile.wavelength > 0.0))
        throw std::invalid_argument("potential: sine_field needs a positive wavelength");
    if (envelope.kind == EnvelopeKind::Ramp && !(envelope.ramp_time > 0.0))
        throw std::invalid_argument("potential: ramp_time must be positive");
}

double ExternalPotential::profile(double x) const {
    switch (profile_.kind) {
        case ProfileKind::Zero:
            return 0.0;
        case ProfileKind::UniformField:
            return -profile_.strength * x;
        case ProfileKind::SineField: {
            const double k = 2.0 * std::numbers::pi / profile_.wavelength;
            return -profile_.strength / k * std::sin(k * (x - profile_.center));
        }
        case ProfileKind::Harmonic: {
            const double d = x - profile_.center;
            return 0.5 * profile_.omega0 * profile_.omega0 * d * d;
        }
        case ProfileKind::Barrier: {
            const double d = x - profile_.center;
            const double s = profile_.softness;
            const double plateau = logistic((d + 0.5 * profile_.width) / s) -
                                   logistic((d - 0.5 * profile_.width) / s);
            return profile_.height * plateau;
        }
        case ProfileKind::Well: {
            const double d = x - profile_.center;
            const double s = profile_.softness;
            const double plateau = logistic((d + 0.5 * profile_.width) / s) -
                                   logistic((d - 0.5 * profile_.width) / s);
            return profile_.height * (1.0 - plateau);
        }
    }
    return 0.0;
}

double ExternalPotential::profile_derivative(double x) const {
    switch (profile_.kind) {
        case ProfileKind::Zero:
            return 0.0;
        case ProfileKind::UniformField:
            return -profile_.strength;
        case ProfileKind::SineField:
            return -profile_.strength *
                   std::cos(2.0 * std::numbers::pi / profile_.wavelength *
                            (x - profile_.center));
        case ProfileKind::Harmonic:
            return profile_.omega0 * profile_.omega0 * (x - profile_.center);
        case ProfileKind::Barrier: {
            const double d = x - profile_.center;
            const double s = profile_.softness;
            return profile_.height / s *
                   (logistic_derivative((d + 0.5 * profile_.width) / s) -
                    logistic_derivative((d - 0.5 * profile_.width) / s));
        }
        case ProfileKind::Well: {
            const double d = x - profile_.center;
            const double s = profile_.softness;
            return -profile_.height / s *
                   (logistic_derivative((d + 0.5 * profile_.width) / s) -
                    logistic_derivative((d - 0.5 * profile_.width) / s));
        }
    }
    return 0.0;
}

double ExternalPotential::envelope(double t) const {
    switch (envelope_.kind) {
        case EnvelopeKind::Constant:
            return envelope_.value;
        case EnvelopeKind::Ramp: {
            const double f = t / envelope_.ramp_time;
            return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
        }
        case EnvelopeKind::Sinusoid:
            return envelope_.amplitude * std::sin(envelope_.omega * t + envelope_.phase);
    }
    return 0.0;
}

bool ExternalPotential::time_independent() const {
    if (profile_.kind == ProfileKind::Zero) return true;
    return envelope_.kind == EnvelopeKind::Constant;
}

double PairPotential::value(double s) const {
    return 1.0 / std::sqrt(s * s + soft_core * soft_core);
}

double PairPotential::force(double s) const {
    const double q = s * s + soft_core * soft_core;
    return s / (q * std::sqrt(q));
}

PotentialAssembly::PotentialAssembly(GridPtr grid, ExternalPotential external, PairPotential pair)
    : grid_(std::move(grid)), external_(std::move(external)), pair_(pair) {
    if (!(pair_.soft_core > 0.0))
        throw std::invalid_argument("potential: soft_core must be positive");
    if (grid_->spec().dims_per_particle != 1)
        throw std::invalid_argument("potential assembly is implemented for d = 1 per particle");
    particles_ = grid_->spec().particle_count;

    const std::size_t total = grid_->size();
    const int axes = grid_->axes();
    coulomb_grid_.assign(total, 0.0);
    profile_grid_.assign(total, 0.0);
    std::vector<int> idx(static_cast<std::size_t>(axes), 0);
    const int n = grid_->points_per_axis();
    // Per-axis profile table; the sum over particles reuses it.
    std::vector<double> prof(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) prof[std::size_t(i)] = external_.profile(grid_->coordinate(i));
    for (std::size_t flat = 0; flat < total; ++flat) {
        double cou = 0.0;
        double ext = 0.0;
        for (int a = 0; a < axes; ++a) ext += prof[std::size_t(idx[std::size_t(a)])];
        for (int k = 0; k < particles_; ++k)
            for (int j = k + 1; j < particles_; ++j) {
                const double s = grid_->coordinate(idx[std::size_t(k)]) -
                                 grid_->coordinate(idx[std::size_t(j)]);
                cou += pair_.value(s);
            }
        coulomb_grid_[flat] = cou;
        profile_grid_[flat] = ext;
        for (int a = axes - 1; a >= 0; --a) {
            if (++idx[std::size_t(a)] < n) break;
            idx[std::size_t(a)] = 0;
        }
    }
}

RealField PotentialAssembly::potential_grid(double t) const {
    const double f = external_.envelope(t);
    RealField u(coulomb_grid_.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = coulomb_grid_[i] + f * profile_grid_[i];
    return u;
}

double PotentialAssembly::coulomb_force_on_k(std::span<const double> r, int k) const {
    if (k < 0 || k >= particles_) throw std::out_of_range("particle index out of range");
    double f = 0.0;
    for (int j = 0; j < particles_; ++j) {
        if (j == k) continue;
        f += pair_.force(r[std::size_t(k)] - r[std::size_t(j)]);
    }
    return f;
}

double PotentialAssembly::pair_window_internal(double x_j, const Region& omega) const {
    const double lo = grid_->coordinate(omega.lower_index);
    const double hi = grid_->coordinate(omega.upper_index);
    return (x_j >= lo && x_j <= hi) ? 1.0 : 0.0;
}

double PotentialAssembly::coulomb_force_external_on_k(std::span<const double> r, int k,
                                                      const Region& omega) const {
    if (k < 0 || k >= particles_) throw std::out_of_range("particle index out of range");
    double f = 0.0;
    for (int j = 0; j < particles_; ++j) {
        if (j == k) continue;
        const double outside = 1.0 - pair_window_internal(r[std::size_t(j)], omega);
        if (outside != 0.0) f += outside * pair_.force(r[std::size_t(k)] - r[std::size_t(j)]);
    }
    return f;
}

AssemblyPtr make_assembly(GridPtr grid, ExternalPotential external, PairPotential pair) {
    return std::make_shared<const PotentialAssembly>(std::move(grid), std::move(external), pair);
}

}  // namespace qlocal
