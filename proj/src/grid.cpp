#include "qlocal/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qlocal {

namespace {

// FFTW plan creation is not thread-safe; execution via fftw_execute_dft is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t checked_total_points(const GridSpec& spec) {
    const int axes = spec.particle_count * spec.dims_per_particle;
    const double bits = double(axes) * std::log2(double(spec.points_per_axis));
    if (bits > 56.0)
        throw std::invalid_argument("grid: n^(N*d) overflows any realistic memory budget");
    std::size_t total = 1;
    for (int a = 0; a < axes; ++a) total *= std::size_t(spec.points_per_axis);
    return total;
}

}  // namespace

ConfigurationGrid::ConfigurationGrid(const GridSpec& spec) : spec_(spec) {
    if (spec.particle_count < 1)
        throw std::invalid_argument("grid: particle_count must be >= 1");
    if (spec.dims_per_particle < 1)
        throw std::invalid_argument("grid: dims_per_particle must be >= 1");
    if (spec.points_per_axis < 4)
        throw std::invalid_argument("grid: points_per_axis must be >= 4");
    if (!(spec.box_length > 0.0))
        throw std::invalid_argument("grid: box_length must be positive");

    axes_ = spec.particle_count * spec.dims_per_particle;
    n_ = spec.points_per_axis;
    total_ = checked_total_points(spec);

    const std::size_t field_bytes = total_ * sizeof(std::complex<double>);
    if (field_bytes > spec.memory_budget_bytes)
        throw std::invalid_argument(
            "grid: one complex field needs " + std::to_string(field_bytes) +
            " bytes, exceeding the memory budget of " +
            std::to_string(spec.memory_budget_bytes));

    dx_ = spec.box_length / double(n_);
    cell_volume_ = std::pow(dx_, axes_);

    coords_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i)
        coords_[std::size_t(i)] = -0.5 * spec.box_length + double(i) * dx_;

    wavenumbers_.resize(static_cast<std::size_t>(n_));
    const double dk = 2.0 * std::numbers::pi / spec.box_length;
    for (int j = 0; j < n_; ++j) {
        const int f = (j <= n_ / 2) ? j : j - n_;
        wavenumbers_[std::size_t(j)] = dk * double(f);
    }

    strides_.resize(static_cast<std::size_t>(axes_));
    std::size_t s = 1;
    for (int a = axes_ - 1; a >= 0; --a) {
        strides_[std::size_t(a)] = s;
        s *= std::size_t(n_);
    }

    if (spec.periodic) {
        std::vector<int> dims(static_cast<std::size_t>(axes_), n_);
        ComplexField scratch_in(total_), scratch_out(total_);
        std::lock_guard<std::mutex> lock(planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        plan_forward_ = fftw_plan_dft(
            axes_, dims.data(), reinterpret_cast<fftw_complex*>(scratch_in.data()),
            reinterpret_cast<fftw_complex*>(scratch_out.data()), FFTW_FORWARD, flags);
        plan_backward_ = fftw_plan_dft(
            axes_, dims.data(), reinterpret_cast<fftw_complex*>(scratch_in.data()),
            reinterpret_cast<fftw_complex*>(scratch_out.data()), FFTW_BACKWARD, flags);
        if (!plan_forward_ || !plan_backward_)
            throw std::runtime_error("grid: FFTW plan creation failed");
    }
}

ConfigurationGrid::~ConfigurationGrid() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
    if (plan_backward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
}

void ConfigurationGrid::unravel(std::size_t flat, std::span<int> idx) const {
    for (int a = axes_ - 1; a >= 0; --a) {
        idx[std::size_t(a)] = int(flat % std::size_t(n_));
        flat /= std::size_t(n_);
    }
}

std::size_t ConfigurationGrid::ravel(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < axes_; ++a) flat = flat * std::size_t(n_) + std::size_t(idx[std::size_t(a)]);
    return flat;
}

void ConfigurationGrid::forward(const std::complex<double>* in, std::complex<double>* out) const {
    if (!plan_forward_) throw std::runtime_error("grid: spectral transform requires a periodic grid");
    fftw_execute_dft(static_cast<fftw_plan>(plan_forward_),
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void ConfigurationGrid::inverse(const std::complex<double>* in, std::complex<double>* out) const {
    if (!plan_backward_) throw std::runtime_error("grid: spectral transform requires a periodic grid");
    fftw_execute_dft(static_cast<fftw_plan>(plan_backward_),
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / double(total_);
    for (std::size_t i = 0; i < total_; ++i) out[i] *= scale;
}

GridPtr make_grid(const GridSpec& spec) {
    return std::make_shared<const ConfigurationGrid>(spec);
}

WavefunctionField make_field(GridPtr grid, double time) {
    WavefunctionField psi;
    psi.amplitudes.assign(grid->size(), {0.0, 0.0});
    psi.grid = std::move(grid);
    psi.time = time;
    return psi;
}

double norm_squared(const WavefunctionField& psi) {
    long double acc = 0.0L;
    for (const auto& a : psi.amplitudes) acc += (long double)std::norm(a);
    return double(acc * (long double)psi.grid->cell_volume());
}

WavefunctionField normalize(WavefunctionField psi) {
    const double n2 = norm_squared(psi);
    if (!(n2 > 1e-300)) throw std::invalid_argument("normalize: zero-norm wavefunction");
    const double s = 1.0 / std::sqrt(n2);
    for (auto& a : psi.amplitudes) a *= s;
    return psi;
}

RealField density_of(const WavefunctionField& psi) {
    RealField rho(psi.amplitudes.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.amplitudes[i]);
    return rho;
}

namespace {

void check_axis(const ConfigurationGrid& grid, int axis) {
    if (axis < 0 || axis >= grid.axes()) throw std::out_of_range("axis out of range");
}

enum class SpectralOp { Gradient, Laplacian };

ComplexField spectral_axis_op(const ConfigurationGrid& grid, const ComplexField& f, int axis,
                              SpectralOp op) {
    const std::size_t total = grid.size();
    ComplexField hat(total), out(total);
    grid.forward(f.data(), hat.data());
    const auto& ks = grid.wavenumbers();
    const int n = grid.points_per_axis();
    const std::size_t stride = grid.stride(axis);
    for (std::size_t i = 0; i < total; ++i) {
        const int j = int((i / stride) % std::size_t(n));
        const double k = ks[std::size_t(j)];
        if (op == SpectralOp::Gradient) {
            // Drop the unpaired Nyquist mode; its first derivative has no
            // consistent sign on a real sawtooth.
            const double kg = (n % 2 == 0 && j == n / 2) ? 0.0 : k;
            hat[i] *= std::complex<double>(0.0, kg);
        } else {
            hat[i] *= -k * k;
        }
    }
    grid.inverse(hat.data(), out.data());
    return out;
}

// Fornberg coefficients, 4th order. First derivative uses a 5-point stencil,
// second derivative a 5-point centered / 6-point one-sided stencil.
ComplexField fd_axis_op(const ConfigurationGrid& grid, const ComplexField& f, int axis,
                        SpectralOp op) {
    const int n = grid.points_per_axis();
    if (n < 6) throw std::invalid_argument("finite-difference derivative needs n >= 6");
    const std::size_t total = grid.size();
    const std::size_t stride = grid.stride(axis);
    const double dx = grid.spacing();
    ComplexField out(total);
    const std::size_t lines = total / std::size_t(n);
    std::vector<std::complex<double>> line(static_cast<std::size_t>(n)), deriv(static_cast<std::size_t>(n));
    for (std::size_t l = 0; l < lines; ++l) {
        const std::size_t lo = l % stride;
        const std::size_t hi = l / stride;
        const std::size_t base = hi * stride * std::size_t(n) + lo;
        for (int i = 0; i < n; ++i) line[std::size_t(i)] = f[base + std::size_t(i) * stride];
        if (op == SpectralOp::Gradient) {
            const double w = 1.0 / (12.0 * dx);
            deriv[0] = w * (-25.0 * line[0] + 48.0 * line[1] - 36.0 * line[2] + 16.0 * line[3] -
                            3.0 * line[4]);
            deriv[1] = w * (-3.0 * line[0] - 10.0 * line[1] + 18.0 * line[2] - 6.0 * line[3] +
                            line[4]);
            for (int i = 2; i < n - 2; ++i)
                deriv[std::size_t(i)] =
                    w * (line[std::size_t(i - 2)] - 8.0 * line[std::size_t(i - 1)] +
                         8.0 * line[std::size_t(i + 1)] - line[std::size_t(i + 2)]);
            deriv[std::size_t(n - 2)] =
                -w * (-3.0 * line[std::size_t(n - 1)] - 10.0 * line[std::size_t(n - 2)] +
                      18.0 * line[std::size_t(n - 3)] - 6.0 * line[std::size_t(n - 4)] +
                      line[std::size_t(n - 5)]);
            deriv[std::size_t(n - 1)] =
                -w * (-25.0 * line[std::size_t(n - 1)] + 48.0 * line[std::size_t(n - 2)] -
                      36.0 * line[std::size_t(n - 3)] + 16.0 * line[std::size_t(n - 4)] -
                      3.0 * line[std::size_t(n - 5)]);
        } else {
            const double w = 1.0 / (12.0 * dx * dx);
            deriv[0] = w * (45.0 * line[0] - 154.0 * line[1] + 214.0 * line[2] -
                            156.0 * line[3] + 61.0 * line[4] - 10.0 * line[5]);
            deriv[1] = w * (10.0 * line[0] - 15.0 * line[1] - 4.0 * line[2] + 14.0 * line[3] -
                            6.0 * line[4] + line[5]);
            for (int i = 2; i < n - 2; ++i)
                deriv[std::size_t(i)] =
                    w * (-line[std::size_t(i - 2)] + 16.0 * line[std::size_t(i - 1)] -
                         30.0 * line[std::size_t(i)] + 16.0 * line[std::size_t(i + 1)] -
                         line[std::size_t(i + 2)]);
            deriv[std::size_t(n - 2)] =
                w * (10.0 * line[std::size_t(n - 1)] - 15.0 * line[std::size_t(n - 2)] -
                     4.0 * line[std::size_t(n - 3)] + 14.0 * line[std::size_t(n - 4)] -
                     6.0 * line[std::size_t(n - 5)] + line[std::size_t(n - 6)]);
            deriv[std::size_t(n - 1)] =
                w * (45.0 * line[std::size_t(n - 1)] - 154.0 * line[std::size_t(n - 2)] +
                     214.0 * line[std::size_t(n - 3)] - 156.0 * line[std::size_t(n - 4)] +
                     61.0 * line[std::size_t(n - 5)] - 10.0 * line[std::size_t(n - 6)]);
        }
        for (int i = 0; i < n; ++i) out[base + std::size_t(i) * stride] = deriv[std::size_t(i)];
    }
    return out;
}

ComplexField axis_op(const ConfigurationGrid& grid, const ComplexField& f, int axis, SpectralOp op) {
    check_axis(grid, axis);
    if (f.size() != grid.size()) throw std::invalid_argument("field size does not match grid");
    return grid.periodic() ? spectral_axis_op(grid, f, axis, op) : fd_axis_op(grid, f, axis, op);
}

RealField real_part(const ComplexField& f) {
    RealField out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
    return out;
}

ComplexField to_complex(const RealField& f) {
    ComplexField out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = {f[i], 0.0};
    return out;
}

}  // namespace

ComplexField gradient_axis(const ConfigurationGrid& grid, const ComplexField& f, int axis) {
    return axis_op(grid, f, axis, SpectralOp::Gradient);
}

RealField gradient_axis(const ConfigurationGrid& grid, const RealField& f, int axis) {
    return real_part(axis_op(grid, to_complex(f), axis, SpectralOp::Gradient));
}

ComplexField laplacian_axis(const ConfigurationGrid& grid, const ComplexField& f, int axis) {
    return axis_op(grid, f, axis, SpectralOp::Laplacian);
}

RealField laplacian_axis(const ConfigurationGrid& grid, const RealField& f, int axis) {
    return real_part(axis_op(grid, to_complex(f), axis, SpectralOp::Laplacian));
}

void validate_region(const ConfigurationGrid& grid, const Region& region) {
    if (region.lower_index < 0 || region.upper_index > grid.points_per_axis() - 1 ||
        region.lower_index >= region.upper_index)
        throw std::invalid_argument(
            "region: need 0 <= lower_index < upper_index <= n-1, got [" +
            std::to_string(region.lower_index) + ", " + std::to_string(region.upper_index) + "]");
}

double integrate_region(const ConfigurationGrid& grid, const RealField& f,
                        std::span<const AxisRegion> constraints) {
    if (f.size() != grid.size()) throw std::invalid_argument("field size does not match grid");
    const int n = grid.points_per_axis();
    const int axes = grid.axes();
    // Per-axis membership masks; unconstrained axes stay fully inside.
    std::vector<uint8_t> inside(std::size_t(axes) * std::size_t(n), 1);
    for (const auto& c : constraints) {
        check_axis(grid, c.axis);
        validate_region(grid, c.region);
        uint8_t* row = inside.data() + std::size_t(c.axis) * std::size_t(n);
        for (int i = 0; i < n; ++i)
            row[std::size_t(i)] &= uint8_t(i >= c.region.lower_index && i <= c.region.upper_index);
    }
    std::vector<int> idx(static_cast<std::size_t>(axes), 0);
    long double acc = 0.0L;
    const std::size_t total = grid.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        bool ok = true;
        for (int a = 0; a < axes; ++a)
            if (!inside[std::size_t(a) * std::size_t(n) + std::size_t(idx[std::size_t(a)])]) {
                ok = false;
                break;
            }
        if (ok) acc += (long double)f[flat];
        for (int a = axes - 1; a >= 0; --a) {
            if (++idx[std::size_t(a)] < n) break;
            idx[std::size_t(a)] = 0;
        }
    }
    return double(acc * (long double)grid.cell_volume());
}

double integrate_full(const ConfigurationGrid& grid, const RealField& f) {
    if (f.size() != grid.size()) throw std::invalid_argument("field size does not match grid");
    long double acc = 0.0L;
    for (const double v : f) acc += (long double)v;
    return double(acc * (long double)grid.cell_volume());
}

double surface_slice(const ConfigurationGrid& grid, const RealField& f, int axis,
                     int boundary_index) {
    check_axis(grid, axis);
    if (f.size() != grid.size()) throw std::invalid_argument("field size does not match grid");
    if (boundary_index < 0 || boundary_index >= grid.points_per_axis())
        throw std::out_of_range("surface_slice: boundary index outside grid");
    const int n = grid.points_per_axis();
    const std::size_t stride = grid.stride(axis);
    const std::size_t lines = grid.size() / std::size_t(n);
    long double acc = 0.0L;
    for (std::size_t l = 0; l < lines; ++l) {
        const std::size_t lo = l % stride;
        const std::size_t hi = l / stride;
        const std::size_t base = hi * stride * std::size_t(n) + lo;
        acc += (long double)f[base + std::size_t(boundary_index) * stride];
    }
    const double weight = std::pow(grid.spacing(), grid.axes() - 1);
    return double(acc) * weight;
}

}  // namespace qlocal
