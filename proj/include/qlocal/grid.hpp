#ifndef QLOCAL_GRID_HPP
#define QLOCAL_GRID_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

// Configuration-space tensor grid for N particles in d dimensions per
// particle, with spectral (periodic) or 4th-order finite-difference
// derivatives and midpoint-rule integration over restricted sub-volumes.
// All quantities are in atomic units (bohr, hartree).

namespace qlocal {

using RealField = std::vector<double>;
using ComplexField = std::vector<std::complex<double>>;

struct GridSpec {
    int particle_count = 1;        // N
    int dims_per_particle = 1;     // d
    int points_per_axis = 64;      // n, same along every axis
    double box_length = 10.0;      // L
    bool periodic = true;
    std::size_t memory_budget_bytes = std::size_t(1) << 30;  // per complex field
};

// Grid-aligned interval [lower_index, upper_index], both cells included.
struct Region {
    int lower_index = 0;
    int upper_index = 0;
};

// One restricted axis of a configuration-space integral.
struct AxisRegion {
    int axis = 0;
    Region region;
};

class ConfigurationGrid {
public:
    explicit ConfigurationGrid(const GridSpec& spec);
    ~ConfigurationGrid();

    ConfigurationGrid(const ConfigurationGrid&) = delete;
    ConfigurationGrid& operator=(const ConfigurationGrid&) = delete;

    const GridSpec& spec() const { return spec_; }
    int axes() const { return axes_; }                    // N*d
    int points_per_axis() const { return n_; }
    std::size_t size() const { return total_; }           // n^(N*d)
    double spacing() const { return dx_; }
    double length() const { return spec_.box_length; }
    bool periodic() const { return spec_.periodic; }
    double cell_volume() const { return cell_volume_; }   // dx^(N*d)

    // Cell-centered coordinate of grid index i: x_i = -L/2 + i*dx. The cell
    // [x_i - dx/2, x_i + dx/2) carries full midpoint weight dx.
    double coordinate(int i) const { return coords_[std::size_t(i)]; }
    const std::vector<double>& coordinates() const { return coords_; }

    // FFT-ordered angular wavenumbers k_j = 2*pi*f_j/L shared by all axes.
    const std::vector<double>& wavenumbers() const { return wavenumbers_; }

    std::size_t stride(int axis) const { return strides_[std::size_t(axis)]; }
    int axis_index(std::size_t flat, int axis) const {
        return int((flat / strides_[std::size_t(axis)]) % std::size_t(n_));
    }
    void unravel(std::size_t flat, std::span<int> idx) const;
    std::size_t ravel(std::span<const int> idx) const;

    // Unnormalized forward DFT and 1/size-normalized inverse over the full
    // tensor grid. in and out must not alias. Safe to call concurrently.
    void forward(const std::complex<double>* in, std::complex<double>* out) const;
    void inverse(const std::complex<double>* in, std::complex<double>* out) const;

private:
    GridSpec spec_;
    int axes_ = 0;
    int n_ = 0;
    std::size_t total_ = 0;
    double dx_ = 0.0;
    double cell_volume_ = 0.0;
    std::vector<double> coords_;
    std::vector<double> wavenumbers_;
    std::vector<std::size_t> strides_;
    void* plan_forward_ = nullptr;   // fftw_plan
    void* plan_backward_ = nullptr;  // fftw_plan
};

using GridPtr = std::shared_ptr<const ConfigurationGrid>;

GridPtr make_grid(const GridSpec& spec);

// Many-particle wavefunction sampled on the full tensor grid.
struct WavefunctionField {
    GridPtr grid;
    ComplexField amplitudes;
    double time = 0.0;
};

WavefunctionField make_field(GridPtr grid, double time = 0.0);

double norm_squared(const WavefunctionField& psi);
WavefunctionField normalize(WavefunctionField psi);

RealField density_of(const WavefunctionField& psi);

// d/dx along one axis. Spectral on periodic grids (Nyquist mode dropped),
// 4th-order central differences with one-sided closures otherwise.
ComplexField gradient_axis(const ConfigurationGrid& grid, const ComplexField& f, int axis);
RealField gradient_axis(const ConfigurationGrid& grid, const RealField& f, int axis);

// d^2/dx^2 along one axis, same scheme selection as gradient_axis.
ComplexField laplacian_axis(const ConfigurationGrid& grid, const ComplexField& f, int axis);
RealField laplacian_axis(const ConfigurationGrid& grid, const RealField& f, int axis);

void validate_region(const ConfigurationGrid& grid, const Region& region);

// Midpoint-rule integral of f with the listed axes restricted to their
// regions (cells at lower_index and upper_index get full weight) and all
// other axes integrated over the whole box.
double integrate_region(const ConfigurationGrid& grid, const RealField& f,
                        std::span<const AxisRegion> constraints);
double integrate_full(const ConfigurationGrid& grid, const RealField& f);

// Integral of f over all axes except `axis`, which is pinned at the grid
// point `boundary_index`. The caller forms the S4 - S1 difference.
double surface_slice(const ConfigurationGrid& grid, const RealField& f, int axis,
                     int boundary_index);

}  // namespace qlocal

#endif
