// Python bindings for the grid, propagation, hydrodynamic-field, and
// local-observable layers, plus the scenario runner.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qlocal/propagator.hpp"
#include "qlocal/runner.hpp"
#include "qlocal/verify.hpp"

namespace py = pybind11;
using namespace qlocal;

namespace {

SymmetryKind symmetry_from(const std::string& name) {
    if (name == "none") return SymmetryKind::None;
    if (name == "symmetric") return SymmetryKind::Symmetric;
    if (name == "antisymmetric") return SymmetryKind::Antisymmetric;
    throw std::invalid_argument("symmetry must be none, symmetric or antisymmetric");
}

py::array_t<double> real_array(const RealField& f) {
    py::array_t<double> out(py::ssize_t(f.size()));
    std::copy(f.begin(), f.end(), out.mutable_data());
    return out;
}

py::array_t<std::complex<double>> complex_array(const ComplexField& f) {
    py::array_t<std::complex<double>> out(py::ssize_t(f.size()));
    std::copy(f.begin(), f.end(), out.mutable_data());
    return out;
}

RealField real_field(const ConfigurationGrid& grid, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    if (std::size_t(a.size()) != grid.size())
        throw std::invalid_argument("array size does not match the grid");
    return RealField(a.data(), a.data() + a.size());
}

ComplexField complex_field(const ConfigurationGrid& grid,
                           py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> a) {
    if (std::size_t(a.size()) != grid.size())
        throw std::invalid_argument("array size does not match the grid");
    return ComplexField(a.data(), a.data() + a.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "local energy and power diagnostics for driven few-electron systems";

    py::class_<Region>(m, "Region")
        .def(py::init<int, int>(), py::arg("lower_index"), py::arg("upper_index"))
        .def_readwrite("lower_index", &Region::lower_index)
        .def_readwrite("upper_index", &Region::upper_index);

    py::class_<OmegaSpec>(m, "OmegaSpec")
        .def(py::init([](const Region& r) { return OmegaSpec{r}; }), py::arg("region"))
        .def_readwrite("region", &OmegaSpec::region);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](int particles, int points, double length, bool periodic) {
                 GridSpec s;
                 s.particle_count = particles;
                 s.points_per_axis = points;
                 s.box_length = length;
                 s.periodic = periodic;
                 return s;
             }),
             py::arg("particles"), py::arg("points"), py::arg("length"),
             py::arg("periodic") = true)
        .def_readwrite("particle_count", &GridSpec::particle_count)
        .def_readwrite("points_per_axis", &GridSpec::points_per_axis)
        .def_readwrite("box_length", &GridSpec::box_length)
        .def_readwrite("periodic", &GridSpec::periodic)
        .def_readwrite("memory_budget_bytes", &GridSpec::memory_budget_bytes);

    py::class_<ConfigurationGrid, std::shared_ptr<ConfigurationGrid>>(m, "Grid")
        .def(py::init([](const GridSpec& spec) {
                 return std::const_pointer_cast<ConfigurationGrid>(make_grid(spec));
             }),
             py::arg("spec"))
        .def_property_readonly("axes", &ConfigurationGrid::axes)
        .def_property_readonly("points_per_axis", &ConfigurationGrid::points_per_axis)
        .def_property_readonly("size", &ConfigurationGrid::size)
        .def_property_readonly("spacing", &ConfigurationGrid::spacing)
        .def_property_readonly("length", &ConfigurationGrid::length)
        .def_property_readonly("coordinates",
                               [](const ConfigurationGrid& g) { return real_array(g.coordinates()); })
        .def("full_region", [](const ConfigurationGrid& g) {
            return Region{0, g.points_per_axis() - 1};
        });

    py::class_<WavefunctionField>(m, "Wavefunction")
        .def(py::init([](GridPtr grid,
                         py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> a,
                         double time) {
                 WavefunctionField psi;
                 psi.amplitudes = complex_field(*grid, a);
                 psi.grid = std::move(grid);
                 psi.time = time;
                 return psi;
             }),
             py::arg("grid"), py::arg("amplitudes"), py::arg("time") = 0.0)
        .def_readonly("time", &WavefunctionField::time)
        .def_property_readonly("grid", [](const WavefunctionField& p) {
            return std::const_pointer_cast<ConfigurationGrid>(p.grid);
        })
        .def("to_array", [](const WavefunctionField& p) { return complex_array(p.amplitudes); })
        .def("density", [](const WavefunctionField& p) { return real_array(density_of(p)); })
        .def("norm_squared", [](const WavefunctionField& p) { return norm_squared(p); });

    m.def("normalize", [](const WavefunctionField& psi) { return normalize(psi); });
    m.def(
        "gradient_axis",
        [](GridPtr grid, py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> f,
           int axis) { return complex_array(gradient_axis(*grid, complex_field(*grid, f), axis)); },
        py::arg("grid"), py::arg("field"), py::arg("axis"));
    m.def(
        "laplacian_axis",
        [](GridPtr grid, py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> f,
           int axis) { return complex_array(laplacian_axis(*grid, complex_field(*grid, f), axis)); },
        py::arg("grid"), py::arg("field"), py::arg("axis"));
    m.def(
        "integrate_region",
        [](GridPtr grid, py::array_t<double, py::array::c_style | py::array::forcecast> f,
           const std::vector<std::pair<int, Region>>& constraints) {
            std::vector<AxisRegion> list;
            for (const auto& [axis, region] : constraints) list.push_back({axis, region});
            return integrate_region(*grid, real_field(*grid, f), list);
        },
        py::arg("grid"), py::arg("field"), py::arg("constraints"));
    m.def(
        "surface_slice",
        [](GridPtr grid, py::array_t<double, py::array::c_style | py::array::forcecast> f, int axis,
           int boundary) { return surface_slice(*grid, real_field(*grid, f), axis, boundary); },
        py::arg("grid"), py::arg("field"), py::arg("axis"), py::arg("boundary_index"));

    py::class_<ProfileSpec>(m, "ProfileSpec")
        .def(py::init([](const std::string& kind, double strength, double omega0, double height,
                         double center, double width, double softness) {
                 ProfileSpec p;
                 if (kind == "zero") p.kind = ProfileKind::Zero;
                 else if (kind == "uniform_field") p.kind = ProfileKind::UniformField;
                 else if (kind == "harmonic") p.kind = ProfileKind::Harmonic;
                 else if (kind == "barrier") p.kind = ProfileKind::Barrier;
                 else if (kind == "well") p.kind = ProfileKind::Well;
                 else throw std::invalid_argument("unknown profile kind " + kind);
                 p.strength = strength;
                 p.omega0 = omega0;
                 p.height = height;
                 p.center = center;
                 p.width = width;
                 p.softness = softness;
                 return p;
             }),
             py::arg("kind"), py::arg("strength") = 0.0, py::arg("omega0") = 0.0,
             py::arg("height") = 0.0, py::arg("center") = 0.0, py::arg("width") = 1.0,
             py::arg("softness") = 0.1);

    py::class_<EnvelopeSpec>(m, "EnvelopeSpec")
        .def(py::init([](const std::string& kind, double value, double ramp_time,
                         double amplitude, double omega, double phase) {
                 EnvelopeSpec e;
                 if (kind == "constant") e.kind = EnvelopeKind::Constant;
                 else if (kind == "ramp") e.kind = EnvelopeKind::Ramp;
                 else if (kind == "sinusoid") e.kind = EnvelopeKind::Sinusoid;
                 else throw std::invalid_argument("unknown envelope kind " + kind);
                 e.value = value;
                 e.ramp_time = ramp_time;
                 e.amplitude = amplitude;
                 e.omega = omega;
                 e.phase = phase;
                 return e;
             }),
             py::arg("kind") = "constant", py::arg("value") = 1.0, py::arg("ramp_time") = 1.0,
             py::arg("amplitude") = 1.0, py::arg("omega") = 1.0, py::arg("phase") = 0.0);

    py::class_<PotentialAssembly, std::shared_ptr<PotentialAssembly>>(m, "Assembly")
        .def(py::init([](GridPtr grid, const ProfileSpec& profile, const EnvelopeSpec& envelope,
                         double soft_core) {
                 return std::const_pointer_cast<PotentialAssembly>(make_assembly(
                     std::move(grid), ExternalPotential(profile, envelope),
                     PairPotential{soft_core}));
             }),
             py::arg("grid"), py::arg("profile") = ProfileSpec{},
             py::arg("envelope") = EnvelopeSpec{}, py::arg("soft_core") = 1.0)
        .def("eval_external",
             [](const PotentialAssembly& a, double x, double t) { return a.eval_external(x, t); })
        .def("external_force",
             [](const PotentialAssembly& a, double x, double t) { return a.external_force(x, t); })
        .def("potential_grid",
             [](const PotentialAssembly& a, double t) { return real_array(a.potential_grid(t)); })
        .def("coulomb_force_on_k",
             [](const PotentialAssembly& a, const std::vector<double>& r, int k) {
                 return a.coulomb_force_on_k(r, k);
             })
        .def("coulomb_force_external_on_k",
             [](const PotentialAssembly& a, const std::vector<double>& r, int k,
                const Region& omega) { return a.coulomb_force_external_on_k(r, k, omega); })
        .def("pair_window_internal",
             [](const PotentialAssembly& a, double x, const Region& omega) {
                 return a.pair_window_internal(x, omega);
             });

    py::class_<StrangPlan>(m, "StrangPlan")
        .def(py::init<AssemblyPtr, double>(), py::arg("assembly"), py::arg("dt"))
        .def_property_readonly("dt", &StrangPlan::dt)
        .def("step", [](const StrangPlan& plan, WavefunctionField& psi) { plan.step(psi); });

    m.def(
        "apply_symmetry",
        [](const WavefunctionField& psi, const std::string& kind) {
            return apply_symmetry(psi, symmetry_from(kind));
        },
        py::arg("psi"), py::arg("kind"));

    m.def(
        "imaginary_time_relax",
        [](AssemblyPtr assembly, const WavefunctionField& guess, double dtau, int max_iters,
           double tol, const std::string& symmetry) {
            RelaxOptions opt;
            opt.dtau = dtau;
            opt.max_iters = max_iters;
            opt.tol = tol;
            opt.symmetry = symmetry_from(symmetry);
            RelaxResult r = imaginary_time_relax(assembly, guess, opt);
            return py::make_tuple(r.state, r.energy, r.iterations);
        },
        py::arg("assembly"), py::arg("guess"), py::arg("dtau") = 1e-3,
        py::arg("max_iters") = 200000, py::arg("tol") = 1e-12, py::arg("symmetry") = "none");

    m.def("kinetic_expectation", &kinetic_expectation);
    m.def("internal_energy",
          [](const WavefunctionField& psi, const PotentialAssembly& a) {
              return internal_energy(psi, a);
          });

    py::class_<NodePolicy>(m, "NodePolicy")
        .def(py::init([](double eps) { return NodePolicy{eps}; }),
             py::arg("epsilon_rel") = 1e-8)
        .def_readwrite("epsilon_rel", &NodePolicy::epsilon_rel);

    py::class_<HydroFields>(m, "HydroFields")
        .def_readonly("time", &HydroFields::time)
        .def_readonly("fully_masked", &HydroFields::fully_masked)
        .def_property_readonly("density",
                               [](const HydroFields& f) { return real_array(f.density); })
        .def_property_readonly("amplitude",
                               [](const HydroFields& f) { return real_array(f.amplitude); })
        .def_property_readonly("qpot_total",
                               [](const HydroFields& f) { return real_array(f.qpot_total); })
        .def("current", [](const HydroFields& f, int k) { return real_array(f.current.at(std::size_t(k))); })
        .def("velocity", [](const HydroFields& f, int k) { return real_array(f.velocity.at(std::size_t(k))); })
        .def("qpot", [](const HydroFields& f, int k) { return real_array(f.qpot.at(std::size_t(k))); })
        .def("qforce", [](const HydroFields& f, int k) { return real_array(f.qforce.at(std::size_t(k))); })
        .def_property_readonly("node_mask", [](const HydroFields& f) {
            py::array_t<bool> out(py::ssize_t(f.node_mask.size()));
            for (std::size_t i = 0; i < f.node_mask.size(); ++i)
                out.mutable_data()[i] = f.node_mask[i] != 0;
            return out;
        });

    m.def("extract", &extract, py::arg("psi"), py::arg("policy") = NodePolicy{});
    m.def("qpot_time_derivative",
          [](const HydroFields& prev, const HydroFields& next, double dt_eval) {
              std::vector<py::array_t<double>> out;
              for (const auto& dq : qpot_time_derivative(prev, next, dt_eval))
                  out.push_back(real_array(dq));
              return out;
          });
    m.def("continuity_residual", &continuity_residual);

    py::class_<KineticParts>(m, "KineticParts")
        .def_readonly("flow", &KineticParts::flow)
        .def_readonly("quantum", &KineticParts::quantum)
        .def_readonly("imag_diag", &KineticParts::imag_diag);

    py::class_<EnergyBreakdown>(m, "EnergyBreakdown")
        .def_readonly("kinetic_flow", &EnergyBreakdown::kinetic_flow)
        .def_readonly("kinetic_quantum", &EnergyBreakdown::kinetic_quantum)
        .def_readonly("kinetic_imag_diag", &EnergyBreakdown::kinetic_imag_diag)
        .def_readonly("coulomb_internal", &EnergyBreakdown::coulomb_internal)
        .def_readonly("total", &EnergyBreakdown::total);

    py::class_<PowerBreakdown>(m, "PowerBreakdown")
        .def_readonly("drive", &PowerBreakdown::drive)
        .def_readonly("env_coulomb", &PowerBreakdown::env_coulomb)
        .def_readonly("quantum_work", &PowerBreakdown::quantum_work)
        .def_readonly("surface_flux", &PowerBreakdown::surface_flux)
        .def_readonly("qpot_time", &PowerBreakdown::qpot_time)
        .def_readonly("qpot_advect", &PowerBreakdown::qpot_advect)
        .def_readonly("total", &PowerBreakdown::total);

    m.def("presence_probability", &presence_probability, py::arg("psi"), py::arg("k"),
          py::arg("omega"));
    m.def("pair_presence", &pair_presence);
    m.def("local_current", &local_current);
    m.def("local_kinetic", &local_kinetic);
    m.def("local_coulomb",
          [](const WavefunctionField& psi, const OmegaSpec& omega, double soft_core) {
              return local_coulomb(psi, omega, PairPotential{soft_core});
          },
          py::arg("psi"), py::arg("omega"), py::arg("soft_core") = 1.0);
    m.def("local_energy",
          [](const WavefunctionField& psi, const HydroFields& fields, const OmegaSpec& omega,
             const PotentialAssembly& assembly) {
              return local_energy(psi, fields, omega, assembly.pair());
          });
    m.def("local_power",
          [](const WavefunctionField& psi, const HydroFields& fields_prev,
             const HydroFields& fields, const HydroFields& fields_next, const OmegaSpec& omega,
             const PotentialAssembly& assembly, double t) {
              return local_power(psi, fields_prev, fields, fields_next, omega, assembly, t);
          });
    m.def("classical_limit_power",
          [](const WavefunctionField& psi, const HydroFields& fields, const OmegaSpec& omega,
             const PotentialAssembly& assembly, double t) {
              return classical_limit_power(psi, fields, omega, assembly, t);
          });
    m.def("total_power_external",
          [](const WavefunctionField& psi, const PotentialAssembly& assembly, double t) {
              return total_power_external(psi, assembly, t);
          });

    m.def(
        "run_scenario_file",
        [](const std::string& path, const std::string& out_root) {
            const Scenario s = load_scenario_file(path);
            const RunResult r = run_scenario(s, out_root);
            py::dict d;
            d["exit_status"] = r.exit_status;
            d["out_dir"] = r.out_dir;
            d["messages"] = r.messages;
            d["norm_drift_max"] = r.norm_drift_max;
            d["continuity_max"] = r.continuity_max;
            return d;
        },
        py::arg("path"), py::arg("out_root") = "");
    m.def("check_scenario_text", [](const std::string& text) {
        try {
            parse_scenario(text, "inline");
            return std::vector<std::string>{};
        } catch (const ScenarioError& e) {
            return e.errors;
        }
    });
    m.def("paper_examples", []() {
        py::list rows;
        for (const auto& row : paper_examples_suite()) {
            py::dict d;
            d["name"] = row.name;
            d["measured"] = row.measured;
            d["bound"] = row.bound;
            d["pass"] = row.pass;
            d["detail"] = row.detail;
            rows.append(d);
        }
        return rows;
    });
}
