"""Local energy and power diagnostics for driven few-electron systems."""

from ._core import (
    Assembly,
    EnergyBreakdown,
    EnvelopeSpec,
    Grid,
    GridSpec,
    HydroFields,
    KineticParts,
    NodePolicy,
    OmegaSpec,
    PowerBreakdown,
    ProfileSpec,
    Region,
    StrangPlan,
    Wavefunction,
    apply_symmetry,
    check_scenario_text,
    classical_limit_power,
    continuity_residual,
    extract,
    gradient_axis,
    imaginary_time_relax,
    integrate_region,
    internal_energy,
    kinetic_expectation,
    laplacian_axis,
    local_coulomb,
    local_current,
    local_energy,
    local_kinetic,
    local_power,
    normalize,
    paper_examples,
    pair_presence,
    presence_probability,
    qpot_time_derivative,
    run_scenario_file,
    surface_slice,
    total_power_external,
)

__all__ = [
    "Assembly",
    "EnergyBreakdown",
    "EnvelopeSpec",
    "Grid",
    "GridSpec",
    "HydroFields",
    "KineticParts",
    "NodePolicy",
    "OmegaSpec",
    "PowerBreakdown",
    "ProfileSpec",
    "Region",
    "StrangPlan",
    "Wavefunction",
    "apply_symmetry",
    "check_scenario_text",
    "classical_limit_power",
    "continuity_residual",
    "extract",
    "gradient_axis",
    "imaginary_time_relax",
    "integrate_region",
    "internal_energy",
    "kinetic_expectation",
    "laplacian_axis",
    "local_coulomb",
    "local_current",
    "local_energy",
    "local_kinetic",
    "local_power",
    "normalize",
    "paper_examples",
    "pair_presence",
    "presence_probability",
    "qpot_time_derivative",
    "run_scenario_file",
    "surface_slice",
    "total_power_external",
]

__version__ = "0.1.0"
