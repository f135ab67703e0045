"""Linear size-structured population model with diffusion in size and
dynamic (Wentzell-Robin) boundary conditions."""
from .discretization import (
    GeneratorMatrix,
    Grid,
    apply_generator,
    assemble_generator,
    birth_death_rates,
    build_grid,
    total_mass,
    weighted_norm,
)
from .evolution import Trajectory, simulate, step_crank_nicolson, step_implicit_euler
from .model import (
    BoundaryConstants,
    Constant,
    ConstantKernel,
    GridKernel,
    Model,
    NormWeights,
    Polynomial,
    SeparableKernel,
    Table,
    conservative_constants,
    evaluate,
    evaluate_deriv,
    make_model,
    norm_weights,
    validate,
)
from .resolvent import ResolventReport, dissipativity_check, omega_min, solve_resolvent
from .spectral import (
    SpectralResult,
    aeg_diagnostic,
    growth_rate_from_trajectory,
    irreducibility_check,
    spectral_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryConstants",
    "Constant",
    "ConstantKernel",
    "GeneratorMatrix",
    "Grid",
    "GridKernel",
    "Model",
    "NormWeights",
    "Polynomial",
    "ResolventReport",
    "SeparableKernel",
    "SpectralResult",
    "Table",
    "Trajectory",
    "aeg_diagnostic",
    "apply_generator",
    "assemble_generator",
    "birth_death_rates",
    "build_grid",
    "conservative_constants",
    "dissipativity_check",
    "evaluate",
    "evaluate_deriv",
    "growth_rate_from_trajectory",
    "irreducibility_check",
    "make_model",
    "norm_weights",
    "omega_min",
    "simulate",
    "solve_resolvent",
    "spectral_bound",
    "step_crank_nicolson",
    "step_implicit_euler",
    "total_mass",
    "validate",
    "weighted_norm",
]
