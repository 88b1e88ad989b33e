"""Finite-difference solver and diagnostics for coupled nonlinear Schrodinger equations."""

from .analysis import (
    DEFAULT_RHO_TAU_THRESHOLD,
    ElementBounds,
    ErrorNorms,
    StabilityBudget,
    convergence_q,
    element_bounds,
    error_vs_oracle,
    manakov_required_k,
    manakov_soliton,
    matrix_norm_bound,
    nls_breather_a2,
    nls_fundamental_soliton,
    sech,
    stability_budget,
    stability_rho,
)
from .errors import (
    BlowUpError,
    CnlseError,
    ConfigError,
    InvalidStateError,
    IterationFailureError,
    SolverError,
    UnsupportedParametersError,
)
from .field import (
    FieldState,
    Grid,
    InvariantPair,
    Physics,
    discrete_l2_norm,
    invariants,
    max_amplitude,
)
from .run import RunRecord, Termination, evolve
from .scenarios import (
    PRESET_NAMES,
    InitialCondition,
    Scenario,
    load_scenario,
    oracle_field,
    preset,
    run_scenario,
    sample_ic,
    serialize_scenario,
    stability_sweep,
    validate_scenario,
)
from .schemes import (
    IterationPolicy,
    StepReport,
    explicit_step,
    implicit_step,
    solve_tridiagonal,
)

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "CnlseError",
    "ConfigError",
    "DEFAULT_RHO_TAU_THRESHOLD",
    "ElementBounds",
    "ErrorNorms",
    "FieldState",
    "Grid",
    "InitialCondition",
    "InvalidStateError",
    "InvariantPair",
    "IterationFailureError",
    "IterationPolicy",
    "PRESET_NAMES",
    "Physics",
    "RunRecord",
    "Scenario",
    "SolverError",
    "StabilityBudget",
    "StepReport",
    "Termination",
    "UnsupportedParametersError",
    "convergence_q",
    "discrete_l2_norm",
    "element_bounds",
    "error_vs_oracle",
    "evolve",
    "explicit_step",
    "implicit_step",
    "invariants",
    "load_scenario",
    "manakov_required_k",
    "manakov_soliton",
    "matrix_norm_bound",
    "max_amplitude",
    "nls_breather_a2",
    "nls_fundamental_soliton",
    "oracle_field",
    "preset",
    "run_scenario",
    "sample_ic",
    "sech",
    "serialize_scenario",
    "solve_tridiagonal",
    "stability_budget",
    "stability_rho",
    "stability_sweep",
    "validate_scenario",
]
