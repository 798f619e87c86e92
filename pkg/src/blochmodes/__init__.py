"""Bloch-wave homogenization of one-dimensional periodic spectral problems."""

from __future__ import annotations

from .bloch_cell import (
    CellSpectrum,
    CouplingCoefficients,
    band_sweep,
    conjugate_spectrum,
    coupling,
    multiplicity_groups,
    solve_cell,
    uniform_k_grid,
)
from .coefficients import PROFILE_KINDS, CoefficientProfile
from .config import RunConfig, load_config
from .errors import (
    BlochModesError,
    ConfigError,
    DegenerateMacroModel,
    DegenerateNormalization,
    EmptySearch,
    InvalidCoefficient,
    InvalidSubsequence,
    InvalidWavenumber,
    MeshCellMismatch,
    MeshMismatch,
    NoPhysicalCounterpart,
    OutOfDomain,
    ParameterMismatch,
    PeriodicDegenerateMode,
    SolverFailure,
    UnderdeterminedBoundary,
)
from .fem1d import (
    Boundary,
    FEFunction,
    HermitianPencil,
    Mesh1D,
    assemble,
    evaluate,
    evaluate_derivative,
    h1_seminorm,
    interpolate,
    l2_inner,
    l2_norm,
    solve_pencil,
)
from .macro_solver import (
    AnalyticTwoScaleMode,
    EpsilonDecomposition,
    MacroSolution,
    analytic_two_scale_oracle,
    decompose_epsilon,
    degenerate_macro_solution,
    first_order_eigenvalue_0,
    first_order_eigenvalue_k,
    macro_eigenpair_0,
    macro_eigenpair_k,
    neumann_boundary_residual,
)
from .physical_spectrum import (
    PhysicalProblem,
    PhysicalSpectrum,
    gradient_bound_check,
    renormalized_eigenvalue,
    solve_physical,
)
from .pipelines import (
    ConvergenceReport,
    MatchReport,
    ModelingResult,
    SearchSpace,
    convergence_study,
    match_mode,
    modeling_band_scan,
    modeling_search,
    refinement_ratios,
    sweep_match,
)
from .two_scale import (
    TwoScaleField,
    TwoScaleMode,
    align,
    build_two_scale_mode,
    eval_quasiperiodic,
    residual_F,
    two_scale_transform,
)

__all__ = [
    "PROFILE_KINDS",
    "AnalyticTwoScaleMode",
    "BlochModesError",
    "Boundary",
    "CellSpectrum",
    "CoefficientProfile",
    "ConfigError",
    "ConvergenceReport",
    "CouplingCoefficients",
    "DegenerateMacroModel",
    "DegenerateNormalization",
    "EmptySearch",
    "EpsilonDecomposition",
    "FEFunction",
    "HermitianPencil",
    "InvalidCoefficient",
    "InvalidSubsequence",
    "InvalidWavenumber",
    "MacroSolution",
    "MatchReport",
    "Mesh1D",
    "MeshCellMismatch",
    "MeshMismatch",
    "ModelingResult",
    "NoPhysicalCounterpart",
    "OutOfDomain",
    "ParameterMismatch",
    "PeriodicDegenerateMode",
    "PhysicalProblem",
    "PhysicalSpectrum",
    "RunConfig",
    "SearchSpace",
    "SolverFailure",
    "TwoScaleField",
    "TwoScaleMode",
    "UnderdeterminedBoundary",
    "align",
    "analytic_two_scale_oracle",
    "assemble",
    "band_sweep",
    "build_two_scale_mode",
    "conjugate_spectrum",
    "convergence_study",
    "coupling",
    "decompose_epsilon",
    "degenerate_macro_solution",
    "eval_quasiperiodic",
    "evaluate",
    "evaluate_derivative",
    "first_order_eigenvalue_0",
    "first_order_eigenvalue_k",
    "gradient_bound_check",
    "h1_seminorm",
    "interpolate",
    "l2_inner",
    "l2_norm",
    "load_config",
    "macro_eigenpair_0",
    "macro_eigenpair_k",
    "match_mode",
    "modeling_band_scan",
    "modeling_search",
    "multiplicity_groups",
    "neumann_boundary_residual",
    "refinement_ratios",
    "renormalized_eigenvalue",
    "residual_F",
    "solve_cell",
    "solve_pencil",
    "solve_physical",
    "sweep_match",
    "two_scale_transform",
    "uniform_k_grid",
]
