"""Rotationally symmetric Yamabe flow on hyperbolic space H^m.

Subpackages by layer: :mod:`geometry` (radial operators), :mod:`conformal`
(conformal factors and curvature), :mod:`solver` (Dirichlet problems on balls
and the exhaustion run), :mod:`bounds` (barriers, constants and checks) and
:mod:`harness` (scenarios, CSV and report output).
"""

from .bounds import (
    J_functional,
    SubsolutionParams,
    coupled_barrier_run,
    fast_diffusion_solve,
    lemma1_check,
    lemma3_check,
    lemma3_lambda,
    lemma5_check,
    lemma5_constant,
    lemma6_check,
    lemma7_check,
    lemma7_cutoff_constant,
    minimax_lower,
    rigidity_oracle,
    smoothstep_power_cutoff,
    subsolution_V,
    subsolution_inequality_check,
    theorem2_cutoff_check,
)
from .conformal import euclidean_factor, from_U, pressure, scalar_curvature, to_U
from .errors import (
    ConfigurationError,
    DomainError,
    ExtinctionError,
    FatalInstabilityError,
    NumericalError,
    PreconditionError,
    StabilityError,
    YFlowError,
)
from .geometry import (
    Dimension,
    RadialField,
    RadialGrid,
    gradient_radial,
    integrate_radial,
    laplacian_radial,
)
from .harness import emit_csv, emit_report, load_config, run_scenario, validate_config
from .solver import (
    DirichletProblem,
    FlowState,
    Trajectory,
    boundary_value,
    build_initial_data,
    exhaustion_run,
    rhs_divergence_form,
    rhs_pressure,
    rhs_u,
    rhs_U,
    solve_dirichlet,
    step,
)

__version__ = "0.1.0"
