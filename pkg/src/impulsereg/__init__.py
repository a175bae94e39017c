"""L1-fidelity Tikhonov regularization for exponentially ill-posed problems."""

from .spectral import (
    Grid,
    Manifold,
    SpectralFunction,
    analyze,
    circle_grid,
    interval_grid,
    kernel_sup_bound,
    legendre_eval,
    project,
    sphere_grid,
    synthesize,
)
from .analytic import (
    InterpProfile,
    LinearIndex,
    PowerLogIndex,
    WeightFunction,
    anorm,
    fenchel_conjugate,
    gradiometry_weight,
    heat_weight,
    indicator_weight,
    interp_check,
    interp_profile,
    phi_p,
    psi,
)
from .operators import (
    DiagonalOperator,
    SourceElement,
    adjoint_apply,
    apply,
    gradiometry_operator,
    heat_operator,
    make_source,
)
from .noise import NoiseInstance, make_impulsive, measure
from .solver import (
    SolveResult,
    TikhonovProblem,
    bregman,
    choose_alpha_gradiometry,
    choose_alpha_heat,
    energy_bound_check,
    solve_l1,
    solve_l2,
    vsc_check,
)
from .harness import ExperimentConfig, RateRow, emit_csv, run_interp_study, run_rate_study

__version__ = "0.1.0"
