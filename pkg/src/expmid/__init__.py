"""Exponential midpoint time integration with a posteriori error estimators."""

from .exceptions import (
    ConfigurationError,
    ConvergenceError,
    DataError,
    DimensionError,
    ExpMidError,
    OperatorError,
    RangeError,
)
from .operators import (
    DenseSpdOperator,
    DirichletLaplacian1D,
    SpdOperator,
    inner_h,
    norm_h,
    norm_v,
    norm_vstar,
)
from .phifun import PhiEvaluator, phi_scalar
from .integrators import (
    SemilinearConfig,
    TimeGrid,
    Trajectory,
    check_update_order,
    exp_quadrature_weights,
    run,
    step_linear,
    step_quadrature,
    step_semilinear,
)
from .problems import EXAMPLES, ProblemSpec, example1, example2, example3, example4
from .estimators import (
    GAUSS3,
    EstimatorReport,
    Quadrature3,
    accumulate_estimators,
    bounds_and_effectivity,
    build_report,
    error_metrics,
    interpolant,
    linear_optimal_bound,
    recon_minus_interp,
    reconstruction,
    residual_R,
    residual_Rb,
    residual_Rf,
    semilinear_bound,
    suboptimal_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "accumulate_estimators",
    "bounds_and_effectivity",
    "build_report",
    "check_update_order",
    "ConfigurationError",
    "ConvergenceError",
    "DataError",
    "DenseSpdOperator",
    "DimensionError",
    "DirichletLaplacian1D",
    "error_metrics",
    "EstimatorReport",
    "example1",
    "example2",
    "example3",
    "example4",
    "EXAMPLES",
    "exp_quadrature_weights",
    "ExpMidError",
    "GAUSS3",
    "inner_h",
    "interpolant",
    "linear_optimal_bound",
    "norm_h",
    "norm_v",
    "norm_vstar",
    "OperatorError",
    "phi_scalar",
    "PhiEvaluator",
    "ProblemSpec",
    "Quadrature3",
    "RangeError",
    "recon_minus_interp",
    "reconstruction",
    "residual_R",
    "residual_Rb",
    "residual_Rf",
    "run",
    "semilinear_bound",
    "SemilinearConfig",
    "SpdOperator",
    "step_linear",
    "step_quadrature",
    "step_semilinear",
    "suboptimal_bounds",
    "TimeGrid",
    "Trajectory",
]
