from eigenfactors.backend.derivatives import (
    centered_factor_gradient,
    dq_dxi,
    factor_derivatives,
    factor_gradient,
    factor_hessian_block,
)
from eigenfactors.backend.estimator import (
    CenteredEstimator,
    FactorEstimate,
    HomogeneousEstimator,
    PlaneEstimator,
    estimator_for,
)
from eigenfactors.backend.optimizer import (
    build_factors,
    build_problem,
    optimize,
    refresh,
    total_cost,
)
from eigenfactors.backend.probe import centered_hessian_error, centered_hessian_error_probe
from eigenfactors.backend.solver import apply_steps, assemble, newton_step

__all__ = [
    "CenteredEstimator",
    "FactorEstimate",
    "HomogeneousEstimator",
    "PlaneEstimator",
    "apply_steps",
    "assemble",
    "build_factors",
    "build_problem",
    "centered_factor_gradient",
    "centered_hessian_error",
    "centered_hessian_error_probe",
    "dq_dxi",
    "estimator_for",
    "factor_derivatives",
    "factor_gradient",
    "factor_hessian_block",
    "newton_step",
    "optimize",
    "refresh",
    "total_cost",
]
