from eigenfactors.checks.bench import (
    ACCURACY_SWEEPS,
    SWEEPS,
    run_accuracy_sweep,
    run_sweep,
    time_iterations,
)
from eigenfactors.checks.derivatives import (
    CheckConfig,
    block_diagonal_check,
    centered_gradient_check,
    gradient_check,
    hessian_check,
    random_state,
    run_all,
)

__all__ = [
    "ACCURACY_SWEEPS",
    "CheckConfig",
    "SWEEPS",
    "block_diagonal_check",
    "centered_gradient_check",
    "gradient_check",
    "hessian_check",
    "random_state",
    "run_accuracy_sweep",
    "run_all",
    "run_sweep",
    "time_iterations",
]
