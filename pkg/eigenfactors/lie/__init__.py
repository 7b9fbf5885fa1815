from .se3 import (
    adjoint,
    d2exp_at_zero,
    dexp_at_zero,
    exp,
    from_quaternion,
    generators,
    hat,
    inverse,
    is_valid_pose,
    log,
    retract,
    rotation_angle,
    to_quaternion,
)

__all__ = [
    "adjoint",
    "d2exp_at_zero",
    "dexp_at_zero",
    "exp",
    "from_quaternion",
    "generators",
    "hat",
    "inverse",
    "is_valid_pose",
    "log",
    "retract",
    "rotation_angle",
    "to_quaternion",
]
