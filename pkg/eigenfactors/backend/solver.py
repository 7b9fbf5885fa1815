from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np

from eigenfactors.backend.derivatives import factor_derivatives
from eigenfactors.errors import InvalidArgumentError, NotPositiveDefiniteError
from eigenfactors.lie.se3 import inverse, retract
from eigenfactors.models import GradientAndHessian, Problem

Array = np.ndarray


def assemble(
    problem: Problem,
    fix_anchor: bool = True,
    gens: Optional[Array] = None,
) -> GradientAndHessian:
    """Sum factor gradients and 6x6 blocks over the trajectory.

    Factors without a current plane (degenerate this iteration) are skipped.
    With ``fix_anchor`` the anchor's gradient is zeroed and its block set to
    the identity.
    """
    H = problem.n_poses
    grad = np.zeros(6 * H)
    blocks = np.zeros((H, 6, 6))
    for factor in problem.factors:
        if factor.plane is None:
            continue
        grads, hess = factor_derivatives(factor, problem.trajectory, gens)
        for k, t in enumerate(factor.poses):
            grad[6 * t : 6 * t + 6] += grads[k]
            blocks[t] += hess[k]
    if fix_anchor:
        a = problem.anchor
        grad[6 * a : 6 * a + 6] = 0.0
        blocks[a] = np.eye(6)
    return GradientAndHessian(grad=grad, hess_blocks=blocks)


def newton_step(
    gh: GradientAndHessian,
    damping: float,
    step_scale: float = 1.0,
) -> List[Array]:
    """Independent damped Newton solve per pose block.

    Raises :class:`NotPositiveDefiniteError` when a damped block has no
    Cholesky factor; the caller is expected to raise the damping and retry.
    """
    if damping < 0:
        raise InvalidArgumentError("damping must be non-negative")
    H = gh.n_poses
    A = gh.hess_blocks + damping * np.eye(6)
    g = gh.grad.reshape(H, 6)
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"damped block not positive definite at damping {damping:g}") from exc
    steps = -step_scale * np.linalg.solve(A, g[..., None])[..., 0]
    steps[~np.any(g, axis=1)] = 0.0
    return [steps[t] for t in range(H)]


def apply_steps(
    trajectory: Sequence[Array],
    steps: Sequence[Array],
    anchor: int,
    reanchor: bool,
) -> List[Array]:
    """Retract every pose by its step, all at once.

    With ``reanchor`` the whole updated trajectory is moved by the common
    transform that restores the anchor pose, which leaves the cost unchanged.
    """
    updated = [retract(T, xi) for T, xi in zip(trajectory, steps)]
    if reanchor:
        W = np.asarray(trajectory[anchor]) @ inverse(updated[anchor])
        updated = [W @ T for T in updated]
        updated[anchor] = np.array(trajectory[anchor], dtype=float)
    return updated
