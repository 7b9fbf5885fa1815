"""Analytic gradient and Hessian blocks of one eigen-factor.

For a pose block ``Q_t = T_t S_t T_t^T`` and the current plane ``pi``:

    g_i  = pi^T (G_i Q_t + Q_t G_i^T) pi
    H_ij = pi^T (B_ij + B_ij^T) pi,   B_ij = (G_i G_j + G_j G_i) Q_t / 2 + G_i Q_t G_j^T

The plane is held fixed while differentiating. Blocks of different poses
never interact, so only the 6x6 diagonal blocks are formed.
"""
from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from eigenfactors.backend.estimator import centered_plane, pose_blocks, trajectory_key
from eigenfactors.errors import InvalidArgumentError, StaleEstimateError
from eigenfactors.lie.se3 import GENERATORS, inverse
from eigenfactors.models import EigenFactor

Array = np.ndarray


def _gens(gens: Optional[Array]) -> Array:
    return GENERATORS if gens is None else np.asarray(gens, dtype=float)


def dq_dxi(Q_t: Array, i: int, gens: Optional[Array] = None) -> Array:
    """Derivative of ``exp(xi) Q_t exp(xi)^T`` at zero along coordinate ``i`` (1..6)."""
    if not 1 <= i <= 6:
        raise InvalidArgumentError(f"coordinate index must be in 1..6, got {i}")
    Gi = _gens(gens)[i - 1]
    Q = np.asarray(Q_t, dtype=float)
    return Gi @ Q + Q @ Gi.T


def _check_fresh(factor: EigenFactor, trajectory: Sequence[Array]) -> None:
    if factor.plane is None or factor.estimate_key != trajectory_key(trajectory, factor.poses):
        raise StaleEstimateError(
            f"factor {factor.id}: plane was not estimated for this trajectory"
        )


def _frame(
    factor: EigenFactor, trajectory: Sequence[Array], gens: Array, centered: bool
) -> Tuple[Array, Array, Array]:
    Qts = pose_blocks(factor, trajectory)
    if not centered:
        return gens, Qts, factor.plane.vector
    Tc = factor.center
    conj_gens = Tc @ gens @ inverse(Tc)
    return conj_gens, Tc @ Qts @ Tc.T, centered_plane(factor)


def local_derivatives(gens: Array, Qts: Array, pi: Array) -> Tuple[Array, Array]:
    """Per-pose gradients (K, 6) and Hessian blocks (K, 6, 6) for stacked ``Qts``."""
    U = np.einsum("irk,r->ik", gens, pi)
    W = Qts @ pi
    grads = 2.0 * W @ U.T
    GW = np.einsum("jab,kb->kja", gens, W)
    M = np.einsum("ia,kja->kij", U, GW)
    UQU = U @ Qts @ U.T
    hess = 2.0 * UQU + M + np.swapaxes(M, 1, 2)
    return grads, 0.5 * (hess + np.swapaxes(hess, 1, 2))


def _scatter(factor: EigenFactor, n_poses: int, grads: Array) -> Array:
    out = np.zeros(6 * n_poses)
    for k, t in enumerate(factor.poses):
        out[6 * t : 6 * t + 6] = grads[k]
    return out


def factor_gradient(
    factor: EigenFactor, trajectory: Sequence[Array], gens: Optional[Array] = None
) -> Array:
    """Gradient over the whole trajectory (6H), zero at poses not observing the plane."""
    _check_fresh(factor, trajectory)
    G, Qts, pi = _frame(factor, trajectory, _gens(gens), centered=False)
    grads, _ = local_derivatives(G, Qts, pi)
    return _scatter(factor, len(trajectory), grads)


def centered_factor_gradient(
    factor: EigenFactor, trajectory: Sequence[Array], gens: Optional[Array] = None
) -> Array:
    """Gradient evaluated in the centered frame, ``c_pi^T T_c dQ T_c^T c_pi``."""
    if not factor.centered:
        raise InvalidArgumentError(f"factor {factor.id} is not in centered mode")
    _check_fresh(factor, trajectory)
    G, Qts, pi = _frame(factor, trajectory, _gens(gens), centered=True)
    grads, _ = local_derivatives(G, Qts, pi)
    return _scatter(factor, len(trajectory), grads)


def factor_hessian_block(
    factor: EigenFactor,
    trajectory: Sequence[Array],
    t: int,
    gens: Optional[Array] = None,
) -> Array:
    """6x6 Hessian block of pose ``t`` (zero when ``t`` does not observe the plane)."""
    _check_fresh(factor, trajectory)
    if t not in factor.s_blocks:
        return np.zeros((6, 6))
    G, Qts, pi = _frame(factor, trajectory, _gens(gens), centered=factor.centered)
    _, hess = local_derivatives(G, Qts, pi)
    return hess[factor.poses.index(t)]


def factor_derivatives(
    factor: EigenFactor, trajectory: Sequence[Array], gens: Optional[Array] = None
) -> Tuple[Array, Array]:
    """Gradient and Hessian blocks in the factor's own frame, stacked per observing pose."""
    _check_fresh(factor, trajectory)
    G, Qts, pi = _frame(factor, trajectory, _gens(gens), centered=factor.centered)
    return local_derivatives(G, Qts, pi)
