"""Plane algebra on homogeneous summation matrices.

A plane is ``pi = [eta, d]`` with unit normal ``eta`` and the constraint
``pi^T p~ = 0``. Points observed from one pose are folded into a 4x4
summation matrix ``S = sum p~ p~^T`` once; every later cost evaluation only
touches these 4x4 blocks.
"""
from __future__ import annotations

from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from eigenfactors.errors import DegeneratePlaneError, InvalidArgumentError
from eigenfactors.geometry.eigen import eigen_sym4
from eigenfactors.lie.se3 import inverse
from eigenfactors.models import Plane, PlaneFit, QMatrix, SummationMatrix

DEGENERATE_NORMAL = 1e-8
EIGEN_GAP = 1e-12
ZERO_OFFSET = 1e-12

PointsLike = Union[ArrayLike, Iterable[ArrayLike]]


def _homogeneous(points: PointsLike) -> NDArray[np.float64]:
    arr = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 4))
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] not in (3, 4):
        raise InvalidArgumentError(f"points must be (N, 3) or (N, 4), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("points have non-finite entries")
    if arr.shape[1] == 3:
        return np.hstack([arr, np.ones((arr.shape[0], 1))])
    if not np.all(arr[:, 3] == 1.0):
        raise InvalidArgumentError("homogeneous points must have fourth component 1")
    return arr


def s_accumulate(points: PointsLike) -> SummationMatrix:
    """Sum of outer products of homogeneous points."""
    P = _homogeneous(points)
    S = P.T @ P
    S = 0.5 * (S + S.T)
    S[3, 3] = float(P.shape[0])
    return SummationMatrix(S=S, count=int(P.shape[0]))


def s_transform(S: SummationMatrix, T: ArrayLike) -> SummationMatrix:
    """Express a summation matrix in another frame: ``T S T^T``."""
    M = np.asarray(T, dtype=float)
    out = M @ S.S @ M.T
    out = 0.5 * (out + out.T)
    out[3, 3] = float(S.count)
    return SummationMatrix(S=out, count=S.count)


def q_assemble(trajectory: Sequence[ArrayLike], s_blocks: Sequence[SummationMatrix]) -> QMatrix:
    """``Q = sum_t T_t S_t T_t^T``, recomputed from the stored blocks."""
    if len(trajectory) != len(s_blocks):
        raise InvalidArgumentError(
            f"{len(trajectory)} poses but {len(s_blocks)} summation blocks"
        )
    Q = np.zeros((4, 4))
    count = 0
    for T, S in zip(trajectory, s_blocks):
        Q += s_transform(S, T).S
        count += S.count
    Q[3, 3] = float(count)
    return QMatrix(Q=Q)


def _oriented(eta: NDArray[np.float64], d: float) -> Tuple[NDArray[np.float64], float]:
    if abs(d) < ZERO_OFFSET:
        nonzero = np.flatnonzero(np.abs(eta) > ZERO_OFFSET)
        if nonzero.size and eta[nonzero[0]] < 0.0:
            return -eta, -d
        return eta, d
    if d < 0.0:
        return -eta, -d
    return eta, d


def plane_from_vector(pi: ArrayLike) -> Plane:
    """Scale a homogeneous 4-vector so the normal is unit length."""
    v = np.asarray(pi, dtype=float)
    norm = float(np.linalg.norm(v[:3]))
    if norm < DEGENERATE_NORMAL:
        raise DegeneratePlaneError(f"normal part has norm {norm:.3e}; plane at infinity")
    eta, d = _oriented(v[:3] / norm, float(v[3]) / norm)
    return Plane(eta=eta, d=d)


def plane_from_q(Q: QMatrix) -> PlaneFit:
    """Closed-form plane from the minimum eigenvector of Q.

    ``pi = k v_min`` with ``k = 1/||v_min[:3]||`` and cost ``k^2 lambda_min``.
    """
    w, V = eigen_sym4(Q.Q)
    v = V[:, 0]
    norm = float(np.linalg.norm(v[:3]))
    if norm < DEGENERATE_NORMAL:
        raise DegeneratePlaneError(
            f"minimum eigenvector has normal norm {norm:.3e}; plane at infinity"
        )
    k = 1.0 / norm
    plane = plane_from_vector(v * k)
    cost = max(k * k * float(w[0]), 0.0)
    gap = float(w[1] - w[0])
    ill = gap <= EIGEN_GAP * max(1.0, abs(float(w[-1])))
    return PlaneFit(plane=plane, cost=cost, ill_conditioned=ill)


def plane_estimate_centered(points: ArrayLike) -> PlaneFit:
    """Plane through the centroid along the least-variance direction.

    The returned cost is the sum of squared point-to-plane distances.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3:
        raise InvalidArgumentError(f"points must be (N, 3), got {P.shape}")
    if P.shape[0] < 3:
        raise DegeneratePlaneError("at least three points are needed for a plane")
    mu = P.mean(axis=0)
    X = P - mu
    scatter = X.T @ X
    w, V = np.linalg.eigh(scatter)
    if w[1] <= EIGEN_GAP * max(float(np.trace(scatter)), np.finfo(float).tiny):
        raise DegeneratePlaneError("points are collinear or coincident")
    eta = V[:, 0]
    eta, d = _oriented(eta, -float(eta @ mu))
    return PlaneFit(plane=Plane(eta=eta, d=d), cost=max(float(w[0]), 0.0))


def center_transform(Q: QMatrix) -> Tuple[NDArray[np.float64], QMatrix]:
    """Translation that moves the data mean to the origin, and the centered Q.

    The centered matrix is block diagonal: ``[Q_p - q q^T / N, 0; 0, N]``.
    """
    N = Q.count
    if N < 1.0:
        raise InvalidArgumentError("cannot center a Q matrix without points")
    mu = Q.q / N
    Tc = np.eye(4)
    Tc[:3, 3] = -mu
    Qc = np.zeros((4, 4))
    block = Q.Q_p - np.outer(Q.q, Q.q) / N
    Qc[:3, :3] = 0.5 * (block + block.T)
    Qc[3, 3] = N
    return Tc, QMatrix(Q=Qc)


def plane_transform(plane: Plane, T: ArrayLike) -> Plane:
    """Plane expressed in the frame that ``T`` maps points into: ``T^-T pi``."""
    return plane_from_vector(inverse(T).T @ plane.vector)


def point_to_plane_sse(points: ArrayLike, plane: Plane) -> float:
    """Brute-force sum of squared point-to-plane distances."""
    P = np.asarray(points, dtype=float)
    residuals = P[:, :3] @ plane.eta + plane.d
    return float(residuals @ residuals)
