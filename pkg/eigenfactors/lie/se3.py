"""SE(3) algebra with rotation-first twists ``xi = [theta, rho]``.

All functions are pure and operate on plain ``numpy`` arrays: a twist is a
``(6,)`` float array, a pose a ``(4, 4)`` homogeneous matrix mapping local
points into the global frame. Perturbations are applied on the left,
``retract(T, xi) = exp(xi) @ T``.
"""
from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.transform import Rotation

from eigenfactors.errors import DomainError, InvalidArgumentError

Twist = NDArray[np.float64]
Pose = NDArray[np.float64]

SMALL_ANGLE = 1e-6
LOG_ANGLE_LIMIT = np.pi - 1e-6
POSE_TOLERANCE = 1e-9


def _build_generators() -> NDArray[np.float64]:
    G = np.zeros((6, 4, 4))
    # theta_1..3: so(3) skew blocks
    G[0, 2, 1], G[0, 1, 2] = 1.0, -1.0
    G[1, 0, 2], G[1, 2, 0] = 1.0, -1.0
    G[2, 1, 0], G[2, 0, 1] = 1.0, -1.0
    # rho_1..3: translation column
    G[3, 0, 3] = 1.0
    G[4, 1, 3] = 1.0
    G[5, 2, 3] = 1.0
    G.setflags(write=False)
    return G


GENERATORS = _build_generators()


def generators() -> NDArray[np.float64]:
    """Return a writable copy of the (6, 4, 4) generator basis G_1..G_6."""
    return GENERATORS.copy()


def _as_twist(xi: ArrayLike) -> Twist:
    arr = np.asarray(xi, dtype=float)
    if arr.shape != (6,):
        raise InvalidArgumentError(f"twist must have shape (6,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("twist has non-finite entries")
    return arr


def _skew(w: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def _check_index(i: int) -> int:
    if not isinstance(i, (int, np.integer)) or not 1 <= i <= 6:
        raise InvalidArgumentError(f"generator index must be in 1..6, got {i!r}")
    return int(i) - 1


def hat(xi: ArrayLike) -> NDArray[np.float64]:
    """Lie algebra matrix of a twist: sum_i G_i xi_i."""
    arr = _as_twist(xi)
    out = np.zeros((4, 4))
    out[:3, :3] = _skew(arr[:3])
    out[:3, 3] = arr[3:]
    return out


def _so3_coefficients(theta: float) -> tuple[float, float, float]:
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        return 1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0
    s, c = np.sin(theta), np.cos(theta)
    return s / theta, (1.0 - c) / theta**2, (theta - s) / theta**3


def exp(xi: ArrayLike) -> Pose:
    """Closed-form exponential map (Rodrigues rotation and SE(3) V matrix)."""
    arr = _as_twist(xi)
    w, rho = arr[:3], arr[3:]
    theta = float(np.linalg.norm(w))
    K = _skew(w)
    K2 = K @ K
    a, b, c = _so3_coefficients(theta)
    T = np.eye(4)
    T[:3, :3] = np.eye(3) + a * K + b * K2
    T[:3, 3] = (np.eye(3) + b * K + c * K2) @ rho
    return T


def rotation_angle(T: ArrayLike) -> float:
    """Rotation angle in radians of the rotation block, in [0, pi]."""
    R = np.asarray(T, dtype=float)[:3, :3]
    v = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return float(np.arctan2(0.5 * np.linalg.norm(v), 0.5 * (np.trace(R) - 1.0)))


def log(T: ArrayLike) -> Twist:
    """Inverse of :func:`exp`. Rotations at or near pi are rejected."""
    M = np.asarray(T, dtype=float)
    if M.shape != (4, 4) or not np.all(np.isfinite(M)):
        raise InvalidArgumentError("pose must be a finite 4x4 matrix")
    R, t = M[:3, :3], M[:3, 3]
    v = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    theta = rotation_angle(M)
    if theta >= LOG_ANGLE_LIMIT:
        raise DomainError(f"rotation angle {theta:.12f} too close to pi for log")
    if theta < SMALL_ANGLE:
        w = 0.5 * v
    else:
        w = theta * v / np.linalg.norm(v)
    K = _skew(w)
    if theta < SMALL_ANGLE:
        coeff = 1.0 / 12.0 + theta**2 / 720.0
    else:
        coeff = (1.0 - theta * np.sin(theta) / (2.0 * (1.0 - np.cos(theta)))) / theta**2
    V_inv = np.eye(3) - 0.5 * K + coeff * (K @ K)
    return np.concatenate([w, V_inv @ t])


def inverse(T: ArrayLike) -> Pose:
    M = np.asarray(T, dtype=float)
    R, t = M[:3, :3], M[:3, 3]
    out = np.eye(4)
    out[:3, :3] = R.T
    out[:3, 3] = -R.T @ t
    return out


def is_valid_pose(T: ArrayLike, tol: float = POSE_TOLERANCE) -> bool:
    M = np.asarray(T, dtype=float)
    if M.shape != (4, 4) or not np.all(np.isfinite(M)):
        return False
    R = M[:3, :3]
    if np.linalg.norm(R.T @ R - np.eye(3)) > tol:
        return False
    if abs(np.linalg.det(R) - 1.0) > tol:
        return False
    return bool(np.array_equal(M[3], [0.0, 0.0, 0.0, 1.0]))


def retract(T: ArrayLike, xi: ArrayLike) -> Pose:
    """Left retraction ``exp(xi) @ T``; ``retract(T, 0)`` returns ``T`` exactly."""
    arr = _as_twist(xi)
    M = np.asarray(T, dtype=float)
    if not np.any(arr):
        return M.copy()
    return exp(arr) @ M


def dexp_at_zero(i: int) -> NDArray[np.float64]:
    """First derivative of exp at 0 along coordinate ``i`` (1-indexed): G_i."""
    return GENERATORS[_check_index(i)].copy()


def d2exp_at_zero(i: int, j: int) -> NDArray[np.float64]:
    """Second derivative of exp at 0: (G_i G_j + G_j G_i) / 2."""
    Gi = GENERATORS[_check_index(i)]
    Gj = GENERATORS[_check_index(j)]
    return 0.5 * (Gi @ Gj + Gj @ Gi)


def adjoint(T: ArrayLike) -> NDArray[np.float64]:
    """6x6 adjoint so that ``T exp(xi) T^-1 = exp(adjoint(T) @ xi)``."""
    M = np.asarray(T, dtype=float)
    R, t = M[:3, :3], M[:3, 3]
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = R
    Ad[3:, 3:] = R
    Ad[3:, :3] = _skew(t) @ R
    return Ad


def to_quaternion(T: ArrayLike) -> NDArray[np.float64]:
    """Unit quaternion (qx, qy, qz, qw) of the rotation block."""
    quat = Rotation.from_matrix(np.asarray(T, dtype=float)[:3, :3]).as_quat()
    if quat[3] < 0.0:
        quat = -quat
    return quat


def from_quaternion(translation: ArrayLike, quat: ArrayLike) -> Pose:
    q = np.asarray(quat, dtype=float)
    norm = np.linalg.norm(q)
    if not np.isfinite(norm) or norm == 0.0:
        raise InvalidArgumentError("quaternion must be finite and non-zero")
    T = np.eye(4)
    T[:3, :3] = Rotation.from_quat(q / norm).as_matrix()
    T[:3, 3] = np.asarray(translation, dtype=float)
    return T
