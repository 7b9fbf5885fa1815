from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from eigenfactors.errors import DegeneratePlaneError
from eigenfactors.geometry.eigen import eigen_sym4
from eigenfactors.geometry.plane import (
    EIGEN_GAP,
    center_transform,
    plane_from_q,
    plane_from_vector,
)
from eigenfactors.models import EigenFactor, Plane, QMatrix

logger = logging.getLogger(__name__)

Array = np.ndarray


@dataclass(frozen=True)
class FactorEstimate:
    q: QMatrix
    plane: Plane
    lam: float
    center: Array
    ill_conditioned: bool
    key: int


def trajectory_key(trajectory: Sequence[Array], poses: Sequence[int]) -> int:
    return hash(tuple(np.asarray(trajectory[t], dtype=float).tobytes() for t in poses))


def pose_blocks(factor: EigenFactor, trajectory: Sequence[Array]) -> Array:
    """Transformed blocks ``T_t S_t T_t^T`` for the factor's poses, stacked."""
    poses = factor.poses
    T = np.stack([np.asarray(trajectory[t], dtype=float) for t in poses])
    S = np.stack([factor.s_blocks[t].S for t in poses])
    return T @ S @ np.swapaxes(T, 1, 2)


def assemble_q(factor: EigenFactor, trajectory: Sequence[Array]) -> QMatrix:
    Q = pose_blocks(factor, trajectory).sum(axis=0)
    Q = 0.5 * (Q + Q.T)
    Q[3, 3] = float(sum(block.count for block in factor.s_blocks.values()))
    return QMatrix(Q=Q)


class PlaneEstimator(ABC):
    @abstractmethod
    def fit(self, factor: EigenFactor, trajectory: Sequence[Array]) -> FactorEstimate:
        raise NotImplementedError

    def estimate(self, factor: EigenFactor, trajectory: Sequence[Array]) -> FactorEstimate:
        """Fit and store the estimate on the factor."""
        result = self.fit(factor, trajectory)
        factor.q = result.q
        factor.plane = result.plane
        factor.lam = result.lam
        factor.center = result.center
        factor.ill_conditioned = result.ill_conditioned
        factor.estimate_key = result.key
        if result.ill_conditioned:
            logger.warning("factor %d: minimum eigenvalue is not simple", factor.id)
        return result


class HomogeneousEstimator(PlaneEstimator):
    """Plane from the minimum eigenvector of Q itself."""

    def fit(self, factor: EigenFactor, trajectory: Sequence[Array]) -> FactorEstimate:
        q = assemble_q(factor, trajectory)
        fit = plane_from_q(q)
        return FactorEstimate(
            q=q,
            plane=fit.plane,
            lam=fit.cost,
            center=np.eye(4),
            ill_conditioned=fit.ill_conditioned,
            key=trajectory_key(trajectory, factor.poses),
        )


class CenteredEstimator(PlaneEstimator):
    """Plane from the eigendecomposition of ``T_c Q T_c^T``.

    After centering, Q is block diagonal, so the plane is ``[eta, 0]`` with
    ``eta`` the least eigenvector of the scaled covariance block and the cost
    its eigenvalue.
    """

    def fit(self, factor: EigenFactor, trajectory: Sequence[Array]) -> FactorEstimate:
        q = assemble_q(factor, trajectory)
        Tc, qc = center_transform(q)
        w, V = eigen_sym4(qc.Q)
        normal_like = [k for k in range(4) if abs(V[3, k]) < 0.5]
        if not normal_like:
            raise DegeneratePlaneError(f"factor {factor.id}: no normal-type eigenvector")
        k = normal_like[0]
        eta = V[:3, k] / np.linalg.norm(V[:3, k])
        centered_plane = np.append(eta, 0.0)
        plane = plane_from_vector(Tc.T @ centered_plane)
        ill = False
        if len(normal_like) > 1:
            gap = float(w[normal_like[1]] - w[k])
            ill = gap <= EIGEN_GAP * max(1.0, float(np.max(np.abs(w))))
        return FactorEstimate(
            q=q,
            plane=plane,
            lam=max(float(w[k]), 0.0),
            center=Tc,
            ill_conditioned=ill,
            key=trajectory_key(trajectory, factor.poses),
        )


_HOMOGENEOUS = HomogeneousEstimator()
_CENTERED = CenteredEstimator()


def estimator_for(factor: EigenFactor) -> PlaneEstimator:
    return _CENTERED if factor.centered else _HOMOGENEOUS


def centered_plane(factor: EigenFactor) -> Optional[Array]:
    """The factor's plane expressed in its centered frame, ``T_c^-T pi``."""
    if factor.plane is None or factor.center is None:
        return None
    Tc_inv_T = np.eye(4)
    Tc_inv_T[3, :3] = -factor.center[:3, 3]
    return Tc_inv_T @ factor.plane.vector
