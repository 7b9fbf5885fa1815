"""No-reference map quality: Mean Map Entropy and Mean Plane Variance.

Both metrics look at the covariance of each point's radius neighbourhood in
the aggregated map. Points with fewer than ``min_neighbors`` neighbours
(the point itself included) do not contribute.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from eigenfactors.errors import InvalidArgumentError, MetricUndefinedError
from eigenfactors.models import Dataset, MapMetrics
from eigenfactors.utils import thread_count

logger = logging.getLogger(__name__)

Array = np.ndarray

DEFAULT_RADIUS = 0.3
MIN_NEIGHBORS = 5


@dataclass
class _Neighborhoods:
    counts: Array
    eigvals: Array  # (P, 3) ascending; the smallest is the out-of-plane variance


def aggregate_map(dataset: Dataset, trajectory: Sequence[Array]) -> Array:
    """All local clouds mapped into the global frame by ``trajectory``, stacked."""
    if len(trajectory) != len(dataset.clouds):
        raise InvalidArgumentError(
            f"{len(trajectory)} poses for {len(dataset.clouds)} clouds"
        )
    parts = []
    for T, cloud in zip(trajectory, dataset.clouds):
        M = np.asarray(T, dtype=float)
        parts.append(cloud.points @ M[:3, :3].T + M[:3, 3])
    if not parts:
        return np.zeros((0, 3))
    return np.vstack(parts)


def _neighborhoods(cloud: Array, radius: float) -> _Neighborhoods:
    P = np.asarray(cloud, dtype=float)
    if not radius > 0:
        raise InvalidArgumentError("radius must be positive")
    if P.ndim != 2 or P.shape[1] != 3:
        raise InvalidArgumentError(f"cloud must be (P, 3), got {P.shape}")
    if P.shape[0] == 0:
        raise MetricUndefinedError("cloud is empty")

    tree = cKDTree(P)
    lists = tree.query_ball_point(P, radius, workers=thread_count())
    counts = np.fromiter((len(idx) for idx in lists), dtype=np.intp, count=len(lists))
    flat = np.concatenate([np.asarray(idx, dtype=np.intp) for idx in lists])
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    owner = np.repeat(np.arange(P.shape[0]), counts)

    # two passes: local means first, then deviations from them
    mean = np.add.reduceat(P[flat], starts, axis=0) / counts[:, None]
    X = P[flat] - mean[owner]
    ddof = np.maximum(counts - 1, 1)[:, None, None]
    cov = np.add.reduceat(X[:, :, None] * X[:, None, :], starts, axis=0) / ddof
    w, V = np.linalg.eigh(cov)
    # the least variance is re-measured along its eigenvector, which stays
    # accurate when it is many orders below the in-plane spread
    normal = V[:, :, 0]
    along = np.einsum("ka,ka->k", X, normal[owner])
    w[:, 0] = np.add.reduceat(along * along, starts) / ddof[:, 0, 0]
    return _Neighborhoods(counts=counts, eigvals=w)


def _entropy(hood: _Neighborhoods, min_neighbors: int) -> tuple[float, float]:
    det = np.prod(hood.eigvals, axis=1)
    valid = (hood.counts >= min_neighbors) & (det > 0.0)
    fraction = float(valid.mean())
    if not valid.any():
        raise MetricUndefinedError("no point has a non-singular neighbourhood")
    h = 0.5 * np.log((2.0 * math.pi * math.e) ** 3 * det[valid])
    return float(h.mean()), fraction


def _plane_variance(hood: _Neighborhoods, min_neighbors: int) -> tuple[float, float]:
    valid = hood.counts >= min_neighbors
    fraction = float(valid.mean())
    if not valid.any():
        raise MetricUndefinedError(f"no point has {min_neighbors} neighbours")
    sigma = np.sqrt(np.clip(hood.eigvals[valid, 0], 0.0, None))
    return float(sigma.mean()), fraction


def mme(cloud: Array, radius: float = DEFAULT_RADIUS, min_neighbors: int = MIN_NEIGHBORS) -> MapMetrics:
    """Mean differential entropy of the local Gaussian, ``1/2 ln((2 pi e)^3 det C)``."""
    value, fraction = _entropy(_neighborhoods(cloud, radius), min_neighbors)
    return MapMetrics(mme=value, mpv=math.nan, neighborhood_radius=radius, valid_point_fraction=fraction)


def mpv(cloud: Array, radius: float = DEFAULT_RADIUS, min_neighbors: int = MIN_NEIGHBORS) -> MapMetrics:
    """Mean standard deviation along the local normal."""
    value, fraction = _plane_variance(_neighborhoods(cloud, radius), min_neighbors)
    return MapMetrics(mme=math.nan, mpv=value, neighborhood_radius=radius, valid_point_fraction=fraction)


def map_metrics(
    cloud: Array, radius: float = DEFAULT_RADIUS, min_neighbors: int = MIN_NEIGHBORS
) -> MapMetrics:
    """MME and MPV from a single neighbourhood pass."""
    hood = _neighborhoods(cloud, radius)
    entropy, fraction = _entropy(hood, min_neighbors)
    variance, _ = _plane_variance(hood, min_neighbors)
    if fraction < 0.5:
        logger.warning("only %.0f%% of points have usable neighbourhoods", 100 * fraction)
    return MapMetrics(
        mme=entropy, mpv=variance, neighborhood_radius=radius, valid_point_fraction=fraction
    )
