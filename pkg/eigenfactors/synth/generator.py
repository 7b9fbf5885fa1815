"""Seeded synthetic plane worlds.

Every random quantity has its own PCG64 stream derived from the world seed
with a fixed spawn key, so a (plane, pose) point set does not depend on how
many other planes or poses were drawn before it:

    (0,)            trajectory random walk
    (1,)            plane parameters
    (2, plane, pose) points of one plane seen from one pose
    (3,)            trajectory perturbation
"""
from __future__ import annotations

import logging
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from eigenfactors.errors import InvalidArgumentError
from eigenfactors.geometry.plane import plane_from_vector, s_accumulate
from eigenfactors.lie.se3 import exp, inverse
from eigenfactors.models import (
    Dataset,
    EigenFactor,
    OptimizerConfig,
    Plane,
    PoseCloud,
    Problem,
    SummationMatrix,
    WorldSpec,
)

logger = logging.getLogger(__name__)

Array = np.ndarray

NOISE_TRUNCATION = 4.0

_TRAJECTORY, _PLANES, _POINTS, _PERTURB = 0, 1, 2, 3


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _unit(rng: np.random.Generator) -> Array:
    while True:
        v = rng.standard_normal(3)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


def truncated_normal(rng: np.random.Generator, sigma: float, size: int) -> Array:
    """Gaussian samples with everything beyond 4 sigma redrawn."""
    if sigma == 0.0:
        return np.zeros(size)
    out = rng.normal(0.0, sigma, size)
    bad = np.abs(out) > NOISE_TRUNCATION * sigma
    while bad.any():
        out[bad] = rng.normal(0.0, sigma, int(bad.sum()))
        bad = np.abs(out) > NOISE_TRUNCATION * sigma
    return out


def random_walk(spec: WorldSpec) -> List[Array]:
    """``T_0 = I`` and ``T_{k+1} = T_k exp(delta_k)`` with small Gaussian twists."""
    rng = _rng(spec.seed, _TRAJECTORY)
    rot_std = np.deg2rad(spec.step_rot)
    trajectory = [np.eye(4)]
    for _ in range(spec.n_poses - 1):
        delta = np.concatenate(
            [rng.normal(0.0, rot_std, 3), rng.normal(0.0, spec.step_trans, 3)]
        )
        trajectory.append(trajectory[-1] @ exp(delta))
    return trajectory


def random_planes(spec: WorldSpec) -> List[Plane]:
    rng = _rng(spec.seed, _PLANES)
    planes = []
    for _ in range(spec.n_planes):
        eta = _unit(rng)
        d = rng.uniform(-spec.scene_radius, spec.scene_radius)
        planes.append(plane_from_vector(np.append(eta, d)))
    return planes


def _patch_basis(eta: Array) -> Tuple[Array, Array]:
    helper = np.eye(3)[int(np.argmin(np.abs(eta)))]
    u = np.cross(eta, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(eta, u)


def sample_patch(spec: WorldSpec, plane: Plane, plane_id: int, pose: int) -> Array:
    """Global-frame points of one plane as seen from one pose, (N, 3)."""
    rng = _rng(spec.seed, _POINTS, plane_id, pose)
    N = spec.points_per_plane
    u, v = _patch_basis(plane.eta)
    ab = rng.uniform(-spec.patch_half_side, spec.patch_half_side, (N, 2))
    offset = truncated_normal(rng, spec.point_noise_sigma, N)
    center = -plane.d * plane.eta
    return center + ab[:, :1] * u + ab[:, 1:] * v + offset[:, None] * plane.eta


def _to_local(points: Array, T: Array) -> Array:
    Ti = inverse(T)
    return points @ Ti[:3, :3].T + Ti[:3, 3]


def perturbation_twists(
    n_poses: int, trans_mag: float, rot_mag: float, seed: int, anchor: int = 0
) -> List[Array]:
    """Twists with rotation angle exactly ``rot_mag`` degrees and translation norm ``trans_mag``."""
    if trans_mag < 0 or rot_mag < 0:
        raise InvalidArgumentError("perturbation magnitudes must be non-negative")
    rng = _rng(seed, _PERTURB)
    twists = []
    for t in range(n_poses):
        axis, direction = _unit(rng), _unit(rng)
        if t == anchor:
            twists.append(np.zeros(6))
            continue
        twists.append(np.concatenate([np.deg2rad(rot_mag) * axis, trans_mag * direction]))
    return twists


def perturb(
    trajectory: Sequence[Array],
    trans_mag: float,
    rot_mag: float,
    seed: int,
    anchor: int = 0,
) -> List[Array]:
    """Left-multiply every pose except the anchor by a fixed-magnitude random twist."""
    twists = perturbation_twists(len(trajectory), trans_mag, rot_mag, seed, anchor)
    out = []
    for T, xi in zip(trajectory, twists):
        M = np.array(T, dtype=float)
        out.append(M if not np.any(xi) else exp(xi) @ M)
    return out


def generate(spec: WorldSpec) -> Dataset:
    gt = random_walk(spec)
    planes = random_planes(spec)
    clouds = []
    for t, T in enumerate(gt):
        points = [
            _to_local(sample_patch(spec, plane, m, t), T) for m, plane in enumerate(planes)
        ]
        labels = np.repeat(np.arange(spec.n_planes), spec.points_per_plane)
        clouds.append(PoseCloud(points=np.vstack(points), labels=labels))
    initial = perturb(gt, spec.perturb_trans, spec.perturb_rot, spec.seed)
    logger.debug(
        "generated %d poses, %d planes, %d points per plane (seed %d)",
        spec.n_poses, spec.n_planes, spec.points_per_plane, spec.seed,
    )
    return Dataset(
        spec=spec,
        gt_trajectory=gt,
        planes_gt=planes,
        clouds=clouds,
        initial_trajectory=initial,
    )


def iter_summation_blocks(
    spec: WorldSpec, gt: Optional[Sequence[Array]] = None
) -> Iterator[Tuple[int, int, SummationMatrix]]:
    """``(plane, pose, S)`` for the same world :func:`generate` builds, one patch at a time."""
    gt = random_walk(spec) if gt is None else gt
    for m, plane in enumerate(random_planes(spec)):
        for t, T in enumerate(gt):
            yield m, t, s_accumulate(_to_local(sample_patch(spec, plane, m, t), T))


def streamed_problem(spec: WorldSpec, config: Optional[OptimizerConfig] = None) -> Problem:
    """A problem at the perturbed trajectory without ever holding all points."""
    config = config or OptimizerConfig()
    gt = random_walk(spec)
    blocks: dict = {}
    for m, t, S in iter_summation_blocks(spec, gt):
        blocks.setdefault(m, {})[t] = S
    factors = [
        EigenFactor(id=m, s_blocks=per_pose, centered=config.mode == "centered")
        for m, per_pose in sorted(blocks.items())
    ]
    initial = perturb(gt, spec.perturb_trans, spec.perturb_rot, spec.seed)
    return Problem(trajectory=initial, factors=factors, config=config)
