"""Finite-difference oracles for the analytic factor derivatives.

Every check draws fresh random problem states (a perturbed synthetic world
per trial), compares analytic values with central differences, and reports
the worst relative error as a :class:`DerivativeCheck`.

Frozen-plane costs are evaluated in the factor's centered coordinates.
The function is the same as in world coordinates, but the matrices are
small there, which keeps the four-point differences clear of roundoff.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from eigenfactors.backend.derivatives import (
    centered_factor_gradient,
    factor_derivatives,
    factor_gradient,
)
from eigenfactors.backend.estimator import pose_blocks
from eigenfactors.backend.optimizer import build_problem, refresh
from eigenfactors.backend.probe import moved_blocks, twist_perturbations
from eigenfactors.geometry.plane import center_transform
from eigenfactors.lie.se3 import inverse
from eigenfactors.models import (
    DerivativeCheck,
    EigenFactor,
    OptimizerConfig,
    Problem,
    QMatrix,
    WorldSpec,
)
from eigenfactors.synth.generator import generate

logger = logging.getLogger(__name__)

Array = np.ndarray

_SIGNS = np.array([1.0, -1.0])


@dataclass
class CheckConfig:
    trials: int = 100
    seed: int = 0
    n_poses: int = 5
    n_planes: int = 4
    points_per_plane: int = 50
    point_noise_sigma: float = 0.04
    gradient_step: float = 1e-5
    hessian_step: float = 1e-4
    block_step: float = 1e-3
    gradient_threshold: float = 1e-6
    hessian_threshold: float = 1e-5
    block_threshold: float = 1e-8
    centered_threshold: float = 1e-9


def random_state(config: CheckConfig, trial: int, mode: str = "centered") -> Problem:
    """A perturbed synthetic problem with every plane freshly estimated."""
    spec = WorldSpec(
        n_poses=config.n_poses,
        n_planes=config.n_planes,
        points_per_plane=config.points_per_plane,
        point_noise_sigma=config.point_noise_sigma,
        seed=config.seed + trial,
    )
    problem = build_problem(generate(spec), config=OptimizerConfig(mode=mode))
    refresh(problem)
    return problem


def _rel(diff: Array, ref: Array) -> float:
    scale = float(np.max(np.abs(ref)))
    if scale == 0.0:
        return float(np.max(np.abs(diff)))
    return float(np.max(np.abs(diff))) / scale


def _pose_rows(vector: Array, poses: List[int]) -> Array:
    return np.stack([vector[6 * t : 6 * t + 6] for t in poses])


def _centered_frame(factor: EigenFactor, Qts: Array):
    Tc, _ = center_transform(QMatrix(Q=Qts.sum(axis=0)))
    cpi = inverse(Tc).T @ factor.plane.vector
    return Tc, cpi, Tc @ Qts @ Tc.T


def _frozen_cost(Q: Array, pi: Array) -> Array:
    return np.einsum("a,...ab,b->...", pi, Q, pi)


def _min_eig_plain(Q: Array) -> Array:
    return np.linalg.eigvalsh(Q)[..., 0]


def _min_eig_centered(Q: Array) -> Array:
    q = Q[..., :3, 3]
    scatter = Q[..., :3, :3] - q[..., :, None] * q[..., None, :] / Q[..., 3, 3][..., None, None]
    return np.linalg.eigvalsh(scatter)[..., 0]


def _gradient_error(
    factor: EigenFactor, problem: Problem, step: float, gens: Optional[Array]
) -> float:
    trajectory = problem.trajectory
    Qts = pose_blocks(factor, trajectory)
    Q0 = Qts.sum(axis=0)
    single, _ = twist_perturbations(step)
    moved = Q0 + moved_blocks(single[None], Qts[:, None, None])  # (K, 6, 2, 4, 4)
    if factor.centered:
        costs = _min_eig_centered(moved)
        analytic = centered_factor_gradient(factor, trajectory, gens)
        scale = 1.0
    else:
        costs = _min_eig_plain(moved)
        analytic = factor_gradient(factor, trajectory, gens)
        # the plane is k0 v_min, so its gradient is k0^2 times the eigenvalue's
        _, V = np.linalg.eigh(Q0)
        scale = 1.0 / float(np.linalg.norm(V[:3, 0])) ** 2
    fd = scale * (costs[:, :, 0] - costs[:, :, 1]) / (2.0 * step)
    return _rel(fd - _pose_rows(analytic, factor.poses), _pose_rows(analytic, factor.poses))


def _hessian_error(factor: EigenFactor, problem: Problem, step: float, gens: Optional[Array]) -> float:
    Qts = pose_blocks(factor, problem.trajectory)
    Tc, cpi, Qhat = _centered_frame(factor, Qts)
    _, pair = twist_perturbations(step)
    Ehat = Tc @ pair @ inverse(Tc)
    moved = Ehat[None] @ Qhat[:, None, None, None, None] @ np.swapaxes(Ehat, -1, -2)[None]
    weights = np.outer(_SIGNS, _SIGNS) / (4.0 * step * step)
    fd = np.einsum("kijab,ab->kij", _frozen_cost(moved, cpi), weights)
    _, analytic = factor_derivatives(factor, problem.trajectory, gens)
    return max(_rel(fd[k] - analytic[k], analytic[k]) for k in range(len(analytic)))


def _block_error(factor: EigenFactor, problem: Problem, step: float) -> float:
    """Largest cross-pose FD second derivative relative to the smaller diagonal block norm."""
    if len(factor.poses) < 2:
        return 0.0
    Qts = pose_blocks(factor, problem.trajectory)
    Tc, cpi, Qhat = _centered_frame(factor, Qts)
    single, _ = twist_perturbations(step)
    Ehat = Tc @ single @ inverse(Tc)
    D = moved_blocks(Ehat[None], Qhat[:, None, None])  # (K, 6, 2, 4, 4)
    Q0 = Qhat.sum(axis=0)
    values = _frozen_cost(Q0 + D[:, :, :, None, None, None] + D[None, None, None], cpi)
    weights = np.outer(_SIGNS, _SIGNS) / (4.0 * step * step)
    cross = np.einsum("kiamjb,ab->kimj", values, weights)
    _, diag = factor_derivatives(factor, problem.trajectory)
    norms = np.linalg.norm(diag, axis=(1, 2))
    worst = 0.0
    K = len(factor.poses)
    for k in range(K):
        for m in range(K):
            if k == m:
                continue
            ref = min(norms[k], norms[m])
            if ref > 0.0:
                worst = max(worst, float(np.max(np.abs(cross[k, :, m, :]))) / ref)
    return worst


def _centered_equality_error(factor: EigenFactor, problem: Problem, gens: Optional[Array]) -> float:
    plain = factor_gradient(factor, problem.trajectory, gens)
    centered = centered_factor_gradient(factor, problem.trajectory, gens)
    return _rel(centered - plain, plain)


def _run(
    name: str,
    threshold: float,
    config: CheckConfig,
    mode: str,
    per_factor: Callable[[EigenFactor, Problem], float],
) -> DerivativeCheck:
    if config.trials < 1:
        logger.warning("%s: no trials requested, check passes vacuously", name)
        return DerivativeCheck(name=name, max_error=0.0, threshold=threshold, trials=0)
    worst = 0.0
    for trial in range(config.trials):
        problem = random_state(config, trial, mode)
        for factor in problem.factors:
            if factor.plane is not None:
                worst = max(worst, per_factor(factor, problem))
    check = DerivativeCheck(name=name, max_error=worst, threshold=threshold, trials=config.trials)
    log = logger.info if check.passed else logger.warning
    log("%s: max error %.3e (threshold %.1e)", name, worst, threshold)
    return check


def gradient_check(config: CheckConfig, mode: str = "centered", gens: Optional[Array] = None) -> DerivativeCheck:
    """Analytic gradient against central differences of the closed-form plane cost."""
    return _run(
        f"gradient ({mode})",
        config.gradient_threshold,
        config,
        mode,
        lambda f, p: _gradient_error(f, p, config.gradient_step, gens),
    )


def hessian_check(config: CheckConfig, mode: str = "centered", gens: Optional[Array] = None) -> DerivativeCheck:
    """Analytic 6x6 blocks against the FD Hessian of the frozen-plane cost."""
    return _run(
        f"hessian ({mode})",
        config.hessian_threshold,
        config,
        mode,
        lambda f, p: _hessian_error(f, p, config.hessian_step, gens),
    )


def block_diagonal_check(config: CheckConfig) -> DerivativeCheck:
    return _run(
        "cross-pose blocks",
        config.block_threshold,
        config,
        "centered",
        lambda f, p: _block_error(f, p, config.block_step),
    )


def centered_gradient_check(config: CheckConfig, gens: Optional[Array] = None) -> DerivativeCheck:
    """Centered-frame gradient against the plain-frame gradient for the same plane."""
    return _run(
        "centered gradient equality",
        config.centered_threshold,
        config,
        "centered",
        lambda f, p: _centered_equality_error(f, p, gens),
    )


def run_all(config: CheckConfig, gens: Optional[Array] = None) -> List[DerivativeCheck]:
    return [
        gradient_check(config, "plain", gens),
        gradient_check(config, "centered", gens),
        hessian_check(config, "centered", gens),
        block_diagonal_check(config),
        centered_gradient_check(config, gens),
    ]
