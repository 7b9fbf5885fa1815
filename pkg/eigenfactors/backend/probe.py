"""How far the block-diagonal centered Hessian is from the true one.

The centered cost of one plane with its normal held fixed is

    f(Q) = eta^T (Q_p - q q^T / N) eta

where the mean ``q / N`` moves with every pose. That dependence couples all
poses, which the block-diagonal approximation ignores. The exact Hessian is
taken by central differences of ``f`` over the free poses.
"""
from __future__ import annotations

import logging
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from eigenfactors.backend.derivatives import factor_derivatives
from eigenfactors.backend.estimator import pose_blocks
from eigenfactors.backend.optimizer import build_problem, refresh
from eigenfactors.errors import InvalidArgumentError
from eigenfactors.lie.se3 import exp
from eigenfactors.models import OptimizerConfig, Problem, WorldSpec
from eigenfactors.synth.generator import generate

logger = logging.getLogger(__name__)

Array = np.ndarray

PROBE_STEP = 1e-4
_SIGNS = np.array([1.0, -1.0])


def _centered_cost(Q: Array, eta: Array) -> Array:
    """``f`` for a stack of Q matrices (..., 4, 4)."""
    Qp = Q[..., :3, :3]
    q = Q[..., :3, 3]
    N = Q[..., 3, 3]
    return np.einsum("a,...ab,b->...", eta, Qp, eta) - np.einsum("...a,a->...", q, eta) ** 2 / N


def twist_perturbations(h: float) -> Tuple[Array, Array]:
    """exp(s h e_i) as (6, 2, 4, 4) and exp(s h e_i + s' h e_j) as (6, 6, 2, 2, 4, 4)."""
    single = np.empty((6, 2, 4, 4))
    pair = np.empty((6, 6, 2, 2, 4, 4))
    for i in range(6):
        for a, s in enumerate(_SIGNS):
            xi = np.zeros(6)
            xi[i] = s * h
            single[i, a] = exp(xi)
            for j in range(6):
                for b, s2 in enumerate(_SIGNS):
                    xj = xi.copy()
                    xj[j] += s2 * h
                    pair[i, j, a, b] = exp(xj)
    return single, pair


def moved_blocks(E: Array, Qt: Array) -> Array:
    return E @ Qt @ np.swapaxes(E, -1, -2) - Qt


def exact_centered_hessian(problem: Problem, h: float = PROBE_STEP) -> Array:
    """FD Hessian of the summed centered cost over the free poses (6F x 6F)."""
    free = [t for t in range(problem.n_poses) if t != problem.anchor]
    slot = {t: k for k, t in enumerate(free)}
    out = np.zeros((6 * len(free), 6 * len(free)))
    single, pair = twist_perturbations(h)
    weights = np.outer(_SIGNS, _SIGNS) / (4.0 * h * h)

    for factor in problem.factors:
        if factor.plane is None:
            continue
        poses = [t for t in factor.poses if t in slot]
        if not poses:
            continue
        Qts = pose_blocks(factor, problem.trajectory)
        Q0 = Qts.sum(axis=0)
        eta = factor.plane.eta
        local = np.array([factor.poses.index(t) for t in poses])
        Qf = Qts[local]

        # D1[k, i, s]: change in Q from moving pose k alone along i
        D1 = moved_blocks(single[None], Qf[:, None, None])
        # same pose, both coordinates at once
        D2 = moved_blocks(pair[None], Qf[:, None, None, None, None])
        diag = _centered_cost(Q0 + D2, eta)  # (K, 6, 6, 2, 2)
        diag_h = np.einsum("kijab,ab->kij", diag, weights)

        cross = _centered_cost(
            Q0 + D1[:, :, :, None, None, None] + D1[None, None, None], eta
        )  # (K, 6, 2, K, 6, 2)
        cross_h = np.einsum("kiamjb,ab->kimj", cross, weights)

        idx = [slot[t] for t in poses]
        for a, ka in enumerate(idx):
            for b, kb in enumerate(idx):
                block = diag_h[a] if a == b else cross_h[a, :, b, :]
                out[6 * ka : 6 * ka + 6, 6 * kb : 6 * kb + 6] += block
    return 0.5 * (out + out.T)


def approximate_centered_hessian(problem: Problem) -> Array:
    """Block-diagonal analytic Hessian over the free poses."""
    free = [t for t in range(problem.n_poses) if t != problem.anchor]
    slot = {t: k for k, t in enumerate(free)}
    out = np.zeros((6 * len(free), 6 * len(free)))
    for factor in problem.factors:
        if factor.plane is None:
            continue
        _, hess = factor_derivatives(factor, problem.trajectory)
        for k, t in enumerate(factor.poses):
            if t in slot:
                s = 6 * slot[t]
                out[s : s + 6, s : s + 6] += hess[k]
    return out


def centered_hessian_error(problem: Problem, h: float = PROBE_STEP) -> float:
    """Relative Frobenius difference between exact and block-diagonal Hessians."""
    if any(not f.centered for f in problem.factors):
        raise InvalidArgumentError("the Hessian probe needs centered-mode factors")
    if problem.n_poses < 2:
        raise InvalidArgumentError("the Hessian probe needs at least two poses")
    refresh(problem)
    exact = exact_centered_hessian(problem, h)
    approx = approximate_centered_hessian(problem)
    return float(np.linalg.norm(exact - approx) / np.linalg.norm(approx))


def centered_hessian_error_probe(
    spec: WorldSpec,
    h_values: Sequence[int],
    trials: int = 10,
    step: float = PROBE_STEP,
) -> List[Tuple[int, float]]:
    """Average relative difference per trajectory length, one dataset per trial.

    Each problem is evaluated at its ground-truth trajectory, so the point
    noise in ``spec`` is what keeps the cost away from zero.
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    config = OptimizerConfig(mode="centered")
    rows: List[Tuple[int, float]] = []
    for H in h_values:
        errors = []
        for trial in range(trials):
            dataset = generate(replace(spec, n_poses=int(H), seed=spec.seed + trial))
            problem = build_problem(dataset, dataset.gt_trajectory, config)
            errors.append(centered_hessian_error(problem, step))
        mean = float(np.mean(errors))
        logger.info("H=%d: relative Hessian difference %.4f over %d trials", H, mean, trials)
        rows.append((int(H), mean))
    return rows
