"""Alternating Eigen-Factors optimizer.

Each iteration re-solves every plane in closed form, assembles the
block-diagonal Newton system with planes frozen, and accepts a damped step
only when the total cost does not increase (Levenberg-Marquardt).
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, TypeVar, Union

import numpy as np

from eigenfactors.backend.estimator import FactorEstimate, estimator_for
from eigenfactors.backend.solver import apply_steps, assemble, newton_step
from eigenfactors.errors import (
    DegeneratePlaneError,
    InvalidArgumentError,
    NotPositiveDefiniteError,
    OptimizationFailedError,
)
from eigenfactors.geometry.plane import s_accumulate
from eigenfactors.models import (
    Dataset,
    EigenFactor,
    IterationRecord,
    OptimizerConfig,
    OptReport,
    PoseCloud,
    Problem,
)
from eigenfactors.utils import thread_count

logger = logging.getLogger(__name__)

Array = np.ndarray
R = TypeVar("R")


def _map_factors(fn: Callable[[EigenFactor], R], factors: Sequence[EigenFactor]) -> List[R]:
    # results come back in factor order, so reductions stay deterministic
    workers = min(thread_count(), len(factors))
    if workers <= 1:
        return [fn(f) for f in factors]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, factors))


def build_factors(clouds: Sequence[PoseCloud], centered: bool = True) -> List[EigenFactor]:
    """Fold labeled per-pose clouds into one summation block per (plane, pose)."""
    blocks: Dict[int, Dict[int, object]] = {}
    for t, cloud in enumerate(clouds):
        labels = np.asarray(cloud.labels)
        for plane_id in np.unique(labels):
            mask = labels == plane_id
            blocks.setdefault(int(plane_id), {})[t] = s_accumulate(cloud.points[mask])
    return [
        EigenFactor(id=plane_id, s_blocks=dict(per_pose), centered=centered)
        for plane_id, per_pose in sorted(blocks.items())
    ]


def build_problem(
    dataset: Dataset,
    trajectory: Optional[Sequence[Array]] = None,
    config: Optional[OptimizerConfig] = None,
    anchor: int = 0,
) -> Problem:
    config = config or OptimizerConfig()
    start = dataset.initial_trajectory if trajectory is None else trajectory
    factors = build_factors(dataset.clouds, centered=config.mode == "centered")
    return Problem(
        trajectory=[np.array(T, dtype=float) for T in start],
        factors=factors,
        anchor=anchor,
        config=config,
    )


def _try_fit(factor: EigenFactor, trajectory: Sequence[Array]) -> Optional[FactorEstimate]:
    try:
        return estimator_for(factor).fit(factor, trajectory)
    except DegeneratePlaneError as exc:
        logger.warning("factor %d skipped: %s", factor.id, exc)
        return None


def refresh(problem: Problem) -> float:
    """Closed-form plane step: re-estimate every factor at the current trajectory.

    Returns the total cost over non-degenerate factors. Degenerate factors are
    left without a plane and are ignored by :func:`assemble`.
    """
    trajectory = problem.trajectory

    def run(factor: EigenFactor) -> float:
        try:
            return estimator_for(factor).estimate(factor, trajectory).lam
        except DegeneratePlaneError as exc:
            logger.warning("factor %d degenerate: %s", factor.id, exc)
            factor.plane = None
            factor.estimate_key = None
            return math.nan

    costs = _map_factors(run, problem.factors)
    return float(sum(c for c in costs if not math.isnan(c)))


def total_cost(
    factors: Union[Problem, Sequence[EigenFactor]],
    trajectory: Optional[Sequence[Array]] = None,
) -> float:
    """Sum of closed-form plane costs at ``trajectory``; inf if any plane degenerates.

    A :class:`Problem` may be passed instead of factors, in which case its own
    trajectory is the default.
    """
    if isinstance(factors, Problem):
        trajectory = factors.trajectory if trajectory is None else trajectory
        factors = factors.factors
    if trajectory is None:
        raise InvalidArgumentError("a trajectory is required with bare factors")
    fits = _map_factors(lambda f: _try_fit(f, trajectory), factors)
    if any(fit is None for fit in fits):
        return math.inf
    return float(sum(fit.lam for fit in fits))


def _active(problem: Problem) -> List[EigenFactor]:
    return [f for f in problem.factors if f.plane is not None]


def _point_count(problem: Problem) -> int:
    return sum(block.count for f in problem.factors for block in f.s_blocks.values())


def optimize(problem: Problem) -> OptReport:
    cfg = problem.config
    reanchor = cfg.gauge == "reanchor"
    # abs_tolerance is per point
    floor = cfg.abs_tolerance * max(_point_count(problem), 1)
    damping = cfg.lm_lambda0
    trace: List[IterationRecord] = []

    cost = refresh(problem)
    if problem.factors and not _active(problem):
        logger.error("all %d factors are degenerate", len(problem.factors))
        return OptReport(
            trajectory=list(problem.trajectory),
            trace=[IterationRecord(0, math.nan, damping, 0.0, False)],
            iterations=0,
            status="failed",
            cost=math.nan,
        )
    trace.append(IterationRecord(0, cost, damping, 0.0, True))
    logger.info("iter 0: cost=%.6e", cost)

    status = "max_iters"
    iterations = 0
    if cost <= floor:
        status = "converged"
    else:
        for iteration in range(1, cfg.max_iters + 1):
            iterations = iteration
            gh = assemble(problem, fix_anchor=not reanchor)
            active = _active(problem)
            accepted = False
            for _ in range(cfg.max_damping_raises):
                if damping > cfg.max_damping:
                    break
                try:
                    steps = newton_step(gh, damping, cfg.step_scale)
                except NotPositiveDefiniteError as exc:
                    logger.warning("iter %d: %s; raising damping", iteration, exc)
                    damping *= cfg.lm_up
                    continue
                step_norm = float(np.linalg.norm(np.concatenate(steps)))
                if not math.isfinite(step_norm):
                    raise OptimizationFailedError(f"iteration {iteration} produced a non-finite step")
                trial = apply_steps(problem.trajectory, steps, problem.anchor, reanchor)
                trial_cost = total_cost(active, trial)
                if trial_cost <= cost:
                    problem.trajectory = trial
                    trace.append(IterationRecord(iteration, trial_cost, damping, step_norm, True))
                    logger.info(
                        "iter %d: cost=%.6e damping=%.1e step=%.3e accepted",
                        iteration, trial_cost, damping, step_norm,
                    )
                    damping /= cfg.lm_down
                    accepted = True
                    break
                trace.append(IterationRecord(iteration, trial_cost, damping, step_norm, False))
                logger.info(
                    "iter %d: cost=%.6e damping=%.1e step=%.3e rejected",
                    iteration, trial_cost, damping, step_norm,
                )
                damping *= cfg.lm_up
            if not accepted:
                status = "stalled"
                logger.warning("iter %d: no acceptable step, damping %.1e", iteration, damping)
                break

            previous = cost
            cost = refresh(problem)
            if not _active(problem):
                status = "failed"
                logger.error("iter %d: every factor degenerated", iteration)
                break
            if cost <= floor or (previous - cost) / previous < cfg.cost_tolerance:
                status = "converged"
                break

    if status != "converged":
        logger.warning("optimization stopped without convergence: %s", status)
    planes = {f.id: f.plane for f in problem.factors if f.plane is not None}
    return OptReport(
        trajectory=list(problem.trajectory),
        trace=trace,
        iterations=iterations,
        status=status,
        cost=cost,
        planes=planes,
    )
