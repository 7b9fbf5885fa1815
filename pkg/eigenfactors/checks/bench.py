"""Optimizer sweeps over one world dimension: iteration timings and trajectory accuracy."""
from __future__ import annotations

import logging
import statistics
import time
from dataclasses import replace
from typing import List, Optional, Sequence

import numpy as np

from eigenfactors.backend.optimizer import build_problem, optimize
from eigenfactors.errors import InvalidArgumentError
from eigenfactors.evaluate.rpe import rpe
from eigenfactors.models import AccuracyRow, BenchRow, OptimizerConfig, WorldSpec
from eigenfactors.synth.generator import generate, streamed_problem

logger = logging.getLogger(__name__)

SWEEPS = {"poses": "n_poses", "points": "points_per_plane", "planes": "n_planes"}
ACCURACY_SWEEPS = {
    **SWEEPS,
    "sigma": "point_noise_sigma",
    "perturb-trans": "perturb_trans",
    "perturb-rot": "perturb_rot",
}
_COUNTS = set(SWEEPS.values())


def _with_value(base: WorldSpec, field: str, value: float) -> WorldSpec:
    return replace(base, **{field: int(value) if field in _COUNTS else float(value)})


def time_iterations(spec: WorldSpec, config: OptimizerConfig) -> BenchRow:
    """Wall time per optimizer iteration; summation blocks are built before the clock starts."""
    problem = streamed_problem(spec, config)
    start = time.perf_counter()
    report = optimize(problem)
    elapsed = time.perf_counter() - start
    return BenchRow(
        value=0,
        seconds_per_iter=elapsed / max(report.iterations, 1),
        final_cost=report.cost,
    )


def run_sweep(
    sweep: str,
    values: Sequence[int],
    base: Optional[WorldSpec] = None,
    config: Optional[OptimizerConfig] = None,
    repeats: int = 3,
    iterations: int = 3,
) -> List[BenchRow]:
    """Median-of-``repeats`` timing for each value of the swept dimension."""
    if sweep not in SWEEPS:
        raise InvalidArgumentError(f"sweep must be one of {sorted(SWEEPS)}, got {sweep!r}")
    if not values:
        raise InvalidArgumentError("at least one sweep value is required")
    if repeats < 1:
        raise InvalidArgumentError("repeats must be at least 1")
    base = base or WorldSpec()
    # a vanishing tolerance keeps every run at the same iteration budget
    config = replace(config or OptimizerConfig(), max_iters=iterations, cost_tolerance=1e-15)
    rows: List[BenchRow] = []
    for value in values:
        spec = _with_value(base, SWEEPS[sweep], value)
        runs = [time_iterations(spec, config) for _ in range(repeats)]
        row = BenchRow(
            value=int(value),
            seconds_per_iter=statistics.median(r.seconds_per_iter for r in runs),
            final_cost=runs[-1].final_cost,
        )
        logger.info("%s=%d: %.4f s/iter, cost %.6e", sweep, row.value, row.seconds_per_iter, row.final_cost)
        rows.append(row)
    return rows


def run_accuracy_sweep(
    sweep: str,
    values: Sequence[float],
    base: Optional[WorldSpec] = None,
    config: Optional[OptimizerConfig] = None,
    trials: int = 3,
) -> List[AccuracyRow]:
    """Mean RPE of the optimized trajectory against ground truth per swept value.

    Trial ``i`` uses world seed ``base.seed + i``, so every value sees the
    same family of worlds.
    """
    if sweep not in ACCURACY_SWEEPS:
        raise InvalidArgumentError(f"sweep must be one of {sorted(ACCURACY_SWEEPS)}, got {sweep!r}")
    if not values:
        raise InvalidArgumentError("at least one sweep value is required")
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    base = base or WorldSpec()
    config = config or OptimizerConfig()
    rows: List[AccuracyRow] = []
    for value in values:
        spec = _with_value(base, ACCURACY_SWEEPS[sweep], value)
        trans, rot, costs = [], [], []
        for trial in range(trials):
            dataset = generate(replace(spec, seed=spec.seed + trial))
            report = optimize(build_problem(dataset, config=config))
            errors = rpe(dataset.gt_trajectory, report.trajectory)
            trans.append(errors.rmse_trans)
            rot.append(errors.rmse_rot)
            costs.append(report.cost)
        row = AccuracyRow(
            value=float(value),
            rpe_trans=float(np.mean(trans)),
            rpe_rot=float(np.mean(rot)),
            final_cost=float(np.mean(costs)),
        )
        logger.info(
            "%s=%g: rpe %.4e m / %.4e deg, cost %.6e",
            sweep, row.value, row.rpe_trans, row.rpe_rot, row.final_cost,
        )
        rows.append(row)
    return rows
