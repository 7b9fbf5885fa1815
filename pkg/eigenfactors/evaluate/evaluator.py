from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from eigenfactors.evaluate.map_quality import DEFAULT_RADIUS, MIN_NEIGHBORS, aggregate_map, map_metrics
from eigenfactors.evaluate.rpe import rpe
from eigenfactors.models import Dataset, EvaluationRow

logger = logging.getLogger(__name__)


class TrajectoryEvaluator:
    """Score an estimated trajectory against a reference and by its map."""

    def __init__(self, radius: float = DEFAULT_RADIUS, min_neighbors: int = MIN_NEIGHBORS) -> None:
        self.radius = radius
        self.min_neighbors = min_neighbors

    def evaluate(
        self,
        dataset: Dataset,
        reference: Sequence[np.ndarray],
        estimate: Sequence[np.ndarray],
    ) -> EvaluationRow:
        errors = rpe(reference, estimate)
        metrics = map_metrics(aggregate_map(dataset, estimate), self.radius, self.min_neighbors)
        logger.debug(
            "rpe %.3e m / %.3e deg, mme %.4f, mpv %.3e",
            errors.rmse_trans, errors.rmse_rot, metrics.mme, metrics.mpv,
        )
        return EvaluationRow(
            rpe_trans=errors.rmse_trans,
            rpe_rot=errors.rmse_rot,
            mme=metrics.mme,
            mpv=metrics.mpv,
        )


def evaluate_trajectory(
    dataset: Dataset,
    reference: Sequence[np.ndarray],
    estimate: Sequence[np.ndarray],
    radius: float = DEFAULT_RADIUS,
    min_neighbors: int = MIN_NEIGHBORS,
) -> EvaluationRow:
    return TrajectoryEvaluator(radius, min_neighbors).evaluate(dataset, reference, estimate)
