from eigenfactors.evaluate.evaluator import TrajectoryEvaluator, evaluate_trajectory
from eigenfactors.evaluate.map_quality import aggregate_map, map_metrics, mme, mpv
from eigenfactors.evaluate.rpe import rpe

__all__ = [
    "TrajectoryEvaluator",
    "aggregate_map",
    "evaluate_trajectory",
    "map_metrics",
    "mme",
    "mpv",
    "rpe",
]
