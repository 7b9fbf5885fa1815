from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from eigenfactors.errors import InvalidArgumentError

Array = np.ndarray

MODES = ("centered", "plain")
GAUGES = ("reanchor", "fixed")


@dataclass(frozen=True)
class Plane:
    eta: Array
    d: float

    @property
    def vector(self) -> Array:
        return np.append(self.eta, self.d)


@dataclass(frozen=True)
class SummationMatrix:
    S: Array
    count: int

    def __add__(self, other: "SummationMatrix") -> "SummationMatrix":
        return SummationMatrix(S=self.S + other.S, count=self.count + other.count)

    @classmethod
    def from_points(cls, points: Any) -> "SummationMatrix":
        from eigenfactors.geometry.plane import s_accumulate

        return s_accumulate(points)


@dataclass(frozen=True)
class QMatrix:
    Q: Array

    @property
    def Q_p(self) -> Array:
        return self.Q[:3, :3]

    @property
    def q(self) -> Array:
        return self.Q[:3, 3]

    @property
    def count(self) -> float:
        return float(self.Q[3, 3])


@dataclass(frozen=True)
class PlaneFit:
    plane: Plane
    cost: float
    ill_conditioned: bool = False


@dataclass
class EigenFactor:
    """One plane landmark: per-pose summation blocks plus its current estimate."""

    id: int
    s_blocks: Dict[int, SummationMatrix]
    centered: bool = True
    q: Optional[QMatrix] = None
    plane: Optional[Plane] = None
    lam: float = 0.0
    # centering transform of the last estimate (identity in plain mode)
    center: Optional[Array] = None
    ill_conditioned: bool = False
    estimate_key: Optional[int] = None

    @property
    def poses(self) -> List[int]:
        return sorted(self.s_blocks)


@dataclass
class OptimizerConfig:
    max_iters: int = 50
    cost_tolerance: float = 1e-2
    abs_tolerance: float = 1e-14
    lm_lambda0: float = 1e-3
    lm_up: float = 10.0
    lm_down: float = 3.0
    step_scale: float = 1.0
    max_damping_raises: int = 10
    max_damping: float = 1e16
    mode: str = "centered"
    gauge: str = "reanchor"

    def __post_init__(self) -> None:
        if self.max_iters < 0:
            raise InvalidArgumentError("max_iters must be non-negative")
        for name in ("cost_tolerance", "lm_lambda0", "lm_up", "lm_down", "step_scale", "max_damping"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.abs_tolerance < 0:
            raise InvalidArgumentError("abs_tolerance must be non-negative")
        if self.max_damping_raises < 1:
            raise InvalidArgumentError("max_damping_raises must be at least 1")
        if self.mode not in MODES:
            raise InvalidArgumentError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.gauge not in GAUGES:
            raise InvalidArgumentError(f"gauge must be one of {GAUGES}, got {self.gauge!r}")


@dataclass
class Problem:
    trajectory: List[Array]
    factors: List[EigenFactor]
    anchor: int = 0
    config: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self) -> None:
        H = len(self.trajectory)
        if H == 0:
            raise InvalidArgumentError("trajectory must contain at least one pose")
        if not 0 <= self.anchor < H:
            raise InvalidArgumentError(f"anchor {self.anchor} outside [0, {H})")
        for factor in self.factors:
            bad = [t for t in factor.s_blocks if not 0 <= t < H]
            if bad:
                raise InvalidArgumentError(
                    f"factor {factor.id} references unknown poses {bad}"
                )

    @property
    def n_poses(self) -> int:
        return len(self.trajectory)


@dataclass
class GradientAndHessian:
    grad: Array
    hess_blocks: Array

    @property
    def n_poses(self) -> int:
        return self.hess_blocks.shape[0]


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    damping: float
    step_norm: float
    accepted: bool


@dataclass
class OptReport:
    trajectory: List[Array]
    trace: List[IterationRecord]
    iterations: int
    status: str
    cost: float
    planes: Dict[int, Plane] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def accepted_costs(self) -> List[float]:
        return [r.cost for r in self.trace if r.accepted]


@dataclass
class WorldSpec:
    n_poses: int = 10
    n_planes: int = 10
    points_per_plane: int = 50
    point_noise_sigma: float = 0.04
    perturb_trans: float = 0.05
    perturb_rot: float = 5.0
    seed: int = 0
    scene_radius: float = 5.0
    patch_half_side: float = 1.0
    step_rot: float = 2.0
    step_trans: float = 0.2

    def __post_init__(self) -> None:
        for name in ("n_poses", "n_planes", "points_per_plane"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be at least 1")
        for name in ("point_noise_sigma", "perturb_trans", "perturb_rot", "step_rot", "step_trans"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"{name} must be non-negative")
        for name in ("scene_radius", "patch_half_side"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")


@dataclass
class PoseCloud:
    points: Array
    labels: Array

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass
class Dataset:
    spec: WorldSpec
    gt_trajectory: List[Array]
    planes_gt: List[Plane]
    clouds: List[PoseCloud]
    initial_trajectory: List[Array]


@dataclass
class RpeResult:
    rmse_trans: float
    rmse_rot: float
    per_pair_trans: Array
    per_pair_rot: Array


@dataclass
class MapMetrics:
    mme: float
    mpv: float
    neighborhood_radius: float
    valid_point_fraction: float


@dataclass
class EvaluationRow:
    rpe_trans: float
    rpe_rot: float
    mme: float
    mpv: float


@dataclass
class DerivativeCheck:
    name: str
    max_error: float
    threshold: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.max_error <= self.threshold


@dataclass
class BenchRow:
    value: int
    seconds_per_iter: float
    final_cost: float


@dataclass
class AccuracyRow:
    value: float
    rpe_trans: float
    rpe_rot: float
    final_cost: float


@dataclass
class RunManifest:
    run_id: str
    out_dir: str
    created_at: str
    command: str
    spec: Dict[str, Any]
    config: Dict[str, Any]
    status: str
    artifacts: List[str] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)
