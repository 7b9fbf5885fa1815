"""Dataset, trajectory and CSV file formats.

Datasets are one JSON document. Python's float repr is the shortest string
that reads back to the same double, so a dataset survives a write/read
cycle bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from eigenfactors.errors import FormatError
from eigenfactors.lie.se3 import from_quaternion, to_quaternion
from eigenfactors.models import (
    AccuracyRow,
    BenchRow,
    Dataset,
    EvaluationRow,
    IterationRecord,
    Plane,
    PoseCloud,
    WorldSpec,
)
from eigenfactors.utils import read_text, write_text

DATASET_FORMAT = "eigenfactors-dataset"
DATASET_VERSION = 1
QUATERNION_TOLERANCE = 1e-9

TRACE_COLUMNS = ("iter", "cost", "damping", "step_norm", "accepted")
EVALUATION_COLUMNS = ("rpe_trans", "rpe_rot", "mme", "mpv")
BENCH_COLUMNS = ("value", "seconds_per_iter", "final_cost")
ACCURACY_COLUMNS = ("value", "rpe_trans", "rpe_rot", "final_cost")


def dataset_to_dict(dataset: Dataset) -> Dict[str, Any]:
    points: List[List[Any]] = []
    for t, cloud in enumerate(dataset.clouds):
        for label, p in zip(cloud.labels.tolist(), cloud.points.tolist()):
            points.append([t, int(label), *p])
    return {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "spec": asdict(dataset.spec),
        "gt_trajectory": [np.asarray(T).tolist() for T in dataset.gt_trajectory],
        "initial_trajectory": [np.asarray(T).tolist() for T in dataset.initial_trajectory],
        "planes_gt": [[*p.eta.tolist(), float(p.d)] for p in dataset.planes_gt],
        "points": points,
    }


def _poses(raw: Any, key: str) -> List[np.ndarray]:
    try:
        poses = [np.array(T, dtype=float) for T in raw]
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{key}: {exc}") from exc
    if any(T.shape != (4, 4) for T in poses):
        raise FormatError(f"{key}: every pose must be a 4x4 matrix")
    return poses


def dataset_from_dict(data: Dict[str, Any]) -> Dataset:
    if not isinstance(data, dict) or data.get("format") != DATASET_FORMAT:
        raise FormatError(f"not an {DATASET_FORMAT} document")
    if data.get("version") != DATASET_VERSION:
        raise FormatError(f"unsupported dataset version {data.get('version')!r}")
    missing = [k for k in ("spec", "gt_trajectory", "initial_trajectory", "planes_gt", "points") if k not in data]
    if missing:
        raise FormatError(f"dataset is missing {', '.join(missing)}")

    known = {f.name for f in fields(WorldSpec)}
    try:
        spec = WorldSpec(**{k: v for k, v in data["spec"].items() if k in known})
    except (TypeError, ValueError) as exc:
        raise FormatError(f"spec: {exc}") from exc
    gt = _poses(data["gt_trajectory"], "gt_trajectory")
    initial = _poses(data["initial_trajectory"], "initial_trajectory")
    if len(gt) != len(initial):
        raise FormatError("gt_trajectory and initial_trajectory differ in length")

    planes = []
    for row in data["planes_gt"]:
        if len(row) != 4:
            raise FormatError("plane records need four numbers")
        planes.append(Plane(eta=np.array(row[:3], dtype=float), d=float(row[3])))

    by_pose: List[List[List[float]]] = [[] for _ in gt]
    labels: List[List[int]] = [[] for _ in gt]
    for record in data["points"]:
        if len(record) != 5:
            raise FormatError("point records are (pose, plane, x, y, z)")
        t = int(record[0])
        if not 0 <= t < len(gt):
            raise FormatError(f"point record references pose {t}")
        by_pose[t].append(record[2:])
        labels[t].append(int(record[1]))
    clouds = [
        PoseCloud(points=np.array(pts, dtype=float).reshape(-1, 3), labels=np.array(lbl, dtype=int))
        for pts, lbl in zip(by_pose, labels)
    ]
    return Dataset(
        spec=spec,
        gt_trajectory=gt,
        planes_gt=planes,
        clouds=clouds,
        initial_trajectory=initial,
    )


def save_dataset(path: Path, dataset: Dataset) -> None:
    write_text(path, json.dumps(dataset_to_dict(dataset), separators=(",", ":")) + "\n")


def load_dataset(path: Path) -> Dataset:
    try:
        data = json.loads(read_text(path))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    return dataset_from_dict(data)


def format_trajectory(trajectory: Sequence[np.ndarray]) -> str:
    lines = []
    for idx, T in enumerate(trajectory):
        t = np.asarray(T, dtype=float)[:3, 3]
        q = to_quaternion(T)
        lines.append(" ".join([str(idx), *(repr(float(x)) for x in (*t, *q))]))
    return "\n".join(lines) + "\n"


def parse_trajectory(text: str, source: str = "<trajectory>") -> List[np.ndarray]:
    poses = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 8:
            raise FormatError(f"{source}:{lineno}: expected 8 fields, got {len(parts)}")
        try:
            idx = int(parts[0])
            values = [float(x) for x in parts[1:]]
        except ValueError as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from exc
        if idx != len(poses):
            raise FormatError(f"{source}:{lineno}: expected pose index {len(poses)}, got {idx}")
        quat = np.array(values[3:])
        if abs(float(np.linalg.norm(quat)) - 1.0) > QUATERNION_TOLERANCE:
            raise FormatError(f"{source}:{lineno}: quaternion is not unit length")
        poses.append(from_quaternion(values[:3], quat))
    if not poses:
        raise FormatError(f"{source}: no poses")
    return poses


def save_trajectory(path: Path, trajectory: Sequence[np.ndarray]) -> None:
    write_text(path, format_trajectory(trajectory))


def load_trajectory(path: Path) -> List[np.ndarray]:
    return parse_trajectory(read_text(path), str(path))


def _number(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else str(x)


def _csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def trace_csv(trace: Sequence[IterationRecord]) -> str:
    return _csv(
        TRACE_COLUMNS,
        (
            [r.iteration, _number(r.cost), _number(r.damping), _number(r.step_norm), int(r.accepted)]
            for r in trace
        ),
    )


def evaluation_csv(row: EvaluationRow) -> str:
    return _csv(EVALUATION_COLUMNS, [[_number(row.rpe_trans), _number(row.rpe_rot), _number(row.mme), _number(row.mpv)]])


def bench_csv(rows: Sequence[BenchRow]) -> str:
    return _csv(
        BENCH_COLUMNS,
        ([r.value, _number(r.seconds_per_iter), _number(r.final_cost)] for r in rows),
    )


def accuracy_csv(rows: Sequence[AccuracyRow]) -> str:
    return _csv(
        ACCURACY_COLUMNS,
        (
            [_number(r.value), _number(r.rpe_trans), _number(r.rpe_rot), _number(r.final_cost)]
            for r in rows
        ),
    )
