from __future__ import annotations

from typing import Sequence

import numpy as np

from eigenfactors.errors import InvalidArgumentError
from eigenfactors.lie.se3 import inverse, rotation_angle
from eigenfactors.models import RpeResult

Array = np.ndarray


def rpe(reference: Sequence[Array], estimate: Sequence[Array]) -> RpeResult:
    """Relative pose error over consecutive pairs.

    ``E_i = (T_i^-1 T_{i+1})^-1 (T^_i^-1 T^_{i+1})``; translation errors are
    the norms of ``E_i``'s translation, rotation errors its angle in degrees.
    """
    if len(reference) != len(estimate):
        raise InvalidArgumentError(
            f"trajectory lengths differ: {len(reference)} vs {len(estimate)}"
        )
    if len(reference) < 2:
        raise InvalidArgumentError("relative pose error needs at least two poses")
    trans, rot = [], []
    for i in range(len(reference) - 1):
        rel_ref = inverse(reference[i]) @ np.asarray(reference[i + 1], dtype=float)
        rel_est = inverse(estimate[i]) @ np.asarray(estimate[i + 1], dtype=float)
        E = inverse(rel_ref) @ rel_est
        trans.append(float(np.linalg.norm(E[:3, 3])))
        rot.append(float(np.degrees(rotation_angle(E))))
    per_trans, per_rot = np.array(trans), np.array(rot)
    return RpeResult(
        rmse_trans=float(np.sqrt(np.mean(per_trans**2))),
        rmse_rot=float(np.sqrt(np.mean(per_rot**2))),
        per_pair_trans=per_trans,
        per_pair_rot=per_rot,
    )
