from __future__ import annotations

import numpy as np
import pytest

from eigenfactors.lie import exp
from eigenfactors.models import WorldSpec


def random_pose(rng: np.random.Generator, rot: float = 1.0, trans: float = 2.0) -> np.ndarray:
    xi = np.concatenate([rng.normal(0.0, rot, 3), rng.normal(0.0, trans, 3)])
    return exp(xi)


def random_symmetric(rng: np.random.Generator, n: int = 4) -> np.ndarray:
    A = rng.normal(size=(n, n))
    return A + A.T


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def small_spec() -> WorldSpec:
    return WorldSpec(n_poses=4, n_planes=3, points_per_plane=30, seed=11)


@pytest.fixture
def noiseless_spec() -> WorldSpec:
    return WorldSpec(point_noise_sigma=0.0, seed=5)
