import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import random_pose
from eigenfactors.backend import build_problem, optimize
from eigenfactors.errors import InvalidArgumentError, MetricUndefinedError
from eigenfactors.evaluate import TrajectoryEvaluator, aggregate_map, map_metrics, mme, mpv, rpe
from eigenfactors.lie import exp
from eigenfactors.models import OptimizerConfig, WorldSpec
from eigenfactors.synth import generate


def _plane_cloud(rng, n=4000, sigma=0.0, side=2.0):
    xy = rng.uniform(-side, side, (n, 2))
    z = rng.normal(0.0, sigma, n) if sigma > 0 else np.zeros(n)
    return np.column_stack([xy, z])


def test_rpe_of_identical_trajectories_is_zero(rng):
    trajectory = [random_pose(rng) for _ in range(5)]
    result = rpe(trajectory, trajectory)
    assert result.rmse_trans == pytest.approx(0.0, abs=1e-12)
    assert result.rmse_rot == pytest.approx(0.0, abs=1e-9)
    assert result.per_pair_trans.shape == (4,)


def test_rpe_ignores_a_common_motion(rng):
    reference = [random_pose(rng) for _ in range(5)]
    estimate = [exp(rng.normal(0.0, 0.01, 6)) @ T for T in reference]
    W = random_pose(rng)
    moved = [W @ T for T in estimate]
    a, b = rpe(reference, estimate), rpe(reference, moved)
    assert b.rmse_trans == pytest.approx(a.rmse_trans, rel=1e-9)
    assert b.rmse_rot == pytest.approx(a.rmse_rot, rel=1e-7)


def test_rpe_single_shifted_pose():
    reference = [np.eye(4), np.eye(4)]
    shifted = np.eye(4)
    shifted[0, 3] = 0.1
    result = rpe(reference, [np.eye(4), shifted])
    assert result.rmse_trans == pytest.approx(0.1)
    assert result.rmse_rot == pytest.approx(0.0, abs=1e-12)


def test_rpe_validation():
    with pytest.raises(InvalidArgumentError):
        rpe([np.eye(4)] * 3, [np.eye(4)] * 2)
    with pytest.raises(InvalidArgumentError):
        rpe([np.eye(4)], [np.eye(4)])


def test_aggregate_map_recovers_global_points(small_spec):
    dataset = generate(small_spec)
    points = aggregate_map(dataset, dataset.gt_trajectory)
    assert points.shape == (4 * 90, 3)
    np.testing.assert_allclose(points[:90], dataset.clouds[0].points, atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        aggregate_map(dataset, dataset.gt_trajectory[:2])


def test_noiseless_plane_has_no_plane_variance(rng):
    assert mpv(_plane_cloud(rng)).mpv <= 1e-9


def test_plane_variance_tracks_noise(rng):
    sigma = 0.01
    value = mpv(_plane_cloud(rng, n=20000, sigma=sigma)).mpv
    # neighbourhoods are small, so the sample deviation runs a little low
    assert value == pytest.approx(sigma, rel=0.25)


def test_entropy_undefined_for_coincident_points():
    with pytest.raises(MetricUndefinedError):
        mme(np.zeros((50, 3)))
    with pytest.raises(MetricUndefinedError):
        mpv(np.zeros((3, 3)))
    with pytest.raises(MetricUndefinedError):
        mme(np.zeros((0, 3)))
    with pytest.raises(InvalidArgumentError):
        mme(np.zeros((10, 3)), radius=0.0)


def test_noisier_map_has_more_entropy(rng):
    clean = mme(_plane_cloud(rng, sigma=0.005)).mme
    noisy = mme(_plane_cloud(rng, sigma=0.05)).mme
    assert noisy > clean


def test_metrics_ignore_a_rigid_motion(rng):
    cloud = _plane_cloud(rng, n=3000, sigma=0.02)
    W = random_pose(rng)
    moved = cloud @ W[:3, :3].T + W[:3, 3]
    a, b = map_metrics(cloud), map_metrics(moved)
    assert b.mme == pytest.approx(a.mme, rel=1e-6)
    assert b.mpv == pytest.approx(a.mpv, rel=1e-6)
    assert b.valid_point_fraction == a.valid_point_fraction


def test_single_metric_calls_leave_the_other_unset(rng):
    cloud = _plane_cloud(rng, n=2000, sigma=0.02)
    assert math.isnan(mme(cloud).mpv)
    assert math.isnan(mpv(cloud).mme)
    full = map_metrics(cloud, radius=0.4)
    assert full.neighborhood_radius == 0.4
    assert 0.0 < full.valid_point_fraction <= 1.0


def test_evaluator_row(small_spec):
    dataset = generate(replace(small_spec, points_per_plane=200))
    row = TrajectoryEvaluator().evaluate(dataset, dataset.gt_trajectory, dataset.gt_trajectory)
    assert row.rpe_trans == pytest.approx(0.0, abs=1e-12)
    assert np.isfinite(row.mme)
    assert row.mpv > 0.0


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_optimized_map_is_sharper(seed):
    dataset = generate(replace(WorldSpec(), seed=seed))
    problem = build_problem(dataset, config=OptimizerConfig(max_iters=100, cost_tolerance=1e-4))
    report = optimize(problem)
    evaluator = TrajectoryEvaluator()
    before = evaluator.evaluate(dataset, dataset.gt_trajectory, dataset.initial_trajectory)
    after = evaluator.evaluate(dataset, dataset.gt_trajectory, report.trajectory)
    assert after.mme <= before.mme
    assert after.mpv <= before.mpv
