from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import block_diag

from conftest import random_pose, random_symmetric
from eigenfactors.backend import (
    CenteredEstimator,
    HomogeneousEstimator,
    apply_steps,
    assemble,
    build_problem,
    centered_factor_gradient,
    dq_dxi,
    factor_derivatives,
    factor_gradient,
    factor_hessian_block,
    newton_step,
    refresh,
)
from eigenfactors.backend.derivatives import local_derivatives
from eigenfactors.backend.estimator import centered_plane
from eigenfactors.errors import InvalidArgumentError, NotPositiveDefiniteError, StaleEstimateError
from eigenfactors.evaluate import aggregate_map
from eigenfactors.geometry import plane_estimate_centered, plane_from_q, s_accumulate
from eigenfactors.lie import exp, generators, inverse
from eigenfactors.models import EigenFactor, GradientAndHessian, OptimizerConfig, Problem, WorldSpec
from eigenfactors.synth import generate


def _problem(spec, mode="centered", trajectory=None):
    dataset = generate(spec)
    problem = build_problem(dataset, trajectory, OptimizerConfig(mode=mode))
    refresh(problem)
    return dataset, problem


def _rel(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_dq_dxi_trivial_cases():
    np.testing.assert_array_equal(dq_dxi(np.zeros((4, 4)), 2), np.zeros((4, 4)))
    for i in (1, 2, 3):
        np.testing.assert_array_equal(dq_dxi(np.eye(4), i), np.zeros((4, 4)))
    with pytest.raises(InvalidArgumentError):
        dq_dxi(np.eye(4), 7)


@pytest.mark.parametrize("i", range(1, 7))
def test_dq_dxi_matches_central_difference(rng, i):
    Q = random_symmetric(rng)
    h = 1e-6
    e = np.zeros(6)
    e[i - 1] = h
    fd = (exp(e) @ Q @ exp(e).T - exp(-e) @ Q @ exp(-e).T) / (2.0 * h)
    out = dq_dxi(Q, i)
    np.testing.assert_allclose(out, fd, atol=1e-8)
    np.testing.assert_array_equal(out, out.T)


def test_estimators_match_direct_fits(small_spec):
    dataset, problem = _problem(small_spec, "plain")
    points = aggregate_map(dataset, problem.trajectory)
    labels = np.concatenate([c.labels for c in dataset.clouds])
    for factor in problem.factors:
        ours = factor.lam
        direct = plane_from_q(factor.q).cost
        assert ours == pytest.approx(direct, rel=1e-12)
        centered = CenteredEstimator().fit(factor, problem.trajectory)
        reference = plane_estimate_centered(points[labels == factor.id])
        assert centered.lam == pytest.approx(reference.cost, rel=1e-8)
        np.testing.assert_allclose(centered.plane.eta, reference.plane.eta, atol=1e-8)
        # the homogeneous fit can only be worse than the least-squares plane
        assert ours >= centered.lam * (1.0 - 1e-9)


def test_estimate_records_state_on_the_factor(small_spec):
    _, problem = _problem(small_spec)
    factor = problem.factors[0]
    assert factor.estimate_key is not None
    assert factor.center is not None
    cpi = centered_plane(factor)
    assert abs(cpi[3]) < 1e-9
    np.testing.assert_allclose(cpi[:3], factor.plane.eta)
    fit = HomogeneousEstimator().fit(factor, problem.trajectory)
    np.testing.assert_array_equal(fit.center, np.eye(4))


def test_gradient_vanishes_at_noiseless_optimum():
    spec = WorldSpec(n_poses=4, n_planes=3, points_per_plane=30, point_noise_sigma=0.0, seed=2)
    dataset = generate(spec)
    problem = build_problem(dataset, dataset.gt_trajectory)
    refresh(problem)
    for factor in problem.factors:
        g = centered_factor_gradient(factor, problem.trajectory)
        assert np.max(np.abs(g)) <= 1e-9


def test_gradient_is_zero_at_poses_not_observing(rng):
    points = rng.normal(size=(40, 3)) * [1.0, 1.0, 0.05] + [0.0, 0.0, 2.0]
    factor = EigenFactor(id=0, s_blocks={3: s_accumulate(points)}, centered=False)
    trajectory = [random_pose(rng, 0.2, 0.5) for _ in range(5)]
    problem = Problem(trajectory=trajectory, factors=[factor], config=OptimizerConfig(mode="plain"))
    refresh(problem)
    g = factor_gradient(factor, trajectory)
    assert g.shape == (30,)
    mask = np.ones(30, dtype=bool)
    mask[18:24] = False
    np.testing.assert_array_equal(g[mask], np.zeros(24))
    assert np.any(g[18:24] != 0.0)
    np.testing.assert_array_equal(factor_hessian_block(factor, trajectory, 1), np.zeros((6, 6)))


def test_stale_plane_is_rejected(small_spec):
    _, problem = _problem(small_spec)
    factor = problem.factors[0]
    moved = [exp(np.full(6, 1e-3)) @ T for T in problem.trajectory]
    with pytest.raises(StaleEstimateError):
        factor_gradient(factor, moved)


def test_centered_gradient_needs_centered_factor(small_spec):
    _, problem = _problem(small_spec, "plain")
    with pytest.raises(InvalidArgumentError):
        centered_factor_gradient(problem.factors[0], problem.trajectory)


def test_centered_and_plain_gradients_agree(small_spec):
    for seed in range(5):
        spec = replace(small_spec, seed=seed)
        _, problem = _problem(spec)
        for factor in problem.factors:
            plain = factor_gradient(factor, problem.trajectory)
            centered = centered_factor_gradient(factor, problem.trajectory)
            assert _rel(centered, plain) <= 1e-9


def test_hessian_blocks_are_exactly_symmetric(small_spec):
    _, problem = _problem(small_spec)
    for factor in problem.factors:
        _, hess = factor_derivatives(factor, problem.trajectory)
        for block in hess:
            np.testing.assert_array_equal(block, block.T)


def test_zero_block_gives_zero_derivatives():
    grads, hess = local_derivatives(generators(), np.zeros((2, 4, 4)), np.array([0.0, 0.0, 1.0, 2.0]))
    np.testing.assert_array_equal(grads, np.zeros((2, 6)))
    np.testing.assert_array_equal(hess, np.zeros((2, 6, 6)))


def test_assemble_without_factors():
    problem = Problem(trajectory=[np.eye(4)] * 3, factors=[])
    gh = assemble(problem)
    np.testing.assert_array_equal(gh.grad, np.zeros(18))
    np.testing.assert_array_equal(gh.hess_blocks[0], np.eye(6))
    np.testing.assert_array_equal(gh.hess_blocks[1:], np.zeros((2, 6, 6)))


def test_assemble_single_factor_single_pose(rng):
    points = rng.normal(size=(40, 3)) * [1.0, 1.0, 0.05] + [0.0, 0.0, 2.0]
    factor = EigenFactor(id=0, s_blocks={1: s_accumulate(points)})
    problem = Problem(trajectory=[np.eye(4), random_pose(rng, 0.1, 0.3)], factors=[factor])
    refresh(problem)
    gh = assemble(problem)
    grads, hess = factor_derivatives(factor, problem.trajectory)
    np.testing.assert_array_equal(gh.grad[6:], grads[0])
    np.testing.assert_array_equal(gh.grad[:6], np.zeros(6))
    np.testing.assert_array_equal(gh.hess_blocks[1], hess[0])
    np.testing.assert_array_equal(gh.hess_blocks[0], np.eye(6))


def test_assemble_matches_loop_sum(rng):
    spec = WorldSpec(n_poses=4, n_planes=3, points_per_plane=20, seed=9)
    _, problem = _problem(spec)
    gh = assemble(problem, fix_anchor=False)
    grad = sum(centered_factor_gradient(f, problem.trajectory) for f in problem.factors)
    np.testing.assert_allclose(gh.grad, grad, rtol=1e-12, atol=1e-12)
    for t in range(4):
        block = sum(factor_hessian_block(f, problem.trajectory, t) for f in problem.factors)
        np.testing.assert_allclose(gh.hess_blocks[t], block, rtol=1e-12, atol=1e-12)
    anchored = assemble(problem)
    np.testing.assert_array_equal(anchored.grad[:6], np.zeros(6))
    np.testing.assert_array_equal(anchored.hess_blocks[0], np.eye(6))


def test_newton_step_trivial_cases():
    gh = GradientAndHessian(grad=np.zeros(12), hess_blocks=np.stack([np.eye(6)] * 2))
    for step in newton_step(gh, 0.0):
        np.testing.assert_array_equal(step, np.zeros(6))
    grad = np.zeros(12)
    grad[0] = 1.0
    steps = newton_step(GradientAndHessian(grad=grad, hess_blocks=gh.hess_blocks), 0.0)
    np.testing.assert_allclose(steps[0], -np.eye(6)[0])
    np.testing.assert_array_equal(steps[1], np.zeros(6))
    half = newton_step(GradientAndHessian(grad=grad, hess_blocks=gh.hess_blocks), 0.0, step_scale=0.5)
    np.testing.assert_allclose(half[0], -0.5 * np.eye(6)[0])


def test_newton_step_matches_dense_solve(rng):
    H = 5
    blocks = []
    for _ in range(H):
        A = rng.normal(size=(6, 6))
        blocks.append(A @ A.T + 6.0 * np.eye(6))
    grad = rng.normal(size=6 * H)
    damping = 0.3
    steps = newton_step(GradientAndHessian(grad=grad, hess_blocks=np.stack(blocks)), damping)
    dense = block_diag(*blocks) + damping * np.eye(6 * H)
    np.testing.assert_allclose(np.concatenate(steps), -np.linalg.solve(dense, grad), atol=1e-10)


def test_newton_step_signals_indefinite_blocks():
    blocks = np.stack([np.eye(6), -np.eye(6)])
    gh = GradientAndHessian(grad=np.ones(12), hess_blocks=blocks)
    with pytest.raises(NotPositiveDefiniteError):
        newton_step(gh, 0.5)
    steps = newton_step(gh, 2.0)
    np.testing.assert_allclose(steps[1], -np.ones(6))
    with pytest.raises(InvalidArgumentError):
        newton_step(gh, -1.0)


def test_apply_steps_keeps_anchor(rng):
    trajectory = [random_pose(rng) for _ in range(4)]
    steps = [rng.normal(0.0, 0.01, 6) for _ in range(4)]
    fixed = apply_steps(trajectory, [np.zeros(6)] + steps[1:], 0, reanchor=False)
    np.testing.assert_array_equal(fixed[0], trajectory[0])
    np.testing.assert_allclose(fixed[2], exp(steps[2]) @ trajectory[2], atol=1e-14)

    moved = apply_steps(trajectory, steps, 0, reanchor=True)
    np.testing.assert_array_equal(moved[0], trajectory[0])
    W = trajectory[0] @ inverse(exp(steps[0]) @ trajectory[0])
    for t in range(1, 4):
        np.testing.assert_allclose(moved[t], W @ exp(steps[t]) @ trajectory[t], atol=1e-12)
