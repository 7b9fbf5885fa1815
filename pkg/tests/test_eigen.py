import numpy as np
import pytest

from conftest import random_symmetric
from eigenfactors.errors import InvalidArgumentError
from eigenfactors.geometry import eigen_sym4


def test_matches_reference_eigenvalues(rng):
    for _ in range(50):
        A = random_symmetric(rng) * rng.uniform(0.1, 100.0)
        w, V = eigen_sym4(A)
        scale = np.linalg.norm(A)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(A), atol=1e-12 * scale)
        np.testing.assert_allclose(V.T @ V, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(A @ V, V * w, atol=1e-11 * scale)


def test_eigenvalues_ascending_and_vectors_signed(rng):
    A = random_symmetric(rng)
    w, V = eigen_sym4(A)
    assert np.all(np.diff(w) >= 0.0)
    for k in range(4):
        assert V[np.argmax(np.abs(V[:, k])), k] > 0.0


def test_diagonal_input_is_sorted():
    w, V = eigen_sym4(np.diag([3.0, -1.0, 2.0, 0.5]))
    np.testing.assert_array_equal(w, [-1.0, 0.5, 2.0, 3.0])
    np.testing.assert_array_equal(np.abs(V), np.eye(4)[:, [1, 3, 2, 0]])


def test_zero_matrix():
    w, V = eigen_sym4(np.zeros((4, 4)))
    np.testing.assert_array_equal(w, np.zeros(4))
    np.testing.assert_array_equal(V, np.eye(4))


def test_repeated_eigenvalues(rng):
    Qm, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    A = Qm @ np.diag([1.0, 1.0, 2.0, 3.0]) @ Qm.T
    w, V = eigen_sym4(A)
    np.testing.assert_allclose(w, [1.0, 1.0, 2.0, 3.0], atol=1e-12)
    np.testing.assert_allclose(A @ V, V * w, atol=1e-11)


def test_other_small_sizes(rng):
    A = random_symmetric(rng, 3)
    w, _ = eigen_sym4(A)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A), atol=1e-12 * np.linalg.norm(A))


def test_rejects_asymmetric_and_non_finite(rng):
    A = rng.normal(size=(4, 4))
    with pytest.raises(InvalidArgumentError):
        eigen_sym4(A)
    B = np.eye(4)
    B[0, 0] = np.inf
    with pytest.raises(InvalidArgumentError):
        eigen_sym4(B)
    with pytest.raises(InvalidArgumentError):
        eigen_sym4(np.zeros((4, 3)))
