from __future__ import annotations

import logging
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from eigenfactors.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-9
OFF_DIAGONAL_TOLERANCE = 1e-13
MAX_SWEEPS = 50


def eigen_sym4(
    A: ArrayLike,
    tol: float = OFF_DIAGONAL_TOLERANCE,
    max_sweeps: int = MAX_SWEEPS,
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Cyclic Jacobi eigendecomposition of a small symmetric matrix.

    Returns ``(w, V)`` with eigenvalues ascending and eigenvectors in the
    columns of ``V``. Each eigenvector is signed so that its largest-magnitude
    component is positive.
    """
    a = np.array(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("matrix has non-finite entries")
    scale = float(np.linalg.norm(a))
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOLERANCE * max(1.0, scale):
        raise InvalidArgumentError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    V = np.eye(n)

    if scale > 0.0:
        for _ in range(max_sweeps):
            off = np.linalg.norm(a - np.diag(np.diag(a)))
            if off <= tol * scale:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    col_p, col_q = a[:, p].copy(), a[:, q].copy()
                    a[:, p] = c * col_p - s * col_q
                    a[:, q] = s * col_p + c * col_q
                    row_p, row_q = a[p, :].copy(), a[q, :].copy()
                    a[p, :] = c * row_p - s * row_q
                    a[q, :] = s * row_p + c * row_q
                    a[p, q] = a[q, p] = 0.0
                    vp, vq = V[:, p].copy(), V[:, q].copy()
                    V[:, p] = c * vp - s * vq
                    V[:, q] = s * vp + c * vq
        else:
            logger.warning("Jacobi did not converge in %d sweeps", max_sweeps)

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    for k in range(n):
        if V[np.argmax(np.abs(V[:, k])), k] < 0.0:
            V[:, k] = -V[:, k]
    return w, V
