###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Principal component analysis on a cyclic Jacobi eigen-solver."""
from dataclasses import dataclass
import logging

import numpy as np

from neuroexam.errors import ConvergenceError, DegenerateError, \
    EmptyMatrixError

LOGGER = logging.getLogger(__name__)

JACOBI_TOL = 1e-10
MAX_SWEEPS = 100


def _off_norm(a):
    return float(np.sqrt(max(0.0, np.sum(a ** 2) - np.sum(np.diag(a) ** 2))))


def _rotate(a, v, p, q):
    theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
    sign = 1.0 if theta >= 0 else -1.0
    t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    col_p, col_q = a[:, p].copy(), a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    row_p, row_q = a[p, :].copy(), a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    a[p, q] = a[q, p] = 0.0

    vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
    v[:, p] = c * vec_p - s * vec_q
    v[:, q] = s * vec_p + c * vec_q


def jacobi_eigh(matrix, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """
    Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius norm falls below ``tol``
    times the norm of the matrix.

    :param matrix: Symmetric (n, n) array.
    :returns: (eigenvalues, eigenvectors) with eigenvalues descending and
        eigenvectors as columns.
    :raises ConvergenceError: If ``max_sweeps`` sweeps do not suffice.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("Eigen-decomposition needs a square matrix.")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(
            initial=0.0))):
        raise ValueError("Eigen-decomposition needs a symmetric matrix.")

    n = a.shape[0]
    v = np.eye(n)
    threshold = tol * max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    for sweep in range(max_sweeps + 1):
        off = _off_norm(a)
        if off <= threshold:
            LOGGER.debug("Jacobi converged after %d sweep(s).", sweep)
            break
        if sweep == max_sweeps:
            msg = "Jacobi eigen-solver did not converge in {} sweeps " \
                  "(off-diagonal norm {:.3e}).".format(max_sweeps, off)
            LOGGER.error(msg)
            raise ConvergenceError(msg)
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, v, p, q)

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], v[:, order]


def _orient(vectors):
    # Largest-magnitude entry of each eigenvector is made positive.
    for j in range(vectors.shape[1]):
        i = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[i, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return vectors


@dataclass(frozen=True, eq=False)
class PCAResult:
    """
    Principal components of a matrix.

    ``components`` holds one unit component per row, ``projections`` the
    centered rows expressed in those components.
    """

    components: np.ndarray
    projections: np.ndarray
    explained_variance: np.ndarray
    eigenvalues: np.ndarray
    mean: np.ndarray

    @property
    def k(self):
        return self.components.shape[0]

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.mean) @ self.components.T

    def inverse_transform(self, projections):
        return np.asarray(projections) @ self.components + self.mean


def pca(X, k=2):
    """
    Project rows onto the top ``k`` eigenvectors of their covariance.

    :param X: (rows, columns) array or FeatureMatrix, usually standardized.
    :param k: Number of components, at most the number of columns.
    :returns: A PCAResult with descending explained variance ratios.
    """
    X = np.asarray(getattr(X, "values", X), dtype=float)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] == 0:
        msg = "PCA needs at least two rows and one column, got shape {}." \
              .format(X.shape)
        LOGGER.error(msg)
        raise EmptyMatrixError(msg)
    if np.any(np.isnan(X)):
        raise ValueError("PCA input holds missing values.")
    if int(k) != k or not 1 <= k <= X.shape[1]:
        msg = "k must be an integer in [1, {}], got {}.".format(X.shape[1], k)
        LOGGER.error(msg)
        raise ValueError(msg)

    mean = X.mean(axis=0)
    centered = X - mean
    covariance = centered.T @ centered / (X.shape[0] - 1)
    values, vectors = jacobi_eigh(covariance)
    values = np.clip(values, 0.0, None)

    total = float(np.sum(values))
    if total <= 0:
        msg = "Every column is constant; no variance to explain."
        LOGGER.error(msg)
        raise DegenerateError(msg)

    k = int(k)
    components = _orient(vectors[:, :k]).T
    return PCAResult(
        components=components,
        projections=centered @ components.T,
        explained_variance=values[:k] / total,
        eigenvalues=values[:k],
        mean=mean,
    )
