from contextlib import nullcontext as does_not_raise

import numpy as np
import pytest
from pytest import raises

from neuroexam.analysis.pca import jacobi_eigh, pca
from neuroexam.errors import DegenerateError, EmptyMatrixError


def random_symmetric(n, seed=0):
    a = np.random.default_rng(seed).standard_normal((n, n))
    return a + a.T


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_jacobi_matches_numpy(n):
    matrix = random_symmetric(n, seed=n)
    values, vectors = jacobi_eigh(matrix)
    expected = np.linalg.eigvalsh(matrix)[::-1]
    np.testing.assert_allclose(values, expected, atol=1e-8)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(n), atol=1e-8)
    np.testing.assert_allclose(matrix @ vectors, vectors * values,
                               atol=1e-8)


def test_jacobi_diagonal_input():
    values, vectors = jacobi_eigh(np.diag([1.0, 3.0, 2.0]))
    np.testing.assert_array_equal(values, [3.0, 2.0, 1.0])
    np.testing.assert_array_equal(np.abs(vectors),
                                  [[0, 0, 1], [1, 0, 0], [0, 1, 0]])


@pytest.mark.parametrize(
    "matrix",
    [np.zeros((2, 3)), np.array([[1.0, 2.0], [0.0, 1.0]])],
)
def test_jacobi_invalid(matrix):
    with raises(ValueError):
        jacobi_eigh(matrix)


def test_pca_line():
    """Points on a line need one component for all of their variance."""
    t = np.linspace(-1.0, 1.0, 21)
    X = np.column_stack([t, 2 * t, -t])
    result = pca(X, k=2)
    assert result.explained_variance[0] == pytest.approx(1.0)
    assert result.explained_variance[1] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(np.abs(result.components[0]),
                               np.array([1, 2, 1]) / np.sqrt(6))


def test_pca_result():
    X = np.random.default_rng(1).standard_normal((40, 5)) * \
        np.array([5.0, 3.0, 1.0, 0.5, 0.1])
    result = pca(X, k=3)
    assert result.k == 3
    assert result.projections.shape == (40, 3)
    assert np.all(np.diff(result.explained_variance) <= 0)
    assert float(np.sum(result.explained_variance)) < 1.0
    np.testing.assert_allclose(result.components @ result.components.T,
                               np.eye(3), atol=1e-10)
    np.testing.assert_allclose(result.transform(X), result.projections)
    np.testing.assert_allclose(result.projections.mean(axis=0), 0.0,
                               atol=1e-10)
    # Sign convention: the largest loading of each component is positive.
    for row in result.components:
        assert row[np.argmax(np.abs(row))] > 0


def test_pca_row_order():
    """Shuffling rows shuffles the projections and nothing else."""
    rng = np.random.default_rng(5)
    X = rng.standard_normal((30, 5)) * [3.0, 2.0, 1.5, 1.0, 0.5]
    order = rng.permutation(30)
    result, shuffled = pca(X, k=3), pca(X[order], k=3)
    expected = result.projections[order]
    signs = np.sign(np.sum(expected * shuffled.projections, axis=0))
    np.testing.assert_allclose(shuffled.projections, expected * signs,
                               atol=1e-6)
    np.testing.assert_allclose(shuffled.components @ shuffled.components.T,
                               np.eye(3), atol=1e-10)


def test_pca_full_rank_reconstructs():
    X = np.random.default_rng(2).standard_normal((10, 4))
    result = pca(X, k=4)
    assert float(np.sum(result.explained_variance)) == pytest.approx(1.0)
    np.testing.assert_allclose(
        result.inverse_transform(result.projections), X, atol=1e-10)


@pytest.mark.parametrize(
    "X, k, error",
    [
        (np.ones((5, 3)) * np.arange(3), 2, raises(DegenerateError)),
        (np.zeros((1, 3)), 1, raises(EmptyMatrixError)),
        (np.zeros((4, 0)), 1, raises(EmptyMatrixError)),
        (np.array([[1.0, np.nan], [0.0, 1.0]]), 1, raises(ValueError)),
        (np.eye(3), 0, raises(ValueError)),
        (np.eye(3), 4, raises(ValueError)),
        (np.eye(3), 1.5, raises(ValueError)),
        (np.eye(3), 3, does_not_raise()),
    ],
)
def test_pca_invalid(X, k, error):
    with error:
        pca(X, k)
