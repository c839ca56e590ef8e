from contextlib import nullcontext as does_not_raise

import numpy as np
import pytest
from pytest import raises
from scipy.integrate import trapezoid

from neuroexam.abstracts.enums import Label
from neuroexam.analysis.density import class_densities, feature_density
from neuroexam.analysis.matrix import FeatureMatrix
from neuroexam.errors import EmptyMatrixError


def test_separated_classes():
    values = [0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0, 13.0]
    density = feature_density("ft.a", values, [0] * 4 + [1] * 4)
    assert density.overlap < 0.05
    assert density.means[Label.NORMAL] == pytest.approx(1.5)
    assert density.means[Label.ABNORMAL] == pytest.approx(11.5)
    assert density.counts == {Label.NORMAL: 4, Label.ABNORMAL: 4}


def test_identical_classes():
    values = np.random.default_rng(0).standard_normal(50)
    density = feature_density("ft.a", np.concatenate([values, values]),
                              [0] * 50 + [1] * 50)
    assert density.overlap == pytest.approx(1.0, abs=0.01)


def test_density_grid():
    """The grid pads the pooled range by a quarter on each side."""
    density = feature_density("ft.a", [0.0, 4.0, 1.0, 3.0], [0, 0, 1, 1],
                              grid_points=11)
    np.testing.assert_allclose(density.grid, np.linspace(-1.0, 5.0, 11))
    for label in (Label.NORMAL, Label.ABNORMAL):
        assert density.densities[label].shape == (11,)
        assert np.all(density.densities[label] >= 0)


def test_density_integrates_to_one():
    values = np.random.default_rng(1).standard_normal(40)
    density = feature_density("ft.a", values, [0, 1] * 20, grid_points=400)
    for label in (Label.NORMAL, Label.ABNORMAL):
        area = trapezoid(density.densities[label], density.grid)
        assert area == pytest.approx(1.0, abs=0.05)


def test_degenerate_class():
    """A constant class has no density and the overlap is undefined."""
    density = feature_density("ft.a", [1.0, 1.0, 2.0, 3.0],
                              [0, 0, 1, 1])
    assert density.densities[Label.NORMAL] is None
    assert density.densities[Label.ABNORMAL] is not None
    assert density.overlap is None
    assert density.stds[Label.NORMAL] == 0.0


def test_missing_values_are_ignored():
    density = feature_density("ft.a", [np.nan, 1.0, 2.0, np.nan, 5.0, 6.0],
                              [0, 0, 0, 1, 1, 1])
    assert density.counts == {Label.NORMAL: 2, Label.ABNORMAL: 2}
    assert density.means[Label.ABNORMAL] == pytest.approx(5.5)


def test_empty_feature():
    density = feature_density("ft.a", [np.nan, np.nan], [0, 1])
    assert density.means[Label.NORMAL] is None
    assert density.overlap is None
    assert density.to_dict()["normal"]["density"] is None


def make_matrix():
    return FeatureMatrix(
        values=[[0.0, 1.0], [1.0, 2.0], [2.0, 2.5], [5.0, 7.0], [6.0, 8.0],
                [7.0, 8.5], [3.0, 3.0]],
        columns=("fr.a", "fr.b"),
        recording_ids=tuple("r{}".format(i) for i in range(7)),
        labels=("normal",) * 3 + ("abnormal",) * 3 + ("unlabeled",),
        groups=tuple("S{}".format(i) for i in range(7)),
        devices=("phone",) * 7,
    )


def test_class_densities():
    out = class_densities(make_matrix(), grid_points=50)
    assert list(out) == ["fr.a", "fr.b"]
    assert out["fr.a"].counts == {Label.NORMAL: 3, Label.ABNORMAL: 3}
    assert out["fr.b"].grid.shape == (50,)

    data = out["fr.a"].to_dict()
    assert list(data) == ["grid", "normal", "abnormal", "overlap"]
    assert data["abnormal"]["mean"] == pytest.approx(6.0)


@pytest.mark.parametrize(
    "grid_points, error",
    [
        (2, does_not_raise()),
        (1, raises(ValueError)),
        (10.5, raises(ValueError)),
    ],
)
def test_class_densities_grid_points(grid_points, error):
    with error:
        class_densities(make_matrix(), grid_points=grid_points)


def test_class_densities_without_labels():
    m = make_matrix().take([6])
    with raises(EmptyMatrixError):
        class_densities(m)
