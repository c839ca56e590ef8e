from contextlib import nullcontext as does_not_raise

import numpy as np
import pytest
from pytest import raises

from neuroexam.analysis import ClassifierFactory
from neuroexam.analysis.forest import DecisionTree, RandomForest, gini, \
    resolve_max_features, train_random_forest
from neuroexam.analysis.logreg import LogisticRegression, \
    loss_and_gradient, train_logreg


def informative_data(n=60, seed=0):
    """Column 0 separates the classes, column 1 is noise."""
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n // 2)
    X = np.column_stack([
        np.where(y == 1, 2.0, -2.0) + 0.5 * rng.standard_normal(n),
        rng.standard_normal(n),
    ])
    return X, y


def xor_data(repeats=3):
    X = np.tile([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]],
                (repeats, 1))
    y = np.tile([0, 1, 1, 0], repeats)
    return X, y


@pytest.mark.parametrize(
    "model_id, expected, error",
    [
        ("logreg", LogisticRegression, does_not_raise()),
        ("LogReg", LogisticRegression, does_not_raise()),
        ("rf", RandomForest, does_not_raise()),
        ("svm", None, raises(ValueError)),
    ],
)
def test_get_classifier(model_id, expected, error):
    with error:
        assert ClassifierFactory.get_classifier(model_id) is expected


def test_valid_classifiers():
    assert set(ClassifierFactory.get_valid_classifiers()) == {"logreg", "rf"}


def test_loss_gradient_matches_finite_differences():
    X, y = informative_data(20)
    theta = np.array([0.3, -0.2, 0.1])
    _, grad = loss_and_gradient(theta, X, y, 0.1)
    eps = 1e-6
    numeric = np.array([
        (loss_and_gradient(theta + eps * e, X, y, 0.1)[0] -
         loss_and_gradient(theta - eps * e, X, y, 0.1)[0]) / (2 * eps)
        for e in np.eye(3)
    ])
    np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-8)


def test_logreg_separates():
    X, y = informative_data()
    model = train_logreg(X, y)
    assert np.array_equal(model.predict(X), y)
    assert model.weights[0] > 0
    assert abs(model.weights[0]) > abs(model.weights[1])


def test_logreg_loss_never_increases():
    X, y = informative_data()
    model = LogisticRegression(lr=5.0, epochs=300).fit(X, y)
    assert np.all(np.diff(model.history) <= 0)
    assert model.loss(X, y) == pytest.approx(model.history[-1])


def test_logreg_l2_shrinks_weights():
    X, y = informative_data()
    loose = train_logreg(X, y, l2=1e-3)
    tight = train_logreg(X, y, l2=1.0)
    assert np.linalg.norm(tight.weights) < np.linalg.norm(loose.weights)


def test_logreg_threshold():
    X, y = informative_data()
    model = train_logreg(X, y)
    scores = model.predict_proba(X)
    assert np.all((scores >= 0) & (scores <= 1))
    assert np.all(model.predict(X, threshold=1.1) == 0)
    assert np.all(model.predict(X, threshold=0.0) == 1)


def test_logreg_importance():
    X, y = informative_data()
    ranking = train_logreg(X, y).feature_importance(["signal", "noise"])
    assert [name for name, _ in ranking] == ["signal", "noise"]
    assert sum(w for _, w in ranking) == pytest.approx(1.0)


def test_logreg_importance_without_weights():
    """Uninformative all-zero inputs leave every weight at zero."""
    model = train_logreg(np.zeros((4, 2)), [0, 1, 0, 1])
    assert model.feature_importance(["a", "b"]) is None


def test_logreg_round_trip():
    X, y = informative_data()
    model = train_logreg(X, y)
    restored = LogisticRegression.from_dict(model.to_dict())
    np.testing.assert_array_equal(restored.predict_proba(X),
                                  model.predict_proba(X))
    assert restored.l2 == model.l2


@pytest.mark.parametrize(
    "kwargs",
    [{"lr": 0.0}, {"epochs": 0}, {"l2": -1.0}, {"tol": 0.0}],
)
def test_logreg_invalid_settings(kwargs):
    with raises(ValueError):
        LogisticRegression(**kwargs)


@pytest.mark.parametrize(
    "X, y",
    [
        (np.zeros((0, 2)), np.zeros(0)),
        (np.zeros((3, 2)), np.zeros(2)),
        (np.zeros(3), np.zeros(3)),
        (np.zeros((2, 2)), np.array([0, 2])),
    ],
)
@pytest.mark.parametrize("model", [LogisticRegression, RandomForest])
def test_invalid_training_data(model, X, y):
    with raises(ValueError):
        model().fit(X, y)


@pytest.mark.parametrize("model", [LogisticRegression, RandomForest])
def test_unfitted(model):
    with raises(ValueError):
        model().predict_proba(np.zeros((1, 2)))


@pytest.mark.parametrize(
    "positives, total, expected",
    [(0, 4, 0.0), (4, 4, 0.0), (1, 2, 0.5), (1, 4, 0.375), (0, 0, 0.0)],
)
def test_gini(positives, total, expected):
    assert float(gini(np.array(positives, float),
                      np.array(total, float))) == pytest.approx(expected)


def test_tree_learns_xor():
    """A split without gain at the root still lets the children separate."""
    X, y = xor_data()
    tree = DecisionTree(max_depth=2, min_leaf=1).fit(X, y)
    assert tree.depth == 2
    np.testing.assert_array_equal(tree.predict_proba(X), y)


def test_tree_depth_limit():
    X, y = xor_data()
    tree = DecisionTree(max_depth=1, min_leaf=1).fit(X, y)
    np.testing.assert_allclose(tree.predict_proba(X), 0.5)


def test_tree_pure_node_is_leaf():
    tree = DecisionTree().fit(np.arange(6.0).reshape(3, 2), [1, 1, 1])
    assert tree.n_nodes == 1
    assert tree.depth == 0
    np.testing.assert_array_equal(tree.impurity_decrease(2), [0.0, 0.0])


def test_forest_separates():
    X, y = informative_data()
    forest = train_random_forest(X, y, n_trees=25, seed=1)
    assert np.array_equal(forest.predict(X), y)
    scores = forest.importances()
    assert scores.sum() == pytest.approx(1.0)
    assert scores[0] > scores[1]
    ranking = forest.feature_importance(["signal", "noise"])
    assert ranking[0][0] == "signal"


def test_forest_is_seeded():
    X, y = informative_data()
    a = RandomForest(n_trees=10, seed=4).fit(X, y)
    b = RandomForest(n_trees=10, seed=4).fit(X, y)
    np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))
    np.testing.assert_array_equal(a.importances(), b.importances())


def test_forest_uniform_importance_without_splits():
    forest = RandomForest(n_trees=5).fit(np.random.default_rng(0)
                                         .standard_normal((10, 4)),
                                         np.zeros(10))
    np.testing.assert_allclose(forest.importances(), 0.25)


def test_forest_round_trip():
    X, y = informative_data()
    forest = RandomForest(n_trees=10, max_depth=3).fit(X, y)
    restored = RandomForest.from_dict(forest.to_dict())
    np.testing.assert_array_equal(restored.predict_proba(X),
                                  forest.predict_proba(X))
    assert restored.max_depth == 3


@pytest.mark.parametrize(
    "spec, n_features, expected, error",
    [
        ("sqrt", 16, 4, does_not_raise()),
        ("log2", 8, 3, does_not_raise()),
        ("log2", 1, 1, does_not_raise()),
        ("all", 5, 5, does_not_raise()),
        (None, 5, 5, does_not_raise()),
        (0.5, 10, 5, does_not_raise()),
        (3, 2, 2, does_not_raise()),
        (0, 5, None, raises(ValueError)),
        (1.5, 5, None, raises(ValueError)),
        (True, 5, None, raises(ValueError)),
        ("half", 5, None, raises(ValueError)),
    ],
)
def test_resolve_max_features(spec, n_features, expected, error):
    with error:
        assert resolve_max_features(spec, n_features) == expected


@pytest.mark.parametrize(
    "kwargs",
    [{"n_trees": 0}, {"max_depth": 1.5}, {"min_leaf": -1},
     {"feature_subsample": "half"}],
)
def test_forest_invalid_settings(kwargs):
    with raises(ValueError):
        RandomForest(**kwargs)
