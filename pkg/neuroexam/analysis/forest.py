###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Random forest of Gini CART trees.

Trees are stored as flat node arrays so a fitted forest serializes to plain
JSON. Leaf nodes carry ``feature == -1``.
"""
import logging
import math

import numpy as np

from neuroexam.abstracts import Classifier

LOGGER = logging.getLogger(__name__)

LEAF = -1


def gini(positives, total):
    """Gini impurity of a binary node; vectorized over arrays."""
    p = np.divide(positives, total, out=np.zeros_like(positives, float),
                  where=total > 0)
    return 2.0 * p * (1.0 - p)


class DecisionTree(object):
    """A binary CART tree grown with the Gini criterion."""

    def __init__(self, max_depth=8, min_leaf=2, max_features=None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []
        self.n_samples = []
        self.impurity = []

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def depth(self):
        depths = [0] * self.n_nodes
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                for child in (self.left[node], self.right[node]):
                    depths[child] = depths[node] + 1
        return max(depths) if depths else 0

    def _add_node(self, y):
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(float(np.mean(y)))
        self.n_samples.append(int(len(y)))
        self.impurity.append(float(gini(np.sum(y), len(y))))
        return len(self.feature) - 1

    def _best_split(self, X, y, features):
        """Best (decrease, feature, threshold) over ``features``, or None."""
        n = len(y)
        parent = gini(np.sum(y), n)
        best = None
        for f in features:
            order = np.argsort(X[:, f], kind="stable")
            xs, ys = X[order, f], y[order]
            left_n = np.arange(1, n)
            left_pos = np.cumsum(ys)[:-1]
            right_n = n - left_n
            right_pos = np.sum(ys) - left_pos

            valid = (xs[1:] > xs[:-1]) & (left_n >= self.min_leaf) & \
                (right_n >= self.min_leaf)
            if not np.any(valid):
                continue
            child = (left_n * gini(left_pos, left_n) +
                     right_n * gini(right_pos, right_n)) / n
            decrease = np.where(valid, parent - child, -np.inf)
            i = int(np.argmax(decrease))
            if best is None or decrease[i] > best[0] + 1e-12:
                best = (float(decrease[i]), int(f),
                        float((xs[i] + xs[i + 1]) / 2.0))
        return best

    def _grow(self, X, y, depth, rng):
        node = self._add_node(y)
        if depth >= self.max_depth or len(y) < 2 * self.min_leaf or \
                self.impurity[node] == 0.0:
            return node

        p = X.shape[1]
        order = rng.permutation(p)
        m = p if self.max_features is None else self.max_features
        # Search past the sampled features only until a valid split exists.
        split = self._best_split(X, y, order[:m])
        if split is None:
            for f in order[m:]:
                split = self._best_split(X, y, [f])
                if split is not None:
                    break
        if split is None:
            return node

        _, feature, threshold = split
        mask = X[:, feature] <= threshold
        self.feature[node] = feature
        self.threshold[node] = threshold
        self.left[node] = self._grow(X[mask], y[mask], depth + 1, rng)
        self.right[node] = self._grow(X[~mask], y[~mask], depth + 1, rng)
        return node

    def fit(self, X, y, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self._grow(np.asarray(X, float), np.asarray(y, float), 0, rng)
        return self

    def apply(self, X):
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=float)
        nodes = np.zeros(len(X), dtype=int)
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left, right = np.asarray(self.left), np.asarray(self.right)
        active = feature[nodes] != LEAF
        while np.any(active):
            idx = np.flatnonzero(active)
            cur = nodes[idx]
            go_left = X[idx, feature[cur]] <= threshold[cur]
            nodes[idx] = np.where(go_left, left[cur], right[cur])
            active = feature[nodes] != LEAF
        return nodes

    def predict_proba(self, X):
        return np.asarray(self.value)[self.apply(X)]

    def impurity_decrease(self, n_features):
        """Per-feature sample-weighted Gini decrease, normalized to sum 1."""
        scores = np.zeros(n_features)
        root = self.n_samples[0]
        for node in range(self.n_nodes):
            f = self.feature[node]
            if f == LEAF:
                continue
            left, right = self.left[node], self.right[node]
            scores[f] += (
                self.n_samples[node] * self.impurity[node]
                - self.n_samples[left] * self.impurity[left]
                - self.n_samples[right] * self.impurity[right]) / root
        total = scores.sum()
        return scores / total if total > 0 else scores

    def to_dict(self):
        return {name: list(getattr(self, name))
                for name in ("feature", "threshold", "left", "right",
                             "value", "n_samples", "impurity")}

    @classmethod
    def from_dict(cls, data):
        tree = cls()
        for name, values in data.items():
            setattr(tree, name, list(values))
        return tree


def resolve_max_features(spec, n_features):
    """Number of features examined per split."""
    if spec in (None, "all"):
        return n_features
    if spec == "sqrt":
        return max(1, int(round(math.sqrt(n_features))))
    if spec == "log2":
        return max(1, int(round(math.log2(n_features)))) \
            if n_features > 1 else 1
    if isinstance(spec, float) and 0 < spec <= 1:
        return max(1, int(round(spec * n_features)))
    if isinstance(spec, int) and not isinstance(spec, bool) and spec >= 1:
        return min(spec, n_features)
    msg = "feature_subsample must be 'sqrt', 'log2', 'all', a fraction or " \
          "a positive integer, got {!r}.".format(spec)
    LOGGER.error(msg)
    raise ValueError(msg)


class RandomForest(Classifier):
    """
    Bagged CART trees voting by majority.

    The abnormal probability of a row is the fraction of trees whose leaf
    predicts abnormal.
    """

    key = "rf"

    def __init__(self, n_trees=200, max_depth=8, min_leaf=2,
                 feature_subsample="sqrt", seed=0):
        for name, value in (("n_trees", n_trees), ("max_depth", max_depth),
                            ("min_leaf", min_leaf)):
            if int(value) != value or value < 1:
                msg = "{} must be a positive integer, got {}." \
                      .format(name, value)
                LOGGER.error(msg)
                raise ValueError(msg)
        resolve_max_features(feature_subsample, 1)

        self.n_trees = int(n_trees)
        self.max_depth = int(max_depth)
        self.min_leaf = int(min_leaf)
        self.feature_subsample = feature_subsample
        self.seed = int(seed)
        self.trees = []
        self.n_features = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or len(X) == 0 or len(X) != len(y):
            raise ValueError("Expected a non-empty (rows, columns) matrix "
                             "and one target per row.")
        if not np.all(np.isin(y, (0, 1))):
            raise ValueError("Targets must be 0 or 1.")

        n, p = X.shape
        m = resolve_max_features(self.feature_subsample, p)
        rng = np.random.default_rng(self.seed)
        self.trees = []
        for _ in range(self.n_trees):
            sample = rng.integers(0, n, n)
            tree = DecisionTree(self.max_depth, self.min_leaf, m)
            self.trees.append(tree.fit(X[sample], y[sample], rng))
        self.n_features = p
        LOGGER.debug("Random forest of %d trees grown on %d rows.",
                     self.n_trees, n)
        return self

    def predict_proba(self, X):
        if not self.trees:
            raise ValueError("Random forest is not fitted.")
        votes = [tree.predict_proba(X) >= 0.5 for tree in self.trees]
        return np.mean(votes, axis=0)

    def importances(self):
        """Mean decrease in Gini impurity per feature, summing to 1."""
        scores = np.mean([tree.impurity_decrease(self.n_features)
                          for tree in self.trees], axis=0)
        total = scores.sum()
        if total == 0:
            return np.full(self.n_features, 1.0 / self.n_features)
        return scores / total

    def feature_importance(self, columns):
        scores = self.importances()
        order = sorted(range(len(scores)), key=lambda j: (-scores[j], j))
        return [(columns[j], float(scores[j])) for j in order]

    def to_dict(self):
        return {
            "model": self.key,
            "params": {"n_trees": self.n_trees, "max_depth": self.max_depth,
                       "min_leaf": self.min_leaf,
                       "feature_subsample": self.feature_subsample,
                       "seed": self.seed},
            "n_features": self.n_features,
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, data):
        forest = cls(**data["params"])
        forest.n_features = data["n_features"]
        forest.trees = [DecisionTree.from_dict(t) for t in data["trees"]]
        return forest


def train_random_forest(X, y, n_trees=200, max_depth=8, min_leaf=2,
                        feature_subsample="sqrt", seed=0):
    return RandomForest(n_trees, max_depth, min_leaf, feature_subsample,
                        seed).fit(X, y)


def feature_importance(model, columns):
    """(feature, weight) pairs of a fitted forest, descending."""
    return model.feature_importance(columns)
