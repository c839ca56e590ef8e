###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Cross-validated evaluation and trained model bundles."""
from collections import OrderedDict
import copy
from dataclasses import dataclass, field
import logging

import numpy as np
from sklearn.metrics import average_precision_score, confusion_matrix, \
    roc_auc_score
from sklearn.model_selection import StratifiedGroupKFold, StratifiedKFold

from neuroexam.analysis.matrix import FeaturePipeline
from neuroexam.errors import DegenerateFoldError, EmptyMatrixError

LOGGER = logging.getLogger(__name__)

METRICS = ("accuracy", "precision", "recall", "specificity", "f1", "auc",
           "ap")
SPLITS = ("video_based", "subject_based")


def _ratio(num, den):
    return float(num) / float(den) if den else 0.0


def harmonic_mean(a, b):
    return 2.0 * a * b / (a + b) if a + b > 0 else 0.0


def binary_metrics(y_true, scores, threshold=0.5):
    """
    Threshold and ranking metrics of abnormality scores.

    AUC integrates the ROC curve with the trapezoid rule; AP sums precision
    over the recall steps.

    :raises DegenerateFoldError: If only one class is present.
    """
    y_true = np.asarray(y_true, dtype=int)
    scores = np.asarray(scores, dtype=float)
    if len(np.unique(y_true)) != 2:
        msg = "Metrics need both classes, got labels {}." \
              .format(sorted(set(y_true.tolist())))
        LOGGER.error(msg)
        raise DegenerateFoldError(msg)

    predicted = (scores >= threshold).astype(int)
    tn, fp, fn, tp = confusion_matrix(y_true, predicted,
                                      labels=[0, 1]).ravel()
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    return OrderedDict([
        ("accuracy", _ratio(tp + tn, len(y_true))),
        ("precision", precision),
        ("recall", recall),
        ("specificity", _ratio(tn, tn + fp)),
        ("f1", harmonic_mean(precision, recall)),
        ("auc", float(roc_auc_score(y_true, scores))),
        ("ap", float(average_precision_score(y_true, scores))),
    ])


@dataclass(frozen=True)
class SplitScheme:
    """How recordings are assigned to cross-validation folds."""

    kind: str = "video_based"
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SPLITS:
            msg = "Split '{}' not valid. Expected one of {}." \
                  .format(self.kind, ", ".join(SPLITS))
            LOGGER.error(msg)
            raise ValueError(msg)
        if int(self.folds) != self.folds or self.folds < 2:
            raise ValueError("A split needs at least 2 folds.")

    def split(self, m):
        """
        Yield (train, test) row indices for each fold.

        Subject-based folds keep every subject on one side of the split.

        :raises DegenerateFoldError: If a test fold lacks a class.
        """
        y = m.targets
        groups = np.asarray(m.groups)
        if self.kind == "video_based":
            splitter = StratifiedKFold(self.folds, shuffle=True,
                                       random_state=self.seed)
            args = (np.zeros(len(y)), y)
        else:
            splitter = StratifiedGroupKFold(self.folds, shuffle=True,
                                            random_state=self.seed)
            args = (np.zeros(len(y)), y, groups)

        try:
            folds = list(splitter.split(*args))
        except ValueError as exc:
            msg = "Cannot build {} {}-fold split: {}".format(
                self.kind, self.folds, exc)
            LOGGER.error(msg)
            raise DegenerateFoldError(msg)

        for i, (train, test) in enumerate(folds):
            if len(np.unique(y[test])) != 2:
                msg = "Test fold {} of the {} split lacks a class." \
                      .format(i, self.kind)
                LOGGER.error(msg)
                raise DegenerateFoldError(msg)
            if self.kind == "subject_based" and \
                    set(groups[train]) & set(groups[test]):
                raise DegenerateFoldError(
                    "Fold {} shares subjects between train and test."
                    .format(i))
            yield train, test


@dataclass
class EvalReport:
    """
    Per-fold and averaged metrics of a cross-validated model.

    The averaged f1 is the harmonic mean of the averaged precision and
    recall.
    """

    model: str
    split: str
    folds: list = field(default_factory=list)
    n_rows: int = 0

    @property
    def metrics(self):
        means = OrderedDict(
            (name, float(np.mean([fold[name] for fold in self.folds])))
            for name in METRICS)
        means["f1"] = harmonic_mean(means["precision"], means["recall"])
        return means

    def to_dict(self):
        return OrderedDict([
            ("model", self.model),
            ("split", self.split),
            ("n_rows", self.n_rows),
            ("metrics", self.metrics),
            ("folds", OrderedDict(
                (name, [fold[name] for fold in self.folds])
                for name in METRICS)),
        ])


def evaluate(model, m, split, threshold=0.5):
    """
    Cross-validate a classifier on the labeled rows of a feature matrix.

    Imputation and standardization are fitted on each training fold only.

    :param model: An unfitted Classifier; each fold trains a copy.
    :param m: A FeatureMatrix.
    :param split: A SplitScheme.
    :returns: An EvalReport.
    """
    m = m.labeled()
    if m.n_rows == 0:
        raise EmptyMatrixError("No labeled rows to evaluate.")

    report = EvalReport(model.key, split.kind, n_rows=m.n_rows)
    y = m.targets
    for i, (train, test) in enumerate(split.split(m)):
        pipeline = FeaturePipeline().fit(m.take(train))
        clf = copy.deepcopy(model).fit(pipeline.transform(m.take(train)),
                                       y[train])
        scores = clf.predict_proba(pipeline.transform(m.take(test)))
        report.folds.append(binary_metrics(y[test], scores, threshold))
        LOGGER.info("Fold %d: accuracy %.3f", i,
                    report.folds[-1]["accuracy"])
    return report


class ModelBundle(object):
    """A classifier with the preprocessing it was trained behind."""

    def __init__(self, pipeline, classifier, threshold=0.5):
        self.pipeline = pipeline
        self.classifier = classifier
        self.threshold = float(threshold)

    @classmethod
    def train(cls, model, m, threshold=0.5):
        """Fit preprocessing and a copy of ``model`` on all labeled rows."""
        m = m.labeled()
        pipeline = FeaturePipeline().fit(m)
        classifier = copy.deepcopy(model).fit(pipeline.transform(m),
                                              m.targets)
        return cls(pipeline, classifier, threshold)

    @property
    def columns(self):
        return self.pipeline.output_columns

    def scores(self, m):
        return np.asarray(self.classifier.predict_proba(
            self.pipeline.transform(m)), dtype=float)

    def predict(self, m):
        """(scores, predictions) for every row of ``m``."""
        scores = self.scores(m)
        return scores, (scores >= self.threshold).astype(int)

    def feature_importance(self):
        return self.classifier.feature_importance(self.columns)

    def to_dict(self):
        return OrderedDict([
            ("threshold", self.threshold),
            ("pipeline", self.pipeline.to_dict()),
            ("classifier", self.classifier.to_dict()),
        ])

    @classmethod
    def from_dict(cls, data):
        from neuroexam.analysis import ClassifierFactory

        spec = data["classifier"]
        classifier = ClassifierFactory.get_classifier(spec["model"])
        return cls(FeaturePipeline.from_dict(data["pipeline"]),
                   classifier.from_dict(spec), data.get("threshold", 0.5))
