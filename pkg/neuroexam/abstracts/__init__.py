###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
The core abstract APIs that define extractor and classifier behavior.

Concrete implementations live in :mod:`neuroexam.features` and
:mod:`neuroexam.analysis` and are discovered by their factories through the
``key`` class attribute.
"""
from abc import ABCMeta, abstractmethod
import logging

import numpy as np

__all__ = ("Classifier", "FeatureExtractor")

LOGGER = logging.getLogger(__name__)


class FeatureExtractor(metaclass=ABCMeta):
    """
    Abstract class representing a per-exam feature extractor.

    An extractor turns one validated PoseRecording of its exam kind into a
    FeatureVector whose names match the exam's feature catalogue exactly.
    """

    # The ExamKind handled by the extractor.
    key = None

    def __init__(self, config=None):
        """
        Initialize a new extractor.

        :param config: An ExtractionConfig, or None for the defaults.
        """
        self._config = config
        LOGGER.debug("Extractor '%s' created.", type(self).__name__)

    @property
    def config(self):
        return self._config

    @property
    @abstractmethod
    def feature_names(self):
        """Ordered feature names emitted by this extractor."""
        pass

    @abstractmethod
    def extract(self, recording, config_hash=""):
        """
        Compute the features of a recording.

        :param recording: A PoseRecording of this extractor's exam kind.
        :param config_hash: Hash of the run configuration for provenance.
        :returns: A FeatureVector.
        """
        pass


class Classifier(metaclass=ABCMeta):
    """Abstract binary classifier over standardized feature rows."""

    # Name used to select the classifier from configuration and the CLI.
    key = None

    @abstractmethod
    def fit(self, X, y):
        """
        Train on a matrix of rows and binary targets.

        :param X: Array of shape (rows, columns) without missing values.
        :param y: Array of 0 (normal) and 1 (abnormal) targets.
        :returns: The fitted classifier.
        """
        pass

    @abstractmethod
    def predict_proba(self, X):
        """Probability of the abnormal class for each row."""
        pass

    def predict(self, X, threshold=0.5):
        """Hard labels: 1 where the abnormal probability reaches threshold."""
        return (np.asarray(self.predict_proba(X)) >= threshold).astype(int)

    def feature_importance(self, columns):
        """
        Per-feature importance as a sorted list of (name, score).

        Classifiers without an importance measure return None.
        """
        return None

    @abstractmethod
    def to_dict(self):
        """JSON compatible description of the fitted parameters."""
        pass

    @classmethod
    @abstractmethod
    def from_dict(cls, data):
        """Rebuild a fitted classifier from :meth:`to_dict` output."""
        pass
