###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Intra- and inter-class feature distances.

Every subject contributes four recordings: a normal and an abnormal
performance captured on each of two devices. Per feature, A-A compares the
two abnormal recordings, N-N the two normal ones and N-A the normal and
abnormal recordings of different devices.
"""
from collections import OrderedDict
from dataclasses import dataclass
import logging

import numpy as np

from neuroexam.abstracts.enums import Label
from neuroexam.errors import InsufficientDataError

LOGGER = logging.getLogger(__name__)

KINDS = ("aa", "nn", "na")


def _subject_roles(m):
    """Map each complete subject to its four row indices."""
    rows = OrderedDict()
    for i, subject in enumerate(m.groups):
        rows.setdefault(subject, []).append(i)

    complete = OrderedDict()
    for subject, idx in rows.items():
        devices = sorted({m.devices[i] for i in idx})
        roles = {}
        for i in idx:
            label = m.labels[i]
            if label is Label.UNLABELED or len(devices) != 2:
                continue
            key = (label, devices.index(m.devices[i]))
            roles.setdefault(key, []).append(i)
        if len(idx) == 4 and len(roles) == 4 and \
                all(len(v) == 1 for v in roles.values()):
            complete[subject] = {key: v[0] for key, v in roles.items()}
        else:
            LOGGER.warning("Subject '%s' skipped: expected a normal and an "
                           "abnormal recording on each of two devices.",
                           subject)
    return complete


@dataclass(frozen=True, eq=False)
class DistanceReport:
    """Normalized per-subject distances of every feature."""

    columns: tuple
    subjects: tuple
    aa: np.ndarray
    nn: np.ndarray
    na: np.ndarray

    def means(self):
        """Per-feature nan-aware means of each distance kind."""
        out = OrderedDict()
        for kind in KINDS:
            values = getattr(self, kind)
            with np.errstate(invalid="ignore"):
                observed = ~np.all(np.isnan(values), axis=0)
                means = np.full(values.shape[1], np.nan)
                means[observed] = np.nanmean(values[:, observed], axis=0)
            out[kind] = means
        return out

    def separated_fraction(self):
        """
        Share of features whose mean A-A and N-N both lie below mean N-A.
        """
        means = self.means()
        valid = ~(np.isnan(means["aa"]) | np.isnan(means["nn"]) |
                  np.isnan(means["na"]))
        if not np.any(valid):
            return 0.0
        below = (means["aa"] < means["na"]) & (means["nn"] < means["na"])
        return float(np.mean(below[valid]))

    def to_dict(self):
        means = self.means()
        features = OrderedDict()
        for j, name in enumerate(self.columns):
            entry = OrderedDict()
            for kind in KINDS:
                entry[kind] = getattr(self, kind)[:, j].tolist()
            for kind in KINDS:
                entry["mean_" + kind] = means[kind][j]
            features[name] = entry
        return OrderedDict([("subjects", list(self.subjects)),
                            ("separated_fraction", self.separated_fraction()),
                            ("features", features)])


def distance_study(m):
    """
    Compute A-A, N-N and N-A distances per feature and subject.

    All three are divided by the largest N-A distance of the feature across
    subjects. Missing features propagate as NaN.

    :param m: FeatureMatrix of one exam with subject, device and label.
    :raises InsufficientDataError: If no subject is complete.
    """
    subjects = _subject_roles(m)
    if not subjects:
        msg = "No subject has the four recordings the distance study needs."
        LOGGER.error(msg)
        raise InsufficientDataError(msg)

    X = m.values
    aa, nn, na = [], [], []
    for roles in subjects.values():
        n_p, n_t = X[roles[(Label.NORMAL, 0)]], X[roles[(Label.NORMAL, 1)]]
        a_p, a_t = X[roles[(Label.ABNORMAL, 0)]], \
            X[roles[(Label.ABNORMAL, 1)]]
        aa.append(np.abs(a_t - a_p))
        nn.append(np.abs(n_t - n_p))
        na.append((np.abs(a_t - n_p) + np.abs(n_t - a_p)) / 2.0)
    aa, nn, na = np.array(aa), np.array(nn), np.array(na)

    scale = np.max(np.where(np.isnan(na), -np.inf, na), axis=0)
    scale = np.where(np.isfinite(scale) & (scale > 0), scale, 1.0)

    LOGGER.info("Distance study over %d subject(s).", len(subjects))
    return DistanceReport(m.columns, tuple(subjects), aa / scale,
                          nn / scale, na / scale)
