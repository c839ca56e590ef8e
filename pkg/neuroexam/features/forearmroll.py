###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Forearm roll features from the vertical wrist oscillation."""
import logging

import numpy as np

from neuroexam.abstracts import FeatureExtractor
from neuroexam.abstracts.enums import Axis, BodyJoint, ExamKind, Skeleton
from neuroexam.datastructures.features import FeatureVector, StatSummary, \
    feature_names
from neuroexam.datastructures.pose import keypoint_series
from neuroexam.features.common import SIDES, cycle_maxima, put_sided, \
    put_summary, require_kind, resolve_config, stability
from neuroexam.preprocess import prepare, smooth
from neuroexam.signals import derivative, find_extrema

LOGGER = logging.getLogger(__name__)

REQUIRED_JOINTS = tuple(
    (Skeleton.B2, joint, side) for side in SIDES
    for joint in (BodyJoint.WRIST, BodyJoint.ELBOW)
)


def wrist_height(rec, side):
    return keypoint_series(rec, Skeleton.B2, BodyJoint.WRIST, side, Axis.Y)


def _side_features(raw, cfg):
    smoothed = smooth(raw, cfg.preprocess)
    radius = cfg.preprocess.windows(raw.fps)[0] // 2
    cycles = find_extrema(smoothed, cfg.prominence_frac, cfg.period_from,
                          reference=raw, refine_radius=radius)

    speed = np.abs(derivative(smoothed, 1).samples)
    accel = np.abs(derivative(smoothed, 2).samples)
    # One roll per swing between neighbouring extrema.
    swing_times = np.diff(cycles.extrema) / raw.fps

    return {
        "amplitude": StatSummary.from_values(cycles.amplitudes),
        "period": StatSummary.from_values(cycles.periods),
        "max_speed": StatSummary.from_values(cycle_maxima(speed, cycles)),
        "max_accel": StatSummary.from_values(cycle_maxima(accel, cycles)),
        "rolling_speed": StatSummary.from_values(
            cycles.amplitudes / swing_times),
        "roll_rate": len(cycles.maxima_idx) / raw.duration,
    }


def fr_features(rec, cfg=None, config_hash=""):
    """Compute the forearm roll catalogue of a recording."""
    require_kind(rec, ExamKind.FR)
    cfg = resolve_config(cfg)
    prepared = prepare(rec, cfg.preprocess, REQUIRED_JOINTS)

    sides = {side: _side_features(wrist_height(prepared, side), cfg)
             for side in SIDES}

    values = {}
    for quantity in ("amplitude", "period", "max_speed", "max_accel"):
        put_sided(values, "fr", quantity,
                  {side: sides[side][quantity] for side in SIDES}, asym=True)
    put_sided(values, "fr", "rolling_speed",
              {side: sides[side]["rolling_speed"] for side in SIDES})
    for side in SIDES:
        values["fr.roll_rate.{}".format(side.value)] = \
            sides[side]["roll_rate"]
    put_summary(values, "fr.elbow_stability",
                stability(prepared, BodyJoint.ELBOW))

    return FeatureVector.for_recording(rec, values, config_hash)


class ForearmRollExtractor(FeatureExtractor):
    """Extractor for forearm roll recordings."""

    key = ExamKind.FR

    @property
    def feature_names(self):
        return feature_names(self.key)

    def extract(self, recording, config_hash=""):
        return fr_features(recording, self.config, config_hash)
