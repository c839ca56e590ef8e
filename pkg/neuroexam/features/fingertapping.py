###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Finger tapping features from the thumb to index fingertip distance."""
import logging

import numpy as np

from neuroexam.abstracts import FeatureExtractor
from neuroexam.abstracts.enums import BodyJoint, ExamKind, HandJoint, \
    Skeleton
from neuroexam.datastructures.features import FeatureVector, StatSummary, \
    feature_names
from neuroexam.datastructures.pose import TimeSeries1D, keypoint_positions
from neuroexam.features.common import SIDES, cycle_maxima, put_sided, \
    put_summary, require_kind, resolve_config, stability
from neuroexam.preprocess import prepare, smooth
from neuroexam.signals import derivative, find_extrema

LOGGER = logging.getLogger(__name__)

REQUIRED_JOINTS = tuple(
    (Skeleton.H2, joint, side) for side in SIDES
    for joint in (HandJoint.THUMB_TIP, HandJoint.INDEX_TIP)
) + tuple(
    (Skeleton.B2, joint, side) for side in SIDES
    for joint in (BodyJoint.WRIST, BodyJoint.ELBOW)
)


def ft_distance(rec, side):
    """
    Per-frame distance between the thumb tip and index tip of one hand.

    :param rec: A PoseRecording carrying the hand groups.
    :param side: Side of the hand.
    :returns: TimeSeries1D at the recording's rate.
    """
    thumb = keypoint_positions(rec, Skeleton.H2, HandJoint.THUMB_TIP, side)
    index = keypoint_positions(rec, Skeleton.H2, HandJoint.INDEX_TIP, side)
    return TimeSeries1D(np.linalg.norm(thumb - index, axis=1), rec.fps)


def tapping_cycles(raw, cfg):
    """
    Smooth a fingertip distance series and detect its tapping cycles.

    Extrema found on the smoothed series are snapped to the raw series so
    that amplitudes are not flattened by the filters.

    :returns: (smoothed series, CycleSet)
    """
    smoothed = smooth(raw, cfg.preprocess)
    radius = cfg.preprocess.windows(raw.fps)[0] // 2
    cycles = find_extrema(smoothed, cfg.prominence_frac, cfg.period_from,
                          reference=raw, refine_radius=radius)
    return smoothed, cycles


def _side_features(raw, cfg):
    smoothed, cycles = tapping_cycles(raw, cfg)
    speed = np.abs(derivative(smoothed, 1).samples)
    accel = np.abs(derivative(smoothed, 2).samples)
    first, last = int(cycles.anchors[0]), int(cycles.anchors[-1])

    return {
        "amplitude": StatSummary.from_values(cycles.amplitudes),
        "period": StatSummary.from_values(cycles.periods),
        "freq": StatSummary.from_values(1.0 / cycles.periods),
        "speed": float(np.mean(speed[first:last + 1])),
        "max_speed": StatSummary.from_values(cycle_maxima(speed, cycles)),
        "accel": float(np.mean(accel[first:last + 1])),
        "max_accel": StatSummary.from_values(cycle_maxima(accel, cycles)),
        "tap_rate": len(cycles.maxima_idx) / raw.duration,
    }


def ft_features(rec, cfg=None, config_hash=""):
    """
    Compute the finger tapping catalogue of a recording.

    :param rec: A raw FT PoseRecording.
    :param cfg: ExtractionConfig, defaults when None.
    :param config_hash: Provenance stored in the returned vector.
    :returns: A FeatureVector.
    """
    require_kind(rec, ExamKind.FT)
    cfg = resolve_config(cfg)
    prepared = prepare(rec, cfg.preprocess, REQUIRED_JOINTS)

    sides = {side: _side_features(ft_distance(prepared, side), cfg)
             for side in SIDES}

    def per_side(key):
        return {side: sides[side][key] for side in SIDES}

    values = {}
    for quantity in ("amplitude", "period", "freq"):
        put_sided(values, "ft", quantity, per_side(quantity), asym=True)
    for side in SIDES:
        values["ft.speed.{}.mean".format(side.value)] = sides[side]["speed"]
    put_sided(values, "ft", "max_speed", per_side("max_speed"),
              stats=("mean",), asym=True)
    for side in SIDES:
        values["ft.accel.{}.mean".format(side.value)] = sides[side]["accel"]
    put_sided(values, "ft", "max_accel", per_side("max_accel"), asym=True)
    for side in SIDES:
        values["ft.tap_rate.{}".format(side.value)] = \
            sides[side]["tap_rate"]

    put_summary(values, "ft.wrist_stability",
                stability(prepared, BodyJoint.WRIST))
    put_summary(values, "ft.elbow_stability",
                stability(prepared, BodyJoint.ELBOW))

    LOGGER.debug("Extracted %d FT features from '%s'.", len(values),
                 rec.recording_id)
    return FeatureVector.for_recording(rec, values, config_hash)


class FingerTappingExtractor(FeatureExtractor):
    """Extractor for finger tapping recordings."""

    key = ExamKind.FT

    @property
    def feature_names(self):
        return feature_names(self.key)

    def extract(self, recording, config_hash=""):
        return ft_features(recording, self.config, config_hash)
