###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Finger to finger features.

Both index fingers are tracked at their middle joint, which is steadier than
the fingertip. Cycles are detected on the vertical coordinate of each hand.
"""
from itertools import combinations
import logging
import warnings

import numpy as np

from neuroexam.abstracts import FeatureExtractor
from neuroexam.abstracts.enums import Axis, BodyJoint, ExamKind, HandJoint, \
    Side, Skeleton
from neuroexam.datastructures.features import FeatureVector, StatSummary, \
    feature_names
from neuroexam.datastructures.pose import keypoint_series
from neuroexam.errors import DegenerateError, FitError, NoCyclesError
from neuroexam.features.common import SIDES, cycle_bounds, put_missing, \
    put_summary, require_kind, resolve_config
from neuroexam.preprocess import prepare, smooth_joints
from neuroexam.signals import find_extrema, pearson_cc, resample_linear, \
    velocity_angle

LOGGER = logging.getLogger(__name__)

TRACKED = tuple((Skeleton.H2, HandJoint.INDEX_MID, side) for side in SIDES)
REQUIRED_JOINTS = TRACKED + (
    (Skeleton.B2, BodyJoint.WRIST, Side.RIGHT),
    (Skeleton.B2, BodyJoint.ELBOW, Side.RIGHT),
)

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(8)


def _finger(rec, side, axis):
    return keypoint_series(rec, Skeleton.H2, HandJoint.INDEX_MID, side, axis)


def ftf_symmetry(rec):
    """
    Horizontal and vertical mirror symmetry of the two index fingers.

    :returns: (sx, sy) where sx correlates the left x with the negated right
        x and sy correlates the two y coordinates.
    """
    left_x = _finger(rec, Side.LEFT, Axis.X).samples
    right_x = _finger(rec, Side.RIGHT, Axis.X).samples
    left_y = _finger(rec, Side.LEFT, Axis.Y).samples
    right_y = _finger(rec, Side.RIGHT, Axis.Y).samples
    return pearson_cc(left_x, -right_x), pearson_cc(left_y, right_y)


def _cycles(rec, side, cfg):
    return find_extrema(_finger(rec, side, Axis.Y), cfg.prominence_frac,
                        cfg.period_from)


def fitted_arc_length(x, coeffs):
    """
    Length of ``y = a x^2 + b x + c`` traversed along consecutive ``x``.

    Each leg between neighbouring abscissae is integrated with an 8 point
    Gauss-Legendre rule, so back and forth motion is counted twice.
    """
    a, b, _ = coeffs
    lo, hi = np.asarray(x[:-1]), np.asarray(x[1:])
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    points = mid[:, None] + half[:, None] * _NODES[None, :]
    integrand = np.sqrt(1.0 + (2 * a * points + b) ** 2)
    return float(np.sum(np.abs(half) * (integrand @ _WEIGHTS)))


def path_smoothness(x, y, tolerance=1e-6):
    """
    Ratio of the polyline length of a trajectory to the arc length of its
    least-squares parabola ``y(x)``.

    :raises FitError: If the horizontal extent is below ``tolerance``.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) < 3 or float(np.ptp(x)) < tolerance:
        raise FitError("Horizontal extent too small for a curve fit.")

    coeffs = np.polyfit(x, y, 2)
    fitted = fitted_arc_length(x, coeffs)
    if fitted <= 0:
        raise FitError("Fitted curve has zero length.")
    actual = float(np.sum(np.hypot(np.diff(x), np.diff(y))))
    return actual / fitted


def ftf_path_smoothness(rec, side, cfg=None):
    """
    Per-cycle path smoothness of one index finger.

    Cycles whose curve fit is ill-posed are skipped with a warning.

    :returns: StatSummary across the remaining cycles.
    """
    cfg = resolve_config(cfg)
    side = side if isinstance(side, Side) else Side.from_str(side)
    x = _finger(rec, side, Axis.X).samples
    y = _finger(rec, side, Axis.Y).samples
    cycles = _cycles(rec, side, cfg)

    ratios = []
    for start, end in cycle_bounds(cycles):
        try:
            ratios.append(path_smoothness(x[start:end + 1], y[start:end + 1],
                                          cfg.fit_tolerance))
        except FitError as exc:
            msg = "Skipping {} cycle [{}, {}] of '{}': {}".format(
                side.value, start, end, rec.recording_id, exc)
            LOGGER.warning(msg)
            warnings.warn(msg, UserWarning)

    if not ratios:
        msg = "No {} cycle of '{}' admits a curve fit.".format(
            side.value, rec.recording_id)
        LOGGER.warning(msg)
        raise FitError(msg)
    return StatSummary.from_values(ratios)


def ftf_velocity_angle_symmetry(rec, side, cfg=None):
    """
    Similarity of the velocity angle profile across cycles.

    Each cycle's angle series is resampled to a common length and every
    unordered pair of cycles is correlated.
    """
    cfg = resolve_config(cfg)
    side = side if isinstance(side, Side) else Side.from_str(side)
    theta = velocity_angle(_finger(rec, side, Axis.X),
                           _finger(rec, side, Axis.Y))
    cycles = _cycles(rec, side, cfg)
    bounds = cycle_bounds(cycles)
    if len(bounds) < 2:
        raise NoCyclesError("Velocity angle symmetry needs two cycles.")

    profiles = [
        resample_linear(theta.window(start, end + 1),
                        cfg.resample_points).samples
        for start, end in bounds
    ]
    scores = []
    for first, second in combinations(profiles, 2):
        try:
            scores.append(pearson_cc(first, second))
        except DegenerateError:
            LOGGER.debug("Constant velocity angle cycle skipped.")

    if not scores:
        raise DegenerateError("Every velocity angle cycle is constant.")
    return StatSummary.from_values(scores)


def _speed(rec, side, cycles):
    x = _finger(rec, side, Axis.X).samples
    y = _finger(rec, side, Axis.Y).samples
    speeds = []
    for start, end in zip(cycles.extrema[:-1], cycles.extrema[1:]):
        length = np.sum(np.hypot(np.diff(x[start:end + 1]),
                                 np.diff(y[start:end + 1])))
        speeds.append(length / ((end - start) / rec.fps))
    return StatSummary.from_values(speeds)


def ftf_features(rec, cfg=None, config_hash=""):
    """Compute the finger to finger catalogue of a recording."""
    require_kind(rec, ExamKind.FTF)
    cfg = resolve_config(cfg)
    prepared = prepare(rec, cfg.preprocess, REQUIRED_JOINTS)
    prepared = smooth_joints(prepared, cfg.preprocess, TRACKED)

    sx, sy = ftf_symmetry(prepared)
    values = {"ftf.sx": sx, "ftf.sy": sy}
    stats = ("mean", "std")

    for side in SIDES:
        cycles = _cycles(prepared, side, cfg)
        put_summary(values, "ftf.period.{}".format(side.value),
                    StatSummary.from_values(cycles.periods), stats)
        put_summary(values, "ftf.speed.{}".format(side.value),
                    _speed(prepared, side, cycles), stats)

        prefix = "ftf.path_smoothness.{}".format(side.value)
        try:
            put_summary(values, prefix,
                        ftf_path_smoothness(prepared, side, cfg), stats)
        except FitError:
            put_missing(values, prefix, stats)

        prefix = "ftf.velocity_angle_symmetry.{}".format(side.value)
        try:
            put_summary(values, prefix,
                        ftf_velocity_angle_symmetry(prepared, side, cfg),
                        stats)
        except DegenerateError:
            put_missing(values, prefix, stats)

    return FeatureVector.for_recording(rec, values, config_hash)


class FingerToFingerExtractor(FeatureExtractor):
    """Extractor for finger to finger recordings."""

    key = ExamKind.FTF

    @property
    def feature_names(self):
        return feature_names(self.key)

    def extract(self, recording, config_hash=""):
        return ftf_features(recording, self.config, config_hash)
