###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Recording preparation: truncation, confidence repair, reference length
normalization and smoothing.

:func:`prepare` applies the steps in a fixed order: truncate, repair low
confidence keypoints, normalize by the reference length and, for
stand-up-and-walk recordings only, filter every coordinate. Upper-limb
extractors filter the scalar series they derive instead.
"""
from dataclasses import dataclass
import logging
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal as sps

from neuroexam.abstracts.enums import BodyJoint, ExamKind, Side, Skeleton
from neuroexam.datastructures.pose import GROUP_SHAPES, SkeletonConvention, \
    TimeSeries1D, keypoint_positions
from neuroexam.errors import AllLowConfidenceError, DegenerateError, \
    RangeError

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreprocessConfig:
    """
    Filter and repair settings.

    Window lengths are given in samples at ``reference_fps`` and are
    rescaled to the sample rate of each recording.
    """

    median_window: int = 5
    savgol_window: int = 11
    savgol_order: int = 3
    confidence_threshold: float = 0.3
    truncate_range: Optional[Tuple[int, int]] = None
    reference_fps: float = 60.0

    def __post_init__(self):
        for name in ("median_window", "savgol_window"):
            window = getattr(self, name)
            if int(window) != window or window < 3 or window % 2 == 0:
                raise ValueError("preprocess.{} must be an odd integer >= 3, "
                                 "got {}.".format(name, window))
        if not 0 <= self.savgol_order < self.savgol_window:
            raise ValueError("preprocess.savgol_order must be in [0, {}), "
                             "got {}.".format(self.savgol_window,
                                              self.savgol_order))
        if not 0 <= self.confidence_threshold <= 1:
            raise ValueError("preprocess.confidence_threshold must be in "
                             "[0, 1].")
        if not self.reference_fps > 0:
            raise ValueError("preprocess.reference_fps must be positive.")
        if self.truncate_range is not None:
            start, end = self.truncate_range
            object.__setattr__(self, "truncate_range", (int(start), int(end)))

    def windows(self, fps):
        """Median and Savitzky-Golay window lengths scaled to ``fps``."""
        def scale(window):
            return 2 * int(np.floor(fps * window / self.reference_fps / 2)) + 1

        min_savgol = self.savgol_order + 1 + (self.savgol_order + 1) % 2
        return (max(3, scale(self.median_window)),
                max(3, min_savgol, scale(self.savgol_window)))


def _check_window(window, minimum=1):
    if int(window) != window or window < minimum or window % 2 == 0:
        msg = "Window must be an odd integer >= {}, got {}." \
              .format(minimum, window)
        LOGGER.error(msg)
        raise ValueError(msg)
    return int(window)


def _median_1d(x, window):
    n = len(x)
    half = window // 2
    if half == 0:
        return x.copy()

    out = np.empty(n)
    if n >= window:
        out[half:n - half] = np.median(sliding_window_view(x, window),
                                       axis=-1)
        edges = list(range(half)) + list(range(n - half, n))
    else:
        edges = range(n)
    for i in edges:
        k = min(half, i, n - 1 - i)
        out[i] = np.median(x[i - k:i + k + 1])
    return out


def _savgol_1d(x, window, order):
    n = len(x)
    if n == 1:
        return x.copy()
    if window > n:
        window = n if n % 2 else n - 1
    if window < 3:
        return x.copy()
    order = min(order, window - 1)
    half = window // 2

    out = sps.savgol_filter(x, window, order, mode="interp")
    # Edges use the window clipped at the series boundary.
    for i in list(range(half)) + list(range(n - half, n)):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        t = np.arange(lo, hi) - i
        degree = min(order, hi - lo - 1)
        out[i] = np.polyfit(t, x[lo:hi], degree)[-1]
    return out


def _along_time(values, func, *args):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        return func(values, *args)
    flat = values.reshape(len(values), -1)
    out = np.column_stack([func(flat[:, j], *args)
                           for j in range(flat.shape[1])])
    return out.reshape(values.shape)


def median_filter(series, window):
    """
    Running median with a window shrunk symmetrically at the edges.

    :param series: A TimeSeries1D.
    :param window: Odd window length in samples (1 is the identity).
    :returns: A TimeSeries1D of the same length and rate.
    """
    window = _check_window(window)
    return series.with_samples(_median_1d(series.samples, window))


def savgol_filter(series, window, order):
    """
    Savitzky-Golay smoothing.

    Interior samples use the centered least-squares polynomial of degree
    ``order``. Samples closer than half a window to either end are fitted
    over the clipped window instead.

    :param series: A TimeSeries1D.
    :param window: Odd window length in samples, at least 3.
    :param order: Polynomial degree, smaller than the window.
    """
    window = _check_window(window, minimum=3)
    if int(order) != order or not 0 <= order < window:
        msg = "Savitzky-Golay order must be in [0, {}), got {}." \
              .format(window, order)
        LOGGER.error(msg)
        raise ValueError(msg)
    return series.with_samples(
        _savgol_1d(series.samples, window, int(order)))


def smooth_array(values, fps, cfg):
    """Median then Savitzky-Golay filtering of an array along axis 0."""
    median_window, savgol_window = cfg.windows(fps)
    values = _along_time(values, _median_1d, median_window)
    return _along_time(values, _savgol_1d, savgol_window, cfg.savgol_order)


def smooth(series, cfg):
    """Median then Savitzky-Golay filtering with rate-scaled windows."""
    return series.with_samples(smooth_array(series.samples, series.fps, cfg))


def repair_low_confidence(series, conf, threshold):
    """
    Replace low confidence samples by linear interpolation.

    Samples whose confidence is below ``threshold`` are interpolated between
    the nearest confident neighbours. Leading and trailing gaps take the
    nearest confident value.
    """
    values = np.asarray(getattr(series, "samples", series), dtype=float)
    conf = np.asarray(getattr(conf, "samples", conf), dtype=float)
    if values.shape != conf.shape:
        msg = "Series and confidence lengths differ ({} vs {})." \
              .format(len(values), len(conf))
        LOGGER.error(msg)
        raise ValueError(msg)

    repaired = _repair_1d(values, conf >= threshold)
    if isinstance(series, TimeSeries1D):
        return series.with_samples(repaired)
    return repaired


def _repair_1d(values, good):
    if not np.any(good):
        msg = "No sample reaches the confidence threshold."
        LOGGER.error(msg)
        raise AllLowConfidenceError(msg)
    if np.all(good):
        return values.copy()
    idx = np.arange(len(values))
    return np.interp(idx, idx[good], values[good])


def truncate(rec, frame_range):
    """Restrict a recording to frames ``[start, end)``."""
    start, end = frame_range
    if int(start) != start or int(end) != end \
            or not 0 <= start < end <= rec.n_frames:
        msg = "Invalid frame range [{}, {}) for a recording of {} frames." \
              .format(start, end, rec.n_frames)
        LOGGER.error(msg)
        raise RangeError(msg)

    start, end = int(start), int(end)
    return rec.replace(**{group: getattr(rec, group)[start:end]
                          for group in rec.groups})


def _reference_joints(rec):
    if rec.test_kind is ExamKind.SAW:
        return ((BodyJoint.PELVIS, Side.CENTER), (BodyJoint.NECK, Side.CENTER))
    return ((BodyJoint.WRIST, Side.RIGHT), (BodyJoint.ELBOW, Side.RIGHT))


def reference_length(rec):
    """
    Median per-frame reference distance in the 2D body.

    Upper-limb exams use the right forearm (wrist to elbow). The
    stand-up-and-walk exam uses the pelvis to neck distance.

    :raises DegenerateError: If a reference joint has zero confidence in
        any frame or the median is zero. Repair the recording first.
    """
    (joint_a, side_a), (joint_b, side_b) = _reference_joints(rec)
    slot_a = SkeletonConvention.slot(Skeleton.B2, joint_a, side_a)
    slot_b = SkeletonConvention.slot(Skeleton.B2, joint_b, side_b)
    body = rec.body2d

    missing = (body[:, slot_a, 2] <= 0) | (body[:, slot_b, 2] <= 0)
    if np.any(missing):
        msg = "Reference joints are missing in {} of {} frames of '{}'." \
              .format(int(np.sum(missing)), len(missing), rec.recording_id)
        LOGGER.error(msg)
        raise DegenerateError(msg)

    lengths = np.linalg.norm(body[:, slot_a, :2] - body[:, slot_b, :2],
                             axis=1)
    ref = float(np.median(lengths))
    if ref <= 0:
        msg = "Reference length of '{}' is zero.".format(rec.recording_id)
        LOGGER.error(msg)
        raise DegenerateError(msg)
    return ref


def reference_length_3d(rec):
    """Median pelvis to neck distance of the 3D body."""
    pelvis = keypoint_positions(rec, Skeleton.B3, BodyJoint.PELVIS,
                                Side.CENTER)
    neck = keypoint_positions(rec, Skeleton.B3, BodyJoint.NECK, Side.CENTER)
    ref = float(np.median(np.linalg.norm(pelvis - neck, axis=1)))
    if ref <= 0:
        msg = "3D reference length of '{}' is zero.".format(rec.recording_id)
        LOGGER.error(msg)
        raise DegenerateError(msg)
    return ref


def normalize(rec, ref, ref3d=None):
    """
    Divide every coordinate by a reference length.

    :param rec: A PoseRecording.
    :param ref: Reference length for the 2D groups, and for the 3D group
        when ``ref3d`` is not given.
    :param ref3d: Optional separate reference length for the 3D group.
    :returns: A new PoseRecording; confidences are unchanged.
    """
    for value in (ref, ref3d):
        if value is not None and not (np.isfinite(value) and value > 0):
            msg = "Reference length must be positive, got {}.".format(value)
            LOGGER.error(msg)
            raise ValueError(msg)

    changes = {}
    for group in rec.groups:
        array = np.array(getattr(rec, group))
        if group == "body3d":
            array /= ref if ref3d is None else ref3d
        else:
            array[..., :2] /= ref
        changes[group] = array
    return rec.replace(**changes)


def smooth_joints(rec, cfg, joints):
    """
    Filter the coordinates of selected keypoints.

    :param joints: Iterable of (skeleton, joint, side) triples.
    """
    changes = {}
    for skeleton, joint, side in joints:
        group = SkeletonConvention.group(skeleton, side)
        slot = SkeletonConvention.slot(skeleton, joint, side)
        array = changes.setdefault(group, np.array(getattr(rec, group)))
        width = 3 if group == "body3d" else 2
        array[:, slot, :width] = smooth_array(array[:, slot, :width],
                                              rec.fps, cfg)
    return rec.replace(**changes)


def _required_slots(required):
    slots = set()
    for skeleton, joint, side in required:
        slots.add((SkeletonConvention.group(skeleton, side),
                   SkeletonConvention.slot(skeleton, joint, side)))
    return slots


def repair_recording(rec, threshold, required=()):
    """
    Repair every 2D keypoint with low confidence samples.

    Repaired samples take ``threshold`` as their confidence.
    Keypoints without a single confident sample raise
    AllLowConfidenceError when listed in ``required`` and are left untouched
    otherwise.
    """
    required = _required_slots(required)
    changes = {}
    for group in rec.groups:
        if GROUP_SHAPES[group][0] is Skeleton.B3:
            continue
        array = np.array(getattr(rec, group))
        good = array[:, :, 2] >= threshold
        if np.all(good):
            continue
        for slot in range(array.shape[1]):
            if np.all(good[:, slot]):
                continue
            if not np.any(good[:, slot]):
                if (group, slot) in required:
                    msg = "Keypoint {} of group '{}' in '{}' has no " \
                          "confident sample.".format(slot, group,
                                                     rec.recording_id)
                    LOGGER.error(msg)
                    raise AllLowConfidenceError(msg)
                LOGGER.debug("Keypoint %s of '%s' left unrepaired.", slot,
                             group)
                continue
            for axis in (0, 1):
                array[:, slot, axis] = _repair_1d(array[:, slot, axis],
                                                  good[:, slot])
            array[~good[:, slot], slot, 2] = threshold
        changes[group] = array
    return rec.replace(**changes) if changes else rec


def prepare(rec, cfg=None, required=()):
    """
    Run the full preparation pipeline on a recording.

    :param rec: A PoseRecording.
    :param cfg: A PreprocessConfig, or None for the defaults.
    :param required: (skeleton, joint, side) triples the caller depends on.
    :returns: The prepared PoseRecording.
    """
    cfg = cfg or PreprocessConfig()
    if cfg.truncate_range is not None:
        rec = truncate(rec, cfg.truncate_range)

    rec = repair_recording(rec, cfg.confidence_threshold, required)

    ref = reference_length(rec)
    ref3d = None
    if rec.test_kind is ExamKind.SAW:
        ref3d = reference_length_3d(rec)
    LOGGER.debug("Reference length of '%s': %s (3D: %s)", rec.recording_id,
                 ref, ref3d)
    rec = normalize(rec, ref, ref3d)

    if rec.test_kind is ExamKind.SAW:
        changes = {}
        for group in rec.groups:
            array = np.array(getattr(rec, group))
            width = 3 if group == "body3d" else 2
            array[..., :width] = smooth_array(array[..., :width], rec.fps,
                                              cfg)
            changes[group] = array
        rec = rec.replace(**changes)
    return rec
