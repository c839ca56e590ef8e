###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Stand-up-and-walk segmentation and gait features.

The 3D body is pelvis-relative, so everything that needs global travel (the
segmentation, walking speed) reads the 2D pelvis while step, knee and foot
quantities come from the 3D body. All functions except :func:`saw_features`
expect a recording that already went through :func:`prepare_saw`.
"""
import logging

import numpy as np
from scipy.signal import find_peaks

from neuroexam.abstracts import FeatureExtractor
from neuroexam.abstracts.enums import Axis, BodyJoint, ExamKind, \
    SegmentKind, Side, Skeleton
from neuroexam.datastructures.features import FeatureVector, GaitStep, \
    SegmentLabel, StatSummary, feature_names
from neuroexam.datastructures.pose import TimeSeries1D, keypoint_positions, \
    keypoint_series
from neuroexam.errors import DegenerateError, NoCyclesError, \
    NoStandUpError, SegmentationError
from neuroexam.features.common import put_missing, put_summary, \
    require_kind, resolve_config
from neuroexam.preprocess import prepare
from neuroexam.signals import align_by_lag, derivative

LOGGER = logging.getLogger(__name__)

REQUIRED_JOINTS = (
    (Skeleton.B2, BodyJoint.PELVIS, Side.CENTER),
    (Skeleton.B2, BodyJoint.NECK, Side.CENTER),
)


def prepare_saw(rec, cfg=None):
    """Preprocess a SAW recording for segmentation and feature extraction."""
    require_kind(rec, ExamKind.SAW)
    cfg = resolve_config(cfg)
    return prepare(rec, cfg.preprocess, REQUIRED_JOINTS)


def _pelvis_velocity(rec, axis):
    pelvis = keypoint_series(rec, Skeleton.B2, BodyJoint.PELVIS,
                             Side.CENTER, axis)
    return derivative(pelvis).samples


def _runs(mask):
    """Half-open [start, end) ranges of consecutive True entries."""
    padded = np.concatenate(([0], np.asarray(mask, dtype=int), [0]))
    edges = np.flatnonzero(np.diff(padded))
    return [(int(s), int(e)) for s, e in zip(edges[::2], edges[1::2])]


def _refine(speed, start, end, fraction, lo, hi):
    """
    Grow or shrink ``[start, end)`` to the frames whose speed reaches
    ``fraction`` of the run's median speed, staying inside ``[lo, hi)``.
    """
    limit = fraction * float(np.median(speed[start:end]))
    while start > lo and speed[start - 1] >= limit:
        start -= 1
    while start < end - 1 and speed[start] < limit:
        start += 1
    while end < hi and speed[end] >= limit:
        end += 1
    while end - 1 > start and speed[end - 1] < limit:
        end -= 1
    return start, end


def _walk_runs(vx, fps, saw):
    runs = []
    for sign in (1, -1):
        runs += [(s, e, sign)
                 for s, e in _runs(sign * vx >= saw.walk_threshold)]
    runs.sort()

    max_gap = saw.turn_min_duration * fps
    merged = []
    for start, end, sign in runs:
        if merged and merged[-1][2] == sign and \
                start - merged[-1][1] < max_gap:
            merged[-1] = (merged[-1][0], end, sign)
        else:
            merged.append((start, end, sign))

    min_frames = saw.min_walk_duration * fps
    walks = []
    for start, end, sign in merged:
        if end - start < min_frames:
            continue
        # A pause without reversal does not split a pass.
        if walks and walks[-1][2] == sign:
            walks[-1] = (walks[-1][0], end, sign)
        else:
            walks.append((start, end, sign))

    refined, lo = [], 0
    for i, (start, end, sign) in enumerate(walks):
        hi = walks[i + 1][0] if i + 1 < len(walks) else len(vx)
        start, end = _refine(sign * vx, start, end, saw.refine_fraction,
                             lo, hi)
        refined.append((start, end, sign))
        lo = end
    return refined


def _stand_up(vy, fps, saw, limit):
    """First stand-up effort before frame ``limit``, or None."""
    speed = np.abs(vy)
    active = np.flatnonzero(speed[:limit] > saw.stand_threshold)
    if not len(active):
        return None

    start = int(active[0])
    hold = max(1, int(round(saw.hold_duration * fps)))
    quiet = speed < saw.stand_threshold
    end = limit
    for j in range(start + 1, limit):
        if np.all(quiet[j:j + hold]):
            end = j
            break

    start, end = _refine(speed, start, end, saw.refine_fraction, 0, limit)
    return start, min(end, limit)


def segment_saw(rec, cfg=None):
    """
    Split a prepared SAW recording into stand-up, walking and turning
    segments.

    Walking is sustained horizontal pelvis motion in one direction. The
    stand-up is the first burst of vertical pelvis velocity before walking,
    closed once the velocity stays below the threshold for the hold time.
    Turns lie between walks of opposite direction.

    The segments partition every frame of the recording. Idle frames before
    the first motion go to the first segment and those after the last walk
    go to that walk; ``onset`` and ``offset`` keep the detected motion.

    :raises SegmentationError: If no walking is detected.
    :returns: Ordered list of SegmentLabel.
    """
    cfg = resolve_config(cfg)
    vx = _pelvis_velocity(rec, Axis.X)
    walks = _walk_runs(vx, rec.fps, cfg.saw)
    if not walks:
        msg = "No walking detected in recording '{}'." \
              .format(rec.recording_id)
        LOGGER.error(msg)
        raise SegmentationError(msg)

    segments = []
    stand = _stand_up(_pelvis_velocity(rec, Axis.Y), rec.fps, cfg.saw,
                      walks[0][0])
    if stand is not None:
        segments.append(SegmentLabel(SegmentKind.SU, 0, stand[1],
                                     onset=stand[0]))
        # Frames between standing and the first step belong to the walk.
        walks[0] = (stand[1], walks[0][1], walks[0][2])

    last = len(walks) - 1
    for i, (start, end, sign) in enumerate(walks):
        lead = segments[-1].end if segments else 0
        if i and start > lead:
            segments.append(SegmentLabel(SegmentKind.TU, lead, start))
            lead = start
        segments.append(SegmentLabel(
            SegmentKind.W, lead, rec.n_frames if i == last else end,
            "+x" if sign > 0 else "-x", onset=start, offset=end))

    LOGGER.debug("Segments of '%s': %s", rec.recording_id,
                 [(s.kind.value, s.start, s.end) for s in segments])
    return segments


def segment_duration(segment, fps):
    """
    Elapsed time of a segment in seconds.

    Stand-up and walking span their first to last frame. A turn spans the
    last frame of the preceding walk to the first frame of the next one.
    """
    if segment.kind is SegmentKind.TU:
        return (segment.n_active + 1) / fps
    return (segment.n_active - 1) / fps


def _walks(segments):
    walks = [seg for seg in segments if seg.kind is SegmentKind.W]
    if not walks:
        raise SegmentationError("No walking segment given.")
    return walks


def time_to_stand(rec, cfg=None, segments=None):
    """
    Duration of the stand-up in seconds.

    Without any walk the whole recording is searched for a stand-up.

    :raises NoStandUpError: If no stand-up is found.
    """
    cfg = resolve_config(cfg)
    if segments is None:
        try:
            segments = segment_saw(rec, cfg)
        except SegmentationError:
            segments = []
            stand = _stand_up(_pelvis_velocity(rec, Axis.Y), rec.fps,
                              cfg.saw, rec.n_frames)
            if stand is not None:
                segments.append(SegmentLabel(SegmentKind.SU, *stand))

    for segment in segments:
        if segment.kind is SegmentKind.SU:
            return segment_duration(segment, rec.fps)

    msg = "No stand-up found in recording '{}'.".format(rec.recording_id)
    LOGGER.info(msg)
    raise NoStandUpError(msg)


def feet_distance(rec):
    """Per-frame distance between the right and left 3D feet."""
    right = keypoint_positions(rec, Skeleton.B3, BodyJoint.FOOT, Side.RIGHT)
    left = keypoint_positions(rec, Skeleton.B3, BodyJoint.FOOT, Side.LEFT)
    return TimeSeries1D(np.linalg.norm(right - left, axis=1), rec.fps)


def _edge_boundary(values, tolerance_frac=0.01):
    """
    Latest frame of the low plateau ``values`` settles on next to a peak.
    """
    low = float(np.min(values))
    tolerance = tolerance_frac * (float(np.max(values)) - low)
    return int(np.flatnonzero(values <= low + tolerance)[-1]), low


def _segment_steps(sub, offset, fps, prominence_frac):
    span = float(np.ptp(sub))
    if span == 0:
        return []
    prominence = prominence_frac * span
    maxima, _ = find_peaks(sub, prominence=prominence)
    if not len(maxima):
        return []
    minima = list(find_peaks(-sub, prominence=prominence)[0])
    floor = float(np.min(sub)) + prominence

    first, last = int(maxima[0]), int(maxima[-1])
    if not minima or minima[0] > first:
        idx, value = _edge_boundary(sub[:first + 1])
        if value <= floor and idx < first:
            minima.insert(0, idx)
    if not minima or minima[-1] < last:
        tail, value = _edge_boundary(sub[last:][::-1])
        idx = len(sub) - 1 - tail
        if value <= floor and idx > last:
            minima.append(idx)

    steps = []
    for start, end in zip(minima[:-1], minima[1:]):
        inner = maxima[(maxima > start) & (maxima < end)]
        if not len(inner):
            continue
        peak = int(inner[np.argmax(sub[inner])])
        steps.append(GaitStep(
            start_idx=offset + int(start),
            peak_idx=offset + peak,
            end_idx=offset + int(end),
            step_time=(end - start) / fps,
            step_length=float(sub[peak]),
            step_width=float(np.min(sub[start:end + 1])),
        ))
    return steps


def step_features(rec, segments, cfg=None):
    """
    Detect steps on the feet distance inside walking segments.

    A step runs between consecutive feet distance minima around one maximum.
    Turning segments never contribute.

    :raises NoCyclesError: If no complete step is found.
    :returns: (steps, summaries) where summaries maps step_time,
        step_length and step_width to StatSummary.
    """
    cfg = resolve_config(cfg)
    distance = feet_distance(rec).samples
    steps = []
    for seg in _walks(segments):
        steps += _segment_steps(distance[seg.onset:seg.offset], seg.onset,
                                rec.fps, cfg.saw.step_prominence_frac)

    if not steps:
        msg = "No complete step found in recording '{}'." \
              .format(rec.recording_id)
        LOGGER.error(msg)
        raise NoCyclesError(msg)

    summaries = {
        metric: StatSummary.from_values([getattr(s, metric) for s in steps])
        for metric in ("step_time", "step_length", "step_width")
    }
    return steps, summaries


def cadence_and_speed(rec, segments, steps):
    """
    Per-walk cadence (steps per second) and pelvis speed.

    :returns: (cadence, speed) StatSummary across walking segments.
    """
    pelvis = keypoint_positions(rec, Skeleton.B2, BodyJoint.PELVIS,
                                Side.CENTER)
    cadence, speed = [], []
    for seg in _walks(segments):
        duration = segment_duration(seg, rec.fps)
        if duration <= 0:
            continue
        count = sum(1 for s in steps
                    if s.start_idx >= seg.onset and s.end_idx < seg.offset)
        path = np.diff(pelvis[seg.first:seg.last + 1], axis=0)
        cadence.append(count / duration)
        speed.append(float(np.sum(np.linalg.norm(path, axis=1))) / duration)

    if not cadence:
        raise SegmentationError("Every walking segment is a single frame.")
    return StatSummary.from_values(cadence), StatSummary.from_values(speed)


def knee_angle(rec, side):
    """
    Per-frame angle in [0, pi] at the 3D knee between thigh and shank.

    :raises DegenerateError: If a limb vector has zero length.
    """
    side = side if isinstance(side, Side) else Side.from_str(side)
    hip = keypoint_positions(rec, Skeleton.B3, BodyJoint.HIP, side)
    knee = keypoint_positions(rec, Skeleton.B3, BodyJoint.KNEE, side)
    foot = keypoint_positions(rec, Skeleton.B3, BodyJoint.FOOT, side)

    thigh, shank = hip - knee, foot - knee
    if np.any(np.linalg.norm(thigh, axis=1) == 0) or \
            np.any(np.linalg.norm(shank, axis=1) == 0):
        msg = "Zero length {} limb in recording '{}'.".format(
            side.value, rec.recording_id)
        LOGGER.error(msg)
        raise DegenerateError(msg)

    cross = np.linalg.norm(np.cross(thigh, shank), axis=1)
    dot = np.sum(thigh * shank, axis=1)
    return TimeSeries1D(np.arctan2(cross, dot), rec.fps)


def knee_angle_symmetry(rec, segments, cfg=None, steps=None):
    """
    Lag-aligned correlation of the right and left knee angles per walk.

    The lag search spans one gait cycle, estimated as two median step times.
    """
    right = knee_angle(rec, Side.RIGHT).samples
    left = knee_angle(rec, Side.LEFT).samples
    cycle = None
    if steps:
        median = float(np.median([s.step_time for s in steps]))
        cycle = int(round(2 * median * rec.fps))

    scores = []
    for seg in _walks(segments):
        n = seg.n_active
        if n < 2:
            continue
        max_lag = (n - 1) // 2 if cycle is None else min(cycle, (n - 1) // 2)
        _, cc = align_by_lag(right[seg.onset:seg.offset],
                             left[seg.onset:seg.offset], max_lag)
        scores.append(cc)

    if not scores:
        raise DegenerateError("No walking segment long enough to align.")
    return StatSummary.from_values(scores)


def strides(steps, segments):
    """Non-overlapping (right step, left step) pairs within each walk."""
    pairs = []
    for seg in _walks(segments):
        inside = [s for s in steps
                  if s.start_idx >= seg.onset and s.end_idx < seg.offset]
        pairs += [(inside[k], inside[k + 1])
                  for k in range(0, len(inside) - 1, 2)]
    return pairs


def step_symmetry(rec, segments, cfg=None, steps=None):
    """
    Correlation of the horizontal foot trajectories of consecutive steps.

    The right foot over one step is aligned against the left foot over the
    next, searching lags within the stride.

    :raises NoCyclesError: If no full stride exists.
    """
    if steps is None:
        steps, _ = step_features(rec, segments, cfg)
    right = keypoint_positions(rec, Skeleton.B3, BodyJoint.FOOT,
                               Side.RIGHT)[:, 0]
    left = keypoint_positions(rec, Skeleton.B3, BodyJoint.FOOT,
                              Side.LEFT)[:, 0]

    scores = []
    for first, second in strides(steps, segments):
        a = right[first.start_idx:first.end_idx + 1]
        b = left[second.start_idx:second.end_idx + 1]
        n = min(len(a), len(b))
        _, cc = align_by_lag(a[:n], b[:n], (n - 1) // 2)
        scores.append(cc)

    if not scores:
        msg = "Step symmetry needs at least one full stride."
        LOGGER.error(msg)
        raise NoCyclesError(msg)
    return StatSummary.from_values(scores)


def saw_features(rec, cfg=None, config_hash=""):
    """
    Compute the stand-up-and-walk catalogue of a recording.

    A missing stand-up or turn leaves the corresponding features empty.
    """
    cfg = resolve_config(cfg)
    prepared = prepare_saw(rec, cfg)
    segments = segment_saw(prepared, cfg)
    steps, step_summaries = step_features(prepared, segments, cfg)
    cadence, speed = cadence_and_speed(prepared, segments, steps)

    values = {}
    put_summary(values, "saw.knee_angle_symmetry",
                knee_angle_symmetry(prepared, segments, cfg, steps))
    put_summary(values, "saw.step_symmetry",
                step_symmetry(prepared, segments, cfg, steps))
    for metric in ("step_length", "step_width", "step_time"):
        put_summary(values, "saw.{}".format(metric), step_summaries[metric])

    turns = [segment_duration(seg, prepared.fps) for seg in segments
             if seg.kind is SegmentKind.TU]
    if turns:
        put_summary(values, "saw.turning_time",
                    StatSummary.from_values(turns))
    else:
        put_missing(values, "saw.turning_time")

    try:
        values["saw.time_to_stand"] = time_to_stand(prepared, cfg, segments)
    except NoStandUpError:
        values["saw.time_to_stand"] = None

    put_summary(values, "saw.walking_speed", speed, ("mean", "std"))
    put_summary(values, "saw.cadence", cadence, ("mean", "std"))

    LOGGER.debug("'%s': %d segments, %d steps.", rec.recording_id,
                 len(segments), len(steps))
    return FeatureVector.for_recording(rec, values, config_hash)


class StandUpWalkExtractor(FeatureExtractor):
    """Extractor for stand-up-and-walk recordings."""

    key = ExamKind.SAW

    @property
    def feature_names(self):
        return feature_names(self.key)

    def extract(self, recording, config_hash=""):
        return saw_features(recording, self.config, config_hash)

    def segments(self, recording):
        """Segments of a raw recording, for the segment report."""
        return segment_saw(prepare_saw(recording, self.config), self.config)
