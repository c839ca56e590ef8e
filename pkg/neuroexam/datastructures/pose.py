###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Canonical pose data model.

A :class:`PoseRecording` stores each keypoint group as a dense, read-only
``(frames, slots, 3)`` array. 2D groups hold ``(x, y, confidence)`` and the
3D group holds ``(x, y, z)``. The slot layout of every group is fixed by
:class:`SkeletonConvention`, so feature code can address joints by their
semantic name and side regardless of where the data came from.
"""
from collections import OrderedDict
import dataclasses
from dataclasses import dataclass
import logging
from typing import NamedTuple, Optional

import numpy as np

from neuroexam.abstracts.enums import Axis, BodyJoint, ExamKind, HandJoint, \
    Label, Side, Skeleton
from neuroexam.errors import SchemaError

LOGGER = logging.getLogger(__name__)

# Group name -> (skeleton, slots, values per slot)
GROUP_SHAPES = OrderedDict([
    ("body2d", (Skeleton.B2, 25, 3)),
    ("hand2d_left", (Skeleton.H2, 21, 3)),
    ("hand2d_right", (Skeleton.H2, 21, 3)),
    ("body3d", (Skeleton.B3, 17, 3)),
])

REQUIRED_GROUPS = {
    ExamKind.FT: ("body2d", "hand2d_left", "hand2d_right"),
    ExamKind.FTF: ("body2d", "hand2d_left", "hand2d_right"),
    ExamKind.FR: ("body2d", "hand2d_left", "hand2d_right"),
    ExamKind.SAW: ("body2d", "body3d"),
}

_C, _L, _R = Side.CENTER, Side.LEFT, Side.RIGHT

# BODY_25 ordering.
_B2_SLOTS = (
    (BodyJoint.NOSE, _C), (BodyJoint.NECK, _C),
    (BodyJoint.SHOULDER, _R), (BodyJoint.ELBOW, _R), (BodyJoint.WRIST, _R),
    (BodyJoint.SHOULDER, _L), (BodyJoint.ELBOW, _L), (BodyJoint.WRIST, _L),
    (BodyJoint.PELVIS, _C),
    (BodyJoint.HIP, _R), (BodyJoint.KNEE, _R), (BodyJoint.FOOT, _R),
    (BodyJoint.HIP, _L), (BodyJoint.KNEE, _L), (BodyJoint.FOOT, _L),
    (BodyJoint.EYE, _R), (BodyJoint.EYE, _L),
    (BodyJoint.EAR, _R), (BodyJoint.EAR, _L),
    (BodyJoint.BIG_TOE, _L), (BodyJoint.SMALL_TOE, _L), (BodyJoint.HEEL, _L),
    (BodyJoint.BIG_TOE, _R), (BodyJoint.SMALL_TOE, _R), (BodyJoint.HEEL, _R),
)

# Human3.6M ordering.
_B3_SLOTS = (
    (BodyJoint.PELVIS, _C),
    (BodyJoint.HIP, _R), (BodyJoint.KNEE, _R), (BodyJoint.FOOT, _R),
    (BodyJoint.HIP, _L), (BodyJoint.KNEE, _L), (BodyJoint.FOOT, _L),
    (BodyJoint.SPINE, _C), (BodyJoint.NECK, _C), (BodyJoint.NOSE, _C),
    (BodyJoint.HEAD, _C),
    (BodyJoint.SHOULDER, _L), (BodyJoint.ELBOW, _L), (BodyJoint.WRIST, _L),
    (BodyJoint.SHOULDER, _R), (BodyJoint.ELBOW, _R), (BodyJoint.WRIST, _R),
)


class SkeletonConvention:
    """Total, injective maps from (joint, side) to slot index per skeleton."""

    _BODY_SLOTS = {Skeleton.B2: _B2_SLOTS, Skeleton.B3: _B3_SLOTS}
    _BODY_INDEX = {
        skeleton: {key: idx for idx, key in enumerate(slots)}
        for skeleton, slots in _BODY_SLOTS.items()
    }

    @staticmethod
    def _skeleton(skeleton):
        if isinstance(skeleton, Skeleton):
            return skeleton
        try:
            return Skeleton(str(skeleton).upper())
        except ValueError:
            raise IndexError(f"Skeleton '{skeleton}' not valid.")

    @classmethod
    def size(cls, skeleton):
        skeleton = cls._skeleton(skeleton)
        if skeleton is Skeleton.H2:
            return len(HandJoint)
        return len(cls._BODY_SLOTS[skeleton])

    @classmethod
    def slots(cls, skeleton):
        """
        Ordered ``(joint, side)`` pairs of a skeleton.

        Hand slots carry no side of their own; the side selects the hand.
        """
        skeleton = cls._skeleton(skeleton)
        if skeleton is Skeleton.H2:
            return tuple((joint, None) for joint in HandJoint)
        return cls._BODY_SLOTS[skeleton]

    @classmethod
    def axes(cls, skeleton):
        if cls._skeleton(skeleton) is Skeleton.B3:
            return ("x", "y", "z")
        return ("x", "y")

    @classmethod
    def group(cls, skeleton, side=Side.CENTER):
        """
        Name of the recording group holding a skeleton.

        :param skeleton: A Skeleton (or its name).
        :param side: Hand side, only used for the hand skeleton.
        :returns: One of the keys of GROUP_SHAPES.
        """
        skeleton = cls._skeleton(skeleton)
        if skeleton is Skeleton.B2:
            return "body2d"
        if skeleton is Skeleton.B3:
            return "body3d"

        side = side if isinstance(side, Side) else Side.from_str(side)
        if side is Side.CENTER:
            raise IndexError("Hand skeleton requires a left or right side.")
        return "hand2d_{}".format(side.value)

    @classmethod
    def slot(cls, skeleton, joint, side=Side.CENTER):
        """
        Resolve a semantic joint to its slot index.

        :param skeleton: A Skeleton (or its name).
        :param joint: Joint enumeration member, its integer value or name.
        :param side: Side of the joint.
        :returns: Integer slot index inside the skeleton's group array.
        """
        skeleton = cls._skeleton(skeleton)
        side = side if isinstance(side, Side) else Side.from_str(side)
        joint_enum = HandJoint if skeleton is Skeleton.H2 else BodyJoint
        try:
            if isinstance(joint, str):
                joint = joint_enum[joint.upper()]
            else:
                joint = joint_enum(int(joint))
        except (KeyError, ValueError, TypeError):
            raise IndexError(
                "Joint '{}' not valid for skeleton {}."
                .format(joint, skeleton.value))

        if skeleton is Skeleton.H2:
            if side is Side.CENTER:
                raise IndexError("Hand joints require a left or right side.")
            return int(joint)

        try:
            return cls._BODY_INDEX[skeleton][(joint, side)]
        except KeyError:
            raise IndexError(
                "Joint '{}' has no '{}' side in skeleton {}."
                .format(joint.name, side.value, skeleton.value))

    @classmethod
    def columns(cls, group):
        """Flat column names ``<group>_<side>_<joint>_<axis>`` of a group."""
        skeleton, _, _ = GROUP_SHAPES[group]
        axes = ("x", "y", "z") if skeleton is Skeleton.B3 \
            else ("x", "y", "conf")
        if skeleton is Skeleton.H2:
            names = ["{}_{}".format(group, joint.name.lower())
                     for joint in HandJoint]
        else:
            names = ["{}_{}_{}".format(group, side.value, joint.name.lower())
                     for joint, side in cls._BODY_SLOTS[skeleton]]
        return ["{}_{}".format(name, axis) for name in names for axis in axes]


def _axis_index(skeleton, axis):
    try:
        if isinstance(axis, str):
            axis = Axis[axis.upper()]
        else:
            axis = Axis(int(axis))
    except (KeyError, ValueError, TypeError):
        raise IndexError(f"Axis '{axis}' not valid.")

    if axis is Axis.Z and skeleton is not Skeleton.B3:
        raise IndexError(
            "Axis 'z' not valid for 2D skeleton {}.".format(skeleton.value))
    return int(axis)


class Keypoint2D(NamedTuple):
    x: float
    y: float
    confidence: float


class Keypoint3D(NamedTuple):
    x: float
    y: float
    z: float


class Frame(NamedTuple):
    """One time step of a recording; absent groups are None."""

    body2d: Optional[tuple] = None
    hand2d_left: Optional[tuple] = None
    hand2d_right: Optional[tuple] = None
    body3d: Optional[tuple] = None


@dataclass(frozen=True, eq=False)
class TimeSeries1D:
    """A uniformly sampled scalar signal."""

    samples: np.ndarray
    fps: float
    t0: float = 0.0
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("Time series samples must be one dimensional.")
        if not np.all(np.isfinite(samples)):
            raise ValueError("Time series samples must be finite.")
        fps = float(self.fps)
        if not np.isfinite(fps) or fps <= 0:
            msg = "Sample rate must be positive, got {}.".format(self.fps)
            LOGGER.error(msg)
            raise ValueError(msg)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "fps", fps)
        object.__setattr__(self, "t0", float(self.t0))

        if self.mask is not None:
            mask = np.array(self.mask, dtype=bool)
            if mask.shape != samples.shape:
                raise ValueError("Mask must match the samples in length.")
            mask.setflags(write=False)
            object.__setattr__(self, "mask", mask)

    def __len__(self):
        return len(self.samples)

    def __eq__(self, other):
        if not isinstance(other, TimeSeries1D):
            return NotImplemented
        return (self.fps == other.fps and self.t0 == other.t0
                and np.array_equal(self.samples, other.samples))

    @property
    def times(self):
        return self.t0 + np.arange(len(self.samples)) / self.fps

    @property
    def duration(self):
        return len(self.samples) / self.fps

    def with_samples(self, samples, mask=None):
        """New series sharing this series' timing."""
        return TimeSeries1D(samples, self.fps, self.t0, mask)

    def window(self, start, end):
        """Samples ``[start, end)`` with the start time shifted."""
        return TimeSeries1D(self.samples[start:end], self.fps,
                            self.t0 + start / self.fps)


def _coerce_enum(value, enum_cls, field):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls.from_str(value)
    except ValueError as exc:
        msg = "Invalid {}: {}".format(field, exc)
        LOGGER.error(msg)
        raise SchemaError(msg)


@dataclass(frozen=True, eq=False)
class PoseRecording:
    """
    An immutable, validated pose recording.

    Frame ``i`` is sampled at ``t_i = i / fps``. Groups that a recording does
    not carry are ``None``; the groups required by ``test_kind`` are always
    present.
    """

    fps: float
    test_kind: ExamKind
    label: Label = Label.UNLABELED
    subject_id: str = ""
    device: str = ""
    recording_id: str = ""
    body2d: Optional[np.ndarray] = None
    hand2d_left: Optional[np.ndarray] = None
    hand2d_right: Optional[np.ndarray] = None
    body3d: Optional[np.ndarray] = None

    def __post_init__(self):
        try:
            fps = float(self.fps)
        except (TypeError, ValueError):
            fps = float("nan")
        if not np.isfinite(fps) or fps <= 0:
            msg = "Recording fps must be positive, got {}.".format(self.fps)
            LOGGER.error(msg)
            raise ValueError(msg)
        object.__setattr__(self, "fps", fps)

        test_kind = _coerce_enum(self.test_kind, ExamKind, "test_kind")
        object.__setattr__(self, "test_kind", test_kind)
        object.__setattr__(
            self, "label", _coerce_enum(self.label, Label, "label"))
        for field in ("subject_id", "device", "recording_id"):
            object.__setattr__(self, field, str(getattr(self, field)))

        n_frames = None
        for group, (_, slots, width) in GROUP_SHAPES.items():
            value = getattr(self, group)
            if value is None:
                continue

            try:
                array = np.array(value, dtype=float)
            except (TypeError, ValueError):
                msg = "Group '{}' holds non-numeric or ragged values." \
                      .format(group)
                LOGGER.error(msg)
                raise SchemaError(msg)

            if array.ndim != 3 or array.shape[1:] != (slots, width):
                msg = "Group '{}' must have shape (frames, {}, {}), " \
                      "found {}.".format(group, slots, width, array.shape)
                LOGGER.error(msg)
                raise SchemaError(msg)

            if n_frames is None:
                n_frames = array.shape[0]
            elif array.shape[0] != n_frames:
                msg = "Group '{}' has {} frames, expected {}." \
                      .format(group, array.shape[0], n_frames)
                LOGGER.error(msg)
                raise SchemaError(msg)

            if not np.all(np.isfinite(array)):
                msg = "Group '{}' contains non-finite values.".format(group)
                LOGGER.error(msg)
                raise SchemaError(msg)

            if GROUP_SHAPES[group][0] is not Skeleton.B3:
                conf = array[..., 2]
                if np.any((conf < 0) | (conf > 1)):
                    msg = "Group '{}' has confidences outside [0, 1]." \
                          .format(group)
                    LOGGER.error(msg)
                    raise SchemaError(msg)

            array.setflags(write=False)
            object.__setattr__(self, group, array)

        if not n_frames:
            msg = "Recording '{}' has no frames.".format(self.recording_id)
            LOGGER.error(msg)
            raise ValueError(msg)

        missing = [group for group in REQUIRED_GROUPS[test_kind]
                   if getattr(self, group) is None]
        if missing:
            msg = "Recording '{}' of kind {} is missing keypoint group(s): " \
                  "{}.".format(self.recording_id, test_kind.value,
                               ", ".join(missing))
            LOGGER.error(msg)
            raise SchemaError(msg)

    @classmethod
    def from_frames(cls, frames, fps, test_kind, **metadata):
        """
        Build a recording from a sequence of frames.

        :param frames: Iterable of Frame tuples or mappings of group name to
            a list of keypoint triples.
        :param fps: Frames per second.
        :param test_kind: ExamKind of the recording.
        :param metadata: label, subject_id, device and recording_id.
        :returns: A validated PoseRecording.
        """
        frames = list(frames)
        groups = {}
        for group in GROUP_SHAPES:
            values = [
                (frame._asdict() if isinstance(frame, Frame) else frame)
                .get(group) for frame in frames
            ]
            present = [value is not None for value in values]
            if not any(present):
                continue
            if not all(present):
                msg = "Group '{}' is present in only {} of {} frames." \
                      .format(group, sum(present), len(frames))
                LOGGER.error(msg)
                raise SchemaError(msg)
            groups[group] = values

        return cls(fps=fps, test_kind=test_kind, **metadata, **groups)

    def __eq__(self, other):
        if not isinstance(other, PoseRecording):
            return NotImplemented

        for field in ("fps", "test_kind", "label", "subject_id", "device",
                      "recording_id"):
            if getattr(self, field) != getattr(other, field):
                return False

        for group in GROUP_SHAPES:
            mine, theirs = getattr(self, group), getattr(other, group)
            if mine is None or theirs is None:
                if mine is not theirs:
                    return False
            elif not np.array_equal(mine, theirs):
                return False
        return True

    def __repr__(self):
        return "PoseRecording(id={!r}, kind={}, label={}, frames={}, " \
               "fps={})".format(self.recording_id, self.test_kind.value,
                                self.label.value, self.n_frames, self.fps)

    @property
    def n_frames(self):
        for group in GROUP_SHAPES:
            value = getattr(self, group)
            if value is not None:
                return value.shape[0]
        return 0

    @property
    def duration(self):
        return self.n_frames / self.fps

    @property
    def times(self):
        return np.arange(self.n_frames) / self.fps

    @property
    def groups(self):
        return tuple(group for group in GROUP_SHAPES
                     if getattr(self, group) is not None)

    @property
    def frames(self):
        """Per-frame view of the recording as Frame tuples."""
        frames = []
        for i in range(self.n_frames):
            values = {}
            for group in self.groups:
                point = Keypoint3D if group == "body3d" else Keypoint2D
                values[group] = tuple(
                    point(*map(float, row)) for row in getattr(self, group)[i]
                )
            frames.append(Frame(**values))
        return tuple(frames)

    def metadata(self):
        """Recording metadata as a JSON compatible mapping."""
        return OrderedDict([
            ("recording_id", self.recording_id),
            ("fps", self.fps),
            ("test_kind", self.test_kind.value),
            ("label", self.label.value),
            ("subject_id", self.subject_id),
            ("device", self.device),
        ])

    def replace(self, **changes):
        """Copy of the recording with some fields replaced and revalidated."""
        return dataclasses.replace(self, **changes)


def _resolve(rec, skeleton, joint, side):
    skeleton = SkeletonConvention._skeleton(skeleton)
    index = SkeletonConvention.slot(skeleton, joint, side)
    group = SkeletonConvention.group(skeleton, side)
    array = getattr(rec, group)
    if array is None:
        msg = "Recording '{}' has no '{}' group.".format(
            rec.recording_id, group)
        LOGGER.error(msg)
        raise SchemaError(msg)
    return skeleton, array, index


def keypoint_series(rec, skeleton, joint, side, axis):
    """
    Extract one coordinate of one keypoint as a time series.

    :param rec: A PoseRecording.
    :param skeleton: Skeleton holding the joint (H2, B2 or B3).
    :param joint: Joint enumeration member, value or name.
    :param side: Side of the joint (left, right or center).
    :param axis: 'x', 'y' or, for B3 only, 'z'.
    :returns: A TimeSeries1D with one sample per frame.
    """
    skeleton = SkeletonConvention._skeleton(skeleton)
    axis_index = _axis_index(skeleton, axis)
    SkeletonConvention.slot(skeleton, joint, side)
    _, array, index = _resolve(rec, skeleton, joint, side)
    return TimeSeries1D(array[:, index, axis_index], rec.fps)


def confidence_series(rec, skeleton, joint, side):
    """Confidence of a 2D keypoint as a time series."""
    skeleton = SkeletonConvention._skeleton(skeleton)
    if skeleton is Skeleton.B3:
        raise IndexError("3D keypoints carry no confidence.")
    _, array, index = _resolve(rec, skeleton, joint, side)
    return TimeSeries1D(array[:, index, 2], rec.fps)


def keypoint_positions(rec, skeleton, joint, side):
    """Per-frame coordinates of a keypoint, shape ``(frames, 2 or 3)``."""
    skeleton, array, index = _resolve(rec, skeleton, joint, side)
    width = 3 if skeleton is Skeleton.B3 else 2
    return array[:, index, :width]
