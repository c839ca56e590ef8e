###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Feature catalogues, feature vectors and extraction settings."""
from collections import OrderedDict
from dataclasses import dataclass, field
import logging
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

from neuroexam.abstracts.enums import ExamKind, Label, SegmentKind
from neuroexam.errors import SchemaError
from neuroexam.preprocess import PreprocessConfig

LOGGER = logging.getLogger(__name__)

SIDES = ("right", "left")
STATS = ("mean", "std", "median")


def _sided(prefix, quantity, stats, asym=False):
    names = ["{}.{}.{}.{}".format(prefix, quantity, side, stat)
             for side in SIDES for stat in stats]
    if asym:
        names.append("{}.{}.asym".format(prefix, quantity))
    return names


def _ft_catalogue():
    names = []
    for quantity in ("amplitude", "period", "freq"):
        names += _sided("ft", quantity, STATS, asym=True)
    names += _sided("ft", "speed", ("mean",))
    names += _sided("ft", "max_speed", ("mean",), asym=True)
    names += _sided("ft", "accel", ("mean",))
    names += _sided("ft", "max_accel", STATS, asym=True)
    names += ["ft.tap_rate.{}".format(side) for side in SIDES]
    for joint in ("wrist", "elbow"):
        names += ["ft.{}_stability.{}".format(joint, stat) for stat in STATS]
    return tuple(names)


def _ftf_catalogue():
    names = ["ftf.sx", "ftf.sy"]
    for quantity in ("period", "speed", "path_smoothness",
                     "velocity_angle_symmetry"):
        names += _sided("ftf", quantity, ("mean", "std"))
    return tuple(names)


def _fr_catalogue():
    names = []
    for quantity in ("amplitude", "period", "max_speed", "max_accel"):
        names += _sided("fr", quantity, STATS, asym=True)
    names += _sided("fr", "rolling_speed", STATS)
    names += ["fr.roll_rate.{}".format(side) for side in SIDES]
    names += ["fr.elbow_stability.{}".format(stat) for stat in STATS]
    return tuple(names)


def _saw_catalogue():
    names = []
    for quantity in ("knee_angle_symmetry", "step_symmetry", "step_length",
                     "step_width", "step_time", "turning_time"):
        names += ["saw.{}.{}".format(quantity, stat) for stat in STATS]
    names.append("saw.time_to_stand")
    for quantity in ("walking_speed", "cadence"):
        names += ["saw.{}.{}".format(quantity, stat)
                  for stat in ("mean", "std")]
    return tuple(names)


CATALOGUE = MappingProxyType({
    ExamKind.FT: _ft_catalogue(),
    ExamKind.FTF: _ftf_catalogue(),
    ExamKind.FR: _fr_catalogue(),
    ExamKind.SAW: _saw_catalogue(),
})


def feature_names(test_kind):
    """Ordered catalogue of feature names for an exam kind."""
    if not isinstance(test_kind, ExamKind):
        test_kind = ExamKind.from_str(test_kind)
    return CATALOGUE[test_kind]


def catalogue_order():
    """All catalogue names across exams in their canonical order."""
    return tuple(name for kind in ExamKind for name in CATALOGUE[kind])


@dataclass(frozen=True)
class StatSummary:
    """Mean, population standard deviation and median of a quantity."""

    mean: float
    std: float
    median: float

    @classmethod
    def from_values(cls, values):
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("Cannot summarize an empty set of values.")
        return cls(float(np.mean(values)), float(np.std(values)),
                   float(np.median(values)))

    def items(self, stats=STATS):
        """(stat, value) pairs for the requested statistics."""
        return [(stat, getattr(self, stat)) for stat in stats]


@dataclass(frozen=True)
class SegmentLabel:
    """
    A half-open frame range ``[start, end)`` of a SAW recording.

    ``onset`` and ``offset`` bound the detected motion inside the range and
    default to ``start`` and ``end``. The first and last segments of a
    recording also hold the idle frames around the motion, so durations
    and step searches use the motion bounds.
    """

    kind: SegmentKind
    start: int
    end: int
    direction: str = "none"
    onset: Optional[int] = None
    offset: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.kind, SegmentKind):
            object.__setattr__(self, "kind", SegmentKind(self.kind))
        if not 0 <= self.start < self.end:
            raise ValueError("Segment range [{}, {}) is empty or negative."
                             .format(self.start, self.end))
        if self.direction not in ("+x", "-x", "none"):
            raise ValueError(
                "Direction '{}' not valid.".format(self.direction))
        if self.onset is None:
            object.__setattr__(self, "onset", self.start)
        if self.offset is None:
            object.__setattr__(self, "offset", self.end)
        if not self.start <= self.onset < self.offset <= self.end:
            raise ValueError(
                "Motion [{}, {}) not inside segment [{}, {})."
                .format(self.onset, self.offset, self.start, self.end))

    @property
    def first(self):
        """First frame of the motion."""
        return self.onset

    @property
    def last(self):
        """Last frame of the motion."""
        return self.offset - 1

    @property
    def n_active(self):
        return self.offset - self.onset

    def __len__(self):
        return self.end - self.start

    def to_dict(self):
        data = OrderedDict([("kind", self.kind.value),
                            ("start", int(self.start)),
                            ("end", int(self.end))])
        if (self.onset, self.offset) != (self.start, self.end):
            data["onset"] = int(self.onset)
            data["offset"] = int(self.offset)
        return data


@dataclass(frozen=True)
class GaitStep:
    """One step delimited by consecutive feet-distance minima."""

    start_idx: int
    peak_idx: int
    end_idx: int
    step_time: float
    step_length: float
    step_width: float

    def __post_init__(self):
        if not self.start_idx < self.peak_idx < self.end_idx:
            raise ValueError("Step indices must satisfy start < peak < end.")
        if not self.step_time > 0:
            raise ValueError("Step time must be positive.")
        if not self.step_length >= self.step_width >= 0:
            raise ValueError("Step length must be at least the step width.")


@dataclass(frozen=True)
class SawConfig:
    """Thresholds for stand-up-and-walk segmentation and step detection."""

    stand_threshold: float = 0.5
    walk_threshold: float = 0.25
    turn_min_duration: float = 0.2
    hold_duration: float = 0.3
    min_walk_duration: float = 0.5
    refine_fraction: float = 0.5
    step_prominence_frac: float = 0.2

    def __post_init__(self):
        for name in ("stand_threshold", "walk_threshold", "hold_duration",
                     "min_walk_duration"):
            if not getattr(self, name) > 0:
                raise ValueError("saw.{} must be positive.".format(name))
        if self.turn_min_duration < 0:
            raise ValueError("saw.turn_min_duration must not be negative.")
        if not 0 < self.refine_fraction <= 1:
            raise ValueError("saw.refine_fraction must be in (0, 1].")
        if not 0 < self.step_prominence_frac < 1:
            raise ValueError("saw.step_prominence_frac must be in (0, 1).")


@dataclass(frozen=True)
class ExtractionConfig:
    """Everything a feature extractor needs besides the recording."""

    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    prominence_frac: float = 0.2
    period_from: str = "maxima"
    resample_points: int = 100
    fit_tolerance: float = 1e-6
    saw: SawConfig = field(default_factory=SawConfig)

    def __post_init__(self):
        if not 0 < self.prominence_frac < 1:
            raise ValueError("extract.prominence_frac must be in (0, 1).")
        if self.period_from not in ("maxima", "minima"):
            raise ValueError("extract.period_from must be 'maxima' or "
                             "'minima', got '{}'.".format(self.period_from))
        if int(self.resample_points) < 2:
            raise ValueError("extract.resample_points must be at least 2.")
        if not self.fit_tolerance > 0:
            raise ValueError("extract.fit_tolerance must be positive.")


@dataclass(frozen=True)
class FeatureVector:
    """
    Named scalar features of one recording.

    ``values`` always holds exactly the catalogue names of ``test_kind`` in
    catalogue order. Features that could not be computed are None.
    """

    test_kind: ExamKind
    values: Mapping[str, Optional[float]]
    recording_id: str = ""
    config_hash: str = ""
    subject_id: str = ""
    device: str = ""
    label: Label = Label.UNLABELED

    def __post_init__(self):
        kind = self.test_kind
        if not isinstance(kind, ExamKind):
            kind = ExamKind.from_str(kind)
        object.__setattr__(self, "test_kind", kind)
        if not isinstance(self.label, Label):
            object.__setattr__(self, "label", Label.from_str(self.label))

        names = CATALOGUE[kind]
        given = set(self.values)
        if given != set(names):
            unknown = sorted(given - set(names))
            missing = [name for name in names if name not in given]
            msg = "Feature names do not match the {} catalogue " \
                  "(unknown: {}, missing: {}).".format(
                      kind.value, unknown[:3], missing[:3])
            LOGGER.error(msg)
            raise SchemaError(msg)

        values = OrderedDict()
        for name in names:
            value = self.values[name]
            if value is not None:
                value = float(value)
                if not np.isfinite(value):
                    msg = "Feature '{}' is not finite.".format(name)
                    LOGGER.error(msg)
                    raise SchemaError(msg)
            values[name] = value
        object.__setattr__(self, "values", values)

    def __getitem__(self, name):
        return self.values[name]

    @property
    def names(self):
        return tuple(self.values)

    @property
    def missing(self):
        """Names of the features that could not be computed."""
        return tuple(name for name, value in self.values.items()
                     if value is None)

    def to_dict(self):
        return OrderedDict([
            ("recording_id", self.recording_id),
            ("test_kind", self.test_kind.value),
            ("subject_id", self.subject_id),
            ("device", self.device),
            ("label", self.label.value),
            ("config_hash", self.config_hash),
            ("features", OrderedDict(self.values)),
        ])

    @classmethod
    def from_dict(cls, data):
        return cls(test_kind=data["test_kind"],
                   values=data["features"],
                   recording_id=data.get("recording_id", ""),
                   config_hash=data.get("config_hash", ""),
                   subject_id=data.get("subject_id", ""),
                   device=data.get("device", ""),
                   label=data.get("label", "unlabeled"))

    @classmethod
    def for_recording(cls, rec, values, config_hash=""):
        """Feature vector carrying a recording's identity and label."""
        return cls(test_kind=rec.test_kind, values=values,
                   recording_id=rec.recording_id, config_hash=config_hash,
                   subject_id=rec.subject_id, device=rec.device,
                   label=rec.label)
