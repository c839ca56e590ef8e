###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Package for providing enumerations for recordings and skeletons."""
from enum import Enum, IntEnum

__all__ = (
    "Axis", "BodyJoint", "ExamKind", "HandJoint", "Label", "SegmentKind",
    "Side", "Skeleton",
)


class ExamKind(Enum):
    """Neurological exam performed in a recording."""

    FT = "FT"       # Finger tapping
    FTF = "FTF"     # Finger to finger
    FR = "FR"       # Forearm roll
    SAW = "SAW"     # Stand up and walk

    @classmethod
    def from_str(cls, kind):
        try:
            return cls(str(kind).upper())
        except ValueError:
            raise ValueError(f"Exam kind '{kind}' not valid.")

    @property
    def is_upper_limb(self):
        return self is not ExamKind.SAW


class Label(Enum):
    """Clinical label attached to a recording."""

    NORMAL = "normal"
    ABNORMAL = "abnormal"
    UNLABELED = "unlabeled"

    @classmethod
    def from_str(cls, label):
        try:
            return cls(str(label).lower())
        except ValueError:
            raise ValueError(f"Label '{label}' not valid.")

    @property
    def target(self):
        """Binary class target: normal 0, abnormal 1, unlabeled -1."""
        if self is Label.NORMAL:
            return 0
        if self is Label.ABNORMAL:
            return 1
        return -1


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"
    CENTER = "center"

    @classmethod
    def from_str(cls, side):
        try:
            return cls(str(side).lower())
        except ValueError:
            raise IndexError(f"Side '{side}' not valid.")


class Skeleton(Enum):
    """Keypoint layouts: 2D hand, 2D body and 3D body."""

    H2 = "H2"
    B2 = "B2"
    B3 = "B3"


class Axis(IntEnum):
    X = 0
    Y = 1
    Z = 2


class SegmentKind(Enum):
    """Phases of a stand-up-and-walk recording."""

    SU = "SU"   # Stand up
    W = "W"     # Walk
    TU = "TU"   # Turn


class HandJoint(IntEnum):
    """Canonical 21 slot hand layout."""

    WRIST = 0
    THUMB_BASE = 1
    THUMB_MID = 2
    THUMB_TIP = 3
    INDEX_BASE = 4
    INDEX_MID = 5
    INDEX_TIP = 6
    MIDDLE_BASE = 7
    MIDDLE_MID = 8
    MIDDLE_TIP = 9
    RING_BASE = 10
    RING_MID = 11
    RING_TIP = 12
    PINKY_BASE = 13
    PINKY_MID = 14
    PINKY_TIP = 15
    THUMB_IP = 16
    INDEX_DIP = 17
    MIDDLE_DIP = 18
    RING_DIP = 19
    PINKY_DIP = 20


class BodyJoint(IntEnum):
    """Semantic body joints shared by the 2D and 3D body skeletons."""

    PELVIS = 0
    NECK = 1
    FOOT = 2
    KNEE = 3
    HIP = 4
    SHOULDER = 5
    ELBOW = 6
    WRIST = 7
    NOSE = 8
    HEAD = 9
    SPINE = 10
    EYE = 11
    EAR = 12
    BIG_TOE = 13
    SMALL_TOE = 14
    HEEL = 15
