###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Helpers shared by the per-exam feature extractors."""
import logging

import numpy as np

from neuroexam.abstracts.enums import ExamKind, Side, Skeleton
from neuroexam.datastructures.features import ExtractionConfig, STATS, \
    StatSummary
from neuroexam.datastructures.pose import keypoint_positions
from neuroexam.errors import DegenerateError, SchemaError
from neuroexam.signals import asymmetry

LOGGER = logging.getLogger(__name__)

SIDES = (Side.RIGHT, Side.LEFT)


def require_kind(rec, kind):
    """Reject recordings of another exam kind."""
    if rec.test_kind is not kind:
        msg = "Recording '{}' is a {} exam, expected {}.".format(
            rec.recording_id, rec.test_kind.value, kind.value)
        LOGGER.error(msg)
        raise SchemaError(msg)


def resolve_config(cfg):
    return cfg if cfg is not None else ExtractionConfig()


def put_summary(values, prefix, summary, stats=STATS):
    """Store the requested statistics of a summary under ``prefix.stat``."""
    for stat, value in summary.items(stats):
        values["{}.{}".format(prefix, stat)] = value


def put_missing(values, prefix, stats=STATS):
    for stat in stats:
        values["{}.{}".format(prefix, stat)] = None


def put_sided(values, prefix, quantity, per_side, stats=STATS, asym=False):
    """
    Store right and left summaries of a quantity, and optionally their
    asymmetry computed on the means.
    """
    for side in SIDES:
        put_summary(values, "{}.{}.{}".format(prefix, quantity, side.value),
                    per_side[side], stats)
    if asym:
        values["{}.{}.asym".format(prefix, quantity)] = asymmetry(
            per_side[Side.RIGHT].mean, per_side[Side.LEFT].mean)


def relative_separation(rec, joint):
    """
    Per-frame ``||s_r - s_l|| / ||s_r||`` of a 2D body joint.

    :raises DegenerateError: If the right joint sits at the origin in any
        frame.
    """
    right = keypoint_positions(rec, Skeleton.B2, joint, Side.RIGHT)
    left = keypoint_positions(rec, Skeleton.B2, joint, Side.LEFT)
    norms = np.linalg.norm(right, axis=1)
    if np.any(norms == 0):
        msg = "Right {} has zero norm in recording '{}'.".format(
            joint.name.lower(), rec.recording_id)
        LOGGER.error(msg)
        raise DegenerateError(msg)
    return np.linalg.norm(right - left, axis=1) / norms


def stability(rec, joint):
    return StatSummary.from_values(relative_separation(rec, joint))


def cycle_maxima(values, cycles):
    """Maximum of ``values`` within each anchor to anchor cycle."""
    return np.array([np.max(values[start:end + 1])
                     for start, end in cycle_bounds(cycles)])


def cycle_bounds(cycles):
    return [(int(s), int(e)) for s, e in cycles.cycle_bounds()]


def upper_limb_kinds():
    return tuple(kind for kind in ExamKind if kind.is_upper_limb)
