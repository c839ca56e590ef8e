from contextlib import nullcontext as does_not_raise

import numpy as np
import pytest
from pytest import raises

from neuroexam.abstracts.enums import Axis, BodyJoint, ExamKind, HandJoint, \
    Label, Side, Skeleton
from neuroexam.datastructures.pose import Frame, GROUP_SHAPES, \
    Keypoint2D, PoseRecording, SkeletonConvention, TimeSeries1D, \
    confidence_series, keypoint_positions, keypoint_series
from neuroexam.errors import SchemaError


def _groups(n_frames, kind="FT"):
    groups = {
        "body2d": np.full((n_frames, 25, 3), 0.5),
        "hand2d_left": np.full((n_frames, 21, 3), 0.5),
        "hand2d_right": np.full((n_frames, 21, 3), 0.5),
    }
    if kind == "SAW":
        del groups["hand2d_left"], groups["hand2d_right"]
        groups["body3d"] = np.zeros((n_frames, 17, 3))
    return groups


@pytest.mark.parametrize(
    "skeleton, expected",
    [(Skeleton.H2, 21), (Skeleton.B2, 25), (Skeleton.B3, 17), ("b3", 17)],
)
def test_skeleton_size(skeleton, expected):
    assert SkeletonConvention.size(skeleton) == expected


@pytest.mark.parametrize("skeleton", [Skeleton.B2, Skeleton.B3])
def test_body_slots_are_injective(skeleton):
    """Every (joint, side) pair of a body skeleton owns exactly one slot."""
    slots = SkeletonConvention.slots(skeleton)
    assert len(set(slots)) == len(slots) == SkeletonConvention.size(skeleton)
    for idx, (joint, side) in enumerate(slots):
        assert SkeletonConvention.slot(skeleton, joint, side) == idx


@pytest.mark.parametrize(
    "skeleton, joint, side, expected, error",
    [
        (Skeleton.B2, BodyJoint.NECK, Side.CENTER, 1, does_not_raise()),
        (Skeleton.B2, BodyJoint.PELVIS, "center", 8, does_not_raise()),
        (Skeleton.B2, "wrist", "right", 4, does_not_raise()),
        (Skeleton.B3, BodyJoint.PELVIS, Side.CENTER, 0, does_not_raise()),
        (Skeleton.B3, BodyJoint.FOOT, Side.LEFT, 6, does_not_raise()),
        (Skeleton.H2, HandJoint.THUMB_TIP, Side.LEFT, 3, does_not_raise()),
        (Skeleton.H2, HandJoint.INDEX_DIP, Side.RIGHT, 17,
         does_not_raise()),
        (Skeleton.H2, HandJoint.WRIST, Side.CENTER, None, raises(IndexError)),
        (Skeleton.B2, BodyJoint.WRIST, Side.CENTER, None, raises(IndexError)),
        (Skeleton.B3, BodyJoint.HEEL, Side.LEFT, None, raises(IndexError)),
        (Skeleton.B2, "elbow", "up", None, raises(IndexError)),
        (Skeleton.B2, "tail", "center", None, raises(IndexError)),
        ("B4", BodyJoint.NECK, Side.CENTER, None, raises(IndexError)),
    ],
)
def test_slot(skeleton, joint, side, expected, error):
    with error:
        assert SkeletonConvention.slot(skeleton, joint, side) == expected


@pytest.mark.parametrize(
    "skeleton, side, expected, error",
    [
        (Skeleton.B2, Side.CENTER, "body2d", does_not_raise()),
        (Skeleton.B3, Side.RIGHT, "body3d", does_not_raise()),
        (Skeleton.H2, Side.LEFT, "hand2d_left", does_not_raise()),
        (Skeleton.H2, "right", "hand2d_right", does_not_raise()),
        (Skeleton.H2, Side.CENTER, None, raises(IndexError)),
    ],
)
def test_group(skeleton, side, expected, error):
    with error:
        assert SkeletonConvention.group(skeleton, side) == expected


@pytest.mark.parametrize("group", list(GROUP_SHAPES))
def test_columns(group):
    _, slots, width = GROUP_SHAPES[group]
    columns = SkeletonConvention.columns(group)
    assert len(columns) == len(set(columns)) == slots * width
    assert all(name.startswith(group + "_") for name in columns)


def test_columns_names():
    assert SkeletonConvention.columns("body2d")[:3] == [
        "body2d_center_nose_x", "body2d_center_nose_y",
        "body2d_center_nose_conf"]
    assert SkeletonConvention.columns("body3d")[2] == \
        "body3d_center_pelvis_z"
    assert SkeletonConvention.columns("hand2d_left")[9] == \
        "hand2d_left_thumb_tip_x"


@pytest.mark.parametrize(
    "samples, fps, error",
    [
        ([0.0, 1.0, 2.0], 30.0, does_not_raise()),
        ([[0.0, 1.0]], 30.0, raises(ValueError)),
        ([0.0, float("inf")], 30.0, raises(ValueError)),
        ([0.0, 1.0], 0.0, raises(ValueError)),
        ([0.0, 1.0], -5.0, raises(ValueError)),
    ],
)
def test_time_series(samples, fps, error):
    with error:
        TimeSeries1D(samples, fps)


def test_time_series_timing():
    series = TimeSeries1D(np.arange(6.0), 2.0, t0=1.0)
    np.testing.assert_allclose(series.times, [1.0, 1.5, 2.0, 2.5, 3.0, 3.5])
    assert series.duration == 3.0

    part = series.window(2, 4)
    np.testing.assert_array_equal(part.samples, [2.0, 3.0])
    assert part.t0 == 2.0
    with raises(ValueError):
        series.samples[0] = 5.0


def test_time_series_mask():
    with raises(ValueError):
        TimeSeries1D([1.0, 2.0], 10.0, mask=[True])
    series = TimeSeries1D([1.0, 2.0], 10.0, mask=[1, 0])
    assert series.mask.dtype == bool


@pytest.mark.parametrize("kind", ["FT", "FTF", "FR", "SAW"])
def test_recording_valid(kind):
    rec = PoseRecording(fps=30, test_kind=kind, label="Normal",
                        recording_id="r1", **_groups(4, kind))
    assert rec.n_frames == 4
    assert rec.test_kind is ExamKind(kind)
    assert rec.label is Label.NORMAL
    assert rec.duration == pytest.approx(4 / 30)
    np.testing.assert_allclose(rec.times, np.arange(4) / 30)
    with raises(ValueError):
        rec.body2d[0, 0, 0] = 1.0


def _bad_groups(change):
    groups = _groups(3)
    change(groups)
    return groups


@pytest.mark.parametrize(
    "kwargs, error",
    [
        ({"fps": 0.0}, raises(ValueError)),
        ({"fps": "fast"}, raises(ValueError)),
        ({"test_kind": "XX"}, raises(SchemaError)),
        ({"label": "sick"}, raises(SchemaError)),
        ({"body2d": np.zeros((3, 24, 3))}, raises(SchemaError)),
        ({"hand2d_left": np.zeros((3, 21, 2))}, raises(SchemaError)),
        ({"hand2d_right": np.full((4, 21, 3), 0.5)}, raises(SchemaError)),
        ({"body2d": np.full((3, 25, 3), np.nan)}, raises(SchemaError)),
        ({"body2d": np.full((3, 25, 3), 1.5)}, raises(SchemaError)),
        ({"hand2d_left": None}, raises(SchemaError)),
        ({"body2d": np.zeros((0, 25, 3)), "hand2d_left": None,
          "hand2d_right": None}, raises(ValueError)),
    ],
)
def test_recording_invalid(kwargs, error):
    fields = dict(fps=30.0, test_kind="FT", **_groups(3))
    fields.update(kwargs)
    with error:
        PoseRecording(**fields)


def test_saw_requires_body3d():
    with raises(SchemaError):
        PoseRecording(fps=30, test_kind="SAW",
                      body2d=np.full((3, 25, 3), 0.5))


def test_recording_3d_skips_confidence_check():
    """3D coordinates may take any finite value."""
    groups = _groups(3, "SAW")
    groups["body3d"] = np.full((3, 17, 3), -4.0)
    PoseRecording(fps=30, test_kind="SAW", **groups)


def test_recording_frames_round_trip():
    rec = PoseRecording(fps=25, test_kind="FT", **_groups(2))
    frames = rec.frames
    assert len(frames) == 2
    assert isinstance(frames[0].body2d[0], Keypoint2D)
    assert frames[0].body3d is None
    assert PoseRecording.from_frames(frames, 25, "FT") == rec


def test_from_frames_partial_group():
    """A group present in only some frames is rejected."""
    groups = _groups(2)
    frames = [
        Frame(body2d=groups["body2d"][0], hand2d_left=groups["hand2d_left"][0],
              hand2d_right=groups["hand2d_right"][0]),
        {"body2d": groups["body2d"][1],
         "hand2d_left": groups["hand2d_left"][1]},
    ]
    with raises(SchemaError):
        PoseRecording.from_frames(frames, 25, "FT")


def test_recording_equality(synth_recording):
    rec = synth_recording("FT", duration=1.0)
    assert rec == synth_recording("FT", duration=1.0)
    assert rec != rec.replace(device="tablet")
    assert rec != synth_recording("FT", duration=1.0, amplitude_left=0.4)


def test_recording_metadata(synth_recording):
    rec = synth_recording("FR", duration=1.0, subject_id="S01",
                          recording_id="fr1", label="abnormal")
    assert dict(rec.metadata()) == {
        "recording_id": "fr1", "fps": 60.0, "test_kind": "FR",
        "label": "abnormal", "subject_id": "S01", "device": "synthetic"}
    assert rec.groups == ("body2d", "hand2d_left", "hand2d_right")


def test_keypoint_series(synth_recording):
    rec = synth_recording("FT", duration=1.0)
    wrist_x = keypoint_series(rec, Skeleton.B2, BodyJoint.WRIST, Side.RIGHT,
                              Axis.X)
    assert len(wrist_x) == rec.n_frames
    assert wrist_x.fps == rec.fps
    slot = SkeletonConvention.slot(Skeleton.B2, BodyJoint.WRIST, Side.RIGHT)
    np.testing.assert_array_equal(wrist_x.samples, rec.body2d[:, slot, 0])

    thumb_y = keypoint_series(rec, "H2", HandJoint.THUMB_TIP, "left", "y")
    np.testing.assert_array_equal(
        thumb_y.samples, rec.hand2d_left[:, HandJoint.THUMB_TIP, 1])

    conf = confidence_series(rec, Skeleton.H2, HandJoint.INDEX_TIP,
                             Side.RIGHT)
    np.testing.assert_allclose(conf.samples, 0.95)


@pytest.mark.parametrize(
    "skeleton, joint, side, axis, error",
    [
        (Skeleton.B2, BodyJoint.NECK, Side.CENTER, "z", raises(IndexError)),
        (Skeleton.B2, BodyJoint.NECK, Side.CENTER, "w", raises(IndexError)),
        (Skeleton.H2, HandJoint.WRIST, Side.CENTER, "x", raises(IndexError)),
        (Skeleton.B3, BodyJoint.NECK, Side.CENTER, "x", raises(SchemaError)),
        (Skeleton.B2, BodyJoint.NECK, Side.CENTER, "y", does_not_raise()),
    ],
)
def test_keypoint_series_errors(synth_recording, skeleton, joint, side, axis,
                                error):
    rec = synth_recording("FT", duration=1.0)
    with error:
        keypoint_series(rec, skeleton, joint, side, axis)


def test_keypoint_positions_3d(synth_recording):
    rec = synth_recording("SAW", n_passes=1)
    pelvis = keypoint_positions(rec, Skeleton.B3, BodyJoint.PELVIS,
                                Side.CENTER)
    assert pelvis.shape == (rec.n_frames, 3)
    np.testing.assert_allclose(pelvis, 0.0)
    with raises(IndexError):
        confidence_series(rec, Skeleton.B3, BodyJoint.PELVIS, Side.CENTER)
