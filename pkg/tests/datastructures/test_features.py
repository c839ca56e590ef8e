from contextlib import nullcontext as does_not_raise

import pytest
from pytest import raises

from neuroexam.abstracts.enums import ExamKind, Label, SegmentKind
from neuroexam.datastructures.features import CATALOGUE, ExtractionConfig, \
    FeatureVector, GaitStep, SawConfig, SegmentLabel, StatSummary, \
    catalogue_order, feature_names
from neuroexam.errors import SchemaError


@pytest.mark.parametrize(
    "kind, size, first, last",
    [
        ("FT", 43, "ft.amplitude.right.mean", "ft.elbow_stability.median"),
        ("FTF", 18, "ftf.sx", "ftf.velocity_angle_symmetry.left.std"),
        ("FR", 39, "fr.amplitude.right.mean", "fr.elbow_stability.median"),
        ("SAW", 23, "saw.knee_angle_symmetry.mean", "saw.cadence.std"),
    ],
)
def test_catalogue(kind, size, first, last):
    names = feature_names(kind)
    assert len(names) == len(set(names)) == size
    assert names[0] == first
    assert names[-1] == last
    assert all(name.startswith(kind.lower() + ".") for name in names)


def test_catalogue_contents():
    ft = feature_names(ExamKind.FT)
    for name in ("ft.amplitude.asym", "ft.max_speed.left.mean",
                 "ft.max_accel.asym", "ft.tap_rate.right",
                 "ft.wrist_stability.std"):
        assert name in ft
    assert "ft.speed.right.std" not in ft
    assert "saw.time_to_stand" in feature_names("saw")
    assert "fr.roll_rate.left" in feature_names("FR")


def test_catalogue_order():
    order = catalogue_order()
    assert len(order) == sum(len(names) for names in CATALOGUE.values())
    assert order[:2] == ("ft.amplitude.right.mean",
                         "ft.amplitude.right.std")


def test_unknown_kind():
    with raises(ValueError):
        feature_names("TUG")


def test_stat_summary():
    summary = StatSummary.from_values([1.0, 2.0, 6.0])
    assert summary.mean == pytest.approx(3.0)
    assert summary.std == pytest.approx(2.160246899)
    assert summary.median == 2.0
    assert summary.items(("mean", "median")) == [("mean", 3.0),
                                                 ("median", 2.0)]
    with raises(ValueError):
        StatSummary.from_values([])


@pytest.mark.parametrize(
    "kind, start, end, direction, error",
    [
        ("W", 0, 10, "+x", does_not_raise()),
        (SegmentKind.SU, 3, 4, "none", does_not_raise()),
        ("TU", 5, 5, "none", raises(ValueError)),
        ("W", -1, 5, "+x", raises(ValueError)),
        ("W", 0, 5, "up", raises(ValueError)),
        ("XX", 0, 5, "none", raises(ValueError)),
    ],
)
def test_segment_label(kind, start, end, direction, error):
    with error:
        segment = SegmentLabel(kind, start, end, direction)
        assert len(segment) == end - start
        assert segment.last == end - 1
        assert segment.to_dict()["start"] == start


def test_segment_label_dict():
    segment = SegmentLabel(SegmentKind.TU, 10, 40)
    assert dict(segment.to_dict()) == {"kind": "TU", "start": 10, "end": 40}


@pytest.mark.parametrize(
    "onset, offset, error",
    [
        (20, None, does_not_raise()),
        (20, 50, does_not_raise()),
        (None, 61, raises(ValueError)),
        (60, 60, raises(ValueError)),
    ],
)
def test_segment_label_motion(onset, offset, error):
    with error:
        segment = SegmentLabel(SegmentKind.SU, 0, 60, onset=onset,
                               offset=offset)
        assert len(segment) == 60
        assert segment.first == onset
        assert segment.n_active == (offset or 60) - onset
        assert segment.to_dict()["onset"] == onset


@pytest.mark.parametrize(
    "indices, step_time, length, width, error",
    [
        ((0, 5, 10), 0.2, 0.6, 0.1, does_not_raise()),
        ((0, 0, 10), 0.2, 0.6, 0.1, raises(ValueError)),
        ((0, 5, 10), 0.0, 0.6, 0.1, raises(ValueError)),
        ((0, 5, 10), 0.2, 0.1, 0.6, raises(ValueError)),
    ],
)
def test_gait_step(indices, step_time, length, width, error):
    with error:
        GaitStep(*indices, step_time=step_time, step_length=length,
                 step_width=width)


@pytest.mark.parametrize(
    "kwargs, error",
    [
        ({}, does_not_raise()),
        ({"walk_threshold": 0}, raises(ValueError)),
        ({"turn_min_duration": 0}, does_not_raise()),
        ({"turn_min_duration": -1}, raises(ValueError)),
        ({"refine_fraction": 1.0}, does_not_raise()),
        ({"refine_fraction": 0.0}, raises(ValueError)),
        ({"step_prominence_frac": 1.0}, raises(ValueError)),
    ],
)
def test_saw_config(kwargs, error):
    with error:
        SawConfig(**kwargs)


@pytest.mark.parametrize(
    "kwargs, error",
    [
        ({}, does_not_raise()),
        ({"period_from": "minima"}, does_not_raise()),
        ({"period_from": "zeros"}, raises(ValueError)),
        ({"prominence_frac": 0}, raises(ValueError)),
        ({"resample_points": 1}, raises(ValueError)),
        ({"fit_tolerance": 0}, raises(ValueError)),
    ],
)
def test_extraction_config(kwargs, error):
    with error:
        ExtractionConfig(**kwargs)


def _values(kind, value=1.0):
    return {name: value for name in feature_names(kind)}


def test_feature_vector():
    values = _values("FTF")
    values["ftf.sx"] = None
    vector = FeatureVector("ftf", values, recording_id="r1",
                           label="abnormal")
    assert vector.test_kind is ExamKind.FTF
    assert vector.label is Label.ABNORMAL
    assert vector.names == feature_names("FTF")
    assert vector.missing == ("ftf.sx",)
    assert vector["ftf.sy"] == 1.0
    assert FeatureVector.from_dict(vector.to_dict()) == vector


def test_feature_vector_keeps_catalogue_order():
    values = dict(reversed(list(_values("SAW").items())))
    vector = FeatureVector(ExamKind.SAW, values)
    assert vector.names == feature_names("SAW")


@pytest.mark.parametrize(
    "change, error",
    [
        (lambda v: v.pop("ft.amplitude.asym"), raises(SchemaError)),
        (lambda v: v.update({"ft.extra": 1.0}), raises(SchemaError)),
        (lambda v: v.update({"ft.amplitude.asym": float("nan")}),
         raises(SchemaError)),
        (lambda v: v.update({"ft.amplitude.asym": None}), does_not_raise()),
    ],
)
def test_feature_vector_invalid(change, error):
    values = _values("FT")
    change(values)
    with error:
        FeatureVector("FT", values)
