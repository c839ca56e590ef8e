from contextlib import nullcontext as does_not_raise

import numpy as np
import pytest
from pytest import raises

from neuroexam.abstracts.enums import BodyJoint, Side, Skeleton
from neuroexam.datastructures.pose import SkeletonConvention, TimeSeries1D
from neuroexam.errors import AllLowConfidenceError, DegenerateError, \
    RangeError
from neuroexam.preprocess import PreprocessConfig, median_filter, \
    normalize, prepare, reference_length, reference_length_3d, \
    repair_low_confidence, repair_recording, savgol_filter, truncate

RIGHT_WRIST = SkeletonConvention.slot(Skeleton.B2, BodyJoint.WRIST,
                                      Side.RIGHT)
RIGHT_ELBOW = SkeletonConvention.slot(Skeleton.B2, BodyJoint.ELBOW,
                                      Side.RIGHT)
LEFT_EAR = SkeletonConvention.slot(Skeleton.B2, BodyJoint.EAR, Side.LEFT)


def _forearm(rec):
    body = rec.body2d
    return np.linalg.norm(body[:, RIGHT_WRIST, :2] -
                          body[:, RIGHT_ELBOW, :2], axis=1)


def _with_confidence(rec, slot, conf, frames=slice(None)):
    body = np.array(rec.body2d)
    body[frames, slot, 2] = conf
    return rec.replace(body2d=body)


@pytest.mark.parametrize(
    "kwargs, error",
    [
        ({}, does_not_raise()),
        ({"median_window": 7, "savgol_window": 15}, does_not_raise()),
        ({"median_window": 4}, raises(ValueError)),
        ({"median_window": 1}, raises(ValueError)),
        ({"savgol_window": 10}, raises(ValueError)),
        ({"savgol_window": 5, "savgol_order": 5}, raises(ValueError)),
        ({"confidence_threshold": 1.5}, raises(ValueError)),
        ({"reference_fps": 0}, raises(ValueError)),
    ],
)
def test_preprocess_config(kwargs, error):
    with error:
        PreprocessConfig(**kwargs)


@pytest.mark.parametrize(
    "fps, expected",
    [
        (60.0, (5, 11)),
        (30.0, (3, 5)),
        (120.0, (11, 23)),
    ],
)
def test_windows_follow_sample_rate(fps, expected):
    """Windows keep their duration when the sample rate changes."""
    assert PreprocessConfig().windows(fps) == expected


def test_median_filter_removes_spike():
    samples = np.zeros(30)
    samples[10] = 5.0
    out = median_filter(TimeSeries1D(samples, 60.0), 5)
    np.testing.assert_array_equal(out.samples, 0.0)
    assert len(out) == 30


@pytest.mark.parametrize(
    "window, error",
    [
        (1, does_not_raise()),
        (4, raises(ValueError)),
        (2.5, raises(ValueError)),
    ],
)
def test_median_filter_window(window, error):
    series = TimeSeries1D(np.arange(10.0), 60.0)
    with error:
        assert median_filter(series, window) == series


@pytest.mark.parametrize("n", [50, 6])
def test_savgol_keeps_cubic(n):
    """Polynomials up to the filter order pass unchanged, edges included."""
    t = np.arange(n, dtype=float)
    cubic = 0.01 * t ** 3 - 0.2 * t ** 2 + t - 3.0
    out = savgol_filter(TimeSeries1D(cubic, 60.0), 11, 3)
    np.testing.assert_allclose(out.samples, cubic, atol=1e-8)


def test_savgol_errors():
    series = TimeSeries1D(np.arange(20.0), 60.0)
    with raises(ValueError):
        savgol_filter(series, 11, 11)
    with raises(ValueError):
        savgol_filter(series, 10, 3)


@pytest.mark.parametrize(
    "values, conf, expected, error",
    [
        ([0, 9, 9, 3, 4], [1, 0, 0, 1, 1], [0, 1, 2, 3, 4],
         does_not_raise()),
        ([9, 1, 2, 9], [0, 1, 1, 0.1], [1, 1, 2, 2], does_not_raise()),
        ([1, 2, 3], [1, 1, 1], [1, 2, 3], does_not_raise()),
        ([1, 2, 3], [0, 0.2, 0.1], None, raises(AllLowConfidenceError)),
        ([1, 2, 3], [1, 1], None, raises(ValueError)),
    ],
)
def test_repair_low_confidence(values, conf, expected, error):
    series = TimeSeries1D(np.asarray(values, dtype=float), 60.0)
    with error:
        out = repair_low_confidence(series, np.asarray(conf, float), 0.3)
        np.testing.assert_allclose(out.samples, expected)


def test_truncate(synth_recording):
    rec = synth_recording("FT", duration=2.0)
    cut = truncate(rec, (10, 20))
    assert cut.n_frames == 10
    np.testing.assert_array_equal(cut.body2d, rec.body2d[10:20])
    np.testing.assert_array_equal(cut.hand2d_left, rec.hand2d_left[10:20])
    assert cut.metadata() == rec.metadata()


@pytest.mark.parametrize(
    "frame_range",
    [(5, 5), (-1, 3), (0, 121), (1.5, 3), (20, 10)],
)
def test_truncate_invalid(synth_recording, frame_range):
    rec = synth_recording("FT", duration=2.0)
    with raises(RangeError):
        truncate(rec, frame_range)


@pytest.mark.parametrize(
    "kind, expected",
    [("FT", 0.2), ("FR", 0.2), ("FTF", 0.2), ("SAW", 0.2)],
)
def test_reference_length(synth_recording, kind, expected):
    """The synthetic template is drawn at a fifth of its size."""
    assert reference_length(synth_recording(kind)) == \
        pytest.approx(expected)


def test_reference_length_3d(synth_recording):
    assert reference_length_3d(synth_recording("SAW")) == pytest.approx(1.0)


def test_reference_length_missing_frames(synth_recording):
    """A single frame without a reference joint is an error until repaired."""
    rec = synth_recording("FT", duration=2.0)
    body = np.array(rec.body2d)
    body[:80, RIGHT_WRIST, :2] += 3.0
    body[:80, RIGHT_WRIST, 2] = 0.0
    rec = rec.replace(body2d=body)
    with raises(DegenerateError):
        reference_length(rec)
    assert reference_length(repair_recording(rec, 0.3)) == \
        pytest.approx(0.2)


def test_reference_length_missing(synth_recording):
    rec = _with_confidence(synth_recording("FT", duration=1.0),
                           RIGHT_WRIST, 0.0)
    with raises(DegenerateError):
        reference_length(rec)


def test_normalize(synth_recording):
    rec = synth_recording("FT", duration=1.0)
    out = normalize(rec, reference_length(rec))
    np.testing.assert_allclose(_forearm(out), 1.0)
    np.testing.assert_array_equal(out.body2d[..., 2], rec.body2d[..., 2])
    np.testing.assert_array_equal(out.hand2d_right[..., 2],
                                  rec.hand2d_right[..., 2])


def test_normalize_3d(synth_recording):
    rec = synth_recording("SAW", n_passes=1)
    out = normalize(rec, 0.2, 2.0)
    np.testing.assert_allclose(out.body3d, rec.body3d / 2.0)
    np.testing.assert_allclose(out.body2d[..., :2], rec.body2d[..., :2] / .2)


@pytest.mark.parametrize("ref", [0.0, -1.0, float("nan")])
def test_normalize_invalid(synth_recording, ref):
    with raises(ValueError):
        normalize(synth_recording("FT", duration=1.0), ref)


def test_repair_recording(synth_recording):
    """Low confidence samples take interpolated positions."""
    rec = synth_recording("FT", duration=1.0)
    body = np.array(rec.body2d)
    body[10:15, RIGHT_ELBOW, :2] = 9.0
    body[10:15, RIGHT_ELBOW, 2] = 0.1
    repaired = repair_recording(rec.replace(body2d=body), 0.3)
    np.testing.assert_allclose(repaired.body2d[:, RIGHT_ELBOW, :2],
                               rec.body2d[:, RIGHT_ELBOW, :2])
    np.testing.assert_allclose(repaired.body2d[10:15, RIGHT_ELBOW, 2], 0.3)


def test_repair_recording_required(synth_recording):
    """Only the keypoints a caller depends on must have confident samples."""
    rec = _with_confidence(synth_recording("FT", duration=1.0), LEFT_EAR,
                           0.0)
    with does_not_raise():
        out = repair_recording(rec, 0.3)
    np.testing.assert_array_equal(out.body2d, rec.body2d)

    required = [(Skeleton.B2, BodyJoint.EAR, Side.LEFT)]
    with raises(AllLowConfidenceError):
        repair_recording(rec, 0.3, required)


def test_prepare(synth_recording):
    rec = synth_recording("FT", duration=2.0)
    out = prepare(rec, PreprocessConfig(truncate_range=(0, 60)))
    assert out.n_frames == 60
    np.testing.assert_allclose(_forearm(out), 1.0)
