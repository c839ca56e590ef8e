###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Signal primitives shared by every feature extractor."""
from dataclasses import dataclass
import logging

import numpy as np
from scipy.signal import find_peaks

from neuroexam.datastructures.pose import TimeSeries1D
from neuroexam.errors import DegenerateError, NoCyclesError

LOGGER = logging.getLogger(__name__)

# Relative spread below which a series counts as constant.
CONSTANT_RTOL = 1e-12


def _samples(series):
    return np.asarray(getattr(series, "samples", series), dtype=float)


def asymmetry(fr, fl):
    """
    Normalized right/left difference ``|fr - fl| / (fr + fl)``.

    :param fr: Non-negative right side value.
    :param fl: Non-negative left side value.
    :returns: A value in [0, 1].
    """
    fr, fl = float(fr), float(fl)
    if not (np.isfinite(fr) and np.isfinite(fl)) or fr < 0 or fl < 0:
        msg = "Asymmetry needs finite non-negative values, got ({}, {})." \
              .format(fr, fl)
        LOGGER.error(msg)
        raise ValueError(msg)
    if fr + fl == 0:
        msg = "Asymmetry is undefined when both values are zero."
        LOGGER.error(msg)
        raise ValueError(msg)
    return abs(fr - fl) / (fr + fl)


def is_constant(values):
    values = np.asarray(values, dtype=float)
    scale = max(1.0, float(np.max(np.abs(values))))
    return float(np.ptp(values)) <= CONSTANT_RTOL * scale


def pearson_cc(x1, x2):
    """
    Pearson correlation coefficient of two equal length series.

    :raises DegenerateError: If either series is constant.
    """
    a, b = _samples(x1), _samples(x2)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        msg = "Correlation needs two series of equal length >= 2, got {} " \
              "and {}.".format(a.shape, b.shape)
        LOGGER.error(msg)
        raise ValueError(msg)
    if is_constant(a) or is_constant(b):
        raise DegenerateError("Correlation of a constant series.")

    a = a - a.mean()
    b = b - b.mean()
    cc = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return min(1.0, max(-1.0, cc))


@dataclass(frozen=True)
class CycleSet:
    """
    Alternating extrema of a periodic signal.

    ``extrema`` lists every kept extremum in time order; ``anchors`` are the
    extrema the periods are measured between.
    """

    minima_idx: np.ndarray
    maxima_idx: np.ndarray
    extrema: np.ndarray
    values: np.ndarray
    periods: np.ndarray
    amplitudes: np.ndarray
    anchors: np.ndarray
    fps: float

    @property
    def n_cycles(self):
        return len(self.periods)

    def cycle_bounds(self):
        """(start, end) frame pairs between consecutive anchors."""
        return list(zip(self.anchors[:-1], self.anchors[1:]))


def _alternate(maxima, minima, x):
    events = sorted([(int(i), 1) for i in maxima] +
                    [(int(i), -1) for i in minima])
    kept = []
    for idx, kind in events:
        if kept and kept[-1][1] == kind:
            prev = kept[-1][0]
            if kind * x[idx] > kind * x[prev]:
                kept[-1] = (idx, kind)
            continue
        kept.append((idx, kind))
    return kept


def _refine(kept, reference, radius):
    refined, prev = [], -1
    n = len(reference)
    for idx, kind in kept:
        lo, hi = max(idx - radius, prev + 1), min(idx + radius + 1, n)
        if lo >= hi:
            # The previous extremum took the last sample.
            LOGGER.debug("Dropping extremum %d past the series end.", idx)
            break
        window = kind * reference[lo:hi]
        new = lo + int(np.argmax(window))
        refined.append((new, kind))
        prev = new
    return refined


def find_extrema(series, prominence_frac=0.2, period_from="maxima",
                 reference=None, refine_radius=0):
    """
    Detect alternating local extrema by relative prominence.

    :param series: The (filtered) TimeSeries1D to search.
    :param prominence_frac: Minimum prominence as a fraction of the range.
    :param period_from: Measure periods between 'maxima' or 'minima'.
    :param reference: Optional unfiltered series of the same length. Each
        extremum is moved to the most extreme reference sample within
        ``refine_radius`` frames, and amplitudes are read from it.
    :param refine_radius: Half width of the refinement window in frames.
    :returns: A CycleSet.
    """
    x = _samples(series)
    if len(x) < 3:
        msg = "Extremum detection needs at least 3 samples."
        LOGGER.error(msg)
        raise ValueError(msg)
    if not 0 < prominence_frac < 1:
        msg = "prominence_frac must be in (0, 1), got {}." \
              .format(prominence_frac)
        LOGGER.error(msg)
        raise ValueError(msg)
    if period_from not in ("maxima", "minima"):
        msg = "period_from must be 'maxima' or 'minima'."
        LOGGER.error(msg)
        raise ValueError(msg)

    if is_constant(x):
        raise NoCyclesError("Constant series has no cycles.")

    prominence = prominence_frac * float(np.ptp(x))
    maxima, _ = find_peaks(x, prominence=prominence)
    minima, _ = find_peaks(-x, prominence=prominence)
    kept = _alternate(maxima, minima, x)

    values = x
    if reference is not None and refine_radius > 0:
        values = _samples(reference)
        if values.shape != x.shape:
            raise ValueError("Reference series must match the series.")
        kept = _refine(kept, values, int(refine_radius))

    extrema = np.array([idx for idx, _ in kept], dtype=int)
    kinds = np.array([kind for _, kind in kept], dtype=int)
    maxima_idx = extrema[kinds == 1]
    minima_idx = extrema[kinds == -1]
    anchors = maxima_idx if period_from == "maxima" else minima_idx

    if len(anchors) < 2:
        msg = "Fewer than two {} detected.".format(period_from)
        LOGGER.debug(msg)
        raise NoCyclesError(msg)

    fps = float(getattr(series, "fps", 1.0))
    return CycleSet(
        minima_idx=minima_idx,
        maxima_idx=maxima_idx,
        extrema=extrema,
        values=values[extrema],
        periods=np.diff(anchors) / fps,
        amplitudes=np.abs(np.diff(values[extrema])),
        anchors=anchors,
        fps=fps,
    )


def derivative(series, order=1):
    """
    Time derivative by central differences, one-sided at the edges.

    :param series: A TimeSeries1D of at least 3 samples.
    :param order: 1 or 2; the second derivative applies the operator twice.
    """
    if order not in (1, 2):
        raise ValueError("Derivative order must be 1 or 2.")
    if len(series) < 3:
        msg = "Derivative needs at least 3 samples, got {}." \
              .format(len(series))
        LOGGER.error(msg)
        raise ValueError(msg)

    values = series.samples
    for _ in range(order):
        values = np.gradient(values, 1.0 / series.fps)
    return series.with_samples(values)


def velocity_angle(x, y):
    """
    Direction of motion ``atan2(dy/dt, dx/dt)`` in (-pi, pi].

    Samples where the trajectory is (numerically) at rest get angle 0 and a
    False entry in the returned series' mask.
    """
    if len(x) != len(y):
        raise ValueError("Coordinate series lengths differ.")
    vx = derivative(x).samples
    vy = derivative(y).samples

    speed = np.hypot(vx, vy)
    top = float(np.max(speed))
    valid = speed > 1e-6 * top if top > 0 else np.zeros(len(speed), bool)

    theta = np.arctan2(vy, vx)
    theta[theta <= -np.pi] = np.pi
    theta[~valid] = 0.0
    return TimeSeries1D(theta, x.fps, x.t0, mask=valid)


def _lag_order(max_lag):
    yield 0
    for k in range(1, max_lag + 1):
        yield k
        yield -k


def align_by_lag(a, b, max_lag):
    """
    Find the shift of ``b`` relative to ``a`` with the highest correlation.

    A positive lag ``k`` compares ``a[:n-k]`` with ``b[k:]``. Ties keep the
    smallest absolute lag, preferring positive shifts.

    :returns: (lag, cc) of the best overlap.
    """
    a, b = _samples(a), _samples(b)
    n = len(a)
    if len(b) != n:
        raise ValueError("Aligned series must have equal length.")
    if int(max_lag) != max_lag or max_lag < 0 or not max_lag < n / 2:
        msg = "max_lag must be an integer in [0, {}), got {}." \
              .format(n / 2, max_lag)
        LOGGER.error(msg)
        raise ValueError(msg)

    best_lag, best_cc = None, -np.inf
    for k in _lag_order(int(max_lag)):
        if k >= 0:
            left, right = a[:n - k], b[k:]
        else:
            left, right = a[-k:], b[:n + k]
        try:
            cc = pearson_cc(left, right)
        except (DegenerateError, ValueError):
            continue
        if cc > best_cc + 1e-12:
            best_lag, best_cc = k, cc

    if best_lag is None:
        msg = "Every lag overlap is constant."
        LOGGER.debug(msg)
        raise DegenerateError(msg)
    return best_lag, best_cc


def resample_linear(series, n):
    """
    Linear interpolation onto ``n`` points spanning the same time extent.

    :returns: A TimeSeries1D whose rate keeps the original duration.
    """
    if int(n) != n or n < 2 or len(series) < 2:
        msg = "Resampling needs n >= 2 and at least 2 samples."
        LOGGER.error(msg)
        raise ValueError(msg)

    n = int(n)
    size = len(series)
    if n == size:
        return series.with_samples(series.samples.copy())

    positions = np.linspace(0, size - 1, n)
    values = np.interp(positions, np.arange(size), series.samples)
    fps = (n - 1) / ((size - 1) / series.fps)
    return TimeSeries1D(values, fps, series.t0)
