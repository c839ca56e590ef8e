###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Parameterized synthetic pose recordings.

Each generator builds its motion in a body-centred template where the right
forearm (or, for stand-up-and-walk, the pelvis to neck segment) is one unit
long and +y points up. The template is then scaled and translated into image
coordinates for the 2D groups. Because every feature is computed after
normalizing by that reference length, the configured amplitudes and lengths
are recovered in template units.

All randomness flows from ``numpy.random.default_rng(seed)`` in a fixed draw
order, so equal parameters always give bit-identical recordings.
"""
from collections import OrderedDict
import dataclasses
from dataclasses import dataclass
import logging
import math
from typing import Callable, Tuple

import numpy as np
from scipy.signal import butter, sosfiltfilt

from neuroexam.abstracts.enums import BodyJoint, ExamKind, HandJoint, \
    Label, Side, Skeleton
from neuroexam.datastructures.pose import GROUP_SHAPES, PoseRecording, \
    SkeletonConvention

LOGGER = logging.getLogger(__name__)

CONFIDENCE = 0.95
TREMOR_BAND = (4.0, 8.0)
# Seated lead-in and standing tail of a stand-up-and-walk recording.
SAW_LEAD = 0.5
SAW_TAIL = 0.5
LEG_LENGTH = 1.8
NOMINAL_ROM = 0.9

_R, _L, _C = Side.RIGHT, Side.LEFT, Side.CENTER
# Template x direction of each side; the right limbs sit at negative x.
_XSIGN = {_R: -1.0, _L: 1.0}


@dataclass(frozen=True)
class SynthParams:
    """
    Settings of one synthetic recording.

    Frequencies are in Hz, durations in seconds and lengths in template
    units. Phase offsets are in radians and apply to the left side relative
    to the right. The gait fields only affect stand-up-and-walk recordings,
    whose duration follows from the walking layout instead of ``duration``.
    """

    test_kind: ExamKind = ExamKind.FT
    fps: float = 60.0
    duration: float = 10.0
    freq_right: float = 2.0
    freq_left: float = 2.0
    amplitude_right: float = 0.5
    amplitude_left: float = 0.5
    tremor_sigma_right: float = 0.0
    tremor_sigma_left: float = 0.0
    phase_offset: float = 0.0
    irregularity: float = 0.0
    arm_sway: float = 0.0
    step_length: float = 0.6
    step_time: float = 0.55
    n_passes: int = 4
    pass_steps: int = 8
    su_duration: float = 1.5
    su_rise: float = 1.2
    tu_duration: float = 1.2
    knee_rom_right: float = 0.9
    knee_rom_left: float = 0.9
    knee_extended: float = 2.9
    stance_width: float = 0.1
    noise_sigma: float = 0.0
    scale: float = 0.2
    translation: Tuple[float, float] = (0.5, 0.5)
    seed: int = 0
    label: Label = Label.UNLABELED
    subject_id: str = ""
    device: str = "synthetic"
    recording_id: str = ""

    def __post_init__(self):
        if not isinstance(self.test_kind, ExamKind):
            object.__setattr__(self, "test_kind",
                               ExamKind.from_str(self.test_kind))
        if not isinstance(self.label, Label):
            object.__setattr__(self, "label", Label.from_str(self.label))
        object.__setattr__(self, "translation",
                           tuple(float(v) for v in self.translation))

        checks = [
            ("fps", self.fps > 0),
            ("duration", self.duration > 0),
            ("freq_right", self.freq_right > 0),
            ("freq_left", self.freq_left > 0),
            ("amplitude_right", self.amplitude_right >= 0),
            ("amplitude_left", self.amplitude_left >= 0),
            ("tremor_sigma_right", self.tremor_sigma_right >= 0),
            ("tremor_sigma_left", self.tremor_sigma_left >= 0),
            ("irregularity", 0 <= self.irregularity < 1),
            ("arm_sway", self.arm_sway >= 0),
            ("step_time", self.step_time > 0),
            ("n_passes", int(self.n_passes) == self.n_passes
             and self.n_passes >= 1),
            ("pass_steps", int(self.pass_steps) == self.pass_steps
             and self.pass_steps >= 2),
            ("su_duration", self.su_duration >= 0),
            ("su_rise", self.su_rise > 0),
            ("tu_duration", self.tu_duration > 0),
            ("knee_rom_right", self.knee_rom_right >= 0),
            ("knee_rom_left", self.knee_rom_left >= 0),
            ("knee_extended", 0 < self.knee_extended <= math.pi),
            ("stance_width", self.stance_width >= 0),
            ("step_length", self.step_length > self.stance_width),
            ("noise_sigma", self.noise_sigma >= 0),
            ("scale", self.scale > 0),
            ("translation", len(self.translation) == 2),
        ]
        for name, valid in checks:
            if not valid:
                msg = "Synthetic parameter '{}' has an invalid value {!r}." \
                      .format(name, getattr(self, name))
                LOGGER.error(msg)
                raise ValueError(msg)

        tremor = max(self.tremor_sigma_right, self.tremor_sigma_left)
        if tremor > 0 and self.fps <= 2 * TREMOR_BAND[1]:
            msg = "Tremor needs a frame rate above {} fps, got {}." \
                  .format(2 * TREMOR_BAND[1], self.fps)
            LOGGER.error(msg)
            raise ValueError(msg)

    def freq(self, side):
        return self.freq_right if side is _R else self.freq_left

    def amplitude(self, side):
        return self.amplitude_right if side is _R else self.amplitude_left

    def tremor_sigma(self, side):
        return self.tremor_sigma_right if side is _R \
            else self.tremor_sigma_left

    def knee_rom(self, side):
        return self.knee_rom_right if side is _R else self.knee_rom_left

    def offset(self, side):
        return 0.0 if side is _R else self.phase_offset

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        out = OrderedDict()
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if isinstance(value, (ExamKind, Label)):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            out[field.name] = value
        return out

    @classmethod
    def from_dict(cls, data):
        names = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            msg = "Unrecognized synthetic parameter(s): {}." \
                  .format(", ".join(unknown))
            LOGGER.error(msg)
            raise ValueError(msg)
        return cls(**data)


# Right-hand keypoints relative to the wrist, in HandJoint order. The left
# hand mirrors x.
_HAND_OFFSETS = np.array([
    (0.00, 0.00),
    (-0.12, 0.12), (-0.16, 0.25), (-0.18, 0.45),
    (-0.05, 0.30), (-0.05, 0.45), (-0.05, 0.60),
    (0.02, 0.30), (0.02, 0.47), (0.02, 0.62),
    (0.08, 0.28), (0.08, 0.43), (0.08, 0.57),
    (0.14, 0.25), (0.14, 0.36), (0.14, 0.47),
    (-0.17, 0.35), (-0.05, 0.53), (0.02, 0.55), (0.08, 0.50), (0.14, 0.42),
])

# Right side and centre joints of a standing body facing the camera.
_UPPER_BODY = {
    (BodyJoint.NOSE, _C): (0.0, 0.55),
    (BodyJoint.NECK, _C): (0.0, 0.3),
    (BodyJoint.PELVIS, _C): (0.0, -1.5),
    (BodyJoint.SHOULDER, _R): (-0.7, 0.3),
    (BodyJoint.ELBOW, _R): (-0.9, -0.6),
    (BodyJoint.WRIST, _R): (-0.9, 0.4),
    (BodyJoint.HIP, _R): (-0.25, -1.5),
    (BodyJoint.KNEE, _R): (-0.25, -2.3),
    (BodyJoint.FOOT, _R): (-0.25, -3.1),
    (BodyJoint.EYE, _R): (-0.06, 0.62),
    (BodyJoint.EAR, _R): (-0.12, 0.58),
    (BodyJoint.BIG_TOE, _R): (-0.3, -3.2),
    (BodyJoint.SMALL_TOE, _R): (-0.2, -3.2),
    (BodyJoint.HEEL, _R): (-0.25, -3.15),
}


def _times(p):
    n = int(round(p.duration * p.fps))
    if n < 3:
        msg = "A synthetic recording needs at least 3 frames, got {}." \
              .format(n)
        LOGGER.error(msg)
        raise ValueError(msg)
    return np.arange(n) / p.fps


def _static_body(n):
    """(frames, 25, 2) template of the upper-limb exams' resting body."""
    frame = np.zeros((SkeletonConvention.size(Skeleton.B2), 2))
    for (joint, side), (x, y) in _UPPER_BODY.items():
        frame[SkeletonConvention.slot(Skeleton.B2, joint, side)] = (x, y)
        if side is _R:
            left = SkeletonConvention.slot(Skeleton.B2, joint, _L)
            frame[left] = (-x, y)
    return np.repeat(frame[None], n, axis=0)


def _set_joint(body, joint, side, xy):
    body[:, SkeletonConvention.slot(Skeleton.B2, joint, side)] = xy


def _hand(wrist, side):
    """Rigid hand anchored at per-frame wrist positions."""
    offsets = _HAND_OFFSETS * np.array([-_XSIGN[side], 1.0])
    return wrist[:, None, :] + offsets[None, :, :]


def _phase(times, freq, offset, irregularity, rng):
    """
    Cycle fraction in [0, 1) and amplitude scale of every sample.

    With irregularity each cycle draws its own period and amplitude scale
    within ``1 +/- irregularity``. Cycles start where the waveforms are zero,
    so the scale changes without a jump.
    """
    lead = np.mod(offset / (2 * math.pi), 1.0)
    if irregularity == 0:
        return np.mod(freq * times + lead, 1.0), np.ones(len(times))

    period = 1.0 / freq
    starts, periods, scales = [], [], []
    start, end = -lead * period, float(times[-1])
    while start <= end:
        length = period * (1 + irregularity * rng.uniform(-1, 1))
        scale = 1 + irregularity * rng.uniform(-1, 1)
        starts.append(start)
        periods.append(length)
        scales.append(scale)
        start += length

    starts, periods = np.array(starts), np.array(periods)
    idx = np.searchsorted(starts, times, side="right") - 1
    frac = np.clip((times - starts[idx]) / periods[idx], 0.0, 1.0 - 1e-12)
    return frac, np.array(scales)[idx]


def _sway(times, amount, freq=0.4):
    """Slow drift of a limb, zero at rest and ``amount`` at most."""
    dx = amount * (1 + np.sin(2 * math.pi * freq * times)) / 2
    dy = amount * (1 - np.cos(2 * math.pi * 0.75 * freq * times)) / 4
    return np.column_stack([dx, dy])


def _tremor(n, fps, sigma, rng):
    """Band-limited planar jitter with standard deviation ``sigma``."""
    sos = butter(4, TREMOR_BAND, btype="bandpass", fs=fps, output="sos")
    white = rng.standard_normal((n, 2))
    padlen = min(3 * (2 * len(sos) + 1), n - 1)
    band = sosfiltfilt(sos, white, axis=0, padlen=padlen)
    std = band.std(axis=0)
    return sigma * band / np.where(std > 0, std, 1.0)


def _add_tremor(p, hands, n, rng):
    for side in (_R, _L):
        sigma = p.tremor_sigma(side)
        if sigma > 0:
            hands[side] = hands[side] + _tremor(n, p.fps, sigma, rng)[:, None]
    return hands


def _image(template, p):
    return np.asarray(p.translation) + p.scale * template


def _finish(p, kind, body2d, hands=None, body3d=None):
    """Scale, add noise and confidences, and validate the recording."""
    rng = np.random.default_rng([p.seed, 1])
    templates = OrderedDict([("body2d", body2d)])
    if hands is not None:
        templates["hand2d_left"] = hands[_L]
        templates["hand2d_right"] = hands[_R]

    groups = {}
    for group in GROUP_SHAPES:
        if group in templates:
            xy = _image(templates[group], p)
            if p.noise_sigma > 0:
                xy = xy + rng.normal(0.0, p.noise_sigma * p.scale, xy.shape)
            conf = np.full(xy.shape[:2] + (1,), CONFIDENCE)
            groups[group] = np.concatenate([xy, conf], axis=2)
        elif group == "body3d" and body3d is not None:
            xyz = body3d
            if p.noise_sigma > 0:
                xyz = xyz + rng.normal(0.0, p.noise_sigma, xyz.shape)
            groups[group] = xyz

    recording_id = p.recording_id or "synth_{}_{}".format(kind.value, p.seed)
    LOGGER.debug("Generated '%s' with %d frames.", recording_id,
                 len(body2d))
    return PoseRecording(fps=p.fps, test_kind=kind, label=p.label,
                         subject_id=p.subject_id, device=p.device,
                         recording_id=recording_id, **groups)


def gen_ft(p):
    """
    Finger tapping recording.

    The thumb and index tips of each hand open to
    ``d(t) = A * (1 - cos(2 pi f t)) / 2`` around a pinch point above a
    static wrist. With ``arm_sway`` the left arm drifts slowly.
    """
    times = _times(p)
    n = len(times)
    rng = np.random.default_rng(p.seed)
    body = _static_body(n)
    hands = {}
    for side in (_R, _L):
        sign = _XSIGN[side]
        frac, scale = _phase(times, p.freq(side), p.offset(side),
                             p.irregularity, rng)
        d = p.amplitude(side) * scale * (1 - np.cos(2 * math.pi * frac)) / 2

        elbow = np.tile((0.9 * sign, -1.2), (n, 1))
        wrist = np.tile((0.9 * sign, -0.2), (n, 1))
        if side is _L and p.arm_sway > 0:
            drift = _sway(times, p.arm_sway)
            elbow, wrist = elbow + drift, wrist + drift

        hand = _hand(wrist, side)
        pinch = wrist + (0.0, 0.6)
        opening = np.column_stack([sign * d / 2, np.zeros(n)])
        hand[:, HandJoint.THUMB_TIP] = pinch + opening
        hand[:, HandJoint.INDEX_TIP] = pinch - opening
        hand[:, HandJoint.THUMB_IP] = (hand[:, HandJoint.THUMB_MID] +
                                       hand[:, HandJoint.THUMB_TIP]) / 2
        hand[:, HandJoint.INDEX_DIP] = (hand[:, HandJoint.INDEX_MID] +
                                        hand[:, HandJoint.INDEX_TIP]) / 2
        hands[side] = hand

        _set_joint(body, BodyJoint.ELBOW, side, elbow)
        _set_joint(body, BodyJoint.WRIST, side, wrist)

    hands = _add_tremor(p, hands, n, rng)
    return _finish(p, ExamKind.FT, body, hands)


def gen_ftf(p):
    """
    Finger to finger recording.

    The index fingers' middle joints trace mirrored parabolic arcs: they
    meet at the chest and move out and up to a half distance of the side's
    amplitude. ``tremor_sigma`` adds 4-8 Hz jitter to a whole hand.
    """
    times = _times(p)
    n = len(times)
    rng = np.random.default_rng(p.seed)
    body = _static_body(n)
    hands = {}
    for side in (_R, _L):
        frac, scale = _phase(times, p.freq(side), p.offset(side),
                             p.irregularity, rng)
        reach = p.amplitude(side)
        u = (1 - np.cos(2 * math.pi * frac)) / 2
        h = reach * scale * u
        lift = 0.8 * h ** 2 / reach if reach > 0 else np.zeros(n)
        finger = np.column_stack([_XSIGN[side] * h, lift])

        wrist = finger - _HAND_OFFSETS[HandJoint.INDEX_MID] * \
            np.array([-_XSIGN[side], 1.0])
        hands[side] = _hand(wrist, side)
        _set_joint(body, BodyJoint.WRIST, side, wrist)
        _set_joint(body, BodyJoint.ELBOW, side, wrist - (0.0, 1.0))

    hands = _add_tremor(p, hands, n, rng)
    return _finish(p, ExamKind.FTF, body, hands)


def gen_fr(p):
    """
    Forearm roll recording.

    Each forearm swings about a static elbow so that the wrist height is a
    sinusoid of peak to peak amplitude A; the left side runs in antiphase.
    With ``arm_sway`` the left elbow drifts slowly.
    """
    if max(p.amplitude_right, p.amplitude_left) * \
            (1 + p.irregularity) > 2:
        msg = "Forearm roll amplitude cannot exceed twice the forearm " \
              "length."
        LOGGER.error(msg)
        raise ValueError(msg)

    times = _times(p)
    n = len(times)
    rng = np.random.default_rng(p.seed)
    body = _static_body(n)
    hands = {}
    for side in (_R, _L):
        sign = _XSIGN[side]
        offset = p.offset(side) + (math.pi if side is _L else 0.0)
        frac, scale = _phase(times, p.freq(side), offset, p.irregularity,
                             rng)
        lift = p.amplitude(side) * scale / 2 * np.sin(2 * math.pi * frac)
        angle = np.arcsin(np.clip(lift, -1.0, 1.0))

        elbow = np.tile((1.2 * sign, -0.6), (n, 1))
        if side is _L and p.arm_sway > 0:
            elbow = elbow + _sway(times, p.arm_sway)
        wrist = elbow + np.column_stack([-sign * np.cos(angle),
                                         np.sin(angle)])
        hands[side] = _hand(wrist, side)
        _set_joint(body, BodyJoint.ELBOW, side, elbow)
        _set_joint(body, BodyJoint.WRIST, side, wrist)

    hands = _add_tremor(p, hands, n, rng)
    return _finish(p, ExamKind.FR, body, hands)


@dataclass(frozen=True)
class _Pass:
    start: float
    step_time: float
    steps: int
    direction: int

    @property
    def end(self):
        return self.start + self.steps * self.step_time


def _gait_shape(p, side):
    """(step length, stride exponent, knee rom) of one leg."""
    rom = p.knee_rom(side)
    ratio = min(rom / NOMINAL_ROM, 1.0)
    length = p.step_length * (1 - 0.3 * (1 - ratio))
    if length <= p.stance_width:
        msg = "The {} step length {} does not exceed the stance width." \
              .format(side.value, length)
        LOGGER.error(msg)
        raise ValueError(msg)
    return length, 1.0 / min(max(ratio, 0.25), 1.0), rom


def _wrapped_bump(phase, centre, width):
    d = np.mod(phase - centre + 0.5, 1.0) - 0.5
    return np.exp(-d ** 2 / (2 * width ** 2))


def _knee_flexion(phase, rom):
    """Flexion over one gait cycle: a loading bump and the swing peak."""
    ratio = min(rom / NOMINAL_ROM, 1.0)
    loading = 0.3 * rom * max(0.0, 2 * ratio - 1)
    return loading * _wrapped_bump(phase, 0.15, 0.05) + \
        rom * _wrapped_bump(phase, 0.70, 0.06 / max(ratio, 0.25))


def _saw_layout(p, rng):
    """Walking passes and the total duration of the recording."""
    seated = SAW_LEAD if p.su_duration > 0 else 0.0
    t = seated + p.su_duration
    passes, turns = [], []
    for k in range(int(p.n_passes)):
        step_time = p.step_time * (1 + p.irregularity * rng.uniform(-1, 1))
        turn = p.tu_duration * (1 + p.irregularity * rng.uniform(-1, 1))
        passes.append(_Pass(t, step_time, int(p.pass_steps),
                            1 if k % 2 == 0 else -1))
        t = passes[-1].end
        if k + 1 < p.n_passes:
            turns.append((t, t + turn))
            t += turn
    return passes, turns, t + SAW_TAIL


def _knee(hip, foot, theta):
    """
    Knee position that bends the leg to ``theta`` with a unit thigh.

    The shank takes whatever length closes the hip, knee, foot triangle and
    the knee points forward.
    """
    limb = foot - hip
    reach = np.linalg.norm(limb, axis=1)
    along = limb / reach[:, None]
    forward = np.array([1.0, 0.0, 0.0]) - along[:, :1] * along
    forward /= np.linalg.norm(forward, axis=1)[:, None]

    shank = np.cos(theta) + np.sqrt(reach ** 2 - np.sin(theta) ** 2)
    cos_hip = np.clip((1 + reach ** 2 - shank ** 2) / (2 * reach), -1, 1)
    sin_hip = np.sqrt(1 - cos_hip ** 2)
    return hip + cos_hip[:, None] * along + sin_hip[:, None] * forward


def gen_saw(p):
    """
    Stand-up-and-walk recording.

    A seated lead-in, an optional linear stand-up of ``su_duration``, then
    ``n_passes`` constant speed passes of alternating direction separated by
    stationary turns of ``tu_duration``. In the pelvis-centred 3D body the
    feet alternate so their distance peaks at the side's step length and
    bottoms out at the stance width, and each knee flexes within its range
    of motion half a stride after the other.
    """
    rng = np.random.default_rng(p.seed)
    passes, turns, total = _saw_layout(p, rng)
    times = np.arange(int(round(total * p.fps))) / p.fps
    n = len(times)

    shape = {side: _gait_shape(p, side) for side in (_R, _L)}
    width = p.stance_width
    reach = {side: math.sqrt(shape[side][0] ** 2 - width ** 2)
             for side in (_R, _L)}

    pelvis_x = np.zeros(n)
    heading = np.zeros(n)
    stride = np.zeros(n)
    flexion = {_R: np.zeros(n), _L: np.zeros(n)}
    x = 0.0
    for k, walk in enumerate(passes):
        inside = (times >= walk.start) & (times < walk.end)
        t_in = times[inside] - walk.start
        speed = (reach[_R] + reach[_L]) / 2 / walk.step_time
        pelvis_x[inside] = x + walk.direction * speed * t_in
        x += walk.direction * speed * (walk.end - walk.start)
        pelvis_x[times >= walk.end] = x
        heading[times >= walk.start] = k * math.pi

        step = np.minimum(np.floor(t_in / walk.step_time), walk.steps - 1)
        tau = t_in / walk.step_time - step
        right_ahead = step % 2 == 0
        wave = np.abs(np.sin(math.pi * tau))
        stride[inside] = np.where(
            right_ahead, reach[_R] * wave ** shape[_R][1],
            -reach[_L] * wave ** shape[_L][1])

        phase = t_in / (2 * walk.step_time)
        flexion[_R][inside] = _knee_flexion(phase, shape[_R][2])
        flexion[_L][inside] = _knee_flexion(phase + 0.5, shape[_L][2])

    for k, (start, end) in enumerate(turns):
        inside = (times >= start) & (times < end)
        ramp = (times[inside] - start) / (end - start)
        heading[inside] = math.pi * (k + (1 - np.cos(math.pi * ramp)) / 2)

    pelvis_y = np.zeros(n)
    if p.su_duration > 0:
        rise = np.clip((times - SAW_LEAD) / p.su_duration, 0.0, 1.0)
        pelvis_y = p.su_rise * (rise - 1)

    local = _saw_local(p, stride, flexion, width, n)
    cos_h, sin_h = np.cos(heading)[:, None], np.sin(heading)[:, None]
    world = {}
    for key, xyz in local.items():
        world[key] = np.column_stack([
            cos_h[:, 0] * xyz[:, 0] + sin_h[:, 0] * xyz[:, 2],
            xyz[:, 1],
            -sin_h[:, 0] * xyz[:, 0] + cos_h[:, 0] * xyz[:, 2],
        ])

    body3d = np.zeros((n, SkeletonConvention.size(Skeleton.B3), 3))
    for slot, key in enumerate(SkeletonConvention.slots(Skeleton.B3)):
        body3d[:, slot] = world[key]

    pelvis = np.column_stack([pelvis_x, pelvis_y])
    body2d = np.zeros((n, SkeletonConvention.size(Skeleton.B2), 2))
    for slot, key in enumerate(SkeletonConvention.slots(Skeleton.B2)):
        body2d[:, slot] = pelvis + world[key][:, :2]

    return _finish(p, ExamKind.SAW, body2d, body3d=body3d)


def _saw_local(p, stride, flexion, width, n):
    """Pelvis-centred positions of every body joint, +z on the right."""
    def fixed(x, y, z):
        return np.tile((x, y, z), (n, 1)).astype(float)

    local = {
        (BodyJoint.PELVIS, _C): fixed(0.0, 0.0, 0.0),
        (BodyJoint.SPINE, _C): fixed(0.0, 0.5, 0.0),
        (BodyJoint.NECK, _C): fixed(0.0, 1.0, 0.0),
        (BodyJoint.NOSE, _C): fixed(0.1, 1.2, 0.0),
        (BodyJoint.HEAD, _C): fixed(0.0, 1.35, 0.0),
    }
    for side, z in ((_R, 1.0), (_L, -1.0)):
        half = z * width / 2
        foot_x = stride / 2 if side is _R else -stride / 2
        hip = fixed(0.0, 0.0, half)
        foot = np.column_stack([foot_x, np.full(n, -LEG_LENGTH),
                                np.full(n, half)])
        theta = p.knee_extended - flexion[side]
        local.update({
            (BodyJoint.HIP, side): hip,
            (BodyJoint.FOOT, side): foot,
            (BodyJoint.KNEE, side): _knee(hip, foot, theta),
            (BodyJoint.SHOULDER, side): fixed(0.0, 0.95, 0.35 * z),
            (BodyJoint.ELBOW, side): fixed(0.0, 0.5, 0.4 * z),
            (BodyJoint.WRIST, side): fixed(0.05, 0.1, 0.4 * z),
            (BodyJoint.EYE, side): fixed(0.12, 1.27, 0.04 * z),
            (BodyJoint.EAR, side): fixed(0.0, 1.25, 0.08 * z),
            (BodyJoint.BIG_TOE, side): foot + (0.2, -0.05, 0.03 * z),
            (BodyJoint.SMALL_TOE, side): foot + (0.15, -0.05, 0.07 * z),
            (BodyJoint.HEEL, side): foot + (-0.07, -0.03, 0.0),
        })
    return local


GENERATORS = {
    ExamKind.FT: gen_ft,
    ExamKind.FTF: gen_ftf,
    ExamKind.FR: gen_fr,
    ExamKind.SAW: gen_saw,
}


def generate(p):
    """Dispatch to the generator of ``p.test_kind``."""
    return GENERATORS[p.test_kind](p)


@dataclass(frozen=True)
class ImpairmentProfile:
    """A named change applied to the abnormal recordings of a cohort."""

    name: str
    test_kind: ExamKind
    description: str
    impair: Callable

    def apply(self, p):
        return self.impair(p).replace(label=Label.ABNORMAL)


def _scaled(p, **factors):
    return p.replace(**{name: getattr(p, name) * factor
                        for name, factor in factors.items()})


PROFILES = OrderedDict((profile.name, profile) for profile in (
    ImpairmentProfile(
        "finger_tapping", ExamKind.FT,
        "Rubber band: slower, smaller and irregular taps with arm sway.",
        lambda p: _scaled(p, freq_right=0.6, freq_left=0.75,
                          amplitude_right=0.6, amplitude_left=0.75)
        .replace(irregularity=0.15, arm_sway=0.15)),
    ImpairmentProfile(
        "finger_tapping_left", ExamKind.FT,
        "Left hand only: half the tapping rate and amplitude.",
        lambda p: _scaled(p, freq_left=0.5, amplitude_left=0.5)),
    ImpairmentProfile(
        "finger_to_finger", ExamKind.FTF,
        "Tremor on both hands, stronger on the left, with slower and "
        "irregular cycles.",
        lambda p: _scaled(p, freq_right=0.6, freq_left=0.6)
        .replace(irregularity=0.15, tremor_sigma_right=0.1,
                 tremor_sigma_left=0.2)),
    ImpairmentProfile(
        "forearm_roll", ExamKind.FR,
        "Wrist brace: slower, smaller and irregular rolls with elbow sway.",
        lambda p: _scaled(p, freq_right=0.6, freq_left=0.8,
                          amplitude_right=0.6, amplitude_left=0.8)
        .replace(irregularity=0.15, arm_sway=0.15)),
    ImpairmentProfile(
        "stand_up_walk", ExamKind.SAW,
        "Right knee brace: halved right range of motion, irregular passes "
        "and turns, slower stand-up and a wider stance.",
        lambda p: _scaled(p, knee_rom_right=0.5, su_duration=1.25,
                          stance_width=2.0).replace(irregularity=0.15)),
))

DEFAULT_PROFILES = {
    ExamKind.FT: "finger_tapping",
    ExamKind.FTF: "finger_to_finger",
    ExamKind.FR: "forearm_roll",
    ExamKind.SAW: "stand_up_walk",
}

DEVICES = ("phone", "tablet")

# Parameters perturbed by the recording device.
_JITTERED = {
    ExamKind.FT: ("freq_right", "freq_left", "amplitude_right",
                  "amplitude_left"),
    ExamKind.FTF: ("freq_right", "freq_left", "amplitude_right",
                   "amplitude_left"),
    ExamKind.FR: ("freq_right", "freq_left", "amplitude_right",
                  "amplitude_left"),
    ExamKind.SAW: ("step_length", "step_time", "su_duration",
                   "knee_rom_right", "knee_rom_left"),
}


def get_profile(name):
    if isinstance(name, ImpairmentProfile):
        return name
    if name not in PROFILES:
        msg = "Impairment profile '{}' not found. Specify one of {}." \
              .format(name, ", ".join(PROFILES))
        LOGGER.error(msg)
        raise ValueError(msg)
    return PROFILES[name]


def _subject_params(base, rng):
    """Per-subject normal parameters drawn around plausible ranges."""
    kind = base.test_kind
    if kind is ExamKind.SAW:
        rom = rng.uniform(0.8, 1.0)
        return base.replace(step_length=rng.uniform(0.55, 0.7),
                            step_time=rng.uniform(0.5, 0.6),
                            knee_rom_right=rom, knee_rom_left=rom,
                            su_duration=rng.uniform(1.2, 1.6))

    freq_range, amp_range = {
        ExamKind.FT: ((1.5, 2.5), (0.6, 1.0)),
        ExamKind.FTF: ((0.6, 1.0), (0.8, 1.2)),
        ExamKind.FR: ((1.0, 1.8), (0.4, 0.8)),
    }[kind]
    freq, amp = rng.uniform(*freq_range), rng.uniform(*amp_range)
    if kind is ExamKind.FTF:
        return base.replace(freq_right=freq, freq_left=freq,
                            amplitude_right=amp, amplitude_left=amp)
    lean = rng.uniform(-0.03, 0.03, size=2)
    return base.replace(freq_right=freq, freq_left=freq * (1 + lean[0]),
                        amplitude_right=amp,
                        amplitude_left=amp * (1 + lean[1]))


def _jitter(p, rng, device_noise):
    factors = 1 + device_noise * rng.standard_normal(
        len(_JITTERED[p.test_kind]))
    return p.replace(**{name: getattr(p, name) * float(factor)
                        for name, factor in zip(_JITTERED[p.test_kind],
                                                factors)})


def gen_cohort(n_subjects, profile=None, seed=0, test_kind=None,
               device_noise=0.01, base=None):
    """
    Simulated study of ``n_subjects`` subjects.

    Every subject performs the exam normally and with the impairment, each
    captured on two devices. The device perturbs the subject's parameters by
    a relative ``device_noise``; both captures of one performance share
    their random cycle and noise draws.

    :param n_subjects: Number of subjects, at least 1.
    :param profile: ImpairmentProfile or its name; defaults to the profile
        of ``test_kind``.
    :param seed: Cohort seed.
    :param test_kind: Exam kind; defaults to the profile's.
    :param device_noise: Relative parameter perturbation per device.
    :param base: SynthParams holding the fixed settings of every recording.
    :returns: List of PoseRecording ordered by subject, then normal phone,
        normal tablet, abnormal phone and abnormal tablet.
    """
    if int(n_subjects) != n_subjects or n_subjects < 1:
        raise ValueError("A cohort needs at least one subject.")
    if device_noise < 0:
        raise ValueError("device_noise must not be negative.")
    if profile is None and test_kind is None:
        raise ValueError("Give an impairment profile or an exam kind.")

    if test_kind is not None and not isinstance(test_kind, ExamKind):
        test_kind = ExamKind.from_str(test_kind)
    profile = get_profile(profile if profile is not None
                          else DEFAULT_PROFILES[test_kind])
    if test_kind is not None and test_kind is not profile.test_kind:
        msg = "Profile '{}' is for {} exams, not {}.".format(
            profile.name, profile.test_kind.value, test_kind.value)
        LOGGER.error(msg)
        raise ValueError(msg)

    kind = profile.test_kind
    base = (base or SynthParams()).replace(test_kind=kind)
    rng = np.random.default_rng(seed)
    device_rng = np.random.default_rng([seed, 7])

    recordings = []
    for i in range(int(n_subjects)):
        subject = "S{:02d}".format(i + 1)
        normal = _subject_params(base, rng).replace(
            subject_id=subject, label=Label.NORMAL)
        seeds = rng.integers(0, 2 ** 31 - 1, size=2)
        performances = (normal.replace(seed=int(seeds[0])),
                        profile.apply(normal).replace(seed=int(seeds[1])))
        for p in performances:
            for device in DEVICES:
                captured = _jitter(p, device_rng, device_noise).replace(
                    device=device,
                    recording_id="{}_{}_{}_{}".format(
                        subject, kind.value, p.label.value, device))
                recordings.append(generate(captured))

    LOGGER.info("Generated a %s cohort of %d subject(s) with profile '%s'.",
                kind.value, n_subjects, profile.name)
    return recordings
