"""Deterministic synthetic skeleton streams for the interaction gestures.

Stands in for a depth camera: every gesture is an analytic joint trajectory
superimposed on a standing base pose (y-down camera coordinates, subject
about 2.5 m from the camera).  Activities get a 0.5 s lead-in ramp from the
base pose into their characteristic motion so that live recordings that
start a fraction of a second early or late still look like training data.

Per-kind characteristic predicates (noise-free, active phase = after the
lead-in; all margins >= 0.15 m so they survive jitter up to 0.02 m):

- idle:               both wrists hang below the torso
- raise_left_hand:    left wrist ends above the torso, right stays down
- lower_left_hand:    left wrist ends below the torso
- wave_right_hand:    right wrist above the right shoulder, oscillating in x
- stretch_right_hand: right wrist pushed >= 0.4 m toward the camera at
                      shoulder height
- salute:             right wrist held next to the head
- lift_right_arm:     right wrist held high above the head
- wave_forwards:      right wrist at shoulder height, oscillating in depth
- wave_backwards:     right wrist above the torso, oscillating vertically
- draw_circle:        right wrist traces a circle in the x-y plane
- wave_arms_around:   marching: both wrists swing in depth below the torso,
                      knees alternately lift

Only raise/lower_left_hand ever put the left wrist above the torso, keeping
the eight activities invisible to the attention switch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, TextIO

import numpy as np

from hri_sim.skeleton import (
    DEFAULT_FRAME_RATE,
    FeatureSequence,
    FrameWindow,
    JointId,
    SkeletonFrame,
    window_to_features,
)


class GestureError(ValueError):
    """Invalid synthesis spec or scenario script."""


class GestureKind(Enum):
    # The first eight are the activity classes, in class-index order.
    WAVE_RIGHT_HAND = "wave_right_hand"
    STRETCH_RIGHT_HAND = "stretch_right_hand"
    SALUTE = "salute"
    LIFT_RIGHT_ARM = "lift_right_arm"
    WAVE_FORWARDS = "wave_forwards"
    WAVE_BACKWARDS = "wave_backwards"
    DRAW_CIRCLE = "draw_circle"
    WAVE_ARMS_AROUND = "wave_arms_around"
    # Switch gestures and the filler pose.
    RAISE_LEFT_HAND = "raise_left_hand"
    LOWER_LEFT_HAND = "lower_left_hand"
    IDLE = "idle"


ACTIVITY_KINDS: tuple[GestureKind, ...] = tuple(GestureKind)[:8]
NUM_ACTIVITY_CLASSES = len(ACTIVITY_KINDS)

ACTIVITY_DURATION = 3.5  # seconds, matches the recognition window
LEAD_IN = 0.5  # seconds ramping from base pose into the activity

DEFAULT_DURATIONS: dict[GestureKind, float] = {
    **{k: ACTIVITY_DURATION for k in ACTIVITY_KINDS},
    GestureKind.RAISE_LEFT_HAND: 1.0,
    GestureKind.LOWER_LEFT_HAND: 0.3,
    GestureKind.IDLE: 1.0,
}

_Z = 2.5  # base subject depth

BASE_POSE = np.array(
    [
        [0.00, -0.62, _Z],  # head
        [0.00, -0.44, _Z],  # neck
        [0.00, 0.00, _Z],  # torso
        [0.20, -0.40, _Z],  # left shoulder
        [0.27, -0.10, _Z],  # left elbow
        [0.32, 0.30, _Z],  # left wrist
        [0.11, 0.42, _Z],  # left hip
        [0.12, 0.85, _Z],  # left knee
        [0.13, 1.27, _Z],  # left ankle
        [-0.20, -0.40, _Z],  # right shoulder
        [-0.27, -0.10, _Z],  # right elbow
        [-0.32, 0.30, _Z],  # right wrist
        [-0.11, 0.42, _Z],  # right hip
        [-0.12, 0.85, _Z],  # right knee
        [-0.13, 1.27, _Z],  # right ankle
    ],
    dtype=np.float64,
)

RAISED_LEFT_WRIST = np.array([0.25, -0.55, 2.45])


def _ramp(t: float, span: float) -> float:
    """Smooth 0..1 ramp over ``span`` seconds (cosine ease)."""
    if t >= span:
        return 1.0
    return 0.5 * (1.0 - math.cos(math.pi * t / span))


def _arm_pose(pose: np.ndarray, shoulder: JointId, elbow: JointId, wrist: JointId,
              wrist_target: np.ndarray) -> None:
    """Place a wrist and drag its elbow along (slightly bent arm)."""
    pose[wrist] = wrist_target
    pose[elbow] = pose[shoulder] + 0.55 * (wrist_target - pose[shoulder])


def _right_arm(pose: np.ndarray, target: np.ndarray) -> None:
    _arm_pose(pose, JointId.RIGHT_SHOULDER, JointId.RIGHT_ELBOW, JointId.RIGHT_WRIST, target)


def _left_arm(pose: np.ndarray, target: np.ndarray) -> None:
    _arm_pose(pose, JointId.LEFT_SHOULDER, JointId.LEFT_ELBOW, JointId.LEFT_WRIST, target)


def _lerp(a: np.ndarray, b: np.ndarray, r: float) -> np.ndarray:
    return a + (b - a) * r


def _pose_at(kind: GestureKind, t: float, duration: float) -> np.ndarray:
    """Noise-free pose (15,3) of a gesture at local time t (clamped to duration)."""
    t = min(t, duration)
    pose = BASE_POSE.copy()
    base_rw = BASE_POSE[JointId.RIGHT_WRIST]
    base_lw = BASE_POSE[JointId.LEFT_WRIST]

    if kind is GestureKind.IDLE:
        return pose

    if kind is GestureKind.RAISE_LEFT_HAND:
        r = _ramp(t, 0.5)
        _left_arm(pose, _lerp(base_lw, RAISED_LEFT_WRIST, r))
        return pose

    if kind is GestureKind.LOWER_LEFT_HAND:
        r = min(t / 0.2, 1.0)  # linear drop, faster than the raise
        _left_arm(pose, _lerp(RAISED_LEFT_WRIST, base_lw, r))
        return pose

    # Activities: ramp into the ready pose, then the characteristic motion.
    r = _ramp(t, LEAD_IN)
    phase = max(t - LEAD_IN, 0.0)

    if kind is GestureKind.WAVE_RIGHT_HAND:
        ready = np.array([-0.30, -0.62, 2.40])
        target = _lerp(base_rw, ready, r)
        target[0] += r * 0.18 * math.sin(2 * math.pi * 2.0 * phase)
        _right_arm(pose, target)
    elif kind is GestureKind.STRETCH_RIGHT_HAND:
        ready = np.array([-0.22, -0.40, 1.90])
        _right_arm(pose, _lerp(base_rw, ready, r))
    elif kind is GestureKind.SALUTE:
        ready = np.array([-0.08, -0.58, 2.36])
        _right_arm(pose, _lerp(base_rw, ready, r))
    elif kind is GestureKind.LIFT_RIGHT_ARM:
        ready = np.array([-0.18, -0.98, 2.50])
        _right_arm(pose, _lerp(base_rw, ready, r))
    elif kind is GestureKind.WAVE_FORWARDS:
        ready = np.array([-0.25, -0.40, 2.12])
        target = _lerp(base_rw, ready, r)
        target[2] += r * 0.20 * math.sin(2 * math.pi * 1.2 * phase)
        _right_arm(pose, target)
    elif kind is GestureKind.WAVE_BACKWARDS:
        ready = np.array([-0.28, -0.28, 2.34])
        target = _lerp(base_rw, ready, r)
        target[1] += r * 0.16 * math.sin(2 * math.pi * 1.6 * phase)
        _right_arm(pose, target)
    elif kind is GestureKind.DRAW_CIRCLE:
        center = np.array([-0.26, -0.45, 2.34])
        ready = center + np.array([0.20, 0.0, 0.0])
        target = _lerp(base_rw, ready, r)
        angle = 2 * math.pi * 0.8 * phase
        target[0] += r * 0.20 * (math.cos(angle) - 1.0)
        target[1] += r * 0.20 * math.sin(angle)
        _right_arm(pose, target)
    elif kind is GestureKind.WAVE_ARMS_AROUND:
        # March on the spot: low antiphase arm swing in depth plus knee lifts.
        swing = math.sin(2 * math.pi * 1.5 * phase)
        left_ready = np.array([0.30, 0.20, _Z])
        right_ready = np.array([-0.30, 0.20, _Z])
        lt = _lerp(base_lw, left_ready, r)
        rt = _lerp(base_rw, right_ready, r)
        lt[2] -= r * 0.22 * swing
        rt[2] += r * 0.22 * swing
        _left_arm(pose, lt)
        _right_arm(pose, rt)
        pose[JointId.LEFT_KNEE, 1] -= r * 0.16 * max(0.0, swing)
        pose[JointId.RIGHT_KNEE, 1] -= r * 0.16 * max(0.0, -swing)
        pose[JointId.LEFT_ANKLE, 1] -= r * 0.10 * max(0.0, swing)
        pose[JointId.RIGHT_ANKLE, 1] -= r * 0.10 * max(0.0, -swing)
    else:  # pragma: no cover - enum is closed
        raise GestureError(f"no trajectory for {kind}")
    return pose


def pose_sequence(kind: GestureKind, num_frames: int,
                  frame_rate: float = DEFAULT_FRAME_RATE) -> np.ndarray:
    """Noise-free pose track (num_frames, 15, 3), frame j at local time j/rate."""
    duration = num_frames / frame_rate
    return np.stack([_pose_at(kind, j / frame_rate, duration) for j in range(num_frames)])


@dataclass(frozen=True)
class SynthesisSpec:
    kind: GestureKind
    duration: float | None = None  # None -> the kind's default
    noise_stddev: float = 0.0
    seed: int = 0
    subject_offset: tuple[float, float, float] = (0.0, 0.0, 0.0)
    frame_rate: float = DEFAULT_FRAME_RATE

    def __post_init__(self) -> None:
        dur = self.duration if self.duration is not None else DEFAULT_DURATIONS[self.kind]
        if dur <= 0:
            raise GestureError(f"duration must be positive, got {dur}")
        if self.noise_stddev < 0:
            raise GestureError(f"noise_stddev must be >= 0, got {self.noise_stddev}")
        if self.frame_rate <= 0:
            raise GestureError(f"frame_rate must be positive, got {self.frame_rate}")
        if self.seed < 0:
            raise GestureError(f"seed must be a non-negative integer, got {self.seed}")

    @property
    def resolved_duration(self) -> float:
        return self.duration if self.duration is not None else DEFAULT_DURATIONS[self.kind]


def synthesize(spec: SynthesisSpec) -> FrameWindow:
    """Generate a gesture window; pure function of the spec."""
    num_frames = round(spec.resolved_duration * spec.frame_rate)
    poses = pose_sequence(spec.kind, num_frames, spec.frame_rate)
    poses = poses + np.asarray(spec.subject_offset, dtype=np.float64)
    if spec.noise_stddev > 0:
        rng = np.random.default_rng(spec.seed)
        poses = poses + rng.normal(0.0, spec.noise_stddev, size=poses.shape)
    frames = [
        SkeletonFrame(joints=_readonly(poses[j]), timestamp=j / spec.frame_rate)
        for j in range(num_frames)
    ]
    return FrameWindow(frames=frames, frame_rate=spec.frame_rate)


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.setflags(write=False)
    return out


def derive_seed(seed: int, *key: int) -> int:
    """Stable per-sample seed derivation for dataset generation."""
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, np.uint64)[0])


def build_dataset(
    kinds: Sequence[GestureKind],
    per_class: int,
    noise_stddev: float = 0.01,
    seed: int = 0,
    stride: int = 3,
    frame_rate: float = DEFAULT_FRAME_RATE,
) -> list[tuple[FeatureSequence, int]]:
    """Labeled training corpus: per_class windows per kind, labels are the
    activity class indices (position of the kind in the eight-class table)."""
    if per_class < 1:
        raise GestureError(f"per_class must be >= 1, got {per_class}")
    for kind in kinds:
        if kind not in ACTIVITY_KINDS:
            raise GestureError(f"{kind.value} is not an activity class")
    samples = []
    for kind in kinds:
        label = ACTIVITY_KINDS.index(kind)
        for j in range(per_class):
            spec = SynthesisSpec(
                kind=kind,
                noise_stddev=noise_stddev,
                seed=derive_seed(seed, label, j),
                frame_rate=frame_rate,
            )
            samples.append((window_to_features(synthesize(spec), stride), label))
    return samples


# --- scenario scripts -------------------------------------------------------
#
# Line-based text, one event per line: `at <seconds> perform <gesture_name>`.
# `#` starts a comment; an optional `duration <seconds>` line fixes the total
# timeline length (otherwise it ends 2 s after the last event).


@dataclass
class ScenarioScript:
    events: list[tuple[float, GestureKind]] = field(default_factory=list)
    duration: float | None = None

    def __post_init__(self) -> None:
        for i, ((t0, k0), (t1, _)) in enumerate(zip(self.events, self.events[1:])):
            if t1 < t0:
                raise GestureError(f"events {i} and {i + 1} are out of order")
            if t0 + DEFAULT_DURATIONS[k0] > t1 + 1e-9:
                raise GestureError(
                    f"events {i} and {i + 1} overlap: "
                    f"{k0.value} at {t0} runs past {t1}"
                )

    @property
    def total_duration(self) -> float:
        if self.duration is not None:
            return self.duration
        if not self.events:
            raise GestureError("empty scenario needs an explicit duration")
        last_t, last_k = self.events[-1]
        return last_t + DEFAULT_DURATIONS[last_k] + 2.0


def parse_script(text: str) -> ScenarioScript:
    events: list[tuple[float, GestureKind]] = []
    duration = None
    kinds_by_name = {k.value: k for k in GestureKind}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "duration" and len(parts) == 2:
            duration = float(parts[1])
            continue
        if len(parts) != 4 or parts[0] != "at" or parts[2] != "perform":
            raise GestureError(f"line {lineno}: expected 'at <seconds> perform <gesture>'")
        try:
            start = float(parts[1])
        except ValueError as exc:
            raise GestureError(f"line {lineno}: bad time {parts[1]!r}") from exc
        if parts[3] not in kinds_by_name:
            raise GestureError(f"line {lineno}: unknown gesture {parts[3]!r}")
        events.append((start, kinds_by_name[parts[3]]))
    return ScenarioScript(events=events, duration=duration)


def load_script(fp: TextIO) -> ScenarioScript:
    return parse_script(fp.read())


def compile_scenario(
    script: ScenarioScript,
    frame_rate: float = DEFAULT_FRAME_RATE,
    noise_stddev: float = 0.0,
    seed: int = 0,
    subject_offset: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> FrameWindow:
    """Render a script to one continuous frame stream.

    Between events the last pose is held (after a raise the hand stays up
    until the scripted lower); before the first event the subject idles.
    """
    total_frames = round(script.total_duration * frame_rate)
    poses = np.empty((total_frames, 15, 3), dtype=np.float64)
    fill = BASE_POSE
    cursor = 0
    for start, kind in script.events:
        start_frame = round(start * frame_rate)
        num = round(DEFAULT_DURATIONS[kind] * frame_rate)
        if start_frame > total_frames:
            raise GestureError(f"event at {start}s starts after the scenario ends")
        poses[cursor:start_frame] = fill
        seq = pose_sequence(kind, min(num, total_frames - start_frame), frame_rate)
        poses[start_frame:start_frame + len(seq)] = seq
        cursor = start_frame + len(seq)
        if len(seq):
            fill = seq[-1]
    poses[cursor:] = fill

    poses = poses + np.asarray(subject_offset, dtype=np.float64)
    if noise_stddev > 0:
        rng = np.random.default_rng(seed)
        poses = poses + rng.normal(0.0, noise_stddev, size=poses.shape)
    frames = [
        SkeletonFrame(joints=_readonly(poses[j]), timestamp=j / frame_rate)
        for j in range(total_frames)
    ]
    return FrameWindow(frames=frames, frame_rate=frame_rate)
