"""Skeleton frames, joint layout, body-centric normalization, feature extraction.

Coordinate convention: camera frame with y increasing DOWNWARD, so a hanging
wrist has a larger y than the torso and a raised wrist a smaller one.  All
joint positions are meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence, TextIO

import numpy as np

NUM_JOINTS = 15
FRAME_DIM = NUM_JOINTS * 3
DEFAULT_FRAME_RATE = 30.0

_EPS = 1e-12


class SkeletonError(ValueError):
    """Invalid skeleton data (wrong joint count, non-finite coordinates...)."""


class DegenerateFrameError(SkeletonError):
    """Frame cannot be normalized (coincident reference joints)."""


class JointId(IntEnum):
    """Fixed joint indexing used everywhere a frame is flattened."""

    HEAD = 0
    NECK = 1
    TORSO = 2
    LEFT_SHOULDER = 3
    LEFT_ELBOW = 4
    LEFT_WRIST = 5
    LEFT_HIP = 6
    LEFT_KNEE = 7
    LEFT_ANKLE = 8
    RIGHT_SHOULDER = 9
    RIGHT_ELBOW = 10
    RIGHT_WRIST = 11
    RIGHT_HIP = 12
    RIGHT_KNEE = 13
    RIGHT_ANKLE = 14


@dataclass(frozen=True)
class SkeletonFrame:
    """One time sample of 15 joint positions, flattened as x1,y1,z1,...,x15,y15,z15."""

    joints: np.ndarray  # (15, 3) float64, read-only
    timestamp: float

    def joint(self, jid: JointId) -> np.ndarray:
        return self.joints[int(jid)]

    def flatten(self) -> np.ndarray:
        """45-vector in the fixed joint order."""
        return self.joints.reshape(-1).copy()

    @classmethod
    def from_flat(cls, values: Sequence[float], timestamp: float) -> "SkeletonFrame":
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (FRAME_DIM,):
            raise SkeletonError(f"expected {FRAME_DIM} values, got {arr.shape}")
        return frame_from_joints(arr.reshape(NUM_JOINTS, 3), timestamp)


@dataclass(frozen=True)
class NormalizedFrame:
    """SkeletonFrame after the body-centric transform; torso at the origin,
    shoulder axis in the x-y plane, neck-torso distance 1.  ``scale`` is the
    neck-torso distance of the input frame that was divided out."""

    joints: np.ndarray  # (15, 3) float64
    timestamp: float
    scale: float

    def joint(self, jid: JointId) -> np.ndarray:
        return self.joints[int(jid)]

    def flatten(self) -> np.ndarray:
        return self.joints.reshape(-1).copy()


@dataclass
class FrameWindow:
    """An ordered run of frames at a fixed nominal rate."""

    frames: list[SkeletonFrame]
    frame_rate: float = DEFAULT_FRAME_RATE

    def __post_init__(self) -> None:
        ts = [f.timestamp for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise SkeletonError("frame timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def nominal_duration(self) -> float:
        return len(self.frames) / self.frame_rate


@dataclass
class FeatureSequence:
    """Classifier input: normalized, flattened frames taken every ``stride`` frames."""

    steps: np.ndarray  # (T, 45) float64
    stride: int = 1

    def __len__(self) -> int:
        return self.steps.shape[0]


def frame_from_joints(joints: Iterable[Sequence[float]], timestamp: float) -> SkeletonFrame:
    """Build a frame from 15 ordered 3D points, rejecting bad input."""
    arr = np.asarray(list(joints) if not isinstance(joints, np.ndarray) else joints,
                     dtype=np.float64)
    if arr.shape != (NUM_JOINTS, 3):
        raise SkeletonError(f"wrong joint count: expected {NUM_JOINTS}x3, got {arr.shape}")
    bad = ~np.isfinite(arr)
    if bad.any():
        jid = int(np.argwhere(bad.any(axis=1))[0][0])
        raise SkeletonError(f"non-finite coordinate at joint {JointId(jid).name} (index {jid})")
    arr = arr.copy()
    arr.setflags(write=False)
    return SkeletonFrame(joints=arr, timestamp=float(timestamp))


def normalize_frame(frame: SkeletonFrame) -> NormalizedFrame:
    """Remove location, facing direction and body size from a frame.

    Translate the torso to the origin, rotate about the y-axis until the
    shoulder axis has no z-component (left shoulder at positive x), then
    scale uniformly so the neck-torso distance is 1.
    """
    pts = frame.joints - frame.joint(JointId.TORSO)

    shoulder = pts[JointId.LEFT_SHOULDER] - pts[JointId.RIGHT_SHOULDER]
    sx, sz = shoulder[0], shoulder[2]
    planar = math.hypot(sx, sz)
    if planar < _EPS:
        raise DegenerateFrameError("coincident shoulders: cannot fix facing direction")
    cos_a, sin_a = sx / planar, sz / planar
    x, z = pts[:, 0].copy(), pts[:, 2].copy()
    pts[:, 0] = x * cos_a + z * sin_a
    pts[:, 2] = -x * sin_a + z * cos_a

    scale = float(np.linalg.norm(pts[JointId.NECK]))
    if scale < _EPS:
        raise DegenerateFrameError("neck coincides with torso: no scale reference")
    pts /= scale

    pts.setflags(write=False)
    return NormalizedFrame(joints=pts, timestamp=frame.timestamp, scale=scale)


def window_to_features(window: FrameWindow, stride: int = 1) -> FeatureSequence:
    """Normalize and flatten every stride-th frame of a window, order preserved."""
    if len(window) == 0:
        raise SkeletonError("cannot extract features from an empty window")
    if stride < 1:
        raise SkeletonError(f"stride must be >= 1, got {stride}")
    steps = np.stack([normalize_frame(f).flatten() for f in window.frames[::stride]])
    return FeatureSequence(steps=steps, stride=stride)


# --- skeleton stream files ------------------------------------------------
#
# Line-delimited text: a header line `#skeleton-v1 rate=<Hz>`, then one frame
# per line as `timestamp x1 y1 z1 ... x15 y15 z15` (floats round-trip exactly
# via repr).

STREAM_HEADER_PREFIX = "#skeleton-v1"


def write_stream(fp: TextIO, window: FrameWindow) -> None:
    fp.write(f"{STREAM_HEADER_PREFIX} rate={window.frame_rate!r}\n")
    for f in window.frames:
        coords = " ".join(repr(float(v)) for v in f.flatten())
        fp.write(f"{float(f.timestamp)!r} {coords}\n")


def read_stream(fp: TextIO) -> FrameWindow:
    header = fp.readline().strip()
    if not header.startswith(STREAM_HEADER_PREFIX):
        raise SkeletonError(f"not a skeleton stream: bad header {header!r}")
    try:
        rate = float(header.split("rate=", 1)[1])
    except (IndexError, ValueError) as exc:
        raise SkeletonError(f"malformed stream header {header!r}") from exc
    frames = []
    for lineno, line in enumerate(fp, start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 1 + FRAME_DIM:
            raise SkeletonError(f"line {lineno}: expected {1 + FRAME_DIM} fields, got {len(parts)}")
        values = [float(p) for p in parts]
        frames.append(SkeletonFrame.from_flat(values[1:], timestamp=values[0]))
    return FrameWindow(frames=frames, frame_rate=rate)
