"""Left-hand attention switch and the post-trigger recording collector.

The switch is a three-stage automaton over the per-frame wrist heights:
arms down -> left raised (attention gained) -> left lowered again
(recording triggered).  Only the left wrist is attended to; right-hand
motion never changes the state.  A raise must persist for a few frames
before it counts, and the raised test carries a height margin below the
torso so sensor jitter cannot chatter the switch.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from hri_sim.skeleton import FrameWindow, JointId, SkeletonFrame

HYSTERESIS = 0.05  # meters below the torso the wrist must reach to count as raised
DEBOUNCE_FRAMES = 3  # consecutive raised frames before attention is gained
WINDOW_SECONDS = 3.5  # recording length once triggered


class Stage(Enum):
    ARMS_DOWN = "ArmsDown"
    LEFT_RAISED = "LeftRaised"
    TRIGGERED = "Triggered"


class SwitchEvent(Enum):
    NONE = "None"
    ATTENTION_GAINED = "AttentionGained"
    RECORDING_STARTED = "RecordingStarted"


@dataclass(frozen=True)
class SwitchState:
    stage: Stage = Stage.ARMS_DOWN
    flag: bool = False
    raise_streak: int = 0  # debounce counter, only meaningful in ARMS_DOWN


def hand_flags(frame: SkeletonFrame, hysteresis: float = HYSTERESIS) -> tuple[bool, bool]:
    """(left_raised, right_raised): wrist above the torso by the margin.

    y grows downward, so raised means wrist.y < torso.y - hysteresis; a wrist
    exactly at torso height is not raised.
    """
    torso_y = frame.joint(JointId.TORSO)[1]
    left = bool(frame.joint(JointId.LEFT_WRIST)[1] < torso_y - hysteresis)
    right = bool(frame.joint(JointId.RIGHT_WRIST)[1] < torso_y - hysteresis)
    return left, right


def switch_step(
    state: SwitchState,
    frame: SkeletonFrame,
    hysteresis: float = HYSTERESIS,
    debounce: int = DEBOUNCE_FRAMES,
) -> tuple[SwitchState, SwitchEvent]:
    """Advance the automaton by one frame; the caller owns the state."""
    left_raised, _ = hand_flags(frame, hysteresis)

    if state.stage is Stage.ARMS_DOWN:
        if left_raised:
            streak = state.raise_streak + 1
            if streak >= debounce:
                return (
                    SwitchState(stage=Stage.LEFT_RAISED, flag=True, raise_streak=0),
                    SwitchEvent.ATTENTION_GAINED,
                )
            return replace(state, raise_streak=streak), SwitchEvent.NONE
        if state.raise_streak:
            return replace(state, raise_streak=0), SwitchEvent.NONE
        return state, SwitchEvent.NONE

    if state.stage is Stage.LEFT_RAISED:
        if not left_raised:
            return (
                SwitchState(stage=Stage.TRIGGERED, flag=True, raise_streak=0),
                SwitchEvent.RECORDING_STARTED,
            )
        return state, SwitchEvent.NONE

    # TRIGGERED: inert until the recording window completes and the owner resets.
    return state, SwitchEvent.NONE


def reset_switch() -> SwitchState:
    """Fresh arms-down state, flag cleared; used after a recording completes."""
    return SwitchState()


class CollectorError(RuntimeError):
    """Stepping an inactive collector."""


@dataclass
class RecordingCollector:
    """Fixed-length frame buffer filled after the switch triggers."""

    target_frames: int
    frame_rate: float
    active: bool = False
    buffer: list[SkeletonFrame] = field(default_factory=list)

    @classmethod
    def for_rate(cls, frame_rate: float, window_seconds: float = WINDOW_SECONDS
                 ) -> "RecordingCollector":
        return cls(target_frames=round(window_seconds * frame_rate), frame_rate=frame_rate)

    def activate(self) -> None:
        self.active = True
        self.buffer = []

    @property
    def fill(self) -> float:
        return len(self.buffer) / self.target_frames


def collect_step(
    collector: RecordingCollector, frame: SkeletonFrame
) -> tuple[RecordingCollector, FrameWindow | None]:
    """Append one frame; returns the completed window once full and deactivates."""
    if not collector.active:
        raise CollectorError("collect_step on an inactive collector")
    collector.buffer.append(frame)
    if len(collector.buffer) >= collector.target_frames:
        window = FrameWindow(frames=collector.buffer, frame_rate=collector.frame_rate)
        collector.active = False
        collector.buffer = []
        return collector, window
    return collector, None
