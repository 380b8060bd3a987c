"""Robot task execution: intent-to-response mapping, chassis simulation, and
the interruption decision logic with breakpoints.

A running task accrues progress in its own extent units (meters for linear
motion, radians for spinning, seconds for arm animations).  Pausing captures
a breakpoint; a paused task either resumes exactly where it stopped, is
preempted by a strictly higher-priority command (its breakpoint parked in
the single suspended slot, newest wins), or the whole thing is stopped and
forgotten.  The chassis is a unicycle integrated per tick and is stationary
whenever no chassis task is running.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TextIO

from hri_sim.recognizer import ActivityIntent


class ExecutorError(RuntimeError):
    """Contract violation (operation in the wrong mode)."""


class ConfigError(ValueError):
    """Malformed executor config file."""


class RobotResponse(Enum):
    # Same order as the activity classes they answer.
    WAVING_RIGHT_HAND = "waving_right_hand"
    STOPPING = "stopping"
    SALUTING = "saluting"
    LIFTING_RIGHT_ARM = "lifting_right_arm"
    MOVING_BACKWARDS = "moving_backwards"
    MOVING_FORWARDS = "moving_forwards"
    CIRCLING = "circling"
    WAVING_ARMS_AROUND = "waving_arms_around"


RESPONSE_BY_CLASS: tuple[RobotResponse, ...] = tuple(RobotResponse)


class InterruptDecision(Enum):
    STOP_AND_FORGET = "StopAndForget"
    RESUME_CURRENT = "ResumeCurrent"
    PREEMPT_AND_SWITCH = "PreemptAndSwitch"
    REJECT_NEW = "RejectNew"


class StopCommand:
    """The stop response is a command, not a resumable task."""

    def __repr__(self) -> str:
        return "StopCommand()"


STOP = StopCommand()

# Movement beats circling beats arm animations; stopping is a command and its
# table entry exists only to make the decision function total.
DEFAULT_PRIORITIES: dict[RobotResponse, int] = {
    RobotResponse.STOPPING: 9,
    RobotResponse.MOVING_BACKWARDS: 5,
    RobotResponse.MOVING_FORWARDS: 5,
    RobotResponse.CIRCLING: 2,
    RobotResponse.WAVING_RIGHT_HAND: 1,
    RobotResponse.SALUTING: 1,
    RobotResponse.LIFTING_RIGHT_ARM: 1,
    RobotResponse.WAVING_ARMS_AROUND: 1,
}

LINEAR_SPEED = 0.2  # m/s
LINEAR_DISTANCE = 4.0  # m
CIRCLING_LAPS = 20
DEFAULT_ANGULAR_SPEED = 0.5  # rad/s
ARM_ANIMATION_SECONDS = 5.0


@dataclass(frozen=True)
class TaskSpec:
    response: RobotResponse
    priority: int
    kind: str  # chassis_linear | chassis_spin | arm_animation
    speed: float = 0.0  # m/s (linear)
    distance: float = 0.0  # m (linear)
    direction: int = 1  # +-1 (linear)
    angular_speed: float = 0.0  # rad/s (spin)
    laps: int = 0  # (spin)
    duration: float = 0.0  # s (arm)

    @property
    def extent(self) -> float:
        """Total task size in its own units (m, rad, or s)."""
        if self.kind == "chassis_linear":
            return self.distance
        if self.kind == "chassis_spin":
            return self.laps * 2.0 * math.pi
        return self.duration

    @property
    def rate(self) -> float:
        """Extent units accrued per second while running."""
        if self.kind == "chassis_linear":
            return self.speed
        if self.kind == "chassis_spin":
            return self.angular_speed
        return 1.0


@dataclass(frozen=True)
class Breakpoint:
    """Progress record of a suspended task, exact enough to resume bit-stably."""

    response: RobotResponse
    progress: float  # fraction in [0, 1]
    remaining: float  # extent units left
    elapsed: float = 0.0  # extent units done (kept so resume restores exactly)


@dataclass(frozen=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0


class Mode(Enum):
    IDLE = "Idle"
    RUNNING = "Running"
    PAUSED = "Paused"


def make_task(response: RobotResponse, priorities: dict[RobotResponse, int] | None = None,
              angular_speed: float = DEFAULT_ANGULAR_SPEED) -> TaskSpec | StopCommand:
    """Default task parameters for each response."""
    priorities = priorities or DEFAULT_PRIORITIES
    prio = priorities[response]
    if response is RobotResponse.STOPPING:
        return STOP
    if response is RobotResponse.MOVING_BACKWARDS:
        return TaskSpec(response, prio, "chassis_linear", speed=LINEAR_SPEED,
                        distance=LINEAR_DISTANCE, direction=-1)
    if response is RobotResponse.MOVING_FORWARDS:
        return TaskSpec(response, prio, "chassis_linear", speed=LINEAR_SPEED,
                        distance=LINEAR_DISTANCE, direction=1)
    if response is RobotResponse.CIRCLING:
        return TaskSpec(response, prio, "chassis_spin", angular_speed=angular_speed,
                        laps=CIRCLING_LAPS)
    return TaskSpec(response, prio, "arm_animation", duration=ARM_ANIMATION_SECONDS)


def intent_to_task(intent: ActivityIntent,
                   priorities: dict[RobotResponse, int] | None = None,
                   angular_speed: float = DEFAULT_ANGULAR_SPEED) -> TaskSpec | StopCommand:
    """Class-index row of the interaction table."""
    response = RESPONSE_BY_CLASS[intent.class_index]
    return make_task(response, priorities, angular_speed)


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]; in-range angles pass through untouched."""
    if -math.pi < theta <= math.pi:
        return theta
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def chassis_step(pose: Pose, linear_speed: float, angular_speed: float, dt: float) -> Pose:
    """Unicycle integration for one tick."""
    if dt <= 0:
        raise ExecutorError(f"dt must be positive, got {dt}")
    return Pose(
        x=pose.x + linear_speed * math.cos(pose.heading) * dt,
        y=pose.y + linear_speed * math.sin(pose.heading) * dt,
        heading=wrap_angle(pose.heading + angular_speed * dt),
    )


@dataclass
class ExecutorState:
    mode: Mode = Mode.IDLE
    task: TaskSpec | None = None
    elapsed_extent: float = 0.0  # extent units accrued by the current task
    breakpoint: Breakpoint | None = None  # set while PAUSED
    suspended_slot: Breakpoint | None = None  # single capacity, newest wins
    pose: Pose = field(default_factory=Pose)
    priorities: dict[RobotResponse, int] = field(default_factory=lambda: dict(DEFAULT_PRIORITIES))
    angular_speed: float = DEFAULT_ANGULAR_SPEED
    auto_resume_suspended: bool = False

    @property
    def progress(self) -> float:
        if self.task is None or self.task.extent == 0:
            return 0.0
        return self.elapsed_extent / self.task.extent

    def snapshot_breakpoint(self) -> Breakpoint:
        assert self.task is not None
        return Breakpoint(
            response=self.task.response,
            progress=self.progress,
            remaining=self.task.extent - self.elapsed_extent,
            elapsed=self.elapsed_extent,
        )


def start_task(state: ExecutorState, task: TaskSpec) -> None:
    """Begin a fresh task; only legal when no task occupies the executor."""
    if state.mode is not Mode.IDLE:
        raise ExecutorError(f"cannot start a task while {state.mode.value}")
    state.mode = Mode.RUNNING
    state.task = task
    state.elapsed_extent = 0.0
    state.breakpoint = None


def task_step(state: ExecutorState, dt: float) -> RobotResponse | None:
    """Advance the running task by dt; returns the response on completion.

    Progress never overshoots: the final tick only integrates the remaining
    extent, so mileage contracts hold exactly.  Paused and idle states leave
    both the task and the chassis untouched.
    """
    if dt <= 0:
        raise ExecutorError(f"dt must be positive, got {dt}")
    if state.mode is not Mode.RUNNING or state.task is None:
        return None
    task = state.task
    remaining = task.extent - state.elapsed_extent
    step_extent = task.rate * dt
    used_dt = dt if step_extent < remaining else remaining / task.rate
    if task.kind == "chassis_linear":
        state.pose = chassis_step(state.pose, task.speed * task.direction, 0.0, used_dt)
    elif task.kind == "chassis_spin":
        state.pose = chassis_step(state.pose, 0.0, task.angular_speed, used_dt)
    if step_extent < remaining:
        state.elapsed_extent += step_extent
        return None
    state.elapsed_extent = task.extent
    completed = task.response
    state.mode = Mode.IDLE
    state.task = None
    state.elapsed_extent = 0.0
    return completed


def pause_current(state: ExecutorState) -> bool:
    """Suspend the running task, recording its breakpoint; True if paused,
    False (no-op, caller should warn) when nothing was running."""
    if state.mode is not Mode.RUNNING:
        return False
    state.breakpoint = state.snapshot_breakpoint()
    state.mode = Mode.PAUSED
    return True


def resume_from_breakpoint(state: ExecutorState) -> None:
    """Continue the paused task exactly where it stopped."""
    if state.mode is not Mode.PAUSED or state.breakpoint is None or state.task is None:
        raise ExecutorError("resume requires a paused task with a breakpoint")
    if state.breakpoint.response is not state.task.response:
        raise ExecutorError(
            f"breakpoint records {state.breakpoint.response.value}, "
            f"paused task is {state.task.response.value}")
    state.elapsed_extent = state.breakpoint.elapsed
    state.breakpoint = None
    state.mode = Mode.RUNNING


def interrupt_decision(paused: RobotResponse, new: RobotResponse,
                       priorities: dict[RobotResponse, int] | None = None) -> InterruptDecision:
    """Total decision table over (paused, new) response pairs."""
    priorities = priorities or DEFAULT_PRIORITIES
    if new is RobotResponse.STOPPING:
        return InterruptDecision.STOP_AND_FORGET
    if new is paused:
        return InterruptDecision.RESUME_CURRENT
    if priorities[new] > priorities[paused]:
        return InterruptDecision.PREEMPT_AND_SWITCH
    return InterruptDecision.REJECT_NEW


def apply_intent(state: ExecutorState, intent: ActivityIntent
                 ) -> tuple[InterruptDecision, TaskSpec | StopCommand]:
    """Route a freshly recognized intent at a paused executor.

    stop: forget the breakpoint and the suspended slot, go idle.
    same response: resume from the breakpoint.
    strictly higher priority: park the breakpoint in the suspended slot
    (overwriting any occupant) and start the new task.
    otherwise: reject the new command and resume the paused task.
    """
    if state.mode is not Mode.PAUSED or state.task is None:
        raise ExecutorError("apply_intent requires a paused executor")
    new = intent_to_task(intent, state.priorities, state.angular_speed)
    decision = interrupt_decision(
        state.task.response,
        RESPONSE_BY_CLASS[intent.class_index],
        state.priorities,
    )
    if decision is InterruptDecision.STOP_AND_FORGET:
        state.mode = Mode.IDLE
        state.task = None
        state.elapsed_extent = 0.0
        state.breakpoint = None
        state.suspended_slot = None
    elif decision is InterruptDecision.RESUME_CURRENT:
        resume_from_breakpoint(state)
    elif decision is InterruptDecision.PREEMPT_AND_SWITCH:
        assert isinstance(new, TaskSpec)
        state.suspended_slot = state.breakpoint  # newest value wins
        state.breakpoint = None
        state.mode = Mode.IDLE
        state.task = None
        state.elapsed_extent = 0.0
        start_task(state, new)
    else:  # REJECT_NEW
        resume_from_breakpoint(state)
    return decision, new


def resume_suspended(state: ExecutorState) -> TaskSpec | None:
    """Restart the task parked in the suspended slot (config-gated path)."""
    if state.mode is not Mode.IDLE or state.suspended_slot is None:
        return None
    bp = state.suspended_slot
    task = make_task(bp.response, state.priorities, state.angular_speed)
    assert isinstance(task, TaskSpec)
    state.suspended_slot = None
    start_task(state, task)
    state.elapsed_extent = bp.elapsed
    return task


# --- config file -------------------------------------------------------------
#
# Line-based `name = value`: one line per response priority, plus
# `auto_resume_suspended = true|false` and `circling_angular_speed = <rad/s>`.

def parse_executor_config(fp: TextIO) -> dict:
    priorities = dict(DEFAULT_PRIORITIES)
    options = {"auto_resume_suspended": False, "circling_angular_speed": DEFAULT_ANGULAR_SPEED}
    responses = {r.value: r for r in RobotResponse}
    for lineno, raw in enumerate(fp, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'name = value'")
        name, _, value = (part.strip() for part in line.partition("="))
        if name in responses:
            try:
                priorities[responses[name]] = int(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {name} needs an integer") from exc
        elif name == "auto_resume_suspended":
            if value not in ("true", "false"):
                raise ConfigError(f"line {lineno}: expected true or false")
            options["auto_resume_suspended"] = value == "true"
        elif name == "circling_angular_speed":
            try:
                options["circling_angular_speed"] = float(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad angular speed") from exc
            if options["circling_angular_speed"] <= 0:
                raise ConfigError(f"line {lineno}: angular speed must be positive")
        else:
            raise ConfigError(f"line {lineno}: unknown option {name!r}")
    if any(p < 0 for p in priorities.values()):
        raise ConfigError("priorities must be >= 0")
    return {"priorities": priorities, **options}
