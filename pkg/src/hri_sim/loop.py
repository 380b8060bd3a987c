"""Top-level tick pipeline: frame stream -> attention switch -> recording
collector -> intent recognition -> task execution, with an append-only event
log.

Tick order (one skeleton frame per tick):
1. the switch sees the frame, unless a recording is being collected (the
   switch is inert during the capture window);
2. attention gained while a task runs pauses it on the spot;
3. an active collector absorbs the frame; on completion the window is
   classified and the intent routed: a paused executor decides between
   stop/resume/preempt/reject, an idle one just starts the task;
4. the running task integrates one tick of simulated time.

Every observable transition is appended to the event log, which is a pure
function of (frame stream, weights, config).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from hri_sim.executor import (
    ExecutorState,
    InterruptDecision,
    Mode,
    RESPONSE_BY_CLASS,
    StopCommand,
    TaskSpec,
    apply_intent,
    intent_to_task,
    pause_current,
    resume_suspended,
    start_task,
    task_step,
)
from hri_sim.gestures import ACTIVITY_KINDS, ScenarioScript, compile_scenario, load_script
from hri_sim.recognizer import ActivityIntent, LstmNetwork, forward, load_weights, predict
from hri_sim.skeleton import FrameWindow, SkeletonFrame, window_to_features
from hri_sim.switch import (
    RecordingCollector,
    SwitchEvent,
    SwitchState,
    collect_step,
    reset_switch,
    switch_step,
)

Recognizer = Callable[[FrameWindow], ActivityIntent]


@dataclass
class LoopConfig:
    frame_rate: float = 30.0
    stride: int = 3
    hysteresis: float = 0.05
    debounce_frames: int = 3
    window_seconds: float = 3.5
    recognition_latency_ticks: int = 0
    auto_resume_suspended: bool = False
    circling_angular_speed: float = 0.5
    priorities: dict | None = None


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    detail: dict

    def to_json_line(self) -> str:
        return json.dumps(
            {"t": self.time, "kind": self.kind, "detail": self.detail},
            separators=(",", ":"),
        )


def serialize_log(events: Iterable[Event]) -> str:
    return "".join(e.to_json_line() + "\n" for e in events)


def class_name(class_index: int) -> str:
    return ACTIVITY_KINDS[class_index].value


class InteractionState:
    """Live state of one interaction session; single writer, tick driven."""

    def __init__(self, net: LstmNetwork | None, config: LoopConfig | None = None,
                 recognize: Recognizer | None = None):
        self.config = config or LoopConfig()
        if recognize is None:
            if net is None:
                raise ValueError("need a network or a recognize callable")
            stride = self.config.stride
            recognize = lambda window: predict(net, window, stride)  # noqa: E731
        self.recognize = recognize
        self.net = net
        self.switch: SwitchState = reset_switch()
        self.collector = RecordingCollector.for_rate(
            self.config.frame_rate, self.config.window_seconds)
        self.executor = ExecutorState(
            angular_speed=self.config.circling_angular_speed,
            auto_resume_suspended=self.config.auto_resume_suspended,
        )
        if self.config.priorities:
            self.executor.priorities.update(self.config.priorities)
        self.tick_index = 0
        self.events: list[Event] = []
        self.last_intent: ActivityIntent | None = None
        self.last_probs: list[float] | None = None
        self.pending_windows: list[tuple[int, FrameWindow]] = []

    @property
    def time(self) -> float:
        return self.tick_index / self.config.frame_rate

    def emit(self, kind: str, **detail) -> None:
        self.events.append(Event(time=self.time, kind=kind, detail=detail))


def _emit_task_started(state: InteractionState, task: TaskSpec) -> None:
    state.emit("TaskStarted", response=task.response.value)


def _route_intent(state: InteractionState, intent: ActivityIntent) -> None:
    ex = state.executor
    if ex.mode is Mode.PAUSED:
        paused_response = ex.task.response
        decision, new_task = apply_intent(ex, intent)
        if decision is InterruptDecision.STOP_AND_FORGET:
            state.emit("Stopped", forgotten=paused_response.value)
        elif decision is InterruptDecision.RESUME_CURRENT:
            state.emit("TaskResumed", response=paused_response.value,
                       progress=ex.progress)
        elif decision is InterruptDecision.PREEMPT_AND_SWITCH:
            assert isinstance(new_task, TaskSpec)
            state.emit("TaskStarted", response=new_task.response.value,
                       suspended=paused_response.value)
        else:  # REJECT_NEW
            rejected = RESPONSE_BY_CLASS[intent.class_index]
            state.emit("TaskRejected", response=rejected.value, reason="lower_priority")
            state.emit("TaskResumed", response=paused_response.value,
                       progress=ex.progress)
    elif ex.mode is Mode.IDLE:
        task = intent_to_task(intent, ex.priorities, ex.angular_speed)
        if isinstance(task, StopCommand):
            state.emit("Stopped", forgotten=None)
        else:
            start_task(ex, task)
            _emit_task_started(state, task)
    else:  # RUNNING: only reachable with injected recognition latency
        rejected = RESPONSE_BY_CLASS[intent.class_index]
        state.emit("TaskRejected", response=rejected.value, reason="executor_busy")


def _finish_recording(state: InteractionState, window: FrameWindow) -> None:
    state.emit("RecordingCompleted", frames=len(window))
    state.switch = reset_switch()
    if state.config.recognition_latency_ticks > 0:
        due = state.tick_index + state.config.recognition_latency_ticks
        state.pending_windows.append((due, window))
    else:
        _recognize_and_route(state, window)


def _recognize_and_route(state: InteractionState, window: FrameWindow) -> None:
    try:
        intent = state.recognize(window)
        if state.net is not None:
            probs = forward(state.net, window_to_features(window, state.config.stride))
            state.last_probs = [float(p) for p in probs]
    except Exception as exc:  # component errors become warnings, loop keeps going
        state.emit("Warning", message=f"recognition failed: {exc}")
        return
    state.last_intent = intent
    state.emit("IntentRecognized", **{
        "class": intent.class_index,
        "name": class_name(intent.class_index),
        "confidence": intent.confidence,
    })
    _route_intent(state, intent)


def tick(state: InteractionState, frame: SkeletonFrame) -> list[Event]:
    """Advance one frame; returns the events emitted during this tick."""
    mark = len(state.events)
    cfg = state.config
    dt = 1.0 / cfg.frame_rate

    if not state.collector.active:
        state.switch, sw_event = switch_step(
            state.switch, frame, cfg.hysteresis, cfg.debounce_frames)
        if sw_event is SwitchEvent.ATTENTION_GAINED:
            state.emit("AttentionGained")
            if state.executor.mode is Mode.RUNNING:
                response = state.executor.task.response
                pause_current(state.executor)
                bp = state.executor.breakpoint
                state.emit("TaskPaused", response=response.value,
                           progress=bp.progress, remaining=bp.remaining)
        elif sw_event is SwitchEvent.RECORDING_STARTED:
            state.collector.activate()
            state.emit("RecordingStarted", target_frames=state.collector.target_frames)

    if state.collector.active:
        state.collector, window = collect_step(state.collector, frame)
        if window is not None:
            _finish_recording(state, window)

    if state.pending_windows:
        due_now = [w for t, w in state.pending_windows if t <= state.tick_index]
        state.pending_windows = [(t, w) for t, w in state.pending_windows
                                 if t > state.tick_index]
        for window in due_now:
            _recognize_and_route(state, window)

    completed = task_step(state.executor, dt)
    if completed is not None:
        state.emit("TaskCompleted", response=completed.value)
        if state.executor.auto_resume_suspended:
            resumed = resume_suspended(state.executor)
            if resumed is not None:
                state.emit("TaskResumed", response=resumed.response.value,
                           progress=state.executor.progress)

    state.tick_index += 1
    return state.events[mark:]


def run_stream(state: InteractionState, frames: Iterable[SkeletonFrame]) -> list[Event]:
    for frame in frames:
        tick(state, frame)
    return state.events


def run_scenario(
    script: ScenarioScript | str | Path,
    net: LstmNetwork | str | Path,
    config: LoopConfig | None = None,
    noise_stddev: float = 0.0,
    seed: int = 0,
    recognize: Recognizer | None = None,
) -> tuple[list[Event], InteractionState]:
    """Compile a scenario script and tick through every frame; deterministic."""
    if not isinstance(script, ScenarioScript):
        with open(script, "r", encoding="utf-8") as fp:
            script = load_script(fp)
    if not isinstance(net, LstmNetwork) and net is not None:
        net = load_weights(net)
    config = config or LoopConfig()
    stream = compile_scenario(script, config.frame_rate, noise_stddev=noise_stddev,
                              seed=seed)
    state = InteractionState(net, config, recognize=recognize)
    run_stream(state, stream.frames)
    return state.events, state


def misclassifying_recognizer(base: Recognizer, wrong_class: int) -> Recognizer:
    """Test fixture: deliberately misreports the first window, then delegates.

    Models a recognition mistake so the recovery path (user pauses the wrong
    task and re-performs) can be exercised deterministically.
    """
    calls = {"n": 0}

    def recognize(window: FrameWindow) -> ActivityIntent:
        calls["n"] += 1
        if calls["n"] == 1:
            return ActivityIntent(class_index=wrong_class, confidence=1.0)
        return base(window)

    return recognize
