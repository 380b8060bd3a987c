from pathlib import Path

import numpy as np

from hri_sim.executor import Mode, RobotResponse
from hri_sim.gestures import (
    ACTIVITY_KINDS,
    ScenarioScript,
    compile_scenario,
    parse_script,
)
from hri_sim.loop import (
    InteractionState,
    LoopConfig,
    misclassifying_recognizer,
    run_scenario,
    run_stream,
    serialize_log,
    tick,
)
from hri_sim.recognizer import ActivityIntent

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "src" / "hri_sim" / "scenarios"
DEMO_SCRIPT = SCENARIO_DIR / "preemption_demo.scenario"


def stub_recognizer(class_index, confidence=0.9):
    return lambda window: ActivityIntent(class_index=class_index, confidence=confidence)


def fixed_stub_state(class_index=0, **config_kwargs):
    cfg = LoopConfig(**config_kwargs)
    return InteractionState(net=None, config=cfg, recognize=stub_recognizer(class_index))


def kinds(events):
    return [e.kind for e in events]


def script_frames(text):
    return compile_scenario(parse_script(text)).frames


RAISE_LOWER_WAVE = """
duration 8
at 0.5 perform raise_left_hand
at 1.6 perform lower_left_hand
at 1.9 perform wave_right_hand
"""


def test_idle_stream_emits_nothing():
    state = fixed_stub_state()
    frames = compile_scenario(ScenarioScript(events=[], duration=5.0)).frames
    events = run_stream(state, frames)
    assert events == []
    assert state.executor.mode is Mode.IDLE


def test_full_cycle_event_order_and_task_start():
    state = fixed_stub_state(class_index=0)
    events = run_stream(state, script_frames(RAISE_LOWER_WAVE))
    order = kinds(events)
    assert order == [
        "AttentionGained",
        "RecordingStarted",
        "RecordingCompleted",
        "IntentRecognized",
        "TaskStarted",
    ]
    started = events[-1]
    assert started.detail["response"] == "waving_right_hand"
    recognized = events[-2]
    assert recognized.detail["class"] == 0
    assert recognized.detail["name"] == "wave_right_hand"


def test_recording_window_is_exactly_105_frames():
    state = fixed_stub_state()
    run_stream(state, script_frames(RAISE_LOWER_WAVE))
    started = next(e for e in state.events if e.kind == "RecordingStarted")
    completed = next(e for e in state.events if e.kind == "RecordingCompleted")
    assert started.detail["target_frames"] == 105
    assert completed.detail["frames"] == 105
    # 105 frames at 30 Hz, trigger frame included in the window
    assert abs((completed.time - started.time) - 104 / 30.0) < 1e-9


def test_raise_during_running_pauses_before_recognition():
    # start circling via the stub, then raise again mid-task
    text = """
    duration 16
    at 0.5 perform raise_left_hand
    at 1.6 perform lower_left_hand
    at 1.9 perform draw_circle
    at 8.0 perform raise_left_hand
    at 9.1 perform lower_left_hand
    at 9.4 perform draw_circle
    """
    state = fixed_stub_state(class_index=6)
    events = run_stream(state, script_frames(text))
    order = kinds(events)
    first_pause = order.index("TaskPaused")
    second_recognition = [i for i, k in enumerate(order) if k == "IntentRecognized"][1]
    assert first_pause < second_recognition
    paused = events[first_pause]
    assert paused.detail["response"] == "circling"
    assert "remaining" in paused.detail


def test_event_grammar_over_randomized_scripts():
    # prefix counts: attention >= started >= completed >= recognized
    rng = np.random.default_rng(12)
    for _ in range(10):
        t = 0.5
        lines = ["duration 40"]
        for _ in range(int(rng.integers(1, 4))):
            lines.append(f"at {t:.2f} perform raise_left_hand")
            t += 1.0 + float(rng.uniform(0, 0.5))
            lines.append(f"at {t:.2f} perform lower_left_hand")
            t += 0.3
            kind = ACTIVITY_KINDS[int(rng.integers(0, 8))]
            lines.append(f"at {t:.2f} perform {kind.value}")
            t += 3.5 + float(rng.uniform(0.2, 1.0))
        state = fixed_stub_state(class_index=3)
        events = run_stream(state, script_frames("\n".join(lines)))
        counts = {"AttentionGained": 0, "RecordingStarted": 0,
                  "RecordingCompleted": 0, "IntentRecognized": 0}
        for e in events:
            if e.kind in counts:
                counts[e.kind] += 1
                assert (counts["AttentionGained"] >= counts["RecordingStarted"]
                        >= counts["RecordingCompleted"] >= counts["IntentRecognized"])
        assert counts["IntentRecognized"] == counts["AttentionGained"]


def test_stub_determinism_byte_identical_logs():
    text = RAISE_LOWER_WAVE
    a = fixed_stub_state(class_index=2)
    run_stream(a, script_frames(text))
    b = fixed_stub_state(class_index=2)
    run_stream(b, script_frames(text))
    assert serialize_log(a.events) == serialize_log(b.events)
    assert len(serialize_log(a.events)) > 0


def test_stop_while_idle_is_logged_noop():
    state = fixed_stub_state(class_index=1)  # stub says "stop"
    events = run_stream(state, script_frames(RAISE_LOWER_WAVE))
    assert kinds(events)[-1] == "Stopped"
    assert events[-1].detail["forgotten"] is None
    assert state.executor.mode is Mode.IDLE


def test_recognizer_failure_becomes_warning_and_loop_continues():
    def broken(window):
        raise RuntimeError("recognizer exploded")

    cfg = LoopConfig()
    state = InteractionState(net=None, config=cfg, recognize=broken)
    events = run_stream(state, script_frames(RAISE_LOWER_WAVE))
    warnings = [e for e in events if e.kind == "Warning"]
    assert len(warnings) == 1
    assert "exploded" in warnings[0].detail["message"]
    assert state.executor.mode is Mode.IDLE
    # the switch was reset, so a later cycle still works
    assert not state.collector.active


def test_recognition_latency_delays_intent():
    state = fixed_stub_state(class_index=0, recognition_latency_ticks=15)
    events = run_stream(state, script_frames(RAISE_LOWER_WAVE))
    completed = next(e for e in events if e.kind == "RecordingCompleted")
    recognized = next(e for e in events if e.kind == "IntentRecognized")
    delay = recognized.time - completed.time
    assert abs(delay - 15 / 30.0) < 1e-9


def test_delayed_recognition_while_running_is_rejected_busy():
    # two recordings; with latency > inter-completion gap the second delayed
    # intent lands while the first task is already running
    text = """
    duration 24
    at 0.5 perform raise_left_hand
    at 1.6 perform lower_left_hand
    at 1.9 perform draw_circle
    at 6.0 perform raise_left_hand
    at 7.1 perform lower_left_hand
    at 7.4 perform draw_circle
    """
    state = fixed_stub_state(class_index=6, recognition_latency_ticks=200)
    events = run_stream(state, script_frames(text))
    order = kinds(events)
    assert "TaskStarted" in order
    rejected = [e for e in events if e.kind == "TaskRejected"]
    assert len(rejected) == 1
    assert rejected[0].detail["reason"] == "executor_busy"


def test_misunderstanding_recovery_preempt():
    # wrong low-priority task starts; the user re-performs and the correct
    # higher-priority task replaces it
    text = """
    duration 20
    at 0.5 perform raise_left_hand
    at 1.6 perform lower_left_hand
    at 1.9 perform wave_forwards
    at 8.0 perform raise_left_hand
    at 9.1 perform lower_left_hand
    at 9.4 perform wave_forwards
    """
    correct = stub_recognizer(4)  # "go back" -> moving_backwards (priority 5)
    recognize = misclassifying_recognizer(correct, wrong_class=6)  # circling first
    state = InteractionState(net=None, config=LoopConfig(), recognize=recognize)
    events = run_stream(state, script_frames(text))
    starts = [e for e in events if e.kind == "TaskStarted"]
    assert [s.detail["response"] for s in starts] == ["circling", "moving_backwards"]
    assert starts[1].detail["suspended"] == "circling"
    assert state.executor.task.response is RobotResponse.MOVING_BACKWARDS


def test_misunderstanding_recovery_stop():
    text = """
    duration 16
    at 0.5 perform raise_left_hand
    at 1.6 perform lower_left_hand
    at 1.9 perform wave_forwards
    at 8.0 perform raise_left_hand
    at 9.1 perform lower_left_hand
    at 9.4 perform stretch_right_hand
    """
    recognize = misclassifying_recognizer(stub_recognizer(1), wrong_class=6)
    state = InteractionState(net=None, config=LoopConfig(), recognize=recognize)
    events = run_stream(state, script_frames(text))
    stopped = [e for e in events if e.kind == "Stopped"]
    assert len(stopped) == 1
    assert stopped[0].detail["forgotten"] == "circling"
    assert state.executor.mode is Mode.IDLE
    assert state.executor.suspended_slot is None


def test_misunderstanding_same_wrong_class_resumes():
    # re-performing the same (wrong) gesture class resumes the wrong task:
    # a documented consequence of the decision table
    text = """
    duration 16
    at 0.5 perform raise_left_hand
    at 1.6 perform lower_left_hand
    at 1.9 perform wave_right_hand
    at 8.0 perform raise_left_hand
    at 9.1 perform lower_left_hand
    at 9.4 perform wave_right_hand
    """
    state = fixed_stub_state(class_index=6)  # always "circling"
    events = run_stream(state, script_frames(text))
    resumed = [e for e in events if e.kind == "TaskResumed"]
    assert len(resumed) == 1
    assert resumed[0].detail["response"] == "circling"


def test_collector_buffer_never_exceeds_target():
    state = fixed_stub_state(class_index=0)
    for frame in script_frames(RAISE_LOWER_WAVE):
        tick(state, frame)
        assert len(state.collector.buffer) <= state.collector.target_frames
    assert state.pending_windows == []


def test_event_log_lines_are_json_with_stable_field_order():
    state = fixed_stub_state(class_index=0)
    run_stream(state, script_frames(RAISE_LOWER_WAVE))
    lines = serialize_log(state.events).splitlines()
    assert all(line.startswith('{"t":') and '"kind":' in line for line in lines)


# --- scenario runs with the real trained recognizer -------------------------

CANONICAL_TASK_EVENTS = [
    ("TaskStarted", "circling"),
    ("TaskPaused", "circling"),
    ("IntentRecognized", "wave_forwards"),
    ("TaskStarted", "moving_backwards"),
    ("TaskPaused", "moving_backwards"),
    ("TaskRejected", "circling"),
    ("TaskResumed", "moving_backwards"),
    ("TaskCompleted", "moving_backwards"),
]


def task_trace(events):
    """(kind, response-or-name) pairs for the canonical task-level kinds,
    keeping only the intent recognitions that name the two commands."""
    trace = []
    for e in events:
        if e.kind in ("TaskStarted", "TaskPaused", "TaskResumed",
                      "TaskRejected", "TaskCompleted"):
            trace.append((e.kind, e.detail["response"]))
        elif e.kind == "IntentRecognized" and e.detail["name"] == "wave_forwards":
            trace.append((e.kind, e.detail["name"]))
    return trace


def test_demo_scenario_with_trained_net(trained_net):
    events, state = run_scenario(DEMO_SCRIPT, trained_net)
    assert task_trace(events) == CANONICAL_TASK_EVENTS
    assert state.executor.mode is Mode.IDLE
    # suspended circling breakpoint is still parked (auto_resume is off)
    assert state.executor.suspended_slot is not None
    assert state.executor.suspended_slot.response is RobotResponse.CIRCLING
