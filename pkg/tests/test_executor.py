import io
import math

import pytest

from hri_sim.executor import (
    DEFAULT_PRIORITIES,
    STOP,
    ConfigError,
    ExecutorError,
    ExecutorState,
    InterruptDecision,
    Mode,
    Pose,
    RESPONSE_BY_CLASS,
    RobotResponse,
    StopCommand,
    TaskSpec,
    apply_intent,
    chassis_step,
    intent_to_task,
    interrupt_decision,
    make_task,
    parse_executor_config,
    pause_current,
    resume_from_breakpoint,
    resume_suspended,
    start_task,
    task_step,
)
from hri_sim.recognizer import ActivityIntent

DT = 1.0 / 30.0


def intent(class_index):
    return ActivityIntent(class_index=class_index, confidence=1.0)


def fresh_running(response=RobotResponse.MOVING_BACKWARDS):
    state = ExecutorState()
    task = make_task(response)
    assert isinstance(task, TaskSpec)
    start_task(state, task)
    return state


def run_seconds(state, seconds, dt=DT):
    completed = None
    for _ in range(round(seconds / dt)):
        done = task_step(state, dt)
        if done is not None:
            completed = done
    return completed


# --- intent table -------------------------------------------------------------

def test_intent_class_4_is_move_backwards_with_experiment_constants():
    task = intent_to_task(intent(4))
    assert isinstance(task, TaskSpec)
    assert task.response is RobotResponse.MOVING_BACKWARDS
    assert task.kind == "chassis_linear"
    assert task.direction == -1
    assert task.speed == 0.2
    assert task.distance == 4.0


def test_intent_class_6_is_circling_20_laps():
    task = intent_to_task(intent(6))
    assert isinstance(task, TaskSpec)
    assert task.response is RobotResponse.CIRCLING
    assert task.kind == "chassis_spin"
    assert task.laps == 20
    assert math.isclose(task.extent, 40 * math.pi)


def test_intent_class_1_is_the_stop_command():
    assert isinstance(intent_to_task(intent(1)), StopCommand)


def test_every_class_maps_to_its_response_row():
    for ci, response in enumerate(RESPONSE_BY_CLASS):
        task = intent_to_task(intent(ci))
        if response is RobotResponse.STOPPING:
            assert task is STOP
        else:
            assert task.response is response


# --- chassis kinematics ---------------------------------------------------------

def test_chassis_straight_line():
    pose = chassis_step(Pose(), linear_speed=0.2, angular_speed=0.0, dt=1.0)
    assert pose == Pose(x=0.2, y=0.0, heading=0.0)


def test_chassis_identity():
    start = Pose(x=1.0, y=-2.0, heading=0.7)
    assert chassis_step(start, 0.0, 0.0, dt=5.0) == start


def test_chassis_full_spins_wrap_heading_to_start():
    # two full revolutions at 0.5 rad/s: position fixed, heading wraps back
    pose = Pose(heading=0.3)
    omega = 0.5
    total = 4.0 * math.pi / omega
    steps = round(total / DT)
    for _ in range(steps):
        pose = chassis_step(pose, 0.0, omega, total / steps)
    assert pose.x == 0.0 and pose.y == 0.0
    assert abs(pose.heading - 0.3) < 1e-9


# --- task stepping ---------------------------------------------------------------

def test_move_backwards_completes_after_twenty_seconds():
    state = fresh_running()
    completed = None
    for second in range(20):
        completed = run_seconds(state, 1.0, dt=1.0)
    assert completed is RobotResponse.MOVING_BACKWARDS
    assert state.mode is Mode.IDLE
    assert math.isclose(abs(state.pose.x), 4.0, abs_tol=1e-9)


def test_completion_truncates_overshoot_exactly():
    state = fresh_running()
    # 19.9 s accrued, then a full 1 s step: only 0.1 s of it should integrate
    run_seconds(state, 19.0, dt=1.0)
    task_step(state, 0.9)
    done = task_step(state, 1.0)
    assert done is RobotResponse.MOVING_BACKWARDS
    assert math.isclose(abs(state.pose.x), 4.0, abs_tol=1e-12)


def test_paused_state_accrues_nothing():
    state = fresh_running()
    run_seconds(state, 5.0)
    pause_current(state)
    pose_before = state.pose
    progress_before = state.progress
    for _ in range(300):
        assert task_step(state, DT) is None
    assert state.pose == pose_before
    assert state.progress == progress_before


def test_circling_laps_match_closed_form():
    state = fresh_running(RobotResponse.CIRCLING)
    omega = 0.5
    for seconds in (10.0, 60.0, 120.0):
        state = fresh_running(RobotResponse.CIRCLING)
        run_seconds(state, seconds)
        expected = math.floor(omega * seconds / (2 * math.pi))
        got = math.floor(state.elapsed_extent / (2 * math.pi))
        assert abs(state.elapsed_extent - omega * seconds) <= omega * DT + 1e-9
        assert got in (expected, expected - 1, expected + 1)


def test_circling_completes_at_twenty_laps():
    state = fresh_running(RobotResponse.CIRCLING)
    total = 40 * math.pi / 0.5  # 80*pi seconds
    completed = run_seconds(state, total + 1.0)
    assert completed is RobotResponse.CIRCLING
    assert state.mode is Mode.IDLE


# --- pause / resume ---------------------------------------------------------------

def test_pause_records_breakpoint_by_simulation_oracle():
    # oracle: 7.5 s at 0.2 m/s leaves 4.0 - 1.5 = 2.5 m remaining
    state = fresh_running()
    run_seconds(state, 7.5, dt=0.5)
    assert pause_current(state)
    bp = state.breakpoint
    assert bp is not None
    assert bp.response is RobotResponse.MOVING_BACKWARDS
    assert math.isclose(bp.remaining, 2.5, abs_tol=1e-9)
    assert math.isclose(bp.progress, 1.5 / 4.0, abs_tol=1e-12)


def test_pause_immediately_has_zero_progress():
    state = fresh_running(RobotResponse.CIRCLING)
    pause_current(state)
    assert state.breakpoint.progress == 0.0


def test_pause_while_idle_is_a_warned_noop():
    state = ExecutorState()
    assert pause_current(state) is False
    assert state.mode is Mode.IDLE


def test_resume_completes_in_exactly_remaining_time():
    state = fresh_running()
    run_seconds(state, 7.5, dt=0.5)
    pause_current(state)
    resume_from_breakpoint(state)
    # 2.5 m at 0.2 m/s = 12.5 s: not done one tick earlier, done at 12.5 s
    completed = run_seconds(state, 12.5 - 0.5, dt=0.5)
    assert completed is None
    assert task_step(state, 0.5) is RobotResponse.MOVING_BACKWARDS


def test_resume_zero_progress_equals_fresh_start():
    a = fresh_running()
    pause_current(a)
    resume_from_breakpoint(a)
    b = fresh_running()
    run_seconds(a, 4.0)
    run_seconds(b, 4.0)
    assert a.pose == b.pose
    assert a.elapsed_extent == b.elapsed_extent


def test_chained_pause_resume_conserves_displacement():
    # pause/resume at every simulated second: same final displacement
    interrupted = fresh_running()
    uninterrupted = fresh_running()
    for second in range(20):
        run_seconds(interrupted, 1.0)
        if interrupted.mode is Mode.RUNNING:
            pause_current(interrupted)
            resume_from_breakpoint(interrupted)
    run_seconds(uninterrupted, 20.0)
    run_seconds(interrupted, 1.0)  # let any float residue finish
    assert abs(interrupted.pose.x - uninterrupted.pose.x) < 1e-9
    assert abs(interrupted.pose.y - uninterrupted.pose.y) < 1e-9
    assert math.isclose(abs(uninterrupted.pose.x), 4.0, abs_tol=1e-9)


def test_resume_without_breakpoint_is_a_contract_error():
    state = fresh_running()
    with pytest.raises(ExecutorError, match="paused"):
        resume_from_breakpoint(state)


# --- interruption decisions ---------------------------------------------------------

def test_decision_table_is_total_and_unique():
    for paused in RobotResponse:
        for new in RobotResponse:
            decision = interrupt_decision(paused, new)
            assert isinstance(decision, InterruptDecision)
            if new is RobotResponse.STOPPING:
                assert decision is InterruptDecision.STOP_AND_FORGET
            elif new is paused:
                assert decision is InterruptDecision.RESUME_CURRENT
            elif DEFAULT_PRIORITIES[new] > DEFAULT_PRIORITIES[paused]:
                assert decision is InterruptDecision.PREEMPT_AND_SWITCH
            else:
                assert decision is InterruptDecision.REJECT_NEW


def test_priority_antisymmetry():
    for a in RobotResponse:
        for b in RobotResponse:
            if a is b or RobotResponse.STOPPING in (a, b):
                continue
            if interrupt_decision(a, b) is InterruptDecision.PREEMPT_AND_SWITCH:
                assert interrupt_decision(b, a) is InterruptDecision.REJECT_NEW


def test_paused_circling_preempted_by_move_back():
    state = fresh_running(RobotResponse.CIRCLING)
    run_seconds(state, 3.0)
    pause_current(state)
    decision, task = apply_intent(state, intent(4))
    assert decision is InterruptDecision.PREEMPT_AND_SWITCH
    assert state.mode is Mode.RUNNING
    assert state.task.response is RobotResponse.MOVING_BACKWARDS
    assert state.suspended_slot is not None
    assert state.suspended_slot.response is RobotResponse.CIRCLING


def test_paused_move_back_rejects_circling_and_resumes():
    state = fresh_running(RobotResponse.MOVING_BACKWARDS)
    run_seconds(state, 5.0)
    pause_current(state)
    decision, _ = apply_intent(state, intent(6))
    assert decision is InterruptDecision.REJECT_NEW
    assert state.mode is Mode.RUNNING
    assert state.task.response is RobotResponse.MOVING_BACKWARDS


def test_stop_forgets_breakpoint_and_slot():
    state = fresh_running(RobotResponse.CIRCLING)
    run_seconds(state, 2.0)
    pause_current(state)
    apply_intent(state, intent(4))  # preempt: circling parked in the slot
    run_seconds(state, 2.0)
    pause_current(state)
    decision, _ = apply_intent(state, intent(1))
    assert decision is InterruptDecision.STOP_AND_FORGET
    assert state.mode is Mode.IDLE
    assert state.breakpoint is None
    assert state.suspended_slot is None


def test_same_response_resumes_current():
    state = fresh_running(RobotResponse.MOVING_BACKWARDS)
    run_seconds(state, 5.0)
    pause_current(state)
    decision, _ = apply_intent(state, intent(4))
    assert decision is InterruptDecision.RESUME_CURRENT
    assert state.mode is Mode.RUNNING
    assert math.isclose(state.elapsed_extent, 1.0, abs_tol=1e-9)


def test_suspended_slot_keeps_newest_only():
    state = fresh_running(RobotResponse.WAVING_RIGHT_HAND)
    run_seconds(state, 1.0)
    pause_current(state)
    apply_intent(state, intent(6))  # circling preempts the wave
    first = state.suspended_slot
    run_seconds(state, 2.0)
    pause_current(state)
    apply_intent(state, intent(4))  # move-back preempts circling
    assert state.suspended_slot is not first
    assert state.suspended_slot.response is RobotResponse.CIRCLING


def test_apply_intent_requires_paused():
    state = fresh_running()
    with pytest.raises(ExecutorError, match="paused"):
        apply_intent(state, intent(6))


def test_chassis_halted_in_paused_and_idle():
    state = ExecutorState()
    for _ in range(50):
        task_step(state, DT)
    assert state.pose == Pose()
    state = fresh_running()
    run_seconds(state, 3.0)
    pause_current(state)
    pose = state.pose
    for _ in range(50):
        task_step(state, DT)
    assert state.pose == pose


def test_auto_resume_path():
    state = fresh_running(RobotResponse.CIRCLING)
    run_seconds(state, 2.0)
    pause_current(state)
    apply_intent(state, intent(0))  # hmm: arm animation has lower priority
    # circling paused, waving rejected: executor resumed circling
    assert state.mode is Mode.RUNNING
    assert state.task.response is RobotResponse.CIRCLING

    # preempt with move-back, then finish it and pull the slot occupant back
    pause_current(state)
    apply_intent(state, intent(4))
    run_seconds(state, 21.0)
    assert state.mode is Mode.IDLE
    resumed = resume_suspended(state)
    assert resumed is not None
    assert state.task.response is RobotResponse.CIRCLING
    assert state.elapsed_extent > 0  # continues from the parked breakpoint


# --- config file -----------------------------------------------------------------

def test_parse_executor_config_defaults_and_overrides():
    text = """
    # sample config
    circling = 3
    moving_backwards = 7
    auto_resume_suspended = true
    circling_angular_speed = 0.8
    """
    cfg = parse_executor_config(io.StringIO(text))
    assert cfg["priorities"][RobotResponse.CIRCLING] == 3
    assert cfg["priorities"][RobotResponse.MOVING_BACKWARDS] == 7
    assert cfg["priorities"][RobotResponse.MOVING_FORWARDS] == 5  # untouched default
    assert cfg["auto_resume_suspended"] is True
    assert cfg["circling_angular_speed"] == 0.8


def test_parse_executor_config_rejects_bad_lines():
    with pytest.raises(ConfigError, match="line 1"):
        parse_executor_config(io.StringIO("circling: 3"))
    with pytest.raises(ConfigError, match="unknown option"):
        parse_executor_config(io.StringIO("warp_speed = 9"))
    with pytest.raises(ConfigError, match="integer"):
        parse_executor_config(io.StringIO("circling = fast"))
