"""Desk-scale human-robot interaction simulator.

Pipeline: synthetic skeleton stream -> left-hand attention switch -> LSTM
intent recognition -> priority-preemptive task execution with breakpoints.
"""

from hri_sim.executor import InterruptDecision, RobotResponse, interrupt_decision
from hri_sim.gestures import (
    ACTIVITY_KINDS,
    GestureKind,
    ScenarioScript,
    SynthesisSpec,
    build_dataset,
    compile_scenario,
    parse_script,
    synthesize,
)
from hri_sim.loop import InteractionState, LoopConfig, run_scenario, serialize_log, tick
from hri_sim.recognizer import (
    ActivityIntent,
    LstmNetwork,
    TrainConfig,
    forward,
    gradient_check,
    load_weights,
    predict,
    save_weights,
    train,
)
from hri_sim.skeleton import (
    FRAME_DIM,
    NUM_JOINTS,
    FeatureSequence,
    FrameWindow,
    JointId,
    NormalizedFrame,
    SkeletonFrame,
    frame_from_joints,
    normalize_frame,
    window_to_features,
)

__all__ = [
    "ACTIVITY_KINDS",
    "ActivityIntent",
    "FRAME_DIM",
    "FeatureSequence",
    "FrameWindow",
    "GestureKind",
    "InteractionState",
    "InterruptDecision",
    "JointId",
    "LoopConfig",
    "LstmNetwork",
    "NUM_JOINTS",
    "NormalizedFrame",
    "RobotResponse",
    "ScenarioScript",
    "SkeletonFrame",
    "SynthesisSpec",
    "TrainConfig",
    "build_dataset",
    "compile_scenario",
    "forward",
    "frame_from_joints",
    "gradient_check",
    "interrupt_decision",
    "load_weights",
    "normalize_frame",
    "parse_script",
    "predict",
    "run_scenario",
    "save_weights",
    "serialize_log",
    "synthesize",
    "tick",
    "train",
    "window_to_features",
]

__version__ = "0.1.0"
