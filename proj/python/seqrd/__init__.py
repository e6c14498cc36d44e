"""Bounded planning in passive POMDPs and memory/sensing rate-distortion boundaries."""

from ._core import (
    BoundaryPoint,
    JointBelief,
    ModelSpec,
    Multipliers,
    OneStepSolution,
    StepPolicy,
    StepReport,
    Trajectory,
    build_kelly,
    build_symmetric_channel,
    classify_regime,
    enumerate_cost,
    evaluate_policy,
    filter_initial_policy,
    initial_belief,
    load_model,
    onestep_boundary,
    plan,
    save_model,
    solve_last_step,
    sweep,
    unbounded_baseline,
    validate,
)

__all__ = [
    "BoundaryPoint",
    "JointBelief",
    "ModelSpec",
    "Multipliers",
    "OneStepSolution",
    "StepPolicy",
    "StepReport",
    "Trajectory",
    "build_kelly",
    "build_symmetric_channel",
    "classify_regime",
    "enumerate_cost",
    "evaluate_policy",
    "filter_initial_policy",
    "initial_belief",
    "load_model",
    "onestep_boundary",
    "plan",
    "save_model",
    "solve_last_step",
    "sweep",
    "unbounded_baseline",
    "validate",
]
