from .board import BoardState, Outcome, Phase, SemState, apply_action, initial_state
from .level import Color, LevelSpec, load_level
from .sim import RunResult, SimConfig, run_test, step, verify_solution

__all__ = [
    "BoardState",
    "Color",
    "LevelSpec",
    "Outcome",
    "Phase",
    "RunResult",
    "SemState",
    "SimConfig",
    "apply_action",
    "initial_state",
    "load_level",
    "run_test",
    "step",
    "verify_solution",
]
