"""Exhaustive interleaving search vs sampled verification."""

from opsai.engine import apply_action, initial_state, verify_solution
from opsai.engine.board import Outcome
from opsai.engine.interleave import run_schedule, search_failures
from opsai.engine.sim import SimConfig
from opsai.model import ActionKind, PlayerAction


def solved_board(registry, level_id):
    level = registry.get(level_id)
    state = initial_state(level)
    for action in registry.solution(level_id):
        state = apply_action(level, state, action)
    return level, state


def test_merge_uncoordinated_has_colliding_schedule(registry):
    level = registry.get("merge")
    found = search_failures(level, initial_state(level))
    assert found is not None and found.kind == "collision"
    final = run_schedule(level, initial_state(level), found.schedule)
    assert final.outcome is Outcome.COLLISION


def test_merge_solution_has_no_failing_schedule(registry):
    level, state = solved_board(registry, "merge")
    assert search_failures(level, state, max_ticks=24) is None


def test_straightline_has_no_failing_schedule(registry):
    level = registry.get("straightline")
    assert search_failures(level, initial_state(level), max_ticks=16) is None


def test_closed_semaphore_without_signal_is_deadlock(registry):
    level = registry.get("merge")
    state = apply_action(
        level, initial_state(level), PlayerAction(ActionKind.PLACE_SEMAPHORE, target="eb")
    )
    found = search_failures(level, state)
    assert found is not None and found.kind == "deadlock"


def test_enumerator_agrees_with_sampling_on_fixtures(registry):
    """Failing interleaving exists iff sampled verification sees failures."""
    cfg = SimConfig(stall_probability=0.25, verify_seeds=64)
    boards = []
    for level_id in ("straightline", "merge", "critical_section"):
        level = registry.get(level_id)
        boards.append((level, initial_state(level)))  # uncoordinated
        boards.append(solved_board(registry, level_id))  # committed solution
    for level, state in boards:
        found = search_failures(level, state, max_ticks=24)
        verdict = verify_solution(level, state, cfg)
        sampled_failures = verdict.seeds_passed < verdict.seeds_run
        assert (found is not None) == sampled_failures, level.level_id
