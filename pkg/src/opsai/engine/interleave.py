"""Exhaustive interleaving search for small levels.

Explores every stall/no-stall choice per on-board arrow per tick (breadth
first, deduplicating states) and reports whether any schedule reaches a
failure. This is the brute-force counterpart to sampled verification:
feasible for the couple-of-arrows teaching levels, not for big boards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Optional

from ..errors import ValidationError
from .board import BoardState, Outcome, Phase, board_to_wire
from .level import LevelSpec
from .sim import start_run, tick_once

FAIL_OUTCOMES = (Outcome.COLLISION, Outcome.WRONG_EXIT)


@dataclass(frozen=True)
class FoundFailure:
    kind: str  # "collision", "wrong_exit", or "deadlock"
    schedule: tuple[frozenset[str], ...]  # stall set per tick, in order


def _core_key(state: BoardState) -> tuple:
    wire = board_to_wire(replace(state, idle_ticks=0))
    # Tick only matters while spawns are still scheduled for the future.
    tick_part = state.tick if state.pending_spawns else -1
    del wire["tick"]
    del wire["idle_ticks"]
    return tick_part, json.dumps(wire, sort_keys=True)


def _subsets(ids: list[str]):
    for r in range(len(ids) + 1):
        yield from (frozenset(c) for c in combinations(ids, r))


def _is_stuck(level: LevelSpec, state: BoardState) -> bool:
    """True when the state can never progress again under any stall choice.

    Once every scheduled spawn is due, dynamics are time-homogeneous; if the
    no-stall tick reproduces the same core state, the state is absorbing."""
    if any(s.tick > state.tick for s in state.pending_spawns):
        return False
    nxt, _ = tick_once(level, state, frozenset(), deadlock_window=1 << 30)
    if nxt.phase is Phase.TERMINAL:
        return False
    return _core_key(nxt)[1] == _core_key(state)[1]


def search_failures(
    level: LevelSpec,
    placements: BoardState,
    max_ticks: int = 32,
    max_states: int = 200_000,
    max_arrows: int = 8,
) -> Optional[FoundFailure]:
    """Find a failing schedule (collision, wrong exit, or deadlock), if any
    exists within max_ticks; None means every explored schedule is safe."""
    start = start_run(placements)
    seen = {_core_key(start)}
    frontier: list[tuple[BoardState, tuple[frozenset[str], ...]]] = [(start, ())]
    explored = 0

    for _ in range(max_ticks):
        next_frontier: list[tuple[BoardState, tuple[frozenset[str], ...]]] = []
        for state, schedule in frontier:
            on_board = sorted(a.arrow_id for a in state.arrows if not a.delivered)
            if len(on_board) > max_arrows:
                raise ValidationError(
                    f"interleaving search limited to {max_arrows} concurrent arrows"
                )
            if _is_stuck(level, state):
                return FoundFailure("deadlock", schedule)
            for stalls in _subsets(on_board):
                nxt, _events = tick_once(level, state, stalls, deadlock_window=1 << 30)
                explored += 1
                if explored > max_states:
                    raise ValidationError("interleaving search exceeded state budget")
                if nxt.phase is Phase.TERMINAL:
                    if nxt.outcome in FAIL_OUTCOMES:
                        return FoundFailure(nxt.outcome.value, schedule + (stalls,))
                    continue
                key = _core_key(nxt)
                if key not in seen:
                    seen.add(key)
                    next_frontier.append((nxt, schedule + (stalls,)))
        if not next_frontier:
            return None
        frontier = next_frontier
    return None


def run_schedule(
    level: LevelSpec,
    placements: BoardState,
    schedule: tuple[frozenset[str], ...],
    extra_ticks: int = 64,
) -> BoardState:
    """Replay an explicit stall schedule (empty sets once it runs out)."""
    state = start_run(placements)
    total = len(schedule) + extra_ticks
    for i in range(total):
        if state.phase is Phase.TERMINAL:
            break
        stalls = schedule[i] if i < len(schedule) else frozenset()
        state, _ = tick_once(level, state, stalls, deadlock_window=1 << 30)
    return state
