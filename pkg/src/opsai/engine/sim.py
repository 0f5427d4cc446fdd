"""Seeded tick simulation of arrow-threads over a board.

One tick, in order: stall draws for on-board arrows, due spawns, movement
intents, conflict detection, simultaneous commit, signal flips, progress
bookkeeping. Every iteration runs in ascending id order, so a (state, seed)
pair fully determines the run, bit for bit, on any platform.

The stall stream is splitmix64: one draw per on-board undelivered arrow per
tick, ascending arrow_id; the arrow stalls when draw < floor(p * 2^64).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .._kernels import MASK64, splitmix64_next
from ..errors import ValidationError
from ..model import SystemEvent, SystemKind
from .board import (
    ArrowState,
    BoardState,
    NodeKind,
    Outcome,
    Phase,
    SemState,
)
from .level import LevelSpec


class SplitMix64:
    """Stateful splitmix64 stream; the one RNG the simulator ever uses."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, out = splitmix64_next(self.state)
        return out


def splitmix64(x: int) -> int:
    """First output of a splitmix64 stream seeded with x."""
    return splitmix64_next(x & MASK64)[1]


@dataclass(frozen=True)
class SimConfig:
    stall_probability: float = 0.25
    max_ticks: int = 1000
    deadlock_window: int = 50
    verify_seeds: int = 64
    base_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.stall_probability <= 1.0:
            raise ValidationError("stall_probability must be in [0, 1]", field="stall_probability")
        for name in ("max_ticks", "deadlock_window", "verify_seeds"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1", field=name)

    @classmethod
    def from_level_defaults(cls, defaults: dict, **overrides) -> "SimConfig":
        known = {f for f in cls.__dataclass_fields__}
        merged = {k: v for k, v in defaults.items() if k in known}
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**merged)

    def stall_threshold(self) -> int:
        return int(self.stall_probability * (1 << 64))


@dataclass(frozen=True)
class RunResult:
    outcome: Outcome
    ticks: int
    events: tuple[SystemEvent, ...]
    final_state: BoardState


@dataclass(frozen=True)
class VerifyResult:
    seeds_run: int
    seeds_passed: int
    per_seed: tuple[dict, ...]

    @property
    def solved(self) -> bool:
        return self.seeds_passed == self.seeds_run


def _terminal(state: BoardState, outcome: Outcome, **changes) -> BoardState:
    return replace(state, phase=Phase.TERMINAL, outcome=outcome, **changes)


def tick_once(
    level: LevelSpec,
    state: BoardState,
    stalled: frozenset[str],
    deadlock_window: int,
) -> tuple[BoardState, list[SystemEvent]]:
    """Advance one tick given an explicit stall set for on-board arrows.

    run-time callers draw the stall set from the RNG (see step); the
    interleaving enumerator feeds every possible set through here instead.
    A tick that ends the run leaves `tick` at the index of that final tick.
    """
    if state.phase is not Phase.RUNNING:
        raise ValidationError(f"cannot tick a board in phase {state.phase.value}")
    tick = state.tick
    events: list[SystemEvent] = []
    arrows = {a.arrow_id: a for a in state.arrows}
    occupied = {a.node for a in arrows.values() if not a.delivered}

    # Spawns due this tick (or deferred from earlier ones), ascending id.
    # A spawn blocked by occupancy is retried next tick, never dropped.
    spawned = 0
    deferred: list = []
    remaining: list = []
    for spawn in state.pending_spawns:
        if spawn.tick > tick:
            remaining.append(spawn)
        elif spawn.spawn_node in occupied:
            deferred.append(spawn)
        else:
            arrows[spawn.arrow_id] = ArrowState(spawn.arrow_id, spawn.color, spawn.spawn_node)
            occupied.add(spawn.spawn_node)
            spawned += 1
    pending = tuple(sorted(deferred + remaining, key=lambda s: (s.tick, s.arrow_id)))

    # Intents. An arrow waits if it has no route, the route's semaphore is
    # closed, or the target node is occupied (moves never chain into nodes
    # vacated this same tick).
    intents: dict[str, tuple[str, str]] = {}  # arrow_id -> (src, dst)
    for arrow_id in sorted(arrows):
        arrow = arrows[arrow_id]
        if arrow.delivered or arrow_id in stalled:
            continue
        edge = level.routes.get((arrow.node, arrow.color))
        if edge is None:
            continue
        if state.semaphores.get(edge.id) is SemState.CLOSED:
            continue
        if edge.dst in occupied:
            continue
        intents[arrow_id] = (arrow.node, edge.dst)

    # Conflicts: two intents into one node, or a swap across one edge pair.
    contested: dict[str, list[str]] = {}
    for arrow_id, (_, dst) in intents.items():
        contested.setdefault(dst, []).append(arrow_id)
    conflicts = [(node, sorted(ids)) for node, ids in contested.items() if len(ids) > 1]
    intent_set = {(src, dst) for src, dst in intents.values()}
    for arrow_id, (src, dst) in intents.items():
        if (dst, src) in intent_set and src < dst:
            other = [b for b, (bs, bd) in intents.items() if bs == dst and bd == src]
            conflicts.append((min(src, dst), sorted([arrow_id] + other)))
    if conflicts:
        node, arrow_ids = min(conflicts, key=lambda c: c[0])
        events.append(
            SystemEvent(
                SystemKind.COLLISION,
                {"arrow_ids": arrow_ids, "node_id": node, "tick": tick},
            )
        )
        new_state = _terminal(
            state,
            Outcome.COLLISION,
            arrows=tuple(arrows[a] for a in sorted(arrows)),
            pending_spawns=pending,
        )
        return new_state, events

    # Commit all surviving intents simultaneously; deliveries and wrong
    # exits are judged on the committed positions.
    received: set[str] = set()
    wrong_exit: Optional[tuple[str, str]] = None
    for arrow_id in sorted(intents):
        _, dst = intents[arrow_id]
        arrows[arrow_id] = replace(arrows[arrow_id], node=dst)
        received.add(dst)
        node = level.node_by_id[dst]
        if node.kind is NodeKind.EXIT:
            if node.exit_color is arrows[arrow_id].color:
                arrows[arrow_id] = replace(arrows[arrow_id], delivered=True)
                events.append(
                    SystemEvent(
                        SystemKind.DELIVERED,
                        {"arrow_id": arrow_id, "node_id": dst, "tick": tick},
                    )
                )
            elif wrong_exit is None:
                wrong_exit = (arrow_id, dst)

    new_arrows = tuple(arrows[a] for a in sorted(arrows))

    if wrong_exit is not None:
        arrow_id, node_id = wrong_exit
        events.append(
            SystemEvent(
                SystemKind.WRONG_EXIT,
                {"arrow_ids": [arrow_id], "node_id": node_id, "tick": tick},
            )
        )
        return _terminal(state, Outcome.WRONG_EXIT, arrows=new_arrows, pending_spawns=pending), events

    # Signal flips: each node with a signal that received an arrow flips its
    # linked semaphores once, ascending node id then edge id.
    semaphores = state.semaphores
    flips = [
        edge_id
        for node_id in sorted(received & state.signals.keys())
        for edge_id in sorted(state.signals[node_id])
    ]
    if flips:
        semaphores = dict(semaphores)
        for edge_id in flips:
            semaphores[edge_id] = (
                SemState.OPEN if semaphores[edge_id] is SemState.CLOSED else SemState.CLOSED
            )

    progressed = spawned > 0 or bool(intents)
    all_delivered = not pending and all(a.delivered for a in new_arrows)
    if all_delivered:
        return (
            _terminal(
                state,
                Outcome.SUCCESS,
                arrows=new_arrows,
                pending_spawns=pending,
                semaphores=semaphores,
                idle_ticks=0,
            ),
            events,
        )

    idle = 0 if progressed else state.idle_ticks + 1
    if idle >= deadlock_window:
        events.append(SystemEvent(SystemKind.DEADLOCK_TIMEOUT, {"tick": tick}))
        return (
            _terminal(
                state,
                Outcome.TIMEOUT,
                arrows=new_arrows,
                pending_spawns=pending,
                semaphores=semaphores,
                idle_ticks=idle,
            ),
            events,
        )

    return (
        replace(
            state,
            tick=tick + 1,
            arrows=new_arrows,
            pending_spawns=pending,
            semaphores=semaphores,
            idle_ticks=idle,
        ),
        events,
    )


def draw_stalls(state: BoardState, rng: SplitMix64, threshold: int) -> frozenset[str]:
    """One draw per on-board undelivered arrow, ascending arrow_id."""
    stalled = set()
    for arrow in sorted(state.arrows, key=lambda a: a.arrow_id):
        if arrow.delivered:
            continue
        if rng.next_u64() < threshold:
            stalled.add(arrow.arrow_id)
    return frozenset(stalled)


def step(
    level: LevelSpec,
    state: BoardState,
    rng: SplitMix64,
    cfg: SimConfig,
) -> tuple[BoardState, list[SystemEvent]]:
    """One RNG-driven tick. Advances rng in place; same (state, rng state)
    always yields the same result."""
    stalled = draw_stalls(state, rng, cfg.stall_threshold())
    return tick_once(level, state, stalled, cfg.deadlock_window)


def start_run(placements: BoardState) -> BoardState:
    if placements.phase is not Phase.EDIT:
        raise ValidationError(f"placements must be in edit phase, got {placements.phase.value}")
    return replace(placements, phase=Phase.RUNNING)


def run_test(
    level: LevelSpec,
    placements: BoardState,
    seed: int,
    cfg: SimConfig,
) -> RunResult:
    """Run one seeded test from an edit-phase board to a terminal outcome."""
    state = start_run(placements)
    rng = SplitMix64(seed)
    events: list[SystemEvent] = [SystemEvent(SystemKind.TEST_STARTED, {"seed": seed})]
    while state.phase is Phase.RUNNING and state.tick < cfg.max_ticks:
        state, tick_events = step(level, state, rng, cfg)
        events.extend(tick_events)
    if state.phase is Phase.RUNNING:  # tick budget exhausted
        events.append(SystemEvent(SystemKind.DEADLOCK_TIMEOUT, {"tick": state.tick}))
        state = _terminal(state, Outcome.TIMEOUT)
    assert state.outcome is not None
    events.append(
        SystemEvent(
            SystemKind.TEST_RESULT,
            {"outcome": state.outcome.value, "seed": seed, "ticks": state.tick},
        )
    )
    return RunResult(outcome=state.outcome, ticks=state.tick, events=tuple(events), final_state=state)


def verify_seed(cfg: SimConfig, i: int) -> int:
    return splitmix64((cfg.base_seed + i) & MASK64)


def verify_solution(level: LevelSpec, placements: BoardState, cfg: SimConfig) -> VerifyResult:
    """Run the configured number of seeded tests; solved means all pass."""
    per_seed = []
    passed = 0
    for i in range(cfg.verify_seeds):
        seed = verify_seed(cfg, i)
        result = run_test(level, placements, seed, cfg)
        if result.outcome is Outcome.SUCCESS:
            passed += 1
        per_seed.append({"outcome": result.outcome.value, "seed": seed, "ticks": result.ticks})
    return VerifyResult(seeds_run=cfg.verify_seeds, seeds_passed=passed, per_seed=tuple(per_seed))


def solution_verified_event(result: VerifyResult) -> SystemEvent:
    return SystemEvent(
        SystemKind.SOLUTION_VERIFIED,
        {"seeds_passed": result.seeds_passed, "seeds_run": result.seeds_run},
    )
