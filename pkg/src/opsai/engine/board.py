"""Board state and edit-phase action application.

BoardState is treated as an immutable value: apply_action and the simulator
always return fresh instances. Dict/tuple fields must not be mutated in
place by callers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

from ..errors import ValidationError
from ..model import ActionKind, PlayerAction
from .level import Color, LevelSpec, NodeKind, SpawnSpec


class SemState(str, enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


class Phase(str, enum.Enum):
    EDIT = "edit"
    RUNNING = "running"
    TERMINAL = "terminal"


class Outcome(str, enum.Enum):
    SUCCESS = "success"
    COLLISION = "collision"
    WRONG_EXIT = "wrong_exit"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class ArrowState:
    arrow_id: str
    color: Color
    node: str
    delivered: bool = False


@dataclass(frozen=True)
class BoardState:
    level_id: str
    tick: int = 0
    arrows: tuple[ArrowState, ...] = ()
    semaphores: dict[str, SemState] = field(default_factory=dict)
    signals: dict[str, frozenset[str]] = field(default_factory=dict)
    pending_spawns: tuple[SpawnSpec, ...] = ()
    phase: Phase = Phase.EDIT
    outcome: Optional[Outcome] = None
    idle_ticks: int = 0


def initial_state(level: LevelSpec) -> BoardState:
    """The pristine edit-phase board: empty placements, full spawn schedule."""
    return BoardState(
        level_id=level.level_id,
        pending_spawns=tuple(sorted(level.spawn_schedule, key=lambda s: (s.tick, s.arrow_id))),
    )


def _require_edit(state: BoardState, action: PlayerAction) -> None:
    if state.phase is not Phase.EDIT:
        raise ValidationError(
            f"action {action.kind.value} requires edit phase, board is {state.phase.value}"
        )


def apply_action(level: LevelSpec, state: BoardState, action: PlayerAction) -> BoardState:
    """Apply one player action to an edit-phase board; returns the new state.

    Placement rules: semaphores go on sem_eligible edges and start closed;
    signals go on signal_eligible nodes; links connect an existing signal to
    an existing semaphore. Removing a semaphore also severs its links.
    StartTest and SubmitSolution flip the phase to running (test and
    verification runs always operate on copies of the edit board).
    """
    _require_edit(state, action)
    kind = action.kind

    if kind in (ActionKind.START_TEST, ActionKind.SUBMIT_SOLUTION):
        return replace(state, phase=Phase.RUNNING)

    if kind is ActionKind.RESET_BOARD:
        return initial_state(level)

    sems = dict(state.semaphores)
    signals = dict(state.signals)

    if kind is ActionKind.PLACE_SEMAPHORE or kind is ActionKind.REMOVE_SEMAPHORE:
        edge_id = action.target
        if edge_id is None:
            raise ValidationError(f"{kind.value} requires an edge target", field="target")
        edge = level.edge_by_id.get(edge_id)
        if edge is None:
            raise ValidationError(f"unknown edge {edge_id!r}", field="target")
        if kind is ActionKind.PLACE_SEMAPHORE:
            if not edge.sem_eligible:
                raise ValidationError(f"edge {edge_id!r} is not semaphore-eligible", field="target")
            if edge_id in sems:
                raise ValidationError(f"edge {edge_id!r} already carries a semaphore", field="target")
            sems[edge_id] = SemState.CLOSED
        else:
            if edge_id not in sems:
                raise ValidationError(f"no semaphore on edge {edge_id!r}", field="target")
            del sems[edge_id]
            signals = {
                node: links - {edge_id} for node, links in signals.items()
            }
        return replace(state, semaphores=sems, signals=signals)

    if kind is ActionKind.PLACE_SIGNAL or kind is ActionKind.REMOVE_SIGNAL:
        node_id = action.target
        if node_id is None:
            raise ValidationError(f"{kind.value} requires a node target", field="target")
        node = level.node_by_id.get(node_id)
        if node is None:
            raise ValidationError(f"unknown node {node_id!r}", field="target")
        if kind is ActionKind.PLACE_SIGNAL:
            if not node.signal_eligible:
                raise ValidationError(f"node {node_id!r} is not signal-eligible", field="target")
            if node_id in signals:
                raise ValidationError(f"node {node_id!r} already carries a signal", field="target")
            signals[node_id] = frozenset()
        else:
            if node_id not in signals:
                raise ValidationError(f"no signal on node {node_id!r}", field="target")
            del signals[node_id]
        return replace(state, signals=signals)

    if kind is ActionKind.LINK_SIGNAL or kind is ActionKind.UNLINK_SIGNAL:
        if action.link is None:
            raise ValidationError(f"{kind.value} requires a link pair", field="link")
        node_id, edge_id = action.link.node, action.link.edge
        if node_id not in signals:
            raise ValidationError(f"no signal on node {node_id!r}", field="link")
        if kind is ActionKind.LINK_SIGNAL:
            if edge_id not in sems:
                raise ValidationError(f"no semaphore on edge {edge_id!r}", field="link")
            if edge_id in signals[node_id]:
                raise ValidationError(f"signal {node_id!r} already linked to {edge_id!r}", field="link")
            signals[node_id] = signals[node_id] | {edge_id}
        else:
            if edge_id not in signals[node_id]:
                raise ValidationError(f"signal {node_id!r} has no link to {edge_id!r}", field="link")
            signals[node_id] = signals[node_id] - {edge_id}
        return replace(state, signals=signals)

    raise ValidationError(f"unhandled action kind {kind!r}")


def board_to_wire(state: BoardState) -> dict:
    """Plain-dict form used for canonical serialization and hashing.

    List orders are fixed here (arrows by id, spawns by tick then id,
    link sets sorted) so equal values always produce equal bytes.
    """
    return {
        "arrows": [
            {
                "arrow_id": a.arrow_id,
                "color": a.color.value,
                "delivered": a.delivered,
                "node": a.node,
            }
            for a in sorted(state.arrows, key=lambda a: a.arrow_id)
        ],
        "idle_ticks": state.idle_ticks,
        "level_id": state.level_id,
        "outcome": state.outcome.value if state.outcome is not None else None,
        "pending_spawns": [
            {
                "arrow_id": s.arrow_id,
                "color": s.color.value,
                "spawn_node": s.spawn_node,
                "tick": s.tick,
            }
            for s in sorted(state.pending_spawns, key=lambda s: (s.tick, s.arrow_id))
        ],
        "phase": state.phase.value,
        "semaphores": {edge: st.value for edge, st in state.semaphores.items()},
        "signals": {node: sorted(links) for node, links in state.signals.items()},
        "tick": state.tick,
    }


def board_from_wire(raw: dict) -> BoardState:
    try:
        return BoardState(
            level_id=str(raw["level_id"]),
            tick=int(raw["tick"]),
            arrows=tuple(
                ArrowState(
                    arrow_id=str(a["arrow_id"]),
                    color=Color(a["color"]),
                    node=str(a["node"]),
                    delivered=bool(a["delivered"]),
                )
                for a in raw["arrows"]
            ),
            semaphores={str(e): SemState(s) for e, s in raw["semaphores"].items()},
            signals={str(n): frozenset(str(e) for e in links) for n, links in raw["signals"].items()},
            pending_spawns=tuple(
                SpawnSpec(
                    tick=int(s["tick"]),
                    spawn_node=str(s["spawn_node"]),
                    color=Color(s["color"]),
                    arrow_id=str(s["arrow_id"]),
                )
                for s in raw["pending_spawns"]
            ),
            phase=Phase(raw["phase"]),
            outcome=Outcome(raw["outcome"]) if raw.get("outcome") is not None else None,
            idle_ticks=int(raw.get("idle_ticks", 0)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"malformed board state: {exc}")


def occupant_map(state: BoardState) -> dict[str, ArrowState]:
    """node id -> the undelivered arrow sitting on it."""
    occ: dict[str, ArrowState] = {}
    for arrow in state.arrows:
        if not arrow.delivered:
            occ[arrow.node] = arrow
    return occ


def validate_board(level: LevelSpec, state: BoardState) -> list[str]:
    """Structural invariants: occupancy, eligibility, outcome/phase pairing."""
    findings: list[str] = []
    seen_nodes: set[str] = set()
    for arrow in state.arrows:
        if arrow.delivered:
            continue
        if arrow.node in seen_nodes:
            findings.append(f"two undelivered arrows on node {arrow.node!r}")
        seen_nodes.add(arrow.node)
    for edge_id in state.semaphores:
        edge = level.edge_by_id.get(edge_id)
        if edge is None or not edge.sem_eligible:
            findings.append(f"semaphore on ineligible edge {edge_id!r}")
    for node_id in state.signals:
        node = level.node_by_id.get(node_id)
        if node is None or not node.signal_eligible:
            findings.append(f"signal on ineligible node {node_id!r}")
    if (state.outcome is not None) != (state.phase is Phase.TERMINAL):
        findings.append("outcome must be present iff phase is terminal")
    return findings


__all__ = [
    "ArrowState",
    "BoardState",
    "NodeKind",
    "Outcome",
    "Phase",
    "SemState",
    "apply_action",
    "board_from_wire",
    "board_to_wire",
    "initial_state",
    "occupant_map",
    "validate_board",
]
