"""Game-agnostic session data model: the value types every layer shares.

A session is an event-sourced record: a header, a contiguous sequence of
timestamped events (player actions interleaved with system events), board
snapshots after every board-mutating action, and optional opaque enrichment
blobs. All types are frozen; operations elsewhere are pure functions.
"""

from __future__ import annotations

import enum
import uuid
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .engine.board import BoardState

SCHEMA_VERSION = 1

MAX_ID_LEN = 64


class ActionKind(str, enum.Enum):
    PLACE_SEMAPHORE = "place_semaphore"
    REMOVE_SEMAPHORE = "remove_semaphore"
    PLACE_SIGNAL = "place_signal"
    REMOVE_SIGNAL = "remove_signal"
    LINK_SIGNAL = "link_signal"
    UNLINK_SIGNAL = "unlink_signal"
    START_TEST = "start_test"
    SUBMIT_SOLUTION = "submit_solution"
    RESET_BOARD = "reset_board"


# Kinds that mutate the edit-phase board and therefore get a snapshot.
MUTATING_KINDS = frozenset(
    {
        ActionKind.PLACE_SEMAPHORE,
        ActionKind.REMOVE_SEMAPHORE,
        ActionKind.PLACE_SIGNAL,
        ActionKind.REMOVE_SIGNAL,
        ActionKind.LINK_SIGNAL,
        ActionKind.UNLINK_SIGNAL,
        ActionKind.RESET_BOARD,
    }
)

# Kinds whose target is an edge id / a node id.
EDGE_TARGET_KINDS = frozenset({ActionKind.PLACE_SEMAPHORE, ActionKind.REMOVE_SEMAPHORE})
NODE_TARGET_KINDS = frozenset({ActionKind.PLACE_SIGNAL, ActionKind.REMOVE_SIGNAL})
LINK_KINDS = frozenset({ActionKind.LINK_SIGNAL, ActionKind.UNLINK_SIGNAL})

# One letter per kind, in enum order; the alphabet of action-trace tokens.
TOKEN_BY_KIND: dict[ActionKind, str] = dict(
    zip(ActionKind, "PRGXLUTSB")
)
KIND_BY_TOKEN: dict[str, ActionKind] = {v: k for k, v in TOKEN_BY_KIND.items()}


class SystemKind(str, enum.Enum):
    TEST_STARTED = "test_started"
    TEST_RESULT = "test_result"
    COLLISION = "collision"
    WRONG_EXIT = "wrong_exit"
    DEADLOCK_TIMEOUT = "deadlock_timeout"
    DELIVERED = "delivered"
    SOLUTION_VERIFIED = "solution_verified"


@dataclass(frozen=True)
class SignalLink:
    """A player-made connection: signal at ``node`` controls semaphore on ``edge``."""

    node: str
    edge: str


@dataclass(frozen=True)
class PlayerAction:
    kind: ActionKind
    target: Optional[str] = None
    link: Optional[SignalLink] = None
    seed: Optional[int] = None


@dataclass(frozen=True)
class SystemEvent:
    kind: SystemKind
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GameEvent:
    seq: int
    t_ms: int
    body: PlayerAction | SystemEvent


@dataclass(frozen=True)
class SessionHeader:
    session_id: str
    player_id: str
    level_id: str
    started_at: int
    schema_version: int = SCHEMA_VERSION


@dataclass(frozen=True)
class BoardSnapshot:
    at_seq: int
    state_hash: int
    state: "BoardState"


@dataclass(frozen=True)
class Enrichment:
    name: str
    media_type: str
    data: bytes


@dataclass(frozen=True)
class SessionLog:
    header: SessionHeader
    events: tuple[GameEvent, ...] = ()
    snapshots: tuple[BoardSnapshot, ...] = ()
    enrichments: tuple[Enrichment, ...] = ()
    finalized: bool = False


@dataclass(frozen=True)
class DerivedMetrics:
    action_count: int
    action_counts_by_kind: dict[ActionKind, int]
    test_run_count: int
    first_test_seq: Optional[int]
    solved: bool
    duration_ms: int
    board_state_trajectory_len: int
    final_placements: frozenset[str]


def new_session_id() -> str:
    return uuid.uuid4().hex


def is_session_id(value: str) -> bool:
    """Canonical session id: exactly 32 lowercase hex chars."""
    if len(value) != 32:
        return False
    return all(c in "0123456789abcdef" for c in value)
