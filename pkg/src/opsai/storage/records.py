"""Storage-tier records: reference entries, query filters, configuration."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..errors import ValidationError

U64_MAX = (1 << 64) - 1

BACKENDS = ("filesystem", "memory", "remote-object-store")
INDEX_BACKENDS = ("embedded-kv", "memory")


def meta_key(session_id: str) -> str:
    return f"sessions/{session_id}/meta.json"


def segment_key(session_id: str, n: int) -> str:
    return f"sessions/{session_id}/segments/{n}.ndjson"


def log_key(session_id: str) -> str:
    return f"sessions/{session_id}/log.json"


@dataclass(frozen=True)
class SessionMeta:
    """Registration record for a live or finalized session."""

    session_id: str
    player_id: str
    level_id: str
    started_at: int
    schema_version: int
    finalized: bool = False

    def to_wire(self) -> dict:
        return {
            "finalized": self.finalized,
            "level_id": self.level_id,
            "player_id": self.player_id,
            "schema_version": self.schema_version,
            "session_id": self.session_id,
            "started_at": self.started_at,
        }

    @classmethod
    def from_wire(cls, raw: dict) -> "SessionMeta":
        return cls(
            session_id=str(raw["session_id"]),
            player_id=str(raw["player_id"]),
            level_id=str(raw["level_id"]),
            started_at=int(raw["started_at"]),
            schema_version=int(raw["schema_version"]),
            finalized=bool(raw["finalized"]),
        )


@dataclass(frozen=True)
class ReferenceEntry:
    """Lightweight index record: everything queries need, nothing more."""

    session_id: str
    object_key: str
    player_id: str
    level_id: str
    started_at: int
    duration_ms: int
    solved: bool
    action_count: int
    test_run_count: int
    trace_signature: int
    action_token_digest: str
    schema_version: int

    def to_wire(self) -> dict:
        return {
            "action_count": self.action_count,
            "action_token_digest": self.action_token_digest,
            "duration_ms": self.duration_ms,
            "level_id": self.level_id,
            "object_key": self.object_key,
            "player_id": self.player_id,
            "schema_version": self.schema_version,
            "session_id": self.session_id,
            "solved": self.solved,
            "started_at": self.started_at,
            "test_run_count": self.test_run_count,
            "trace_signature": self.trace_signature,
        }

    @classmethod
    def from_wire(cls, raw: dict) -> "ReferenceEntry":
        return cls(
            session_id=str(raw["session_id"]),
            object_key=str(raw["object_key"]),
            player_id=str(raw["player_id"]),
            level_id=str(raw["level_id"]),
            started_at=int(raw["started_at"]),
            duration_ms=int(raw["duration_ms"]),
            solved=bool(raw["solved"]),
            action_count=int(raw["action_count"]),
            test_run_count=int(raw["test_run_count"]),
            trace_signature=int(raw["trace_signature"]),
            action_token_digest=str(raw["action_token_digest"]),
            schema_version=int(raw["schema_version"]),
        )


@dataclass(frozen=True)
class QueryFilter:
    """Criteria evaluated purely against the reference index.

    Requires at least one clause unless list_all is set; results are ordered
    newest first (started_at desc, session_id asc as the tie-breaker) and
    truncated at limit.
    """

    player_id: Optional[str] = None
    level_id: Optional[str] = None
    solved: Optional[bool] = None
    started_at_min: Optional[int] = None
    started_at_max: Optional[int] = None
    action_count_min: Optional[int] = None
    action_count_max: Optional[int] = None
    limit: int = 100
    list_all: bool = False

    def __post_init__(self):
        if self.limit < 1:
            raise ValidationError("limit must be >= 1", field="limit")
        if not self.list_all and not self.clauses():
            raise ValidationError("filter needs at least one clause or list_all")

    def clauses(self) -> dict:
        named = (
            "player_id",
            "level_id",
            "solved",
            "started_at_min",
            "started_at_max",
            "action_count_min",
            "action_count_max",
        )
        return {n: getattr(self, n) for n in named if getattr(self, n) is not None}

    def matches(self, entry: ReferenceEntry) -> bool:
        if self.player_id is not None and entry.player_id != self.player_id:
            return False
        if self.level_id is not None and entry.level_id != self.level_id:
            return False
        if self.solved is not None and entry.solved != self.solved:
            return False
        if self.started_at_min is not None and entry.started_at < self.started_at_min:
            return False
        if self.started_at_max is not None and entry.started_at > self.started_at_max:
            return False
        if self.action_count_min is not None and entry.action_count < self.action_count_min:
            return False
        if self.action_count_max is not None and entry.action_count > self.action_count_max:
            return False
        return True


ALL_SESSIONS = QueryFilter(list_all=True, limit=sys.maxsize)


@dataclass(frozen=True)
class StorageConfig:
    backend: str = "filesystem"
    root: Optional[Path] = None
    index_backend: str = "embedded-kv"

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValidationError(f"unknown backend {self.backend!r}", field="backend")
        if self.backend == "remote-object-store":
            raise ValidationError(
                "remote-object-store backend is not available in this build", field="backend"
            )
        if self.index_backend not in INDEX_BACKENDS:
            raise ValidationError(
                f"unknown index backend {self.index_backend!r}", field="index_backend"
            )
        if self.backend == "filesystem" and self.root is None:
            raise ValidationError("filesystem backend requires a root path", field="root")
