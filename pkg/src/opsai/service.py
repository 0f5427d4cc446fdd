"""The service layer: one object that owns storage, levels, and defaults.

Both the HTTP surface and the embedded CLI mode call through here, so the
two transports cannot drift. Nothing in this class holds per-session state
between calls; everything rereads storage.
"""

from __future__ import annotations

import json
import time
from dataclasses import replace
from pathlib import Path
from typing import Optional

from . import analytics
from .canonical import event_from_line
from .config import ServiceConfig
from .engine.board import BoardState, SemState, board_to_wire, initial_state
from .engine.level import LevelSpec
from .engine.sim import RunResult, SimConfig, VerifyResult, run_test, verify_solution
from .errors import ValidationError
from .finalize import finalize_session, reindex
from .levels import LevelRegistry, level_to_wire
from .model import GameEvent, is_session_id, new_session_id
from .storage.records import QueryFilter, ReferenceEntry, SessionMeta, StorageConfig
from .storage.store import LogStore


def placements_from_wire(level: LevelSpec, raw: Optional[dict]) -> BoardState:
    """Build an edit-phase board from {semaphores, signals} wire form."""
    state = initial_state(level)
    if not raw:
        return state
    unknown = set(raw) - {"semaphores", "signals"}
    if unknown:
        raise ValidationError(f"unknown placement keys: {sorted(unknown)}")
    semaphores: dict[str, SemState] = {}
    for edge_id, value in (raw.get("semaphores") or {}).items():
        edge = level.edge_by_id.get(edge_id)
        if edge is None:
            raise ValidationError(f"unknown edge {edge_id!r}", field="semaphores")
        if not edge.sem_eligible:
            raise ValidationError(f"edge {edge_id!r} is not semaphore-eligible", field="semaphores")
        try:
            semaphores[edge_id] = SemState(value)
        except ValueError:
            raise ValidationError(f"semaphore state must be open or closed, got {value!r}")
    signals: dict[str, frozenset[str]] = {}
    for node_id, links in (raw.get("signals") or {}).items():
        node = level.node_by_id.get(node_id)
        if node is None:
            raise ValidationError(f"unknown node {node_id!r}", field="signals")
        if not node.signal_eligible:
            raise ValidationError(f"node {node_id!r} is not signal-eligible", field="signals")
        linkset = frozenset(str(e) for e in links)
        for edge_id in sorted(linkset):
            if edge_id not in semaphores:
                raise ValidationError(
                    f"signal {node_id!r} links edge {edge_id!r} which has no semaphore",
                    field="signals",
                )
        signals[node_id] = linkset
    return replace(state, semaphores=semaphores, signals=signals)


def run_result_to_wire(result: RunResult) -> dict:
    from .canonical import system_to_wire

    return {
        "events": [system_to_wire(ev) for ev in result.events],
        "final_state": board_to_wire(result.final_state),
        "outcome": result.outcome.value,
        "ticks": result.ticks,
    }


def verify_result_to_wire(result: VerifyResult) -> dict:
    return {
        "per_seed": list(result.per_seed),
        "seeds_passed": result.seeds_passed,
        "seeds_run": result.seeds_run,
        "solved": result.solved,
    }


class SessionService:
    def __init__(self, store: LogStore, levels: LevelRegistry, config: ServiceConfig):
        self.store = store
        self.levels = levels
        self.config = config

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "SessionService":
        storage = StorageConfig(
            backend=config.backend,
            root=None if config.storage_root is None else Path(config.storage_root),
            index_backend=config.index_backend,
        )
        levels = (
            LevelRegistry.from_dir(config.levels_dir)
            if config.levels_dir
            else LevelRegistry.builtin()
        )
        return cls(LogStore(storage), levels, config)

    # -- lifecycle -----------------------------------------------------------

    def create_session(
        self,
        player_id: str,
        level_id: str,
        session_id: Optional[str] = None,
        started_at: Optional[int] = None,
    ) -> SessionMeta:
        if not player_id or len(player_id) > 64:
            raise ValidationError("player_id must be 1..64 chars", field="player_id")
        self.levels.get(level_id)  # 404 on unknown level
        if session_id is None:
            session_id = new_session_id()
        elif not is_session_id(session_id):
            raise ValidationError("session_id must be 32 lowercase hex chars", field="session_id")
        if started_at is None:
            started_at = int(time.time() * 1000)
        elif started_at <= 0:
            raise ValidationError("started_at must be > 0", field="started_at")
        meta = SessionMeta(
            session_id=session_id,
            player_id=player_id,
            level_id=level_id,
            started_at=started_at,
            schema_version=1,
        )
        self.store.create_session(meta)
        return meta

    def append_events(self, session_id: str, events: list[GameEvent]) -> int:
        """Durably append a contiguous batch; returns the last accepted seq."""
        self.store.append_segment(session_id, events)
        return events[-1].seq

    def append_ndjson(self, session_id: str, payload: bytes) -> int:
        lines = [ln for ln in payload.decode("utf-8").splitlines() if ln.strip()]
        if not lines:
            raise ValidationError("empty event batch")
        events = [event_from_line(ln, where=f"line {i}") for i, ln in enumerate(lines)]
        return self.append_events(session_id, events)

    def finalize(self, session_id: str) -> ReferenceEntry:
        meta = self.store.session_meta(session_id)
        level = self.levels.get(meta.level_id)
        return finalize_session(self.store, level, session_id)

    # -- retrieval -----------------------------------------------------------

    def get_log_wire(self, session_id: str) -> dict:
        data = self.store.get_log_bytes(session_id)
        return json.loads(data.decode("utf-8"))

    def query(self, qf: QueryFilter) -> list[ReferenceEntry]:
        return self.store.query_references(qf)

    def analytics_payload(self, session_id: str, k: Optional[int] = None) -> dict:
        payload = analytics.build_payload(
            self.store,
            session_id,
            k=self.config.peer_k if k is None else k,
            theta=self.config.support_theta,
        )
        return payload.to_wire()

    def level_wire(self, level_id: str) -> dict:
        return level_to_wire(self.levels.get(level_id))

    def reindex(self):
        return reindex(self.store, self.levels)

    # -- simulation ----------------------------------------------------------

    def sim_config(self, level: LevelSpec, overrides: Optional[dict] = None) -> SimConfig:
        base = {
            "stall_probability": self.config.stall_probability,
            "max_ticks": self.config.max_ticks,
            "deadlock_window": self.config.deadlock_window,
            "verify_seeds": self.config.verify_seeds,
            "base_seed": 0,
        }
        base.update({k: v for k, v in level.defaults.items() if k in base})
        if overrides:
            unknown = set(overrides) - set(base)
            if unknown:
                raise ValidationError(f"unknown sim config keys: {sorted(unknown)}")
            base.update({k: v for k, v in overrides.items() if v is not None})
        return SimConfig(**base)

    def simulate(
        self,
        level_id: str,
        placements: Optional[dict],
        seed: int,
        cfg_overrides: Optional[dict] = None,
    ) -> RunResult:
        level = self.levels.get(level_id)
        board = placements_from_wire(level, placements)
        return run_test(level, board, seed, self.sim_config(level, cfg_overrides))

    def verify(
        self,
        level_id: str,
        placements: Optional[dict],
        cfg_overrides: Optional[dict] = None,
    ) -> VerifyResult:
        level = self.levels.get(level_id)
        board = placements_from_wire(level, placements)
        return verify_solution(level, board, self.sim_config(level, cfg_overrides))
