"""Session finalization: segments in, canonical artifact + reference out.

Finalization rebuilds the event list from the append-only segments, replays
every board-mutating action through the engine to produce (or verify) the
snapshot trail, derives the learning metrics, embeds them under a `derived`
key in the stored log object, and writes the reference entry. The whole
routine is idempotent: a second call returns the identical entry and leaves
exactly one log object behind. Integrity failures quarantine the session in
the index rather than deleting anything.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from ._kernels import FNV64_OFFSET, fnv1a64
from .canonical import (
    canonical_json_bytes,
    canonical_state_hash,
    session_from_wire,
    session_to_wire,
    validate_session,
)
from .engine.board import apply_action, initial_state
from .engine.level import LevelSpec
from .errors import ConflictError, IntegrityError, ValidationError
from .model import (
    ActionKind,
    BoardSnapshot,
    DerivedMetrics,
    GameEvent,
    MUTATING_KINDS,
    PlayerAction,
    SessionHeader,
    SessionLog,
    SystemKind,
    TOKEN_BY_KIND,
)
from .storage.records import ReferenceEntry, log_key
from .storage.store import LogStore


def action_tokens(log: SessionLog) -> str:
    """One letter per player action, in event order; system events excluded."""
    return "".join(
        TOKEN_BY_KIND[ev.body.kind] for ev in log.events if isinstance(ev.body, PlayerAction)
    )


def compute_metrics(log: SessionLog) -> DerivedMetrics:
    """Derive per-session metrics purely from events and snapshots."""
    counts = {kind: 0 for kind in ActionKind}
    first_test_seq: Optional[int] = None
    solved = False
    for ev in log.events:
        body = ev.body
        if isinstance(body, PlayerAction):
            counts[body.kind] += 1
            if body.kind is ActionKind.START_TEST and first_test_seq is None:
                first_test_seq = ev.seq
        elif body.kind is SystemKind.SOLUTION_VERIFIED:
            runs = body.detail.get("seeds_run", 0)
            if runs >= 1 and body.detail.get("seeds_passed") == runs:
                solved = True
    duration = log.events[-1].t_ms - log.header.started_at if log.events else 0
    final_placements = (
        frozenset(log.snapshots[-1].state.semaphores) if log.snapshots else frozenset()
    )
    return DerivedMetrics(
        action_count=sum(counts.values()),
        action_counts_by_kind=counts,
        test_run_count=counts[ActionKind.START_TEST],
        first_test_seq=first_test_seq,
        solved=solved,
        duration_ms=duration,
        board_state_trajectory_len=len(log.snapshots),
        final_placements=final_placements,
    )


def trace_signature(log: SessionLog) -> int:
    """FNV-1a fold over the snapshot hashes (8-byte big-endian each)."""
    if not log.snapshots:
        return FNV64_OFFSET
    return fnv1a64(b"".join(s.state_hash.to_bytes(8, "big") for s in log.snapshots))


def metrics_to_wire(metrics: DerivedMetrics) -> dict:
    return {
        "action_count": metrics.action_count,
        "action_counts_by_kind": {
            kind.value: metrics.action_counts_by_kind.get(kind, 0) for kind in ActionKind
        },
        "board_state_trajectory_len": metrics.board_state_trajectory_len,
        "duration_ms": metrics.duration_ms,
        "final_placements": sorted(metrics.final_placements),
        "first_test_seq": metrics.first_test_seq,
        "solved": metrics.solved,
        "test_run_count": metrics.test_run_count,
    }


def metrics_from_wire(raw: dict) -> DerivedMetrics:
    counts = {ActionKind(k): int(v) for k, v in raw["action_counts_by_kind"].items()}
    return DerivedMetrics(
        action_count=int(raw["action_count"]),
        action_counts_by_kind=counts,
        test_run_count=int(raw["test_run_count"]),
        first_test_seq=(
            int(raw["first_test_seq"]) if raw["first_test_seq"] is not None else None
        ),
        solved=bool(raw["solved"]),
        duration_ms=int(raw["duration_ms"]),
        board_state_trajectory_len=int(raw["board_state_trajectory_len"]),
        final_placements=frozenset(str(e) for e in raw["final_placements"]),
    )


@dataclass(frozen=True)
class StoredLog:
    """A finalized log object: the session plus its embedded derivations."""

    log: SessionLog
    metrics: DerivedMetrics
    trace_signature: int
    replay_verified: bool


def stored_log_bytes(log: SessionLog, metrics: DerivedMetrics, signature: int) -> bytes:
    wire = session_to_wire(log)
    wire["derived"] = {
        "metrics": metrics_to_wire(metrics),
        "replay_verified": True,
        "trace_signature": signature,
    }
    return canonical_json_bytes(wire)


def parse_stored_log(data: bytes) -> StoredLog:
    raw = json.loads(data.decode("utf-8"))
    derived = raw.pop("derived", None)
    log = session_from_wire(raw)
    if derived is None:
        raise IntegrityError("stored log lacks the derived section")
    return StoredLog(
        log=log,
        metrics=metrics_from_wire(derived["metrics"]),
        trace_signature=int(derived["trace_signature"]),
        replay_verified=bool(derived["replay_verified"]),
    )


def replay_snapshots(level: LevelSpec, events: list[GameEvent]) -> tuple[BoardSnapshot, ...]:
    """Re-derive the snapshot trail by applying board-mutating actions."""
    state = initial_state(level)
    snapshots = []
    for ev in events:
        if isinstance(ev.body, PlayerAction) and ev.body.kind in MUTATING_KINDS:
            try:
                state = apply_action(level, state, ev.body)
            except ValidationError as exc:
                raise IntegrityError(
                    f"replay failed at seq {ev.seq}: {exc.detail}", seq=ev.seq
                )
            snapshots.append(
                BoardSnapshot(at_seq=ev.seq, state_hash=canonical_state_hash(state), state=state)
            )
    return tuple(snapshots)


def verify_replay(level: LevelSpec, stored: StoredLog) -> None:
    """Re-replay a stored log; any diverging snapshot hash is an integrity error."""
    fresh = replay_snapshots(level, list(stored.log.events))
    existing = stored.log.snapshots
    if len(fresh) != len(existing):
        raise IntegrityError(
            f"replay produced {len(fresh)} snapshots, stored log has {len(existing)}"
        )
    for got, want in zip(fresh, existing):
        if got.at_seq != want.at_seq or got.state_hash != want.state_hash:
            raise IntegrityError(
                f"replay hash mismatch at at_seq {want.at_seq}", seq=want.at_seq
            )


def build_reference(session_id: str, stored: StoredLog) -> ReferenceEntry:
    """Summary fields recomputed from the stored log, never trusted blindly."""
    log = stored.log
    metrics = compute_metrics(log)
    return ReferenceEntry(
        session_id=session_id,
        object_key=log_key(session_id),
        player_id=log.header.player_id,
        level_id=log.header.level_id,
        started_at=log.header.started_at,
        duration_ms=metrics.duration_ms,
        solved=metrics.solved,
        action_count=metrics.action_count,
        test_run_count=metrics.test_run_count,
        trace_signature=trace_signature(log),
        action_token_digest=action_tokens(log),
        schema_version=log.header.schema_version,
    )


def load_stored_log(store: LogStore, session_id: str) -> StoredLog:
    return parse_stored_log(store.get_log_bytes(session_id))


def finalize_session(store: LogStore, level: LevelSpec, session_id: str) -> ReferenceEntry:
    """Compact, verify, derive, persist; safe to call any number of times."""
    with store.session_lock(session_id):
        meta = store.session_meta(session_id)

        if meta.finalized:
            stored = load_stored_log(store, session_id)
            verify_replay(level, stored)
            entry = store.get_reference(session_id)
            if entry is None:  # crashed between log write and reference write
                entry = build_reference(session_id, stored)
                store.put_reference(entry)
            return entry

        events = _read_events_or_quarantine(store, session_id)
        if not events:
            raise ConflictError(f"session {session_id} has no events", code="empty_session")

        header = SessionHeader(
            session_id=meta.session_id,
            player_id=meta.player_id,
            level_id=meta.level_id,
            started_at=meta.started_at,
            schema_version=meta.schema_version,
        )
        try:
            snapshots = replay_snapshots(level, events)
        except IntegrityError as exc:
            store.quarantine(session_id, exc.detail)
            raise

        log = SessionLog(
            header=header, events=tuple(events), snapshots=snapshots, finalized=True
        )
        findings = validate_session(log)
        if findings:
            store.quarantine(session_id, str(findings[0]))
            raise IntegrityError(f"finalization invariants violated: {findings[0]}")

        metrics = compute_metrics(log)
        data = stored_log_bytes(log, metrics, trace_signature(log))

        if store.log_exists(session_id):
            if store.get_log_bytes(session_id) != data:
                store.quarantine(session_id, "existing log object diverges from rebuild")
                raise IntegrityError(
                    f"session {session_id}: stored log does not match rebuilt artifact"
                )
        else:
            store.put_log_bytes(session_id, data)

        entry = build_reference(session_id, StoredLog(log, metrics, trace_signature(log), True))
        existing = store.get_reference(session_id)
        if existing is None:
            store.put_reference(entry)
        elif existing != entry:
            store.quarantine(session_id, "index entry diverges from stored log")
            raise IntegrityError(f"session {session_id}: reference entry mismatch")
        store.mark_finalized(session_id)
        return entry


def _read_events_or_quarantine(store: LogStore, session_id: str) -> list[GameEvent]:
    try:
        return store.read_events(session_id)
    except IntegrityError as exc:
        store.quarantine(session_id, exc.detail)
        raise


@dataclass(frozen=True)
class ReindexDiff:
    session_id: str
    kind: str  # "missing", "mismatch", "orphan"
    detail: str


def reindex(store: LogStore, levels) -> list[ReindexDiff]:
    """Rebuild every reference entry from the stored logs and report diffs.

    Also repairs: missing entries are inserted, mismatched ones replaced,
    entries without a backing log removed.
    """
    diffs: list[ReindexDiff] = []
    seen: set[str] = set()
    for session_id in store.list_session_ids():
        if not store.log_exists(session_id):
            continue
        stored = load_stored_log(store, session_id)
        verify_replay(levels.get(stored.log.header.level_id), stored)
        rebuilt = build_reference(session_id, stored)
        seen.add(session_id)
        current = store.get_reference(session_id)
        if current is None:
            diffs.append(ReindexDiff(session_id, "missing", "no index entry for stored log"))
            store.put_reference(rebuilt)
        elif current != rebuilt:
            changed = sorted(
                name
                for name in rebuilt.__dataclass_fields__
                if getattr(current, name) != getattr(rebuilt, name)
            )
            diffs.append(ReindexDiff(session_id, "mismatch", f"fields differ: {changed}"))
            store.put_reference(rebuilt, upsert=True)
    for session_id in store.index.all_ids():
        if session_id not in seen:
            diffs.append(ReindexDiff(session_id, "orphan", "index entry without stored log"))
            store.index.delete(session_id)
    return diffs
