"""Two-tier log store: bulk session objects plus a lightweight query index.

Live sessions accumulate append-only NDJSON segments; finalization compacts
them into one immutable canonical log object and emits the reference entry.
Reference queries never read the bulk side (the backends' counters prove
it in tests).
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Optional

from ..canonical import canonical_json_bytes, event_from_line, event_to_line
from ..errors import ConflictError, IntegrityError, NotFoundError, ValidationError
from ..model import GameEvent
from .backends import FilesystemObjectStore, MemoryObjectStore, ObjectStore
from .index import MemoryReferenceIndex, ReferenceIndex, SqliteReferenceIndex
from .records import (
    QueryFilter,
    ReferenceEntry,
    SessionMeta,
    StorageConfig,
    log_key,
    meta_key,
    segment_key,
)

import json


class LogStore:
    def __init__(self, config: StorageConfig):
        self.config = config
        self.objects: ObjectStore
        self.index: ReferenceIndex
        if config.backend == "memory":
            self.objects = MemoryObjectStore()
        else:
            self.objects = FilesystemObjectStore(config.root)
        if config.index_backend == "memory" or config.backend == "memory":
            self.index = MemoryReferenceIndex()
        else:
            self.index = SqliteReferenceIndex(config.root / "index" / "references.sqlite3")
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    @contextmanager
    def session_lock(self, session_id: str):
        with self._locks_guard:
            lock = self._locks.setdefault(session_id, threading.Lock())
        with lock:
            yield

    # -- session registry ---------------------------------------------------

    def create_session(self, meta: SessionMeta) -> None:
        try:
            self.objects.put(meta_key(meta.session_id), canonical_json_bytes(meta.to_wire()))
        except ConflictError:
            raise ConflictError(f"session {meta.session_id} already exists", code="session_exists")

    def session_meta(self, session_id: str) -> SessionMeta:
        try:
            raw = self.objects.get(meta_key(session_id))
        except NotFoundError:
            raise NotFoundError(f"session {session_id} not found")
        return SessionMeta.from_wire(json.loads(raw))

    def _write_meta(self, meta: SessionMeta) -> None:
        self.objects.put(meta_key(meta.session_id), canonical_json_bytes(meta.to_wire()), overwrite=True)

    def mark_finalized(self, session_id: str) -> None:
        meta = self.session_meta(session_id)
        if not meta.finalized:
            self._write_meta(SessionMeta(**{**meta.__dict__, "finalized": True}))

    def list_session_ids(self) -> list[str]:
        ids = set()
        for key in self.objects.list_keys("sessions/"):
            parts = key.split("/")
            if len(parts) >= 3 and parts[0] == "sessions":
                ids.add(parts[1])
        return sorted(ids)

    # -- segments -----------------------------------------------------------

    def _segment_numbers(self, session_id: str) -> list[int]:
        prefix = f"sessions/{session_id}/segments/"
        numbers = []
        for key in self.objects.list_keys(prefix):
            name = key.rsplit("/", 1)[-1]
            if name.endswith(".ndjson"):
                try:
                    numbers.append(int(name[: -len(".ndjson")]))
                except ValueError:
                    continue
        return sorted(numbers)

    def _segment_tail(self, session_id: str, numbers: list[int]) -> tuple[int, Optional[int]]:
        """(next expected seq, last t_ms) derived from the newest segment."""
        if not numbers:
            return 0, None
        last = self.objects.get(segment_key(session_id, numbers[-1]))
        lines = last.decode("utf-8").splitlines()
        event = event_from_line(lines[-1], where=f"segments/{numbers[-1]}")
        return event.seq + 1, event.t_ms

    def append_segment(self, session_id: str, batch: list[GameEvent]) -> int:
        """Persist one batch as the next immutable segment; atomic per batch."""
        if not batch:
            raise ValidationError("empty event batch")
        with self.session_lock(session_id):
            meta = self.session_meta(session_id)
            if meta.finalized:
                raise ConflictError(f"session {session_id} is finalized", code="finalized")
            numbers = self._segment_numbers(session_id)
            expected, last_t = self._segment_tail(session_id, numbers)
            prev_t = last_t if last_t is not None else meta.started_at
            for event in batch:
                if event.seq != expected:
                    raise ConflictError(
                        f"expected seq {expected}, got {event.seq}", code="seq_gap"
                    )
                if event.t_ms < prev_t:
                    raise ValidationError(
                        f"t_ms decreases at seq {event.seq}", seq=event.seq
                    )
                expected += 1
                prev_t = event.t_ms
            n = numbers[-1] + 1 if numbers else 0
            data = b"".join(event_to_line(ev) for ev in batch)
            self.objects.put(segment_key(session_id, n), data)
            return n

    def read_events(self, session_id: str) -> list[GameEvent]:
        """Concatenate all segments; numbering gaps are integrity failures."""
        numbers = self._segment_numbers(session_id)
        if numbers != list(range(len(numbers))):
            missing = sorted(set(range(len(numbers))) - set(numbers))
            raise IntegrityError(
                f"session {session_id}: segment numbering gap (missing {missing})"
            )
        events: list[GameEvent] = []
        for n in numbers:
            data = self.objects.get(segment_key(session_id, n))
            for line in data.decode("utf-8").splitlines():
                if line:
                    events.append(event_from_line(line, where=f"segments/{n}"))
        return events

    # -- canonical log objects ----------------------------------------------

    def log_exists(self, session_id: str) -> bool:
        return self.objects.exists(log_key(session_id))

    def put_log_bytes(self, session_id: str, data: bytes) -> str:
        key = log_key(session_id)
        self.objects.put(key, data)
        return key

    def get_log_bytes(self, session_id: str) -> bytes:
        try:
            return self.objects.get(log_key(session_id))
        except NotFoundError:
            raise NotFoundError(f"no stored log for session {session_id}")

    # -- reference index ----------------------------------------------------

    def put_reference(self, entry: ReferenceEntry, upsert: bool = False) -> None:
        self.index.put(entry, upsert=upsert)

    def get_reference(self, session_id: str) -> Optional[ReferenceEntry]:
        return self.index.get(session_id)

    def query_references(self, qf: QueryFilter) -> list[ReferenceEntry]:
        return self.index.query(qf)

    def quarantine(self, session_id: str, reason: str) -> None:
        self.index.quarantine(session_id, reason)

    def quarantined(self) -> dict[str, str]:
        return self.index.quarantined()
