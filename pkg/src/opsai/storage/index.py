"""Reference index backends: the queryable side of the two-tier store.

Queries run exclusively here. Secondary access paths (player, level,
started_at) are real sqlite indexes, not scans of the log database.
"""

from __future__ import annotations

import sqlite3
import threading
from pathlib import Path
from typing import Optional

from ..errors import ConflictError
from .records import QueryFilter, ReferenceEntry

_SCHEMA = """
CREATE TABLE IF NOT EXISTS refs (
    session_id TEXT PRIMARY KEY,
    object_key TEXT NOT NULL,
    player_id TEXT NOT NULL,
    level_id TEXT NOT NULL,
    started_at INTEGER NOT NULL,
    duration_ms INTEGER NOT NULL,
    solved INTEGER NOT NULL,
    action_count INTEGER NOT NULL,
    test_run_count INTEGER NOT NULL,
    trace_signature TEXT NOT NULL,
    action_token_digest TEXT NOT NULL,
    schema_version INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS refs_player ON refs (player_id, started_at DESC);
CREATE INDEX IF NOT EXISTS refs_level ON refs (level_id, started_at DESC);
CREATE INDEX IF NOT EXISTS refs_started ON refs (started_at DESC);
CREATE TABLE IF NOT EXISTS quarantine (
    session_id TEXT PRIMARY KEY,
    reason TEXT NOT NULL
);
"""


class ReferenceIndex:
    def put(self, entry: ReferenceEntry, upsert: bool = False) -> None:
        raise NotImplementedError

    def get(self, session_id: str) -> Optional[ReferenceEntry]:
        raise NotImplementedError

    def delete(self, session_id: str) -> None:
        raise NotImplementedError

    def query(self, qf: QueryFilter) -> list[ReferenceEntry]:
        raise NotImplementedError

    def all_ids(self) -> list[str]:
        raise NotImplementedError

    def quarantine(self, session_id: str, reason: str) -> None:
        raise NotImplementedError

    def quarantined(self) -> dict[str, str]:
        raise NotImplementedError


def _order_key(entry: ReferenceEntry):
    return (-entry.started_at, entry.session_id)


class MemoryReferenceIndex(ReferenceIndex):
    def __init__(self):
        self._entries: dict[str, ReferenceEntry] = {}
        self._quarantine: dict[str, str] = {}
        self._lock = threading.Lock()

    def put(self, entry: ReferenceEntry, upsert: bool = False) -> None:
        with self._lock:
            if entry.session_id in self._entries and not upsert:
                raise ConflictError(
                    f"reference for {entry.session_id} already exists", code="immutable"
                )
            self._entries[entry.session_id] = entry

    def get(self, session_id: str) -> Optional[ReferenceEntry]:
        with self._lock:
            return self._entries.get(session_id)

    def delete(self, session_id: str) -> None:
        with self._lock:
            self._entries.pop(session_id, None)

    def query(self, qf: QueryFilter) -> list[ReferenceEntry]:
        with self._lock:
            hits = [e for e in self._entries.values() if qf.list_all or qf.matches(e)]
        hits.sort(key=_order_key)
        return hits[: qf.limit]

    def all_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._entries)

    def quarantine(self, session_id: str, reason: str) -> None:
        with self._lock:
            self._quarantine[session_id] = reason

    def quarantined(self) -> dict[str, str]:
        with self._lock:
            return dict(self._quarantine)


class SqliteReferenceIndex(ReferenceIndex):
    """Embedded key-value index; one file under {root}/index/."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(str(self.path), check_same_thread=False)
        self._lock = threading.Lock()
        with self._lock:
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self) -> None:
        self._conn.close()

    @staticmethod
    def _row_to_entry(row) -> ReferenceEntry:
        return ReferenceEntry(
            session_id=row[0],
            object_key=row[1],
            player_id=row[2],
            level_id=row[3],
            started_at=row[4],
            duration_ms=row[5],
            solved=bool(row[6]),
            action_count=row[7],
            test_run_count=row[8],
            trace_signature=int(row[9]),
            action_token_digest=row[10],
            schema_version=row[11],
        )

    _COLUMNS = (
        "session_id, object_key, player_id, level_id, started_at, duration_ms, "
        "solved, action_count, test_run_count, trace_signature, action_token_digest, "
        "schema_version"
    )

    def put(self, entry: ReferenceEntry, upsert: bool = False) -> None:
        verb = "INSERT OR REPLACE" if upsert else "INSERT"
        params = (
            entry.session_id,
            entry.object_key,
            entry.player_id,
            entry.level_id,
            entry.started_at,
            entry.duration_ms,
            int(entry.solved),
            entry.action_count,
            entry.test_run_count,
            # 64-bit unsigned: stored as decimal text, sqlite ints are signed
            str(entry.trace_signature),
            entry.action_token_digest,
            entry.schema_version,
        )
        with self._lock:
            try:
                self._conn.execute(
                    f"{verb} INTO refs ({self._COLUMNS}) VALUES (?,?,?,?,?,?,?,?,?,?,?,?)",
                    params,
                )
                self._conn.commit()
            except sqlite3.IntegrityError:
                raise ConflictError(
                    f"reference for {entry.session_id} already exists", code="immutable"
                )

    def get(self, session_id: str) -> Optional[ReferenceEntry]:
        with self._lock:
            row = self._conn.execute(
                f"SELECT {self._COLUMNS} FROM refs WHERE session_id = ?", (session_id,)
            ).fetchone()
        return self._row_to_entry(row) if row else None

    def delete(self, session_id: str) -> None:
        with self._lock:
            self._conn.execute("DELETE FROM refs WHERE session_id = ?", (session_id,))
            self._conn.commit()

    def query(self, qf: QueryFilter) -> list[ReferenceEntry]:
        where = []
        params: list = []
        if qf.player_id is not None:
            where.append("player_id = ?")
            params.append(qf.player_id)
        if qf.level_id is not None:
            where.append("level_id = ?")
            params.append(qf.level_id)
        if qf.solved is not None:
            where.append("solved = ?")
            params.append(int(qf.solved))
        if qf.started_at_min is not None:
            where.append("started_at >= ?")
            params.append(qf.started_at_min)
        if qf.started_at_max is not None:
            where.append("started_at <= ?")
            params.append(qf.started_at_max)
        if qf.action_count_min is not None:
            where.append("action_count >= ?")
            params.append(qf.action_count_min)
        if qf.action_count_max is not None:
            where.append("action_count <= ?")
            params.append(qf.action_count_max)
        sql = f"SELECT {self._COLUMNS} FROM refs"
        if where:
            sql += " WHERE " + " AND ".join(where)
        sql += " ORDER BY started_at DESC, session_id ASC LIMIT ?"
        params.append(min(qf.limit, 2**62))
        with self._lock:
            rows = self._conn.execute(sql, params).fetchall()
        return [self._row_to_entry(r) for r in rows]

    def all_ids(self) -> list[str]:
        with self._lock:
            rows = self._conn.execute("SELECT session_id FROM refs ORDER BY session_id").fetchall()
        return [r[0] for r in rows]

    def quarantine(self, session_id: str, reason: str) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO quarantine (session_id, reason) VALUES (?, ?)",
                (session_id, reason),
            )
            self._conn.commit()

    def quarantined(self) -> dict[str, str]:
        with self._lock:
            rows = self._conn.execute("SELECT session_id, reason FROM quarantine").fetchall()
        return {r[0]: r[1] for r in rows}
