"""Canonical wire format: serialization, validation, and hashing.

One byte form rules them all: JSON with lexicographically sorted keys, no
insignificant whitespace, UTF-8, integers in decimal, ids as strings,
enrichment bytes base64. These exact bytes are what gets hashed, stored,
and golden-tested, so equal values must always serialize identically
regardless of construction order.
"""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass

from ._kernels import fnv1a64
from .engine.board import BoardState, board_from_wire, board_to_wire
from .errors import ParseError, ValidationError
from .model import (
    MUTATING_KINDS,
    SCHEMA_VERSION,
    ActionKind,
    BoardSnapshot,
    EDGE_TARGET_KINDS,
    Enrichment,
    GameEvent,
    LINK_KINDS,
    MAX_ID_LEN,
    NODE_TARGET_KINDS,
    PlayerAction,
    SessionHeader,
    SessionLog,
    SignalLink,
    SystemEvent,
    SystemKind,
    is_session_id,
)

U64_MAX = (1 << 64) - 1

OUTCOME_VALUES = ("success", "collision", "wrong_exit", "timeout")

# Exact detail schema per system event kind: field -> validator.
_DETAIL_SCHEMAS: dict[SystemKind, dict[str, str]] = {
    SystemKind.TEST_STARTED: {"seed": "u64"},
    SystemKind.TEST_RESULT: {"outcome": "outcome", "seed": "u64", "ticks": "nat"},
    SystemKind.COLLISION: {"arrow_ids": "str_list", "node_id": "str", "tick": "nat"},
    SystemKind.WRONG_EXIT: {"arrow_ids": "str_list", "node_id": "str", "tick": "nat"},
    SystemKind.DEADLOCK_TIMEOUT: {"tick": "nat"},
    SystemKind.DELIVERED: {"arrow_id": "str", "node_id": "str", "tick": "nat"},
    SystemKind.SOLUTION_VERIFIED: {"seeds_passed": "nat", "seeds_run": "nat"},
}


def canonical_json_bytes(value) -> bytes:
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    ).encode("utf-8")


def canonical_state_bytes(state: BoardState) -> bytes:
    return canonical_json_bytes(board_to_wire(state))


def canonical_state_hash(state: BoardState) -> int:
    """64-bit FNV-1a over the canonical board bytes; process-independent."""
    return fnv1a64(canonical_state_bytes(state))


# ---------------------------------------------------------------------------
# value <-> wire dict


def action_to_wire(action: PlayerAction) -> dict:
    return {
        "kind": action.kind.value,
        "link": (
            {"edge": action.link.edge, "node": action.link.node}
            if action.link is not None
            else None
        ),
        "seed": action.seed,
        "target": action.target,
        "type": "action",
    }


def system_to_wire(event: SystemEvent) -> dict:
    return {"detail": event.detail, "kind": event.kind.value, "type": "system"}


def event_to_wire(event: GameEvent) -> dict:
    body = (
        action_to_wire(event.body)
        if isinstance(event.body, PlayerAction)
        else system_to_wire(event.body)
    )
    return {"body": body, "seq": event.seq, "t_ms": event.t_ms}


def snapshot_to_wire(snap: BoardSnapshot) -> dict:
    return {
        "at_seq": snap.at_seq,
        "state": board_to_wire(snap.state),
        "state_hash": snap.state_hash,
    }


def session_to_wire(log: SessionLog) -> dict:
    return {
        "enrichments": [
            {
                "bytes": base64.standard_b64encode(e.data).decode("ascii"),
                "media_type": e.media_type,
                "name": e.name,
            }
            for e in log.enrichments
        ],
        "events": [event_to_wire(ev) for ev in log.events],
        "finalized": log.finalized,
        "header": {
            "level_id": log.header.level_id,
            "player_id": log.header.player_id,
            "schema_version": log.header.schema_version,
            "session_id": log.header.session_id,
            "started_at": log.header.started_at,
        },
        "snapshots": [snapshot_to_wire(s) for s in log.snapshots],
    }


def _expect_keys(raw: dict, keys: set[str], where: str) -> None:
    got = set(raw)
    if got != keys:
        missing = sorted(keys - got)
        extra = sorted(got - keys)
        parts = []
        if missing:
            parts.append(f"missing {missing}")
        if extra:
            parts.append(f"unexpected {extra}")
        raise ValidationError(f"{where}: {', '.join(parts)}", field=where)


def body_from_wire(raw: dict, where: str):
    if not isinstance(raw, dict) or "type" not in raw:
        raise ValidationError(f"{where}: body must be an object with a type", field=where)
    if raw["type"] == "action":
        _expect_keys(raw, {"kind", "link", "seed", "target", "type"}, where)
        try:
            kind = ActionKind(raw["kind"])
        except ValueError:
            raise ValidationError(f"{where}: unknown action kind {raw['kind']!r}", field=where)
        link = raw["link"]
        if link is not None:
            _expect_keys(link, {"edge", "node"}, f"{where}.link")
            link = SignalLink(node=str(link["node"]), edge=str(link["edge"]))
        target = raw["target"]
        seed = raw["seed"]
        return PlayerAction(
            kind=kind,
            target=str(target) if target is not None else None,
            link=link,
            seed=int(seed) if seed is not None else None,
        )
    if raw["type"] == "system":
        _expect_keys(raw, {"detail", "kind", "type"}, where)
        try:
            kind = SystemKind(raw["kind"])
        except ValueError:
            raise ValidationError(f"{where}: unknown system kind {raw['kind']!r}", field=where)
        if not isinstance(raw["detail"], dict):
            raise ValidationError(f"{where}: detail must be an object", field=where)
        return SystemEvent(kind=kind, detail=raw["detail"])
    raise ValidationError(f"{where}: unknown body type {raw['type']!r}", field=where)


def event_from_wire(raw: dict, where: str) -> GameEvent:
    _expect_keys(raw, {"body", "seq", "t_ms"}, where)
    return GameEvent(
        seq=int(raw["seq"]), t_ms=int(raw["t_ms"]), body=body_from_wire(raw["body"], where)
    )


def session_from_wire(raw: dict) -> SessionLog:
    _expect_keys(raw, {"enrichments", "events", "finalized", "header", "snapshots"}, "session")
    header_raw = raw["header"]
    _expect_keys(
        header_raw,
        {"level_id", "player_id", "schema_version", "session_id", "started_at"},
        "header",
    )
    header = SessionHeader(
        session_id=str(header_raw["session_id"]),
        player_id=str(header_raw["player_id"]),
        level_id=str(header_raw["level_id"]),
        started_at=int(header_raw["started_at"]),
        schema_version=int(header_raw["schema_version"]),
    )
    events = tuple(
        event_from_wire(ev, f"events[{i}]") for i, ev in enumerate(raw["events"])
    )
    snapshots = []
    for i, snap in enumerate(raw["snapshots"]):
        _expect_keys(snap, {"at_seq", "state", "state_hash"}, f"snapshots[{i}]")
        snapshots.append(
            BoardSnapshot(
                at_seq=int(snap["at_seq"]),
                state_hash=int(snap["state_hash"]),
                state=board_from_wire(snap["state"]),
            )
        )
    enrichments = []
    for i, enr in enumerate(raw["enrichments"]):
        _expect_keys(enr, {"bytes", "media_type", "name"}, f"enrichments[{i}]")
        try:
            data = base64.standard_b64decode(enr["bytes"])
        except (binascii.Error, ValueError):
            raise ValidationError(f"enrichments[{i}]: bytes is not valid base64")
        enrichments.append(
            Enrichment(name=str(enr["name"]), media_type=str(enr["media_type"]), data=data)
        )
    if not isinstance(raw["finalized"], bool):
        raise ValidationError("finalized must be a boolean", field="finalized")
    return SessionLog(
        header=header,
        events=events,
        snapshots=tuple(snapshots),
        enrichments=tuple(enrichments),
        finalized=raw["finalized"],
    )


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Finding:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


def _check_detail(kind: SystemKind, detail: dict, where: str, out: list[Finding]) -> None:
    schema = _DETAIL_SCHEMAS[kind]
    if set(detail) != set(schema):
        out.append(
            Finding(where, f"detail keys {sorted(detail)} do not match {sorted(schema)}")
        )
        return
    for name, rule in schema.items():
        value = detail[name]
        if rule == "u64":
            ok = isinstance(value, int) and not isinstance(value, bool) and 0 <= value <= U64_MAX
        elif rule == "nat":
            ok = isinstance(value, int) and not isinstance(value, bool) and value >= 0
        elif rule == "str":
            ok = isinstance(value, str)
        elif rule == "str_list":
            ok = isinstance(value, list) and all(isinstance(v, str) for v in value)
        elif rule == "outcome":
            ok = value in OUTCOME_VALUES
        else:  # pragma: no cover
            ok = False
        if not ok:
            out.append(Finding(where, f"detail field {name!r} fails {rule} check"))
    if kind is SystemKind.SOLUTION_VERIFIED:
        sp, sr = detail.get("seeds_passed"), detail.get("seeds_run")
        if isinstance(sp, int) and isinstance(sr, int) and sp > sr:
            out.append(Finding(where, "seeds_passed exceeds seeds_run"))


def _check_action(action: PlayerAction, where: str, out: list[Finding]) -> None:
    kind = action.kind
    needs_target = kind in EDGE_TARGET_KINDS or kind in NODE_TARGET_KINDS
    if needs_target and action.target is None:
        out.append(Finding(where, f"{kind.value} requires a target"))
    if not needs_target and action.target is not None:
        out.append(Finding(where, f"{kind.value} must not carry a target"))
    if (kind in LINK_KINDS) != (action.link is not None):
        out.append(Finding(where, f"{kind.value}: link present iff kind links"))
    if kind is ActionKind.START_TEST:
        if action.seed is None:
            out.append(Finding(where, "start_test requires a seed"))
        elif not 0 <= action.seed <= U64_MAX:
            out.append(Finding(where, "seed out of 64-bit range"))
    elif action.seed is not None:
        out.append(Finding(where, f"{kind.value} must not carry a seed"))


def validate_session(log: SessionLog) -> list[Finding]:
    """Every violated invariant, in document order; empty means valid."""
    out: list[Finding] = []
    h = log.header
    if not is_session_id(h.session_id):
        out.append(Finding("header.session_id", "must be 32 lowercase hex chars"))
    if not h.player_id or len(h.player_id) > MAX_ID_LEN:
        out.append(Finding("header.player_id", f"must be 1..{MAX_ID_LEN} chars"))
    if not h.level_id or len(h.level_id) > MAX_ID_LEN:
        out.append(Finding("header.level_id", f"must be 1..{MAX_ID_LEN} chars"))
    if h.started_at <= 0:
        out.append(Finding("header.started_at", "must be > 0"))
    if h.schema_version != SCHEMA_VERSION:
        out.append(Finding("header.schema_version", f"unknown schema_version {h.schema_version}"))

    prev_seq = -1
    prev_t = None
    for i, ev in enumerate(log.events):
        where = f"events[{i}]"
        if ev.seq != prev_seq + 1:
            out.append(Finding(where, f"gap at seq {prev_seq + 1}: found seq {ev.seq}"))
        prev_seq = ev.seq
        if prev_t is None:
            if ev.t_ms < h.started_at:
                out.append(Finding(where, f"t_ms {ev.t_ms} precedes started_at {h.started_at}"))
        elif ev.t_ms < prev_t:
            out.append(Finding(where, f"t_ms decreases at seq {ev.seq}"))
        prev_t = ev.t_ms
        if isinstance(ev.body, PlayerAction):
            _check_action(ev.body, where, out)
        else:
            _check_detail(ev.body.kind, ev.body.detail, where, out)

    seqs = {ev.seq for ev in log.events}
    prev_at = -1
    for i, snap in enumerate(log.snapshots):
        where = f"snapshots[{i}]"
        if snap.at_seq <= prev_at:
            out.append(Finding(where, "snapshots must be strictly ordered by at_seq"))
        prev_at = snap.at_seq
        if snap.at_seq not in seqs:
            out.append(Finding(where, f"at_seq {snap.at_seq} references no event"))
        if not 0 <= snap.state_hash <= U64_MAX:
            out.append(Finding(where, "state_hash out of 64-bit range"))
        elif snap.state_hash != canonical_state_hash(snap.state):
            out.append(Finding(where, "stale state_hash: does not match state"))

    if log.finalized:
        snap_seqs = {s.at_seq for s in log.snapshots}
        for ev in log.events:
            if isinstance(ev.body, PlayerAction) and ev.body.kind in MUTATING_KINDS:
                if ev.seq not in snap_seqs:
                    out.append(
                        Finding(
                            f"events[{ev.seq}]",
                            f"finalized log lacks snapshot after mutating action at seq {ev.seq}",
                        )
                    )

    names = set()
    for i, enr in enumerate(log.enrichments):
        if not enr.name:
            out.append(Finding(f"enrichments[{i}]", "name is empty"))
        if enr.name in names:
            out.append(Finding(f"enrichments[{i}]", f"duplicate enrichment name {enr.name!r}"))
        names.add(enr.name)
    return out


# ---------------------------------------------------------------------------
# top-level operations


def serialize_session(log: SessionLog) -> bytes:
    """Canonical bytes for a valid session; equal logs yield equal bytes."""
    findings = validate_session(log)
    if findings:
        first = findings[0]
        raise ValidationError(str(first), field=first.location)
    return canonical_json_bytes(session_to_wire(log))


def deserialize_session(data: bytes | str) -> SessionLog:
    """Inverse of serialize_session; rejects malformed or invalid input."""
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(f"malformed JSON at byte {offset}: {exc.msg}", offset=offset)
    if not isinstance(raw, dict):
        raise ParseError("session must be a JSON object")
    log = session_from_wire(raw)
    findings = validate_session(log)
    if findings:
        first = findings[0]
        raise ValidationError(str(first), field=first.location)
    return log


def event_to_line(event: GameEvent) -> bytes:
    """One canonical NDJSON line (newline-terminated)."""
    return canonical_json_bytes(event_to_wire(event)) + b"\n"


def event_from_line(line: bytes | str, where: str = "event") -> GameEvent:
    text = line.decode("utf-8") if isinstance(line, (bytes, bytearray)) else line
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{where}: malformed JSON: {exc.msg}", offset=exc.pos)
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: event must be a JSON object")
    return event_from_wire(raw, where)
