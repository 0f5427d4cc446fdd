"""validate_session: one finding per violated invariant, located."""

from __future__ import annotations

from dataclasses import replace

from opsai.canonical import canonical_state_hash, validate_session
from opsai.engine.board import BoardState
from opsai.model import (
    ActionKind,
    BoardSnapshot,
    Enrichment,
    GameEvent,
    PlayerAction,
    SessionHeader,
    SessionLog,
    SystemEvent,
    SystemKind,
)

BASE_T = 1_700_000_000_000


def mk_header(**kw) -> SessionHeader:
    d = dict(
        session_id="ab" * 16,
        player_id="p",
        level_id="straightline",
        started_at=BASE_T,
        schema_version=1,
    )
    d.update(kw)
    return SessionHeader(**d)


def mk_event(seq, kind=ActionKind.RESET_BOARD, t=None, **kw):
    return GameEvent(seq=seq, t_ms=t if t is not None else BASE_T + 10 * (seq + 1),
                     body=PlayerAction(kind, **kw))


def test_valid_minimal_log_empty_report():
    assert validate_session(SessionLog(header=mk_header())) == []


def test_snapshot_without_event_is_one_finding():
    state = BoardState(level_id="straightline")
    log = SessionLog(
        header=mk_header(),
        events=(mk_event(0),),
        snapshots=(
            BoardSnapshot(at_seq=5, state_hash=canonical_state_hash(state), state=state),
        ),
    )
    findings = validate_session(log)
    assert len(findings) == 1
    assert "references no event" in findings[0].message


def test_gap_plus_stale_hash_is_exactly_two_findings():
    state = BoardState(level_id="straightline")
    log = SessionLog(
        header=mk_header(),
        events=(mk_event(0), mk_event(2)),  # gap at seq 1
        snapshots=(BoardSnapshot(at_seq=0, state_hash=12345, state=state),),  # stale hash
    )
    findings = validate_session(log)
    assert len(findings) == 2
    assert any("gap at seq 1" in f.message for f in findings)
    assert any("stale state_hash" in f.message for f in findings)


def test_header_findings_located():
    log = SessionLog(header=mk_header(session_id="XYZ", started_at=0))
    locations = {f.location for f in validate_session(log)}
    assert "header.session_id" in locations
    assert "header.started_at" in locations


def test_action_shape_rules():
    bad = [
        PlayerAction(ActionKind.PLACE_SEMAPHORE),  # missing target
        PlayerAction(ActionKind.START_TEST),  # missing seed
        PlayerAction(ActionKind.RESET_BOARD, target="e1"),  # stray target
        PlayerAction(ActionKind.RESET_BOARD, seed=1),  # stray seed
    ]
    events = tuple(
        GameEvent(seq=i, t_ms=BASE_T + 10 * (i + 1), body=b) for i, b in enumerate(bad)
    )
    findings = validate_session(SessionLog(header=mk_header(), events=events))
    assert len(findings) == 4


def test_system_detail_schema_enforced():
    events = (
        GameEvent(
            seq=0,
            t_ms=BASE_T + 1,
            body=SystemEvent(SystemKind.TEST_RESULT, {"outcome": "success"}),
        ),
        GameEvent(
            seq=1,
            t_ms=BASE_T + 2,
            body=SystemEvent(SystemKind.SOLUTION_VERIFIED, {"seeds_passed": 65, "seeds_run": 64}),
        ),
    )
    findings = validate_session(SessionLog(header=mk_header(), events=events))
    assert any("do not match" in f.message for f in findings)
    assert any("seeds_passed exceeds" in f.message for f in findings)


def test_first_event_before_started_at_flagged():
    log = SessionLog(header=mk_header(), events=(mk_event(0, t=BASE_T - 5),))
    findings = validate_session(log)
    assert len(findings) == 1 and "precedes started_at" in findings[0].message


def test_duplicate_enrichment_names():
    log = SessionLog(
        header=mk_header(),
        enrichments=(
            Enrichment("gaze", "application/octet-stream", b"1"),
            Enrichment("gaze", "application/octet-stream", b"2"),
        ),
    )
    findings = validate_session(log)
    assert len(findings) == 1 and "duplicate enrichment" in findings[0].message


def test_finalized_log_requires_snapshots_for_mutating_actions():
    log = SessionLog(
        header=mk_header(),
        events=(mk_event(0, ActionKind.PLACE_SEMAPHORE, target="e1"),),
        finalized=True,
    )
    findings = validate_session(log)
    assert len(findings) == 1 and "lacks snapshot" in findings[0].message
    assert validate_session(replace(log, finalized=False)) == []
