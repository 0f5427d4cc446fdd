"""Wire-format tests: golden bytes, round-trips, canonical determinism."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opsai.canonical import (
    canonical_state_hash,
    deserialize_session,
    serialize_session,
    validate_session,
)
from opsai.engine.board import ArrowState, BoardState, Phase, SemState
from opsai.engine.level import Color, SpawnSpec
from opsai.errors import ParseError, ValidationError
from opsai.model import (
    ActionKind,
    BoardSnapshot,
    Enrichment,
    GameEvent,
    PlayerAction,
    SessionHeader,
    SessionLog,
    SignalLink,
    SystemEvent,
    SystemKind,
)

import independent as ind

GOLDEN = Path(__file__).parent / "golden"

BASE_T = 1_700_000_000_000


def header(n: int = 1, **kw) -> SessionHeader:
    defaults = dict(
        session_id=f"{n:032x}",
        player_id="p-alice",
        level_id="straightline",
        started_at=BASE_T,
        schema_version=1,
    )
    defaults.update(kw)
    return SessionHeader(**defaults)


def action_event(seq: int, kind: ActionKind, **kw) -> GameEvent:
    return GameEvent(seq=seq, t_ms=BASE_T + 100 * (seq + 1), body=PlayerAction(kind, **kw))


# --- golden files ----------------------------------------------------------


def test_golden_minimal_bytes():
    log = SessionLog(header=header(1))
    assert serialize_session(log) == (GOLDEN / "session_minimal.json").read_bytes()
    # and the committed file is exactly what the independent assembler builds
    assert ind.golden_minimal() == (GOLDEN / "session_minimal.json").read_bytes()


def test_golden_three_event_bytes():
    log = SessionLog(
        header=header(2, player_id="p-bob"),
        events=(
            action_event(0, ActionKind.PLACE_SEMAPHORE, target="e2"),
            action_event(1, ActionKind.START_TEST, seed=7),
            GameEvent(
                seq=2,
                t_ms=BASE_T + 300,
                body=SystemEvent(
                    SystemKind.TEST_RESULT, {"outcome": "success", "seed": 7, "ticks": 2}
                ),
            ),
        ),
    )
    data = serialize_session(log)
    assert data == (GOLDEN / "session_three_event.json").read_bytes()
    assert ind.golden_three_event() == data


def test_golden_rich_bytes(registry):
    from opsai.engine import apply_action, initial_state

    level = registry.get("straightline")
    state = apply_action(
        level, initial_state(level), PlayerAction(ActionKind.PLACE_SEMAPHORE, target="e2")
    )
    log = SessionLog(
        header=header(3, player_id="p-carol"),
        events=(action_event(0, ActionKind.PLACE_SEMAPHORE, target="e2"),),
        snapshots=(
            BoardSnapshot(at_seq=0, state_hash=canonical_state_hash(state), state=state),
        ),
        enrichments=(
            Enrichment(name="gaze", media_type="application/octet-stream", data=b"\x00\x01\x02"),
        ),
        finalized=True,
    )
    data = serialize_session(log)
    assert data == (GOLDEN / "session_rich.json").read_bytes()
    assert ind.golden_rich() == data


# --- explicit examples -----------------------------------------------------


def test_minimal_roundtrip_identity():
    log = SessionLog(header=header(4))
    assert deserialize_session(serialize_session(log)) == log


def test_canonical_fixed_point():
    log = SessionLog(header=header(5), events=(action_event(0, ActionKind.RESET_BOARD),))
    once = serialize_session(log)
    assert serialize_session(deserialize_session(once)) == once


def test_seq_gap_rejected():
    log = SessionLog(
        header=header(6),
        events=(
            action_event(0, ActionKind.START_TEST, seed=1),
            GameEvent(seq=2, t_ms=BASE_T + 300, body=PlayerAction(ActionKind.RESET_BOARD)),
        ),
    )
    with pytest.raises(ValidationError, match="gap at seq 1"):
        serialize_session(log)


def test_decreasing_t_ms_rejected():
    log = SessionLog(
        header=header(7),
        events=(
            GameEvent(seq=0, t_ms=BASE_T + 10, body=PlayerAction(ActionKind.RESET_BOARD)),
            GameEvent(seq=1, t_ms=BASE_T + 5, body=PlayerAction(ActionKind.RESET_BOARD)),
        ),
    )
    with pytest.raises(ValidationError, match="seq 1"):
        serialize_session(log)


def test_malformed_json_reports_byte_offset():
    # The closing brace where a value was expected sits at byte 30.
    with pytest.raises(ParseError) as err:
        deserialize_session(b'{"enrichments": [], "events": }')
    assert err.value.offset == 30


def test_unknown_schema_version_rejected():
    data = (GOLDEN / "session_minimal.json").read_bytes()
    raw = json.loads(data)
    raw["header"]["schema_version"] = 2
    with pytest.raises(ValidationError, match="schema_version"):
        deserialize_session(json.dumps(raw))


def test_construction_order_does_not_change_bytes():
    sems_a = {"e1": SemState.CLOSED, "e2": SemState.OPEN}
    sems_b = {"e2": SemState.OPEN, "e1": SemState.CLOSED}
    mk = lambda sems: BoardState(
        level_id="straightline",
        semaphores=sems,
        signals={"b": frozenset({"e2", "e1"})},
        pending_spawns=(SpawnSpec(0, "spawn", Color.RED, "a1"),),
    )
    assert canonical_state_hash(mk(sems_a)) == canonical_state_hash(mk(sems_b))


# --- generated round-trips ---------------------------------------------------

_ids = st.text(alphabet="abcdefgh123", min_size=1, max_size=8)


def _actions() -> st.SearchStrategy[PlayerAction]:
    def build(kind, target, link_pair, seed):
        if kind in (ActionKind.PLACE_SEMAPHORE, ActionKind.REMOVE_SEMAPHORE,
                    ActionKind.PLACE_SIGNAL, ActionKind.REMOVE_SIGNAL):
            return PlayerAction(kind, target=target)
        if kind in (ActionKind.LINK_SIGNAL, ActionKind.UNLINK_SIGNAL):
            return PlayerAction(kind, link=SignalLink(*link_pair))
        if kind is ActionKind.START_TEST:
            return PlayerAction(kind, seed=seed)
        return PlayerAction(kind)

    return st.builds(
        build,
        st.sampled_from(list(ActionKind)),
        _ids,
        st.tuples(_ids, _ids),
        st.integers(min_value=0, max_value=2**64 - 1),
    )


def _systems() -> st.SearchStrategy[SystemEvent]:
    seeds = st.integers(min_value=0, max_value=2**64 - 1)
    nat = st.integers(min_value=0, max_value=10_000)

    def detail_for(kind, seed, n, outcome, ids, node):
        if kind is SystemKind.TEST_STARTED:
            return {"seed": seed}
        if kind is SystemKind.TEST_RESULT:
            return {"outcome": outcome, "seed": seed, "ticks": n}
        if kind in (SystemKind.COLLISION, SystemKind.WRONG_EXIT):
            return {"arrow_ids": list(ids), "node_id": node, "tick": n}
        if kind is SystemKind.DEADLOCK_TIMEOUT:
            return {"tick": n}
        if kind is SystemKind.DELIVERED:
            return {"arrow_id": ids[0] if ids else "a1", "node_id": node, "tick": n}
        return {"seeds_passed": min(n, 64), "seeds_run": 64}

    return st.builds(
        lambda kind, seed, n, outcome, ids, node: SystemEvent(
            kind, detail_for(kind, seed, n, outcome, ids, node)
        ),
        st.sampled_from(list(SystemKind)),
        seeds,
        nat,
        st.sampled_from(["success", "collision", "wrong_exit", "timeout"]),
        st.lists(_ids, min_size=1, max_size=3),
        _ids,
    )


def _states() -> st.SearchStrategy[BoardState]:
    arrows = st.lists(
        st.builds(
            ArrowState,
            arrow_id=_ids,
            color=st.sampled_from(list(Color)),
            node=_ids,
            delivered=st.booleans(),
        ),
        max_size=3,
        unique_by=lambda a: a.arrow_id,
    )
    return st.builds(
        lambda arrows, tick, sems, signals: BoardState(
            level_id="straightline",
            tick=tick,
            arrows=tuple(sorted(arrows, key=lambda a: a.arrow_id)),
            semaphores=sems,
            signals={k: frozenset(v) for k, v in signals.items()},
            phase=Phase.EDIT,
        ),
        arrows,
        st.integers(min_value=0, max_value=50),
        st.dictionaries(_ids, st.sampled_from(list(SemState)), max_size=3),
        st.dictionaries(_ids, st.lists(_ids, max_size=2), max_size=2),
    )


@st.composite
def session_logs(draw) -> SessionLog:
    n = draw(st.integers(min_value=0, max_value=10))
    bodies = draw(
        st.lists(st.one_of(_actions(), _systems()), min_size=n, max_size=n)
    )
    gaps = draw(st.lists(st.integers(min_value=0, max_value=500), min_size=n, max_size=n))
    events = []
    t = BASE_T
    for seq, (body, gap) in enumerate(zip(bodies, gaps)):
        t += gap
        events.append(GameEvent(seq=seq, t_ms=t, body=body))
    snap_seqs = sorted(draw(st.sets(st.integers(min_value=0, max_value=max(n - 1, 0)))))
    snapshots = []
    if n:
        for at_seq in snap_seqs:
            state = draw(_states())
            snapshots.append(
                BoardSnapshot(at_seq=at_seq, state_hash=canonical_state_hash(state), state=state)
            )
    enrichments = draw(
        st.lists(
            st.builds(
                Enrichment,
                name=_ids,
                media_type=st.just("application/octet-stream"),
                data=st.binary(max_size=16),
            ),
            max_size=2,
            unique_by=lambda e: e.name,
        )
    )
    return SessionLog(
        header=SessionHeader(
            session_id=draw(st.integers(min_value=0, max_value=2**128 - 1)).to_bytes(16, "big").hex(),
            player_id=draw(_ids),
            level_id=draw(_ids),
            started_at=BASE_T,
            schema_version=1,
        ),
        events=tuple(events),
        snapshots=tuple(snapshots),
        enrichments=tuple(enrichments),
        finalized=False,
    )


@settings(max_examples=150, deadline=None)
@given(session_logs())
def test_roundtrip_property(log):
    assert not validate_session(log)
    data = serialize_session(log)
    back = deserialize_session(data)
    assert back == log
    assert serialize_session(back) == data
