"""HTTP surface: endpoint contracts, error codes, statelessness."""

import json
import random

import pytest
from fastapi.testclient import TestClient

from opsai.api import create_app
from opsai.canonical import event_to_line
from opsai.model import ActionKind, GameEvent, PlayerAction

from conftest import make_service

BASE_T = 1_700_000_000_000

DOCUMENTED_CODES = {
    "bad_request",
    "parse_error",
    "validation",
    "not_found",
    "seq_gap",
    "finalized",
    "not_finalized",
    "session_exists",
    "immutable",
    "conflict",
    "empty_session",
    "integrity",
    "invalid_placement",
    "internal",
}


@pytest.fixture()
def client(tmp_path):
    return TestClient(create_app(make_service(tmp_path / "store")))


def ndjson(events):
    return b"".join(event_to_line(e) for e in events)


def actions(start, kinds, t0=BASE_T + 1):
    out = []
    for i, kind in enumerate(kinds):
        target = "eb" if kind in (ActionKind.PLACE_SEMAPHORE, ActionKind.REMOVE_SEMAPHORE) else None
        seed = 1 if kind is ActionKind.START_TEST else None
        out.append(
            GameEvent(
                seq=start + i,
                t_ms=t0 + 10 * (start + i),
                body=PlayerAction(kind, target=target, seed=seed),
            )
        )
    return out


def create(client, level="merge", player="p1", **kw):
    body = {"player_id": player, "level_id": level, "started_at": BASE_T, **kw}
    r = client.post("/v1/sessions", json=body)
    assert r.status_code == 201, r.text
    return r.json()["session_id"]


# --- sessions -----------------------------------------------------------------


def test_create_session_formats(client):
    r = client.post("/v1/sessions", json={"player_id": "p", "level_id": "merge"})
    assert r.status_code == 201
    sid = r.json()["session_id"]
    assert len(sid) == 32 and all(c in "0123456789abcdef" for c in sid)


def test_create_unknown_level_404(client):
    r = client.post("/v1/sessions", json={"player_id": "p", "level_id": "nope"})
    assert r.status_code == 404
    assert r.json()["code"] == "not_found"


def test_create_missing_player_400(client):
    r = client.post("/v1/sessions", json={"level_id": "merge"})
    assert r.status_code == 400


def test_duplicate_session_id_409(client):
    create(client, session_id="9" * 32)
    r = client.post(
        "/v1/sessions",
        json={"player_id": "p", "level_id": "merge", "session_id": "9" * 32},
    )
    assert r.status_code == 409 and r.json()["code"] == "session_exists"


# --- events ---------------------------------------------------------------------


def test_append_batch_and_gap(client):
    sid = create(client)
    batch = actions(0, [ActionKind.PLACE_SEMAPHORE] + [ActionKind.RESET_BOARD] * 4)
    r = client.post(f"/v1/sessions/{sid}/events", content=ndjson(batch))
    assert r.status_code == 200 and r.json() == {"accepted_through_seq": 4}
    # identical replay is a seq conflict, never a silent dedupe
    r2 = client.post(f"/v1/sessions/{sid}/events", content=ndjson(batch))
    assert r2.status_code == 409
    assert r2.json()["code"] == "seq_gap"
    assert "expected seq 5" in r2.json()["detail"]


def test_append_after_finalize_409(client):
    sid = create(client)
    client.post(f"/v1/sessions/{sid}/events", content=ndjson(actions(0, [ActionKind.RESET_BOARD])))
    assert client.post(f"/v1/sessions/{sid}/finalize").status_code == 200
    r = client.post(f"/v1/sessions/{sid}/events", content=ndjson(actions(1, [ActionKind.RESET_BOARD])))
    assert r.status_code == 409 and r.json()["code"] == "finalized"


def test_finalize_idempotent_and_empty(client):
    sid = create(client)
    client.post(f"/v1/sessions/{sid}/events", content=ndjson(actions(0, [ActionKind.PLACE_SEMAPHORE])))
    first = client.post(f"/v1/sessions/{sid}/finalize")
    second = client.post(f"/v1/sessions/{sid}/finalize")
    assert first.status_code == second.status_code == 200
    assert first.json() == second.json()

    empty = create(client, player="p2")
    r = client.post(f"/v1/sessions/{empty}/finalize")
    assert r.status_code == 422 and r.json()["code"] == "empty_session"


# --- queries ----------------------------------------------------------------------


def test_query_delegates_and_reads_no_logs(client):
    ids = []
    for i in range(6):
        sid = create(client, player=f"p{i % 2}", session_id=f"{i:032x}")
        client.post(
            f"/v1/sessions/{sid}/events", content=ndjson(actions(0, [ActionKind.RESET_BOARD]))
        )
        client.post(f"/v1/sessions/{sid}/finalize")
        ids.append(sid)
    service = client.app.state.service
    before = service.store.objects.stats.reads
    r = client.get("/v1/sessions", params={"player": "p0", "level": "merge"})
    assert r.status_code == 200
    assert {e["player_id"] for e in r.json()} == {"p0"}
    assert service.store.objects.stats.reads == before

    r2 = client.get("/v1/sessions", params={"limit": 0})
    assert r2.status_code == 400

    r3 = client.get(f"/v1/sessions/{ids[0]}")
    assert r3.status_code == 200
    assert r3.json()["header"]["session_id"] == ids[0]

    r4 = client.get("/v1/sessions/" + "f" * 32)
    assert r4.status_code == 404


# --- simulation ---------------------------------------------------------------------


def test_simulate_fixture(client):
    r = client.post(
        "/v1/simulate",
        json={"level_id": "straightline", "seed": 1, "cfg": {"stall_probability": 0.0}},
    )
    assert r.status_code == 200
    out = r.json()
    assert out["outcome"] == "success" and out["ticks"] == 2

    r2 = client.post(
        "/v1/simulate",
        json={"level_id": "straightline", "seed": 1, "cfg": {"stall_probability": 1.0}},
    )
    assert r2.json()["outcome"] == "timeout"


def test_simulate_matches_direct_engine_call(client, registry):
    from opsai.engine import initial_state, run_test
    from opsai.engine.sim import SimConfig
    from opsai.service import run_result_to_wire

    r = client.post(
        "/v1/simulate",
        json={"level_id": "merge", "seed": 77, "cfg": {"stall_probability": 0.25}},
    )
    level = registry.get("merge")
    direct = run_test(level, initial_state(level), 77, SimConfig(stall_probability=0.25))
    assert r.json() == json.loads(json.dumps(run_result_to_wire(direct)))


def test_simulate_ineligible_placement_422(client):
    r = client.post(
        "/v1/simulate",
        json={
            "level_id": "merge",
            "seed": 1,
            "placements": {"semaphores": {"ex": "closed"}},
        },
    )
    assert r.status_code == 422
    assert r.json()["code"] == "invalid_placement"
    assert "ex" in r.json()["detail"]


def test_verify_solution_endpoint(client, registry):
    placements = {"semaphores": {"eb": "closed"}, "signals": {"x": ["eb"]}}
    r = client.post(
        "/v1/verify",
        json={"level_id": "merge", "placements": placements, "cfg": {"verify_seeds": 16}},
    )
    assert r.status_code == 200
    out = r.json()
    assert out["solved"] is True and out["seeds_passed"] == out["seeds_run"] == 16


# --- analytics & misc ------------------------------------------------------------------


def test_analytics_endpoint(client):
    sid = create(client)
    client.post(f"/v1/sessions/{sid}/events", content=ndjson(actions(0, [ActionKind.RESET_BOARD])))
    client.post(f"/v1/sessions/{sid}/finalize")
    r = client.get(f"/v1/sessions/{sid}/analytics")
    assert r.status_code == 200
    payload = r.json()
    assert payload["payload_version"] == 1
    assert payload["peers"] == []

    unfinalized = create(client, player="p9")
    client.post(
        f"/v1/sessions/{unfinalized}/events", content=ndjson(actions(0, [ActionKind.RESET_BOARD]))
    )
    r2 = client.get(f"/v1/sessions/{unfinalized}/analytics")
    assert r2.status_code == 409 and r2.json()["code"] == "not_finalized"


def test_get_level(client):
    r = client.get("/v1/levels/straightline")
    assert r.status_code == 200
    assert r.json()["level_id"] == "straightline"
    assert len(r.json()["nodes"]) == 4
    assert client.get("/v1/levels/none").status_code == 404


def test_healthz_touches_no_storage(client):
    service = client.app.state.service
    before = (service.store.objects.stats.reads, service.store.objects.stats.writes)
    r = client.get("/v1/healthz")
    assert r.status_code == 200 and r.json() == {"ok": True}
    assert (service.store.objects.stats.reads, service.store.objects.stats.writes) == before


def test_fuzzed_errors_use_documented_codes(client):
    rng = random.Random(0)
    bodies = [
        b"",
        b"not json",
        b'{"x": 1}',
        json.dumps({"player_id": 5, "level_id": []}).encode(),
        b'{"body": {}, "seq": "x"}',
    ]
    paths = [
        "/v1/sessions",
        "/v1/sessions/zzz/events",
        "/v1/sessions/zzz/finalize",
        "/v1/simulate",
        "/v1/verify",
    ]
    for _ in range(60):
        path = rng.choice(paths)
        r = client.post(path, content=rng.choice(bodies))
        assert r.status_code >= 400
        assert r.json()["code"] in DOCUMENTED_CODES, (path, r.status_code, r.text)
    for path in ("/v1/sessions/zzz", "/v1/levels/zzz", "/v1/sessions?limit=-3", "/v1/nowhere"):
        r = client.get(path)
        assert r.status_code >= 400
        assert r.json()["code"] in DOCUMENTED_CODES, (path, r.text)


def test_two_instances_share_storage(tmp_path):
    """Round-robin lifecycle across two app instances over one root."""
    root = tmp_path / "store"
    a = TestClient(create_app(make_service(root)))
    b = TestClient(create_app(make_service(root)))
    sid = create(a, session_id="5" * 32)
    batch1 = actions(0, [ActionKind.PLACE_SEMAPHORE, ActionKind.RESET_BOARD])
    batch2 = actions(2, [ActionKind.PLACE_SEMAPHORE])
    assert b.post(f"/v1/sessions/{sid}/events", content=ndjson(batch1)).status_code == 200
    assert a.post(f"/v1/sessions/{sid}/events", content=ndjson(batch2)).status_code == 200
    entry_b = b.post(f"/v1/sessions/{sid}/finalize").json()
    entry_a = a.post(f"/v1/sessions/{sid}/finalize").json()
    assert entry_a == entry_b
    assert a.get(f"/v1/sessions/{sid}").json() == b.get(f"/v1/sessions/{sid}").json()
    pa = a.get(f"/v1/sessions/{sid}/analytics").json()
    pb = b.get(f"/v1/sessions/{sid}/analytics").json()
    pa.pop("generated_at"), pb.pop("generated_at")
    assert pa == pb
