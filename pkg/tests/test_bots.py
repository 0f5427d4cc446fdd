"""Bot corpus generation: determinism and population mix."""

from opsai.bots import BotProfile, EmbeddedTransport, run_bot, run_fleet
from opsai.storage.records import QueryFilter

from conftest import make_service


def test_identical_profile_and_seed_byte_identical(tmp_path):
    profile = BotProfile(competence=0.5, test_propensity=0.8, seed=4242)
    sids = []
    stores = []
    for name in ("a", "b"):
        service = make_service(tmp_path / name)
        transport = EmbeddedTransport(service)
        sid = run_bot(
            transport,
            "merge",
            "same-player",
            profile,
            service.levels.solution("merge"),
            verify_seeds=8,
        )
        sids.append(sid)
        stores.append(service.store)
    assert sids[0] == sids[1]
    assert stores[0].get_log_bytes(sids[0]) == stores[1].get_log_bytes(sids[1])


def test_different_seeds_differ(tmp_path):
    service = make_service(tmp_path / "store")
    transport = EmbeddedTransport(service)
    solution = service.levels.solution("merge")
    a = run_bot(transport, "merge", "p-a", BotProfile(0.5, 0.8, seed=1), solution, verify_seeds=4)
    b = run_bot(transport, "merge", "p-b", BotProfile(0.5, 0.8, seed=2), solution, verify_seeds=4)
    assert a != b
    assert service.store.get_log_bytes(a) != service.store.get_log_bytes(b)


def test_concurrent_fleet_matches_sequential(tmp_path):
    prof = BotProfile(0.5, 0.7, seed=55)
    ids = {}
    for name, workers in (("seq", 1), ("par", 6)):
        service = make_service(tmp_path / name)
        ids[name] = run_fleet(
            EmbeddedTransport(service),
            "merge",
            12,
            prof,
            service.levels.solution("merge"),
            verify_seeds=8,
            workers=workers,
        )
        ids[name + "_store"] = service.store
    assert ids["seq"] == ids["par"]
    for sid in ids["seq"]:
        assert ids["seq_store"].get_log_bytes(sid) == ids["par_store"].get_log_bytes(sid)


def test_fleet_produces_queryable_mix(tmp_path):
    service = make_service(tmp_path / "store")
    transport = EmbeddedTransport(service)
    ids = run_fleet(
        transport,
        "merge",
        30,
        BotProfile(competence=0.5, test_propensity=0.7, seed=77),
        service.levels.solution("merge"),
        verify_seeds=8,
    )
    assert len(ids) == 30
    entries = service.query(QueryFilter(level_id="merge", limit=1000))
    assert len(entries) == 30
    solved = [e for e in entries if e.solved]
    assert 0 < len(solved) < 30, "competence=0.5 should split the population"
    # every solved bot carries the level's known-good placement
    for e in solved:
        from opsai.finalize import load_stored_log

        stored = load_stored_log(service.store, e.session_id)
        assert "eb" in stored.metrics.final_placements
