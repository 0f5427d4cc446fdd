"""Level parsing and structural validation."""

import json

import pytest

from opsai.engine.level import load_level, parse_level, validate_level
from opsai.errors import ParseError, ValidationError


def level_dict(**overrides):
    base = {
        "level_id": "t",
        "nodes": [
            {"id": "s", "kind": "spawn"},
            {"id": "a", "kind": "track", "signal_eligible": True},
            {"id": "x", "kind": "exit", "exit_color": "red"},
        ],
        "edges": [
            {"id": "e1", "from": "s", "to": "a", "colors": ["red"], "sem_eligible": True},
            {"id": "e2", "from": "a", "to": "x", "colors": ["red"]},
        ],
        "spawn_schedule": [{"tick": 0, "spawn_node": "s", "color": "red", "arrow_id": "a1"}],
    }
    base.update(overrides)
    return base


def test_straightline_fixture_shape(registry):
    level = registry.get("straightline")
    assert len(level.nodes) == 4
    assert len(level.edges) == 3
    assert [s.arrow_id for s in level.spawn_schedule] == ["a1"]


def test_valid_synthetic_level():
    level = load_level(json.dumps(level_dict()))
    assert level.routes[("s", list(level.routes)[0][1])].id == "e1"


def test_ambiguous_routing_rejected():
    d = level_dict()
    d["edges"].append({"id": "e3", "from": "a", "to": "x", "colors": ["red"]})
    with pytest.raises(ValidationError, match="ambiguous routing"):
        load_level(json.dumps(d))


def test_unreachable_color_rejected():
    d = level_dict()
    d["spawn_schedule"].append({"tick": 0, "spawn_node": "s", "color": "blue", "arrow_id": "a2"})
    with pytest.raises(ValidationError, match="unreachable color"):
        load_level(json.dumps(d))


def test_spawn_node_kind_enforced():
    d = level_dict()
    d["spawn_schedule"][0]["spawn_node"] = "a"
    with pytest.raises(ValidationError, match="kind track"):
        load_level(json.dumps(d))


def test_duplicate_ids_flagged():
    d = level_dict()
    d["nodes"].append({"id": "a", "kind": "track"})
    d["edges"].append({"id": "e1", "from": "s", "to": "x", "colors": ["blue"]})
    findings = validate_level(parse_level(json.dumps(d)))
    assert any("duplicate node id" in f for f in findings)
    assert any("duplicate edge id" in f for f in findings)


def test_exit_color_pairing():
    d = level_dict()
    d["nodes"][2] = {"id": "x", "kind": "exit"}  # exit without color
    findings = validate_level(parse_level(json.dumps(d)))
    assert any("lacks exit_color" in f for f in findings)


def test_parse_error_has_location():
    with pytest.raises(ParseError) as err:
        parse_level(b'{"nodes": [,]}')
    assert err.value.offset is not None


def test_unknown_edge_endpoint():
    d = level_dict()
    d["edges"][0]["to"] = "nowhere"
    findings = validate_level(parse_level(json.dumps(d)))
    assert any("unknown node 'nowhere'" in f for f in findings)
