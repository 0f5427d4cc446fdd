"""Level definitions: a directed board graph plus an arrow spawn schedule.

A level is valid only if routing is deterministic (per node and color at
most one outgoing edge) and every scheduled arrow can reach an exit of its
color. Both are checked at load time so the simulator never has to decide.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from ..errors import ParseError, ValidationError


class Color(str, enum.Enum):
    RED = "red"
    BLUE = "blue"
    YELLOW = "yellow"
    PURPLE = "purple"


class NodeKind(str, enum.Enum):
    TRACK = "track"
    SPAWN = "spawn"
    EXIT = "exit"


@dataclass(frozen=True)
class NodeSpec:
    id: str
    kind: NodeKind
    signal_eligible: bool = False
    exit_color: Optional[Color] = None


@dataclass(frozen=True)
class EdgeSpec:
    id: str
    src: str
    dst: str
    colors: frozenset[Color]
    sem_eligible: bool = False


@dataclass(frozen=True)
class SpawnSpec:
    tick: int
    spawn_node: str
    color: Color
    arrow_id: str


@dataclass(frozen=True)
class LevelSpec:
    level_id: str
    nodes: tuple[NodeSpec, ...]
    edges: tuple[EdgeSpec, ...]
    spawn_schedule: tuple[SpawnSpec, ...]
    defaults: dict = field(default_factory=dict)

    @cached_property
    def node_by_id(self) -> dict[str, NodeSpec]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def edge_by_id(self) -> dict[str, EdgeSpec]:
        return {e.id: e for e in self.edges}

    @cached_property
    def routes(self) -> dict[tuple[str, Color], EdgeSpec]:
        """(node, color) -> the unique outgoing edge carrying that color."""
        table: dict[tuple[str, Color], EdgeSpec] = {}
        for edge in self.edges:
            for color in edge.colors:
                table[(edge.src, color)] = edge
        return table


def _parse_node(raw: dict) -> NodeSpec:
    try:
        kind = NodeKind(raw["kind"])
    except (KeyError, ValueError):
        raise ValidationError(f"node {raw.get('id')!r}: unknown kind {raw.get('kind')!r}", field="kind")
    exit_color = raw.get("exit_color")
    return NodeSpec(
        id=str(raw["id"]),
        kind=kind,
        signal_eligible=bool(raw.get("signal_eligible", False)),
        exit_color=Color(exit_color) if exit_color is not None else None,
    )


def _parse_edge(raw: dict) -> EdgeSpec:
    try:
        colors = frozenset(Color(c) for c in raw["colors"])
    except (KeyError, ValueError):
        raise ValidationError(f"edge {raw.get('id')!r}: bad colors {raw.get('colors')!r}", field="colors")
    return EdgeSpec(
        id=str(raw["id"]),
        src=str(raw["from"]),
        dst=str(raw["to"]),
        colors=colors,
        sem_eligible=bool(raw.get("sem_eligible", False)),
    )


def parse_level(data: bytes | str) -> LevelSpec:
    """Parse without validating; most callers want load_level instead."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(f"level JSON malformed: {exc.msg}", offset=offset)
    if not isinstance(raw, dict):
        raise ParseError("level JSON must be an object")
    try:
        nodes = tuple(_parse_node(n) for n in raw["nodes"])
        edges = tuple(_parse_edge(e) for e in raw["edges"])
        schedule = tuple(
            SpawnSpec(
                tick=int(s["tick"]),
                spawn_node=str(s["spawn_node"]),
                color=Color(s["color"]),
                arrow_id=str(s["arrow_id"]),
            )
            for s in raw["spawn_schedule"]
        )
    except KeyError as exc:
        raise ValidationError(f"level missing field {exc.args[0]!r}", field=str(exc.args[0]))
    defaults = raw.get("defaults") or {}
    if not isinstance(defaults, dict):
        raise ValidationError("defaults must be an object", field="defaults")
    return LevelSpec(
        level_id=str(raw.get("level_id", "")),
        nodes=nodes,
        edges=edges,
        spawn_schedule=tuple(sorted(schedule, key=lambda s: (s.tick, s.arrow_id))),
        defaults=defaults,
    )


def validate_level(level: LevelSpec) -> list[str]:
    """Returns every violated structural rule; empty list means valid."""
    findings: list[str] = []
    if not level.level_id:
        findings.append("level_id is empty")

    seen_nodes: set[str] = set()
    for node in level.nodes:
        if node.id in seen_nodes:
            findings.append(f"duplicate node id {node.id!r}")
        seen_nodes.add(node.id)
        if node.kind is NodeKind.EXIT and node.exit_color is None:
            findings.append(f"exit node {node.id!r} lacks exit_color")
        if node.kind is not NodeKind.EXIT and node.exit_color is not None:
            findings.append(f"node {node.id!r} has exit_color but kind {node.kind.value}")

    seen_edges: set[str] = set()
    for edge in level.edges:
        if edge.id in seen_edges:
            findings.append(f"duplicate edge id {edge.id!r}")
        seen_edges.add(edge.id)
        for endpoint in (edge.src, edge.dst):
            if endpoint not in seen_nodes:
                findings.append(f"edge {edge.id!r} references unknown node {endpoint!r}")
        if not edge.colors:
            findings.append(f"edge {edge.id!r} allows no colors")

    outgoing: dict[tuple[str, Color], list[str]] = {}
    for edge in level.edges:
        for color in edge.colors:
            outgoing.setdefault((edge.src, color), []).append(edge.id)
    for (node_id, color), edge_ids in sorted(outgoing.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        if len(edge_ids) > 1:
            findings.append(
                f"ambiguous routing at node {node_id!r} for color {color.value}: edges {sorted(edge_ids)}"
            )

    node_by_id = {n.id: n for n in level.nodes}
    seen_arrows: set[str] = set()
    for spawn in level.spawn_schedule:
        if spawn.arrow_id in seen_arrows:
            findings.append(f"duplicate arrow id {spawn.arrow_id!r}")
        seen_arrows.add(spawn.arrow_id)
        if spawn.tick < 0:
            findings.append(f"arrow {spawn.arrow_id!r} spawns at negative tick")
        node = node_by_id.get(spawn.spawn_node)
        if node is None:
            findings.append(f"arrow {spawn.arrow_id!r} spawns at unknown node {spawn.spawn_node!r}")
        elif node.kind is not NodeKind.SPAWN:
            findings.append(f"arrow {spawn.arrow_id!r} spawn node {node.id!r} has kind {node.kind.value}")

    # Color reachability: follow only edges carrying the arrow's color.
    if not any("ambiguous routing" in f or "unknown node" in f for f in findings):
        adjacency: dict[tuple[str, Color], str] = {
            (e.src, c): e.dst for e in level.edges for c in e.colors
        }
        for spawn in level.spawn_schedule:
            if spawn.spawn_node not in node_by_id:
                continue
            current: Optional[str] = spawn.spawn_node
            visited: set[str] = set()
            reached = False
            while current is not None and current not in visited:
                visited.add(current)
                node = node_by_id[current]
                if node.kind is NodeKind.EXIT and node.exit_color is spawn.color:
                    reached = True
                    break
                current = adjacency.get((current, spawn.color))
            if not reached:
                findings.append(
                    f"unreachable color: arrow {spawn.arrow_id!r} ({spawn.color.value}) "
                    f"from {spawn.spawn_node!r} reaches no {spawn.color.value} exit"
                )
    return findings


def load_level(data: bytes | str) -> LevelSpec:
    """Parse and fully validate a level file; raises on the first report."""
    level = parse_level(data)
    findings = validate_level(level)
    if findings:
        raise ValidationError("; ".join(findings))
    return level
