"""Level registry: the fixture levels shipped with the package, or a
directory of level files, plus their known-good placement scripts."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .engine.level import LevelSpec, load_level
from .errors import NotFoundError, ValidationError
from .model import ActionKind, PlayerAction, SignalLink


def action_from_plain(raw: dict) -> PlayerAction:
    """Parse a bare scripted action ({kind, target?, link?, seed?})."""
    try:
        kind = ActionKind(raw["kind"])
    except (KeyError, ValueError):
        raise ValidationError(f"bad scripted action kind {raw.get('kind')!r}")
    link = raw.get("link")
    return PlayerAction(
        kind=kind,
        target=raw.get("target"),
        link=SignalLink(node=link["node"], edge=link["edge"]) if link else None,
        seed=raw.get("seed"),
    )


class LevelRegistry:
    def __init__(self, levels: dict[str, LevelSpec], solutions: dict[str, list[PlayerAction]]):
        self._levels = levels
        self._solutions = solutions

    def get(self, level_id: str) -> LevelSpec:
        level = self._levels.get(level_id)
        if level is None:
            raise NotFoundError(f"level {level_id!r} not found")
        return level

    def has(self, level_id: str) -> bool:
        return level_id in self._levels

    def ids(self) -> list[str]:
        return sorted(self._levels)

    def solution(self, level_id: str) -> list[PlayerAction]:
        self.get(level_id)
        return list(self._solutions.get(level_id, []))

    @classmethod
    def _from_files(cls, files: dict[str, bytes]) -> "LevelRegistry":
        levels: dict[str, LevelSpec] = {}
        solutions: dict[str, list[PlayerAction]] = {}
        for name, data in files.items():
            if name.endswith(".solution.json"):
                raw = json.loads(data)
                solutions[raw["level_id"]] = [action_from_plain(a) for a in raw["actions"]]
            elif name.endswith(".json"):
                level = load_level(data)
                levels[level.level_id] = level
        missing = set(solutions) - set(levels)
        if missing:
            raise ValidationError(f"solution scripts without levels: {sorted(missing)}")
        return cls(levels, solutions)

    @classmethod
    def builtin(cls) -> "LevelRegistry":
        files = {}
        base = resources.files("opsai") / "levels"
        for entry in base.iterdir():
            if entry.name.endswith(".json"):
                files[entry.name] = entry.read_bytes()
        return cls._from_files(files)

    @classmethod
    def from_dir(cls, path: Path) -> "LevelRegistry":
        files = {p.name: p.read_bytes() for p in sorted(Path(path).glob("*.json"))}
        if not files:
            raise ValidationError(f"no level files under {path}")
        return cls._from_files(files)


def level_to_wire(level: LevelSpec) -> dict:
    return {
        "defaults": level.defaults,
        "edges": [
            {
                "colors": sorted(c.value for c in e.colors),
                "from": e.src,
                "id": e.id,
                "sem_eligible": e.sem_eligible,
                "to": e.dst,
            }
            for e in level.edges
        ],
        "level_id": level.level_id,
        "nodes": [
            {
                "exit_color": n.exit_color.value if n.exit_color else None,
                "id": n.id,
                "kind": n.kind.value,
                "signal_eligible": n.signal_eligible,
            }
            for n in level.nodes
        ],
        "spawn_schedule": [
            {
                "arrow_id": s.arrow_id,
                "color": s.color.value,
                "spawn_node": s.spawn_node,
                "tick": s.tick,
            }
            for s in level.spawn_schedule
        ],
    }
