from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from opsai.bots import BotProfile, EmbeddedTransport, run_fleet
from opsai.config import ServiceConfig
from opsai.levels import LevelRegistry
from opsai.service import SessionService

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def registry() -> LevelRegistry:
    return LevelRegistry.builtin()


@pytest.fixture()
def service(tmp_path) -> SessionService:
    return SessionService.from_config(ServiceConfig(storage_root=str(tmp_path / "store")))


def make_service(root: Path) -> SessionService:
    return SessionService.from_config(ServiceConfig(storage_root=str(root)))


def build_corpus(
    service: SessionService,
    per_level: dict[str, int],
    base_seed: int = 0,
    verify_seeds: int = 16,
) -> list[str]:
    """Bot-generated sessions across levels; deterministic in base_seed."""
    transport = EmbeddedTransport(service)
    ids = []
    for offset, (level_id, count) in enumerate(sorted(per_level.items())):
        profile = BotProfile(
            competence=0.5, test_propensity=0.7, seed=base_seed + offset * 1_000_003
        )
        solution = service.levels.solution(level_id)
        ids.extend(
            run_fleet(transport, level_id, count, profile, solution, verify_seeds=verify_seeds)
        )
    return ids


@pytest.fixture(scope="session")
def corpus_service(tmp_path_factory):
    """A 200-session corpus shared by the storage/analytics/acceptance tests."""
    root = tmp_path_factory.mktemp("corpus")
    svc = make_service(root)
    ids = build_corpus(
        svc,
        {"straightline": 60, "merge": 80, "critical_section": 60},
        base_seed=2024,
    )
    assert len(ids) == 200
    return svc, ids
