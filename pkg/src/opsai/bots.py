"""Synthetic players: scripted bots that stream full sessions through the
ingestion surface (embedded service or HTTP) and finalize them.

Bots are deterministic functions of (profile, seed): session ids,
timestamps, edit choices, and test seeds all derive from one splitmix64
stream, so identical inputs reproduce byte-identical stored sessions.
A bot either follows the level's known-good placement script (with
probability `competence`) or performs random eligible edits; it runs
seeded tests per `test_propensity` and always submits for verification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Protocol

from .engine.board import BoardState, apply_action, initial_state
from .engine.level import LevelSpec, parse_level
from .engine.sim import SplitMix64, splitmix64
from .errors import ValidationError
from .model import ActionKind, GameEvent, PlayerAction, SignalLink
from .canonical import event_to_line

BOT_EPOCH_MS = 1_600_000_000_000


@dataclass(frozen=True)
class BotProfile:
    competence: float
    test_propensity: float
    seed: int = 0

    def __post_init__(self):
        for name in ("competence", "test_propensity"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1]", field=name)

    @classmethod
    def from_json(cls, text: str) -> "BotProfile":
        raw = json.loads(text)
        return cls(
            competence=float(raw.get("competence", 0.5)),
            test_propensity=float(raw.get("test_propensity", 0.5)),
            seed=int(raw.get("seed", 0)),
        )


class Transport(Protocol):
    """The slice of the ingestion surface a bot needs."""

    def create_session(self, player_id: str, level_id: str, session_id: str, started_at: int) -> str: ...

    def append_events(self, session_id: str, events: list[GameEvent]) -> int: ...

    def simulate(self, level_id: str, placements: dict, seed: int, cfg: Optional[dict]) -> dict: ...

    def verify(self, level_id: str, placements: dict, cfg: Optional[dict]) -> dict: ...

    def finalize(self, session_id: str) -> dict: ...

    def get_level(self, level_id: str) -> dict: ...


class EmbeddedTransport:
    """Direct service calls; same semantics as HTTP, no sockets."""

    def __init__(self, service):
        self.service = service

    def create_session(self, player_id, level_id, session_id, started_at):
        meta = self.service.create_session(player_id, level_id, session_id, started_at)
        return meta.session_id

    def append_events(self, session_id, events):
        return self.service.append_events(session_id, events)

    def simulate(self, level_id, placements, seed, cfg):
        from .service import run_result_to_wire

        return run_result_to_wire(self.service.simulate(level_id, placements, seed, cfg))

    def verify(self, level_id, placements, cfg):
        from .service import verify_result_to_wire

        return verify_result_to_wire(self.service.verify(level_id, placements, cfg))

    def finalize(self, session_id):
        return self.service.finalize(session_id).to_wire()

    def get_level(self, level_id):
        return self.service.level_wire(level_id)


class HttpTransport:
    def __init__(self, base_url: str, client=None):
        import httpx

        self.client = client or httpx.Client(base_url=base_url, timeout=30.0)
        self._httpx = httpx

    def _check(self, call):
        from .errors import StorageError

        try:
            response = call()
        except self._httpx.HTTPError as exc:
            raise StorageError(f"server unreachable: {exc}")
        if response.status_code >= 400:
            raise StorageError(f"server error {response.status_code}: {response.text}")
        return response.json()

    def create_session(self, player_id, level_id, session_id, started_at):
        body = {
            "level_id": level_id,
            "player_id": player_id,
            "session_id": session_id,
            "started_at": started_at,
        }
        return self._check(lambda: self.client.post("/v1/sessions", json=body))["session_id"]

    def append_events(self, session_id, events):
        payload = b"".join(event_to_line(ev) for ev in events)
        out = self._check(
            lambda: self.client.post(
                f"/v1/sessions/{session_id}/events",
                content=payload,
                headers={"content-type": "application/x-ndjson"},
            )
        )
        return out["accepted_through_seq"]

    def simulate(self, level_id, placements, seed, cfg):
        body = {"cfg": cfg, "level_id": level_id, "placements": placements, "seed": seed}
        return self._check(lambda: self.client.post("/v1/simulate", json=body))

    def verify(self, level_id, placements, cfg):
        body = {"cfg": cfg, "level_id": level_id, "placements": placements}
        return self._check(lambda: self.client.post("/v1/verify", json=body))

    def finalize(self, session_id):
        return self._check(lambda: self.client.post(f"/v1/sessions/{session_id}/finalize"))

    def get_level(self, level_id):
        return self._check(lambda: self.client.get(f"/v1/levels/{level_id}"))


def _rand_unit(rng: SplitMix64) -> float:
    return rng.next_u64() / 2**64

def _rand_below(rng: SplitMix64, n: int) -> int:
    return rng.next_u64() % n


def _eligible_actions(level: LevelSpec, state: BoardState) -> list[PlayerAction]:
    """Every legal edit from this state, in a deterministic order."""
    actions: list[PlayerAction] = []
    for edge in sorted(level.edges, key=lambda e: e.id):
        if edge.sem_eligible and edge.id not in state.semaphores:
            actions.append(PlayerAction(ActionKind.PLACE_SEMAPHORE, target=edge.id))
    for edge_id in sorted(state.semaphores):
        actions.append(PlayerAction(ActionKind.REMOVE_SEMAPHORE, target=edge_id))
    for node in sorted(level.nodes, key=lambda n: n.id):
        if node.signal_eligible and node.id not in state.signals:
            actions.append(PlayerAction(ActionKind.PLACE_SIGNAL, target=node.id))
    for node_id in sorted(state.signals):
        actions.append(PlayerAction(ActionKind.REMOVE_SIGNAL, target=node_id))
    for node_id in sorted(state.signals):
        for edge_id in sorted(state.semaphores):
            if edge_id not in state.signals[node_id]:
                actions.append(
                    PlayerAction(ActionKind.LINK_SIGNAL, link=SignalLink(node_id, edge_id))
                )
        for edge_id in sorted(state.signals[node_id]):
            actions.append(
                PlayerAction(ActionKind.UNLINK_SIGNAL, link=SignalLink(node_id, edge_id))
            )
    return actions


def _placements_wire(state: BoardState) -> dict:
    return {
        "semaphores": {e: s.value for e, s in sorted(state.semaphores.items())},
        "signals": {n: sorted(links) for n, links in sorted(state.signals.items())},
    }


def run_bot(
    transport: Transport,
    level_id: str,
    player_id: str,
    profile: BotProfile,
    solution: Optional[list[PlayerAction]] = None,
    batch_size: int = 10,
    verify_seeds: Optional[int] = None,
) -> str:
    """Play one full session; returns the finalized session id."""
    rng = SplitMix64(profile.seed)
    session_id = f"{rng.next_u64():016x}{rng.next_u64():016x}"
    started_at = BOT_EPOCH_MS + rng.next_u64() % 1_000_000_000

    level = parse_level(json.dumps(transport.get_level(level_id)))
    transport.create_session(player_id, level_id, session_id, started_at)

    state = initial_state(level)
    pending: list[GameEvent] = []
    seq = 0
    t_ms = started_at

    def record(body) -> None:
        nonlocal seq, t_ms
        t_ms += 250
        pending.append(GameEvent(seq=seq, t_ms=t_ms, body=body))
        seq += 1

    def flush() -> None:
        nonlocal pending
        for i in range(0, len(pending), batch_size):
            transport.append_events(session_id, pending[i : i + batch_size])
        pending = []

    competent = _rand_unit(rng) < profile.competence
    if competent and solution is not None:
        plan = list(solution)
    else:
        plan = None

    if plan is not None:
        for action in plan:
            state = apply_action(level, state, action)
            record(action)
    else:
        edits = 2 + _rand_below(rng, 5)
        for _ in range(edits):
            candidates = _eligible_actions(level, state)
            if not candidates:
                break
            action = candidates[_rand_below(rng, len(candidates))]
            state = apply_action(level, state, action)
            record(action)

    cfg = {"verify_seeds": verify_seeds} if verify_seeds is not None else None

    if _rand_unit(rng) < profile.test_propensity:
        for _ in range(1 + _rand_below(rng, 3)):
            test_seed = rng.next_u64()
            record(PlayerAction(ActionKind.START_TEST, seed=test_seed))
            run = transport.simulate(level_id, _placements_wire(state), test_seed, cfg)
            for ev in run["events"]:
                record(_system_from_wire(ev))

    record(PlayerAction(ActionKind.SUBMIT_SOLUTION))
    outcome = transport.verify(level_id, _placements_wire(state), cfg)
    record(_solution_verified(outcome))
    flush()
    transport.finalize(session_id)
    return session_id


def _system_from_wire(raw: dict):
    from .canonical import body_from_wire

    return body_from_wire(raw, "simulate event")


def _solution_verified(outcome: dict):
    from .model import SystemEvent, SystemKind

    return SystemEvent(
        SystemKind.SOLUTION_VERIFIED,
        {"seeds_passed": outcome["seeds_passed"], "seeds_run": outcome["seeds_run"]},
    )


def run_fleet(
    transport: Transport,
    level_id: str,
    count: int,
    profile: BotProfile,
    solution: Optional[list[PlayerAction]] = None,
    verify_seeds: Optional[int] = None,
    workers: int = 1,
) -> list[str]:
    """N bots with per-bot seeds derived from the profile seed.

    Bots are mutually independent (each owns its session stream), so they
    may run concurrently; results come back in bot order either way.
    """

    def one(i: int) -> str:
        bot_profile = BotProfile(
            competence=profile.competence,
            test_propensity=profile.test_propensity,
            seed=splitmix64(profile.seed + i),
        )
        return run_bot(
            transport,
            level_id,
            player_id=f"bot-{i:03d}",
            profile=bot_profile,
            solution=solution,
            verify_seeds=verify_seeds,
        )

    if workers <= 1:
        return [one(i) for i in range(count)]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(count)))
