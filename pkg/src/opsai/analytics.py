"""Stateless analytics over finalized sessions.

Everything here is a pure function of the store contents and the request
parameters: peer similarity over action-token traces, placement-frequency
recommendations, rule-table reflective prompts, and the visualization guide,
composed into one payload the client can render without further calls
(except fetching the peer traces the guide lists).
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from typing import Optional

from ._kernels import levenshtein
from .errors import ConflictError
from .finalize import StoredLog, load_stored_log, metrics_to_wire
from .model import DerivedMetrics, PlayerAction, SessionLog
from .storage.records import QueryFilter
from .storage.store import LogStore
from .finalize import action_tokens

PAYLOAD_VERSION = 1

DEFAULT_PEER_K = 5
DEFAULT_SUPPORT_THETA = 0.5


def sequence_distance(a: str, b: str) -> float:
    """Levenshtein normalized by the longer length; 0.0 for two empty traces."""
    if not a and not b:
        return 0.0
    return levenshtein(a.encode("ascii"), b.encode("ascii")) / max(len(a), len(b))


@dataclass(frozen=True)
class SimilarityResult:
    peer_session_id: str
    peer_player_id: str
    distance: float
    shared_level: str

    def to_wire(self) -> dict:
        return {
            "distance": self.distance,
            "peer_player_id": self.peer_player_id,
            "peer_session_id": self.peer_session_id,
            "shared_level": self.shared_level,
        }


@dataclass(frozen=True)
class Recommendation:
    kind: str  # place_semaphore_hint | link_signal_hint | test_more_hint
    target: Optional[str]
    support: float
    message: str

    def to_wire(self) -> dict:
        return {
            "kind": self.kind,
            "message": self.message,
            "support": self.support,
            "target": self.target,
        }


@dataclass(frozen=True)
class ReflectivePrompt:
    rule_id: str
    message: str
    trigger_values: dict

    def to_wire(self) -> dict:
        return {
            "message": self.message,
            "rule_id": self.rule_id,
            "trigger_values": self.trigger_values,
        }


def _require_finalized(store: LogStore, session_id: str) -> None:
    meta = store.session_meta(session_id)  # raises NotFoundError
    if not meta.finalized:
        raise ConflictError(f"session {session_id} is not finalized", code="not_finalized")


def _subject(store: LogStore, session_id: str) -> StoredLog:
    _require_finalized(store, session_id)
    return load_stored_log(store, session_id)


def find_peers(store: LogStore, session_id: str, k: int = DEFAULT_PEER_K) -> list[SimilarityResult]:
    """Closest peers on the same level, other players only.

    Candidates come from the reference index; distances are computed over
    the stored logs' token sequences. Ties break by recency then id.
    """
    subject = _subject(store, session_id)
    header = subject.log.header
    subject_tokens = action_tokens(subject.log)
    candidates = store.query_references(
        QueryFilter(level_id=header.level_id, limit=sys.maxsize)
    )
    scored = []
    for entry in candidates:
        if entry.player_id == header.player_id:
            continue
        peer = load_stored_log(store, entry.session_id)
        distance = sequence_distance(subject_tokens, action_tokens(peer.log))
        scored.append((distance, -entry.started_at, entry.session_id, entry))
    scored.sort(key=lambda item: item[:3])
    return [
        SimilarityResult(
            peer_session_id=entry.session_id,
            peer_player_id=entry.player_id,
            distance=distance,
            shared_level=header.level_id,
        )
        for distance, _neg_started, _sid, entry in scored[: max(k, 0)]
    ]


def placement_frequency(store: LogStore, level_id: str) -> dict[str, float]:
    """edge id -> fraction of solved sessions whose final board carries it."""
    solved = store.query_references(
        QueryFilter(level_id=level_id, solved=True, limit=sys.maxsize)
    )
    if not solved:
        return {}
    counts: dict[str, int] = {}
    for entry in solved:
        stored = load_stored_log(store, entry.session_id)
        for edge_id in stored.metrics.final_placements:
            counts[edge_id] = counts.get(edge_id, 0) + 1
    return {edge: n / len(solved) for edge, n in sorted(counts.items())}


def recommend(
    store: LogStore,
    session_id: str,
    theta: float = DEFAULT_SUPPORT_THETA,
) -> list[Recommendation]:
    """Frequency-backed hints for unsolved subjects; solved ones get none."""
    subject = _subject(store, session_id)
    if subject.metrics.solved:
        return []
    freqs = placement_frequency(store, subject.log.header.level_id)
    have = subject.metrics.final_placements
    recs = []
    hinted = [
        (edge, support)
        for edge, support in freqs.items()
        if support >= theta and edge not in have
    ]
    hinted.sort(key=lambda item: (-item[1], item[0]))
    for edge, support in hinted:
        recs.append(
            Recommendation(
                kind="place_semaphore_hint",
                target=edge,
                support=support,
                message=(
                    f"{support:.0%} of successful boards on this level place a "
                    f"semaphore on edge {edge}; yours does not."
                ),
            )
        )
    if subject.metrics.test_run_count == 0:
        recs.append(
            Recommendation(
                kind="test_more_hint",
                target=None,
                support=0.0,
                message="You have not run any tests yet; run a few seeds before submitting.",
            )
        )
    return recs


def prompts(metrics: DerivedMetrics) -> list[ReflectivePrompt]:
    """Fixed, independent rule table; emitted in rule order."""
    from .model import ActionKind

    out = []
    if metrics.test_run_count == 0 and not metrics.solved:
        out.append(
            ReflectivePrompt(
                rule_id="no-testing",
                message=(
                    "This board was never put under test. What do you expect to "
                    "happen when both arrows reach the shared section?"
                ),
                trigger_values={"solved": False, "test_run_count": 0},
            )
        )
    if metrics.test_run_count >= 5 and metrics.solved:
        out.append(
            ReflectivePrompt(
                rule_id="persistence",
                message=(
                    "Solved after repeated testing. Which failed run taught you "
                    "the most about the race?"
                ),
                trigger_values={"solved": True, "test_run_count": metrics.test_run_count},
            )
        )
    removals = metrics.action_counts_by_kind.get(ActionKind.REMOVE_SEMAPHORE, 0)
    if removals >= 3:
        out.append(
            ReflectivePrompt(
                rule_id="strategy-revision",
                message=(
                    "Several semaphores were placed and then removed. What made "
                    "you revise where the critical section starts?"
                ),
                trigger_values={"remove_semaphore_count": removals},
            )
        )
    return out


@dataclass(frozen=True)
class VizPanel:
    panel_kind: str
    data_ref: dict

    def to_wire(self) -> dict:
        return {"data_ref": self.data_ref, "panel_kind": self.panel_kind}


def _timeline(log: SessionLog) -> list[dict]:
    from .model import TOKEN_BY_KIND

    return [
        {
            "seq": ev.seq,
            "t_ms": ev.t_ms,
            "token": TOKEN_BY_KIND[ev.body.kind],
        }
        for ev in log.events
        if isinstance(ev.body, PlayerAction)
    ]


def visualization_guide(
    stored: StoredLog, peers: list[SimilarityResult]
) -> list[VizPanel]:
    """Panel list in render order; optional panels appear only when backed."""
    panels = [
        VizPanel("action_timeline", {"timeline": _timeline(stored.log)}),
        VizPanel("metric_cards", {"source": "metrics"}),
    ]
    if len(stored.log.snapshots) >= 2:
        panels.append(
            VizPanel(
                "trace_overlay",
                {
                    "peer_session_ids": [peers[0].peer_session_id] if peers else [],
                    "self_trace": [s.state_hash for s in stored.log.snapshots],
                },
            )
        )
    if peers:
        panels.append(VizPanel("peer_comparison", {"source": "peers"}))
    return panels


@dataclass(frozen=True)
class AnalyticsPayload:
    session_id: str
    metrics: DerivedMetrics
    peers: list[SimilarityResult]
    recommendations: list[Recommendation]
    prompts: list[ReflectivePrompt]
    viz: list[VizPanel]
    generated_at: int

    def to_wire(self) -> dict:
        return {
            "generated_at": self.generated_at,
            "metrics": metrics_to_wire(self.metrics),
            "payload_version": PAYLOAD_VERSION,
            "peers": [p.to_wire() for p in self.peers],
            "prompts": [p.to_wire() for p in self.prompts],
            "recommendations": [r.to_wire() for r in self.recommendations],
            "session_id": self.session_id,
            "viz": {"panels": [p.to_wire() for p in self.viz]},
        }


def build_payload(
    store: LogStore,
    session_id: str,
    k: int = DEFAULT_PEER_K,
    theta: float = DEFAULT_SUPPORT_THETA,
    now_ms: Optional[int] = None,
) -> AnalyticsPayload:
    """Compose the full analytics bundle for one finalized session."""
    stored = _subject(store, session_id)
    peer_list = find_peers(store, session_id, k)
    return AnalyticsPayload(
        session_id=session_id,
        metrics=stored.metrics,
        peers=peer_list,
        recommendations=recommend(store, session_id, theta),
        prompts=prompts(stored.metrics),
        viz=visualization_guide(stored, peer_list),
        generated_at=now_ms if now_ms is not None else int(time.time() * 1000),
    )
