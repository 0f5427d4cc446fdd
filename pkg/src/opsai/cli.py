"""Operator tooling.

Exit codes: 0 ok, 1 validation failure, 2 not found, 3 I/O or network.
Results go to stdout as JSON lines; diagnostics go to stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .canonical import canonical_json_bytes
from .config import load_config
from .engine.level import parse_level, validate_level
from .errors import NotFoundError, OpsaiError, StorageError, ValidationError
from .storage.records import QueryFilter

EXIT_VALIDATION = 1
EXIT_NOT_FOUND = 2
EXIT_IO = 3


def _fail(code: int, message: str):
    click.echo(message, err=True)
    sys.exit(code)


def _service(root: str | None, levels_dir: str | None):
    from .service import SessionService

    cfg = load_config(storage_root=root, levels_dir=levels_dir)
    if cfg.storage_root is None:
        _fail(EXIT_IO, "no storage root: pass --out or set OPSAI_STORAGE_ROOT")
    try:
        return SessionService.from_config(cfg)
    except OpsaiError as exc:
        _fail(EXIT_IO, f"cannot open store: {exc.detail}")


def _transport(server: str | None, out: str | None, levels_dir: str | None):
    if server:
        from .bots import HttpTransport

        return HttpTransport(server)
    from .bots import EmbeddedTransport

    return EmbeddedTransport(_service(out, levels_dir))


@click.group()
def main():
    """Telemetry pipeline operations: serve, validate, simulate, query."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--root", default=None, help="storage root (overrides config/env)")
@click.option("--bind", default=None, help="host:port (overrides config/env)")
@click.option("--levels", "levels_dir", default=None, help="directory of level files")
def serve(config_path, root, bind, levels_dir):
    """Run the HTTP service until interrupted."""
    import uvicorn

    from .api import create_app
    from .service import SessionService

    try:
        cfg = load_config(config_path, storage_root=root, bind_addr=bind, levels_dir=levels_dir)
        if cfg.storage_root is None:
            _fail(EXIT_IO, "no storage root configured (OPSAI_STORAGE_ROOT or --root)")
        app = create_app(SessionService.from_config(cfg))
    except OpsaiError as exc:
        _fail(EXIT_VALIDATION, f"bad configuration: {exc.detail}")
    try:
        uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        _fail(EXIT_IO, f"server failed: {exc}")


@main.group()
def level():
    """Level file operations."""


@level.command()
@click.argument("file", type=click.Path(exists=True, path_type=Path))
def validate(file):
    """Parse and validate one level file; findings go to stderr."""
    try:
        spec = parse_level(file.read_bytes())
    except OpsaiError as exc:
        _fail(EXIT_VALIDATION, f"parse failed: {exc.detail}")
    findings = validate_level(spec)
    if findings:
        for finding in findings:
            click.echo(finding, err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(json.dumps({"level_id": spec.level_id, "nodes": len(spec.nodes), "edges": len(spec.edges)}))


@main.command()
@click.option("--level", "level_id", required=True)
@click.option("--bots", "count", type=int, default=10, show_default=True)
@click.option("--profile", "profile_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--out", default=None, help="storage root for embedded mode")
@click.option("--server", default=None, help="base URL to stream through a running service")
@click.option("--levels", "levels_dir", default=None)
@click.option("--verify-seeds", type=int, default=None, help="override verification seed count")
@click.option("--workers", type=int, default=4, show_default=True, help="concurrent bots")
def simulate(level_id, count, profile_path, out, server, levels_dir, verify_seeds, workers):
    """Generate a bot corpus: N full sessions, streamed and finalized."""
    from .bots import BotProfile, run_fleet
    from .levels import LevelRegistry

    try:
        profile = (
            BotProfile.from_json(profile_path.read_text("utf-8"))
            if profile_path
            else BotProfile(competence=0.5, test_propensity=0.7, seed=0)
        )
    except (OpsaiError, ValueError) as exc:
        _fail(EXIT_VALIDATION, f"bad profile: {exc}")
    registry = LevelRegistry.from_dir(levels_dir) if levels_dir else LevelRegistry.builtin()
    try:
        solution = registry.solution(level_id)
    except NotFoundError:
        solution = None
    transport = _transport(server, out, levels_dir)
    try:
        ids = run_fleet(
            transport, level_id, count, profile, solution,
            verify_seeds=verify_seeds, workers=workers,
        )
    except NotFoundError as exc:
        _fail(EXIT_NOT_FOUND, exc.detail)
    except StorageError as exc:
        _fail(EXIT_IO, exc.detail)
    except OpsaiError as exc:
        _fail(EXIT_VALIDATION, exc.detail)
    for session_id in ids:
        click.echo(json.dumps({"session_id": session_id}))


@main.command()
@click.option("--player", default=None)
@click.option("--level", "level_id", default=None)
@click.option("--solved", type=click.Choice(["true", "false"]), default=None)
@click.option("--limit", type=int, default=100, show_default=True)
@click.option("--out", default=None, help="storage root")
@click.option("--levels", "levels_dir", default=None)
def query(player, level_id, solved, limit, out, levels_dir):
    """Print matching reference entries as JSON lines, newest first."""
    service = _service(out, levels_dir)
    try:
        qf = QueryFilter(
            player_id=player,
            level_id=level_id,
            solved=None if solved is None else solved == "true",
            limit=limit,
            list_all=player is None and level_id is None and solved is None,
        )
        entries = service.query(qf)
    except ValidationError as exc:
        _fail(EXIT_VALIDATION, exc.detail)
    for entry in entries:
        click.echo(canonical_json_bytes(entry.to_wire()).decode("utf-8"))


@main.command()
@click.argument("session_id")
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--out", default=None, help="storage root")
@click.option("--levels", "levels_dir", default=None)
def analyze(session_id, k, out, levels_dir):
    """Print the analytics payload for one finalized session."""
    service = _service(out, levels_dir)
    try:
        payload = service.analytics_payload(session_id, k)
    except NotFoundError as exc:
        _fail(EXIT_NOT_FOUND, exc.detail)
    except OpsaiError as exc:
        _fail(EXIT_VALIDATION, exc.detail)
    click.echo(canonical_json_bytes(payload).decode("utf-8"))


@main.command()
@click.option("--out", default=None, help="storage root")
@click.option("--levels", "levels_dir", default=None)
def reindex(out, levels_dir):
    """Rebuild every reference entry from stored logs; print diffs."""
    service = _service(out, levels_dir)
    try:
        diffs = service.reindex()
    except OpsaiError as exc:
        _fail(EXIT_VALIDATION, exc.detail)
    for diff in diffs:
        click.echo(
            json.dumps(
                {"detail": diff.detail, "kind": diff.kind, "session_id": diff.session_id},
                sort_keys=True,
            )
        )
    click.echo(f"reindex: {len(diffs)} diffs", err=True)


if __name__ == "__main__":
    main()
