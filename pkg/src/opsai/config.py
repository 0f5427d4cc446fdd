"""Service configuration: defaults < config file < environment < flags."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .errors import ValidationError

ENV_VARS = {
    "OPSAI_STORAGE_ROOT": ("storage_root", str),
    "OPSAI_BIND_ADDR": ("bind_addr", str),
    "OPSAI_STALL_P": ("stall_probability", float),
    "OPSAI_VERIFY_SEEDS": ("verify_seeds", int),
    "OPSAI_PEER_K": ("peer_k", int),
    "OPSAI_SUPPORT_THETA": ("support_theta", float),
}


@dataclass(frozen=True)
class ServiceConfig:
    storage_root: Optional[str] = None
    backend: str = "filesystem"
    index_backend: str = "embedded-kv"
    bind_addr: str = "127.0.0.1:8347"
    levels_dir: Optional[str] = None
    stall_probability: float = 0.25
    max_ticks: int = 1000
    deadlock_window: int = 50
    verify_seeds: int = 64
    peer_k: int = 5
    support_theta: float = 0.5
    cors_origins: tuple[str, ...] = ("*",)

    @property
    def host(self) -> str:
        return self.bind_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind_addr.rsplit(":", 1)[1])


def load_config(
    path: Optional[Path] = None,
    env: Optional[dict] = None,
    **overrides,
) -> ServiceConfig:
    cfg = ServiceConfig()
    if path is not None:
        raw = json.loads(Path(path).read_text("utf-8"))
        known = {f.name for f in fields(ServiceConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        if "cors_origins" in raw:
            raw["cors_origins"] = tuple(raw["cors_origins"])
        cfg = replace(cfg, **raw)
    env = os.environ if env is None else env
    env_values = {}
    for var, (name, cast) in ENV_VARS.items():
        if var in env:
            try:
                env_values[name] = cast(env[var])
            except ValueError:
                raise ValidationError(f"bad value for {var}: {env[var]!r}")
    if env_values:
        cfg = replace(cfg, **env_values)
    applied = {k: v for k, v in overrides.items() if v is not None}
    if applied:
        cfg = replace(cfg, **applied)
    return cfg
