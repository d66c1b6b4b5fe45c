"""Server configuration: JSON file, then ZKPARK_* environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Mapping

from ..errors import ConfigError
from ..merkle import DEFAULT_DEPTH, MAX_DEPTH, MIN_DEPTH

ENV_OVERRIDES = {
    "ZKPARK_LISTEN": "listen",
    "ZKPARK_DEPTH": "depth",
    "ZKPARK_EPOCH_SECONDS": "epoch_seconds",
    "ZKPARK_DATA_DIR": "data_dir",
}


@dataclass(frozen=True)
class ServerConfig:
    listen: str = "127.0.0.1:7700"
    depth: int = DEFAULT_DEPTH
    epoch_seconds: float = 600.0
    data_dir: str = "zkpark-data"
    root_history: int = 64
    retention_epochs: int = 3
    fsync: bool = True
    # lets a client force an epoch rotation; for demos and tests only
    admin_ops: bool = False

    def validate(self) -> ServerConfig:
        if not MIN_DEPTH <= self.depth <= MAX_DEPTH:
            raise ConfigError(f"depth must be in [{MIN_DEPTH}, {MAX_DEPTH}], got {self.depth}")
        if self.epoch_seconds < 0:
            raise ConfigError("epoch_seconds must be >= 0 (0 disables the timer)")
        if self.root_history < 1 or self.retention_epochs < 1:
            raise ConfigError("root_history and retention_epochs must be positive")
        if ":" not in self.listen:
            raise ConfigError(f"listen must be host:port, got {self.listen!r}")
        return self

    def as_dict(self) -> dict:
        return asdict(self)


def _coerce(name: str, value):
    kind = {f.name: f.type for f in fields(ServerConfig)}[name]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name}: {value!r}") from None


def load_config(path: str | os.PathLike | None = None, env: Mapping[str, str] | None = None, **overrides) -> ServerConfig:
    cfg = ServerConfig()
    known = {f.name for f in fields(ServerConfig)}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = replace(cfg, **{k: _coerce(k, v) for k, v in data.items()})
    env = os.environ if env is None else env
    for var, name in ENV_OVERRIDES.items():
        if var in env:
            cfg = replace(cfg, **{name: _coerce(name, env[var])})
    cfg = replace(cfg, **{k: _coerce(k, v) for k, v in overrides.items() if v is not None})
    return cfg.validate()
