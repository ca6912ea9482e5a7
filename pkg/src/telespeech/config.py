"""Server configuration: JSON file with environment-variable overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

ENV_PREFIX = "TELESPEECH_"


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    data_dir: str = "./telespeech-data"
    default_pass_threshold: float = 0.6
    default_max_repeats: int = 3
    session_idle_minutes: float = 30.0
    log_requests: bool = True
    extra: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path | None = None, env: dict | None = None) -> "ServerConfig":
        """File values first, then TELESPEECH_* environment overrides."""
        env = os.environ if env is None else env
        values: dict = {}
        if path is not None:
            try:
                values = json.loads(Path(path).read_text())
            except FileNotFoundError:
                raise ConfigError(f"config file not found: {path}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from None
        known = {f.name: f.type for f in fields(cls) if f.name != "extra"}
        kwargs: dict = {}
        extra: dict = {}
        for key, value in values.items():
            (kwargs if key in known else extra)[key] = value
        for name in known:
            env_key = ENV_PREFIX + name.upper()
            if env_key in env:
                kwargs[name] = _coerce(env[env_key], name)
        cfg = cls(**kwargs)
        cfg.extra = extra
        if not (0.0 <= cfg.default_pass_threshold <= 1.0):
            raise ConfigError("default_pass_threshold must be in [0,1]")
        if not (1 <= cfg.default_max_repeats <= 10):
            raise ConfigError("default_max_repeats must be 1..10")
        return cfg


def _coerce(raw: str, name: str):
    if name in ("port", "default_max_repeats"):
        return int(raw)
    if name in ("default_pass_threshold", "session_idle_minutes"):
        return float(raw)
    if name == "log_requests":
        return raw.lower() in ("1", "true", "yes", "on")
    return raw
