"""Platform configuration.

One flat key = value file (TOML-style scalars, python-literal lists), for
example::

    port = 8411
    data_dir = "/var/lib/qruntime"
    token_file = "tokens.json"
    poll_interval_s = 60
    staleness_limit_s = 300
    user_job_limit = 5
    fleet_seed = 7
    drift_sigma = 0.05
    dilation_us_per_unit = 1.0
    noisy = true

Environment variables override file values with the QRUNTIME_ prefix
(QRUNTIME_PORT=9000, QRUNTIME_DATA_DIR=/tmp/qr, ...).
"""

from __future__ import annotations

import ast
import os
from dataclasses import dataclass, fields
from pathlib import Path

ENV_PREFIX = "QRUNTIME_"

# Used when no token file is configured; suitable for local development only.
DEV_TOKEN = "dev-token"
DEV_USER = "dev"


@dataclass
class PlatformConfig:
    host: str = "127.0.0.1"
    port: int = 8411
    data_dir: str = "./qruntime-data"
    token_file: str | None = None
    poll_interval_s: float = 60.0
    staleness_limit_s: float = 300.0
    user_job_limit: int = 5
    worker_ttl_s: float = 30.0
    session_ttl_s: float = 600.0
    reservation_default_s: float = 900.0
    dilation_us_per_unit: float = 1.0
    max_job_wall_s: float = 2.0
    fleet_seed: int = 7
    drift_sigma: float = 0.05
    coherence_step: float = 0.02
    noisy: bool = True
    default_workers: int = 2
    worker_max_parallel: int = 4
    fsync: bool = True
    pump_interval_s: float = 0.02


def _coerce(raw: str, target_type):
    text = raw.strip()
    if target_type is bool:
        if text.lower() in ("true", "1", "yes", "on"):
            return True
        if text.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if target_type is int:
        return int(text)
    if target_type is float:
        return float(text)
    # strings (possibly quoted) and optional strings
    if text.lower() in ("none", "null", ""):
        return None
    if text and text[0] in "\"'":
        return str(ast.literal_eval(text))
    return text


def load_config(path: str | Path | None = None, env: dict[str, str] | None = None) -> PlatformConfig:
    """File values, then environment overrides, then dataclass defaults."""
    env = env if env is not None else dict(os.environ)
    values: dict[str, str] = {}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            values[key.strip()] = value.split("#", 1)[0].strip()

    config = PlatformConfig()
    by_name = {f.name: f for f in fields(PlatformConfig)}
    for key, raw in values.items():
        f = by_name.get(key)
        if f is None:
            raise ValueError(f"unknown configuration key '{key}'")
        setattr(config, key, _coerce(raw, _base_type(f.type)))
    for f in fields(PlatformConfig):
        env_key = ENV_PREFIX + f.name.upper()
        if env_key in env:
            setattr(config, f.name, _coerce(env[env_key], _base_type(f.type)))
    return config


def _base_type(annotation) -> type:
    text = annotation if isinstance(annotation, str) else getattr(annotation, "__name__", str(annotation))
    for name, t in (("bool", bool), ("int", int), ("float", float)):
        if text == name:
            return t
    return str
