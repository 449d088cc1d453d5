"""Service configuration: JSON file, environment overrides (LW_*), kwargs."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path


@dataclass
class ApiConfig:
    listen_address: str = "127.0.0.1:8420"
    data_dir: str = "."
    cors_origins: list[str] = field(default_factory=lambda: ["*"])
    evaluation_cadence_ms: int = 60_000
    ingest_poll_ms: int = 500
    rules_file: str | None = None
    ui_dir: str | None = None

    def __post_init__(self):
        self.host, self.port = _split_address(self.listen_address)
        if self.evaluation_cadence_ms < 100:
            raise ValueError("evaluation_cadence_ms must be >= 100")

    def validate_data_dir(self) -> Path:
        path = Path(self.data_dir)
        if not path.is_dir():
            raise FileNotFoundError(f"data_dir does not exist: {path}")
        return path


def _split_address(address: str) -> tuple[str, int]:
    host, sep, port = address.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"listen_address must be host:port, got {address!r}")
    return host or "127.0.0.1", int(port)


_ENV_PREFIX = "LW_"
_LIST_FIELDS = {"cors_origins"}
_INT_FIELDS = {"evaluation_cadence_ms", "ingest_poll_ms"}


def load_config(
    config_file: str | Path | None = None,
    env: dict[str, str] | None = None,
    **overrides,
) -> ApiConfig:
    """Precedence: explicit kwargs > LW_* environment > config file > defaults."""
    values: dict = {}
    if config_file is not None:
        values.update(json.loads(Path(config_file).read_text(encoding="utf-8")))
    env = os.environ if env is None else env
    names = {f.name for f in fields(ApiConfig)}
    for name in names:
        raw = env.get(_ENV_PREFIX + name.upper())
        if raw is None:
            continue
        if name in _LIST_FIELDS:
            values[name] = [part.strip() for part in raw.split(",") if part.strip()]
        elif name in _INT_FIELDS:
            values[name] = int(raw)
        else:
            values[name] = raw
    values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(values) - names
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ApiConfig(**values)
