"""Service configuration: JSON file keys with environment overrides.

Every knob lives here so the CLI, the HTTP service and tests share one
source of defaults.  Environment variables use the ``AKG_`` prefix and win
over the file; unknown file keys are rejected early.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import AkgError


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data_dir: str = "./akg-data"
    chi: float = 0.6
    minsupp: float = 0.0
    relatedness: str = "token-overlap"
    relatedness_threshold: float = 0.7
    k_default: int = 10
    preset: str = "predictive"
    dataset: str | None = None
    taxonomy: str | None = None
    apply_feedback_immediately: bool = True
    # queries built from raw tickets keep only failure-describing features
    # (symptom/cause/sensor kinds); structured fields stay in the facets
    query_failure_kinds_only: bool = True

    def validate(self) -> "ServiceConfig":
        if not 0.0 <= self.chi <= 1.0:
            raise AkgError(f"chi {self.chi} outside [0, 1]")
        if not 0.0 <= self.minsupp <= 1.0:
            raise AkgError(f"minsupp {self.minsupp} outside [0, 1]")
        if not 0.0 <= self.relatedness_threshold <= 1.0:
            raise AkgError(f"relatedness_threshold {self.relatedness_threshold} outside [0, 1]")
        if self.k_default < 1:
            raise AkgError("k_default must be >= 1")
        if not 1 <= self.port <= 65535:
            raise AkgError(f"port {self.port} out of range")
        return self


_ENV_PREFIX = "AKG_"


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Build a config from defaults, an optional JSON file, and environment."""
    values: dict = {}
    known = {f.name: f.type for f in fields(ServiceConfig)}

    if path is not None:
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise AkgError(f"cannot read config {path}: {exc}") from exc
        unknown = set(data) - set(known)
        if unknown:
            raise AkgError(f"unknown config keys in {path}: {sorted(unknown)}")
        values.update(data)

    env = os.environ if env is None else env
    for name in known:
        raw = env.get(_ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = raw

    cfg = ServiceConfig()
    for f in fields(ServiceConfig):
        if f.name not in values:
            continue
        raw = values[f.name]
        current = getattr(cfg, f.name)
        try:
            if isinstance(current, bool):
                parsed = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int):
                parsed = int(raw)
            elif isinstance(current, float):
                parsed = float(raw)
            else:
                parsed = None if raw is None else str(raw)
        except (TypeError, ValueError) as exc:
            raise AkgError(f"bad config value for {f.name}: {raw!r} ({exc})") from exc
        setattr(cfg, f.name, parsed)
    return cfg.validate()
