"""Run configuration: built-in defaults < config file < command-line flags."""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .errors import ConfigError

CONFIG_ENV = "EMOTRAJ_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.5
    beta_ex: float = 0.05
    neutral: tuple = (0.5, 0.5, 0.5)
    top_k: Optional[int] = None
    min_score: float = 0.0
    dpo_beta: float = 0.1
    pa_gates: tuple = (2.0, 4.0)
    pa_mode: str = "final"
    aggregate: str = "min"
    resample: Optional[int] = None
    ahead_deg: float = 15.0
    side_deg: float = 60.0
    confidence_threshold: float = 0.3
    method: str = "spearman"
    jobs: int = 1
    seed: int = 0  # reserved; no stage is stochastic yet

    def validate(self) -> "RunConfig":
        problems = []
        if not 0.0 <= self.alpha <= 1.0:
            problems.append("alpha must be in [0, 1]")
        if not (self.beta_ex >= 0 and math.isfinite(self.beta_ex)):
            problems.append("beta_ex must be >= 0")
        if len(self.neutral) != 3 or not all(0.0 <= v <= 1.0 for v in self.neutral):
            problems.append("neutral must be three values in [0, 1]")
        if self.top_k is not None and self.top_k < 1:
            problems.append("top_k must be >= 1")
        if not (self.dpo_beta > 0 and math.isfinite(self.dpo_beta)):
            problems.append("dpo_beta must be > 0")
        if not self.pa_gates or not all(g > 0 for g in self.pa_gates):
            problems.append("pa_gates must be positive")
        if self.pa_mode not in ("final", "per-point-mean"):
            problems.append("pa_mode must be 'final' or 'per-point-mean'")
        if self.aggregate not in ("min", "mean"):
            problems.append("aggregate must be 'min' or 'mean'")
        if self.resample is not None and self.resample < 1:
            problems.append("resample must be >= 1")
        if not 0.0 < self.ahead_deg < self.side_deg < 180.0:
            problems.append("need 0 < ahead_deg < side_deg < 180")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            problems.append("confidence_threshold must be in [0, 1]")
        if self.method not in ("spearman", "kendall", "pearson"):
            problems.append("method must be spearman, kendall or pearson")
        if self.jobs < 1:
            problems.append("jobs must be >= 1")
        if problems:
            raise ConfigError("invalid configuration: " + "; ".join(problems))
        return self

    def provenance(self) -> dict:
        """Effective settings that can influence outputs (``jobs`` cannot)."""
        d = asdict(self)
        d.pop("jobs")
        return d


_FIELDS = {f.name for f in fields(RunConfig)}
_TUPLES = {"neutral", "pa_gates"}


def _coerce(overrides: dict) -> dict:
    out = {}
    for key, value in overrides.items():
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        if key in _TUPLES:
            value = tuple(float(v) for v in value)
        out[key] = value
    return out


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Merge defaults, a JSON config file (``path`` or ``$EMOTRAJ_CONFIG``) and overrides."""
    cfg = RunConfig()
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        cfg = replace(cfg, **_coerce(data))
    if overrides:
        cfg = replace(cfg, **_coerce({k: v for k, v in overrides.items() if v is not None}))
    return cfg.validate()
