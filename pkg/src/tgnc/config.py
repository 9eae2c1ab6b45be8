"""Run configuration: a flat dataclass, a diff-friendly key=value config
file, and the override chain flags > TGNC_SEED env > file > defaults.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .errors import ConfigError


@dataclass
class RunConfig:
    # splitting
    snapshots: int = 5
    overlap: float = 0.25
    # embedding dims
    k_r: int = 128
    k_s: int = 128
    word_dim: int = 300
    word_provider: str = "hashed"  # hashed | corpus | file
    word_vectors_path: str = ""
    # walks / skip-gram
    walks_per_node: int = 10
    walk_length: int = 80
    return_param: float = 1.0
    inout_param: float = 1.0
    sg_window: int = 10
    sg_negatives: int = 5
    sg_epochs: int = 5
    sg_learning_rate: float = 0.025
    # autoencoders
    ae_hidden: int = 64
    ae_epochs: int = 100
    ae_batch_size: int = 32
    ae_learning_rate: float = 0.001
    # fusion meta-learner
    mlp_hidden: int = 16
    mlp_epochs: int = 300
    mlp_batch_size: int = 32
    mlp_learning_rate: float = 0.01
    # forest
    forest_estimators: int = 100
    forest_max_depth: int = 5
    # aggregation
    voting: str = "uniform"  # uniform | linear | quadratic
    smoothing: bool = True
    smoothing_include_current: bool = True
    stacking_holdout: float = 0.0
    baseline: str = ""  # "" | merged
    # execution
    seed: int = 42
    jobs: int = 1

    def validate(self) -> None:
        if self.voting not in ("uniform", "linear", "quadratic"):
            raise ConfigError(f"voting must be uniform/linear/quadratic, got {self.voting!r}")
        if self.baseline not in ("", "merged"):
            raise ConfigError(f"baseline must be empty or 'merged', got {self.baseline!r}")
        if self.word_provider not in ("hashed", "corpus", "file"):
            raise ConfigError(f"word_provider must be hashed/corpus/file, got {self.word_provider!r}")
        if self.word_provider == "file" and not self.word_vectors_path:
            raise ConfigError("word_provider=file requires word_vectors_path")
        if not 0.0 <= self.overlap < 1.0:
            raise ConfigError(f"overlap must be in [0, 1), got {self.overlap}")
        if not 0.0 <= self.stacking_holdout < 1.0:
            raise ConfigError(f"stacking_holdout must be in [0, 1), got {self.stacking_holdout}")
        if self.snapshots < 2:
            raise ConfigError(f"snapshots must be >= 2, got {self.snapshots}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, value: str):
    kind = _FIELD_TYPES[key]
    value = value.strip()
    try:
        if kind == "bool":
            low = value.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(value)
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        return value.strip("\"'")
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {value!r} as {kind}") from None


def parse_config_file(path: str) -> dict:
    """Flat `key = value` lines; `#` comments; unknown keys rejected."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = _coerce(key, value)
    return out


def build_config(file_path: str | None = None, overrides: dict | None = None,
                 env: dict | None = None) -> RunConfig:
    """Defaults, then config file, then TGNC_SEED, then explicit flags."""
    cfg = RunConfig()
    if file_path:
        for key, value in parse_config_file(file_path).items():
            setattr(cfg, key, value)
    env = os.environ if env is None else env
    if env.get("TGNC_SEED"):
        try:
            cfg.seed = int(env["TGNC_SEED"])
        except ValueError:
            raise ConfigError(f"TGNC_SEED must be an integer, got {env['TGNC_SEED']!r}") from None
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config override {key!r}")
        setattr(cfg, key, value)
    cfg.validate()
    return cfg
