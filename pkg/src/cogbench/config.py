"""Run configuration: defaults, JSON config files, CLI overrides."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigurationError
from .policies import DEFAULT_COST_TABLE, PolicyKind, PolicyParams
from .radio import GRID_ACCURACY, GRID_HW_DELAY, GRID_M, GRID_POLICIES
from .scenarios import default_scenarios_path, load_scenarios

DEFAULT_SEED = 12648430
DEFAULT_REPS = 200


@dataclass(frozen=True)
class RunConfig:
    """Everything one bench run depends on.

    ``slots=None`` uses each scenario's own horizon; ``scenario_file=None``
    uses the packaged default set.
    """

    master_seed: int = DEFAULT_SEED
    policies: tuple[str, ...] = tuple(p.value for p in GRID_POLICIES)
    m_set: tuple[int, ...] = GRID_M
    accuracy_set: tuple[float, ...] = GRID_ACCURACY
    hw_delay_set: tuple[float, ...] = GRID_HW_DELAY
    scenario_file: str | None = None
    slots: int | None = None
    reps: int = DEFAULT_REPS
    retention: float = 1.0
    rotate: str = "varimax"
    method: str = "fa"
    out_dir: str = "out"
    workers: int | None = None
    ew_gamma: float | None = None
    pola_eps0: float = 1.0
    qlearn_alpha: float = 0.1
    qlearn_eps: float = 0.1
    cost_table: dict = field(default_factory=lambda: {
        k.value: v for k, v in DEFAULT_COST_TABLE.items()})

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigurationError("master_seed must fit in 64 bits")
        bad = [p for p in self.policies if p not in PolicyKind._value2member_map_]
        if bad:
            raise ConfigurationError(
                f"unknown policies {bad}; valid: {[k.value for k in PolicyKind]}")
        if not self.policies:
            raise ConfigurationError("at least one policy is required")
        if any(m < 1 for m in self.m_set):
            raise ConfigurationError("sensor counts must be >= 1")
        if any(not 0.5 <= a <= 1.0 for a in self.accuracy_set):
            raise ConfigurationError("accuracies must lie in [0.5, 1]")
        if any(h < 0 for h in self.hw_delay_set):
            raise ConfigurationError("hw delays must be >= 0")
        if self.reps < 1 or (self.slots is not None and self.slots < 1):
            raise ConfigurationError("reps and slots must be >= 1")
        if self.rotate not in ("none", "varimax"):
            raise ConfigurationError("rotate must be 'none' or 'varimax'")
        if self.method not in ("fa", "pca"):
            raise ConfigurationError("method must be 'fa' or 'pca'")
        missing = [k.value for k in PolicyKind if k.value not in self.cost_table]
        if missing:
            raise ConfigurationError(f"cost_table missing policies {missing}")

    def policy_kinds(self) -> tuple[PolicyKind, ...]:
        return tuple(PolicyKind(p) for p in self.policies)

    def policy_params(self) -> PolicyParams:
        return PolicyParams(
            ew_gamma=self.ew_gamma,
            pola_eps0=self.pola_eps0,
            qlearn_alpha=self.qlearn_alpha,
            qlearn_eps=self.qlearn_eps,
            cost_table={PolicyKind(k): float(v) for k, v in self.cost_table.items()},
        )

    def resolve_scenario_path(self) -> Path:
        if self.scenario_file is None:
            return default_scenarios_path()
        return Path(self.scenario_file)

    def load_scenarios(self):
        return load_scenarios(self.resolve_scenario_path())

    def canonical_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    def config_hash(self) -> str:
        """Digest of the result-determining fields: where outputs land and
        how many workers computed them cannot change a single byte of them."""
        determining = {k: v for k, v in self.canonical_dict().items()
                       if k not in ("out_dir", "workers")}
        blob = json.dumps(determining, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def load_config(path: str | Path) -> RunConfig:
    """Read a JSON config file; unknown keys are rejected."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigurationError(
            f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a JSON object")
    valid = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - valid)
    if unknown:
        raise ConfigurationError(f"{path}: unknown config keys {unknown}")
    for key in ("policies", "m_set", "accuracy_set", "hw_delay_set"):
        if key in data:
            data[key] = tuple(data[key])
    return RunConfig(**data)


def with_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Apply non-None CLI overrides on top of a config."""
    applied = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **applied) if applied else config
