"""Experiment configuration: strict TOML loading and a stable content hash."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError
from .network import DISTANCE_MODES
from .stats import EDIT_KINDS


@dataclass(frozen=True)
class NetworkSection:
    kind: str = "ba"
    n: int = 50
    m0: int = 3
    k: int = 2
    path: str = ""

    def check(self):
        if self.kind not in ("ba", "complete", "file"):
            raise ConfigError(f"network.kind must be ba, complete or file, got {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise ConfigError("network.path is required when network.kind = 'file'")
        if self.kind != "file" and self.n < 2:
            raise ConfigError(f"network.n must be >= 2, got {self.n}")
        if self.kind == "ba" and not 1 <= self.k <= self.m0 <= self.n:
            raise ConfigError(f"need 1 <= k <= m0 <= n, got k={self.k}, m0={self.m0}, n={self.n}")


@dataclass(frozen=True)
class ExposureSection:
    pareto_shape: float = 2.0
    pareto_scale: float = 1.0

    def check(self):
        if not self.pareto_shape > 1 or not self.pareto_scale > 0:
            raise ConfigError("exposures need pareto_shape > 1 and pareto_scale > 0")


@dataclass(frozen=True)
class BalanceSection:
    cap_low: float = 0.01
    cap_high: float = 0.02
    ext_multiplier: float = 200.0

    def check(self):
        if not 0 < self.cap_low <= self.cap_high < 1:
            raise ConfigError("balance needs 0 < cap_low <= cap_high < 1")
        if not self.ext_multiplier >= 0:
            raise ConfigError("balance.ext_multiplier must be >= 0")


@dataclass(frozen=True)
class SolvencySection:
    phi: float = 1.0

    def check(self):
        if not 0 <= self.phi <= 1:
            raise ConfigError(f"solvency.phi must lie in [0, 1], got {self.phi}")


@dataclass(frozen=True)
class ShockSection:
    fraction_hit: float = 0.1
    magnitude_mean: float = 10.0
    magnitude_sd: float = 5.0
    sign: str = "negative"
    fraction_grid: tuple = ()

    def check(self):
        for f in (self.fraction_hit, *self.fraction_grid):
            if not 0 < f <= 1:
                raise ConfigError(f"shock fractions must lie in (0, 1], got {f}")
        if not self.magnitude_sd >= 0:
            raise ConfigError("shocks.magnitude_sd must be >= 0")
        if self.sign != "negative":
            raise ConfigError(f"shocks.sign must be 'negative', got {self.sign!r}")


@dataclass(frozen=True)
class SolverSection:
    tolerance: float = 1e-5
    max_iter: int = 100_000
    distance_mode: str = "unit"

    def check(self):
        if not self.tolerance > 0 or self.max_iter < 1:
            raise ConfigError("solver needs tolerance > 0 and max_iter >= 1")
        if self.distance_mode not in DISTANCE_MODES:
            raise ConfigError(f"solver.distance_mode must be one of {DISTANCE_MODES}")


@dataclass(frozen=True)
class ClassificationSection:
    bucket_quantiles: tuple = (0.5, 0.9)
    alpha_prime: float = 0.05

    def check(self):
        q = self.bucket_quantiles
        if not q or any(not 0 < x < 1 for x in q) or any(b <= a for a, b in zip(q, q[1:])):
            raise ConfigError(f"bucket_quantiles must be strictly increasing in (0, 1), got {q}")
        if not 0 < self.alpha_prime < 1:
            raise ConfigError("classification.alpha_prime must lie in (0, 1)")


@dataclass(frozen=True)
class ComparisonSection:
    tolerances: tuple = (1e-3, 1e-4, 1e-5)

    def check(self):
        if not self.tolerances or any(not t > 0 for t in self.tolerances):
            raise ConfigError("comparison.tolerances must be a non-empty list of positive values")


@dataclass(frozen=True)
class PerturbationSection:
    edits: tuple = ("add_out", "add_in")
    m: int = 8
    replications: int = 20
    target: int = -1  # -1: highest-ranked node outside the top bucket

    def check(self):
        bad = [e for e in self.edits if e not in EDIT_KINDS]
        if bad or not self.edits:
            raise ConfigError(f"perturbation.edits must be drawn from {EDIT_KINDS}, got {bad}")
        if self.m < 0 or self.replications < 1 or self.target < -1:
            raise ConfigError("perturbation needs m >= 0, replications >= 1, target >= -1")


SECTIONS = {
    "network": NetworkSection,
    "exposures": ExposureSection,
    "balance": BalanceSection,
    "solvency": SolvencySection,
    "shocks": ShockSection,
    "solver": SolverSection,
    "classification": ClassificationSection,
    "comparison": ComparisonSection,
    "perturbation": PerturbationSection,
}


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkSection = field(default_factory=NetworkSection)
    exposures: ExposureSection = field(default_factory=ExposureSection)
    balance: BalanceSection = field(default_factory=BalanceSection)
    solvency: SolvencySection = field(default_factory=SolvencySection)
    shocks: ShockSection = field(default_factory=ShockSection)
    solver: SolverSection = field(default_factory=SolverSection)
    classification: ClassificationSection = field(default_factory=ClassificationSection)
    comparison: ComparisonSection = field(default_factory=ComparisonSection)
    perturbation: PerturbationSection = field(default_factory=PerturbationSection)
    runs: int = 100
    seed: int = 0

    def check(self):
        for name in SECTIONS:
            getattr(self, name).check()
        if self.runs < 2:
            raise ConfigError(f"runs must be >= 2, got {self.runs}")
        return self

    def with_seed(self, seed):
        return dataclasses.replace(self, seed=int(seed))

    def to_dict(self):
        return dataclasses.asdict(self)

    def hash(self):
        return config_hash(self)


def _coerce(value, default, where):
    """Check a TOML value against the type of the field default."""
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, tuple):
        ok = isinstance(value, list)
        if ok:
            proto = default[0] if default else 0.0
            value = tuple(_coerce(v, proto, f"{where}[]") for v in value)
    else:  # pragma: no cover
        ok = False
    if not ok:
        raise ConfigError(f"{where}: expected {type(default).__name__}, got {value!r}")
    return value


def _build(cls, table, where):
    if not isinstance(table, dict):
        raise ConfigError(f"[{where}] must be a table")
    defaults = cls()
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(table) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    kwargs = {k: _coerce(v, getattr(defaults, k), f"{where}.{k}") for k, v in table.items()}
    return cls(**kwargs)


def config_from_dict(data):
    data = dict(data)
    unknown = sorted(set(data) - set(SECTIONS) - {"runs", "seed"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    kwargs = {name: _build(cls, data[name], name) for name, cls in SECTIONS.items() if name in data}
    defaults = ExperimentConfig()
    for key in ("runs", "seed"):
        if key in data:
            kwargs[key] = _coerce(data[key], getattr(defaults, key), key)
    return ExperimentConfig(**kwargs).check()


def load_config(path=None):
    """Read a TOML config; ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig().check()
    try:
        with Path(path).open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def config_hash(cfg):
    """sha256 of the canonical JSON form; key order in the file is irrelevant."""
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
