"""Run configuration: one JSON document, overridable from the command line.

Output directory precedence: ``--out`` flag, then the config's
``output_dir``, then ``$WAGEURN_OUTPUT_DIR``, then ``./wageurn-out``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibration import apply_saving_weights, sample_raw_wages, skill_vector
from .errors import ConfigError
from .model import make_params

OUTPUT_ENV = "WAGEURN_OUTPUT_DIR"
DEFAULT_OUTPUT = "wageurn-out"
INIT_CHOICES = ("symmetric", "exponential", "pareto", "gamma-proportional")
GAMMA_SOURCES = ("uniform", "lognormal", "wage_bins", "file")


@dataclass
class RunConfig:
    A: int = 100
    r: float = 0.3
    beta: float = 1.1
    c: float = 0.0
    seed: int = 0
    engine: str = "fast"
    steps: int | None = None
    target_average_wealth: float | None = None
    snapshots: int = 2
    init: str = "symmetric"
    pareto_exponent: float = 1.5
    gamma_source: str = "lognormal"
    lognormal_sigma: float = 0.8
    wage_bins: str | None = None
    gamma_file: str | None = None
    unit: float = 10.0
    mu: float = 0.03
    macro: str | None = None
    output_dir: str | None = None
    ensemble: int = 1
    workers: int = 1

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config: file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"config: unknown field(s) {', '.join(unknown)}")
        return cls(**data).validate()

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return dataclasses.replace(self, **kw).validate()

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> "RunConfig":
        if self.A < 2:
            raise ConfigError("A: need at least two agents")
        if self.engine not in ("exact", "fast"):
            raise ConfigError(f"engine: unknown engine {self.engine!r}")
        if self.init not in INIT_CHOICES:
            raise ConfigError(f"init: choose from {', '.join(INIT_CHOICES)}")
        if self.init == "pareto" and self.pareto_exponent <= 1:
            raise ConfigError("pareto_exponent: must be > 1 for a finite mean")
        if self.gamma_source not in GAMMA_SOURCES:
            raise ConfigError(f"gamma_source: choose from {', '.join(GAMMA_SOURCES)}")
        for name in ("wage_bins", "gamma_file", "macro"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{name}: file {path} not found")
        if self.gamma_source == "wage_bins" and self.wage_bins is None:
            raise ConfigError("wage_bins: required when gamma_source is wage_bins")
        if self.gamma_source == "file" and self.gamma_file is None:
            raise ConfigError("gamma_file: required when gamma_source is file")
        if self.steps is not None and self.steps < 0:
            raise ConfigError("steps: must be >= 0")
        if self.snapshots < 2:
            raise ConfigError("snapshots: need at least 2")
        if self.ensemble < 1:
            raise ConfigError("ensemble: must be >= 1")
        return self


def resolve_output_dir(flag: str | None, config: RunConfig | None = None) -> Path:
    if flag:
        return Path(flag)
    if config is not None and config.output_dir:
        return Path(config.output_dir)
    if os.environ.get(OUTPUT_ENV):
        return Path(os.environ[OUTPUT_ENV])
    return Path(DEFAULT_OUTPUT)


def _stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), tag])


def build_gamma(cfg: RunConfig) -> np.ndarray:
    """Wage vector for the configured source; wage-bin draws get saving weights."""
    from .io import read_vector, read_wage_bins

    rng = _stream(cfg.seed, 1)
    if cfg.gamma_source == "uniform":
        return np.full(cfg.A, 1.0 / cfg.A)
    if cfg.gamma_source == "lognormal":
        g = rng.lognormal(0.0, cfg.lognormal_sigma, cfg.A)
        return g / g.sum()
    if cfg.gamma_source == "wage_bins":
        return apply_saving_weights(sample_raw_wages(read_wage_bins(cfg.wage_bins), cfg.A, rng))
    g = read_vector(cfg.gamma_file)
    if len(g) != cfg.A:
        raise ConfigError(f"gamma_file: has {len(g)} values, A is {cfg.A}")
    if np.any(g < 0) or g.sum() <= 0:
        raise ConfigError("gamma_file: values must be >= 0 with a positive sum")
    return g / g.sum()


def initial_wealth(kind: str, A: int, rng, gamma=None, pareto_exponent: float = 1.5) -> np.ndarray:
    """Initial wealth with mean one per agent."""
    if kind == "symmetric":
        return np.ones(A)
    if kind == "exponential":
        return rng.exponential(1.0, A)
    if kind == "pareto":
        a = pareto_exponent
        return (a - 1) / a * (1.0 + rng.pareto(a, A))
    if kind == "gamma-proportional":
        if gamma is None:
            raise ConfigError("init: gamma-proportional needs gamma")
        return A * np.asarray(gamma, dtype=float)
    raise ConfigError(f"init: choose from {', '.join(INIT_CHOICES)}")


def build_initial(cfg: RunConfig, gamma, seed: int | None = None) -> np.ndarray:
    rng = _stream(cfg.seed if seed is None else seed, 2)
    X = initial_wealth(cfg.init, cfg.A, rng, gamma, cfg.pareto_exponent)
    if np.any(X <= 0):
        raise ConfigError("init: produced non-positive wealth (zero wage with gamma-proportional?)")
    return X


def build_params(cfg: RunConfig, gamma):
    return make_params(cfg.r, gamma, cfg.beta, skill_vector(gamma, cfg.c))
