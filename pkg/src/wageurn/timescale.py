"""Mapping between urn steps and calendar time.

Under constant growth ``mu`` total wealth grows by ``(1 + mu)`` per year, so
``t`` years after the start the urn has taken ``floor(((1+mu)**t - 1) N)``
steps. In empirical mode a table of average wealth per year fixes the map:
the urn reaches the year's average wealth after ``A * W / unit - N`` steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NegativeTime


@dataclass(frozen=True)
class TimeScale:
    mode: str = "constant"  # "constant" | "empirical"
    mu: float = 0.03
    years: tuple = ()
    average_wealth: tuple = ()
    agents: int = 0
    unit: float = 10.0

    def __post_init__(self):
        if self.mode not in ("constant", "empirical"):
            raise ConfigError(f"unknown time-scale mode {self.mode!r}")
        if self.mu <= -1:
            raise ConfigError("mu must be > -1")
        if self.mode == "empirical":
            years = np.asarray(self.years, dtype=float)
            if len(years) < 2 or np.any(np.diff(years) <= 0):
                raise ConfigError("empirical series needs >= 2 strictly increasing years")
            if len(self.average_wealth) != len(years) or self.agents < 1:
                raise ConfigError("empirical series needs one wealth value per year and an agent count")

    @classmethod
    def empirical(cls, years, average_wealth, agents: int, unit: float = 10.0) -> "TimeScale":
        return cls("empirical", 0.0, tuple(map(float, years)), tuple(map(float, average_wealth)), agents, unit)

    @property
    def rate(self) -> float:
        """Field-time per year for the annual clock: ``ln(1 + mu)``."""
        return math.log1p(self.mu)


def year_to_step(t: float, N: float, scale: TimeScale) -> int:
    """Step reached after ``t`` years (constant mode) or in calendar year ``t`` (empirical mode)."""
    if scale.mode == "constant":
        if t < 0:
            raise NegativeTime(f"t={t} < 0")
        return int(math.floor(math.expm1(t * math.log1p(scale.mu)) * N))
    years = np.asarray(scale.years)
    if t < years[0]:
        raise NegativeTime(f"year {t} precedes the series start {years[0]:g}")
    W = float(np.interp(t, years, scale.average_wealth))
    return int(math.floor(scale.agents * W / scale.unit - N))


def step_to_year(n: float, N: float, scale: TimeScale) -> float:
    if n < 0:
        raise NegativeTime(f"step {n} < 0")
    if scale.mode == "constant":
        return math.log1p(n / N) / math.log1p(scale.mu)
    wealth = np.asarray(scale.average_wealth)
    if np.any(np.diff(wealth) <= 0):
        raise ConfigError("average wealth must increase strictly to invert the time change")
    W = (n + N) * scale.unit / scale.agents
    return float(np.interp(W, wealth, scale.years))
