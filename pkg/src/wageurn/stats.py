"""Inequality statistics for wealth vectors and simulation traces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import AllZero, EpsilonTooSmall, TailTooSmall

DEFAULT_EPSILONS = (0.5, 0.1, 0.01, 0.001, 0.0001)
DEFAULT_UNIT = 10.0  # currency per model unit
MIN_TAIL = 20


@dataclass
class SurvivalCurve:
    """Right-continuous ``w -> fraction of agents with unit * X_i > w``."""

    thresholds: np.ndarray
    survival: np.ndarray  # value on [thresholds[k], thresholds[k+1])

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        k = np.searchsorted(self.thresholds, w, side="right")
        vals = np.concatenate([[1.0], self.survival])
        return vals[k]


@dataclass
class ShareTable:
    epsilons: tuple
    raw: np.ndarray
    adjusted: np.ndarray

    def as_dict(self) -> dict:
        return {
            str(e): {"share": float(s), "adjusted": float(a)} for e, s, a in zip(self.epsilons, self.raw, self.adjusted)
        }


def survival_curve(X, unit_scale: float = DEFAULT_UNIT) -> SurvivalCurve:
    w = np.sort(np.asarray(X, dtype=float) * unit_scale)
    if w.size == 0:
        raise AllZero("empty wealth vector")
    thresholds = np.unique(w)
    # number of agents strictly above each threshold
    above = w.size - np.searchsorted(w, thresholds, side="right")
    return SurvivalCurve(thresholds, above / w.size)


def gini(values) -> float:
    """Mean absolute pairwise difference over twice the mean, via sorted ranks."""
    x = np.sort(np.asarray(values, dtype=float))
    if np.any(x < 0):
        raise ValueError("values must be non-negative")
    total = x.sum()
    if total <= 0:
        raise AllZero("all values are zero")
    n = x.size
    i = np.arange(1, n + 1)
    # rounding can push equal values a hair below zero
    return max(0.0, float(np.sum((2 * i - n - 1) * x) / (n * total)))


def top_shares(X, epsilons=DEFAULT_EPSILONS) -> ShareTable:
    """Share of the richest ``ceil(eps * A)`` agents, raw and without the single richest agent."""
    x = np.sort(np.asarray(X, dtype=float))[::-1]
    A = x.size
    total = x.sum()
    if total <= 0:
        raise AllZero("all wealth is zero")
    csum = np.cumsum(x) / total
    top1 = csum[0]
    raw, adj = [], []
    for eps in epsilons:
        if eps * A < 1 - 1e-9:
            raise EpsilonTooSmall(f"eps={eps} selects fewer than one of {A} agents")
        k = min(A, math.ceil(eps * A - 1e-9))
        s = csum[k - 1]
        raw.append(s)
        adj.append((s - top1) / (1 - top1) if top1 < 1 else 0.0)
    return ShareTable(tuple(epsilons), np.array(raw), np.array(adj))


def valid_epsilons(A: int, epsilons=DEFAULT_EPSILONS) -> tuple:
    return tuple(e for e in epsilons if e * A >= 1 - 1e-9)


def _loglog_slope(w, s) -> float:
    return float(np.polyfit(np.log(w), np.log(s), 1)[0])


def pareto_tail_fit(X, tail_fraction: float = 0.05) -> float:
    """Tail exponent from a least-squares line through log-survival vs log-wealth.

    The ``k``-th largest of ``n`` values is assigned survival ``k/n``.
    """
    x = np.sort(np.asarray(X, dtype=float))[::-1]
    m = int(math.ceil(tail_fraction * x.size))
    if m < MIN_TAIL:
        raise TailTooSmall(f"tail has {m} points, need >= {MIN_TAIL}")
    top = x[:m]
    if np.any(top <= 0):
        raise ValueError("tail values must be positive")
    if top[0] == top[-1]:
        raise TailTooSmall("tail values are all equal; no slope to fit")
    return -_loglog_slope(top, np.arange(1, m + 1) / x.size)


def pareto_tail_fit_curve(thresholds, survival, tail_fraction: float = 0.05) -> float:
    """Tail exponent from a tabulated survival curve, using points with survival <= ``tail_fraction``."""
    w = np.asarray(thresholds, dtype=float)
    s = np.asarray(survival, dtype=float)
    m = (s > 0) & (s <= tail_fraction) & (w > 0)
    if m.sum() < 2:
        raise TailTooSmall("fewer than two tail points on the curve")
    return -_loglog_slope(w[m], s[m])


def rank_correlation(a, b) -> float:
    """Spearman coefficient with average ranks for ties."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("inputs differ in length")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return float("nan")  # undefined for a constant input
    return float(sps.spearmanr(a, b).statistic)


def rate_of_return(trace, start_step: int, end_step: int, params) -> np.ndarray:
    """Capital gain net of wage income, relative to the starting wealth."""
    if end_step <= start_step:
        raise ValueError("end_step must exceed start_step")
    X0 = trace.at(start_step)  # MissingSnapshot if absent
    X1 = trace.at(end_step)
    dn = end_step - start_step
    return (X1 - X0 - dn * params.r * params.gamma) / X0


def ror_table(X0, ror) -> list:
    """Rows ``(agent_id, quantile, ror)``; quantile is the agent's starting-wealth rank over A."""
    ranks = sps.rankdata(X0, method="ordinal")
    A = len(X0)
    return [(i, float(ranks[i] / A), float(ror[i])) for i in range(A)]


def summary(X, gamma=None, epsilons=DEFAULT_EPSILONS, tail_fraction: float = 0.05) -> dict:
    """Per-snapshot report used by the CLI."""
    X = np.asarray(X, dtype=float)
    eps = valid_epsilons(X.size, epsilons)
    out = {"gini": gini(X), "shares": top_shares(X, eps).as_dict() if eps else {}}
    try:
        out["tail_exponent"] = pareto_tail_fit(X, tail_fraction)
    except TailTooSmall:
        out["tail_exponent"] = None
    if gamma is not None:
        rho = rank_correlation(X, gamma)
        out["rank_correlation"] = None if np.isnan(rho) else rho
        out["gini_gamma"] = gini(gamma)
    return out
