"""Model parameters from data.

Wages come from a binned income table, are weighted by a rank-linear saving
rule and normalised into the wage vector ``gamma``. The labor share follows
from macro series. Given a target share vector ``x`` the optimal ``r`` for
each ``beta`` is closed-form; ``beta`` itself is fitted by 1-D search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DegenerateDirection,
    DegenerateTarget,
    EmptyTable,
    NoInteriorMinimum,
    NonPositiveWage,
    WealthDecrease,
    ZeroWageWithPositiveC,
)
from .model import FeedbackSpec, choice_probabilities, make_params

DEFAULT_BETA_BRACKET = (0.5, 3.0)
TAIL_MEAN_FACTOR = 0.5  # open-bin mean = lower * (1 + TAIL_MEAN_FACTOR)


@dataclass(frozen=True)
class WageBinTable:
    """Taxpayer counts per net-wage bin; ``upper=None`` marks the open top bin."""

    bins: tuple
    tail_mean_excess: float | None = None

    def __post_init__(self):
        bins = tuple((float(lo), None if up is None else float(up), float(c)) for lo, up, c in self.bins)
        if not bins:
            raise EmptyTable("wage table has no bins")
        for k, (lo, up, c) in enumerate(bins):
            if c <= 0:
                raise DataError(f"bin {k}: count must be > 0")
            if lo < 0:
                raise DataError(f"bin {k}: negative lower bound")
            if up is None and k != len(bins) - 1:
                raise DataError("only the top bin may be open")
            if up is not None and up <= lo:
                raise DataError(f"bin {k}: upper <= lower")
            if k and bins[k - 1][1] is not None and lo < bins[k - 1][1]:
                raise DataError(f"bin {k} overlaps its predecessor")
        object.__setattr__(self, "bins", bins)

    @property
    def open_bin(self) -> bool:
        return self.bins[-1][1] is None

    @property
    def tail_excess(self) -> float:
        if self.tail_mean_excess is not None:
            return float(self.tail_mean_excess)
        return TAIL_MEAN_FACTOR * self.bins[-1][0]


@dataclass(frozen=True)
class MacroSeries:
    years: tuple
    avg_net_wage: tuple
    saving_rate: tuple
    avg_wealth: tuple

    def __post_init__(self):
        n = len(self.years)
        if not n or any(len(v) != n for v in (self.avg_net_wage, self.saving_rate, self.avg_wealth)):
            raise EmptyTable("macro series columns are empty or of unequal length")
        if any(w <= 0 for w in self.avg_wealth):
            raise DataError("average wealth must be > 0")
        if any(not 0 <= s <= 1 for s in self.saving_rate):
            raise DataError("saving rate must lie in [0, 1]")

    def row(self, year: int) -> int:
        try:
            return list(self.years).index(year)
        except ValueError:
            raise DataError(f"year {year} not in the series") from None


@dataclass
class CalibrationTarget:
    x: np.ndarray
    gamma: np.ndarray
    coupling: str = "correlated"
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        if self.x.shape != self.gamma.shape:
            raise DataError("target and wage vector differ in length")
        for name, v in (("x", self.x), ("gamma", self.gamma)):
            if np.any(v < 0) or abs(v.sum() - 1) > 1e-9:
                raise DataError(f"{name} is not on the simplex")


@dataclass
class RBPoint:
    beta: float
    r: float
    norm: float


@dataclass
class ContourScan:
    betas: np.ndarray
    cs: np.ndarray
    norms: np.ndarray  # shape (len(betas), len(cs))
    r: float

    @property
    def argmin(self) -> tuple:
        i, j = np.unravel_index(np.argmin(self.norms), self.norms.shape)
        return float(self.betas[i]), float(self.cs[j]), float(self.norms[i, j])


# ---------------------------------------------------------------------------
# wages


def sample_raw_wages(table: WageBinTable, A: int, rng) -> np.ndarray:
    """Draw ``A`` wages: bin by count, uniform inside closed bins, exponential tail in the open bin."""
    if A < 2:
        raise ValueError("A must be >= 2")
    counts = np.array([c for _, _, c in table.bins])
    which = rng.choice(len(counts), size=A, p=counts / counts.sum())
    out = np.empty(A)
    for k, (lo, up, _) in enumerate(table.bins):
        m = which == k
        n = int(m.sum())
        if not n:
            continue
        if up is None:
            out[m] = lo + rng.exponential(table.tail_excess, n)
        else:
            out[m] = rng.uniform(lo, up, n)
    # break ties so that the rank order is well defined
    vals, counts = np.unique(out, return_counts=True)
    if np.any(counts > 1):
        for v in vals[counts > 1]:
            idx = np.flatnonzero(out == v)
            out[idx[1:]] += 1e-9 * max(abs(v), 1.0) * np.arange(1, len(idx))
    return out


def apply_saving_weights(raw) -> np.ndarray:
    """Sort wages and weight the ``i``-th smallest by ``i`` (saving fraction ``i/A``)."""
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        raise EmptyTable("no wages")
    if np.any(raw <= 0):
        raise NonPositiveWage("wages must be > 0")
    w = np.sort(raw) * np.arange(1, raw.size + 1)
    return w / w.sum()


def skill_vector(gamma, c: float) -> np.ndarray:
    """Skill weights ``alpha_i = gamma_i**c`` (not normalised)."""
    gamma = np.asarray(gamma, dtype=float)
    if c < 0:
        raise ValueError("c must be >= 0")
    if c == 0:
        return np.ones_like(gamma)
    if np.any(gamma <= 0):
        raise ZeroWageWithPositiveC("alpha undefined for a zero wage when c > 0")
    return gamma**c


# ---------------------------------------------------------------------------
# labor share


def estimate_labor_share(series: MacroSeries, year: int) -> float:
    """Wage savings over the increase of average wealth since the previous year."""
    k = series.row(year)
    if k == 0 or series.years[k - 1] != year - 1:
        raise DataError(f"no wealth value for {year - 1}")
    increase = series.avg_wealth[k] - series.avg_wealth[k - 1]
    if increase <= 0:
        raise WealthDecrease(f"average wealth did not increase in {year}")
    return series.avg_net_wage[k] * series.saving_rate[k] / increase


def labor_share_table(series: MacroSeries) -> list:
    """One row per year with ``r`` (None where undefined) and a flag for ``r > 1``."""
    rows = []
    for year in series.years[1:]:
        try:
            r = estimate_labor_share(series, int(year))
        except (WealthDecrease, DataError):
            rows.append({"year": int(year), "r": None, "flag": "undefined"})
            continue
        rows.append({"year": int(year), "r": r, "flag": "above-one" if r > 1 else ""})
    return rows


# ---------------------------------------------------------------------------
# target and the r-beta line


def target_from_wealth_cdf(wealth, cdf, gamma, coupling: str = "correlated", seed: int = 0) -> CalibrationTarget:
    """Normalised share sample with one quantile per agent.

    Agent ``k`` (1-based, ascending) gets the wealth at CDF level
    ``(k - 0.5)/A``, interpolated linearly in log-wealth and clamped to the
    tabulated range. ``correlated`` pairs sorted wealth with sorted wages;
    ``independent`` shuffles wealth with a seeded permutation.
    """
    wealth = np.asarray(wealth, dtype=float)
    cdf = np.asarray(cdf, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if wealth.size < 2:
        raise EmptyTable("wealth CDF needs at least two rows")
    if np.any(wealth <= 0) or np.any(np.diff(cdf) <= 0) or cdf[0] <= 0 or cdf[-1] > 1:
        raise DataError("wealth must be > 0 and cdf strictly increasing in (0, 1]")
    A = gamma.size
    levels = (np.arange(1, A + 1) - 0.5) / A
    x = np.exp(np.interp(levels, cdf, np.log(wealth)))
    x /= x.sum()
    order = np.argsort(gamma, kind="stable")
    out = np.empty(A)
    if coupling == "correlated":
        out[order] = x
    elif coupling == "independent":
        out[:] = np.random.default_rng(seed).permutation(x)
    else:
        raise ValueError(f"unknown coupling {coupling!r}")
    notes = {"quantile_levels": "(k-0.5)/A", "interpolation": "linear in log-wealth", "seed": seed}
    return CalibrationTarget(out, gamma, coupling, notes)


def optimal_r_for_beta(x, gamma, feedback: FeedbackSpec) -> float:
    """Labor share minimising ``|G(x)|`` for fixed ``x`` and feedback, clamped to [0, 1].

    ``G = (p - x) - r (p - gamma)`` is affine in ``r``, so the minimiser is
    the projection coefficient ``1 - <p - gamma, x - gamma> / |p - gamma|^2``.
    """
    x = np.asarray(x, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    d = choice_probabilities(x, feedback) - gamma
    dd = float(d @ d)
    if dd == 0.0:
        raise DegenerateDirection("p(x) equals gamma")
    r = 1.0 - float(d @ (x - gamma)) / dd
    return min(1.0, max(0.0, r))


def field_norm(x, gamma, r, beta, alpha=None) -> float:
    x = np.asarray(x, dtype=float)
    p = choice_probabilities(x, FeedbackSpec(beta, np.ones_like(x) if alpha is None else alpha))
    return float(np.linalg.norm((1 - r) * p + r * np.asarray(gamma) - x))


def r_beta_line(target: CalibrationTarget, betas, alpha=None) -> list:
    alpha = np.ones_like(target.x) if alpha is None else np.asarray(alpha, dtype=float)
    out = []
    for b in np.asarray(betas, dtype=float):
        fb = FeedbackSpec(b, alpha)
        try:
            r = optimal_r_for_beta(target.x, target.gamma, fb)
        except DegenerateDirection:
            r = 1.0
        out.append(RBPoint(float(b), r, field_norm(target.x, target.gamma, r, b, alpha)))
    return out


def _golden(f, a, b, tol):
    inv = (math.sqrt(5) - 1) / 2
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_beta(
    target: CalibrationTarget,
    r: float,
    bracket=DEFAULT_BETA_BRACKET,
    alpha=None,
    tol: float = 1e-7,
    prescan: int = 51,
) -> tuple:
    """``beta`` minimising ``|G(x)|`` at fixed ``r``. Returns ``(beta, norm)``.

    A coarse pre-scan locates the basin; golden-section refines it inside
    the neighbouring grid cells.
    """
    x, gamma = target.x, target.gamma
    if np.allclose(x, x[0]) or np.allclose(x, gamma, atol=1e-12):
        raise DegenerateTarget("target is uniform or equals gamma; beta is not identified")
    make_params(r, gamma, 1.0, alpha)  # validates r, gamma, alpha

    def f(b):
        return field_norm(x, gamma, r, b, alpha)

    grid = np.linspace(bracket[0], bracket[1], prescan)
    vals = np.array([f(b) for b in grid])
    if np.ptp(vals) <= 1e-14 * max(1.0, vals.max()):
        raise DegenerateTarget("objective is flat in beta")
    k = int(np.argmin(vals))
    if k == 0 or k == prescan - 1:
        raise NoInteriorMinimum(f"minimum at the bracket edge beta={grid[k]:g}")
    beta = _golden(f, grid[k - 1], grid[k + 1], tol)
    return beta, f(beta)


def scan_beta_c(target: CalibrationTarget, r: float, betas, cs) -> ContourScan:
    """``|G(x)|`` over a (beta, c) grid with skills ``alpha = gamma**c``."""
    betas = np.asarray(betas, dtype=float)
    cs = np.asarray(cs, dtype=float)
    norms = np.empty((betas.size, cs.size))
    for j, c in enumerate(cs):
        alpha = skill_vector(target.gamma, c)
        for i, b in enumerate(betas):
            norms[i, j] = field_norm(target.x, target.gamma, r, b, alpha)
    return ContourScan(betas, cs, norms, float(r))
