"""Deterministic mean-field dynamics of the share process.

The shares follow ``dZ/dt = rate(t) * G(Z)`` where the rate depends on the
clock: ``1/(1+t)`` for the large-initial-mass limit (t = steps / N),
``ln(1+mu)`` for calendar years under constant growth, or ``1`` for the
plain field flow used to locate fixed points. All clocks share the same
fixed points.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import linalg, optimize

from .errors import BoundaryPoint, FixedPointTimeout, LeftSimplex, StepSizeNonPositive, ZeroBaseNonPositiveExponent
from .model import ModelParams, as_share_point, choice_probabilities, field_G

DEFAULT_TOL = 1e-8
DEFAULT_H = 1e-3
FIXED_POINT_H = 0.1
SIMPLEX_SLACK = 1e-9

STABLE = "stable"
UNSTABLE = "unstable"
SADDLE = "saddle-or-unstable"
UNDETERMINED = "undetermined"

CLOCKS = {"field": 0, "lln": 1, "annual": 2}


@dataclass
class OdePath:
    times: np.ndarray
    points: np.ndarray  # one row per time
    terminal_grad_norm: float
    converged: bool = False

    @property
    def terminal(self) -> np.ndarray:
        return self.points[-1]

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation between recorded points."""
        k = np.searchsorted(self.times, t)
        if k == 0:
            return self.points[0]
        if k >= len(self.times):
            return self.points[-1]
        t0, t1 = self.times[k - 1], self.times[k]
        w = (t - t0) / (t1 - t0)
        return (1 - w) * self.points[k - 1] + w * self.points[k]


@dataclass
class FixedPointReport:
    x: np.ndarray
    grad_norm: float
    stability: str
    method: str = "heuristic"


@dataclass
class TwoAgentFixedPoint:
    x1: float
    stability: str

    @property
    def x(self) -> np.ndarray:
        return np.array([self.x1, 1.0 - self.x1])


@dataclass
class RegimeReport:
    regime: str  # "random-winner" | "intermediate" | "deterministic"
    limits: dict = field(default_factory=dict)  # corner index -> FixedPointReport


@dataclass
class Indicators:
    winners: int
    positive_field: int
    grad_norm: float


# ---------------------------------------------------------------------------
# compiled Euler integration


@njit(cache=True)
def _field_into(x, alpha, beta, r, gamma, out):
    A = x.shape[0]
    top = 0.0
    for i in range(A):
        if x[i] > top:
            top = x[i]
    if top <= 0.0:
        return False
    s = 0.0
    for i in range(A):
        if x[i] > 0.0:
            out[i] = alpha[i] * (x[i] / top) ** beta
        elif beta > 0.0:
            out[i] = 0.0
        else:
            return False
        s += out[i]
    if not (s > 0.0) or not np.isfinite(s):
        return False
    for i in range(A):
        out[i] = (1.0 - r) * out[i] / s + r * gamma[i] - x[i]
    return True


@njit(cache=True, nogil=True)
def _euler(x, alpha, beta, r, gamma, t0, horizon, h, clock, rate_const, stop_tol, record_every, rec_t, rec_x):
    """Integrate in place. Returns (status, t, n_recorded, |G|).

    status: 0 reached horizon, 1 |G| <= stop_tol, 2 left the simplex,
    3 field undefined.
    """
    A = x.shape[0]
    g = np.empty(A)
    trial = np.empty(A)
    t = t0
    n_rec = 0
    rec_t[0] = t
    rec_x[0, :] = x
    n_rec = 1
    step = 0
    gnorm = np.inf
    while True:
        if not _field_into(x, alpha, beta, r, gamma, g):
            return 3, t, n_rec, gnorm
        gnorm = math.sqrt(np.sum(g * g))
        if stop_tol >= 0.0 and gnorm <= stop_tol:
            status = 1
            break
        if t >= horizon - 1e-12 * max(1.0, abs(horizon)):
            status = 0
            break
        dt = h
        if t + dt > horizon:
            dt = horizon - t
        if clock == 0:
            rate = 1.0
        elif clock == 1:
            rate = 1.0 / (1.0 + t)
        else:
            rate = rate_const
        halvings = 0
        while True:
            ok = True
            for i in range(A):
                trial[i] = x[i] + dt * rate * g[i]
                if trial[i] < -SIMPLEX_SLACK:
                    ok = False
            if ok:
                break
            halvings += 1
            if halvings > 40:
                return 2, t, n_rec, gnorm
            dt *= 0.5
        s = 0.0
        for i in range(A):
            if trial[i] < 0.0:
                trial[i] = 0.0
            s += trial[i]
        for i in range(A):
            x[i] = trial[i] / s
        t += dt
        step += 1
        if record_every > 0 and step % record_every == 0 and n_rec < rec_t.shape[0] - 1:
            rec_t[n_rec] = t
            rec_x[n_rec, :] = x
            n_rec += 1
    if rec_t[n_rec - 1] != t:
        rec_t[n_rec] = t
        rec_x[n_rec, :] = x
        n_rec += 1
    return status, t, n_rec, gnorm


def integrate_share_ode(
    x0,
    params: ModelParams,
    horizon: float,
    h: float = DEFAULT_H,
    clock: str = "lln",
    mu: float = 0.03,
    record_every: int = 1,
    stop_tol: float | None = None,
    t0: float = 0.0,
    max_records: int = 100_000,
    max_steps: int = 10**9,
) -> OdePath:
    """Explicit Euler with renormalisation onto the simplex after each step.

    A step that would push a component below ``-1e-9`` is halved until it
    does not; :class:`LeftSimplex` is raised if 40 halvings do not suffice.
    """
    if h <= 0:
        raise StepSizeNonPositive(f"h={h}")
    if clock not in CLOCKS:
        raise ValueError(f"unknown clock {clock!r}")
    x = np.array(as_share_point(x0, tol=SIMPLEX_SLACK), dtype=float)
    n_steps = max(0, int(math.ceil((horizon - t0) / h)))
    if n_steps > max_steps:
        raise ValueError(f"{n_steps} Euler steps exceed max_steps={max_steps}; raise h or shorten the horizon")
    if record_every <= 0:
        cap = 2
    else:
        cap = min(n_steps // record_every + 3, max_records + 3)
        if n_steps // record_every + 3 > cap:
            record_every = max(1, n_steps // max_records)
            cap = n_steps // record_every + 3
    rec_t = np.empty(cap)
    rec_x = np.empty((cap, len(x)))
    status, t, n_rec, gnorm = _euler(
        x,
        np.ascontiguousarray(params.alpha),
        params.beta,
        params.r,
        np.ascontiguousarray(params.gamma),
        float(t0),
        float(horizon),
        float(h),
        CLOCKS[clock],
        math.log1p(mu),
        -1.0 if stop_tol is None else float(stop_tol),
        int(record_every),
        rec_t,
        rec_x,
    )
    if status == 2:
        raise LeftSimplex(f"step left the simplex at t={t:g}; reduce h")
    if status == 3:
        raise ZeroBaseNonPositiveExponent("field undefined on the boundary for beta <= 0")
    return OdePath(rec_t[:n_rec].copy(), rec_x[:n_rec].copy(), float(gnorm), status == 1)


# ---------------------------------------------------------------------------
# local stability


def _p_and_q(x, params: ModelParams):
    """Choice probabilities and ``q_i = p_i / x_i`` (limits at ``x_i = 0``)."""
    x = np.asarray(x, dtype=float)
    beta, alpha = params.beta, params.alpha
    top = x.max()
    y = x / top
    pos = y > 0
    if not pos.all() and beta <= 0:
        raise BoundaryPoint("zero share with beta <= 0")
    w = np.zeros_like(y)
    w[pos] = alpha[pos] * y[pos] ** beta
    S = w.sum()
    p = w / S
    q = np.empty_like(y)
    q[pos] = alpha[pos] * y[pos] ** (beta - 1) / (S * top)
    if beta > 1:
        q[~pos] = 0.0
    elif beta == 1:
        q[~pos] = alpha[~pos] / (S * top)
    else:
        q[~pos] = np.inf
    return p, q


def stability_margins(x, params: ModelParams) -> np.ndarray:
    """Per agent, ``max_j dG_i/dx_i - dG_i/dx_j`` over ``j != i``.

    ``-dG_i/dx_j`` grows with ``q_j``, so the worst partner is the agent with
    the largest ``q_j`` (the richest one when alpha is uniform and beta > 1).
    """
    p, q = _p_and_q(x, params)
    A = len(p)
    order = np.argsort(q)
    first, second = order[-1], order[-2] if A > 1 else order[-1]
    q_other = np.full(A, q[first])
    q_other[first] = q[second]
    with np.errstate(invalid="ignore"):
        own = np.where(q > 0, q * (1 - p), 0.0)
        cross = np.where(p > 0, p * q_other, 0.0)
    return (1 - params.r) * params.beta * (own + cross) - 1.0


def region_P_membership(x, params: ModelParams) -> bool:
    return bool(np.all(stability_margins(x, params) < 0))


def stability_heuristic(x, params: ModelParams) -> str:
    return STABLE if region_P_membership(x, params) else UNSTABLE


def jacobian_G(x, params: ModelParams) -> np.ndarray:
    """``dG_i/dx_j = (1-r) beta (delta_ij q_i - p_i q_j) - delta_ij``."""
    p, q = _p_and_q(x, params)
    if not np.all(np.isfinite(q)):
        raise BoundaryPoint("Jacobian diverges at a zero share for beta < 1")
    A = len(p)
    return (1 - params.r) * params.beta * (np.diag(q) - np.outer(p, q)) - np.eye(A)


def tangent_spectrum(x, params: ModelParams) -> np.ndarray:
    """Eigenvalues of the Jacobian restricted to the sum-zero tangent space."""
    A = len(x)
    Q = linalg.null_space(np.ones((1, A)))
    return np.linalg.eigvals(Q.T @ jacobian_G(x, params) @ Q)


def eigen_stability(x, params: ModelParams, max_agents: int = 50) -> str:
    if len(x) > max_agents:
        raise ValueError(f"eigenvalue check limited to A <= {max_agents}")
    return STABLE if tangent_spectrum(x, params).real.max() < 0 else UNSTABLE


# ---------------------------------------------------------------------------
# fixed points


def find_fixed_point(
    x0,
    params: ModelParams,
    tol: float = DEFAULT_TOL,
    h: float = FIXED_POINT_H,
    max_time: float = 1e5,
    raise_on_timeout: bool = False,
) -> FixedPointReport:
    """Follow the field flow from ``x0`` until ``|G| <= tol``."""
    path = integrate_share_ode(
        x0, params, max_time, h=h, clock="field", stop_tol=tol, record_every=0, max_steps=max(10**9, int(max_time / h) + 1)
    )
    x = path.terminal
    if not path.converged:
        report = FixedPointReport(x, path.terminal_grad_norm, UNDETERMINED)
        if raise_on_timeout:
            raise FixedPointTimeout(f"|G|={path.terminal_grad_norm:.3g} > {tol:g} at t={max_time:g}", report)
        return report
    return FixedPointReport(x, path.terminal_grad_norm, stability_heuristic(x, params))


def _two_agent_G1(x1, params: ModelParams):
    a1, a2 = params.alpha
    b = params.beta
    x1 = np.asarray(x1, dtype=float)
    x2 = 1.0 - x1
    with np.errstate(divide="ignore", invalid="ignore"):
        top = np.maximum(x1, x2)
        w1 = a1 * (x1 / top) ** b
        w2 = a2 * (x2 / top) ** b
        p1 = w1 / (w1 + w2)
    return (1 - params.r) * p1 + params.r * params.gamma[0] - x1


def fixed_points_two_agents(params: ModelParams, grid: int = 4001, xtol: float = 1e-12) -> list:
    """All sign changes of ``G_1(x, 1-x)`` on a grid, refined by bisection.

    Downcrossings are stable, upcrossings unstable, grid zeros without a sign
    change are tangencies (saddle-or-unstable).
    """
    if params.A != 2:
        raise ValueError("two-agent scan requires A = 2")
    lo, hi = (0.0, 1.0) if params.beta > 0 else (1e-9, 1 - 1e-9)
    xs = np.linspace(lo, hi, grid)
    vals = _two_agent_G1(xs, params)

    def f(u):
        return float(_two_agent_G1(u, params))

    out = []
    for k in range(grid):
        v = vals[k]
        left = vals[k - 1] if k > 0 else None
        right = vals[k + 1] if k + 1 < grid else None
        if v == 0.0:
            if left is None:
                kind = STABLE if right < 0 else UNSTABLE if right > 0 else SADDLE
            elif right is None:
                kind = STABLE if left > 0 else UNSTABLE if left < 0 else SADDLE
            elif left > 0 > right:
                kind = STABLE
            elif left < 0 < right:
                kind = UNSTABLE
            else:
                kind = SADDLE
            out.append(TwoAgentFixedPoint(float(xs[k]), kind))
        elif right is not None and right != 0.0 and (v > 0) != (right > 0):
            root = optimize.brentq(f, xs[k], xs[k + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
            out.append(TwoAgentFixedPoint(float(root), STABLE if v > 0 else UNSTABLE))
    return out


def critical_labor_share_two_agents(beta: float, gamma1: float = 0.5, alpha=(1.0, 1.0), tol: float = 1e-6) -> float:
    """Smallest ``r`` above which only one stable fixed point remains (bisection)."""
    from .model import make_params

    def stable_count(r):
        params = make_params(r, [gamma1, 1 - gamma1], beta, alpha)
        return sum(fp.stability == STABLE for fp in fixed_points_two_agents(params))

    lo, hi = 0.0, 1.0 - 1e-9
    if stable_count(lo) < 2:
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stable_count(mid) >= 2:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_points_search(params: ModelParams, n_grid: int = 24, tol: float = 1e-11) -> list:
    """Fixed points of small systems by Newton iteration from a simplex grid.

    Unlike the flow, Newton also lands on unstable points. Each point is
    classified by both the heuristic and the tangent-space eigenvalues.
    """
    A = params.A

    def full(y):
        return np.append(y, 1.0 - y.sum())

    def fun(y):
        return field_G(np.clip(full(y), 1e-300, None), params)[:-1]

    def jac(y):
        J = jacobian_G(np.clip(full(y), 1e-300, None), params)
        return J[:-1, :-1] - J[:-1, [-1]]

    found = []
    ticks = np.linspace(0.02, 0.98, n_grid)
    for start in _simplex_grid(A, ticks):
        try:
            sol = optimize.root(fun, start[:-1], jac=jac, method="hybr")
        except (BoundaryPoint, FloatingPointError, ValueError):
            continue
        x = full(sol.x)
        if np.any(x <= 0) or np.any(x >= 1):
            continue
        g = np.linalg.norm(field_G(x, params))
        if g > tol:
            continue
        if any(np.abs(x - f.x).max() < 1e-7 for f in found):
            continue
        found.append(FixedPointReport(x, float(g), eigen_stability(x, params), "eigenvalue"))
    return found


def polish_fixed_point(x, params: ModelParams, max_move: float = 1e-3) -> np.ndarray:
    """Refine an approximate interior fixed point by Newton iteration.

    Returns ``x`` unchanged if the iteration fails or moves further than
    ``max_move``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        return x

    def full(y):
        return np.append(y, 1.0 - y.sum())

    def fun(y):
        return field_G(np.clip(full(y), 1e-300, None), params)[:-1]

    def jac(y):
        J = jacobian_G(np.clip(full(y), 1e-300, None), params)
        return J[:-1, :-1] - J[:-1, [-1]]

    try:
        sol = optimize.root(fun, x[:-1], jac=jac, method="hybr")
    except (BoundaryPoint, FloatingPointError, ValueError):
        return x
    y = full(sol.x)
    if not sol.success or np.abs(y - x).max() > max_move or np.any(y <= 0):
        return x
    return y


def _simplex_grid(A: int, ticks):
    if A == 2:
        for t in ticks:
            yield np.array([t, 1 - t])
        return
    import itertools

    for combo in itertools.product(ticks, repeat=A - 1):
        s = sum(combo)
        if s < 0.99:
            yield np.array(list(combo) + [1 - s])


def classify_regime(
    params: ModelParams,
    tol: float = DEFAULT_TOL,
    corners=None,
    h: float = FIXED_POINT_H,
    max_time: float = 1e5,
    same_point_tol: float = 1e-6,
    workers: int = 1,
) -> RegimeReport:
    """Bracket the regime from flow limits started at simplex corners.

    deterministic: every corner start reaches the same point;
    random-winner: the lowest-wage agent dominates the limit started at its
    own corner; intermediate otherwise.
    """
    A = params.A
    order = np.argsort(params.gamma, kind="stable")
    poorest = int(order[0])
    if corners is None:
        corners = range(A) if A <= 50 else sorted({poorest, int(order[-2]), int(order[-1])})
    corners = sorted({int(c) for c in corners} | {poorest})

    def one(i):
        e = np.zeros(A)
        e[i] = 1.0
        return i, find_fixed_point(e, params, tol, h, max_time, raise_on_timeout=True)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            limits = dict(pool.map(one, corners))
    else:
        limits = dict(map(one, corners))

    # flow limits stop at |G| <= tol, which can sit far from the point along a
    # weakly contracting direction; Newton polishing removes that slack
    pts = np.array([polish_fixed_point(limits[i].x, params) for i in corners])
    if np.all(np.abs(pts - pts[0]).max(axis=1) <= same_point_tol):
        return RegimeReport("deterministic", limits)
    lim = limits[poorest].x
    others = np.delete(lim, poorest)
    if lim[poorest] > others.max():
        return RegimeReport("random-winner", limits)
    return RegimeReport("intermediate", limits)


def indicators(x, params: ModelParams) -> Indicators:
    """Winners (share above wage share), agents with positive field, and |G|."""
    x = np.asarray(x, dtype=float)
    G = field_G(x, params)
    return Indicators(int(np.sum(x > params.gamma)), int(np.sum(G > 0)), float(np.linalg.norm(G)))


def indicator_timeline(path: OdePath, params: ModelParams) -> np.ndarray:
    """Rows of (t, winners, positive-field count, |G|) along a path."""
    rows = []
    for t, x in zip(path.times, path.points):
        ind = indicators(x, params)
        rows.append((t, ind.winners, ind.positive_field, ind.grad_norm))
    return np.array(rows)


__all__ = [
    "OdePath",
    "FixedPointReport",
    "TwoAgentFixedPoint",
    "RegimeReport",
    "Indicators",
    "integrate_share_ode",
    "find_fixed_point",
    "fixed_points_two_agents",
    "critical_labor_share_two_agents",
    "fixed_points_search",
    "polish_fixed_point",
    "stability_margins",
    "stability_heuristic",
    "region_P_membership",
    "jacobian_G",
    "tangent_spectrum",
    "eigen_stability",
    "classify_regime",
    "indicators",
    "indicator_timeline",
    "choice_probabilities",
]
