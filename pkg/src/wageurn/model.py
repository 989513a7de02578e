"""Parameters and mathematical primitives of the wage-extended Polya urn.

Each step adds one unit of wealth: a fraction ``r`` is split across agents
according to the wage vector ``gamma`` and the remaining ``1 - r`` goes to a
single agent drawn with probability proportional to ``alpha_i * X_i**beta``.

Share vectors are plain 1-D float arrays on the probability simplex.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllWeightsZero,
    BoundaryPoint,
    ConfigError,
    DegenerateLaborShareOne,
    DimensionMismatch,
    ExponentNotSublinear,
    GammaNotSimplex,
    IndexOutOfRange,
    LaborShareOutOfRange,
    NonPositiveAlpha,
    ZeroBaseNonPositiveExponent,
)

SIMPLEX_TOL = 1e-12
LONG_RUN_SIMPLEX_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FeedbackSpec:
    """Homogeneous feedback ``F_i(k) = alpha_i * k**beta``."""

    beta: float
    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "alpha", _frozen(self.alpha))

    @classmethod
    def uniform(cls, A: int, beta: float) -> "FeedbackSpec":
        return cls(beta, np.ones(A))


@dataclass(frozen=True, eq=False)
class ModelParams:
    r: float
    gamma: np.ndarray
    feedback: FeedbackSpec

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "gamma", _frozen(self.gamma))

    @property
    def A(self) -> int:
        return len(self.gamma)

    @property
    def beta(self) -> float:
        return self.feedback.beta

    @property
    def alpha(self) -> np.ndarray:
        return self.feedback.alpha

    def to_dict(self) -> dict:
        return {
            "A": self.A,
            "r": self.r,
            "beta": self.beta,
            "gamma": self.gamma.tolist(),
            "alpha": self.alpha.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return make_params(d["r"], d["gamma"], d["beta"], d.get("alpha"))

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()

    def replace(self, **changes) -> "ModelParams":
        d = {"r": self.r, "gamma": self.gamma, "beta": self.beta, "alpha": self.alpha}
        d.update(changes)
        return make_params(d["r"], d["gamma"], d["beta"], d["alpha"])


@dataclass
class WealthState:
    """Absolute wealth ``X`` after ``n`` steps; ``N`` is the initial total."""

    X: np.ndarray
    n: int = 0
    N: float = field(default=None)

    def __post_init__(self):
        self.X = np.array(self.X, dtype=float)
        if self.N is None:
            self.N = float(self.X.sum())

    @property
    def shares(self) -> np.ndarray:
        return self.X / self.X.sum()

    def copy(self) -> "WealthState":
        return WealthState(self.X.copy(), self.n, self.N)


def validate_params(params: ModelParams) -> ModelParams:
    gamma, alpha = params.gamma, params.alpha
    if len(alpha) != len(gamma):
        raise DimensionMismatch(f"alpha has length {len(alpha)}, gamma has length {len(gamma)}")
    if len(gamma) < 2:
        raise DimensionMismatch("at least two agents are required")
    if not 0.0 <= params.r <= 1.0:
        raise LaborShareOutOfRange(f"r={params.r} not in [0, 1]")
    if np.any(gamma < 0) or abs(gamma.sum() - 1.0) > SIMPLEX_TOL:
        raise GammaNotSimplex(f"gamma sums to {gamma.sum()!r}")
    if not np.all(alpha > 0):
        raise NonPositiveAlpha("all alpha_i must be > 0")
    if not np.isfinite(params.beta):
        raise ConfigError("beta must be finite")
    return params


def make_params(r, gamma, beta, alpha=None) -> ModelParams:
    """Build and validate parameters; ``alpha`` defaults to all ones."""
    gamma = np.asarray(gamma, dtype=float)
    if alpha is None:
        alpha = np.ones(len(gamma))
    return validate_params(ModelParams(r, gamma, FeedbackSpec(beta, alpha)))


def as_share_point(x, tol: float = SIMPLEX_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or np.any(x < -tol) or abs(x.sum() - 1.0) > tol:
        raise GammaNotSimplex(f"point not on the simplex (sum={x.sum()!r})")
    return x


def feedback_weights(x, feedback: FeedbackSpec) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if len(x) != len(feedback.alpha):
        raise DimensionMismatch("x and alpha differ in length")
    zero = x == 0
    if np.any(zero):
        if feedback.beta <= 0:
            raise ZeroBaseNonPositiveExponent("0**beta undefined for beta <= 0")
        w = np.zeros_like(x)
        w[~zero] = feedback.alpha[~zero] * x[~zero] ** feedback.beta
        return w
    return feedback.alpha * x**feedback.beta


def choice_probabilities(x, feedback: FeedbackSpec) -> np.ndarray:
    """Probability that each agent wins the next capital-return unit."""
    x = np.asarray(x, dtype=float)
    top = x.max()
    if top <= 0:
        raise AllWeightsZero("all weights are zero")
    # Rescaling by the max keeps x**beta in range and leaves p unchanged.
    w = feedback_weights(x / top, feedback)
    s = w.sum()
    if s <= 0 or not np.isfinite(s):
        raise AllWeightsZero("weights sum to zero")
    return w / s


def increment_vector(i: int, r: float, gamma) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    if not 0 <= i < len(gamma):
        raise IndexOutOfRange(f"agent index {i} outside [0, {len(gamma)})")
    v = r * gamma
    v[i] += 1.0 - r
    return v


def field_G(x, params: ModelParams) -> np.ndarray:
    """Centered expected share increment ``(1-r) p(x) + r gamma - x``."""
    x = np.asarray(x, dtype=float)
    p = choice_probabilities(x, params.feedback)
    return (1.0 - params.r) * p + params.r * params.gamma - x


def field_G0(x, feedback: FeedbackSpec) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return choice_probabilities(x, feedback) - x


def line_g(x, r: float, gamma1: float):
    """Two-agent line ``r/(1-r) (x - gamma1)``; its crossings with G0 are fixed points."""
    if r >= 1.0:
        raise DegenerateLaborShareOne("line g undefined at r = 1")
    return r / (1.0 - r) * (np.asarray(x, dtype=float) - gamma1)


def _check_interior(x, params: ModelParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise BoundaryPoint("Lyapunov function is defined on the open simplex only")
    return x


def lyapunov(x, params: ModelParams) -> float:
    """Lyapunov function whose gradient is ``-G_i(x)/x_i``.

    The capital term carries a ``1/beta`` factor; without it the gradient
    identity fails for ``beta != 1``. At ``beta == 0`` the log-sum is
    replaced by its limit ``sum(alpha_i log x_i) / sum(alpha)``.
    """
    x = _check_interior(x, params)
    r, beta, alpha, gamma = params.r, params.beta, params.alpha, params.gamma
    if beta == 0:
        capital = -(1 - r) * np.dot(alpha / alpha.sum(), np.log(x))
    else:
        capital = -(1 - r) / beta * np.log(np.dot(alpha, x**beta))
    wage = -r * np.dot(gamma, np.log(x)) if r > 0 else 0.0
    return float(capital + wage + x.sum())


def lyapunov_gradient(x, params: ModelParams) -> np.ndarray:
    x = _check_interior(x, params)
    r, beta, alpha, gamma = params.r, params.beta, params.alpha, params.gamma
    q = alpha * x ** (beta - 1) / np.dot(alpha, x**beta)
    return -(1 - r) * q - r * gamma / x + 1.0


def sublinear_limit(feedback: FeedbackSpec) -> np.ndarray:
    """Almost-sure share limit at r = 0 for beta < 1: ``alpha**(1/(1-beta))`` normalised."""
    if feedback.beta >= 1:
        raise ExponentNotSublinear(f"beta={feedback.beta} is not < 1")
    if np.any(feedback.alpha <= 0):
        raise NonPositiveAlpha("all alpha_i must be > 0")
    # log-domain normalisation; the exponent blows up as beta -> 1
    la = np.log(feedback.alpha) / (1.0 - feedback.beta)
    w = np.exp(la - la.max())
    return w / w.sum()
