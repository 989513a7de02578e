"""Compiled kernels that advance the urn.

Two engines share one contract: advance ``X`` in place by ``n_steps`` steps,
add the winners to ``wins`` and draw every uniform from the supplied numpy
``Generator``.

``exact``
    Recomputes all ``A`` weights each step and inverts the cumulative sum.
    O(A) per step; bit-reproducible for a given seed.

``fast``
    Rejection sampling from a sum tree over per-agent upper envelopes. Wage
    income accrues lazily: an agent's wealth is ``base_i + (n - sync_i) r
    gamma_i``, so a step touches only the winner's leaf. Every ``K`` steps all
    agents are re-synchronised and their envelopes recomputed to cover the
    wage drift until the next refresh. ``K`` adapts so that the predicted
    acceptance stays above a target. Samples come from exactly the same law as
    the exact engine.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import EnvelopeViolated

DEFAULT_TARGET_ACCEPTANCE = 0.85
# relative slack that absorbs rounding between envelope and lazy wealth
_ENV_SLACK = 1e-12


def default_epoch(A: int) -> int:
    return max(1, A // 8)


# ---------------------------------------------------------------------------
# sum tree: leaves at [size, 2 size), node k holds tree[2k] + tree[2k+1]


@njit(cache=True)
def _tree_size(A):
    size = 1
    while size < A:
        size *= 2
    return size


@njit(cache=True)
def _tree_build(tree, leaves, size):
    tree[:] = 0.0
    for i in range(leaves.shape[0]):
        tree[size + i] = leaves[i]
    for k in range(size - 1, 0, -1):
        tree[k] = tree[2 * k] + tree[2 * k + 1]


@njit(cache=True)
def _tree_set(tree, size, i, value):
    k = size + i
    tree[k] = value
    k //= 2
    while k >= 1:
        tree[k] = tree[2 * k] + tree[2 * k + 1]
        k //= 2


@njit(cache=True)
def _tree_find(tree, size, u):
    k = 1
    while k < size:
        left = tree[2 * k]
        if u < left:
            k = 2 * k
        else:
            u -= left
            k = 2 * k + 1
    return k - size


# ---------------------------------------------------------------------------
# exact engine


@njit(cache=True, nogil=True)
def run_exact(X, alpha, beta, r, gamma, n_steps, rng, wins):
    A = X.shape[0]
    cum = np.empty(A)
    wage = r * gamma
    gain = 1.0 - r
    for _ in range(n_steps):
        total = 0.0
        for j in range(A):
            total += alpha[j] * X[j] ** beta
            cum[j] = total
        u = rng.random() * total
        lo = 0
        hi = A - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cum[mid] > u:
                hi = mid
            else:
                lo = mid + 1
        for j in range(A):
            X[j] += wage[j]
        X[lo] += gain
        wins[lo] += 1


# ---------------------------------------------------------------------------
# fast engine


@njit(cache=True)
def _envelope(alpha_i, beta, x_now, x_end):
    # max of alpha x**beta over [x_now, x_end]; monotone in x so endpoints suffice
    a = x_now**beta
    b = x_end**beta
    if b > a:
        a = b
    return alpha_i * a * (1.0 + _ENV_SLACK)


@njit(cache=True)
def _predicted_acceptance(base, alpha, beta, wage, K):
    num = 0.0
    den = 0.0
    for i in range(base.shape[0]):
        num += alpha[i] * base[i] ** beta
        den += _envelope(alpha[i], beta, base[i], base[i] + K * wage[i])
    return num / den


@njit(cache=True)
def _choose_epoch(base, alpha, beta, wage, K, K_max, target):
    if K > K_max:
        K = K_max
    if K < 1:
        K = 1
    while K > 1 and _predicted_acceptance(base, alpha, beta, wage, K) < target:
        K //= 2
    while 2 * K <= K_max and _predicted_acceptance(base, alpha, beta, wage, 2 * K) >= target:
        K *= 2
    return K


@njit(cache=True, nogil=True)
def run_fast(X, alpha, beta, r, gamma, n_steps, rng, wins, K0, target, stats):
    """Advance ``X`` by ``n_steps``; returns the last epoch length.

    ``stats`` accumulates [draws, accepted steps, refreshes]. Returns -1 if a
    true weight ever exceeded its envelope.
    """
    A = X.shape[0]
    size = _tree_size(A)
    tree = np.zeros(2 * size)
    env = np.empty(A)
    base = X.copy()
    sync = np.zeros(A, dtype=np.int64)
    wage = r * gamma
    gain = 1.0 - r
    K = K0
    n = 0
    while n < n_steps:
        # refresh: bring every agent up to date and rebuild envelopes
        for i in range(A):
            base[i] += (n - sync[i]) * wage[i]
            sync[i] = n
        K = _choose_epoch(base, alpha, beta, wage, K, n_steps - n, target)
        n_end = n + K
        for i in range(A):
            env[i] = _envelope(alpha[i], beta, base[i], base[i] + K * wage[i])
        _tree_build(tree, env, size)
        stats[2] += 1
        while n < n_end:
            while True:
                stats[0] += 1
                u = rng.random() * tree[1]
                i = _tree_find(tree, size, u)
                if i >= A or env[i] <= 0.0:
                    continue
                x_i = base[i] + (n - sync[i]) * wage[i]
                w = alpha[i] * x_i**beta
                if w > env[i]:
                    return -1
                if rng.random() * env[i] < w:
                    break
            n += 1
            stats[1] += 1
            wins[i] += 1
            base[i] += gain
            x_i = base[i] + (n - sync[i]) * wage[i]
            env[i] = _envelope(alpha[i], beta, x_i, x_i + (n_end - n) * wage[i])
            _tree_set(tree, size, i, env[i])
    for i in range(A):
        X[i] = base[i] + (n - sync[i]) * wage[i]
    return K


@njit(cache=True)
def _sample_frozen(weights, env, rng, n_draws, out, stats):
    A = weights.shape[0]
    size = _tree_size(A)
    tree = np.zeros(2 * size)
    _tree_build(tree, env, size)
    for k in range(n_draws):
        while True:
            stats[0] += 1
            u = rng.random() * tree[1]
            i = _tree_find(tree, size, u)
            if i >= A or env[i] <= 0.0:
                continue
            if weights[i] > env[i]:
                return -1
            if rng.random() * env[i] < weights[i]:
                break
        out[k] = i
        stats[1] += 1
    return 0


@njit(cache=True)
def _sample_exact_frozen(weights, rng, n_draws, out):
    A = weights.shape[0]
    cum = np.cumsum(weights)
    total = cum[A - 1]
    for k in range(n_draws):
        u = rng.random() * total
        lo = 0
        hi = A - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cum[mid] > u:
                hi = mid
            else:
                lo = mid + 1
        out[k] = lo


class RejectionSampler:
    """Rejection sampler over a sum tree of envelopes ``env >= weights``.

    Weights and envelopes are frozen; this is the sampling contract used
    inside the fast engine, exposed for direct testing.
    """

    def __init__(self, weights, envelopes):
        self.weights = np.ascontiguousarray(weights, dtype=float)
        self.envelopes = np.ascontiguousarray(envelopes, dtype=float)
        if self.weights.shape != self.envelopes.shape:
            raise ValueError("weights and envelopes differ in shape")
        self.draws = 0
        self.accepted = 0

    def sample(self, rng, n: int = 1) -> np.ndarray:
        out = np.empty(n, dtype=np.int64)
        stats = np.zeros(2, dtype=np.int64)
        if _sample_frozen(self.weights, self.envelopes, rng, n, out, stats) < 0:
            raise EnvelopeViolated("a weight exceeds its envelope")
        self.draws += int(stats[0])
        self.accepted += int(stats[1])
        return out

    @property
    def mean_draws(self) -> float:
        return self.draws / max(self.accepted, 1)


def sample_exact(weights, rng, n: int) -> np.ndarray:
    """Inverse-CDF sampling at frozen weights (reference for the sampler)."""
    out = np.empty(n, dtype=np.int64)
    _sample_exact_frozen(np.ascontiguousarray(weights, dtype=float), rng, n, out)
    return out
