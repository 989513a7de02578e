"""Stochastic simulation of the urn: schedules, traces and seeded ensembles."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import sampling
from .errors import DuplicateSeeds, EnvelopeViolated, InvalidSchedule, MissingSnapshot
from .model import ModelParams, WealthState, choice_probabilities

ENGINES = ("exact", "fast")


def make_rng(seed: int) -> np.random.Generator:
    """Philox (counter-based) generator; identical streams on every platform."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class SimulationSchedule:
    total_steps: int
    snapshot_steps: tuple = None
    record_win_counts: bool = True

    def __post_init__(self):
        total = int(self.total_steps)
        if total < 0:
            raise InvalidSchedule("total_steps must be >= 0")
        steps = self.snapshot_steps
        if steps is None:
            steps = sorted({0, total})
        steps = tuple(int(s) for s in steps)
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise InvalidSchedule("snapshot_steps must be strictly increasing")
        if steps and (steps[0] < 0 or steps[-1] > total):
            raise InvalidSchedule(f"snapshot_steps must lie in [0, {total}]")
        object.__setattr__(self, "total_steps", total)
        object.__setattr__(self, "snapshot_steps", steps)

    @classmethod
    def evenly(cls, total_steps: int, count: int) -> "SimulationSchedule":
        """``count`` snapshots spread evenly over the run, both ends included."""
        pts = np.unique(np.linspace(0, total_steps, max(count, 2)).round().astype(np.int64))
        return cls(total_steps, tuple(pts.tolist()))


@dataclass
class SimulationTrace:
    snapshots: list  # (absolute step, X copy)
    win_counts: np.ndarray
    rng_seed: int
    params_hash: str
    engine: str = "exact"
    N: float = 0.0
    wall_time: float = 0.0
    sampler_stats: dict = field(default_factory=dict)

    @property
    def steps(self) -> list:
        return [s for s, _ in self.snapshots]

    def at(self, step: int) -> np.ndarray:
        for s, X in self.snapshots:
            if s == step:
                return X
        raise MissingSnapshot(f"no snapshot at step {step}")

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1][1]

    def final_shares(self) -> np.ndarray:
        X = self.final
        return X / X.sum()


def step_exact(state: WealthState, params: ModelParams, rng) -> tuple:
    """One exact step; returns the new state and the winner's index."""
    choice_probabilities(state.X, params.feedback)  # raises on all-zero weights
    X = state.X.copy()
    wins = np.zeros(params.A, dtype=np.int64)
    sampling.run_exact(X, params.alpha, params.beta, params.r, params.gamma, 1, rng, wins)
    return WealthState(X, state.n + 1, state.N), int(np.argmax(wins))


def run(
    state: WealthState,
    params: ModelParams,
    schedule: SimulationSchedule,
    seed: int,
    engine: str = "exact",
    epoch: int | None = None,
    target_acceptance: float = sampling.DEFAULT_TARGET_ACCEPTANCE,
) -> SimulationTrace:
    """Simulate ``schedule.total_steps`` steps from ``state``.

    Snapshot steps count from the start of this run; the trace stores
    absolute step numbers ``state.n + s``.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if np.any(state.X <= 0):
        raise ValueError("initial wealth must be positive")
    rng = make_rng(seed)
    X = np.ascontiguousarray(state.X, dtype=float).copy()
    wins = np.zeros(params.A, dtype=np.int64)
    alpha = np.ascontiguousarray(params.alpha)
    gamma = np.ascontiguousarray(params.gamma)
    stats = np.zeros(3, dtype=np.int64)
    K = epoch or sampling.default_epoch(params.A)

    snapshots = []
    done = 0
    t0 = time.perf_counter()
    marks = list(schedule.snapshot_steps)
    if not marks or marks[-1] != schedule.total_steps:
        marks.append(schedule.total_steps)
    wanted = set(schedule.snapshot_steps)
    for mark in marks:
        todo = mark - done
        if todo > 0:
            if engine == "exact":
                sampling.run_exact(X, alpha, params.beta, params.r, gamma, todo, rng, wins)
            else:
                K = sampling.run_fast(
                    X, alpha, params.beta, params.r, gamma, todo, rng, wins, K, target_acceptance, stats
                )
                if K < 0:
                    raise EnvelopeViolated("true weight exceeded its envelope")
            done = mark
        if mark in wanted:
            snapshots.append((state.n + mark, X.copy()))
    wall = time.perf_counter() - t0

    sampler_stats = {}
    if engine == "fast" and stats[1] > 0:
        sampler_stats = {
            "draws": int(stats[0]),
            "steps": int(stats[1]),
            "refreshes": int(stats[2]),
            "mean_draws_per_step": float(stats[0] / stats[1]),
        }
    return SimulationTrace(
        snapshots=snapshots,
        win_counts=wins if schedule.record_win_counts else np.zeros(0, dtype=np.int64),
        rng_seed=int(seed),
        params_hash=params.digest(),
        engine=engine,
        N=state.N,
        wall_time=wall,
        sampler_stats=sampler_stats,
    )


def ensemble_run(
    params: ModelParams,
    schedule: SimulationSchedule,
    seeds,
    initial,
    engine: str = "exact",
    workers: int = 1,
) -> list:
    """Independent runs, one per seed. ``initial`` is a WealthState or a callable seed -> WealthState."""
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        raise DuplicateSeeds("seeds must be distinct")

    def one(seed):
        state = initial(seed) if callable(initial) else initial
        return run(state, params, schedule, seed, engine)

    if workers > 1:
        # kernels release the GIL, so trajectories run in parallel threads
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, seeds))
    return [one(s) for s in seeds]


def calibrated_step_count(A: int, target_average_wealth: float, unit: float, N: float) -> int:
    """Steps needed for the average wealth to reach a target (in currency units)."""
    return int(round(A * target_average_wealth / unit - N))
