"""Steps per second of the exact and fast engines at one system size."""

import argparse
import time

import numpy as np

from wageurn.engine import SimulationSchedule, run
from wageurn.model import WealthState, make_params


def rate(engine, params, steps, seed):
    t = time.perf_counter()
    tr = run(WealthState(np.ones(params.A)), params, SimulationSchedule(steps), seed, engine)
    return steps / (time.perf_counter() - t), tr.sampler_stats


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--A", type=int, default=10_000)
    ap.add_argument("--steps", type=int, default=10**6)
    ap.add_argument("--exact-steps", type=int, default=20_000, help="exact runs are O(A) per step; keep short")
    ap.add_argument("--beta", type=float, default=1.1)
    ap.add_argument("--r", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    g = np.random.default_rng(args.seed).lognormal(0, 0.8, args.A)
    params = make_params(args.r, g / g.sum(), args.beta)
    run(WealthState(np.ones(params.A)), params, SimulationSchedule(10), 0, "fast")  # compile
    exact, _ = rate("exact", params, args.exact_steps, args.seed)
    fast, info = rate("fast", params, args.steps, args.seed)
    print(f"exact: {exact:,.0f} steps/s")
    print(f"fast:  {fast:,.0f} steps/s  ({info.get('mean_draws_per_step', float('nan')):.3f} draws/step)")
    print(f"speedup: {fast / exact:.1f}x")


if __name__ == "__main__":
    main()
