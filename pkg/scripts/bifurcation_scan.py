"""Stable fixed-point count of the symmetric two-agent system across labor shares."""

import argparse

import numpy as np

from wageurn import dynamics as dyn
from wageurn.io import write_csv
from wageurn.model import make_params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", default="1.5,2,3")
    ap.add_argument("--points", type=int, default=201)
    ap.add_argument("--out", default="bifurcation.csv")
    args = ap.parse_args()

    rows = []
    for beta in map(float, args.betas.split(",")):
        for r in np.linspace(0, 1, args.points):
            pts = dyn.fixed_points_two_agents(make_params(r, [0.5, 0.5], beta))
            stable = [fp.x1 for fp in pts if fp.stability == dyn.STABLE]
            rows.append((beta, float(r), len(stable), min(stable), max(stable)))
        rc = dyn.critical_labor_share_two_agents(beta)
        print(f"beta={beta:g}: critical r = {rc:.6f} (expected {(beta - 1) / beta:.6f})")
    write_csv(args.out, ["beta", "r", "n_stable", "x1_low", "x1_high"], rows)


if __name__ == "__main__":
    main()
