"""Ternary field plots for a three-agent wage vector over several labor shares."""

import argparse
from pathlib import Path

from wageurn import dynamics as dyn
from wageurn.model import make_params
from wageurn.plotting import field3_figure, write_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", default="0.4,0.4,0.2")
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--rs", default="0.3,0.35,0.4,0.5,0.55")
    ap.add_argument("--out", default="field3")
    args = ap.parse_args()

    gamma = [float(v) for v in args.gamma.split(",")]
    out = Path(args.out)
    for r in map(float, args.rs.split(",")):
        params = make_params(r, gamma, args.beta)
        fps = dyn.fixed_points_search(params)
        regime = dyn.classify_regime(params).regime
        n_stable = sum(fp.stability == dyn.STABLE for fp in fps)
        write_svg(out / f"field3_r{r:g}.svg", field3_figure(params, fixed_points=fps))
        print(f"r={r:g}: {len(fps)} fixed points, {n_stable} stable, regime {regime}")


if __name__ == "__main__":
    main()
