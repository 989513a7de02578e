"""Calibrate, simulate and analyse in one go through the command-line interface.

Defaults use the bundled synthetic fixtures; pass real data files to
reproduce a calibrated run.
"""

import argparse
from importlib.resources import files
from pathlib import Path

from wageurn.cli import main as cli
from wageurn.io import read_json, read_macro

DATA = files("wageurn") / "data"


def step(args):
    print("$ wageurn " + " ".join(args))
    code = cli(args)
    if code:
        raise SystemExit(code)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--wage-bins", default=str(DATA / "wage_bins.csv"))
    ap.add_argument("--wealth-cdf", default=str(DATA / "wealth_cdf.csv"))
    ap.add_argument("--macro", default=str(DATA / "macro.csv"))
    ap.add_argument("--A", type=int, default=1000)
    ap.add_argument("--r", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="pipeline-out")
    args = ap.parse_args()
    out = Path(args.out)
    data = ["--wage-bins", args.wage_bins, "--wealth-cdf", args.wealth_cdf, "--A", str(args.A)]

    step(["calibrate", *data, "--macro", args.macro, "--r", str(args.r), "--out", str(out / "calibration")])
    beta = read_json(out / "calibration" / "calibration.json")["fit_beta"]["beta"]
    # average wealth in the last year sets the run length; scaled down with A
    avg_wealth = read_macro(args.macro).avg_wealth[-1] * args.A / 10_000
    sim = ["simulate", "--A", str(args.A), "--r", str(args.r), "--beta", str(beta), "--seed", str(args.seed),
           "--gamma-source", "wage_bins", "--wage-bins", args.wage_bins, "--snapshots", "5", "--out", str(out / "sim")]
    sim += ["--target-average-wealth", str(avg_wealth)]
    step(sim)
    step(["analyze", "--snapshot", str(out / "sim" / "snapshot.csv"), "--run", str(out / "sim" / "run.json"),
          "--out", str(out / "analysis")])
    step(["plot", "--kind", "survival", "--input", str(out / "sim" / "snapshot.csv"), "--out", str(out / "survival.svg")])
    step(["predict", "--run", str(out / "sim" / "run.json"), "--state", str(out / "sim" / "snapshot.csv"),
          "--horizon", "30", "--out", str(out / "predict")])
    step(["plot", "--kind", "timeline", "--input", str(out / "predict" / "timeline.csv"), "--out", str(out / "timeline.svg")])


if __name__ == "__main__":
    main()
