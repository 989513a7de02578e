"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import calibration as cal
from . import dynamics as dyn
from . import io, plotting, stats
from .config import RunConfig, build_gamma, build_initial, build_params, resolve_output_dir
from .engine import SimulationSchedule, SimulationTrace, calibrated_step_count, ensemble_run
from .errors import ConfigError, DataError, DegenerateTarget, EmptyTable, NoInteriorMinimum
from .model import WealthState, make_params
from .timescale import TimeScale

EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 2, 3, 4


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _grid(text: str) -> np.ndarray:
    """``lo:hi:step`` or a comma list."""
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        n = int(round((hi - lo) / step)) + 1
        return np.round(lo + step * np.arange(n), 12)
    return np.array(_floats(text))


def _params_from_args(args):
    if getattr(args, "run", None):
        meta = io.read_json(args.run)
        p = meta["params"]
        r = args.r if args.r is not None else p["r"]
        beta = args.beta if args.beta is not None else p["beta"]
        return make_params(r, p["gamma"], beta, p["alpha"])
    if args.gamma is None or args.r is None or args.beta is None:
        raise ConfigError("params: give --run or all of --r, --beta, --gamma")
    gamma = np.array(_floats(args.gamma))
    alpha = np.array(_floats(args.alpha)) if args.alpha else None
    if np.any(gamma < 0) or gamma.sum() <= 0:
        raise ConfigError("gamma: values must be >= 0 with a positive sum")
    return make_params(args.r, gamma / gamma.sum(), args.beta, alpha)


def _add_param_args(p, need_run=True):
    if need_run:
        p.add_argument("--run", help="run.json from simulate (supplies r, beta, gamma, alpha)")
    p.add_argument("--r", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", help="comma-separated wage vector")
    p.add_argument("--alpha", help="comma-separated skill weights")


# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    cfg = cfg.with_overrides(
        A=args.A,
        r=args.r,
        beta=args.beta,
        c=args.c,
        seed=args.seed,
        engine=args.engine,
        steps=args.steps,
        target_average_wealth=args.target_average_wealth,
        snapshots=args.snapshots,
        init=args.init,
        pareto_exponent=args.pareto_exponent,
        gamma_source=args.gamma_source,
        wage_bins=args.wage_bins,
        gamma_file=args.gamma_file,
        ensemble=args.ensemble,
        workers=args.workers,
    )
    out = resolve_output_dir(args.out, cfg)
    gamma = build_gamma(cfg)
    params = build_params(cfg, gamma)
    X0 = build_initial(cfg, gamma)
    N = float(X0.sum())
    if cfg.steps is not None:
        steps = cfg.steps
    elif cfg.target_average_wealth is not None:
        steps = calibrated_step_count(cfg.A, cfg.target_average_wealth, cfg.unit, N)
        if steps < 0:
            raise ConfigError("target_average_wealth: below the initial average wealth")
    else:
        raise ConfigError("steps: give steps or target_average_wealth")
    schedule = SimulationSchedule.evenly(steps, cfg.snapshots)
    seeds = [cfg.seed + k for k in range(cfg.ensemble)]
    initial = (lambda s: WealthState(build_initial(cfg, gamma, s))) if cfg.ensemble > 1 else WealthState(X0)
    traces = ensemble_run(params, schedule, seeds, initial, cfg.engine, cfg.workers)

    report = {"params_hash": params.digest(), "steps": steps, "runs": []}
    for trace in traces:
        tag = "" if len(traces) == 1 else f"_seed{trace.rng_seed}"
        io.write_snapshots(out / f"snapshot{tag}.csv", trace.snapshots)
        snaps = {str(s): stats.summary(X, gamma) for s, X in trace.snapshots}
        report["runs"].append({"seed": trace.rng_seed, "snapshots": snaps})
    io.write_json(out / "stats.json", report)
    io.write_json(
        out / "run.json",
        {
            "config": cfg.to_dict(),
            "params": params.to_dict(),
            "params_hash": params.digest(),
            "N": N,
            "steps": steps,
            "seeds": seeds,
            "wall_time": [t.wall_time for t in traces],
            "sampler_stats": [t.sampler_stats for t in traces],
        },
    )
    print(f"wrote {out}/snapshot*.csv, stats.json, run.json ({steps} steps, {len(traces)} run(s))")
    return 0


def cmd_calibrate(args) -> int:
    out = resolve_output_dir(args.out)
    rng = np.random.default_rng([args.seed, 1])
    table = io.read_wage_bins(args.wage_bins, args.tail_mean_excess)
    gamma = cal.apply_saving_weights(cal.sample_raw_wages(table, args.A, rng))
    wealth, cdf = io.read_wealth_cdf(args.wealth_cdf)
    target = cal.target_from_wealth_cdf(wealth, cdf, gamma, args.coupling, args.seed)
    report = {"A": args.A, "seed": args.seed, "coupling": args.coupling, "target": target.notes}

    r = args.r
    if args.macro:
        series = io.read_macro(args.macro)
        rows = cal.labor_share_table(series)
        report["labor_share"] = rows
        if args.fit_r:
            good = [row["r"] for row in rows if row["r"] is not None and row["flag"] == ""]
            if not good:
                raise DataError("macro: no year with a defined labor share <= 1")
            r = float(np.mean(good))
    elif args.fit_r:
        raise ConfigError("--fit-r needs --macro")
    if r is None:
        r = 0.3
    report["r"] = r

    betas = _grid(args.betas)
    line = cal.r_beta_line(target, betas)
    io.write_csv(out / "rbline.csv", ["beta", "r", "norm"], [(p.beta, p.r, p.norm) for p in line])
    try:
        b, norm = cal.fit_beta(target, r)
        report["fit_beta"] = {"beta": b, "norm": norm}
    except (NoInteriorMinimum, DegenerateTarget) as exc:
        report["fit_beta"] = {"error": str(exc)}
    if args.scan_c:
        scan = cal.scan_beta_c(target, r, betas, _grid(args.scan_c))
        rows = [(b_, c_, scan.norms[i, j]) for i, b_ in enumerate(scan.betas) for j, c_ in enumerate(scan.cs)]
        io.write_csv(out / "contour.csv", ["beta", "c", "norm"], rows)
        bb, cc, nn = scan.argmin
        report["contour_argmin"] = {"beta": bb, "c": cc, "norm": nn}
    io.write_json(out / "calibration.json", report)
    print(json.dumps({k: report[k] for k in ("r", "fit_beta")}, sort_keys=True))
    return 0


def cmd_fit_beta(args) -> int:
    rng = np.random.default_rng([args.seed, 1])
    gamma = cal.apply_saving_weights(cal.sample_raw_wages(io.read_wage_bins(args.wage_bins), args.A, rng))
    wealth, cdf = io.read_wealth_cdf(args.wealth_cdf)
    target = cal.target_from_wealth_cdf(wealth, cdf, gamma, args.coupling, args.seed)
    b, norm = cal.fit_beta(target, args.r, (args.lo, args.hi))
    print(json.dumps({"beta": b, "norm": norm, "r": args.r}))
    return 0


def cmd_fixed_points(args) -> int:
    params = _params_from_args(args)
    if params.A == 2:
        pts = [{"x": fp.x.tolist(), "stability": fp.stability} for fp in dyn.fixed_points_two_agents(params)]
    elif params.A <= 4:
        pts = [
            {
                "x": fp.x.tolist(),
                "stability": fp.stability,
                "heuristic": dyn.stability_heuristic(fp.x, params),
                "grad_norm": fp.grad_norm,
            }
            for fp in dyn.fixed_points_search(params)
        ]
    else:
        rep = dyn.classify_regime(params)
        pts = [{"x": fp.x.tolist(), "stability": fp.stability, "corner": i} for i, fp in rep.limits.items()]
    print(json.dumps({"A": params.A, "fixed_points": pts}))
    return 0


def cmd_classify(args) -> int:
    params = _params_from_args(args)
    corners = [int(v) for v in args.corners.split(",")] if args.corners else None
    rep = dyn.classify_regime(params, tol=args.tol, corners=corners, workers=args.workers)
    limits = {str(i): {"x": fp.x.tolist(), "grad_norm": fp.grad_norm} for i, fp in rep.limits.items()}
    print(json.dumps({"regime": rep.regime, "limits": limits}))
    return 0


def _load_start(args, params) -> np.ndarray:
    if args.state:
        snaps = io.read_snapshots(args.state)
        X = snaps[-1][1] if args.step is None else dict(snaps).get(args.step)
        if X is None:
            raise DataError(f"state: no snapshot at step {args.step}")
        return X / X.sum()
    if args.wealth_cdf:
        wealth, cdf = io.read_wealth_cdf(args.wealth_cdf)
        return cal.target_from_wealth_cdf(wealth, cdf, params.gamma, args.coupling, args.seed).x
    raise ConfigError("predict: give --state or --wealth-cdf")


def cmd_predict(args) -> int:
    params = _params_from_args(args)
    x0 = _load_start(args, params)
    if len(x0) != params.A:
        raise DataError(f"state has {len(x0)} agents, params have {params.A}")
    out = resolve_output_dir(args.out)
    path = dyn.integrate_share_ode(
        x0, params, args.horizon, h=args.h, clock="annual", mu=args.mu, record_every=args.record_every
    )
    io.write_path(out / "path.csv", path)
    tl = dyn.indicator_timeline(path, params)
    io.write_csv(out / "timeline.csv", ["t", "winners", "positive_field", "grad_norm"], tl.tolist())
    last = tl[-1]
    print(json.dumps({"t": last[0], "winners": int(last[1]), "positive_field": int(last[2]), "grad_norm": last[3]}))
    return 0


def cmd_analyze(args) -> int:
    snaps = io.read_snapshots(args.snapshot)
    meta = io.read_json(args.run) if args.run else None
    gamma = np.asarray(meta["params"]["gamma"]) if meta else None
    out = resolve_output_dir(args.out)
    report = {str(s): stats.summary(X, gamma) for s, X in snaps}
    if args.ror:
        if meta is None:
            raise ConfigError("--ror needs --run for r and gamma")
        start, end = (int(v) for v in args.ror.split(":"))
        d = dict(snaps)
        if start not in d or end not in d:
            raise DataError(f"ror: snapshots {start} and {end} must both exist")
        params = make_params(meta["params"]["r"], gamma, meta["params"]["beta"], meta["params"]["alpha"])
        trace = SimulationTrace(snaps, np.zeros(0, dtype=np.int64), 0, params.digest())
        ror = stats.rate_of_return(trace, start, end, params)
        io.write_csv(out / "ror.csv", ["agent_id", "quantile", "ror"], stats.ror_table(d[start], ror))
    io.write_json(out / "stats.json", report)
    print(f"wrote {out}/stats.json")
    return 0


def cmd_plot(args) -> int:
    kind = plotting.check_kind(args.kind)
    out = Path(args.out)
    if kind == "survival":
        if not args.input:
            raise ConfigError("plot survival: give --input snapshot.csv")
        snaps = io.read_snapshots(args.input[0])
        curves = {}
        for s, X in snaps[-1:]:
            c = stats.survival_curve(X, args.unit)
            curves[f"step {s}"] = (c.thresholds, c.survival)
        if args.wealth_cdf:
            w, cdf = io.read_wealth_cdf(args.wealth_cdf)
            curves["data"] = (w, 1 - cdf)
        svg = plotting.survival_figure(curves)
    elif kind == "rbline":
        tab = io.read_table(args.input[0], ["beta", "r"])
        svg = plotting.rbline_figure(tab[:, 0], tab[:, 1])
    elif kind == "timeline":
        tab = io.read_table(args.input[0], ["t", "winners", "positive_field", "grad_norm"])
        years = tab[:, 0] if args.start_year is None else tab[:, 0] + args.start_year
        svg = plotting.timeline_figure(years, tab[:, 1], tab[:, 2], tab[:, 3])
    else:
        svg = plotting.field3_figure(_params_from_args(args))
    plotting.write_svg(out, svg)
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wageurn", description="Wage-extended Polya urn toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the urn and write snapshots and statistics")
    p.add_argument("--config")
    p.add_argument("--A", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--engine", choices=("exact", "fast"))
    p.add_argument("--steps", type=int)
    p.add_argument("--target-average-wealth", type=float)
    p.add_argument("--snapshots", type=int)
    p.add_argument("--init", choices=("symmetric", "exponential", "pareto", "gamma-proportional"))
    p.add_argument("--pareto-exponent", type=float)
    p.add_argument("--gamma-source", choices=("uniform", "lognormal", "wage_bins", "file"))
    p.add_argument("--wage-bins")
    p.add_argument("--gamma-file")
    p.add_argument("--ensemble", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="wage vector, labor share, r-beta line and contour scan")
    p.add_argument("--wage-bins", required=True)
    p.add_argument("--wealth-cdf", required=True)
    p.add_argument("--macro")
    p.add_argument("--A", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r", type=float)
    p.add_argument("--fit-r", action="store_true")
    p.add_argument("--coupling", choices=("correlated", "independent"), default="correlated")
    p.add_argument("--tail-mean-excess", type=float)
    p.add_argument("--betas", default="0.5:3:0.01")
    p.add_argument("--scan-c")
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("fit-beta", help="fit beta at fixed r")
    p.add_argument("--wage-bins", required=True)
    p.add_argument("--wealth-cdf", required=True)
    p.add_argument("--r", type=float, default=0.3)
    p.add_argument("--A", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coupling", choices=("correlated", "independent"), default="correlated")
    p.add_argument("--lo", type=float, default=cal.DEFAULT_BETA_BRACKET[0])
    p.add_argument("--hi", type=float, default=cal.DEFAULT_BETA_BRACKET[1])
    p.set_defaults(func=cmd_fit_beta)

    p = sub.add_parser("fixed-points", help="fixed points of the mean-field dynamics")
    _add_param_args(p)
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("classify-regime", help="corner-start regime bracket")
    _add_param_args(p)
    p.add_argument("--tol", type=float, default=dyn.DEFAULT_TOL)
    p.add_argument("--corners")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("predict", help="integrate the share ODE in calendar years")
    _add_param_args(p)
    p.add_argument("--state", help="snapshot.csv; the last step is used unless --step is given")
    p.add_argument("--step", type=int)
    p.add_argument("--wealth-cdf")
    p.add_argument("--coupling", choices=("correlated", "independent"), default="correlated")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, required=True, help="years")
    p.add_argument("--mu", type=float, default=TimeScale().mu)
    p.add_argument("--h", type=float, default=0.1, help="step in years")
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("analyze", help="statistics of saved snapshots")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--run")
    p.add_argument("--ror", help="start:end steps for the rate of return")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plot", help="SVG figures")
    p.add_argument("--kind", required=True)
    p.add_argument("--input", nargs="*", default=[])
    p.add_argument("--wealth-cdf")
    p.add_argument("--unit", type=float, default=stats.DEFAULT_UNIT)
    p.add_argument("--start-year", type=float)
    p.add_argument("--out", required=True)
    _add_param_args(p, need_run=True)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, EmptyTable) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.command == "simulate":
        print(f"done in {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
