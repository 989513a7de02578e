"""CSV and JSON readers/writers. All writes are atomic (temp file then rename)."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .calibration import MacroSeries, WageBinTable
from .errors import EmptyTable, MalformedCsv

WAGE_BINS_HEADER = ["lower_eur", "upper_eur", "count"]
MACRO_HEADER = ["year", "avg_net_wage_eur", "saving_rate", "avg_wealth_eur"]
WEALTH_CDF_HEADER = ["wealth_eur", "cdf"]
SNAPSHOT_HEADER = ["step", "agent_id", "wealth"]
PATH_HEADER = ["t", "agent_id", "share"]


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_csv(path, header, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return atomic_write_text(path, buf.getvalue())


def read_csv(path, header) -> list:
    """Rows as dicts; the header must contain every expected column."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise MalformedCsv(f"{path}: empty file")
            names = [n.strip() for n in reader.fieldnames]
            missing = [h for h in header if h not in names]
            if missing:
                raise MalformedCsv(f"{path}: missing column(s) {', '.join(missing)}")
            rows = [{k.strip(): (v or "").strip() for k, v in row.items() if k is not None} for row in reader]
    except FileNotFoundError:
        raise MalformedCsv(f"{path}: no such file") from None
    return rows


def _num(row, key, path, line, cast=float):
    try:
        return cast(row[key])
    except (TypeError, ValueError):
        raise MalformedCsv(f"{path}: row {line}: bad value {row.get(key)!r} in column {key}") from None


def read_wage_bins(path, tail_mean_excess=None) -> WageBinTable:
    rows = read_csv(path, WAGE_BINS_HEADER)
    if not rows:
        raise EmptyTable(f"{path}: no bins")
    bins = []
    for k, row in enumerate(rows, start=2):
        upper = None if row["upper_eur"] == "" else _num(row, "upper_eur", path, k)
        bins.append((_num(row, "lower_eur", path, k), upper, _num(row, "count", path, k)))
    return WageBinTable(tuple(bins), tail_mean_excess)


def read_macro(path) -> MacroSeries:
    rows = read_csv(path, MACRO_HEADER)
    if not rows:
        raise EmptyTable(f"{path}: no rows")
    cols = {h: [] for h in MACRO_HEADER}
    for k, row in enumerate(rows, start=2):
        cols["year"].append(_num(row, "year", path, k, int))
        for h in MACRO_HEADER[1:]:
            cols[h].append(_num(row, h, path, k))
    return MacroSeries(
        tuple(cols["year"]),
        tuple(cols["avg_net_wage_eur"]),
        tuple(cols["saving_rate"]),
        tuple(cols["avg_wealth_eur"]),
    )


def read_wealth_cdf(path) -> tuple:
    rows = read_csv(path, WEALTH_CDF_HEADER)
    if len(rows) < 2:
        raise EmptyTable(f"{path}: need at least two rows")
    w = np.array([_num(r, "wealth_eur", path, k) for k, r in enumerate(rows, start=2)])
    c = np.array([_num(r, "cdf", path, k) for k, r in enumerate(rows, start=2)])
    if np.any(np.diff(c) <= 0) or c[0] <= 0 or c[-1] > 1:
        raise MalformedCsv(f"{path}: cdf must increase strictly within (0, 1]")
    return w, c


def write_snapshots(path, snapshots) -> Path:
    rows = ((step, i, float(x)) for step, X in snapshots for i, x in enumerate(X))
    return write_csv(path, SNAPSHOT_HEADER, rows)


def read_snapshots(path) -> list:
    """``[(step, X), ...]`` ordered by step; agents must be 0..A-1 in each step."""
    rows = read_csv(path, SNAPSHOT_HEADER)
    if not rows:
        raise EmptyTable(f"{path}: no rows")
    by_step: dict = {}
    for k, row in enumerate(rows, start=2):
        step = _num(row, "step", path, k, int)
        by_step.setdefault(step, []).append((_num(row, "agent_id", path, k, int), _num(row, "wealth", path, k)))
    out = []
    for step in sorted(by_step):
        pairs = sorted(by_step[step])
        ids = [i for i, _ in pairs]
        if ids != list(range(len(ids))):
            raise MalformedCsv(f"{path}: step {step} has agent ids that are not 0..A-1")
        out.append((step, np.array([x for _, x in pairs])))
    return out


def write_path(path, ode_path) -> Path:
    rows = ((float(t), i, float(x)) for t, pt in zip(ode_path.times, ode_path.points) for i, x in enumerate(pt))
    return write_csv(path, PATH_HEADER, rows)


def read_path(path) -> tuple:
    """``(times, points)`` from a path CSV."""
    rows = read_csv(path, PATH_HEADER)
    if not rows:
        raise EmptyTable(f"{path}: no rows")
    by_t: dict = {}
    for k, row in enumerate(rows, start=2):
        t = _num(row, "t", path, k)
        by_t.setdefault(t, []).append((_num(row, "agent_id", path, k, int), _num(row, "share", path, k)))
    times = np.array(sorted(by_t))
    points = np.array([[s for _, s in sorted(by_t[t])] for t in times])
    return times, points


def read_table(path, header) -> np.ndarray:
    """Numeric columns in ``header`` order as a float array."""
    rows = read_csv(path, header)
    if not rows:
        raise EmptyTable(f"{path}: no rows")
    return np.array([[_num(r, h, path, k) for h in header] for k, r in enumerate(rows, start=2)])


def read_vector(path) -> np.ndarray:
    """One number per line, or a CSV with a single numeric column (header optional)."""
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                vals.append(float(line.split(",")[-1]))
            except ValueError:
                if vals:
                    raise MalformedCsv(f"{path}: non-numeric value {line!r}") from None
    if not vals:
        raise EmptyTable(f"{path}: no values")
    return np.array(vals)
