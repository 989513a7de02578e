"""Write the bundled synthetic data files (invented numbers, not real statistics).

    python3 scripts/make_synthetic_fixtures.py [--out src/wageurn/data]
"""

import argparse
from pathlib import Path

import numpy as np
from scipy import stats

from wageurn.io import write_csv

WAGE_BINS = [
    (0, 5000, 3_100_000),
    (5000, 10000, 3_400_000),
    (10000, 15000, 3_900_000),
    (15000, 20000, 4_600_000),
    (20000, 25000, 4_800_000),
    (25000, 30000, 4_200_000),
    (30000, 40000, 5_900_000),
    (40000, 50000, 3_300_000),
    (50000, 75000, 2_900_000),
    (75000, 100000, 900_000),
    (100000, 200000, 600_000),
    (200000, None, 90_000),
]


def macro_rows():
    years = np.arange(2010, 2022)
    wage = 21000 + 520 * (years - 2010)
    saving = np.full(years.size, 0.10)
    increase = np.array([0, 7300, 7600, 8800, 9100, 9500, 9900, 10400, 10100, 1500, 11000, 12500])
    wealth = 90000 + np.cumsum(increase)
    return [(int(y), float(w), float(s), float(a)) for y, w, s, a in zip(years, wage, saving, wealth)]


def wealth_cdf_rows(n=160, median=60000.0, sigma=1.4, split=0.9, tail=1.44):
    """Lognormal body joined to a Pareto tail at the ``split`` quantile."""
    u = np.concatenate([np.linspace(0.002, split, n // 2), 1 - np.geomspace(1 - split, 2e-5, n // 2 + 1)[1:]])
    body = stats.lognorm(sigma, scale=median)
    w_split = body.ppf(split)
    w = np.where(u <= split, body.ppf(u), w_split * ((1 - split) / (1 - u)) ** (1 / tail))
    return [(float(a), float(b)) for a, b in zip(w, u)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src" / "wageurn" / "data"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    write_csv(out / "wage_bins.csv", ["lower_eur", "upper_eur", "count"],
              [(lo, "" if up is None else up, c) for lo, up, c in WAGE_BINS])
    write_csv(out / "macro.csv", ["year", "avg_net_wage_eur", "saving_rate", "avg_wealth_eur"], macro_rows())
    write_csv(out / "wealth_cdf.csv", ["wealth_eur", "cdf"], wealth_cdf_rows())
    print(f"wrote fixtures to {out}")


if __name__ == "__main__":
    main()
