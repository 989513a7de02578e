import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wageurn.errors import ConfigError, NegativeTime
from wageurn.timescale import TimeScale, step_to_year, year_to_step


def test_constant_growth_examples():
    s = TimeScale()
    assert year_to_step(0, 10_000, s) == 0
    # (1.03**100 - 1) * 1e4 = 182186.319...; oracle evaluated at 50 digits
    assert year_to_step(100, 10_000, s) == 182_186
    with pytest.raises(NegativeTime):
        year_to_step(-1, 10_000, s)


@given(st.floats(0, 300), st.floats(10, 1e7), st.floats(0.001, 0.2))
def test_roundtrip_within_one_step(t, N, mu):
    s = TimeScale(mu=mu)
    n = year_to_step(t, N, s)
    back = step_to_year(n, N, s)
    one_step = step_to_year(n + 1, N, s) - back
    assert back <= t + 1e-9
    assert t - back <= one_step + 1e-9


@given(st.floats(0, 100), st.floats(0, 100))
def test_monotone(t1, t2):
    s = TimeScale()
    if t1 <= t2:
        assert year_to_step(t1, 1e4, s) <= year_to_step(t2, 1e4, s)


def test_empirical_series():
    years = list(range(1990, 2001))
    wealth = [80_000 + 3_200 * (y - 1990) for y in years]
    s = TimeScale.empirical(years, wealth, agents=10_000, unit=10.0)
    N = 10_000
    n = year_to_step(1995, N, s)
    assert n == 10_000 * 96_000 // 10 - N
    assert step_to_year(n, N, s) == pytest.approx(1995)
    with pytest.raises(NegativeTime):
        year_to_step(1980, N, s)


def test_timescale_validation():
    with pytest.raises(ConfigError):
        TimeScale(mu=-1.0)
    with pytest.raises(ConfigError):
        TimeScale.empirical([2000, 1999], [1, 2], agents=10)
    assert TimeScale(mu=0.03).rate == pytest.approx(math.log(1.03))
