import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wageurn import io
from wageurn.errors import EmptyTable, MalformedCsv


@given(arrays(float, st.integers(1, 20), elements=st.floats(1e-300, 1e300)))
def test_snapshot_round_trip_is_lossless(X):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / "s.csv"
        io.write_snapshots(p, [(0, X), (7, 2 * X)])
        back = io.read_snapshots(p)
    assert [s for s, _ in back] == [0, 7]
    assert np.array_equal(back[0][1], X) and np.array_equal(back[1][1], 2 * X)


def test_snapshot_header(tmp_path):
    io.write_snapshots(tmp_path / "s.csv", [(0, np.array([1.0, 2.5]))])
    assert (tmp_path / "s.csv").read_text().splitlines() == ["step,agent_id,wealth", "0,0,1.0", "0,1,2.5"]


def test_malformed_inputs(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("")
    with pytest.raises(MalformedCsv):
        io.read_wage_bins(p)
    p.write_text("lower_eur,upper_eur,count\n0,abc,3\n")
    with pytest.raises(MalformedCsv):
        io.read_wage_bins(p)
    p.write_text("wealth_eur,cdf\n1,0.5\n2,0.4\n")
    with pytest.raises(MalformedCsv):
        io.read_wealth_cdf(p)
    p.write_text("step,agent_id,wealth\n0,0,1\n0,2,1\n")
    with pytest.raises(MalformedCsv):
        io.read_snapshots(p)
    p.write_text("step,agent_id,wealth\n")
    with pytest.raises(EmptyTable):
        io.read_snapshots(p)
    with pytest.raises(MalformedCsv):
        io.read_macro(tmp_path / "missing.csv")


def test_open_bin_parsed(tmp_path):
    p = tmp_path / "b.csv"
    p.write_text("lower_eur,upper_eur,count\n0,10,5\n10,,2\n")
    t = io.read_wage_bins(p)
    assert t.bins[-1] == (10.0, None, 2.0) and t.open_bin


def test_atomic_write_leaves_no_temp_files(tmp_path):
    io.write_json(tmp_path / "a.json", {"b": 1, "a": [1.5]})
    assert [f.name for f in tmp_path.iterdir()] == ["a.json"]
    assert io.read_json(tmp_path / "a.json") == {"a": [1.5], "b": 1}


def test_read_vector(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("gamma\n0.25\n0.75\n")
    assert np.array_equal(io.read_vector(p), [0.25, 0.75])
    p.write_text("1,0.5\n2,0.5\n")
    assert np.array_equal(io.read_vector(p), [0.5, 0.5])
