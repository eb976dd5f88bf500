import json

import numpy as np
import pytest

from carlfel.output import TIMESERIES_COLUMNS, TimeSeries, read_grid, read_timeseries_csv, write_grid, write_json, write_timeseries_csv
from carlfel.params import ScaledParams
from carlfel.quantum import MomentumWavefunction
from carlfel.wigner import wigner_from_state


def series():
    tau = np.linspace(0, 1, 5)
    field = (1e-4 + 0.3j) * np.exp(1j * tau) / 3
    return TimeSeries(tau, field, 2.0, -np.abs(field) ** 2 + 0.1, np.ones(5))


def test_timeseries_roundtrip_is_exact(tmp_path):
    s = series()
    p = write_timeseries_csv(s, tmp_path / "a.csv")
    assert p.read_text().splitlines()[0] == ",".join(TIMESERIES_COLUMNS)
    rows = read_timeseries_csv(p)
    assert [r.re_A for r in rows] == list(s.field.real)
    assert [r.photons_per_particle for r in rows] == list(0.5 * 2.0 * s.intensity)
    assert rows[0].invariant_value == s.invariant[0]


def test_timeseries_bytes_deterministic(tmp_path):
    a = write_timeseries_csv(series(), tmp_path / "a.csv").read_bytes()
    b = write_timeseries_csv(series(), tmp_path / "b.csv").read_bytes()
    assert a == b


def test_nonmonotone_or_nonfinite_rejected(tmp_path):
    with pytest.raises(ValueError):
        TimeSeries(np.array([0.0, 0.0]), np.zeros(2, complex), 1.0, np.zeros(2), np.ones(2))
    bad = TimeSeries(np.array([0.0, 1.0]), np.array([0j, np.nan]), 1.0, np.zeros(2), np.ones(2))
    with pytest.raises(ValueError):
        write_timeseries_csv(bad, tmp_path / "x.csv")


def test_grid_roundtrip(tmp_path):
    s = MomentumWavefunction(-1, 1, np.array([0.6, 0.0, 0.8j]), 0.5, 0.2j)
    g = wigner_from_state(s, 9, ScaledParams(1.0, 1.0))
    csv_path, json_path = write_grid(g, tmp_path / "w.csv", tmp_path / "w.json")
    assert csv_path.read_text().splitlines()[0] == "theta_index,s_level,value"
    desc = json.loads(json_path.read_text())
    assert desc["version"] == 1 and desc["n_theta"] == 9
    back = read_grid(json_path)
    assert np.array_equal(back.values, g.values)
    assert back.field_a == g.field_a


def test_json_sorted_and_typed(tmp_path):
    p = write_json({"b": np.float64(1.5), "a": 2 + 1j, "c": np.arange(2), "d": float("nan")}, tmp_path / "r.json")
    data = json.loads(p.read_text())
    assert list(data) == ["a", "b", "c", "d"]
    assert data["a"] == [2.0, 1.0] and data["c"] == [0, 1] and data["d"] is None
