"""File formats: time-series CSV, dense grid CSV and JSON reports.

Floats are written with 17 significant digits so files round-trip exactly
and repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np

REPORT_SCHEMA = "carlfel.report"
REPORT_VERSION = 1
GRID_SCHEMA = "carlfel.wigner-grid"
GRID_VERSION = 1

TIMESERIES_COLUMNS = (
    "tau",
    "re_A",
    "im_A",
    "abs_A2",
    "photons_per_particle",
    "mean_pbar",
    "norm",
    "invariant_value",
)


def fmt(x) -> str:
    return format(float(x), ".17g")


class TimeSeriesRecord(NamedTuple):
    tau: float
    re_A: float
    im_A: float
    abs_A2: float
    photons_per_particle: float
    mean_pbar: float
    norm: float
    invariant_value: float


@dataclass(frozen=True)
class TimeSeries:
    """Column store of :class:`TimeSeriesRecord` rows."""

    tau: np.ndarray
    field: np.ndarray
    rho_bar: float
    mean_pbar: np.ndarray
    norm: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.tau) <= 0):
            raise ValueError("time series tau must be strictly increasing")

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    @property
    def invariant(self) -> np.ndarray:
        return self.intensity + self.mean_pbar

    def records(self):
        photons = 0.5 * self.rho_bar * self.intensity
        for row in zip(
            self.tau, self.field.real, self.field.imag, self.intensity, photons, self.mean_pbar, self.norm, self.invariant
        ):
            yield TimeSeriesRecord(*(float(v) for v in row))

    def as_series(self) -> dict:
        """Observables keyed by name, for :func:`carlfel.analysis.compare_series`."""
        return {"intensity": self.intensity, "mean_pbar": self.mean_pbar, "norm": self.norm}


def write_timeseries_csv(series: TimeSeries, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMESERIES_COLUMNS)
        for rec in series.records():
            if not all(math.isfinite(v) for v in rec):
                raise ValueError(f"non-finite value in time series at tau={rec.tau}")
            writer.writerow([fmt(v) for v in rec])
    return path


def read_timeseries_csv(path) -> list[TimeSeriesRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TIMESERIES_COLUMNS:
            raise ValueError(f"unexpected time-series header {header}")
        return [TimeSeriesRecord(*(float(v) for v in row)) for row in reader]


def write_columns_csv(path, header, columns) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([str(int(v)) if isinstance(v, (int, np.integer)) else fmt(v) for v in row])
    return path


def write_grid(grid, csv_path, json_path) -> tuple[Path, Path]:
    """Dense CSV (``theta_index,s_level,value``) plus a JSON descriptor."""
    csv_path = Path(csv_path)
    json_path = Path(json_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("theta_index", "s_level", "value"))
        for r, s in enumerate(grid.s_levels):
            for i in range(grid.theta.size):
                writer.writerow((i, fmt(s), fmt(grid.values[r, i])))
    descriptor = {
        "schema": GRID_SCHEMA,
        "version": GRID_VERSION,
        "values_file": csv_path.name,
        "n_theta": int(grid.theta.size),
        "theta_spacing": 2 * math.pi / grid.theta.size,
        "s_levels": [float(s) for s in grid.s_levels],
        "rho_bar": grid.rho_bar,
        "pbar_spacing": 1.0 / grid.rho_bar,
        "tau": grid.tau,
        "field_a": [grid.field_a.real, grid.field_a.imag],
        "value_units": "density per unit angle per momentum row",
    }
    write_json(descriptor, json_path)
    return csv_path, json_path


def read_grid(json_path):
    from .wigner import WignerGrid, theta_grid

    json_path = Path(json_path)
    desc = json.loads(json_path.read_text())
    if desc.get("schema") != GRID_SCHEMA:
        raise ValueError(f"{json_path} is not a Wigner grid descriptor")
    s_levels = np.array(desc["s_levels"])
    values = np.zeros((s_levels.size, desc["n_theta"]))
    with open(json_path.parent / desc["values_file"], newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for k, (i, _s, v) in enumerate(reader):
            values[k // desc["n_theta"], int(i)] = float(v)
    return WignerGrid(theta_grid(desc["n_theta"]), s_levels, values, desc["tau"], complex(*desc["field_a"]), desc["rho_bar"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, Path):
        return obj.as_posix()
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in fields(obj)}
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path
