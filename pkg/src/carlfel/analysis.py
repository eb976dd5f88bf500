"""Trajectory diagnostics: peak finding, growth-rate fits, model distances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


def first_peak_index(intensity, fraction: float = 0.5) -> int:
    """Index of the first local maximum reaching ``fraction`` of the run maximum.

    The threshold skips the small oscillations of the lethargy phase.
    """
    y = np.asarray(intensity, dtype=float)
    if y.size < 3:
        raise ValidationError("need at least three samples to locate a peak")
    level = fraction * y.max()
    for i in range(1, y.size - 1):
        if y[i] >= level and y[i] >= y[i - 1] and y[i] > y[i + 1]:
            return i
    raise ValidationError("no intensity peak inside the sampled window; extend tau_end")


def fit_growth_rate(tau, intensity, lo: float = 1e-6, hi: float = 1e-2) -> float:
    """Least-squares slope of ``log(intensity)`` over the first crossing of ``[lo, hi]``."""
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(intensity, dtype=float)
    above_hi = np.flatnonzero(y >= hi)
    stop = above_hi[0] if above_hi.size else y.size
    window = np.flatnonzero(y[:stop] > lo)
    if window.size < 3:
        raise ValidationError(f"fewer than three samples with {lo:g} < |A|^2 < {hi:g}")
    start = window[0]
    t, v = tau[start:stop], y[start:stop]
    return float(np.polyfit(t, np.log(v), 1)[0])


def relative_linf(a, b) -> float:
    """``max|a - b| / max|b|``."""
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def relative_l2(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def resample(tau_src, values, tau_dst):
    """Linear resampling onto ``tau_dst``; the destination must lie inside the source span."""
    tau_src = np.asarray(tau_src)
    if tau_dst[0] < tau_src[0] - 1e-12 or tau_dst[-1] > tau_src[-1] + 1e-12:
        raise ValidationError("sampling ranges are disjoint or do not cover the comparison window")
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return np.interp(tau_dst, tau_src, values.real) + 1j * np.interp(tau_dst, tau_src, values.imag)
    return np.interp(tau_dst, tau_src, values)


@dataclass
class Comparison:
    """Distances between two runs of the same system up to the reference's first peak."""

    label_a: str
    label_b: str
    tau_window: float
    linf: float
    l2: float
    threshold: float | None
    observables: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool | None:
        return None if self.threshold is None else self.linf <= self.threshold

    def as_dict(self) -> dict:
        return {
            "a": self.label_a,
            "b": self.label_b,
            "tau_window": self.tau_window,
            "rel_linf_intensity": self.linf,
            "rel_l2_intensity": self.l2,
            "threshold": self.threshold,
            "passed": self.passed,
            "observables": self.observables,
        }


def compare_series(
    tau_a, series_a: dict, tau_b, series_b: dict, label_a="a", label_b="b", threshold=None, key="intensity", window_end=None
) -> Comparison:
    """Compare two runs; ``series_*`` map observable names to arrays on their tau grids.

    Run ``b`` is the reference: its first ``key`` peak closes the window unless
    ``window_end`` is given.  Run ``a`` is resampled onto ``b``'s grid when the
    grids differ.
    """
    tau_a = np.asarray(tau_a)
    tau_b = np.asarray(tau_b)
    if window_end is None:
        window_end = float(tau_b[first_peak_index(series_b[key])])
    mask = tau_b <= window_end + 1e-12
    grid = tau_b[mask]
    same = tau_a.shape == tau_b.shape and np.allclose(tau_a, tau_b, rtol=0, atol=1e-12)
    table = {}
    main = None
    for name in series_b:
        if name not in series_a:
            continue
        ref = np.asarray(series_b[name])[mask]
        other = np.asarray(series_a[name])[mask] if same else resample(tau_a, series_a[name], grid)
        scale = np.max(np.abs(ref))
        linf = float(np.max(np.abs(other - ref)) / scale) if scale > 0 else float(np.max(np.abs(other - ref)))
        l2 = relative_l2(other, ref) if scale > 0 else math.nan
        table[name] = {"rel_linf": linf, "rel_l2": l2}
        if name == key:
            main = (linf, l2)
    if main is None:
        raise ValidationError(f"observable {key!r} missing from one of the runs")
    return Comparison(label_a, label_b, float(window_end), main[0], main[1], threshold, table)


def peak_indices(intensity, fraction: float = 0.5) -> np.ndarray:
    """Indices of all local maxima reaching ``fraction`` of the run maximum."""
    y = np.asarray(intensity, dtype=float)
    level = fraction * y.max()
    i = np.arange(1, y.size - 1)
    keep = (y[i] >= level) & (y[i] >= y[i - 1]) & (y[i] > y[i + 1])
    return i[keep]


def periodic_peaks(values, level: float) -> int:
    """Number of local maxima above ``level`` on a periodic grid."""
    v = np.asarray(values, dtype=float)
    left = np.roll(v, 1)
    right = np.roll(v, -1)
    return int(np.count_nonzero((v > level) & (v >= left) & (v > right)))
