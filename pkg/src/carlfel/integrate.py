"""Explicit Runge-Kutta drivers shared by every model.

States are flat numpy arrays (real or complex).  Output is produced on a
uniform grid in tau; adaptive steps are clipped so that every output time is
hit exactly, which keeps trajectories from different models sample-aligned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import NumericalAbort, StepSizeUnderflow, ValidationError

DT_MIN = 1e-12

METHODS = ("rk4-fixed", "rk45-adaptive")

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``output_stride`` is the spacing in tau between recorded samples.  For
    ``rk4-fixed`` it must be a whole number of steps ``dt``.
    """

    method: str = "rk45-adaptive"
    dt: float = 1e-2
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 5_000_000
    output_stride: float = 0.05

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown integrator method {self.method!r}; expected one of {METHODS}")
        if self.method == "rk4-fixed" and not self.dt > 0:
            raise ValidationError("rk4-fixed needs dt > 0")
        if self.method == "rk45-adaptive" and not (self.rtol > 0 and self.atol > 0):
            raise ValidationError("rk45-adaptive needs rtol > 0 and atol > 0")
        if self.max_steps < 1 or not self.output_stride > 0:
            raise ValidationError("max_steps must be >= 1 and output_stride > 0")

    def with_(self, **changes) -> "IntegratorConfig":
        return replace(self, **changes)


def output_times(tau_end: float, stride: float, tau0: float = 0.0) -> np.ndarray:
    """Uniform sample grid from ``tau0`` to ``tau_end`` inclusive."""
    if tau_end < tau0:
        raise ValidationError(f"tau_end={tau_end} precedes start {tau0}")
    n = int(math.ceil((tau_end - tau0) / stride - 1e-9))
    t = tau0 + stride * np.arange(n + 1)
    t[-1] = tau_end
    return t


def rk4_step(rhs: Callable, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _abort_if_nonfinite(y, t, last_good):
    if not np.all(np.isfinite(y)):
        raise NumericalAbort(f"non-finite state encountered at tau={t:.6g}", last_good)


def integrate_fixed(rhs, y0, t_out, dt, observe=None, max_steps=5_000_000):
    """Classical RK4 with constant step ``dt``; returns observations at ``t_out``."""
    y = np.array(y0, copy=True)
    t = float(t_out[0])
    observe = observe or (lambda t, y: y.copy())
    samples = [observe(t, y)]
    steps = 0
    for t_next in t_out[1:]:
        n_sub = max(1, int(round((t_next - t) / dt)))
        if abs(n_sub * dt - (t_next - t)) > 1e-9 * max(1.0, abs(t_next)):
            # uneven tail segment (only the final sample can be short)
            n_sub = int(math.ceil((t_next - t) / dt - 1e-9))
        h = (t_next - t) / n_sub
        for _ in range(n_sub):
            y_new = rk4_step(rhs, t, y, h)
            _abort_if_nonfinite(y_new, t + h, (t, y))
            y, t = y_new, t + h
            steps += 1
            if steps > max_steps:
                raise NumericalAbort(f"max_steps={max_steps} exceeded at tau={t:.6g}", (t, y))
        t = float(t_next)
        samples.append(observe(t, y))
    return samples


def _initial_step(rhs, t, y, f0, rtol, atol):
    scale = atol + rtol * np.abs(y)
    d0 = np.max(np.abs(y) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = rhs(t + h0, y + h0 * f0)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def integrate_adaptive(rhs, y0, t_out, rtol, atol, observe=None, max_steps=5_000_000):
    """Dormand-Prince 5(4) with max-norm error control over the full state."""
    y = np.array(y0, copy=True)
    t = float(t_out[0])
    observe = observe or (lambda t, y: y.copy())
    samples = [observe(t, y)]
    if len(t_out) == 1:
        return samples
    f = rhs(t, y)
    _abort_if_nonfinite(f, t, (t, y))
    h = _initial_step(rhs, t, y, f, rtol, atol)
    steps = 0
    k = [None] * 7
    for t_next in t_out[1:]:
        t_next = float(t_next)
        while t < t_next:
            clipped = t + h >= t_next
            h_try = t_next - t if clipped else h
            k[0] = f
            for i in range(1, 7):
                yi = y + h_try * sum(a * kj for a, kj in zip(_A[i], k[:i]) if a != 0.0)
                k[i] = rhs(t + _C[i] * h_try, yi)
            y_new = yi  # stage 7 evaluates at the 5th-order solution (FSAL)
            err = h_try * sum(e * kj for e, kj in zip(_E, k) if e != 0.0)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.max(np.abs(err) / scale))
            if not math.isfinite(err_norm) or not np.all(np.isfinite(y_new)):
                raise NumericalAbort(f"non-finite state encountered at tau={t + h_try:.6g}", (t, y))
            steps += 1
            if steps > max_steps:
                raise NumericalAbort(f"max_steps={max_steps} exceeded at tau={t:.6g}", (t, y))
            if err_norm <= 1.0:
                t = t_next if clipped else t + h_try
                y = y_new
                f = k[6]
                factor = 5.0 if err_norm == 0 else min(5.0, max(0.2, 0.9 * err_norm**-0.2))
                if not clipped or factor < 1.0:
                    h = h_try * factor
            else:
                h = h_try * max(0.2, 0.9 * err_norm**-0.2)
            if h < DT_MIN:
                raise StepSizeUnderflow(f"step size {h:.3g} below {DT_MIN:g} at tau={t:.6g}", (t, y))
        samples.append(observe(t, y))
    return samples


def integrate(rhs, y0, tau_end, cfg: IntegratorConfig, tau0=0.0, observe=None):
    """Integrate ``dy/dtau = rhs(tau, y)`` and return ``(t_out, samples)``."""
    t_out = output_times(tau_end, cfg.output_stride, tau0)
    if cfg.method == "rk4-fixed":
        samples = integrate_fixed(rhs, y0, t_out, cfg.dt, observe, cfg.max_steps)
    else:
        samples = integrate_adaptive(rhs, y0, t_out, cfg.rtol, cfg.atol, observe, cfg.max_steps)
    return t_out, samples
