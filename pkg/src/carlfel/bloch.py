"""Two-level (Maxwell-Bloch) reduction of the momentum-ladder dynamics.

Only levels ``n`` and ``n - 1`` are kept.  With

    S = 2 rho_{n-1,n},  D = rho_{n,n} - rho_{n-1,n-1},
    A' = sqrt(rho_bar) Abar,  tau' = sqrt(rho_bar) tau,
    Delta_n = (delta - 1 + 2 n) / rho_bar**1.5

the equations are

    dS/dtau'  = -i Delta_n S + A' D
    dD/dtau'  = -(A' conj(S) + conj(A') S) / 2
    dA'/dtau' = kappa S

The exact image of the ladder field equation gives ``kappa = 1/2``
(``consistent-reduction``, the default).  The ``literal`` variant keeps
``kappa = 1``, the commonly printed form, whose resonant limit is the
pendulum ``phi'' = sin(phi)``.  The two differ by a factor ``sqrt(2)`` in
time scale and a factor 2 in peak intensity; comparison with the full
ladder model selects ``consistent-reduction``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NotTwoLevelError, ValidationError
from .integrate import IntegratorConfig, integrate
from .params import ScaledParams
from .quantum import DensityMatrixState

CONSISTENT = "consistent-reduction"
LITERAL = "literal"
VARIANTS = (CONSISTENT, LITERAL)
# accepted spellings on the command line and in config files
_ALIASES = {"consistent": CONSISTENT}

LEAK_THRESHOLD = 1e-3


def canonical_variant(variant: str) -> str:
    variant = _ALIASES.get(variant, variant)
    if variant not in VARIANTS:
        raise ValidationError(f"unknown two-level variant {variant!r}; expected one of {VARIANTS}")
    return variant


def field_coupling(variant: str) -> float:
    return 0.5 if canonical_variant(variant) == CONSISTENT else 1.0


def detuning_n(n: int, params: ScaledParams) -> float:
    return (params.delta - 1 + 2 * n) / params.rho_bar**1.5


@dataclass(frozen=True)
class BlochState:
    n: int
    S: complex
    D: float
    field_aprime: complex
    tau_prime: float = 0.0
    delta_n: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "S", complex(self.S))
        object.__setattr__(self, "D", float(self.D))
        object.__setattr__(self, "field_aprime", complex(self.field_aprime))
        if abs(self.S) ** 2 + self.D**2 > 1 + 1e-8:
            raise ValidationError(f"Bloch vector length^2 {abs(self.S) ** 2 + self.D ** 2:.12g} exceeds 1")

    @classmethod
    def ground(cls, n: int, params: ScaledParams, aprime: complex, phi: float = 0.0) -> "BlochState":
        """Start at Bloch angle ``phi`` (``phi = 0``: everything in level ``n``)."""
        return cls(n, math.sin(phi), math.cos(phi), aprime, 0.0, detuning_n(n, params))


def reduce_to_two_level(rho: DensityMatrixState, n: int, params: ScaledParams, threshold: float = LEAK_THRESHOLD) -> BlochState:
    """Project a ladder density matrix onto levels ``n`` and ``n - 1``."""
    if not (rho.n_min <= n - 1 and n <= rho.n_max):
        raise ValidationError(f"levels {n - 1}, {n} are not both on the ladder ({rho.n_min}, {rho.n_max})")
    i = rho.index(n)
    pops = rho.probabilities
    leaked = float(np.sum(pops) - pops[i] - pops[i - 1])
    if leaked >= threshold:
        raise NotTwoLevelError(
            f"not in two-level regime: {leaked:.4g} of the population lies outside levels {n - 1}, {n} "
            f"(threshold {threshold:g})",
            leaked,
        )
    root = math.sqrt(params.rho_bar)
    return BlochState(
        n,
        2 * rho.rho[i - 1, i],
        float(pops[i] - pops[i - 1]),
        root * rho.field_abar,
        root * rho.tau,
        detuning_n(n, params),
    )


def leakage(populations, levels, n: int):
    """Probability outside levels ``n`` and ``n - 1`` (works on stacked populations)."""
    keep = (levels == n) | (levels == n - 1)
    return np.sum(np.asarray(populations)[..., ~keep], axis=-1)


class BlochDerivative(NamedTuple):
    dS: complex
    dD: float
    dA: complex


def rhs_bloch(b: BlochState, variant: str = CONSISTENT) -> BlochDerivative:
    kappa = field_coupling(variant)
    a, s = b.field_aprime, b.S
    return BlochDerivative(
        -1j * b.delta_n * s + a * b.D,
        -(a * s.conjugate()).real,
        kappa * s,
    )


def _vector_rhs(delta_n, kappa):
    def rhs(t, y):
        s = complex(y[0], y[1])
        a = complex(y[3], y[4])
        ds = -1j * delta_n * s + a * y[2]
        da = kappa * s
        return np.array([ds.real, ds.imag, -(a * s.conjugate()).real, da.real, da.imag])

    return rhs


@dataclass(frozen=True)
class BlochTrajectory:
    n: int
    variant: str
    delta_n: float
    tau_prime: np.ndarray
    S: np.ndarray
    D: np.ndarray
    field_aprime: np.ndarray

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field_aprime) ** 2

    @property
    def kappa(self) -> float:
        return field_coupling(self.variant)

    def state_at(self, i: int) -> BlochState:
        return BlochState(self.n, self.S[i], self.D[i], self.field_aprime[i], float(self.tau_prime[i]), self.delta_n)

    def conserved(self) -> np.ndarray:
        """``|A'|^2 + 2 kappa D``; constant at resonance for either variant."""
        return self.intensity + 2 * self.kappa * self.D


def evolve_bloch(b: BlochState, cfg: IntegratorConfig, tau_prime_end: float, variant: str = CONSISTENT) -> BlochTrajectory:
    variant = canonical_variant(variant)
    y0 = np.array([b.S.real, b.S.imag, b.D, b.field_aprime.real, b.field_aprime.imag])
    t, ys = integrate(_vector_rhs(b.delta_n, field_coupling(variant)), y0, tau_prime_end, cfg, tau0=b.tau_prime)
    ys = np.array(ys)
    return BlochTrajectory(b.n, variant, b.delta_n, t, ys[:, 0] + 1j * ys[:, 1], ys[:, 2], ys[:, 3] + 1j * ys[:, 4])


def _require_resonant_real(b_or_traj, tol=1e-12):
    if abs(b_or_traj.delta_n) > tol:
        raise ValidationError(f"Bloch angle needs resonance; Delta_n = {b_or_traj.delta_n:g}")
    s = np.atleast_1d(b_or_traj.S)
    a = np.atleast_1d(b_or_traj.field_aprime)
    if np.max(np.abs(s.imag)) > 1e-9 or np.max(np.abs(a.imag)) > 1e-9:
        raise ValidationError("Bloch angle needs real S and A'")


def bloch_angle(b: BlochState) -> float:
    """``phi`` with ``S = sin(phi)``, ``D = cos(phi)``; only defined at resonance."""
    _require_resonant_real(b)
    return math.atan2(b.S.real, b.D)


def _angle_rate(y, kappa):
    s, d, a = y[0], y[2], y[3]
    ds = a * d
    dd = -a * s
    return (d * ds - s * dd) / (s * s + d * d)


def pendulum_residual(traj: BlochTrajectory, eps: float = 1e-5) -> float:
    """Largest deviation from ``phi'' = kappa sin(phi)`` along a resonant trajectory.

    ``phi'`` is obtained from the vector field; ``phi''`` by differentiating
    it along the flow with a centered step of size ``eps``.
    """
    _require_resonant_real(traj)
    kappa = traj.kappa
    rhs = _vector_rhs(0.0, kappa)
    worst = 0.0
    for s, d, a in zip(traj.S, traj.D, traj.field_aprime):
        y = np.array([s.real, 0.0, d, a.real, 0.0])
        f = rhs(0.0, y)
        second = (_angle_rate(y + eps * f, kappa) - _angle_rate(y - eps * f, kappa)) / (2 * eps)
        phi = math.atan2(s.real, d)
        worst = max(worst, abs(second - kappa * math.sin(phi)))
    return worst


def refine_extrema(t, f, df, kind="max"):
    """Extrema of ``f`` located with cubic Hermite interpolation between samples.

    Returns arrays ``(times, values)`` of interior local extrema.
    """
    sign = 1.0 if kind == "max" else -1.0
    g = sign * f
    times, values = [], []
    for i in range(1, len(t) - 1):
        if g[i] >= g[i - 1] and g[i] > g[i + 1]:
            j = i if sign * df[i] <= 0 else i + 1  # bracket where derivative changes sign
            j0 = j - 1
            tm, val = _hermite_extremum(t[j0], t[j0 + 1], f[j0], f[j0 + 1], df[j0], df[j0 + 1], sign)
            times.append(tm)
            values.append(val)
    return np.array(times), np.array(values)


def _hermite_extremum(t0, t1, f0, f1, d0, d1, sign):
    h = t1 - t0
    # p(x) = f0 h00 + h d0 h10 + f1 h01 + h d1 h11, x in [0, 1]; p'(x) = a x^2 + b x + c
    a = 6 * f0 + 3 * h * d0 - 6 * f1 + 3 * h * d1
    b = -6 * f0 - 4 * h * d0 + 6 * f1 - 2 * h * d1
    c = h * d0
    if abs(a) < 1e-300:
        roots = [-c / b] if b != 0 else [0.0]
    else:
        disc = max(b * b - 4 * a * c, 0.0)
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        roots = [q / a] + ([c / q] if q != 0 else [])
    candidates = [min(max(x, 0.0), 1.0) for x in roots if -1e-9 <= x <= 1 + 1e-9] + [0.0, 1.0]

    def p(x):
        return (
            f0 * (2 * x**3 - 3 * x**2 + 1)
            + h * d0 * (x**3 - 2 * x**2 + x)
            + f1 * (-2 * x**3 + 3 * x**2)
            + h * d1 * (x**3 - x**2)
        )

    best = max(candidates, key=lambda x: sign * p(x))
    return t0 + best * h, p(best)


class PulseMetrics(NamedTuple):
    peak_times: np.ndarray
    peak_intensity: np.ndarray
    gain_per_pulse: np.ndarray
    pulse_period: float
    revolutions: int


def two_pi_pulse_metrics(traj: BlochTrajectory) -> PulseMetrics:
    """Peaks of ``|A'|^2``, the intensity gained across each pulse and the 2 pi count."""
    intensity = traj.intensity
    kappa = traj.kappa
    d_intensity = 2 * kappa * (traj.field_aprime.conjugate() * traj.S).real
    tp, peaks = refine_extrema(traj.tau_prime, intensity, d_intensity, "max")
    if tp.size == 0:
        raise ValidationError("trajectory too short to contain a pulse peak")
    tm, troughs = refine_extrema(traj.tau_prime, intensity, d_intensity, "min")
    gains = []
    for k, t_peak in enumerate(tp):
        before = troughs[(tm < t_peak) & (tm > (tp[k - 1] if k else -np.inf))]
        base = before[-1] if before.size else intensity[0]
        gains.append(peaks[k] - base)
    period = float(np.mean(np.diff(tp))) if tp.size > 1 else math.nan
    revolutions = 0
    if abs(traj.delta_n) <= 1e-12:
        phi = np.unwrap(np.arctan2(traj.S.real, traj.D))
        revolutions = int(np.floor((phi[-1] - phi[0]) / (2 * np.pi)))
    return PulseMetrics(tp, peaks, np.array(gains), period, revolutions)


def sech_profile(tau_prime, center, amplitude=2.0, width=1.0):
    return amplitude / np.cosh((tau_prime - center) / width)
