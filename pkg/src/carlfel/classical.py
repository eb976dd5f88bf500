"""Classical N-particle dynamics coupled to one radiation mode.

    dtheta_j/dtau = pbar_j
    dpbar_j/dtau  = -(A exp(i theta_j) + c.c.)
    dA/dtau       = <exp(-i theta)> + i (delta/rho_bar) A

Phases are stored unwrapped; reduce them modulo 2 pi only for output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .integrate import IntegratorConfig, integrate
from .params import ScaledParams

PLACEMENTS = ("equispaced", "seeded-random")


@dataclass(frozen=True)
class ClassicalState:
    tau: float
    theta: np.ndarray
    pbar: np.ndarray
    field_a: complex

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        pbar = np.asarray(self.pbar, dtype=float)
        if theta.ndim != 1 or theta.shape != pbar.shape or theta.size < 1:
            raise ValidationError("theta and pbar must be equal-length 1-d arrays with N >= 1")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(pbar)) and np.isfinite(self.field_a)):
            raise ValidationError("classical state contains non-finite entries")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "pbar", pbar)
        object.__setattr__(self, "field_a", complex(self.field_a))

    @property
    def n_particles(self) -> int:
        return self.theta.size

    def wrapped_theta(self) -> np.ndarray:
        return np.mod(self.theta, 2 * np.pi)


class ClassicalDerivative(NamedTuple):
    dtheta: np.ndarray
    dpbar: np.ndarray
    dfield: complex


def init_cold_beam(n_particles: int, a0: complex = 1e-4, placement: str = "equispaced", seed: int | None = None):
    """Unbunched beam at zero momentum with field seed ``a0``.

    ``equispaced`` puts the phases at ``2 pi j / N`` so the bunching vanishes
    to rounding; ``seeded-random`` draws uniform phases from ``seed``.
    """
    if n_particles < 1:
        raise ValidationError(f"n_particles must be >= 1, got {n_particles}")
    if placement == "equispaced":
        theta = 2 * np.pi * np.arange(n_particles) / n_particles
    elif placement == "seeded-random":
        if seed is None:
            raise ValidationError("seeded-random placement needs a seed")
        theta = np.random.default_rng(seed).uniform(0.0, 2 * np.pi, n_particles)
    else:
        raise ValidationError(f"unknown placement {placement!r}; expected one of {PLACEMENTS}")
    return ClassicalState(0.0, theta, np.zeros(n_particles), complex(a0))


def bunching(theta) -> complex:
    """Mean phasor ``(1/N) sum exp(-i theta_j)``.

    numpy's pairwise summation gives a fixed reduction order, so the result
    does not depend on how the caller parallelizes.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.size == 0:
        raise ValidationError("bunching of an empty particle set")
    return complex(np.sum(np.exp(-1j * theta)) / theta.size)


def rhs_classical(s: ClassicalState, params: ScaledParams) -> ClassicalDerivative:
    phasor = s.field_a * np.exp(1j * s.theta)
    dfield = bunching(s.theta) + 1j * params.detuning_rate * s.field_a
    return ClassicalDerivative(s.pbar.copy(), -2.0 * phasor.real, dfield)


def classical_invariant(s: ClassicalState) -> float:
    """``|A|^2 + <pbar>``: emitted intensity is paid for by mean recoil."""
    return abs(s.field_a) ** 2 + float(np.mean(s.pbar))


def linear_growth_rate(delta: float, rho_bar: float = 1.0) -> np.ndarray:
    """Roots of the cold-beam dispersion relation ``s^2 (s - i delta/rho_bar) = i``.

    Sorted by decreasing real part; the first root's real part is the
    amplitude growth rate (the intensity grows at twice that).
    """
    d = delta / rho_bar
    roots = np.roots([1.0, -1j * d, 0.0, -1j])
    return roots[np.argsort(-roots.real, kind="stable")]


def _pack(s: ClassicalState) -> np.ndarray:
    return np.concatenate([s.theta, s.pbar, [s.field_a.real, s.field_a.imag]])


def _unpack(y, tau=0.0) -> ClassicalState:
    n = (y.size - 2) // 2
    return ClassicalState(tau, y[:n], y[n : 2 * n], complex(y[2 * n], y[2 * n + 1]))


def _vector_rhs(params: ScaledParams):
    rate = params.detuning_rate

    def rhs(t, y):
        n = (y.size - 2) // 2
        theta = y[:n]
        field = complex(y[2 * n], y[2 * n + 1])
        e = np.exp(1j * theta)
        out = np.empty_like(y)
        out[:n] = y[n : 2 * n]
        out[n : 2 * n] = -2.0 * (field * e).real
        da = np.sum(e.conj()) / n + 1j * rate * field
        out[2 * n] = da.real
        out[2 * n + 1] = da.imag
        return out

    return rhs


@dataclass(frozen=True)
class ClassicalTrajectory:
    params: ScaledParams
    tau: np.ndarray
    field: np.ndarray
    mean_pbar: np.ndarray
    bunching: np.ndarray
    final: ClassicalState

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    @property
    def invariant(self) -> np.ndarray:
        return self.intensity + self.mean_pbar


def evolve_classical(state: ClassicalState, params: ScaledParams, cfg: IntegratorConfig, tau_end: float):
    """Integrate from ``state`` to ``tau_end`` recording field and moments."""
    n = state.n_particles
    last = {}

    def observe(t, y):
        last["t"], last["y"] = t, y
        return complex(y[2 * n], y[2 * n + 1]), float(np.mean(y[n : 2 * n])), bunching(y[:n])

    t, samples = integrate(_vector_rhs(params), _pack(state), tau_end, cfg, tau0=state.tau, observe=observe)
    field, mean_pbar, bunch = (np.array(col) for col in zip(*samples))
    return ClassicalTrajectory(params, t, field, mean_pbar, bunch, _unpack(last["y"].copy(), last["t"]))
