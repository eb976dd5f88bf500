"""Self-consistent Schroedinger model on a truncated momentum ladder.

The wavefunction is expanded as

    psi(theta, tau) = (2 pi)^(-1/2) sum_n c_n exp(i n (theta + delta tau / rho_bar))

so ``n`` is the momentum in units of the photon recoil and the field is
carried in the rotating frame ``Abar = A exp(-i delta tau / rho_bar)``.
Amplitudes outside ``[n_min, n_max]`` are exactly zero; adequacy of the
truncation is enforced by an edge-occupation guard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvariantViolation, LadderGuardError, ValidationError
from .integrate import IntegratorConfig, integrate
from .params import ScaledParams

NORM_TOL = 1e-8
EDGE_TOL = 1e-10


@dataclass(frozen=True)
class MomentumWavefunction:
    n_min: int
    n_max: int
    c: np.ndarray
    tau: float = 0.0
    field_abar: complex = 0j

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        if self.n_max <= self.n_min:
            raise ValidationError(f"ladder ({self.n_min}, {self.n_max}) needs at least two levels")
        if c.shape != (self.n_max - self.n_min + 1,):
            raise ValidationError("amplitude vector does not match ladder size")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "field_abar", complex(self.field_abar))

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.c) ** 2

    def index(self, n: int) -> int:
        return n - self.n_min


@dataclass(frozen=True)
class DensityMatrixState:
    n_min: int
    n_max: int
    rho: np.ndarray
    tau: float = 0.0
    field_abar: complex = 0j

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        size = self.n_max - self.n_min + 1
        if self.n_max <= self.n_min or rho.shape != (size, size):
            raise ValidationError("density matrix does not match ladder size")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "field_abar", complex(self.field_abar))

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()

    def index(self, n: int) -> int:
        return n - self.n_min


def default_ladder(n0: int, rho_bar: float) -> tuple[int, int]:
    """Recoil is mostly downward with a spread of order ``rho_bar``."""
    return n0 - math.ceil(4 * rho_bar) - 8, n0 + 8


def init_momentum_state(n0: int, ladder: tuple[int, int], a0: complex = 0j) -> MomentumWavefunction:
    n_min, n_max = ladder
    if n_max <= n_min:
        raise ValidationError(f"ladder ({n_min}, {n_max}) has a single level and cannot emit")
    if not n_min <= n0 <= n_max:
        raise ValidationError(f"initial level {n0} outside ladder ({n_min}, {n_max})")
    c = np.zeros(n_max - n_min + 1, dtype=complex)
    c[n0 - n_min] = 1.0
    return MomentumWavefunction(n_min, n_max, c, 0.0, a0)


def to_density(s: MomentumWavefunction) -> DensityMatrixState:
    """Pure-state density matrix ``rho_mn = conj(c_m) c_n``."""
    return DensityMatrixState(s.n_min, s.n_max, np.outer(s.c.conj(), s.c), s.tau, s.field_abar)


def rhs_cn(s: MomentumWavefunction, params: ScaledParams):
    """Time derivative ``(dc/dtau, dAbar/dtau)`` of the amplitude form.

    dc_n/dtau = -(i/rho_bar) n (n + delta) c_n - (rho_bar/2)(Abar c_{n-1} - conj(Abar) c_{n+1})
    dAbar/dtau = sum_n conj(c_{n-1}) c_n
    """
    return _amplitude_derivative(s.c, s.field_abar, _phase_rates(s.levels, params), params.rho_bar)


def _phase_rates(levels, params):
    return levels * (levels + params.delta) / params.rho_bar


def _amplitude_derivative(c, abar, phase, rho_bar):
    dc = -1j * phase * c
    dc[1:] -= 0.5 * rho_bar * abar * c[:-1]
    dc[:-1] += 0.5 * rho_bar * np.conj(abar) * c[1:]
    return dc, np.sum(c[:-1].conj() * c[1:])


def rhs_density(s: DensityMatrixState, params: ScaledParams):
    """Time derivative ``(drho/dtau, dAbar/dtau)`` of the density-matrix form."""
    m = s.levels[:, None]
    n = s.levels[None, :]
    freq = (m - n) * (params.delta + m + n) / params.rho_bar
    return _density_derivative(s.rho, s.field_abar, freq, params.rho_bar)


def _density_derivative(rho, abar, freq, rho_bar):
    half = 0.5 * rho_bar
    d = 1j * freq * rho
    a, ac = half * abar, half * np.conj(abar)
    d[:-1, :] += a * rho[1:, :]  # rho_{m+1,n}
    d[:, 1:] -= a * rho[:, :-1]  # rho_{m,n-1}
    d[:, :-1] += ac * rho[:, 1:]  # rho_{m,n+1}
    d[1:, :] -= ac * rho[:-1, :]  # rho_{m-1,n}
    return d, np.trace(rho, offset=1)


class Observables(NamedTuple):
    levels: np.ndarray
    populations: np.ndarray
    mean_p: float
    mean_pbar: float
    norm: float
    intensity: float
    invariant: float


def observables(s, params: ScaledParams) -> Observables:
    """Level populations, mean momentum (recoil units and scaled), norm, |Abar|^2."""
    pops = s.probabilities
    norm = float(np.sum(pops))
    mean_p = float(np.sum(s.levels * pops))
    mean_pbar = 2.0 * mean_p / params.rho_bar
    intensity = abs(s.field_abar) ** 2
    return Observables(s.levels, pops, mean_p, mean_pbar, norm, intensity, intensity + mean_pbar)


def psi_density(s: MomentumWavefunction, theta, params: ScaledParams | None = None) -> np.ndarray:
    """``|psi|^2`` on an equispaced grid of ``M`` points or an explicit angle array.

    Without ``params`` the angle is the co-moving one ``theta + delta tau/rho_bar``;
    with ``params`` it is the laboratory angle.
    """
    theta = np.arange(theta) * 2 * np.pi / theta if np.isscalar(theta) else np.asarray(theta, dtype=float)
    span = s.n_max - s.n_min
    if theta.size < 2 * span + 1:
        raise ValidationError(f"theta grid of {theta.size} points aliases a ladder of width {span}; need >= {2 * span + 1}")
    c = s.c
    if params is not None:
        c = c * np.exp(1j * s.levels * params.detuning_rate * s.tau)
    psi = np.exp(1j * np.outer(theta, s.levels)) @ c / np.sqrt(2 * np.pi)
    return np.abs(psi) ** 2


@dataclass(frozen=True)
class QuantumTrajectory:
    """Sampled evolution.  ``states`` holds amplitude vectors or density matrices."""

    params: ScaledParams
    form: str
    n_min: int
    n_max: int
    tau: np.ndarray
    states: np.ndarray
    field_abar: np.ndarray
    widenings: tuple = field(default=())

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def field(self) -> np.ndarray:
        """Laboratory-frame field ``A = Abar exp(i delta tau / rho_bar)``."""
        return self.field_abar * np.exp(1j * self.params.detuning_rate * self.tau)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field_abar) ** 2

    @property
    def populations(self) -> np.ndarray:
        if self.form == "amplitudes":
            return np.abs(self.states) ** 2
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))

    @property
    def norm(self) -> np.ndarray:
        return self.populations.sum(axis=1)

    @property
    def mean_p(self) -> np.ndarray:
        return self.populations @ self.levels

    @property
    def mean_pbar(self) -> np.ndarray:
        return 2.0 * self.mean_p / self.params.rho_bar

    @property
    def invariant(self) -> np.ndarray:
        return self.intensity + self.mean_pbar

    def state_at(self, i: int):
        if self.form == "amplitudes":
            return MomentumWavefunction(self.n_min, self.n_max, self.states[i], float(self.tau[i]), self.field_abar[i])
        return DensityMatrixState(self.n_min, self.n_max, self.states[i], float(self.tau[i]), self.field_abar[i])


def _embed(state, ladder):
    lo, hi = ladder
    shift = state.n_min - lo
    size = hi - lo + 1
    if isinstance(state, MomentumWavefunction):
        c = np.zeros(size, dtype=complex)
        c[shift : shift + state.c.size] = state.c
        return MomentumWavefunction(lo, hi, c, state.tau, state.field_abar)
    rho = np.zeros((size, size), dtype=complex)
    k = state.rho.shape[0]
    rho[shift : shift + k, shift : shift + k] = state.rho
    return DensityMatrixState(lo, hi, rho, state.tau, state.field_abar)


def _run_once(state, params, cfg, tau_end, invariant_tol):
    levels = state.levels
    size = levels.size
    pure = isinstance(state, MomentumWavefunction)
    if pure:
        phase = _phase_rates(levels, params)
        y0 = np.concatenate([state.c, [state.field_abar]])

        def rhs(t, y):
            dc, da = _amplitude_derivative(y[:size], y[size], phase, params.rho_bar)
            return np.concatenate([dc, [da]])

        def unpack(y):
            return y[:size], y[size]

        def pops(y):
            return np.abs(y[:size]) ** 2

    else:
        m = levels[:, None]
        n = levels[None, :]
        freq = (m - n) * (params.delta + m + n) / params.rho_bar
        y0 = np.concatenate([state.rho.ravel(), [state.field_abar]])
        nn = size * size

        def rhs(t, y):
            d, da = _density_derivative(y[:nn].reshape(size, size), y[nn], freq, params.rho_bar)
            return np.concatenate([d.ravel(), [da]])

        def unpack(y):
            return y[:nn].reshape(size, size), y[nn]

        def pops(y):
            return np.real(np.diagonal(y[:nn].reshape(size, size)))

    inv0 = None

    def observe(t, y):
        nonlocal inv0
        p = pops(y)
        if p[0] > EDGE_TOL or p[-1] > EDGE_TOL:
            side = "low" if p[0] > EDGE_TOL else "high"
            raise LadderGuardError(
                f"edge occupation {max(p[0], p[-1]):.3g} exceeds {EDGE_TOL:g} at tau={t:.4g} on the {side} side "
                f"of ladder ({levels[0]}, {levels[-1]})",
                side,
                (t, y),
            )
        norm = float(np.sum(p))
        inv = abs(y[-1]) ** 2 + 2.0 * float(np.sum(levels * p)) / params.rho_bar
        if inv0 is None:
            inv0 = (norm, inv)
        if invariant_tol is not None and (abs(norm - inv0[0]) > invariant_tol or abs(inv - inv0[1]) > invariant_tol):
            raise InvariantViolation(
                f"norm drift {norm - inv0[0]:.3g} / invariant drift {inv - inv0[1]:.3g} exceed {invariant_tol:g} at tau={t:.4g}",
                (t, y),
            )
        return y.copy()

    t, samples = integrate(rhs, y0, tau_end, cfg, tau0=state.tau, observe=observe)
    parts = [unpack(y) for y in samples]
    states = np.array([p[0] for p in parts])
    abar = np.array([p[1] for p in parts])
    return t, states, abar


def evolve(
    state,
    params: ScaledParams,
    cfg: IntegratorConfig,
    tau_end: float,
    widen: bool = True,
    widen_step: int = 8,
    max_widenings: int = 12,
    invariant_tol: float | None = NORM_TOL,
) -> QuantumTrajectory:
    """Evolve amplitudes or a density matrix to ``tau_end``.

    If the edge guard trips and ``widen`` is set, the ladder is extended by
    ``widen_step`` levels on the offending side and the run restarts from
    the initial state.  Each widening is recorded on the trajectory.
    """
    if not isinstance(state, (MomentumWavefunction, DensityMatrixState)):
        raise ValidationError(f"cannot evolve {type(state).__name__}")
    widenings = []
    while True:
        try:
            t, states, abar = _run_once(state, params, cfg, tau_end, invariant_tol)
            break
        except LadderGuardError as exc:
            if not widen or len(widenings) >= max_widenings:
                raise
            lo, hi = state.n_min, state.n_max
            ladder = (lo - widen_step, hi) if exc.side == "low" else (lo, hi + widen_step)
            widenings.append(ladder)
            state = _embed(state, ladder)
    form = "amplitudes" if isinstance(state, MomentumWavefunction) else "density"
    return QuantumTrajectory(params, form, state.n_min, state.n_max, t, states, abar, tuple(widenings))


def occupied_ladder(traj: QuantumTrajectory, tol: float = EDGE_TOL, margin: int = 1) -> tuple[int, int]:
    """Narrowest ladder whose edge levels stayed below ``tol`` over the whole run."""
    peak = traj.populations.max(axis=0)
    live = np.flatnonzero(peak > tol)
    lo = max(traj.n_min, traj.n_min + int(live[0]) - margin)
    hi = min(traj.n_max, traj.n_min + int(live[-1]) + margin)
    return lo, hi


def restrict(s: MomentumWavefunction, ladder: tuple[int, int]) -> MomentumWavefunction:
    """Copy of ``s`` on a sub-ladder; amplitudes outside it are dropped."""
    lo, hi = ladder
    if lo < s.n_min or hi > s.n_max or hi <= lo:
        raise ValidationError(f"ladder {ladder} is not inside ({s.n_min}, {s.n_max})")
    c = s.c[s.index(lo) : s.index(hi) + 1].copy()
    return MomentumWavefunction(lo, hi, c, s.tau, s.field_abar)
