"""Wigner phase-space representation on a periodic angle grid.

For a wavefunction on the integer momentum ladder the Wigner function is
supported on half-integer momenta ``s = (m + n)/2``; in scaled units the rows
sit at ``pbar = 2 s / rho_bar`` and are spaced by exactly ``1/rho_bar``, so
the momentum shifts of the exact quantum evolution are whole-row shifts.
Rows beyond the ladder read as zero.

``values[r, l]`` is the density per unit angle carried by row ``r``; the sum
over rows is ``|psi(theta)|^2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvariantViolation, ValidationError
from .integrate import IntegratorConfig, integrate
from .params import ScaledParams
from .quantum import MomentumWavefunction

EQUATIONS = ("wigner", "vlasov")
VLASOV_DERIVATIVES = ("fd4", "spectral")
MIN_VLASOV_ROWS = 8


class VlasovResolutionWarning(UserWarning):
    """Momentum support too narrow for a differential momentum derivative."""


@dataclass(frozen=True)
class WignerGrid:
    theta: np.ndarray
    s_levels: np.ndarray
    values: np.ndarray
    tau: float
    field_a: complex
    rho_bar: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.s_levels.size, self.theta.size):
            raise ValidationError("Wigner values must have shape (n_rows, n_theta)")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "field_a", complex(self.field_a))

    @property
    def pbar(self) -> np.ndarray:
        return 2.0 * self.s_levels / self.rho_bar

    @property
    def dtheta(self) -> float:
        return 2 * np.pi / self.theta.size

    def total(self) -> float:
        return float(np.sum(self.values) * self.dtheta)


def theta_grid(m: int) -> np.ndarray:
    return 2 * np.pi * np.arange(m) / m


def default_grid_size(n_min: int, n_max: int) -> int:
    return 4 * (n_max - n_min) + 1


def wigner_from_state(s: MomentumWavefunction, m: int, params: ScaledParams) -> WignerGrid:
    """Discrete Wigner function of a ladder state on ``m`` laboratory angles.

    W(theta, s) = (1/2pi) sum_{m+n=2s} conj(a_m) a_n exp(i (n - m) theta)

    with laboratory amplitudes ``a_n = c_n exp(i n delta tau / rho_bar)``.
    """
    span = s.n_max - s.n_min
    if m < 4 * span + 1:
        raise ValidationError(f"grid of {m} angles too small for ladder width {span}; need >= {4 * span + 1}")
    rate = params.detuning_rate
    a = s.c * np.exp(1j * s.levels * rate * s.tau)
    k = a.size
    i, j = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    coeff = np.zeros((2 * k - 1, m), dtype=complex)
    np.add.at(coeff, ((i + j).ravel(), ((j - i) % m).ravel()), np.outer(a.conj(), a).ravel())
    w = np.fft.ifft(coeff, axis=1) * (m / (2 * np.pi))
    residue = float(np.max(np.abs(w.imag))) if w.size else 0.0
    if residue > 1e-12:
        raise ValidationError(f"Wigner construction left an imaginary residue of {residue:.3g}")
    s_levels = s.n_min + 0.5 * np.arange(2 * k - 1)
    field_a = s.field_abar * np.exp(1j * rate * s.tau)
    return WignerGrid(theta_grid(m), s_levels, w.real, s.tau, field_a, params.rho_bar)


def _check_grid(w: WignerGrid, params: ScaledParams):
    steps = np.diff(w.s_levels)
    if w.rho_bar != params.rho_bar or (steps.size and not np.allclose(steps, 0.5, rtol=0, atol=1e-12)):
        raise ValidationError(
            f"momentum rows must be spaced by exactly 1/rho_bar = {1 / params.rho_bar:g}; "
            f"grid was built for rho_bar={w.rho_bar:g}"
        )


def _theta_derivative(values):
    m = values.shape[-1]
    k = np.fft.rfftfreq(m, 1.0 / m)
    if m % 2 == 0:
        k[-1] = 0.0
    return np.fft.irfft(1j * k * np.fft.rfft(values, axis=-1), n=m, axis=-1)


def momentum_difference(values, rho_bar):
    """Centered row difference ``(W(pbar + 1/rho_bar) - W(pbar - 1/rho_bar)) / (2/rho_bar)``."""
    out = np.zeros_like(values)
    out[:-1] += values[1:]
    out[1:] -= values[:-1]
    return 0.5 * rho_bar * out


def momentum_derivative_fd4(values, h):
    """Fourth-order centered derivative along rows, one-sided at the two edge rows."""
    w = values
    r = w.shape[0]
    if r < 5:
        raise ValidationError("fourth-order momentum derivative needs at least 5 rows")
    d = np.empty_like(w)
    d[2:-2] = w[:-4] - 8 * w[1:-3] + 8 * w[3:-1] - w[4:]
    d[0] = -25 * w[0] + 48 * w[1] - 36 * w[2] + 16 * w[3] - 3 * w[4]
    d[1] = -3 * w[0] - 10 * w[1] + 18 * w[2] - 6 * w[3] + w[4]
    d[-2] = 3 * w[-1] + 10 * w[-2] - 18 * w[-3] + 6 * w[-4] - w[-5]
    d[-1] = 25 * w[-1] - 48 * w[-2] + 36 * w[-3] - 16 * w[-4] + 3 * w[-5]
    return d / (12 * h)


def momentum_derivative_spectral(values, h):
    r = values.shape[0]
    kappa = 2 * np.pi * np.fft.rfftfreq(r, h)
    if r % 2 == 0:
        kappa[-1] = 0.0
    return np.fft.irfft(1j * kappa[:, None] * np.fft.rfft(values, axis=0), n=r, axis=0)


def _field_drive(values, theta, field_a, rate):
    dtheta = 2 * np.pi / theta.size
    return np.sum(values.sum(axis=0) * np.exp(-1j * theta)) * dtheta + 1j * rate * field_a


def rhs_wigner(w: WignerGrid, params: ScaledParams):
    """``(dW/dtau, dA/dtau)`` of the exact finite-difference phase-space equation."""
    _check_grid(w, params)
    return _wigner_derivative(w.values, w.theta, w.pbar, w.field_a, params)


def _wigner_derivative(values, theta, pbar, field_a, params):
    force = 2.0 * (field_a * np.exp(1j * theta)).real
    dw = -pbar[:, None] * _theta_derivative(values) + force[None, :] * momentum_difference(values, params.rho_bar)
    return dw, _field_drive(values, theta, field_a, params.detuning_rate)


def rhs_vlasov(w: WignerGrid, params: ScaledParams, derivative: str = "fd4"):
    """``(dW/dtau, dA/dtau)`` of the classical Vlasov limit on the same grid."""
    _check_grid(w, params)
    return _vlasov_derivative(w.values, w.theta, w.pbar, w.field_a, params, derivative)


def _vlasov_derivative(values, theta, pbar, field_a, params, derivative):
    h = 1.0 / params.rho_bar
    if derivative == "fd4":
        dp = momentum_derivative_fd4(values, h)
    elif derivative == "spectral":
        dp = momentum_derivative_spectral(values, h)
    else:
        raise ValidationError(f"unknown momentum derivative {derivative!r}; expected one of {VLASOV_DERIVATIVES}")
    force = 2.0 * (field_a * np.exp(1j * theta)).real
    dw = -pbar[:, None] * _theta_derivative(values) + force[None, :] * dp
    return dw, _field_drive(values, theta, field_a, params.detuning_rate)


class Marginals(NamedTuple):
    theta_density: np.ndarray
    momentum_distribution: np.ndarray


def marginals(w: WignerGrid) -> Marginals:
    return Marginals(w.values.sum(axis=0), w.values.sum(axis=1) * w.dtheta)


def momentum_support(w: WignerGrid, rel: float = 1e-8) -> int:
    """Number of rows carrying non-negligible weight."""
    mass = np.abs(w.values).sum(axis=1)
    return int(np.count_nonzero(mass > rel * mass.max())) if mass.max() > 0 else 0


@dataclass(frozen=True)
class WignerTrajectory:
    params: ScaledParams
    equation: str
    theta: np.ndarray
    s_levels: np.ndarray
    tau: np.ndarray
    field: np.ndarray
    norm: np.ndarray
    mean_pbar: np.ndarray
    values: np.ndarray | None

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    @property
    def invariant(self) -> np.ndarray:
        return self.intensity + self.mean_pbar

    def grid_at(self, i: int) -> WignerGrid:
        if self.values is None:
            raise ValidationError("trajectory was recorded without grid values")
        return WignerGrid(self.theta, self.s_levels, self.values[i], float(self.tau[i]), self.field[i], self.params.rho_bar)


def _force_term(values, force, params, equation, derivative):
    if equation == "wigner":
        dp = momentum_difference(values, params.rho_bar)
    elif derivative == "fd4":
        dp = momentum_derivative_fd4(values, 1.0 / params.rho_bar)
    else:
        dp = momentum_derivative_spectral(values, 1.0 / params.rho_bar)
    return force[None, :] * dp


def evolve_wigner(
    w: WignerGrid,
    params: ScaledParams,
    cfg: IntegratorConfig,
    tau_end: float,
    equation: str = "wigner",
    derivative: str = "fd4",
    keep_values: bool = True,
    invariant_tol: float | None = None,
    scheme: str = "interaction",
) -> WignerTrajectory:
    """Evolve a grid under the exact finite-difference equation or its Vlasov limit.

    ``scheme="interaction"`` (default) integrates the angular Fourier
    coefficients with free streaming factored out exactly, so the step size
    is set by the force term alone.  ``scheme="direct"`` integrates the grid
    right-hand side as is and is much stiffer.
    """
    if equation not in EQUATIONS:
        raise ValidationError(f"unknown phase-space equation {equation!r}; expected one of {EQUATIONS}")
    if derivative not in VLASOV_DERIVATIVES:
        raise ValidationError(f"unknown momentum derivative {derivative!r}; expected one of {VLASOV_DERIVATIVES}")
    _check_grid(w, params)
    if equation == "vlasov":
        rows = momentum_support(w)
        if rows < MIN_VLASOV_ROWS:
            warnings.warn(
                f"momentum support spans {rows} rows (< {MIN_VLASOV_ROWS}); the Vlasov derivative is under-resolved",
                VlasovResolutionWarning,
                stacklevel=2,
            )
    shape = w.values.shape
    m = shape[1]
    theta, pbar = w.theta, w.pbar
    dtheta = w.dtheta
    rate = params.detuning_rate
    e_plus = np.exp(1j * theta)
    e_minus = e_plus.conj()

    if scheme == "direct":
        size = w.values.size

        def rhs(t, y):
            values = y[:size].reshape(shape)
            field_a = complex(y[size], y[size + 1])
            force = 2.0 * (field_a * e_plus).real
            dw = -pbar[:, None] * _theta_derivative(values) + _force_term(values, force, params, equation, derivative)
            da = np.sum(values.sum(axis=0) * e_minus) * dtheta + 1j * rate * field_a
            return np.concatenate([dw.ravel(), [da.real, da.imag]])

        def decode(t, y):
            return y[:size].reshape(shape), complex(y[size], y[size + 1])

        y0 = np.concatenate([w.values.ravel(), [w.field_a.real, w.field_a.imag]])
    elif scheme == "interaction":
        k = np.fft.rfftfreq(m, 1.0 / m)
        if m % 2 == 0:
            k[-1] = 0.0  # the Nyquist mode does not stream, matching the grid derivative
        stream = pbar[:, None] * k[None, :]
        n_coef = stream.size

        def decode(t, y):
            coef = y[:n_coef].reshape(stream.shape) * np.exp(-1j * stream * (t - w.tau))
            return np.fft.irfft(coef, n=m, axis=1) * m, y[n_coef]

        def rhs(t, y):
            phase = np.exp(1j * stream * (t - w.tau))
            values = np.fft.irfft(y[:n_coef].reshape(stream.shape) * phase.conj(), n=m, axis=1) * m
            field_a = y[n_coef]
            force = 2.0 * (field_a * e_plus).real
            nonlin = np.fft.rfft(_force_term(values, force, params, equation, derivative), axis=1) / m
            da = np.sum(values.sum(axis=0) * e_minus) * dtheta + 1j * rate * field_a
            return np.concatenate([(nonlin * phase).ravel(), [da]])

        y0 = np.concatenate([(np.fft.rfft(w.values, axis=1) / m).ravel(), [w.field_a]])
    else:
        raise ValidationError(f"unknown scheme {scheme!r}; expected 'interaction' or 'direct'")

    ref = {}

    def observe(t, y):
        values, field_a = decode(t, y)
        rows = values.sum(axis=1) * dtheta
        norm = float(rows.sum())
        mean_pbar = float(rows @ pbar)
        if invariant_tol is not None:
            inv = abs(field_a) ** 2 + mean_pbar
            ref.setdefault("v", (norm, inv))
            if abs(norm - ref["v"][0]) > invariant_tol or abs(inv - ref["v"][1]) > invariant_tol:
                raise InvariantViolation(f"phase-space invariants drifted beyond {invariant_tol:g} at tau={t:.4g}", (t, y))
        return complex(field_a), norm, mean_pbar, (values.copy() if keep_values else None)

    t, samples = integrate(rhs, y0, tau_end, cfg, tau0=w.tau, observe=observe)
    field, norm, mean_pbar, values = zip(*samples)
    return WignerTrajectory(
        params,
        equation,
        w.theta,
        w.s_levels,
        t,
        np.array(field),
        np.array(norm),
        np.array(mean_pbar),
        np.array(values) if keep_values else None,
    )
