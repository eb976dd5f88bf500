"""Dimensionless parameterization and physical-to-scaled conversions.

Both realizations of collective recoil lasing reduce to the same pair of
numbers: the collective parameter ``rho_bar`` (maximum photons emitted per
particle) and the detuning ``delta``.  The FEL and CARL conversions below
expose every intermediate so that they can be inspected and pinned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "ScaledParams",
    "PhysicalConstants",
    "FelPhysicalParams",
    "CarlPhysicalParams",
    "FelScaling",
    "CarlScaling",
    "fel_scaling",
    "carl_scaling",
    "photons_per_particle",
]


@dataclass(frozen=True)
class ScaledParams:
    """Collective parameter and detuning governing all scaled dynamics."""

    rho_bar: float
    delta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.rho_bar) and math.isfinite(self.delta)):
            raise ValidationError(f"non-finite parameters rho_bar={self.rho_bar}, delta={self.delta}")
        if self.rho_bar <= 0:
            raise ValidationError(f"rho_bar must be > 0, got {self.rho_bar}")

    @property
    def detuning_rate(self) -> float:
        """Phase-rotation rate ``delta / rho_bar`` of the field."""
        return self.delta / self.rho_bar


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants; injected so tests can use round numbers."""

    hbar: float
    c: float
    m: float
    e: float
    epsilon0: float

    def __post_init__(self):
        for name in ("hbar", "c", "m", "e", "epsilon0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"physical constant {name} must be finite and > 0, got {value}")

    @classmethod
    def electron(cls) -> "PhysicalConstants":
        from scipy import constants as sc

        return cls(hbar=sc.hbar, c=sc.c, m=sc.m_e, e=sc.e, epsilon0=sc.epsilon_0)

    @classmethod
    def atom(cls, mass_u: float) -> "PhysicalConstants":
        """Constants for a neutral atom of mass ``mass_u`` in atomic mass units."""
        from scipy import constants as sc

        return cls(hbar=sc.hbar, c=sc.c, m=mass_u * sc.atomic_mass, e=sc.e, epsilon0=sc.epsilon_0)


@dataclass(frozen=True)
class FelPhysicalParams:
    lambda_w: float
    a_w: float
    gamma0: float
    density_n: float
    lambda_r: float

    def __post_init__(self):
        for name in ("lambda_w", "a_w", "gamma0", "density_n", "lambda_r"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"FEL parameter {name} must be finite and > 0, got {value}")
        if self.gamma0 <= 1:
            raise ValidationError(f"gamma0 must exceed 1, got {self.gamma0}")


@dataclass(frozen=True)
class CarlPhysicalParams:
    rabi_omega: float
    detuning_pump: float
    gamma_decay: float
    dipole_d: float
    omega: float
    omega_p: float
    density_n: float

    def __post_init__(self):
        for name in ("rabi_omega", "detuning_pump", "gamma_decay", "dipole_d", "omega", "omega_p", "density_n"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"CARL parameter {name} is not finite")
        for name in ("gamma_decay", "density_n", "dipole_d", "omega"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"CARL parameter {name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class FelScaling:
    params: ScaledParams
    gamma_r: float
    q: float
    rho_f: float
    k: float
    k_w: float


@dataclass(frozen=True)
class CarlScaling:
    params: ScaledParams
    omega_r: float
    s0: float
    k: float


def _checked(name, formula, value):
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(f"{name} = {formula} evaluated to {value!r}; must be finite and > 0")
    return value


def fel_scaling(p: FelPhysicalParams, k: PhysicalConstants) -> FelScaling:
    """Map FEL beam and wiggler parameters to ``(rho_bar, delta)``.

    Parameters
    ----------
    p : FelPhysicalParams
        Wiggler period and strength, beam energy, density and radiation wavelength.
    k : PhysicalConstants
        SI constants; ``k.m`` is the electron mass.

    Returns
    -------
    FelScaling
        Scaled parameters plus the resonant energy ``gamma_r``, the recoil
        ratio ``q`` and the classical gain parameter ``rho_f``.
    """
    wavenumber = 2 * math.pi / p.lambda_r
    k_w = 2 * math.pi / p.lambda_w
    arg = p.lambda_w / (2 * p.lambda_r) * (1 + p.a_w**2)
    gamma_r = _checked("gamma_r", "sqrt((lambda_w/2 lambda)(1 + a_w^2))", math.sqrt(arg) if arg >= 0 else math.nan)
    q = _checked("q", "m c gamma_r / (hbar k)", k.m * k.c * gamma_r / (k.hbar * wavenumber))
    plasma = k.e**2 * p.density_n / (k.m * k.epsilon0)
    rho_f = _checked(
        "rho_F",
        "(1/gamma_r)(a_w/4 c k_w)^(2/3)(e^2 n / m eps0)^(1/3)",
        (p.a_w / (4 * k.c * k_w)) ** (2 / 3) * np.cbrt(plasma) / gamma_r,
    )
    rho_bar = _checked("rho_bar", "q rho_F", q * rho_f)
    delta = q * (p.gamma0 - gamma_r) / gamma_r
    if not math.isfinite(delta):
        raise ValidationError("delta = q (gamma0 - gamma_r) / gamma_r is not finite")
    return FelScaling(ScaledParams(rho_bar, delta), gamma_r, q, rho_f, wavenumber, k_w)


def carl_scaling(p: CarlPhysicalParams, k: PhysicalConstants) -> CarlScaling:
    """Map CARL pump, atom and cavity parameters to ``(rho_bar, delta)``.

    The radiation wavenumber is taken as ``omega / c``; ``k.m`` is the atomic mass.
    """
    denom = p.gamma_decay**2 + p.detuning_pump**2 + p.rabi_omega**2
    if denom <= 0:
        raise ValidationError("S0 denominator Gamma^2 + Delta^2 + Omega^2 is zero")
    s0 = p.detuning_pump * p.rabi_omega / (2 * denom)
    if s0 < 0 and p.detuning_pump >= 0:
        raise ValidationError(f"S0 = Delta Omega / 2(...) = {s0} is negative with Delta >= 0")
    wavenumber = p.omega / k.c
    omega_r = _checked("omega_R", "2 hbar k^2 / m", 2 * k.hbar * wavenumber**2 / k.m)
    rho_c = float(np.cbrt(s0 / omega_r)) ** 2 * float(np.cbrt(p.omega * p.dipole_d**2 * p.density_n / (2 * k.hbar * k.epsilon0)))
    if rho_c <= 0:
        raise ValidationError(
            f"rho_C = (S0/omega_R)^(2/3)(omega d^2 n / 2 hbar eps0)^(1/3) = {rho_c}; rho_bar = 0 is outside the model"
        )
    _checked("rho_C", "(S0/omega_R)^(2/3)(omega d^2 n / 2 hbar eps0)^(1/3)", rho_c)
    delta = (p.omega_p - p.omega) / omega_r
    return CarlScaling(ScaledParams(rho_c, delta), omega_r, s0, wavenumber)


def photons_per_particle(field_a, params: ScaledParams) -> float:
    """Mean number of emitted photons per particle, ``(rho_bar/2)|A|^2``."""
    return 0.5 * params.rho_bar * np.abs(field_a) ** 2
