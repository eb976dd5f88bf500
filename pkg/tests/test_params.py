import math

import mpmath
import numpy as np
import pytest

from carlfel.errors import ValidationError
from carlfel.params import (
    CarlPhysicalParams,
    FelPhysicalParams,
    PhysicalConstants,
    ScaledParams,
    carl_scaling,
    fel_scaling,
    photons_per_particle,
)

# CODATA values pinned so the frozen numbers below do not move with scipy releases
HBAR = 1.0545718176461565e-34
C = 299792458.0
M_E = 9.1093837139e-31
E = 1.602176634e-19
EPS0 = 8.8541878188e-12
U = 1.66053906892e-27

ELECTRON = PhysicalConstants(HBAR, C, M_E, E, EPS0)
RB87 = PhysicalConstants(HBAR, C, 86.909180527 * U, E, EPS0)

FEL = FelPhysicalParams(lambda_w=0.02, a_w=1.0, gamma0=141.4213562373095, density_n=1e16, lambda_r=1e-6)
CARL = CarlPhysicalParams(
    rabi_omega=1e7, detuning_pump=1e9, gamma_decay=3.8e7, dipole_d=2.537e-29, omega=2.4e15, omega_p=2.4e15 + 1e5, density_n=1e18
)


def fel_oracle(p):
    mp = mpmath.mp
    mp.dps = 40
    lw, aw, g0, n, lr = (mpmath.mpf(v) for v in (p.lambda_w, p.a_w, p.gamma0, p.density_n, p.lambda_r))
    hbar, c, m, e, eps0 = (mpmath.mpf(v) for v in (HBAR, C, M_E, E, EPS0))
    k = 2 * mp.pi / lr
    kw = 2 * mp.pi / lw
    gr = mpmath.sqrt(lw / (2 * lr) * (1 + aw**2))
    q = m * c * gr / (hbar * k)
    rho_f = (aw / (4 * c * kw)) ** (mpmath.mpf(2) / 3) * mpmath.cbrt(e**2 * n / (m * eps0)) / gr
    return {"gamma_r": gr, "q": q, "rho_f": rho_f, "rho_bar": q * rho_f, "delta": q * (g0 - gr) / gr}


def carl_oracle(p, mass):
    mp = mpmath.mp
    mp.dps = 40
    om, dp, g, d, w, wp, n = (mpmath.mpf(v) for v in (p.rabi_omega, p.detuning_pump, p.gamma_decay, p.dipole_d, p.omega, p.omega_p, p.density_n))
    hbar, c, eps0, m = (mpmath.mpf(v) for v in (HBAR, C, EPS0, mass))
    s0 = dp * om / (2 * (g**2 + dp**2 + om**2))
    k = w / c
    wr = 2 * hbar * k**2 / m
    rho = (s0 / wr) ** (mpmath.mpf(2) / 3) * mpmath.cbrt(w * d**2 * n / (2 * hbar * eps0))
    return {"omega_r": wr, "s0": s0, "rho_bar": rho, "delta": (wp - w) / wr}


def test_fel_scaling_frozen_values():
    s = fel_scaling(FEL, ELECTRON)
    assert s.gamma_r == pytest.approx(141.4213562373095, rel=1e-13)
    assert s.q == pytest.approx(58286592.61091651, rel=1e-13)
    assert s.rho_f == pytest.approx(4.295947624672969e-4, rel=1e-13)
    assert s.params.rho_bar == pytest.approx(25039.61490771478, rel=1e-13)
    assert abs(s.params.delta) < 1e-6


def test_fel_scaling_matches_high_precision_oracle():
    fel = FelPhysicalParams(0.03, 1.4, 200.0, 3e17, 2e-7)
    s = fel_scaling(fel, ELECTRON)
    ref = fel_oracle(fel)
    assert s.gamma_r == pytest.approx(float(ref["gamma_r"]), rel=1e-13)
    assert s.q == pytest.approx(float(ref["q"]), rel=1e-13)
    assert s.rho_f == pytest.approx(float(ref["rho_f"]), rel=1e-13)
    assert s.params.rho_bar == pytest.approx(float(ref["rho_bar"]), rel=1e-13)
    assert s.params.delta == pytest.approx(float(ref["delta"]), rel=1e-10)


def test_carl_scaling_frozen_values():
    s = carl_scaling(CARL, RB87)
    assert s.omega_r == pytest.approx(93663.95266751803, rel=1e-13)
    assert s.s0 == pytest.approx(4.992291901304386e-3, rel=1e-13)
    assert s.params.rho_bar == pytest.approx(132.9486982696473, rel=1e-13)
    assert s.params.delta == pytest.approx(1.067646593508318, rel=1e-9)


def test_carl_scaling_matches_high_precision_oracle():
    s = carl_scaling(CARL, RB87)
    ref = carl_oracle(CARL, 86.909180527 * U)
    for name in ("omega_r", "s0"):
        assert getattr(s, name) == pytest.approx(float(ref[name]), rel=1e-13)
    assert s.params.rho_bar == pytest.approx(float(ref["rho_bar"]), rel=1e-13)


def test_density_doubling_scales_rho_by_cube_root_two():
    a = fel_scaling(FEL, ELECTRON).params.rho_bar
    b = fel_scaling(FelPhysicalParams(0.02, 1.0, 141.4213562373095, 2e16, 1e-6), ELECTRON).params.rho_bar
    assert b / a == pytest.approx(2 ** (1 / 3), rel=1e-13)


def test_resonant_beam_has_zero_detuning_and_offset_is_linear():
    gr = fel_scaling(FEL, ELECTRON).gamma_r
    s = fel_scaling(FelPhysicalParams(0.02, 1.0, gr * 1.001, 1e16, 1e-6), ELECTRON)
    assert s.params.delta == pytest.approx(s.q * 1e-3, rel=1e-9)


def test_constants_from_scipy():
    assert PhysicalConstants.electron().m == pytest.approx(M_E, rel=1e-9)
    assert PhysicalConstants.atom(1.0).m == pytest.approx(U, rel=1e-9)


@pytest.mark.parametrize("kw", [{"rho_bar": 0.0}, {"rho_bar": -1.0}, {"rho_bar": math.nan}, {"rho_bar": 1.0, "delta": math.inf}])
def test_scaled_params_validation(kw):
    with pytest.raises(ValidationError):
        ScaledParams(**kw)


def test_invalid_physical_inputs():
    with pytest.raises(ValidationError):
        FelPhysicalParams(0.02, 1.0, 0.5, 1e16, 1e-6)
    with pytest.raises(ValidationError):
        FelPhysicalParams(-0.02, 1.0, 100.0, 1e16, 1e-6)
    with pytest.raises(ValidationError):
        PhysicalConstants(0.0, C, M_E, E, EPS0)


def test_carl_sign_rules():
    neg = CarlPhysicalParams(1e7, -1e9, 3.8e7, 2.537e-29, 2.4e15, 2.4e15, 1e18)
    s = carl_scaling(neg, RB87)
    assert s.s0 < 0 and s.params.rho_bar > 0
    zero = CarlPhysicalParams(0.0, 1e9, 3.8e7, 2.537e-29, 2.4e15, 2.4e15, 1e18)
    with pytest.raises(ValidationError, match="rho_bar = 0"):
        carl_scaling(zero, RB87)


def test_photons_per_particle():
    p = ScaledParams(10.0)
    assert photons_per_particle(0.0, p) == 0.0
    assert photons_per_particle(1j, p) == pytest.approx(5.0)
    np.testing.assert_allclose(photons_per_particle(np.array([1.0, 2.0]), p), [5.0, 20.0])
