import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carlfel.classical import (
    ClassicalState,
    bunching,
    classical_invariant,
    evolve_classical,
    init_cold_beam,
    linear_growth_rate,
    rhs_classical,
)
from carlfel.errors import ValidationError
from carlfel.integrate import IntegratorConfig
from carlfel.params import ScaledParams


def test_cold_beam_is_unbunched():
    s = init_cold_beam(1000)
    assert abs(bunching(s.theta)) < 1e-13
    assert np.all(s.pbar == 0)
    assert s.field_a == 1e-4


def test_perfect_bunching_and_empty_set():
    assert bunching(np.zeros(7)) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        bunching(np.array([]))


def test_seeded_random_placement_is_reproducible():
    a = init_cold_beam(100, placement="seeded-random", seed=3)
    b = init_cold_beam(100, placement="seeded-random", seed=3)
    assert np.array_equal(a.theta, b.theta)
    with pytest.raises(ValidationError):
        init_cold_beam(100, placement="seeded-random")
    with pytest.raises(ValidationError):
        init_cold_beam(0)


def test_rhs_without_field_or_bunching():
    s = init_cold_beam(64, a0=0.0)
    d = rhs_classical(s, ScaledParams(1.0, 0.0))
    assert np.all(d.dtheta == 0) and np.all(d.dpbar == 0)
    assert abs(d.dfield) < 1e-14


def test_rhs_detuning_rotates_field():
    s = init_cold_beam(64, a0=1.0)
    d = rhs_classical(s, ScaledParams(2.0, 1.0))
    assert d.dfield == pytest.approx(0.5j, abs=1e-14)


def test_single_particle_force():
    s = ClassicalState(0.0, np.array([0.0]), np.array([0.3]), 0.5)
    d = rhs_classical(s, ScaledParams(1.0))
    assert d.dtheta[0] == 0.3
    assert d.dpbar[0] == pytest.approx(-1.0)


def test_nonfinite_state_rejected():
    with pytest.raises(ValidationError):
        ClassicalState(0.0, np.array([np.nan]), np.array([0.0]), 0.0)


def test_dispersion_roots():
    roots = linear_growth_rate(0.0)
    assert roots[0].real == pytest.approx(math.sqrt(3) / 2, rel=1e-12)
    for s in roots:
        assert abs(s**2 * s - 1j) < 1e-12


@given(st.floats(-3, 3), st.floats(0.1, 20))
@settings(max_examples=40, deadline=None)
def test_dispersion_roots_satisfy_cubic(delta, rho):
    d = delta / rho
    for s in linear_growth_rate(delta, rho):
        assert abs(s**2 * (s - 1j * d) - 1j) < 1e-9


def test_invariant_conserved_and_deterministic():
    s0 = init_cold_beam(500, a0=1e-2)
    cfg = IntegratorConfig(output_stride=0.5)
    a = evolve_classical(s0, ScaledParams(1.0, 1.0), cfg, 10.0)
    b = evolve_classical(s0, ScaledParams(1.0, 1.0), cfg, 10.0)
    assert np.max(np.abs(a.invariant - a.invariant[0])) < 1e-10
    assert np.array_equal(a.field, b.field)
    assert classical_invariant(a.final) == pytest.approx(a.invariant[-1], abs=1e-15)


def test_universality_at_zero_detuning():
    s0 = init_cold_beam(256)
    cfg = IntegratorConfig(output_stride=0.5)
    a = evolve_classical(s0, ScaledParams(1.0, 0.0), cfg, 8.0)
    b = evolve_classical(s0, ScaledParams(10.0, 0.0), cfg, 8.0)
    assert np.array_equal(a.intensity, b.intensity)
