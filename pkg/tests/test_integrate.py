import math

import numpy as np
import pytest

from carlfel.errors import NumericalAbort, StepSizeUnderflow, ValidationError
from carlfel.integrate import IntegratorConfig, integrate, integrate_adaptive, integrate_fixed, output_times, rk4_step


def rotation(t, y):
    return 1j * y


def test_zero_rhs_is_identity():
    y0 = np.array([1.0 + 2j, -3.0])
    assert np.array_equal(rk4_step(lambda t, y: np.zeros_like(y), 0.0, y0, 0.1), y0)
    t, ys = integrate(lambda t, y: np.zeros_like(y), y0, 1.0, IntegratorConfig())
    assert np.array_equal(ys[-1], y0)


def test_rotation_one_period_fixed():
    cfg = IntegratorConfig("rk4-fixed", dt=1e-3, output_stride=2 * math.pi / 4)
    t, ys = integrate(rotation, np.array([1.0 + 0j]), 2 * math.pi, cfg)
    assert abs(abs(ys[-1][0]) - 1) < 1e-10
    assert abs(ys[-1][0] - 1) < 1e-10


def test_rotation_adaptive():
    t, ys = integrate(rotation, np.array([1.0 + 0j]), 2 * math.pi, IntegratorConfig(output_stride=0.1))
    assert abs(ys[-1][0] - 1) < 1e-9
    assert t[-1] == 2 * math.pi


def test_rk4_fourth_order_on_linear_system():
    a = np.array([[0.0, 1.0], [-4.0, -0.1]])
    exact_t = 3.0
    w, v = np.linalg.eig(a)
    y0 = np.array([1.0, 0.0])
    exact = (v @ np.diag(np.exp(w * exact_t)) @ np.linalg.solve(v, y0)).real
    errs = []
    for dt in (0.1, 0.05, 0.025):
        ys = integrate_fixed(lambda t, y: a @ y, y0, output_times(exact_t, exact_t), dt)
        errs.append(np.max(np.abs(ys[-1] - exact)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(16, rel=0.1)


def test_output_times_and_sampling():
    t = output_times(1.0, 0.25)
    np.testing.assert_allclose(t, [0, 0.25, 0.5, 0.75, 1.0])
    t = output_times(1.1, 0.25)
    assert t[-1] == 1.1


def test_nan_aborts_with_last_good_state():
    def rhs(t, y):
        return np.array([np.nan]) if t > 0.5 else np.array([1.0])

    with pytest.raises(NumericalAbort) as info:
        integrate(rhs, np.array([0.0]), 1.0, IntegratorConfig("rk4-fixed", dt=0.01, output_stride=0.01))
    tau, y = info.value.last_good
    assert tau <= 0.5 + 1e-12 and np.all(np.isfinite(y))


def test_adaptive_nan_aborts():
    def rhs(t, y):
        return np.array([np.nan]) if t > 0.5 else np.array([1.0])

    with pytest.raises(NumericalAbort):
        integrate_adaptive(rhs, np.array([0.0]), output_times(1.0, 0.1), 1e-8, 1e-10)


def test_step_underflow():
    with pytest.raises(StepSizeUnderflow):
        integrate_adaptive(lambda t, y: 1.0 / (0.5 - t) ** 2 * np.ones_like(y), np.array([0.0]), np.array([0.0, 1.0]), 1e-10, 1e-12)


def test_max_steps_bound():
    with pytest.raises(NumericalAbort):
        integrate(rotation, np.array([1.0 + 0j]), 10.0, IntegratorConfig("rk4-fixed", dt=1e-3, max_steps=100))


@pytest.mark.parametrize(
    "kw",
    [
        {"method": "euler"},
        {"method": "rk4-fixed", "dt": 0.0},
        {"rtol": -1.0},
        {"output_stride": 0.0},
        {"max_steps": 0},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ValidationError):
        IntegratorConfig(**kw)


def test_observe_hook_receives_samples():
    seen = []

    def observe(t, y):
        seen.append(t)
        return float(y[0].real)

    t, samples = integrate(rotation, np.array([1.0 + 0j]), 1.0, IntegratorConfig(output_stride=0.5), observe=observe)
    assert seen == list(t)
    assert samples[0] == 1.0
