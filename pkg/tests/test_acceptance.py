"""Acceptance criteria at their stated tolerances.

Each test carries a ``criterion`` marker; the terminal summary prints one
pass/fail line per criterion with the measured values.  Metric values come
from the preset reports, the bounds are pinned here.
"""

import math

import pytest

ALL_PRESETS = ("fig1-row1", "fig1-row2", "fig1-row3", "classical-growth", "two-level-pulses", "limit-comparison")


def measured(record_property, text):
    record_property("measured", text)


@pytest.mark.criterion("1", "conservation suite: norm/trace and |A|^2 + <pbar> drift < 1e-8 on all presets")
@pytest.mark.parametrize("name", ALL_PRESETS)
def test_conservation(preset, name, record_property):
    metrics = preset(name).metrics
    drifts = {k: v for k, v in metrics.items() if k.endswith(("norm_drift", "invariant_drift", "conserved_drift")) and "vlasov" not in k}
    assert drifts, f"no conservation metrics in {name}"
    worst = max(drifts, key=drifts.get)
    measured(record_property, f"{name} worst {worst}={drifts[worst]:.2e}")
    for key, value in drifts.items():
        assert value < 1e-8, f"{key} = {value:.3g}"


@pytest.mark.criterion("2", "Wigner finite-difference evolution equals Wigner of evolved state (L-inf <= 1e-6, rho=1)")
def test_exact_equivalence(preset, record_property):
    rep = preset("fig1-row2")
    grid = rep.metrics["wigner_grid_rel_linf_first_peak"]
    series = next(c for c in rep.report["comparisons"] if c["a"] == "wigner")["rel_linf_intensity"]
    measured(record_property, f"grid {grid:.2e}, |A|^2 {series:.2e}")
    assert grid <= 1e-6
    assert series <= 1e-6


def _comparison(rep, a, b, window=None):
    for c in rep.report["comparisons"]:
        if c["a"] == a and c["b"] == b and (window is None or abs(c["tau_window"] - window) < 1e-9):
            return c
    raise KeyError((a, b))


@pytest.mark.criterion("3", "classical limit at rho=10: quantum vs classical <= 10%, Vlasov vs Wigner <= 5%")
def test_classical_limit(preset, record_property):
    rep = preset("limit-comparison")
    cq = _comparison(rep, "classical", "quantum-c")
    vw = [c for c in rep.report["comparisons"] if c["a"] == "vlasov" and c["b"] == "wigner"]
    vw10 = min(vw, key=lambda c: c["tau_window"])
    measured(record_property, f"classical-quantum {cq['rel_linf_intensity']:.4f}, vlasov-wigner {vw10['rel_linf_intensity']:.4f}")
    assert cq["rel_linf_intensity"] <= 0.10
    assert vw10["rel_linf_intensity"] <= 0.05


@pytest.mark.criterion("4", "quantum regime: P0+P-1 > 0.9 at first peak (rho=1); two-level reduction accepted (rho=0.2)")
def test_quantum_regime_two_levels_rho1(preset, record_property):
    value = preset("fig1-row2").metrics["P0_plus_Pm1_first_peak"]
    measured(record_property, f"rho=1 P0+P-1 {value:.4f}")
    assert value > 0.9


@pytest.mark.criterion("4", "quantum regime: P0+P-1 > 0.9 at first peak (rho=1); two-level reduction accepted (rho=0.2)")
def test_quantum_regime_reduction_rho02(preset, record_property):
    m = preset("fig1-row3").metrics
    measured(record_property, f"rho=0.2 leakage {m['leakage_first_peak']:.5e}")
    assert m["leakage_first_peak"] < 1e-3
    assert m["two_level_reduction"]["accepted"]


@pytest.mark.criterion("5", "row-1 observables: <p> in [-1.5 rho, -0.5 rho]; density peak with contrast > 3x uniform")
def test_row1_observables(preset, record_property):
    m = preset("fig1-row1").metrics
    rho = 10.0
    measured(
        record_property,
        f"<p> {m['mean_p_first_peak']:.3f}, contrast {m['density_contrast_first_peak']:.2f}, peaks {m['density_peaks_above_3x_uniform']}",
    )
    assert -1.5 * rho <= m["mean_p_first_peak"] <= -0.5 * rho
    assert m["density_contrast_first_peak"] > 3.0
    assert m["density_peaks_above_3x_uniform"] >= 1


@pytest.mark.criterion("6", "classical delta=0 growth rate sqrt(3) within 2%")
def test_growth_rate(preset, record_property):
    m = preset("classical-growth").metrics
    rate = m["fitted_intensity_rate"]
    measured(record_property, f"rate {rate:.5f} (oracle {m['dispersion_intensity_rate']:.5f})")
    assert m["dispersion_intensity_rate"] == pytest.approx(math.sqrt(3), rel=1e-12)
    assert abs(rate - math.sqrt(3)) / math.sqrt(3) <= 0.02


@pytest.mark.criterion("7", "two-level sector: reduction <= 2%, equal pulses +-1%, gain 2 +- 1e-6, 2 sech within 1%, pendulum < 1e-6")
def test_two_level_sector(preset, record_property):
    m = preset("two-level-pulses").metrics
    measured(
        record_property,
        f"reduction {m['consistent-reduction.abs_Aprime_rel_linf_vs_quantum']:.2e}, spread {m['pulse_peak_spread']:.1e}, "
        f"gain err {m['pulse_gain_max_error']:.1e}, sech {m['literal.sech_rel_error']:.1e}, pendulum {m['literal.pendulum_residual']:.1e}",
    )
    assert m["consistent-reduction.abs_Aprime_rel_linf_vs_quantum"] <= 0.02
    assert m["pulse_count"] >= 2
    assert m["pulse_peak_spread"] <= 0.01
    assert m["pulse_gain_max_error"] <= 1e-6
    assert m["literal.sech_rel_error"] <= 0.01
    assert m["literal.pendulum_residual"] < 1e-6


@pytest.mark.criterion("8", "timescale: first-peak ratio 2 +- 5% (rho 0.05 vs 0.0125); delta=0 classical universality")
def test_timescale_ratio(preset, record_property):
    m = preset("two-level-pulses").metrics
    ratio = m["timescale.ratio"]
    t_a, t_b = m["timescale.first_peak_times"]
    measured(record_property, f"ratio {ratio:.4f} (peaks {t_a:.2f}, {t_b:.2f})")
    assert abs(ratio - 2.0) <= 0.1


@pytest.mark.criterion("8", "timescale: first-peak ratio 2 +- 5% (rho 0.05 vs 0.0125); delta=0 classical universality")
def test_classical_universality(preset, record_property):
    same = preset("classical-growth").metrics["universality_bitwise_equal_rho_1_vs_10"]
    measured(record_property, f"bitwise equal {same}")
    assert same is True


@pytest.mark.criterion("9", "RK4 global error ratio 16 +- 20% under dt halving (classical preset)")
def test_rk4_order(preset, record_property):
    ratio = preset("classical-growth").metrics["rk4_richardson_ratio"]
    measured(record_property, f"ratio {ratio:.3f}")
    assert 16 * 0.8 <= ratio <= 16 * 1.2
