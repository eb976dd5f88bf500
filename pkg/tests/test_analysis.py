import numpy as np
import pytest

from carlfel.analysis import compare_series, first_peak_index, fit_growth_rate, peak_indices, periodic_peaks, relative_linf, resample
from carlfel.errors import ValidationError


def test_first_peak_skips_small_ripples():
    t = np.linspace(0, 10, 1001)
    y = np.exp(-((t - 7) ** 2)) + 1e-3 * np.sin(20 * t)
    k = first_peak_index(y)
    assert t[k] == pytest.approx(7.0, abs=0.02)
    with pytest.raises(ValidationError):
        first_peak_index(np.arange(10.0))


def test_peak_helpers():
    y = np.array([0, 0.4, 0, 2, 0, 1.5, 0])
    assert list(peak_indices(y)) == [3, 5]
    assert periodic_peaks(np.array([3.0, 0, 0, 2, 0]), 1.0) == 2


def test_growth_fit_exact_exponential():
    t = np.linspace(0, 20, 401)
    y = 1e-8 * np.exp(np.sqrt(3) * t)
    assert fit_growth_rate(t, y) == pytest.approx(np.sqrt(3), rel=1e-10)


def test_compare_identical_and_resampled():
    t = np.linspace(0, 10, 201)
    y = np.exp(-((t - 5) ** 2))
    c = compare_series(t, {"intensity": y}, t, {"intensity": y}, threshold=1e-12)
    assert c.linf == 0 and c.passed and c.tau_window == pytest.approx(5.0)
    t2 = np.linspace(0, 10, 401)
    c2 = compare_series(t2, {"intensity": np.exp(-((t2 - 5) ** 2))}, t, {"intensity": y})
    assert c2.linf < 1e-3 and c2.passed is None


def test_disjoint_ranges_rejected():
    t = np.linspace(0, 1, 11)
    with pytest.raises(ValidationError):
        resample(t, t, np.linspace(2, 3, 5))


def test_relative_linf():
    assert relative_linf([1.0, 2.0], [1.0, 4.0]) == pytest.approx(0.5)
