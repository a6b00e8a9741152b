"""Statistics toolbox: intervals, fits, hypothesis tests."""

import math

import mpmath
import numpy as np
import pytest
from scipy import stats as sps

from dynperc.randomness import Stream
from dynperc.stats import (
    chi_square_gof,
    chi_square_uniform,
    linear_fit,
    loglog_fit,
    mean_ci,
    two_proportion_test,
    wilson_interval,
)

# reference intervals computed with statsmodels proportion_confint(method="wilson")
WILSON_REF = {
    (0, 10): (0.0, 0.27753279986288926),
    (10, 10): (0.7224672001371106, 1.0),
    (5, 10): (0.23659309051256394, 0.7634069094874361),
    (500, 1000): (0.4690696003681042, 0.5309303996318958),
    (3, 7): (0.15821985525146964, 0.7495416354723428),
}


def test_wilson_against_reference():
    for (k, n), (lo, hi) in WILSON_REF.items():
        got_lo, got_hi = wilson_interval(k, n)
        assert got_lo == pytest.approx(lo, abs=1e-12)
        assert got_hi == pytest.approx(hi, abs=1e-12)


def test_wilson_validation():
    with pytest.raises(ValueError):
        wilson_interval(1, 0)
    with pytest.raises(ValueError):
        wilson_interval(-1, 10)
    with pytest.raises(ValueError):
        wilson_interval(11, 10)
    lo, hi = wilson_interval(0, 5)
    assert lo == 0.0 and 0.0 < hi < 1.0


def test_mean_ci_balanced_binary():
    samples = [0.0] * 5000 + [1.0] * 5000
    m, se, (lo, hi) = mean_ci(samples)
    assert m == 0.5
    assert hi - m <= 0.014
    assert lo == pytest.approx(2 * m - hi, abs=1e-15)


def test_mean_ci_exact_small_case():
    m, se, _ = mean_ci([1.0, 2.0, 3.0, 4.0])
    assert m == 2.5
    assert se == pytest.approx(math.sqrt(5.0 / 3.0) / 2.0, rel=1e-14)
    with pytest.raises(ValueError):
        mean_ci([1.0])


def test_linear_fit_matches_scipy():
    rng = Stream.from_labels(77)
    x = rng.uniforms(40) * 10
    y = 3.0 * x - 2.0 + (rng.uniforms(40) - 0.5)
    fit = linear_fit(x, y)
    ref = sps.linregress(x, y)
    assert fit.slope == pytest.approx(ref.slope, rel=1e-12)
    assert fit.intercept == pytest.approx(ref.intercept, rel=1e-12)
    assert fit.stderr_slope == pytest.approx(ref.stderr, rel=1e-10)
    assert fit.r2 == pytest.approx(ref.rvalue**2, rel=1e-10)
    assert fit.n_points == 40


def test_linear_fit_validation():
    with pytest.raises(ValueError):
        linear_fit([1.0], [2.0])
    with pytest.raises(ValueError):
        linear_fit([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        linear_fit([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])


def test_loglog_exact_square_law():
    x = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    fit = loglog_fit(x, x**2)
    assert fit.slope == pytest.approx(2.0, abs=1e-13)
    assert fit.r2 == 1.0
    assert fit.cutoff is None


def test_loglog_exact_power_law_with_prefactor():
    x = np.array([2.0, 3.0, 5.0, 9.0, 17.0, 33.0])
    y = 7.0 * x ** (-5.0 / 48.0)
    fit = loglog_fit(x, y)
    assert fit.slope == pytest.approx(-5.0 / 48.0, abs=1e-13)
    assert fit.intercept == pytest.approx(math.log(7.0), abs=1e-12)


def test_loglog_with_one_percent_noise():
    x = np.array([4.0, 8.0, 16.0, 32.0, 64.0, 128.0])
    noise = (Stream.from_labels(31).uniforms(6) - 0.5) * 0.02
    y = x ** (-0.5) * (1.0 + noise)
    fit = loglog_fit(x, y)
    assert abs(fit.slope - (-0.5)) < 0.02


def test_loglog_cutoff_and_positivity():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    fit = loglog_fit(x, x**2, x_min=2.0)
    assert fit.cutoff == 2.0
    assert fit.n_points == 3
    with pytest.raises(ValueError):
        loglog_fit([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        loglog_fit([-1.0, 2.0], [1.0, 1.0])
    # cutoff filtering below two points fails loudly
    with pytest.raises(ValueError):
        loglog_fit(x, x**2, x_min=8.0)


def test_two_proportion_example():
    z, p = two_proportion_test(500, 1000, 400, 1000)
    assert z == pytest.approx(4.4946657, abs=1e-4)
    assert p < 1e-4


def test_two_proportion_degenerate_and_guards():
    z, p = two_proportion_test(30, 30, 30, 30)
    assert (z, p) == (0.0, 1.0)
    z, p = two_proportion_test(15, 30, 15, 30)
    assert z == 0.0 and p == 1.0
    with pytest.raises(ValueError):
        two_proportion_test(5, 29, 10, 30)


def test_two_proportion_matches_scipy_normal():
    z, p = two_proportion_test(120, 400, 100, 420)
    assert p == pytest.approx(2 * sps.norm.sf(abs(z)), rel=1e-10)


def test_chi_square_example():
    stat, p = chi_square_gof([60, 40])
    assert stat == 4.0
    assert p == pytest.approx(0.0455, abs=1e-4)


def test_chi_square_equal_counts():
    stat, p = chi_square_gof([50, 50, 50])
    assert stat == 0.0
    assert p == 1.0


def test_chi_square_with_probs():
    stat, p = chi_square_gof([30, 70], probs=[0.25, 0.75])
    ref_stat, ref_p = sps.chisquare([30, 70], [25, 75])
    assert stat == pytest.approx(ref_stat, rel=1e-12)
    assert p == pytest.approx(ref_p, rel=1e-10)
    with pytest.raises(ValueError):
        chi_square_gof([10, 10], probs=[0.5, 0.4])
    with pytest.raises(ValueError):
        chi_square_gof([10, 10], probs=[1.0, 0.0])


def test_chi_square_uniform_guard():
    with pytest.raises(ValueError):
        chi_square_uniform([2, 3, 4])
    stat, p = chi_square_uniform([10, 10])
    assert stat == 0.0


def test_chi_square_pvalue_against_mpmath():
    mpmath.mp.dps = 30
    for cells in ([60, 40], [10, 20, 30, 40], [100] * 5 + [120] * 5):
        stat, p = chi_square_gof(cells)
        dof = len(cells) - 1
        ref = mpmath.gammainc(dof / 2.0, a=stat / 2.0, regularized=True)
        assert abs(p - float(ref)) < 1e-8
