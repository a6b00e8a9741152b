"""Small statistics toolbox for the verification suites.

Nothing here is novel: Wilson score intervals, ordinary least squares
on log-log scale, the pooled two-proportion z-test, and a chi-square
goodness-of-fit test.  Kept dependency-light (scipy only for the
regularized incomplete gamma).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc


def wilson_interval(k, n, z=1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= k <= n:
        raise ValueError("k outside [0, n]")
    phat = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (phat + z2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def mean_ci(samples, z=1.959963984540054):
    """Sample mean with standard error and a normal-approximation CI.

    Returns (mean, stderr, (lo, hi)).
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    m = float(x.mean())
    se = float(x.std(ddof=1)) / math.sqrt(x.size)
    return m, se, (m - z * se, m + z * se)


@dataclass
class FitResult:
    slope: float
    intercept: float
    stderr_slope: float
    r2: float
    n_points: int
    cutoff: float | None = None


def linear_fit(x, y):
    """OLS y = a x + b with the usual slope standard error and R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two arrays of equal length >= 2")
    n = x.size
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("x values are all equal")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    r2 = min(1.0, max(0.0, r2))
    se = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 else float("nan")
    return FitResult(slope, float(intercept), se, r2, n)


def loglog_fit(x, y, x_min=None):
    """OLS on (log x, log y), optionally dropping x below a cutoff.

    The cutoff used (if any) is recorded on the returned FitResult so
    downstream reports can state which points entered the fit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x_min is not None:
        keep = x >= x_min
        x, y = x[keep], y[keep]
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive values")
    fit = linear_fit(np.log(x), np.log(y))
    fit.cutoff = None if x_min is None else float(x_min)
    return fit


def two_proportion_test(k1, n1, k2, n2):
    """Pooled two-proportion z-test; returns (z, two-sided p-value).

    The normal approximation is only trusted for reasonably large
    samples, so both sizes must be at least 30.
    """
    if min(n1, n2) < 30:
        raise ValueError("two_proportion_test needs n1, n2 >= 30")
    p1, p2 = k1 / n1, k2 / n2
    pool = (k1 + k2) / (n1 + n2)
    var = pool * (1 - pool) * (1 / n1 + 1 / n2)
    if var == 0.0:
        return 0.0, 1.0
    z = (p1 - p2) / math.sqrt(var)
    return z, math.erfc(abs(z) / math.sqrt(2.0))


def chi_square_gof(counts, probs=None):
    """Chi-square goodness of fit; uniform cell probabilities unless
    probs is given.  Returns (statistic, p-value)."""
    c = np.asarray(counts, dtype=float)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("need at least two cells")
    n = c.sum()
    if n <= 0:
        raise ValueError("empty counts")
    if probs is None:
        expected = np.full(c.size, n / c.size)
    else:
        probs = np.asarray(probs, dtype=float)
        if probs.shape != c.shape or abs(probs.sum() - 1.0) > 1e-9 or np.any(probs <= 0):
            raise ValueError("probs must be positive and sum to 1")
        expected = n * probs
    stat = float(np.sum((c - expected) ** 2 / expected))
    dof = c.size - 1
    return stat, float(gammaincc(dof / 2.0, stat / 2.0))


def chi_square_uniform(counts):
    """Chi-square test against the uniform distribution over cells.

    Requires every expected count to be at least 5; below that the
    chi-square approximation is unreliable and the call errors out.
    """
    c = np.asarray(counts, dtype=float)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("need at least two cells")
    n = c.sum()
    if n / c.size < 5.0:
        raise ValueError("expected count below 5; collect more samples")
    return chi_square_gof(c)
