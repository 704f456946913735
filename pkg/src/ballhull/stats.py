"""Moment estimates, Kolmogorov-Smirnov distances and weighted regression."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special, stats


@dataclass
class Estimate:
    mean: float
    variance: float
    mean_stderr: float
    variance_stderr: float
    n: int

    def to_json(self) -> dict:
        return asdict(self)


def estimate(values) -> Estimate:
    """Sample mean and variance with standard errors (variance via the fourth central moment)."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two replicates")
    m = float(np.mean(x))
    c = x - m
    var = float(np.sum(c * c) / (n - 1))
    m4 = float(np.mean(c**4))
    var_of_var = max((m4 - var * var * (n - 3) / (n - 1)) / n, 0.0)
    return Estimate(m, var, math.sqrt(var / n), math.sqrt(var_of_var), n)


@dataclass
class KSResult:
    statistic: float
    n: int
    reference: str
    pvalue: float = float("nan")

    def to_json(self) -> dict:
        return asdict(self)


def normal_cdf(x):
    return special.ndtr(x)


def gumbel_cdf(x):
    return np.exp(-np.exp(-np.asarray(x, dtype=float)))


def ks_test(values, cdf: Callable, reference: str) -> KSResult:
    """One-sample KS distance against a continuous CDF."""
    x = np.asarray(values, dtype=float)
    res = stats.kstest(x, cdf)
    return KSResult(float(res.statistic), int(x.size), reference, float(res.pvalue))


def ks_two_sample(a, b, reference: str) -> KSResult:
    res = stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return KSResult(float(res.statistic), int(len(a)), reference, float(res.pvalue))


def standardize(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    return (x - x.mean()) / x.std(ddof=1)


def ks_normal(values) -> KSResult:
    return ks_test(standardize(values), normal_cdf, "standard normal")


def ks_normal_lattice(values) -> KSResult:
    """KS distance for integer data against a continuity-corrected normal law.

    The empirical CDF is compared at the support points ``k`` with
    ``Phi((k + 1/2 - mean)/sd)``, the usual half-unit correction; the raw
    distance to a continuous law cannot fall below half the largest atom.
    """
    x = np.asarray(values, dtype=float)
    if not np.all(x == np.round(x)):
        raise ValueError("lattice KS expects integer data")
    m, s = x.mean(), x.std(ddof=1)
    ks = np.arange(x.min() - 1, x.max() + 1)
    emp = np.searchsorted(np.sort(x), ks, side="right") / x.size
    ref = normal_cdf((ks + 0.5 - m) / s)
    return KSResult(float(np.max(np.abs(emp - ref))), int(x.size), "standard normal, continuity corrected")


def ks_statistic(values, cdf: Callable) -> float:
    """KS distance computed directly from the order statistics."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    F = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def wls_slope(x, y, w: Optional[np.ndarray] = None) -> tuple:
    """Weighted least-squares slope of ``y`` on ``x`` and its standard error.

    With ``w`` the inverse variances of ``y`` the stderr is model based;
    without weights it uses the residual variance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    weighted = w is not None
    w = np.ones_like(x) if w is None else np.asarray(w, dtype=float)
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    slope = float((w * (x - xm) * (y - ym)).sum() / sxx)
    if weighted:
        se = math.sqrt(1.0 / sxx)
    else:
        resid = y - ym - slope * (x - xm)
        dof = max(x.size - 2, 1)
        se = math.sqrt(float((resid**2).sum()) / dof / sxx)
    return slope, se
