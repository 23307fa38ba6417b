"""Descriptive statistics, confidence intervals, and one-way ANOVA.

Reported "mean ± x" values are normal-approximation confidence-interval
half-widths (z * standard error) at the 1 - alpha level, not bare standard
errors.  Kurtosis is in Pearson form (normal distribution = 3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    sd: float | None
    se: float | None
    ci_half: float | None
    skewness: float | None
    kurtosis: float | None
    min: float
    max: float


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float
    reject: bool


def z_quantile(alpha: float) -> float:
    """Two-sided normal critical value z such that P(|Z| <= z) = 1 - alpha."""
    return float(special.ndtri(1.0 - alpha / 2.0))


def summarize(samples: Sequence[float], alpha: float = 0.05) -> SummaryStats:
    """Summary statistics with a (1 - alpha) normal-approximation CI half-width."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 1:
        raise ValueError("summarize requires at least one sample")
    mean = float(x.mean())
    sd = se = ci_half = skewness = kurtosis = None
    if n >= 2:
        sd = float(x.std(ddof=1))
        se = sd / math.sqrt(n)
        ci_half = z_quantile(alpha) * se
    if n >= 3:
        # Biased central-moment forms: m3 / m2^1.5 and m4 / m2^2.
        centered = x - mean
        m2 = float(np.mean(centered**2))
        if m2 > 0:
            skewness = float(np.mean(centered**3)) / m2**1.5
            kurtosis = float(np.mean(centered**4)) / m2**2
    return SummaryStats(
        n=n,
        mean=mean,
        sd=sd,
        se=se,
        ci_half=ci_half,
        skewness=skewness,
        kurtosis=kurtosis,
        min=float(x.min()),
        max=float(x.max()),
    )


def binomial_ci_half(successes: int, n: int, alpha: float = 0.05) -> float:
    """Normal-approximation CI half-width for a binomial proportion."""
    if n < 1:
        raise ValueError("binomial_ci_half requires n >= 1")
    p = successes / n
    return z_quantile(alpha) * math.sqrt(p * (1.0 - p) / n)


def f_sf(x: float, df1: int, df2: int) -> float:
    """Survival function of the F(df1, df2) distribution.

    Evaluated through the regularized incomplete beta function:
    SF(x) = I_{df2 / (df2 + df1 x)}(df2/2, df1/2).
    """
    if df1 < 1 or df2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return float(special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * x)))


def f_critical(alpha: float, df1: int, df2: int) -> float:
    """Upper critical value x with SF_{F(df1, df2)}(x) = alpha, by bisection."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    if df1 < 1 or df2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    lo, hi = 0.0, 1.0
    while f_sf(hi, df1, df2) > alpha:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("failed to bracket the F critical value")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f_sf(mid, df1, df2) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * max(1.0, lo):
            break
    return 0.5 * (lo + hi)


def one_way_anova(groups: Sequence[Sequence[float]], alpha: float = 0.05) -> AnovaResult:
    """Standard one-way ANOVA across groups of observations.

    Degenerate case: if every observation is identical the statistic is 0
    and p = 1; zero within-group variance with distinct group means gives
    an infinite statistic and p = 0.
    """
    if len(groups) < 2:
        raise ValueError("one_way_anova requires at least two groups")
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if any(a.size < 1 for a in arrays):
        raise ValueError("every group needs at least one observation")
    k = len(arrays)
    n_total = sum(a.size for a in arrays)
    if n_total <= k:
        raise ValueError("total observations must exceed the number of groups")
    grand = sum(float(a.sum()) for a in arrays) / n_total
    ss_between = sum(a.size * (float(a.mean()) - grand) ** 2 for a in arrays)
    ss_within = sum(float(((a - a.mean()) ** 2).sum()) for a in arrays)
    df_between = k - 1
    df_within = n_total - k
    if ss_within <= 0:
        if ss_between <= 0:
            f_stat, p_value = 0.0, 1.0
        else:
            f_stat, p_value = math.inf, 0.0
    else:
        f_stat = (ss_between / df_between) / (ss_within / df_within)
        p_value = f_sf(f_stat, df_between, df_within)
    return AnovaResult(
        f_stat=f_stat,
        df_between=df_between,
        df_within=df_within,
        p_value=p_value,
        reject=p_value < alpha,
    )


def exceedance(samples: Sequence[float], threshold: float, direction: str = "le") -> float:
    """Fraction of samples <= threshold ('le') or >= threshold ('ge')."""
    x = np.asarray(samples, dtype=float)
    if x.size < 1:
        raise ValueError("exceedance requires at least one sample")
    if direction == "le":
        return float(np.count_nonzero(x <= threshold)) / x.size
    if direction == "ge":
        return float(np.count_nonzero(x >= threshold)) / x.size
    raise ValueError(f"direction must be 'le' or 'ge', got {direction!r}")


def histogram(
    samples: Sequence[float], n_bins: int, bounds: tuple[float, float]
) -> list[tuple[tuple[float, float], int]]:
    """Uniform-bin histogram over the half-open range [lo, hi).

    Returns ((bin_lo, bin_hi), count) per bin; counts sum to the number of
    in-range samples.
    """
    lo, hi = bounds
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if not hi > lo:
        raise ValueError(f"degenerate range ({lo}, {hi})")
    x = np.asarray(samples, dtype=float)
    width = (hi - lo) / n_bins
    counts = [0] * n_bins
    for value in x:
        if lo <= value < hi:
            idx = min(int((value - lo) / width), n_bins - 1)
            counts[idx] += 1
    edges = [lo + i * width for i in range(n_bins + 1)]
    return [((edges[i], edges[i + 1]), counts[i]) for i in range(n_bins)]
