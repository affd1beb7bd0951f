"""Per-series descriptive statistics with a Jarque-Bera normality test.

Skewness and kurtosis use 1/n central moments; kurtosis is raw (a normal
series has kurtosis 3).  The standard deviation defaults to the n-1 sample
convention, switchable to 1/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InsufficientDataError, ValidationError
from .validation import check_vector

__all__ = ["DescriptiveStats", "describe", "jarque_bera", "STAT_ROWS"]

# Row labels, in the order the `describe` CLI emits them.
STAT_ROWS = (
    "Observations",
    "Mean",
    "Median",
    "Std. Dev.",
    "Min",
    "Max",
    "Skewness",
    "Kurtosis",
    "Jarque Bera",
    "Probability",
)


@dataclass
class DescriptiveStats:
    n: int
    mean: float
    median: float
    std_dev: float
    min: float
    max: float
    skewness: float
    kurtosis: float
    jarque_bera: float
    p_value: float

    def as_rows(self) -> list[tuple[str, float]]:
        """(label, value) pairs in canonical table order."""
        values = (
            self.n,
            self.mean,
            self.median,
            self.std_dev,
            self.min,
            self.max,
            self.skewness,
            self.kurtosis,
            self.jarque_bera,
            self.p_value,
        )
        return list(zip(STAT_ROWS, values))


def jarque_bera(n: int, skewness: float, kurtosis: float) -> tuple[float, float]:
    """Jarque-Bera statistic and p-value from precomputed sample moments.

    statistic = (n/6) * (S^2 + (K-3)^2 / 4), asymptotically chi-squared with
    two degrees of freedom under normality.  The chi2(2) survival function
    is exact in closed form, p = exp(-statistic/2), so no special functions
    are needed.
    """
    if n < 4:
        raise InsufficientDataError(f"jarque_bera needs n >= 4, got {n}")
    statistic = (n / 6.0) * (skewness**2 + (kurtosis - 3.0) ** 2 / 4.0)
    p_value = math.exp(-statistic / 2.0)
    return statistic, p_value


def describe(series, sample_std: bool = True) -> DescriptiveStats:
    """Full descriptive-statistics row for one series.

    ``sample_std`` selects the n-1 denominator for the standard deviation;
    skewness and kurtosis always use 1/n central moments.  Raises on fewer
    than 4 observations (kurtosis undefined) or a zero-variance series.
    """
    x = check_vector(series, "series")
    n = x.shape[0]
    if n < 4:
        raise InsufficientDataError(f"describe needs at least 4 observations, got {n}")

    mean = float(np.mean(x))
    centered = x - mean
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise ValidationError("series has zero variance; skewness/kurtosis undefined")
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    skewness = m3 / m2**1.5
    kurtosis = m4 / m2**2
    statistic, p_value = jarque_bera(n, skewness, kurtosis)

    ddof = 1 if sample_std else 0
    return DescriptiveStats(
        n=n,
        mean=mean,
        median=float(np.median(x)),
        std_dev=float(np.std(x, ddof=ddof)),
        min=float(np.min(x)),
        max=float(np.max(x)),
        skewness=skewness,
        kurtosis=kurtosis,
        jarque_bera=statistic,
        p_value=p_value,
    )
