"""Univariate GARCH(1,1) filtering and Gaussian quasi-maximum likelihood.

The variance recursion is h[t] = omega + a*r[t-1]^2 + b*h[t-1], started at
the unconditional variance omega/(1-a-b) (or an explicit value).  Fitting
demeans the series, then maximizes the Gaussian quasi-likelihood with the
simplex optimizer over a smooth reparameterization: log for omega, logistic
for a and b, plus an additive penalty keeping a + b inside the stationary
region.  While the search explores a + b >= 1, the recursion falls back to
the sample variance for h[1].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    FitError,
    InsufficientDataError,
    StationarityError,
    ValidationError,
)
from .optimize import nelder_mead
from .validation import check_matrix, check_positive, check_vector

__all__ = ["GarchParams", "GarchFit", "garch_filter", "garch_loglik", "fit_garch", "standardize"]

_LOG_2PI = math.log(2.0 * math.pi)
# a + b is penalized above this; keeps the fitted process stationary.
_PERSISTENCE_CAP = 1.0 - 1e-6
_PENALTY_WEIGHT = 1e6


@dataclass(frozen=True)
class GarchParams:
    """GARCH(1,1) coefficients (omega in squared return units)."""

    omega: float
    a: float
    b: float

    def __post_init__(self):
        check_positive(self.omega, "omega")
        if self.a < 0.0 or self.b < 0.0:
            raise ValidationError(f"a and b must be non-negative, got a={self.a}, b={self.b}")
        if self.a + self.b >= 1.0:
            raise StationarityError(
                f"a + b = {self.a + self.b} >= 1 violates covariance stationarity"
            )

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.a - self.b)


@dataclass
class GarchFit:
    """Result of a univariate fit."""

    params: GarchParams
    variance_path: np.ndarray = field(repr=False)
    log_likelihood: float
    converged: bool
    iterations: int
    mean: float = 0.0  # sample mean removed before fitting


def _filter_raw(returns: np.ndarray, omega: float, a: float, b: float, h1: float) -> np.ndarray:
    h = np.empty(returns.shape[0])
    h[0] = h1
    prev = h1
    r2 = returns * returns
    for t in range(1, returns.shape[0]):
        prev = omega + a * r2[t - 1] + b * prev
        h[t] = prev
    return h


def garch_filter(returns, params: GarchParams, h1="unconditional") -> np.ndarray:
    """Conditional variance path for the given parameters.

    ``h1`` is the starting variance: the string ``"unconditional"`` (the
    default) uses omega/(1-a-b), otherwise pass a positive number.
    """
    r = check_vector(returns, "returns")
    if isinstance(h1, str):
        if h1 != "unconditional":
            raise ValidationError(f"unknown h1 mode {h1!r}")
        if params.a + params.b >= 1.0:
            raise StationarityError("unconditional start requires a + b < 1")
        start = params.unconditional_variance
    else:
        start = check_positive(h1, "h1")
    return _filter_raw(r, params.omega, params.a, params.b, start)


def _loglik_raw(returns: np.ndarray, h: np.ndarray) -> float:
    return -0.5 * float(np.sum(_LOG_2PI + np.log(h) + returns * returns / h))


def garch_loglik(returns, params: GarchParams, h1="unconditional") -> float:
    """Gaussian log-likelihood -0.5 * sum(log 2pi + log h_t + r_t^2 / h_t)."""
    r = check_vector(returns, "returns")
    h = garch_filter(r, params, h1=h1)
    return _loglik_raw(r, h)


def _sigmoid(z: float) -> float:
    # clipped away from the limits so a or b cannot round to exactly 0 or 1
    s = 1.0 / (1.0 + math.exp(-z)) if z > -500.0 else 0.0
    return min(max(s, 1e-12), 1.0 - 1e-6)


def _objective(resid: np.ndarray, sample_var: float):
    """Negative penalized quasi-likelihood over transformed parameters."""

    def fun(x: np.ndarray) -> float:
        omega = math.exp(min(x[0], 500.0))
        a = _sigmoid(x[1])
        b = _sigmoid(x[2])
        if a + b < 1.0:
            h1 = omega / (1.0 - a - b)
        else:
            h1 = sample_var
        h = _filter_raw(resid, omega, a, b, h1)
        violation = max(0.0, a + b - _PERSISTENCE_CAP)
        penalty = _PENALTY_WEIGHT * violation**2
        if violation > 1e-12:
            # unit offset keeps the accepted optimum strictly stationary
            penalty += 1.0
        return -_loglik_raw(resid, h) + penalty

    return fun


def _to_transformed(omega: float, a: float, b: float) -> np.ndarray:
    logit = lambda p: math.log(p / (1.0 - p))
    return np.array([math.log(omega), logit(a), logit(b)])


def _from_transformed(x: np.ndarray) -> tuple[float, float, float]:
    return math.exp(x[0]), _sigmoid(x[1]), _sigmoid(x[2])


def fit_garch(
    returns,
    demean: bool = True,
    tol_f: float = 1e-8,
    tol_x: float = 1e-8,
    max_iter: int = 5000,
) -> GarchFit:
    """Quasi-maximum-likelihood GARCH(1,1) fit of one return series.

    The series is demeaned first (the model assumes zero-mean returns).
    Needs at least 50 observations; below 250 a warning is emitted since
    volatility parameters are poorly identified in short samples.  On
    optimizer failure a :class:`FitError` is raised carrying the best fit
    reached so far in its ``best`` attribute.
    """
    x = check_vector(returns, "returns", min_length=2)
    if x.shape[0] < 50:
        raise InsufficientDataError(f"fit_garch needs T >= 50, got {x.shape[0]}")
    if x.shape[0] < 250:
        warnings.warn(f"fitting GARCH on only {x.shape[0]} observations", stacklevel=2)

    mean = float(np.mean(x)) if demean else 0.0
    resid = x - mean
    sample_var = float(np.var(resid))
    if sample_var == 0.0:
        raise ValidationError("returns have zero variance")

    objective = _objective(resid, sample_var)
    start = _to_transformed(0.05 * sample_var, 0.05, 0.90)
    result = nelder_mead(objective, start, tol_f=tol_f, tol_x=tol_x, max_iter=max_iter)

    omega, a, b = _from_transformed(result.point)
    if a + b >= 1.0:
        raise FitError(
            f"persistence a + b = {a + b} stuck at the stationarity boundary",
            best={"omega": omega, "a": a, "b": b, "value": result.value},
        )
    params = GarchParams(omega=omega, a=a, b=b)
    h = garch_filter(resid, params)
    fit = GarchFit(
        params=params,
        variance_path=h,
        log_likelihood=_loglik_raw(resid, h),
        converged=result.converged,
        iterations=result.iterations,
        mean=mean,
    )
    if not result.converged:
        raise FitError(f"optimizer did not converge ({result.termination})", best=fit)
    return fit


def standardize(returns, variance_paths) -> np.ndarray:
    """Elementwise r / sqrt(h); shapes must match, variances positive."""
    r = check_matrix(returns, "returns")
    h = check_matrix(variance_paths, "variance_paths")
    if r.shape != h.shape:
        raise ValidationError(f"shape mismatch: returns {r.shape} vs variances {h.shape}")
    if np.any(h <= 0.0):
        raise ValidationError("variance paths must be strictly positive")
    return r / np.sqrt(h)
