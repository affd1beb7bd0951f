"""Estimator classes following the scikit-learn fit/transform protocol.

These wrap the functional API so the two estimation stages compose with
pipelines, ``clone`` and ``get_params``/``set_params``:

* :class:`GarchStandardizer` fits one GARCH(1,1) per column and transforms
  returns into standardized residuals.
* :class:`DynamicCorrelation` fits the correlation dynamics on standardized
  residuals.
* :class:`DccGarch` chains the two (the canonical two-step estimator) and
  exposes the fitted correlation path directly.
"""

from __future__ import annotations

import concurrent.futures
import os

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dcc import CorrelationPath, check_intercept_psd, fit_dcc, pairwise_series
from .garch import fit_garch, garch_filter, standardize
from .validation import check_matrix

__all__ = ["GarchStandardizer", "DynamicCorrelation", "DccGarch", "fit_thread_count"]

THREADS_ENV_VAR = "DCC_LAB_THREADS"


def fit_thread_count() -> int:
    """Worker cap for independent per-asset fits (env ``DCC_LAB_THREADS``)."""
    try:
        n = int(os.environ.get(THREADS_ENV_VAR, "1"))
    except ValueError:
        return 1
    return max(1, n)


def _fit_columns(X: np.ndarray, **kwargs):
    """Fit each column's volatility model, optionally on a thread pool."""
    columns = [X[:, i] for i in range(X.shape[1])]
    workers = fit_thread_count()
    if workers == 1 or len(columns) == 1:
        return [fit_garch(col, **kwargs) for col in columns]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda col: fit_garch(col, **kwargs), columns))


class GarchStandardizer(TransformerMixin, BaseEstimator):
    """Per-column GARCH(1,1) volatility filter.

    ``fit`` estimates one model per column; ``transform`` demeans with the
    fitted means, filters conditional variances with the fitted parameters
    and returns the standardized residuals.
    """

    def __init__(self, demean=True, tol_f=1e-8, tol_x=1e-8, max_iter=5000):
        self.demean = demean
        self.tol_f = tol_f
        self.tol_x = tol_x
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        self.fits_ = _fit_columns(
            X,
            demean=self.demean,
            tol_f=self.tol_f,
            tol_x=self.tol_x,
            max_iter=self.max_iter,
        )
        self.means_ = np.array([f.mean for f in self.fits_])
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "fits_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, fitted on {self.n_features_in_}")
        resid = X - self.means_
        h = np.column_stack(
            [garch_filter(resid[:, i], f.params) for i, f in enumerate(self.fits_)]
        )
        return standardize(resid, h)

    def variance_paths(self) -> np.ndarray:
        """Fitted conditional variances of the training panel, column-stacked."""
        check_is_fitted(self, "fits_")
        return np.column_stack([f.variance_path for f in self.fits_])


class DynamicCorrelation(BaseEstimator):
    """Correlation dynamics estimated on standardized residuals."""

    def __init__(self, mode="generalized", tol_f=1e-8, tol_x=1e-8, max_iter=5000):
        self.mode = mode
        self.tol_f = tol_f
        self.tol_x = tol_x
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        fit = fit_dcc(
            X,
            mode=self.mode,
            tol_f=self.tol_f,
            tol_x=self.tol_x,
            max_iter=self.max_iter,
        )
        self.fit_ = fit
        self.alphas_ = fit.params.alphas.copy()
        self.beta_ = fit.params.beta
        self.q_bar_ = fit.params.q_bar.copy()
        self.correlation_path_ = fit.correlation_path
        self.log_likelihood_ = fit.log_likelihood
        self.converged_ = fit.converged
        self.n_features_in_ = X.shape[1]
        return self

    def score(self, X, y=None) -> float:
        """Average per-observation correlation log-likelihood."""
        check_is_fitted(self, "fit_")
        from .dcc import dcc_loglik

        X = check_matrix(X, "X")
        return dcc_loglik(X, self.fit_.params) / X.shape[0]

    def intercept_min_eigenvalue(self) -> float:
        check_is_fitted(self, "fit_")
        return check_intercept_psd(self.fit_.params)[1]


class DccGarch(BaseEstimator):
    """Two-step estimator: per-asset volatility, then correlation dynamics."""

    def __init__(self, mode="generalized", demean=True, tol_f=1e-8, tol_x=1e-8, max_iter=5000):
        self.mode = mode
        self.demean = demean
        self.tol_f = tol_f
        self.tol_x = tol_x
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        self.standardizer_ = GarchStandardizer(
            demean=self.demean, tol_f=self.tol_f, tol_x=self.tol_x, max_iter=self.max_iter
        ).fit(X)
        eps = self.standardizer_.transform(X)
        self.residuals_ = eps
        self.correlation_ = DynamicCorrelation(
            mode=self.mode, tol_f=self.tol_f, tol_x=self.tol_x, max_iter=self.max_iter
        ).fit(eps)
        self.alphas_ = self.correlation_.alphas_
        self.beta_ = self.correlation_.beta_
        self.correlation_path_ = self.correlation_.correlation_path_
        self.converged_ = self.correlation_.converged_ and all(
            f.converged for f in self.standardizer_.fits_
        )
        self.n_features_in_ = X.shape[1]
        return self

    def pairwise(self, i, j) -> np.ndarray:
        check_is_fitted(self, "correlation_path_")
        return pairwise_series(self.correlation_path_, i, j)

    def path(self, dates=None, assets=None) -> CorrelationPath:
        """The fitted correlation path, optionally re-labelled."""
        check_is_fitted(self, "correlation_path_")
        p = self.correlation_path_
        return CorrelationPath(
            matrices=p.matrices,
            dates=dates if dates is not None else p.dates,
            assets=assets if assets is not None else p.assets,
        )
