"""Generalized dynamic conditional correlation: recursion, likelihood, fit.

The correlation driver is

    Q[t] = Qbar*(1 - aa' - beta) + (aa') . e[t-1]e[t-1]' + beta*Q[t-1]

elementwise, where ``a`` is the vector of per-asset news loadings (entry
(i, j) of the news matrix is ``a_i * a_j``), ``beta`` is the common decay,
and ``Qbar`` is the correlation target estimated from standardized
residuals.  Q[1] = Qbar.  Each Q[t] is rescaled by its diagonal to the
correlation matrix R[t], whose unit diagonal is set exactly.

The basic one-parameter model is the special case with all news loadings
tied to a single alpha; ``fit_dcc(mode="scalar")`` estimates that model
through a dedicated two-parameter recursion.

Estimation maximizes the correlation-stage Gaussian quasi-likelihood

    -0.5 * sum_t [ log det R_t + e_t' R_t^-1 e_t - e_t' e_t ]

over an unconstrained reparameterization (beta logistic, alpha_i =
logistic(x_i) * sqrt(1 - beta), which keeps max_i alpha_i^2 + beta < 1)
plus a quadratic penalty whenever the intercept matrix loses positive
semidefiniteness.  R_t is never regularized: a failed factorization
surfaces as :class:`DegeneracyError`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegeneracyError, FitError, StationarityError, ValidationError
from .optimize import nelder_mead
from .validation import check_matrix, check_square

__all__ = [
    "DccParams",
    "CorrelationPath",
    "DccFit",
    "correlation_targeting",
    "dcc_recursion",
    "implied_news_matrix",
    "check_intercept_psd",
    "dcc_loglik",
    "fit_dcc",
    "pairwise_series",
]

_PENALTY_WEIGHT = 1e6
_DEGENERATE_VALUE = 1e10
_PSD_TOL = -1e-10
_BOUNDARY_MARGIN = 1e-4


@dataclass
class DccParams:
    """News loadings (diagonal of A), common decay, and correlation target.

    Construction only normalizes shapes; :meth:`validate` enforces the
    model's admissibility conditions and is called by every operation whose
    contract requires valid parameters.  Keeping validation separate lets
    diagnostics such as :func:`check_intercept_psd` probe boundary or
    infeasible parameter values.
    """

    alphas: np.ndarray
    beta: float
    q_bar: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.alphas = np.atleast_1d(np.asarray(self.alphas, dtype=float))
        self.beta = float(self.beta)
        self.q_bar = check_square(self.q_bar, "q_bar")
        if self.alphas.ndim != 1 or self.alphas.shape[0] != self.q_bar.shape[0]:
            raise ValidationError(
                f"alphas has shape {self.alphas.shape}, q_bar is {self.q_bar.shape}"
            )

    @property
    def n_assets(self) -> int:
        return self.alphas.shape[0]

    def intercept(self) -> np.ndarray:
        """The constant term Qbar*(1 - a_i*a_j - beta), elementwise."""
        return self.q_bar * (1.0 - np.outer(self.alphas, self.alphas) - self.beta)

    def validate(self) -> "DccParams":
        if np.any(self.alphas < 0.0):
            raise ValidationError(f"news loadings must be non-negative, got {self.alphas}")
        if self.beta < 0.0:
            raise ValidationError(f"decay must be non-negative, got {self.beta}")
        persistence = float(np.max(self.alphas) ** 2 + self.beta)
        if persistence >= 1.0:
            raise StationarityError(
                f"max(alpha)^2 + beta = {persistence} >= 1 violates stationarity"
            )
        if not np.allclose(self.q_bar, self.q_bar.T, atol=1e-8):
            raise ValidationError("q_bar must be symmetric")
        if not np.allclose(np.diag(self.q_bar), 1.0, atol=1e-8):
            raise ValidationError("q_bar must have unit diagonal")
        try:
            np.linalg.cholesky(self.q_bar)
        except np.linalg.LinAlgError:
            raise ValidationError("q_bar must be positive definite") from None
        min_eig = float(np.linalg.eigvalsh(self.intercept())[0])
        if min_eig < _PSD_TOL:
            raise ValidationError(
                f"intercept matrix is not positive semidefinite (min eigenvalue {min_eig})"
            )
        return self


@dataclass
class CorrelationPath:
    """Time series of correlation matrices with pairwise extraction."""

    matrices: np.ndarray = field(repr=False)  # (T, N, N)
    dates: list | None = None
    assets: list[str] | None = None

    def __post_init__(self):
        self.matrices = np.asarray(self.matrices, dtype=float)
        if self.matrices.ndim != 3 or self.matrices.shape[1] != self.matrices.shape[2]:
            raise ValidationError(f"matrices must be (T, N, N), got {self.matrices.shape}")
        if self.dates is not None and len(self.dates) != self.matrices.shape[0]:
            raise ValidationError("dates length does not match path length")
        if self.assets is not None and len(self.assets) != self.matrices.shape[1]:
            raise ValidationError("assets length does not match matrix dimension")

    def __len__(self) -> int:
        return self.matrices.shape[0]

    @property
    def n_assets(self) -> int:
        return self.matrices.shape[1]

    def resolve(self, asset) -> int:
        if isinstance(asset, str):
            if self.assets is None:
                raise ValidationError("path carries no asset names; use integer indices")
            try:
                return self.assets.index(asset)
            except ValueError:
                raise ValidationError(f"unknown asset {asset!r}") from None
        idx = int(asset)
        if not 0 <= idx < self.n_assets:
            raise ValidationError(f"asset index {idx} out of range")
        return idx

    def pair(self, i, j) -> np.ndarray:
        return pairwise_series(self, i, j)


@dataclass
class DccFit:
    """Fitted correlation dynamics."""

    params: DccParams
    correlation_path: CorrelationPath
    log_likelihood: float
    mode: str  # "scalar" | "generalized"
    converged: bool


def correlation_targeting(eps) -> np.ndarray:
    """Correlation target: sample second moment rescaled to unit diagonal.

    A rank-deficient moment matrix whose diagonal cannot be rescaled (a
    zero-variance column) is a :class:`DegeneracyError`.  Perfectly
    collinear columns yield a singular matrix with unit off-diagonals; that
    is returned as-is and rejected later by parameter validation.
    """
    e = check_matrix(eps, "eps", min_rows=2)
    t_obs, n_assets = e.shape
    if t_obs <= n_assets:
        raise ValidationError(f"targeting needs T > N, got T={t_obs}, N={n_assets}")
    second_moment = e.T @ e / t_obs
    second_moment = (second_moment + second_moment.T) / 2.0
    diag = np.diag(second_moment).copy()
    if np.any(diag <= 0.0):
        raise DegeneracyError("second-moment matrix has a non-positive diagonal entry")
    scale = np.sqrt(diag)
    q_bar = second_moment / np.outer(scale, scale)
    np.fill_diagonal(q_bar, 1.0)
    return q_bar


def _q_path(eps: np.ndarray, alphas: np.ndarray, beta: float, q_bar: np.ndarray) -> np.ndarray:
    """Driver recursion with per-asset news loadings; Q[0] = q_bar."""
    t_obs = eps.shape[0]
    news = np.outer(alphas, alphas)
    intercept = q_bar * (1.0 - news - beta)
    outer = eps[:, :, None] * eps[:, None, :]
    q = np.empty((t_obs,) + q_bar.shape)
    prev = q_bar
    q[0] = prev
    for t in range(1, t_obs):
        prev = intercept + news * outer[t - 1] + beta * prev
        q[t] = prev
    return q


def _q_path_scalar(eps: np.ndarray, alpha: float, beta: float, q_bar: np.ndarray) -> np.ndarray:
    """Driver recursion of the one-parameter model (news coefficient alpha^2)."""
    t_obs = eps.shape[0]
    a = alpha * alpha
    intercept = (1.0 - a - beta) * q_bar
    outer = eps[:, :, None] * eps[:, None, :]
    q = np.empty((t_obs,) + q_bar.shape)
    prev = q_bar
    q[0] = prev
    for t in range(1, t_obs):
        prev = intercept + a * outer[t - 1] + beta * prev
        q[t] = prev
    return q


def _rescale_to_correlation(q: np.ndarray) -> np.ndarray:
    """R[t] = diag(Q[t])^-1/2 Q[t] diag(Q[t])^-1/2 with the diagonal set to 1 exactly."""
    diag = np.diagonal(q, axis1=-2, axis2=-1)
    if np.any(diag <= 0.0) or not np.all(np.isfinite(diag)):
        raise DegeneracyError("driver matrix lost a positive diagonal; parameters invalid")
    scale = np.sqrt(diag)
    r = q / (scale[..., :, None] * scale[..., None, :])
    n = r.shape[-1]
    r[..., np.arange(n), np.arange(n)] = 1.0
    return r


def _correlation_loglik(eps: np.ndarray, q: np.ndarray) -> float:
    """Correlation-stage quasi-likelihood given the driver path."""
    r = _rescale_to_correlation(q)
    try:
        chol = np.linalg.cholesky(r)
    except np.linalg.LinAlgError:
        raise DegeneracyError("correlation matrix is not positive definite") from None
    logdet = 2.0 * np.sum(np.log(np.diagonal(chol, axis1=1, axis2=2)), axis=1)
    z = np.linalg.solve(chol, eps[:, :, None])[:, :, 0]
    quad = np.einsum("ti,ti->t", z, z)
    esq = np.einsum("ti,ti->t", eps, eps)
    return -0.5 * float(np.sum(logdet + quad - esq))


def dcc_recursion(eps, params: DccParams, dates=None, assets=None) -> CorrelationPath:
    """Run the driver recursion and rescale to a correlation path."""
    e = check_matrix(eps, "eps")
    params.validate()
    if e.shape[1] != params.n_assets:
        raise ValidationError(f"eps has {e.shape[1]} columns, params expect {params.n_assets}")
    q = _q_path(e, params.alphas, params.beta, params.q_bar)
    return CorrelationPath(matrices=_rescale_to_correlation(q), dates=dates, assets=assets)


def implied_news_matrix(params: DccParams) -> np.ndarray:
    """Pairwise news-impact coefficients a_i * a_j."""
    return np.outer(params.alphas, params.alphas)


def check_intercept_psd(params: DccParams) -> tuple[bool, float]:
    """Whether the intercept matrix is PSD (to -1e-10), and its min eigenvalue.

    Diagnostic only: does not require admissible ``alphas``/``beta``, so it
    can probe boundary values.
    """
    check_square(params.q_bar, "q_bar")
    min_eig = float(np.linalg.eigvalsh(params.intercept())[0])
    return min_eig >= _PSD_TOL, min_eig


def dcc_loglik(eps, params: DccParams) -> float:
    """Gaussian correlation-stage log-likelihood at ``params``."""
    e = check_matrix(eps, "eps", min_rows=2)
    params.validate()
    if e.shape[1] != params.n_assets:
        raise ValidationError(f"eps has {e.shape[1]} columns, params expect {params.n_assets}")
    return _correlation_loglik(e, _q_path(e, params.alphas, params.beta, params.q_bar))


def _sigmoid(z: float) -> float:
    # clipped so persistence cannot round up to 1.0 when the search drifts
    # far along a flat likelihood ridge
    s = 1.0 / (1.0 + math.exp(-z)) if z > -500.0 else 0.0
    return min(max(s, 1e-12), 1.0 - 1e-6)


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def _objective(eps: np.ndarray, q_bar: np.ndarray, mode: str):
    """Negative penalized quasi-likelihood over transformed (beta, alphas)."""
    n_assets = eps.shape[1]

    def unpack(x: np.ndarray) -> tuple[np.ndarray, float]:
        beta = _sigmoid(x[0])
        room = math.sqrt(1.0 - beta)
        if mode == "scalar":
            alphas = np.full(n_assets, _sigmoid(x[1]) * room)
        else:
            alphas = np.array([_sigmoid(v) for v in x[1:]]) * room
        return alphas, beta

    def fun(x: np.ndarray) -> float:
        alphas, beta = unpack(x)
        intercept = q_bar * (1.0 - np.outer(alphas, alphas) - beta)
        min_eig = float(np.linalg.eigvalsh(intercept)[0])
        violation = max(0.0, -min_eig)
        penalty = _PENALTY_WEIGHT * violation**2
        if violation > 1e-12:
            # unit offset: a violated point always loses to its feasible
            # neighbourhood, so the accepted optimum keeps the intercept PSD
            penalty += 1.0
        try:
            if mode == "scalar":
                q = _q_path_scalar(eps, float(alphas[0]), beta, q_bar)
            else:
                q = _q_path(eps, alphas, beta, q_bar)
            ll = _correlation_loglik(eps, q)
        except DegeneracyError:
            return _DEGENERATE_VALUE
        return -ll + penalty

    return fun, unpack


def _start_vector(alpha0: float, beta0: float, n_params: int) -> np.ndarray:
    x = np.empty(n_params)
    x[0] = _logit(beta0)
    x[1:] = _logit(alpha0 / math.sqrt(1.0 - beta0))
    return x


def fit_dcc(
    eps,
    mode: str = "generalized",
    dates=None,
    assets=None,
    tol_f: float = 1e-8,
    tol_x: float = 1e-8,
    max_iter: int = 5000,
) -> DccFit:
    """Estimate the correlation dynamics on standardized residuals.

    The target matrix is fixed at the sample correlation of ``eps`` and the
    remaining parameters (one news loading per asset plus the decay in
    generalized mode; one tied loading plus the decay in scalar mode) are
    estimated by quasi-maximum likelihood.  An optimum within 1e-4 of the
    stationarity boundary is returned with ``converged=False`` and a
    warning.  If the search never leaves the degenerate region it is
    retried once from a half-sized news start before failing.
    """
    if mode not in ("scalar", "generalized"):
        raise ValidationError(f"unknown mode {mode!r}")
    e = check_matrix(eps, "eps", min_rows=2)
    t_obs, n_assets = e.shape
    if t_obs <= 10 * n_assets:
        raise ValidationError(f"fit_dcc needs T > 10*N, got T={t_obs}, N={n_assets}")

    q_bar = correlation_targeting(e)
    objective, unpack = _objective(e, q_bar, mode)
    n_params = 2 if mode == "scalar" else 1 + n_assets

    result = None
    for alpha0 in (0.15, 0.075):
        candidate = nelder_mead(
            objective, _start_vector(alpha0, 0.90, n_params),
            tol_f=tol_f, tol_x=tol_x, max_iter=max_iter,
        )
        if candidate.value < _DEGENERATE_VALUE:
            result = candidate
            break
    if result is None:
        raise FitError("correlation likelihood is degenerate at every start")

    alphas, beta = unpack(result.point)
    converged = result.converged
    persistence = float(np.max(alphas) ** 2 + beta)
    if persistence > 1.0 - _BOUNDARY_MARGIN:
        warnings.warn(
            f"optimum within {1.0 - persistence:.2e} of the stationarity boundary",
            stacklevel=2,
        )
        converged = False

    try:
        params = DccParams(alphas=alphas, beta=beta, q_bar=q_bar).validate()
    except (ValidationError, StationarityError) as exc:
        raise FitError(
            f"optimum violates parameter constraints: {exc}",
            best={"alphas": alphas, "beta": beta, "value": result.value},
        ) from exc

    fit = DccFit(
        params=params,
        correlation_path=dcc_recursion(e, params, dates=dates, assets=assets),
        log_likelihood=dcc_loglik(e, params),
        mode=mode,
        converged=converged,
    )
    if not result.converged:
        raise FitError(f"optimizer did not converge ({result.termination})", best=fit)
    return fit


def pairwise_series(path: CorrelationPath, i, j) -> np.ndarray:
    """The correlation series of one asset pair (symmetric in i, j)."""
    ii = path.resolve(i)
    jj = path.resolve(j)
    if ii == jj:
        raise ValidationError("pairwise series of an asset with itself is identically 1")
    return path.matrices[:, ii, jj].copy()
