"""Two-step GARCH / dynamic conditional correlation toolkit.

Pipeline: load prices, compute percent log returns, align trading
calendars, filter per-asset volatility with GARCH(1,1), estimate the
correlation dynamics on standardized residuals, and extract pairwise
correlation series.  A simulator for the full data-generating process
provides the oracle for parameter-recovery checks, and a CLI wires the
stages into reproducible runs.
"""

from .dcc import (
    CorrelationPath,
    DccFit,
    DccParams,
    check_intercept_psd,
    correlation_targeting,
    dcc_loglik,
    dcc_recursion,
    fit_dcc,
    implied_news_matrix,
    pairwise_series,
)
from .descriptive import DescriptiveStats, describe, jarque_bera
from .estimators import DccGarch, DynamicCorrelation, GarchStandardizer
from .exceptions import (
    AlignmentError,
    DcclabError,
    DegeneracyError,
    FitError,
    FormatError,
    InsufficientDataError,
    StationarityError,
    ValidationError,
)
from .garch import GarchFit, GarchParams, fit_garch, garch_filter, garch_loglik, standardize
from .optimize import OptimResult, nelder_mead, restarted_fit
from .panels import (
    PricePanel,
    ReturnPanel,
    align_calendars,
    load_price_csv,
    load_return_csv,
    log_returns,
    panel_to_csv,
)
from .simulate import DgpSpec, SimulatedPaths, simulate_garch_dcc

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "CorrelationPath",
    "DccFit",
    "DccGarch",
    "DccParams",
    "DcclabError",
    "DegeneracyError",
    "DescriptiveStats",
    "DgpSpec",
    "DynamicCorrelation",
    "FitError",
    "FormatError",
    "GarchFit",
    "GarchParams",
    "GarchStandardizer",
    "InsufficientDataError",
    "OptimResult",
    "PricePanel",
    "ReturnPanel",
    "SimulatedPaths",
    "StationarityError",
    "ValidationError",
    "align_calendars",
    "check_intercept_psd",
    "correlation_targeting",
    "dcc_loglik",
    "dcc_recursion",
    "describe",
    "fit_dcc",
    "fit_garch",
    "garch_filter",
    "garch_loglik",
    "implied_news_matrix",
    "jarque_bera",
    "load_price_csv",
    "load_return_csv",
    "log_returns",
    "nelder_mead",
    "pairwise_series",
    "panel_to_csv",
    "restarted_fit",
    "simulate_garch_dcc",
    "standardize",
]
