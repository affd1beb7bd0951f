"""Derivative-free minimization via the Nelder-Mead simplex.

The likelihoods this package maximizes are low-dimensional (at most one
parameter per asset plus one), so a careful simplex search is both adequate
and free of hand-coded gradients.  Maximization is done by minimizing the
negated objective at the call site.  Constraint handling is the caller's
job: smooth reparameterizations where possible, additive penalties
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import FitError, ValidationError

__all__ = ["OptimResult", "nelder_mead", "restarted_fit"]

# Standard simplex coefficients: reflection, expansion, contraction, shrink.
_REFLECT = 1.0
_EXPAND = 2.0
_CONTRACT = 0.5
_SHRINK = 0.5


@dataclass
class OptimResult:
    """Outcome of a minimization run."""

    point: np.ndarray
    value: float
    iterations: int
    converged: bool
    termination: str  # "tolerance" | "max-iter" | "degenerate-simplex"


def _initial_simplex(start: np.ndarray) -> np.ndarray:
    n = start.shape[0]
    simplex = np.tile(start, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += max(0.05 * abs(start[i]), 0.01)
    return simplex


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    start,
    tol_f: float = 1e-8,
    tol_x: float = 1e-8,
    max_iter: int = 5000,
) -> OptimResult:
    """Minimize ``objective`` from ``start``.

    Converged means the simplex function-value spread fell below ``tol_f``
    while its diameter fell below ``tol_x``.  The search is deterministic:
    the initial simplex is a fixed perturbation of the start point and no
    randomness is used anywhere.

    Non-finite objective values encountered during the search are treated
    as +inf (the simplex backs away from them); a non-finite value at the
    start point itself is a :class:`ValidationError`.
    """
    x0 = np.asarray(start, dtype=float).ravel()
    if x0.size == 0:
        raise ValidationError("start point must be non-empty")

    def safe(x: np.ndarray) -> float:
        v = objective(x)
        v = float(v)
        return v if np.isfinite(v) else np.inf

    f0 = safe(x0)
    if not np.isfinite(f0):
        raise ValidationError("objective is not finite at the start point")

    simplex = _initial_simplex(x0)
    values = np.array([f0] + [safe(simplex[i]) for i in range(1, x0.size + 1)])

    iterations = 0
    termination = "max-iter"
    while iterations < max_iter:
        order = np.argsort(values, kind="stable")
        simplex = simplex[order]
        values = values[order]

        spread = values[-1] - values[0]
        diameter = np.max(np.abs(simplex[1:] - simplex[0]))
        if spread < tol_f and diameter < tol_x:
            termination = "tolerance"
            break
        if diameter == 0.0:
            termination = "degenerate-simplex"
            break

        iterations += 1
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]

        reflected = centroid + _REFLECT * (centroid - worst)
        f_reflected = safe(reflected)

        if f_reflected < values[0]:
            expanded = centroid + _EXPAND * (reflected - centroid)
            f_expanded = safe(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected < values[-1]:
                contracted = centroid + _CONTRACT * (reflected - centroid)
                f_contracted = safe(contracted)
                accept = f_contracted <= f_reflected
            else:
                contracted = centroid + _CONTRACT * (worst - centroid)
                f_contracted = safe(contracted)
                accept = f_contracted < values[-1]
            if accept:
                simplex[-1], values[-1] = contracted, f_contracted
            else:
                best = simplex[0]
                for i in range(1, simplex.shape[0]):
                    simplex[i] = best + _SHRINK * (simplex[i] - best)
                    values[i] = safe(simplex[i])

    order = np.argsort(values, kind="stable")
    best_idx = order[0]
    return OptimResult(
        point=simplex[best_idx].copy(),
        value=float(values[best_idx]),
        iterations=iterations,
        converged=termination == "tolerance",
        termination=termination,
    )


def restarted_fit(
    objective: Callable[[np.ndarray], float],
    starts: Sequence,
    tol_f: float = 1e-8,
    tol_x: float = 1e-8,
    max_iter: int = 5000,
) -> OptimResult:
    """Run :func:`nelder_mead` from every start and keep the best result.

    Starts where the objective is not finite are skipped; if every start
    fails, a :class:`FitError` aggregating the failures is raised.
    """
    if len(starts) == 0:
        raise ValidationError("restarted_fit needs at least one start point")

    best: OptimResult | None = None
    failures: list[str] = []
    for k, start in enumerate(starts):
        try:
            result = nelder_mead(objective, start, tol_f=tol_f, tol_x=tol_x, max_iter=max_iter)
        except ValidationError as exc:
            failures.append(f"start {k}: {exc}")
            continue
        if best is None or result.value < best.value:
            best = result
    if best is None:
        raise FitError("all starts failed: " + "; ".join(failures))
    return best
