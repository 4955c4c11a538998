"""Post-processing of run traces: rate fits, evaluation counts, variance checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .objectives import ObjectiveSpec
from .optimizers import FdDfdConfig, RunTrace, run_fd_dfd
from .sampling import SamplerConfig, SmoothingSchedule, sigma_at

__all__ = [
    "RateFit",
    "fit_rate",
    "evaluations_to_reach",
    "complexity_curve",
    "VarianceReport",
    "variance_bound",
    "verify_variance_bound",
]


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    n_excluded: int

    @property
    def implied_rho(self) -> float:
        return math.exp(self.slope)


def fit_rate(trace, k_range: Optional[tuple[int, int]] = None) -> RateFit:
    """Least-squares line through ``(k, ln dist_sq)``.

    ``trace`` is anything with ``k`` and ``dist_sq`` columns (a
    :class:`RunTrace` or a trace read back from CSV) or a ``(k, dist_sq)``
    pair.
    ``k_range`` is inclusive.  Zero or non-finite distances are dropped and
    counted in ``n_excluded``.
    """
    if hasattr(trace, "dist_sq"):
        k, dist = trace.k, trace.dist_sq
    else:
        k, dist = trace
    k = np.asarray(k, dtype=float)
    dist = np.asarray(dist, dtype=float)
    if k_range is not None:
        lo, hi = k_range
        sel = (k >= lo) & (k <= hi)
        k, dist = k[sel], dist[sel]
    usable = np.isfinite(dist) & (dist > 0)
    n_excluded = int(np.sum(~usable))
    k, y = k[usable], np.log(dist[usable])
    if k.size < 3:
        raise ValueError(f"insufficient data: {k.size} usable points, need at least 3")
    kc = k - k.mean()
    slope = float(kc @ (y - y.mean()) / (kc @ kc))
    intercept = float(y.mean() - slope * k.mean())
    resid = y - (intercept + slope * k)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0.0 or np.ptp(y) == 0.0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFit(slope=slope, intercept=intercept, r_squared=r2, n_points=int(k.size),
                   n_excluded=n_excluded)


def evaluations_to_reach(trace: RunTrace, eps_list: Sequence[float]) -> list[tuple[float, Optional[int]]]:
    """Cumulative evaluations at the first iterate with ``dist_sq <= eps``; ``None`` if never."""
    eps = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    out: list[tuple[float, Optional[int]]] = []
    for e in eps:
        if trace.initial_dist_sq <= e:
            out.append((e, 0))
            continue
        hit = np.flatnonzero(trace.dist_sq <= e)
        out.append((e, int(trace.cum_evals[hit[0]]) if hit.size else None))
    return out


def complexity_curve(spec: ObjectiveSpec, cfg: FdDfdConfig,
                     eps_list: Sequence[float]) -> list[tuple[float, Optional[int]]]:
    """Run once and report evaluations needed for each accuracy in ``eps_list``."""
    if not spec.has_minimizer:
        raise ValueError("complexity_curve needs an objective with known minimizer")
    return evaluations_to_reach(run_fd_dfd(spec, cfg), eps_list)


@dataclass(frozen=True)
class VarianceReport:
    empirical_var: np.ndarray
    bound: float
    passed: bool
    slack: float = 0.1


def variance_bound(L: float, n: int, dim: int, schedule: SmoothingSchedule, k: int, M: float) -> float:
    """``rho^k (L^2/n) ((d+2)/lambda + M)``."""
    return schedule.rho**k * L * L / n * ((dim + 2) * schedule.lambda_inv + M)


def verify_variance_bound(spec: ObjectiveSpec, x_k, k: int, schedule: SmoothingSchedule, n: int,
                          M: float, batches: int, sampler=None, slack: float = 0.1) -> VarianceReport:
    """Compare the per-component variance of the raw direction with its theoretical bound.

    Raises ``ValueError`` if ``|x_k - x*|^2 > rho^k M``.
    """
    if not spec.has_minimizer or spec.upper_modulus is None:
        raise ValueError("objective needs known minimizer and moduli")
    x_k = np.asarray(x_k, dtype=float).reshape(-1)
    if spec.dist_sq(x_k) > schedule.rho**k * M:
        raise ValueError(
            f"precondition violated: |x_k - x*|^2 = {spec.dist_sq(x_k):.6g} > rho^k M = {schedule.rho**k * M:.6g}"
        )
    if batches < 2:
        raise ValueError("need at least 2 batches to estimate a variance")
    if sampler is None:
        sampler = SamplerConfig(seed=0, dim=spec.dim)
    if isinstance(sampler, SamplerConfig):
        sampler = sampler.build()
    sigma = sigma_at(schedule, k)
    xi = sampler.standard_normal(batches * n).reshape(batches, n, spec.dim)
    theta = x_k + sigma * xi
    values = spec.evaluate(theta.reshape(-1, spec.dim)).reshape(batches, n)
    w = values - values.min(axis=1, keepdims=True)
    g = np.einsum("bn,bnd->bd", w, theta - x_k) / (n * sigma * sigma)
    var = g.var(axis=0, ddof=1)
    bound = variance_bound(spec.upper_modulus, n, spec.dim, schedule, k, M)
    return VarianceReport(empirical_var=var, bound=bound, passed=bool(np.all(var <= bound * (1 + slack))),
                          slack=slack)
