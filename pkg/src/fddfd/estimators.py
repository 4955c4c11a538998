"""Monte Carlo oracles for Gaussian smoothing and the per-iteration descent directions.

The smoothed objective is ``f_sigma(x) = E f(x + sigma xi)`` with
``xi ~ N(0, I)``; its gradient is ``E[f(x + sigma xi) xi] / sigma``.  The
descent directions replace the unknown optimal value by the batch minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .objectives import ObjectiveSpec
from .sampling import Sampler, SamplerConfig

__all__ = [
    "GradientEstimate",
    "SmoothedQuery",
    "smoothed_value",
    "smoothed_gradient",
    "gradient_terms_xi",
    "gradient_terms_theta",
    "estimate_g",
    "estimate_g_hat",
    "minimizer_spread",
]


@dataclass(frozen=True)
class GradientEstimate:
    direction: np.ndarray
    batch_min: float
    evals: int
    m_hat: Optional[float] = None


@dataclass(frozen=True)
class SmoothedQuery:
    point: np.ndarray
    sigma: float
    mc_samples: int

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(-1))
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.mc_samples < 1:
            raise ValueError(f"mc_samples must be >= 1, got {self.mc_samples}")


def _as_sampler(sampler) -> Sampler:
    return sampler.build() if isinstance(sampler, SamplerConfig) else sampler


def _check_dims(spec: ObjectiveSpec, q: SmoothedQuery, sampler: Sampler) -> None:
    if q.point.shape != (spec.dim,) or sampler.dim != spec.dim:
        raise ValueError(
            f"dimension mismatch: objective {spec.dim}, point {q.point.shape[0]}, sampler {sampler.dim}"
        )


def _mean_and_se(samples: np.ndarray):
    mean = samples.mean(axis=0)
    m = samples.shape[0]
    se = samples.std(axis=0, ddof=1) / np.sqrt(m) if m > 1 else np.full_like(mean, np.inf)
    return mean, se


def smoothed_value(spec: ObjectiveSpec, q: SmoothedQuery, sampler) -> tuple[float, float]:
    """Monte Carlo ``f_sigma(x)`` and its standard error."""
    sampler = _as_sampler(sampler)
    _check_dims(spec, q, sampler)
    xi = sampler.standard_normal(q.mc_samples)
    values = spec.evaluate(q.point + q.sigma * xi)
    mean, se = _mean_and_se(values)
    return float(mean), float(se)


def gradient_terms_xi(values: np.ndarray, xi: np.ndarray, sigma: float) -> np.ndarray:
    """Per-draw terms ``f(x + sigma xi) xi / sigma``."""
    return values[:, None] * xi / sigma


def gradient_terms_theta(values: np.ndarray, theta: np.ndarray, x: np.ndarray, sigma: float) -> np.ndarray:
    """Per-draw terms ``f(theta) (theta - x) / sigma**2``."""
    return values[:, None] * (theta - x) / sigma**2


def smoothed_gradient(spec: ObjectiveSpec, q: SmoothedQuery, sampler, *,
                      baseline: float = 0.0, form: str = "xi") -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo ``grad f_sigma(x)`` with per-component standard errors.

    ``baseline`` is subtracted from every value before weighting; any
    constant keeps the estimate unbiased, and the optimal value makes the
    variance small near the minimizer.
    """
    if form not in ("xi", "theta"):
        raise ValueError(f"form must be 'xi' or 'theta', got {form!r}")
    sampler = _as_sampler(sampler)
    _check_dims(spec, q, sampler)
    xi = sampler.standard_normal(q.mc_samples)
    theta = q.point + q.sigma * xi
    values = spec.evaluate(theta) - baseline
    if form == "xi":
        terms = gradient_terms_xi(values, xi, q.sigma)
    else:
        terms = gradient_terms_theta(values, theta, q.point, q.sigma)
    return _mean_and_se(terms)


def _shifted(batch, values, baseline):
    batch = np.asarray(batch, dtype=float)
    values = np.asarray(values, dtype=float).reshape(-1)
    if batch.ndim != 2 or batch.shape[0] != values.shape[0] or batch.shape[0] == 0:
        raise ValueError(f"batch {batch.shape} and values {values.shape} do not match")
    fmin = float(values.min())
    ref = fmin if baseline is None else baseline
    return batch, values - ref, fmin


def estimate_g(center, batch, values, sigma: float, *, baseline: Optional[float] = None) -> GradientEstimate:
    """``(1/(n sigma^2)) sum_i (f_i - min_j f_j) (theta_i - center)``.

    Passing ``baseline`` (e.g. the known optimal value) replaces the batch
    minimum as reference level.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    center = np.asarray(center, dtype=float)
    batch, w, fmin = _shifted(batch, values, baseline)
    n = batch.shape[0]
    direction = w @ (batch - center) / (n * sigma * sigma)
    return GradientEstimate(direction=direction, batch_min=fmin, evals=n)


def estimate_g_hat(center, batch, values) -> GradientEstimate:
    """Stabilized direction normalized by the RMS of the min-shifted values.

    A batch with all values equal gives the zero vector and ``m_hat = 0``.
    """
    center = np.asarray(center, dtype=float)
    batch, w, fmin = _shifted(batch, values, None)
    n = batch.shape[0]
    m_hat = float(np.sqrt(np.mean(w * w)))
    if m_hat == 0.0:
        direction = np.zeros(batch.shape[1])
    else:
        direction = w @ (batch - center) / (n * m_hat)
    return GradientEstimate(direction=direction, batch_min=fmin, evals=n, m_hat=m_hat)


def minimizer_spread(spec: ObjectiveSpec, sigma: float, mc_samples: int = 20_000,
                     sampler=None) -> float:
    """Monte Carlo ``sqrt(E (f(x* + sigma xi) - f*)^2)``, the scale the stabilized direction divides by."""
    if not spec.has_minimizer:
        raise ValueError(f"objective {spec.name!r} has no known minimizer")
    sampler = _as_sampler(sampler if sampler is not None else SamplerConfig(seed=0, dim=spec.dim))
    xi = sampler.standard_normal(mc_samples)
    w = spec.evaluate(spec.minimizer + sigma * xi) - spec.min_value
    return float(np.sqrt(np.mean(w * w)))
