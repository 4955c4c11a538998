"""FD-DFD and RAD iterations plus the stepsize/smoothing parameter advisor."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .estimators import GradientEstimate, estimate_g, estimate_g_hat, minimizer_spread
from .objectives import EvalCounter, ObjectiveSpec
from .sampling import Sampler, SamplerConfig, SmoothingSchedule, sigma_at

__all__ = [
    "Estimator",
    "MStrategy",
    "RunStatus",
    "FdDfdConfig",
    "RadConfig",
    "RunTrace",
    "run_fd_dfd",
    "run_rad",
    "fd_dfd_step",
    "rad_update",
    "advise_lambda",
    "StepsizeReport",
    "check_stepsize",
    "RateConditionReport",
    "check_rate_condition",
    "equivalent_raw_stepsize",
    "stabilized_stepsize",
    "DIVERGENCE_FACTOR",
]

DIVERGENCE_FACTOR = 1e6


class Estimator(str, enum.Enum):
    RAW = "raw"
    STABILIZED = "stabilized"


class MStrategy(str, enum.Enum):
    KNOWN_FSTAR = "known_fstar"
    BATCH = "batch"


class RunStatus(str, enum.Enum):
    MAX_ITERS = "max_iters"
    THRESHOLD_REACHED = "threshold_reached"
    DIVERGED = "diverged"


def _point(x) -> np.ndarray:
    return np.array(x, dtype=float).reshape(-1)


@dataclass(frozen=True)
class FdDfdConfig:
    alpha: float
    schedule: SmoothingSchedule
    n: int
    initial: np.ndarray
    max_iters: int = 100
    sampler: Optional[SamplerConfig] = None
    estimator: Estimator = Estimator.STABILIZED
    stop_dist_sq: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "initial", _point(self.initial))
        object.__setattr__(self, "estimator", Estimator(self.estimator))
        if not self.alpha >= 0 or not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be non-negative and finite, got {self.alpha}")
        _check_common(self)


@dataclass(frozen=True)
class RadConfig:
    schedule: SmoothingSchedule
    n: int
    initial: np.ndarray
    max_iters: int = 100
    sampler: Optional[SamplerConfig] = None
    m_strategy: MStrategy = MStrategy.BATCH
    stop_dist_sq: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "initial", _point(self.initial))
        object.__setattr__(self, "m_strategy", MStrategy(self.m_strategy))
        _check_common(self)


def _check_common(cfg) -> None:
    if cfg.sampler is None:
        object.__setattr__(cfg, "sampler", SamplerConfig(dim=cfg.initial.shape[0]))
    if cfg.n < 1:
        raise ValueError(f"n must be >= 1, got {cfg.n}")
    if cfg.max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {cfg.max_iters}")
    if cfg.sampler.dim != cfg.initial.shape[0]:
        raise ValueError(
            f"sampler dim {cfg.sampler.dim} does not match initial point dim {cfg.initial.shape[0]}"
        )
    if cfg.stop_dist_sq is not None and cfg.stop_dist_sq < 0:
        raise ValueError("stop_dist_sq must be non-negative")


@dataclass
class RunTrace:
    """Per-iteration record of a run.

    Row ``k`` describes the state *after* iteration ``k``: ``dist_sq[k-1]``
    is ``|x_{k+1} - x*|^2`` and ``cum_evals[k-1] = n k``.  ``iterates`` holds
    ``x_1, ..., x_{K+1}``.
    """

    k: np.ndarray
    sigma: np.ndarray
    dist_sq: np.ndarray
    f_value: np.ndarray
    cum_evals: np.ndarray
    best_f: np.ndarray
    status: RunStatus
    initial_dist_sq: float
    initial_f: float
    iterates: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.k)

    @property
    def final_point(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def final_dist_sq(self) -> float:
        return float(self.dist_sq[-1]) if len(self) else self.initial_dist_sq

    @property
    def total_evals(self) -> int:
        return int(self.cum_evals[-1]) if len(self) else 0


class _Recorder:
    def __init__(self, spec: ObjectiveSpec, x1: np.ndarray):
        self.spec = spec
        self.rows: list[tuple] = []
        self.iterates = [x1.copy()]
        self.initial_dist_sq = spec.dist_sq(x1)
        self.initial_f = spec(x1)
        self.best = math.inf
        d0 = self.initial_dist_sq
        self.blowup = DIVERGENCE_FACTOR * d0 if d0 > 0 else math.inf

    def record(self, k, sigma, x_next, evals, batch_min) -> float:
        self.best = min(self.best, batch_min)
        dist = self.spec.dist_sq(x_next)
        self.rows.append((k, sigma, dist, self.spec(x_next), evals, self.best))
        self.iterates.append(x_next.copy())
        return dist

    def finish(self, status: RunStatus) -> RunTrace:
        cols = list(zip(*self.rows)) if self.rows else [()] * 6
        return RunTrace(
            k=np.array(cols[0], dtype=int),
            sigma=np.array(cols[1], dtype=float),
            dist_sq=np.array(cols[2], dtype=float),
            f_value=np.array(cols[3], dtype=float),
            cum_evals=np.array(cols[4], dtype=int),
            best_f=np.array(cols[5], dtype=float),
            status=status,
            initial_dist_sq=self.initial_dist_sq,
            initial_f=self.initial_f,
            iterates=np.array(self.iterates),
        )


def fd_dfd_step(x, batch, values, sigma: float, alpha: float,
                estimator: Estimator = Estimator.STABILIZED) -> tuple[np.ndarray, GradientEstimate]:
    """One update ``x - alpha * direction`` from an evaluated batch."""
    if Estimator(estimator) is Estimator.RAW:
        est = estimate_g(x, batch, values, sigma)
    else:
        est = estimate_g_hat(x, batch, values)
    return x - alpha * est.direction, est


def rad_update(batch, values, m: float) -> np.ndarray:
    """Softmin-weighted average ``sum_i theta_i w_i / sum_i w_i``, ``w_i = exp(-(f_i - f*)/m)``.

    The reference level ``f*`` cancels after normalization, so the batch
    minimum is used to keep the exponentials in range.  ``m = 0`` returns
    the centroid.
    """
    batch = np.asarray(batch, dtype=float)
    values = np.asarray(values, dtype=float)
    if m == 0.0:
        return batch.mean(axis=0)
    if not m > 0:
        raise ValueError(f"m must be non-negative, got {m}")
    w = np.exp(-(values - values.min()) / m)
    return (w @ batch) / w.sum()


Callback = Callable[[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray], None]


def _loop(spec: ObjectiveSpec, cfg, sampler: Optional[Sampler], update, callback: Optional[Callback]) -> RunTrace:
    if cfg.initial.shape != (spec.dim,):
        raise ValueError(f"initial point has dimension {cfg.initial.shape[0]}, objective has {spec.dim}")
    if sampler is None:
        sampler = cfg.sampler.build()
    counter = EvalCounter()
    x = cfg.initial.copy()
    rec = _Recorder(spec, x)
    status = RunStatus.MAX_ITERS
    for k in range(1, cfg.max_iters + 1):
        sigma = sigma_at(cfg.schedule, k)
        batch = sampler.draw_batch(x, sigma, cfg.n)
        values = spec.evaluate(batch, counter)
        if not np.all(np.isfinite(values)):
            status = RunStatus.DIVERGED
            break
        x_next = update(x, batch, values, sigma)
        if callback is not None:
            callback(k, x, batch, values, x_next)
        if not np.all(np.isfinite(x_next)):
            status = RunStatus.DIVERGED
            break
        dist = rec.record(k, sigma, x_next, counter.count, float(values.min()))
        x = x_next
        if dist > rec.blowup:
            status = RunStatus.DIVERGED
            break
        if cfg.stop_dist_sq is not None and dist <= cfg.stop_dist_sq:
            status = RunStatus.THRESHOLD_REACHED
            break
    return rec.finish(status)


def run_fd_dfd(spec: ObjectiveSpec, cfg: FdDfdConfig, *, sampler: Optional[Sampler] = None,
               callback: Optional[Callback] = None) -> RunTrace:
    """Run FD-DFD from ``cfg.initial``.

    ``sampler`` overrides the stream built from ``cfg.sampler`` (anything
    with ``draw_batch(center, sigma, n)``).  ``callback(k, x_k, batch,
    values, x_next)`` is called after every update.
    """

    def update(x, batch, values, sigma):
        return fd_dfd_step(x, batch, values, sigma, cfg.alpha, cfg.estimator)[0]

    return _loop(spec, cfg, sampler, update, callback)


def run_rad(spec: ObjectiveSpec, cfg: RadConfig, *, sampler: Optional[Sampler] = None,
            callback: Optional[Callback] = None) -> RunTrace:
    """Run RAD: each iterate is the softmin-weighted mean of its batch."""
    if cfg.m_strategy is MStrategy.KNOWN_FSTAR and not spec.has_minimizer:
        raise ValueError("m_strategy 'known_fstar' needs an objective with known optimal value")

    def update(x, batch, values, sigma):
        if cfg.m_strategy is MStrategy.KNOWN_FSTAR:
            w = values - spec.min_value
        else:
            w = values - values.min()
        m = float(np.sqrt(np.mean(w * w)))
        return rad_update(batch, values, m)

    return _loop(spec, cfg, sampler, update, callback)


# ---------------------------------------------------------------------------
# parameter advisor


def advise_lambda(dist_sq_bound: float, dim: int) -> float:
    """Smoothing scale ``lambda^{-1} = 2M/(d+2)`` for a distance bound ``M``."""
    if not dist_sq_bound > 0:
        raise ValueError(f"M must be positive, got {dist_sq_bound}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return 2.0 * dist_sq_bound / (dim + 2)


@dataclass(frozen=True)
class StepsizeReport:
    rho_alpha: float
    satisfies_thm2: bool


def check_stepsize(alpha: float, l: float, L: float, rho: float) -> StepsizeReport:
    """Contraction factor ``2 [1 - alpha (L + l)/2]^2`` and whether it is below ``rho``."""
    if not 0 < l <= L:
        raise ValueError(f"need 0 < l <= L, got l={l}, L={L}")
    rho_alpha = 2.0 * (1.0 - alpha * (L + l) / 2.0) ** 2
    return StepsizeReport(rho_alpha=rho_alpha, satisfies_thm2=rho_alpha < rho)


@dataclass(frozen=True)
class RateConditionReport:
    rho_alpha: float
    k_c: float
    condition: float
    satisfied: bool


def check_rate_condition(alpha: float, l: float, L: float, rho: float, dim: int, n: int,
                   lambda_inv: float, initial_dist_sq: float, C: float) -> RateConditionReport:
    """Full stepsize condition ``(rho_a/rho) [1 + 2 alpha^2 K_C^2/(rho - rho_a)] < 1``.

    ``C`` is the Chebyshev multiplier (success probability ``1 - 1/C^2``);
    ``rho_a`` uses ``L + l``.
    """
    rho_alpha = check_stepsize(alpha, l, L, rho).rho_alpha
    M = initial_dist_sq / rho
    k_c = (L - l) * math.sqrt((dim + 2) * M / math.pi) + L * C / math.sqrt(n) * math.sqrt(
        (dim + 2) * lambda_inv + M
    )
    if rho_alpha >= rho:
        condition = math.inf
    else:
        condition = rho_alpha / rho * (1.0 + 2.0 * alpha**2 * k_c**2 / (rho - rho_alpha))
    return RateConditionReport(rho_alpha=rho_alpha, k_c=k_c, condition=condition, satisfied=condition < 1)


def equivalent_raw_stepsize(alpha: float, sigma: float, m: float) -> float:
    """Stepsize on the raw direction that the stabilized step ``alpha`` amounts to.

    The stabilized direction equals ``(sigma^2 / m) g`` with ``g`` the raw one.
    """
    return alpha * sigma * sigma / m


def stabilized_stepsize(spec: ObjectiveSpec, schedule: SmoothingSchedule, raw_alpha: float, *,
                        k: int = 1, mc_samples: int = 20_000, seed: int = 0) -> float:
    """Stabilized stepsize whose raw equivalent at iteration ``k`` is ``raw_alpha``.

    Uses ``m_k = sqrt(E (f(x* + sigma_k xi) - f*)^2)`` estimated by Monte
    Carlo, so ``raw_alpha`` can be vetted with :func:`check_stepsize`.
    """
    sigma = sigma_at(schedule, k)
    m = minimizer_spread(spec, sigma, mc_samples, SamplerConfig(seed=seed, dim=spec.dim))
    return raw_alpha * m / (sigma * sigma)
