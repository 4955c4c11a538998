"""Gaussian batch generation for the descent iterations.

Two point streams are supported: a seeded pseudo-random generator and a
scrambled Halton sequence pushed through the inverse normal CDF.  Either
way a batch is ``center + sigma * xi`` where ``xi`` are standard normal
rows, so the affine structure of the draws is exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SamplerKind",
    "SamplerConfig",
    "SmoothingSchedule",
    "Sampler",
    "HaltonSequence",
    "sigma_at",
    "draw_batch",
    "norm_ppf",
    "first_primes",
]


class SamplerKind(str, enum.Enum):
    PSEUDO = "pseudo"
    HALTON = "halton"

    @classmethod
    def parse(cls, value: "str | SamplerKind") -> "SamplerKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("halton", "halton-scrambled"):
            return cls.HALTON
        if key == "pseudo":
            return cls.PSEUDO
        raise ValueError(f"unknown sampler kind {value!r} (expected 'pseudo' or 'halton')")


@dataclass(frozen=True)
class SamplerConfig:
    """Which point stream to use; ``(kind, seed, dim)`` fixes it completely."""

    kind: SamplerKind = SamplerKind.PSEUDO
    seed: int = 0
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", SamplerKind.parse(self.kind))
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def build(self) -> "Sampler":
        return Sampler(self)


@dataclass(frozen=True)
class SmoothingSchedule:
    """Geometric smoothing schedule ``sigma_k**2 = rho**k * lambda_inv``."""

    lambda_inv: float
    rho: float

    def __post_init__(self):
        if not self.lambda_inv > 0 or not math.isfinite(self.lambda_inv):
            raise ValueError(f"lambda_inv must be positive and finite, got {self.lambda_inv}")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")

    def sigma(self, k: int) -> float:
        return sigma_at(self, k)

    def variance(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"schedule starts at k=1, got k={k}")
        return self.rho**k * self.lambda_inv


def sigma_at(schedule: SmoothingSchedule, k: int) -> float:
    """Smoothing radius ``rho**(k/2) * lambda**(-1/2)`` at iteration ``k >= 1``."""
    if k < 1:
        raise ValueError(f"schedule starts at k=1, got k={k}")
    return schedule.rho ** (k / 2) * math.sqrt(schedule.lambda_inv)


# Wichura, Algorithm AS 241 (PPND16): relative accuracy about 1e-16.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coef, x):
    out = np.full_like(x, coef[-1])
    for c in coef[-2::-1]:
        out = out * x + c
    return out


def norm_ppf(p):
    """Inverse of the standard normal CDF, vectorized.

    ``p`` must lie in [0, 1]; the endpoints map to -inf and +inf.
    """
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("probabilities must lie in [0, 1]")
    q = p - 0.5
    z = np.empty_like(p)

    central = np.abs(q) <= 0.425
    if np.any(central):
        qc = q[central]
        r = 0.180625 - qc * qc
        z[central] = qc * _poly(_A, r) / _poly(_B, r)

    tail = ~central
    if np.any(tail):
        qt = q[tail]
        r = np.where(qt < 0, p[tail], 1.0 - p[tail])
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.sqrt(-np.log(r))
            near = r <= 5.0
            zt = np.empty_like(r)
            rn = r[near] - 1.6
            zt[near] = _poly(_C, rn) / _poly(_D, rn)
            rf = r[~near] - 5.0
            zt[~near] = _poly(_E, rf) / _poly(_F, rf)
        zt[np.isinf(r)] = np.inf
        z[tail] = np.where(qt < 0, -zt, zt)
    return z if z.ndim else float(z)


def first_primes(count: int) -> list[int]:
    primes: list[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


class HaltonSequence:
    """Halton points in [0, 1)^dim with optional seeded digit scrambling.

    Coordinate ``i`` uses the ``i``-th prime as base.  With ``scramble``
    each digit position of each coordinate gets its own permutation of
    ``{0, ..., base-1}``, drawn once from ``seed``; digits are carried to
    full double precision so the permuted zero tail is accounted for.
    The stream position persists across calls to :meth:`random`.
    """

    def __init__(self, dim: int, seed: int = 0, scramble: bool = True, start: int = 0):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self.bases = first_primes(dim)
        self.scramble = scramble
        self.position = start
        rng = np.random.default_rng(seed)
        self._perms = []
        self._tails = []
        for base in self.bases:
            depth = math.ceil(53 / math.log2(base))
            if scramble:
                perms = np.array([rng.permutation(base) for _ in range(depth)], dtype=float)
            else:
                perms = np.tile(np.arange(base, dtype=float), (depth, 1))
            scale = float(base) ** -np.arange(1, depth + 1)
            # tails[j]: contribution of digits j.. when they are all zero
            contrib = perms[:, 0] * scale
            tails = np.concatenate([np.cumsum(contrib[::-1])[::-1], [0.0]])
            self._perms.append(perms)
            self._tails.append(tails)

    def random(self, n: int) -> np.ndarray:
        idx = np.arange(self.position, self.position + n, dtype=np.int64)
        self.position += n
        out = np.empty((n, self.dim))
        for col, base in enumerate(self.bases):
            perms, tails = self._perms[col], self._tails[col]
            rest = idx.copy()
            acc = np.zeros(n)
            scale = 1.0
            j = 0
            while j < perms.shape[0] and np.any(rest):
                rest, digit = np.divmod(rest, base)
                scale /= base
                acc += perms[j][digit] * scale
                j += 1
            out[:, col] = acc + tails[j]
        return out


_U_EPS = 2.0**-53


class Sampler:
    """Mutable point-stream state for one run.  Not shareable between runs."""

    def __init__(self, config: SamplerConfig):
        self.config = config
        if config.kind is SamplerKind.HALTON:
            self._halton = HaltonSequence(config.dim, seed=config.seed, scramble=True)
            self._rng = None
        else:
            self._halton = None
            self._rng = np.random.default_rng(config.seed)

    @property
    def dim(self) -> int:
        return self.config.dim

    def standard_normal(self, n: int) -> np.ndarray:
        """Next ``n`` standard-normal rows of shape ``(n, dim)``."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if self._rng is not None:
            return self._rng.standard_normal((n, self.dim))
        u = np.clip(self._halton.random(n), _U_EPS, 1.0 - _U_EPS)
        return norm_ppf(u)

    def draw_batch(self, center, sigma: float, n: int) -> np.ndarray:
        """``n`` points distributed as N(center, sigma**2 I)."""
        center = np.asarray(center, dtype=float)
        if center.shape != (self.dim,):
            raise ValueError(f"center must have shape ({self.dim},), got {center.shape}")
        if not sigma > 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        return center + sigma * self.standard_normal(n)


def draw_batch(sampler: Sampler, center, sigma: float, n: int) -> np.ndarray:
    return sampler.draw_batch(center, sigma, n)
