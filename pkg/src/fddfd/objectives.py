"""Test objectives sandwiched between two quadratics around a unique minimizer.

Every objective here satisfies, for all ``x``,

    f* + (l/2)|x - x*|^2  <=  f(x)  <=  f* + (L/2)|x - x*|^2

which permits many local minima but only one global one.  Functions are
vectorized over rows: ``fn`` maps an ``(n, d)`` array to ``(n,)`` values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ObjectiveSpec",
    "EvalCounter",
    "BoundReport",
    "make_revised_rastrigin",
    "make_fig1_left",
    "make_fig1_right",
    "make_quadratic",
    "make_objective",
    "check_assumption_bounds",
    "OBJECTIVES",
    "get_objective",
]


@dataclass
class EvalCounter:
    """Per-run tally of objective evaluations."""

    count: int = 0

    def add(self, n: int) -> None:
        self.count += n


@dataclass(frozen=True)
class ObjectiveSpec:
    """An objective plus its quadratic-sandwich metadata.

    ``minimizer``, ``min_value`` and the moduli may be ``None`` for user
    objectives whose global minimizer is unknown; the optimizers still run
    but distance-based diagnostics are skipped.
    """

    name: str
    dim: int
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    minimizer: Optional[np.ndarray] = None
    min_value: Optional[float] = None
    lower_modulus: Optional[float] = None
    upper_modulus: Optional[float] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.minimizer is not None:
            xs = np.array(self.minimizer, dtype=float).reshape(-1)
            if xs.shape != (self.dim,):
                raise ValueError(f"minimizer must have {self.dim} entries, got {xs.shape[0]}")
            xs.setflags(write=False)
            object.__setattr__(self, "minimizer", xs)
        l, L = self.lower_modulus, self.upper_modulus
        if (l is None) != (L is None):
            raise ValueError("give both moduli or neither")
        if l is not None and not (0 < l <= L < np.inf):
            raise ValueError(f"moduli must satisfy 0 < l <= L < inf, got l={l}, L={L}")

    @property
    def has_minimizer(self) -> bool:
        return self.minimizer is not None and self.min_value is not None

    def evaluate(self, points, counter: Optional[EvalCounter] = None) -> np.ndarray:
        """Values at the rows of ``points`` (shape ``(n, dim)``)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(f"expected points of shape (n, {self.dim}), got {pts.shape}")
        if counter is not None:
            counter.add(pts.shape[0])
        return np.asarray(self.fn(pts), dtype=float).reshape(pts.shape[0])

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        return float(self.evaluate(x[None, :])[0])

    def dist_sq(self, x) -> float:
        if self.minimizer is None:
            return float("nan")
        diff = np.asarray(x, dtype=float) - self.minimizer
        return float(diff @ diff)


def _rastrigin_rev(x: np.ndarray) -> np.ndarray:
    return np.sum(x * x, axis=1) - 0.5 * np.sum(np.cos(5 * np.pi * x), axis=1) + 0.5 * x.shape[1]


def make_revised_rastrigin(dim: int) -> ObjectiveSpec:
    """``|x|^2 - (1/2) sum cos(5 pi x_i) + d/2``: 5**d local minima in [-1, 1]^d.

    Per coordinate ``t^2 <= t^2 + sin^2(5 pi t / 2) <= 65 t^2``, hence l=2, L=130.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return ObjectiveSpec(
        name="rastrigin-rev",
        dim=dim,
        fn=_rastrigin_rev,
        minimizer=np.zeros(dim),
        min_value=0.0,
        lower_modulus=2.0,
        upper_modulus=130.0,
    )


def _fig1_left(x: np.ndarray) -> np.ndarray:
    t = x[:, 0]
    return t * t + t * t * np.cos(5 * np.pi * t) / 2


def make_fig1_left() -> ObjectiveSpec:
    """One-dimensional ``x^2 + x^2 cos(5 pi x)/2`` bounded by ``x^2/2`` and ``3x^2/2``."""
    return ObjectiveSpec(
        name="fig1-left",
        dim=1,
        fn=_fig1_left,
        minimizer=np.zeros(1),
        min_value=0.0,
        lower_modulus=1.0,
        upper_modulus=3.0,
    )


def make_fig1_right() -> ObjectiveSpec:
    spec = make_revised_rastrigin(1)
    return ObjectiveSpec(
        name="fig1-right",
        dim=1,
        fn=spec.fn,
        minimizer=spec.minimizer,
        min_value=spec.min_value,
        lower_modulus=spec.lower_modulus,
        upper_modulus=spec.upper_modulus,
    )


def make_quadratic(dim: int, curvature: float = 2.0, center=None) -> ObjectiveSpec:
    """``(curvature/2) |x - center|^2``, the case ``l = L``."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if not curvature > 0:
        raise ValueError(f"curvature must be positive, got {curvature}")
    c = np.zeros(dim) if center is None else np.broadcast_to(np.asarray(center, float), (dim,)).copy()
    half = 0.5 * curvature

    def fn(x: np.ndarray) -> np.ndarray:
        diff = x - c
        return half * np.sum(diff * diff, axis=1)

    return ObjectiveSpec(
        name="quadratic",
        dim=dim,
        fn=fn,
        minimizer=c,
        min_value=0.0,
        lower_modulus=float(curvature),
        upper_modulus=float(curvature),
    )


def make_objective(fn: Callable[[np.ndarray], float], dim: int, *, vectorized: bool = False,
                   name: str = "user", minimizer=None, min_value=None,
                   lower_modulus=None, upper_modulus=None) -> ObjectiveSpec:
    """Wrap a user objective.  Pointwise callables are applied row by row."""
    if vectorized:
        batch_fn = fn
    else:
        def batch_fn(x):
            return np.array([fn(row) for row in x], dtype=float)
    return ObjectiveSpec(name, dim, batch_fn, minimizer, min_value, lower_modulus, upper_modulus)


OBJECTIVES = {
    "rastrigin-rev": make_revised_rastrigin,
    "fig1-left": lambda dim=1: make_fig1_left(),
    "fig1-right": lambda dim=1: make_fig1_right(),
    "quadratic": make_quadratic,
}


def get_objective(name: str, dim: int) -> ObjectiveSpec:
    try:
        factory = OBJECTIVES[name]
    except KeyError:
        raise ValueError(f"unknown objective {name!r}; choose from {sorted(OBJECTIVES)}") from None
    spec = factory(dim)
    if spec.dim != dim:
        raise ValueError(f"objective {name!r} is {spec.dim}-dimensional, got dim={dim}")
    return spec


@dataclass(frozen=True)
class BoundReport:
    passed: bool
    worst_violation: float
    n_samples: int
    worst_index: int


def check_assumption_bounds(spec: ObjectiveSpec, samples) -> BoundReport:
    """Test the two-sided quadratic bound at every sample.

    A sample violates the bound when either side is exceeded by more than
    ``1e-12 * (1 + |f(x)|)``.  ``worst_violation`` is the largest signed
    excess (non-positive when every sample is inside the sandwich).
    """
    if not spec.has_minimizer or spec.lower_modulus is None:
        raise ValueError(f"objective {spec.name!r} carries no minimizer/moduli to check")
    pts = np.asarray(samples, dtype=float)
    if pts.ndim == 1 and spec.dim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("samples must be a non-empty (n, dim) array")
    if pts.shape[1] != spec.dim:
        raise ValueError(f"samples have dimension {pts.shape[1]}, objective has {spec.dim}")
    f = spec.evaluate(pts)
    r2 = np.sum((pts - spec.minimizer) ** 2, axis=1)
    lower = spec.min_value + 0.5 * spec.lower_modulus * r2
    upper = spec.min_value + 0.5 * spec.upper_modulus * r2
    excess = np.maximum(lower - f, f - upper)
    tol = 1e-12 * (1.0 + np.abs(f))
    worst = int(np.argmax(excess))
    return BoundReport(
        passed=bool(np.all(excess <= tol)),
        worst_violation=float(excess[worst]),
        n_samples=pts.shape[0],
        worst_index=worst,
    )
