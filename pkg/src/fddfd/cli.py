"""Command-line driver for replicate experiments.

Example::

    fddfd --objective rastrigin-rev --dim 2 --method fd-dfd-raw,fd-dfd-stable \\
          --alpha 0.5 --lambda-inv 1.4142135623730951 --rho 0.9 --n 5 \\
          --init 1,-1 --seeds 50 --max-iters 150 --out rastrigin-2d

Settings may also come from a flat ``key = value`` file given with
``--config``; command-line flags override the file.  Each run writes
``trace_<method>_seed<seed>.csv`` and the whole sweep one ``summary.csv``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .analysis import fit_rate
from .io import write_summary_csv, write_trace_csv
from .objectives import OBJECTIVES, get_objective
from .optimizers import (FdDfdConfig, RadConfig, RunStatus, RunTrace, advise_lambda, run_fd_dfd,
                         run_rad)
from .sampling import SamplerConfig, SamplerKind, SmoothingSchedule

__all__ = ["ExperimentConfig", "ExperimentResult", "ConfigError", "sphere_init", "run_experiment",
           "load_config_file", "main", "OUTPUT_DIR_ENV", "METHODS"]

OUTPUT_DIR_ENV = "FDDFD_OUTPUT_DIR"
METHODS = ("fd-dfd-raw", "fd-dfd-stable", "rad")
EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 2, 3
FIT_RANGE = (1, 100)


class ConfigError(ValueError):
    pass


def sphere_init(dim: int, seed: int) -> np.ndarray:
    """Uniform point on the sphere of radius ``sqrt(dim)``.

    Uses a stream independent of the sampler seeded with the same ``seed``.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    z = rng.standard_normal(dim)
    while not np.any(z):
        z = rng.standard_normal(dim)
    return z / np.linalg.norm(z) * math.sqrt(dim)


@dataclass(frozen=True)
class ExperimentConfig:
    objective: str = "rastrigin-rev"
    dim: int = 2
    methods: tuple[str, ...] = ("fd-dfd-stable",)
    alpha: float = 0.5
    lambda_inv: Union[float, str] = "auto"
    rho: float = 0.9
    n: int = 5
    seeds: tuple[int, ...] = (0,)
    max_iters: int = 100
    sampler: str = "halton"
    init: Union[str, tuple[float, ...]] = "sphere"
    out: Optional[str] = None
    jobs: int = 1

    def validate(self) -> None:
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"unknown objective {self.objective!r}; choose from {', '.join(sorted(OBJECTIVES))}")
        try:
            get_objective(self.objective, self.dim)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
        if self.n < 1 or self.max_iters < 1 or self.jobs < 1:
            raise ConfigError("n, max-iters and jobs must be positive")
        if not self.alpha >= 0:
            raise ConfigError(f"alpha must be non-negative, got {self.alpha}")
        if isinstance(self.lambda_inv, str):
            if self.lambda_inv != "auto":
                raise ConfigError(f"lambda-inv must be a positive number or 'auto', got {self.lambda_inv!r}")
        elif not self.lambda_inv > 0:
            raise ConfigError(f"lambda-inv must be positive, got {self.lambda_inv}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        try:
            SamplerKind.parse(self.sampler)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if isinstance(self.init, str):
            if self.init != "sphere":
                raise ConfigError(f"init must be 'sphere' or a comma-separated point, got {self.init!r}")
        elif len(self.init) != self.dim:
            raise ConfigError(f"initial point has {len(self.init)} entries, dim is {self.dim}")

    def initial_point(self, seed: int) -> np.ndarray:
        if isinstance(self.init, str):
            return sphere_init(self.dim, seed)
        return np.array(self.init, dtype=float)

    def output_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUTPUT_DIR_ENV) or "fddfd-out")


@dataclass
class ExperimentResult:
    exit_code: int
    trace_paths: list[Path] = field(default_factory=list)
    summary_path: Optional[Path] = None
    message: str = ""


def _resolve_lambda_inv(config: ExperimentConfig, spec, x1: np.ndarray) -> float:
    if config.lambda_inv != "auto":
        return float(config.lambda_inv)
    if not spec.has_minimizer:
        raise ConfigError("lambda-inv 'auto' needs an objective with known minimizer")
    M = spec.dist_sq(x1) / config.rho
    if M == 0:
        raise ConfigError("lambda-inv 'auto' is undefined when the initial point is the minimizer")
    return advise_lambda(M, spec.dim)


def run_single(config: ExperimentConfig, method: str, seed: int) -> RunTrace:
    spec = get_objective(config.objective, config.dim)
    x1 = config.initial_point(seed)
    schedule = SmoothingSchedule(_resolve_lambda_inv(config, spec, x1), config.rho)
    sampler = SamplerConfig(config.sampler, seed, config.dim)
    if method == "rad":
        return run_rad(spec, RadConfig(schedule, config.n, x1, config.max_iters, sampler))
    estimator = "raw" if method == "fd-dfd-raw" else "stabilized"
    return run_fd_dfd(spec, FdDfdConfig(config.alpha, schedule, config.n, x1, config.max_iters,
                                        sampler, estimator))


def _run_job(args):
    return run_single(*args)


def _summary_row(seed: int, method: str, trace: RunTrace) -> dict:
    try:
        fit = fit_rate(trace, FIT_RANGE)
        slope, implied = fit.slope, fit.implied_rho
    except ValueError:
        slope = implied = float("nan")
    return {
        "seed": seed,
        "method": method,
        "status": trace.status.value,
        "iterations": len(trace),
        "final_dist_sq": trace.final_dist_sq,
        "slope": slope,
        "implied_rho": implied,
        "total_evals": trace.total_evals,
    }


def _prepare_output(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {str(path)!r} is not writable: {exc.strerror or exc}") from None


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Validate, run every (method, seed) pair, and write traces plus a summary."""
    try:
        config.validate()
        out = config.output_dir()
        _prepare_output(out)
        if config.lambda_inv == "auto":
            _resolve_lambda_inv(config, get_objective(config.objective, config.dim),
                                config.initial_point(config.seeds[0]))
    except ConfigError as exc:
        return ExperimentResult(EXIT_CONFIG, message=str(exc))

    jobs = [(config, method, seed) for method in config.methods for seed in config.seeds]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            traces = list(pool.map(_run_job, jobs))
    else:
        traces = [_run_job(j) for j in jobs]

    result = ExperimentResult(EXIT_OK)
    rows = []
    for (_, method, seed), trace in zip(jobs, traces):
        result.trace_paths.append(write_trace_csv(trace, out / f"trace_{method}_seed{seed}.csv"))
        rows.append(_summary_row(seed, method, trace))
    rows.sort(key=lambda r: (r["seed"], METHODS.index(r["method"])))
    result.summary_path = write_summary_csv(rows, out / "summary.csv")
    if all(t.status is RunStatus.DIVERGED for t in traces):
        result.exit_code = EXIT_DIVERGED
        result.message = "every run diverged"
    return result


# ---------------------------------------------------------------------------
# argument handling

_KEYS = {
    "objective": str,
    "dim": int,
    "method": str,
    "alpha": float,
    "lambda-inv": str,
    "rho": float,
    "n": int,
    "seeds": str,
    "max-iters": int,
    "sampler": str,
    "init": str,
    "out": str,
    "jobs": int,
}


def load_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Keys use flag spelling."""
    settings = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("_", "-")
        if key == "lambda":
            key = "lambda-inv"
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        settings[key] = value
    return settings


def _parse_seeds(text: str) -> tuple[int, ...]:
    text = text.strip()
    if "," in text or ":" in text:
        seeds = []
        for part in text.split(","):
            part = part.strip()
            if ":" in part:
                lo, hi = part.split(":")
                seeds.extend(range(int(lo), int(hi)))
            elif part:
                seeds.append(int(part))
        return tuple(seeds)
    count = int(text)
    if count < 1:
        raise ConfigError(f"seed count must be positive, got {count}")
    return tuple(range(count))


def build_config(settings: dict) -> ExperimentConfig:
    """Turn string settings (file and/or flags) into an :class:`ExperimentConfig`."""
    kw = {}
    try:
        for key, value in settings.items():
            if value is None:
                continue
            conv = _KEYS[key]
            if key == "method":
                kw["methods"] = tuple(m.strip() for m in value.split(",") if m.strip())
            elif key == "lambda-inv":
                kw["lambda_inv"] = "auto" if value.strip() == "auto" else float(value)
            elif key == "seeds":
                kw["seeds"] = _parse_seeds(value)
            elif key == "init":
                v = value.strip()
                kw["init"] = v if v == "sphere" else tuple(float(p) for p in v.split(","))
            else:
                kw[key.replace("-", "_")] = conv(value)
    except ValueError as exc:
        raise ConfigError(f"bad setting: {exc}") from None
    return ExperimentConfig(**kw)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fddfd", description="Run FD-DFD / RAD replicate experiments.")
    p.add_argument("--config", help="flat key = value settings file (flags override it)")
    p.add_argument("--objective", help=f"one of {', '.join(sorted(OBJECTIVES))}")
    p.add_argument("--dim", help="problem dimension")
    p.add_argument("--method", help=f"comma-separated subset of {', '.join(METHODS)}")
    p.add_argument("--alpha", help="FD-DFD stepsize")
    p.add_argument("--lambda-inv", dest="lambda_inv", help="initial smoothing variance 1/lambda, or 'auto'")
    p.add_argument("--rho", help="contraction factor in (0, 1)")
    p.add_argument("--n", help="function evaluations per iteration")
    p.add_argument("--seeds", help="seed count (N -> 0..N-1) or list like 3,7,10:20")
    p.add_argument("--seed", type=int, help="run exactly this one seed (overrides --seeds)")
    p.add_argument("--max-iters", dest="max_iters", help="iterations per run")
    p.add_argument("--sampler", help="pseudo or halton")
    p.add_argument("--init", help="'sphere' (radius sqrt(dim)) or a comma-separated point")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./fddfd-out)")
    p.add_argument("--jobs", help="parallel worker processes")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        settings = load_config_file(args.config) if args.config else {}
        for key in _KEYS:
            value = getattr(args, key.replace("-", "_"))
            if value is not None:
                settings[key] = value
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError(f"seed must be an unsigned 64-bit integer, got {args.seed}")
            settings["seeds"] = f"{args.seed},"
        config = build_config(settings)
    except (ConfigError, OSError) as exc:
        print(f"fddfd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_experiment(config)
    if result.exit_code == EXIT_CONFIG:
        print(f"fddfd: config error: {result.message}", file=sys.stderr)
    else:
        print(f"wrote {len(result.trace_paths)} traces and {result.summary_path}")
        if result.message:
            print(f"fddfd: {result.message}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
