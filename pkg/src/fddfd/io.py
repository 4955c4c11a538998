"""CSV persistence for traces and replicate summaries."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .optimizers import RunTrace

__all__ = ["TRACE_COLUMNS", "SUMMARY_COLUMNS", "TraceTable", "write_trace_csv", "read_trace_csv",
           "write_summary_csv", "read_summary_csv"]

TRACE_COLUMNS = ("k", "sigma_k", "dist_sq", "f_value", "cum_evals")
SUMMARY_COLUMNS = ("seed", "method", "status", "iterations", "final_dist_sq", "slope",
                   "implied_rho", "total_evals")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class TraceTable:
    """Columns of a trace read back from CSV."""

    k: np.ndarray
    sigma: np.ndarray
    dist_sq: np.ndarray
    f_value: np.ndarray
    cum_evals: np.ndarray


def write_trace_csv(trace: RunTrace, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for k, s, d, f, e in zip(trace.k, trace.sigma, trace.dist_sq, trace.f_value, trace.cum_evals):
            w.writerow((int(k), _fmt(s), _fmt(d), _fmt(f), int(e)))
    return path


def read_trace_csv(path) -> TraceTable:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_COLUMNS:
            raise ValueError(f"{path}: expected header {','.join(TRACE_COLUMNS)}, got {header}")
        rows = [r for r in reader if r]
    cols = list(zip(*rows)) if rows else [()] * 5
    return TraceTable(
        k=np.array([int(v) for v in cols[0]], dtype=int),
        sigma=np.array([float(v) for v in cols[1]]),
        dist_sq=np.array([float(v) for v in cols[2]]),
        f_value=np.array([float(v) for v in cols[3]]),
        cum_evals=np.array([int(v) for v in cols[4]], dtype=int),
    )


def write_summary_csv(rows: Iterable[dict], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in rows:
            out = []
            for col in SUMMARY_COLUMNS:
                v = row[col]
                out.append(_fmt(v) if isinstance(v, float) else str(v))
            w.writerow(out)
    return path


def read_summary_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        row["seed"] = int(row["seed"])
        row["iterations"] = int(row["iterations"])
        row["total_evals"] = int(row["total_evals"])
        for key in ("final_dist_sq", "slope", "implied_rho"):
            row[key] = float(row[key])
    return rows
