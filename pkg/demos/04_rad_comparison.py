"""Softmin averaging (RAD) next to FD-DFD on the same problem.

RAD moves to a weighted mean of its batch with weights exp(-(f_i - f*)/m),
so every iterate stays inside the convex hull of the points just sampled.
It needs no stepsize but uses more evaluations per iteration here (n = 30).
"""

import math

import numpy as np
from scipy.optimize import nnls

from fddfd import (FdDfdConfig, RadConfig, SamplerConfig, SmoothingSchedule, evaluations_to_reach,
                   make_revised_rastrigin, run_fd_dfd, run_rad)

spec = make_revised_rastrigin(2)
sched = SmoothingSchedule(1 / math.sqrt(2), 0.9)

worst = 0.0


def hull_check(k, x, batch, values, x_next):
    global worst
    A = np.vstack([batch.T, np.ones(len(batch))])
    worst = max(worst, nnls(A, np.append(x_next, 1.0))[1])


rad_evals, fd_evals = [], []
for seed in range(50):
    rad = run_rad(spec, RadConfig(sched, 30, [1.0, -1.0], 150, SamplerConfig("halton", seed, 2)),
                  callback=hull_check)
    fd = run_fd_dfd(spec, FdDfdConfig(0.5, sched, 5, [1.0, -1.0], 150, SamplerConfig("halton", seed, 2)))
    rad_evals.append(evaluations_to_reach(rad, [1e-2, 1e-4])[1][1] or np.nan)
    fd_evals.append(evaluations_to_reach(fd, [1e-2, 1e-4])[1][1] or np.nan)

print(f"largest distance of a RAD iterate from its batch hull: {worst:.1e}")
for name, e in (("RAD (n=30)", rad_evals), ("FD-DFD stabilized (n=5)", fd_evals)):
    e = np.array(e, dtype=float)
    print(f"{name:24s} reached 1e-4 in {np.isfinite(e).sum()}/50 seeds, "
          f"median evaluations {np.nanmedian(e):.0f}")
