"""Linear convergence across dimensions, with parameters checked by the advisor.

Initial points lie on the sphere of radius sqrt(d); 1/lambda = sqrt(d);
rho = 0.95; n = 10 evaluations per iteration regardless of d.

The stepsize condition is stated for the raw direction: alpha (L + l) / 2
close to 1 gives contraction factor 2 [1 - alpha (L + l)/2]^2 < rho.  We pick
the raw stepsize 2/(L + l) and translate it into a stabilized stepsize with
the spread of f around the minimizer at sigma_1 (``stabilized_stepsize``).
These are illustrative settings, one valid choice among many.
"""

import math

import numpy as np

from fddfd import (FdDfdConfig, SamplerConfig, SmoothingSchedule, check_stepsize, fit_rate,
                   make_revised_rastrigin, run_fd_dfd, sphere_init, stabilized_stepsize)

rho = 0.95
print("   d   alpha_stab   median slope   implied rho   median final dist_sq")
for d in (5, 20, 50, 100):
    spec = make_revised_rastrigin(d)
    l, L = spec.lower_modulus, spec.upper_modulus
    sched = SmoothingSchedule(math.sqrt(d), rho)
    raw_alpha = 2 / (L + l)
    assert check_stepsize(raw_alpha, l, L, rho).satisfies_thm2
    alpha = stabilized_stepsize(spec, sched, raw_alpha)
    slopes, finals = [], []
    for seed in range(20):
        trace = run_fd_dfd(spec, FdDfdConfig(alpha, sched, 10, sphere_init(d, seed), 100,
                                             SamplerConfig("halton", seed, d)))
        slopes.append(fit_rate(trace, (1, 100)).slope)
        finals.append(trace.final_dist_sq)
    s = float(np.median(slopes))
    print(f"{d:4d}   {alpha:9.4f}   {s:11.4f}   {math.exp(s):10.4f}   {np.median(finals):14.3e}")
print(f"\nschedule decay ln rho = {math.log(rho):.4f}")
