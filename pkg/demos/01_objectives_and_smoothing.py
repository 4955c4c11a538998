"""Test objectives, their quadratic sandwich, and what Gaussian smoothing does to them.

The revised Rastrigin function has a local minimum every 0.4 along each axis,
yet it stays between two quadratics centered at the origin.  Smoothing with a
Gaussian of width sigma washes the ripples out: for a quadratic the smoothed
value is exactly f(x) + d sigma^2, and the smoothed gradient is unchanged.
"""

import numpy as np

from fddfd import (SamplerConfig, SmoothedQuery, check_assumption_bounds, make_fig1_left, make_quadratic,
                   make_revised_rastrigin, smoothed_gradient, smoothed_value)

rng = np.random.default_rng(0)

# Sandwich check on random points.
for spec in (make_fig1_left(), make_revised_rastrigin(1), make_revised_rastrigin(5)):
    rep = check_assumption_bounds(spec, rng.uniform(-3, 3, (10_000, spec.dim)))
    print(f"{spec.name:14s} d={spec.dim}  l={spec.lower_modulus:g} L={spec.upper_modulus:g}  "
          f"sandwich holds: {rep.passed}")

# Count local minima of the 1-D Rastrigin on a fine grid.
t = np.linspace(-1, 1, 20001)
f = make_revised_rastrigin(1).evaluate(t[:, None])
print("local minima in [-1, 1]:", t[1:-1][(f[1:-1] < f[:-2]) & (f[1:-1] < f[2:])].round(3))

# Smoothing the ripples away: the smoothed 1-D Rastrigin is nearly a parabola for sigma ~ 0.5.
spec = make_revised_rastrigin(1)
print("\n   x     f(x)   f_0.05(x)  f_0.5(x)")
for x in np.linspace(-1, 1, 9):
    vals = [smoothed_value(spec, SmoothedQuery([x], s, 50_000), SamplerConfig("halton", 0, 1))[0]
            for s in (0.05, 0.5)]
    print(f"{x:5.2f}  {spec([x]):7.4f}  {vals[0]:8.4f}  {vals[1]:8.4f}")

# Quadratic oracles.
q = make_quadratic(3)
x = np.array([1.0, -1.0, 0.5])
val, se = smoothed_value(q, SmoothedQuery(x, 0.7, 400_000), SamplerConfig("pseudo", 1, 3))
print(f"\nf_sigma(x) = {val:.4f} +- {se:.4f}; exact |x|^2 + d sigma^2 = {x @ x + 3 * 0.49:.4f}")
grad, se = smoothed_gradient(q, SmoothedQuery(x, 0.7, 400_000), SamplerConfig("pseudo", 2, 3), baseline=q(x))
print("grad f_sigma(x) =", grad.round(3), "+-", se.round(3), " exact 2x =", 2 * x)
