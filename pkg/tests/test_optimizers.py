import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import nnls

from fddfd import (DIVERGENCE_FACTOR, FdDfdConfig, RadConfig, RunStatus, SamplerConfig, SmoothingSchedule,
                   advise_lambda, check_rate_condition, check_stepsize, equivalent_raw_stepsize, fd_dfd_step,
                   fit_rate, make_objective, make_quadratic, make_revised_rastrigin, rad_update, run_fd_dfd,
                   run_rad, sigma_at, stabilized_stepsize)


class FixedBatches:
    """Sampler stand-in that replays canned unit-normal draws."""

    def __init__(self, draws):
        self.draws = list(draws)

    def draw_batch(self, center, sigma, n):
        return center + sigma * np.asarray(self.draws.pop(0), dtype=float)


def hull_residual(point, batch):
    A = np.vstack([batch.T, np.ones(len(batch))])
    return nnls(A, np.append(point, 1.0))[1]


class TestStep:
    def test_raw_hand_example(self):
        x2, est = fd_dfd_step(np.array([1.0]), np.array([[0.5], [1.5]]), np.array([0.25, 2.25]), 1.0, 0.25, "raw")
        assert est.direction.tolist() == [0.5]
        assert x2.tolist() == [0.875]

    def test_raw_hand_example_through_run(self):
        spec = make_quadratic(1)
        sched = SmoothingSchedule(1 / 0.9, 0.9)
        cfg = FdDfdConfig(0.25, sched, 2, [1.0], max_iters=1, sampler=SamplerConfig(dim=1), estimator="raw")
        trace = run_fd_dfd(spec, cfg, sampler=FixedBatches([[[-0.5], [0.5]]]))
        assert trace.iterates[-1, 0] == pytest.approx(0.875, rel=1e-14)
        assert trace.cum_evals.tolist() == [2]

    def test_zero_stepsize_is_stationary(self):
        spec = make_revised_rastrigin(3)
        cfg = FdDfdConfig(0.0, SmoothingSchedule(1.0, 0.9), 4, [0.5, -0.2, 1.0], max_iters=20,
                          sampler=SamplerConfig("halton", 0, 3))
        trace = run_fd_dfd(spec, cfg)
        assert np.all(trace.iterates == trace.iterates[0])


class TestRadUpdate:
    def test_hand_example(self):
        x = rad_update(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]), 1.0)
        assert x[0] == pytest.approx(math.exp(-1) / (1 + math.exp(-1)), rel=1e-15)

    def test_equal_values_give_centroid(self, rng):
        batch = rng.normal(size=(6, 3))
        np.testing.assert_allclose(rad_update(batch, np.full(6, 2.0), 0.7), batch.mean(axis=0), rtol=1e-14)

    def test_zero_m_is_centroid(self, rng):
        batch = rng.normal(size=(5, 2))
        np.testing.assert_array_equal(rad_update(batch, rng.normal(size=5), 0.0), batch.mean(axis=0))

    def test_small_m_selects_argmin(self, rng):
        batch = rng.normal(size=(8, 2))
        values = rng.normal(size=8)
        np.testing.assert_allclose(rad_update(batch, values, 1e-6), batch[np.argmin(values)], atol=1e-12)

    def test_large_offsets_stay_finite(self):
        x = rad_update(np.array([[0.0], [1.0]]), np.array([1e6, 1e6 + 1]), 1.0)
        assert x[0] == pytest.approx(math.exp(-1) / (1 + math.exp(-1)), rel=1e-12)


class TestRuns:
    def test_trace_bookkeeping(self):
        sched = SmoothingSchedule(0.7, 0.85)
        cfg = FdDfdConfig(0.3, sched, 7, [1.0, 2.0], max_iters=40, sampler=SamplerConfig("pseudo", 1, 2))
        trace = run_fd_dfd(make_quadratic(2), cfg)
        assert trace.k.tolist() == list(range(1, 41))
        assert trace.cum_evals.tolist() == [7 * k for k in range(1, 41)]
        assert trace.sigma.tolist() == [sigma_at(sched, k) for k in range(1, 41)]
        assert trace.initial_dist_sq == 5.0
        assert trace.iterates.shape == (41, 2)
        d = np.sum(trace.iterates[1:] ** 2, axis=1)
        np.testing.assert_allclose(trace.dist_sq, d, rtol=1e-15)
        assert np.all(np.diff(trace.best_f) <= 0)

    @pytest.mark.parametrize("dim", [1, 10, 100])
    def test_evaluations_per_iteration_independent_of_dim(self, dim):
        cfg = FdDfdConfig(0.1, SmoothingSchedule(1.0, 0.9), 6, np.ones(dim), max_iters=5,
                          sampler=SamplerConfig("halton", 0, dim))
        assert run_fd_dfd(make_quadratic(dim), cfg).cum_evals.tolist() == [6, 12, 18, 24, 30]

    @pytest.mark.parametrize("kind", ["pseudo", "halton"])
    def test_bit_identical_reruns(self, kind):
        cfg = FdDfdConfig(0.5, SmoothingSchedule(1 / math.sqrt(2), 0.9), 5, [1.0, -1.0], max_iters=60,
                          sampler=SamplerConfig(kind, 42, 2))
        a = run_fd_dfd(make_revised_rastrigin(2), cfg)
        b = run_fd_dfd(make_revised_rastrigin(2), cfg)
        np.testing.assert_array_equal(a.iterates, b.iterates)
        np.testing.assert_array_equal(a.dist_sq, b.dist_sq)

    def test_nonfinite_objective_diverges(self):
        spec = make_objective(lambda x: np.inf if x[0] > 1.5 else float(x @ x), 1, minimizer=[0.0],
                              min_value=0.0)
        cfg = FdDfdConfig(0.1, SmoothingSchedule(4.0, 0.9), 20, [1.0], max_iters=50)
        trace = run_fd_dfd(spec, cfg)
        assert trace.status is RunStatus.DIVERGED
        assert len(trace) < 50

    def test_blowup_diverges(self):
        cfg = FdDfdConfig(1e4, SmoothingSchedule(1.0, 0.9), 5, [1.0, 1.0], max_iters=200, estimator="raw")
        trace = run_fd_dfd(make_quadratic(2), cfg)
        assert trace.status is RunStatus.DIVERGED
        assert trace.final_dist_sq > DIVERGENCE_FACTOR * trace.initial_dist_sq

    def test_stop_threshold(self):
        cfg = FdDfdConfig(1.0, SmoothingSchedule(1.0, 0.8), 10, [1.0, 1.0], max_iters=500, stop_dist_sq=1e-3,
                          sampler=SamplerConfig("halton", 0, 2))
        trace = run_fd_dfd(make_quadratic(2), cfg)
        assert trace.status is RunStatus.THRESHOLD_REACHED
        assert trace.final_dist_sq <= 1e-3 < trace.dist_sq[:-1].min()

    def test_unknown_minimizer_still_runs(self):
        spec = make_objective(lambda x: float(np.sum((x - 3) ** 2)), 2)
        cfg = FdDfdConfig(1.0, SmoothingSchedule(1.0, 0.9), 10, [0.0, 0.0], max_iters=80,
                          sampler=SamplerConfig("halton", 0, 2))
        trace = run_fd_dfd(spec, cfg)
        assert np.all(np.isnan(trace.dist_sq))
        assert trace.status is RunStatus.MAX_ITERS
        np.testing.assert_allclose(trace.final_point, [3.0, 3.0], atol=1e-2)

    def test_config_validation(self):
        sched = SmoothingSchedule(1.0, 0.5)
        with pytest.raises(ValueError):
            FdDfdConfig(-0.1, sched, 5, [0.0])
        with pytest.raises(ValueError):
            FdDfdConfig(0.1, sched, 0, [0.0])
        with pytest.raises(ValueError):
            FdDfdConfig(0.1, sched, 5, [0.0, 0.0], sampler=SamplerConfig(dim=3))
        with pytest.raises(ValueError):
            run_fd_dfd(make_quadratic(3), FdDfdConfig(0.1, sched, 5, [0.0, 0.0], sampler=SamplerConfig(dim=2)))

    def test_rad_known_fstar_needs_optimum(self):
        spec = make_objective(lambda x: float(x @ x), 1)
        with pytest.raises(ValueError):
            run_rad(spec, RadConfig(SmoothingSchedule(1.0, 0.9), 5, [1.0], m_strategy="known_fstar"))

    @pytest.mark.parametrize("strategy", ["batch", "known_fstar"])
    def test_rad_hull_every_iteration(self, strategy):
        residuals = []

        def check(k, x, batch, values, x_next):
            residuals.append(hull_residual(x_next, batch))

        cfg = RadConfig(SmoothingSchedule(1 / math.sqrt(2), 0.9), 30, [1.0, -1.0], max_iters=200,
                        sampler=SamplerConfig("pseudo", 3, 2), m_strategy=strategy)
        run_rad(make_revised_rastrigin(2), cfg, callback=check)
        assert len(residuals) == 200
        assert max(residuals) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), t=st.lists(st.floats(-5, 5), min_size=2, max_size=2),
       raw=st.booleans())
def test_translation_equivariance(seed, t, raw):
    t = np.array(t)
    sched = SmoothingSchedule(0.5, 0.9)
    x1 = np.array([0.7, -0.3])
    base = make_quadratic(2)
    shifted = make_quadratic(2, center=t)
    est = "raw" if raw else "stabilized"
    a = run_fd_dfd(base, FdDfdConfig(0.2, sched, 6, x1, 30, SamplerConfig("pseudo", seed, 2), est))
    b = run_fd_dfd(shifted, FdDfdConfig(0.2, sched, 6, x1 + t, 30, SamplerConfig("pseudo", seed, 2), est))
    np.testing.assert_allclose(b.iterates - t, a.iterates, rtol=0, atol=1e-9)


class TestAdvisor:
    def test_advise_lambda(self):
        assert advise_lambda(8, 2) == 4.0
        assert advise_lambda(3.5, 5) == 1.0
        assert advise_lambda(2 / 0.9, 2) == pytest.approx(2 * (2 / 0.9) / 4, rel=1e-15)
        with pytest.raises(ValueError):
            advise_lambda(0.0, 2)

    def test_check_stepsize(self):
        r = check_stepsize(2 / 132, 2, 130, 0.01)
        assert r.rho_alpha == pytest.approx(0.0, abs=1e-28) and r.satisfies_thm2
        r = check_stepsize(0.25, 2, 2, 0.9)
        assert r.rho_alpha == 0.5 and r.satisfies_thm2
        r = check_stepsize(0.05, 2, 2, 0.5)
        assert r.rho_alpha == pytest.approx(1.62, rel=1e-14) and not r.satisfies_thm2

    def test_rate_condition(self):
        r = check_rate_condition(0.5, 2, 2, 0.9, dim=5, n=10, lambda_inv=1.0, initial_dist_sq=0.9, C=2.0)
        assert r.rho_alpha == 0.0
        assert r.k_c == pytest.approx(2 * 2 / math.sqrt(10) * math.sqrt(7 + 1), rel=1e-14)
        assert r.condition == 0.0 and r.satisfied
        r = check_rate_condition(0.05, 2, 2, 0.5, dim=5, n=10, lambda_inv=1.0, initial_dist_sq=1.0, C=2.0)
        assert r.condition == math.inf and not r.satisfied

    def test_equivalent_raw_round_trip(self):
        spec = make_quadratic(5)
        sched = SmoothingSchedule(2.0, 0.9)
        a = stabilized_stepsize(spec, sched, 0.5, mc_samples=50_000)
        sigma = sigma_at(sched, 1)
        m = sigma**2 * math.sqrt(5 * 7)
        assert equivalent_raw_stepsize(a, sigma, m) == pytest.approx(0.5, rel=0.02)


def _sphere(d, seed):
    z = np.random.default_rng(seed).standard_normal(d)
    return z * math.sqrt(d) / np.linalg.norm(z)


@pytest.mark.parametrize("spec,rho", [(make_quadratic(5), 0.9), (make_revised_rastrigin(5), 0.95)])
def test_linear_convergence_median_slope(spec, rho):
    d = spec.dim
    sched = SmoothingSchedule(math.sqrt(d), rho)
    alpha = stabilized_stepsize(spec, sched, 2 / (spec.lower_modulus + spec.upper_modulus))
    slopes = []
    for seed in range(20):
        cfg = FdDfdConfig(alpha, sched, 10, _sphere(d, seed), 100, SamplerConfig("halton", seed, d))
        slopes.append(fit_rate(run_fd_dfd(spec, cfg), (1, 100)).slope)
    assert np.median(slopes) <= math.log(rho) + 0.05


def test_quadratic_implied_rate_near_schedule():
    spec, rho = make_quadratic(5), 0.9
    implied = []
    for seed in range(20):
        x1 = _sphere(5, seed)
        sched = SmoothingSchedule(advise_lambda(x1 @ x1 / rho, 5), rho)
        alpha = stabilized_stepsize(spec, sched, 0.5)
        cfg = FdDfdConfig(alpha, sched, 10, x1, 100, SamplerConfig("halton", seed, 5))
        implied.append(fit_rate(run_fd_dfd(spec, cfg), (1, 100)).implied_rho)
    assert np.median(implied) <= rho * 1.1
