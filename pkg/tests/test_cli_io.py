import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fddfd import (FdDfdConfig, SamplerConfig, SmoothingSchedule, fit_rate, make_revised_rastrigin,
                   read_summary_csv, read_trace_csv, run_fd_dfd, write_trace_csv)
from fddfd.cli import (OUTPUT_DIR_ENV, ConfigError, ExperimentConfig, build_config, load_config_file, main,
                       run_experiment, sphere_init)

RASTRIGIN_2D = ["--objective", "rastrigin-rev", "--dim", "2", "--alpha", "0.5", "--lambda-inv", str(1 / math.sqrt(2)),
        "--rho", "0.9", "--n", "5", "--init", "1,-1", "--max-iters", "100"]


class TestSphereInit:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 300), st.integers(0, 2**63))
    def test_radius(self, d, seed):
        x = sphere_init(d, seed)
        assert x @ x == pytest.approx(d, rel=1e-10)

    def test_one_dimensional(self):
        assert {float(sphere_init(1, s)[0]) for s in range(40)} == {-1.0, 1.0}

    def test_symmetric(self):
        x = np.array([sphere_init(100, s) for s in range(10_000)])
        assert np.all(np.abs(x.mean(axis=0)) < 0.05)

    def test_rejects_zero_dim(self):
        with pytest.raises(ValueError):
            sphere_init(0, 1)


class TestConfig:
    def test_file_with_overrides(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# archival settings\nobjective = quadratic\ndim = 4\nrho = 0.8  # decay\n"
                       "seeds = 3,7\nlambda_inv = auto\n")
        settings_ = load_config_file(cfg)
        settings_["rho"] = "0.5"
        c = build_config(settings_)
        assert (c.objective, c.dim, c.rho, c.seeds, c.lambda_inv) == ("quadratic", 4, 0.5, (3, 7), "auto")

    def test_seed_forms(self):
        assert build_config({"seeds": "4"}).seeds == (0, 1, 2, 3)
        assert build_config({"seeds": "2,5:8"}).seeds == (2, 5, 6, 7)

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("temperature = 3\n")
        with pytest.raises(ConfigError, match="unknown key"):
            load_config_file(cfg)

    def test_explicit_init(self):
        c = build_config({"init": "1,-1", "dim": "2"})
        np.testing.assert_array_equal(c.initial_point(0), [1.0, -1.0])


class TestRunExperiment:
    def test_rho_rejected_before_runs(self, tmp_path):
        out = tmp_path / "o"
        res = run_experiment(ExperimentConfig(rho=1.2, out=str(out)))
        assert res.exit_code == 2 and "rho" in res.message
        assert not out.exists()

    def test_distinct_diagnostics(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        msgs = {
            run_experiment(ExperimentConfig(objective="nope", out=str(tmp_path))).message,
            run_experiment(ExperimentConfig(rho=0.0, out=str(tmp_path))).message,
            run_experiment(ExperimentConfig(out=str(blocker / "sub"))).message,
        }
        assert len(msgs) == 3
        assert any("unknown objective" in m for m in msgs)
        assert any("not writable" in m for m in msgs)

    def test_auto_lambda_needs_nonzero_start(self, tmp_path):
        res = run_experiment(ExperimentConfig(objective="quadratic", dim=2, init=(0.0, 0.0), out=str(tmp_path)))
        assert res.exit_code == 2

    def test_rastrigin_2d_both_variants(self, tmp_path):
        rc = main(RASTRIGIN_2D + ["--method", "fd-dfd-raw,fd-dfd-stable", "--seed", "0", "--out", str(tmp_path)])
        assert rc == 0
        for m in ("fd-dfd-raw", "fd-dfd-stable"):
            t = read_trace_csv(tmp_path / f"trace_{m}_seed0.csv")
            assert len(t.k) == 100

    def test_rastrigin_2d_stable_median_decreases(self, tmp_path):
        rc = main(RASTRIGIN_2D + ["--method", "fd-dfd-stable", "--seeds", "9", "--out", str(tmp_path)])
        assert rc == 0
        rows = read_summary_csv(tmp_path / "summary.csv")
        assert np.median([r["final_dist_sq"] for r in rows]) < 2.0 * 1e-4

    def test_sweep_summary_rows_and_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
        rc = main(["--objective", "rastrigin-rev", "--dim", "5", "--lambda-inv", str(1 / math.sqrt(5)),
                   "--rho", "0.9", "--n", "10", "--alpha", "0.1", "--seeds", "20", "--max-iters", "30",
                   "--init", "sphere", "--jobs", "2"])
        assert rc == 0
        out = tmp_path / "env"
        rows = read_summary_csv(out / "summary.csv")
        assert [r["seed"] for r in rows] == list(range(20))
        assert len(list(out.glob("trace_*.csv"))) == 20
        for r in rows:
            assert r["total_evals"] == 300 and r["implied_rho"] == pytest.approx(math.exp(r["slope"]))

    def test_all_diverged_exit_code(self, tmp_path):
        rc = main(["--objective", "quadratic", "--dim", "2", "--method", "fd-dfd-raw", "--alpha", "1e5",
                   "--lambda-inv", "1", "--seeds", "3", "--init", "1,1", "--out", str(tmp_path)])
        assert rc == 3
        rows = read_summary_csv(tmp_path / "summary.csv")
        assert len(rows) == 3 and all(r["status"] == "diverged" for r in rows)

    def test_parallel_matches_serial(self, tmp_path):
        args = RASTRIGIN_2D + ["--method", "fd-dfd-stable,rad", "--seeds", "4"]
        assert main(args + ["--out", str(tmp_path / "a"), "--jobs", "1"]) == 0
        assert main(args + ["--out", str(tmp_path / "b"), "--jobs", "3"]) == 0
        for f in sorted(os.listdir(tmp_path / "a")):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_config_error_exit_code(self, capsys):
        assert main(["--rho", "1.2"]) == 2
        assert "rho" in capsys.readouterr().err


def _trace(seed):
    cfg = FdDfdConfig(0.5, SmoothingSchedule(1 / math.sqrt(2), 0.9), 5, [1.0, -1.0], 80,
                      SamplerConfig("halton", seed, 2))
    return run_fd_dfd(make_revised_rastrigin(2), cfg)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**40))
def test_trace_csv_round_trip(tmp_path_factory, seed):
    trace = _trace(seed)
    path = write_trace_csv(trace, tmp_path_factory.mktemp("rt") / "t.csv")
    back = read_trace_csv(path)
    np.testing.assert_array_equal(back.dist_sq, trace.dist_sq)
    np.testing.assert_array_equal(back.sigma, trace.sigma)
    np.testing.assert_array_equal(back.cum_evals, trace.cum_evals)
    assert fit_rate(back, (1, 80)) == fit_rate(trace, (1, 80))


def test_trace_csv_header_checked(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("k,sigma,dist\n1,2,3\n")
    with pytest.raises(ValueError, match="header"):
        read_trace_csv(p)


def test_trace_csv_bytes_deterministic(tmp_path):
    a = write_trace_csv(_trace(5), tmp_path / "a.csv").read_bytes()
    b = write_trace_csv(_trace(5), tmp_path / "b.csv").read_bytes()
    assert a == b
    assert a.splitlines()[0] == b"k,sigma_k,dist_sq,f_value,cum_evals"
