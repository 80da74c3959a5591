import json
import math

import numpy as np
import pytest

from maxreward.harness import (
    ExperimentRecord,
    ExperimentSpec,
    config_hash,
    fit,
    fit_xy,
    make_spec,
    read_records,
    run,
    workload_report,
    write_records,
)


class TestSpecValidation:
    def test_unknown_family(self):
        with pytest.raises(ValueError):
            make_spec("nope", "constant:c=1", "n", [1], 1)

    def test_empty_sweep(self):
        with pytest.raises(ValueError):
            make_spec("lattice-mean-reward", "constant:c=1", "n", [], 1)

    def test_zero_trials(self):
        with pytest.raises(ValueError):
            make_spec("lattice-mean-reward", "constant:c=1", "n", [1], 0)

    def test_bad_dist(self):
        with pytest.raises(ValueError):
            make_spec("lattice-mean-reward", "weird:x=1", "n", [1], 1)

    def test_continuous_needs_lambda_alpha(self):
        with pytest.raises(ValueError):
            make_spec("agility", "constant:c=1", "alpha", [1.0], 2)

    def test_hash_stable_and_sensitive(self):
        a = make_spec("lattice-mean-reward", "constant:c=1", "n", [10], 5, seed=1)
        b = make_spec("lattice-mean-reward", "constant:c=1", "n", [10], 5, seed=1)
        c = make_spec("lattice-mean-reward", "constant:c=1", "n", [10], 5, seed=2)
        assert config_hash(a) == config_hash(b) != config_hash(c)


class TestRunFamilies:
    def test_constant_lattice_mean_exact(self):
        spec = make_spec("lattice-mean-reward", "constant:c=1", "n", [5, 20], 10, seed=1)
        for rec in run(spec):
            assert rec.mean == 1.0
            assert rec.stderr == 0.0

    def test_lattice_mean_deterministic_any_workers(self):
        spec = make_spec("lattice-mean-reward", "exponential:rate=1", "n", [50, 100], 30, seed=2)
        a = run(spec, workers=1)
        b = run(spec, workers=4)
        assert [(r.sweep_value, r.mean, r.stderr) for r in a] == \
            [(r.sweep_value, r.mean, r.stderr) for r in b]

    def test_lattice_sensing_records(self):
        spec = make_spec("lattice-sensing", "exponential:rate=1", "m", [4, 6, 8], 50, seed=3)
        recs = run(spec)
        assert [r.extra["baseline"] for r in recs] == [2.0, 2.0, 2.0]
        assert all(r.extra["baseline_mode"] == "closed-form" for r in recs)
        assert all(r.mean >= r.sweep_value for r in recs)
        means = [r.mean for r in recs]
        assert means[0] < means[2]

    def test_sensing_closed_form_refused_for_heavy_tails(self):
        spec = make_spec(
            "lattice-sensing", "pareto:xm=1,alpha=1.5", "m", [4], 5, seed=4,
            extra={"baseline": "closed-form"},
        )
        with pytest.raises(ValueError, match="heavy tails"):
            run(spec)

    def test_sensing_pareto_uses_growing_baseline(self):
        spec = make_spec(
            "lattice-sensing", "pareto:xm=1,alpha=1.5", "m", [4, 16], 10, seed=5,
            extra={"baseline_trials": 200},
        )
        recs = run(spec)
        assert all(r.extra["baseline_mode"] == "growing" for r in recs)
        # R*(m^1.1) pre-estimates grow with m
        assert recs[0].extra["baseline"] < recs[1].extra["baseline"]

    def test_continuous_mean(self):
        spec = make_spec(
            "continuous-mean-reward", "constant:c=1", "L", [10.0, 20.0], 30,
            lam=2.0, alpha=1.0, seed=6,
        )
        recs = run(spec)
        assert len(recs) == 2
        assert all(0.5 < r.mean < 2.5 for r in recs)

    def test_continuous_sensing_constant_baseline(self):
        spec = make_spec(
            "continuous-sensing", "constant:c=1", "S", [2.0, 4.0], 20,
            lam=2.0, alpha=1.0, seed=7, extra={"max_distance": 400.0},
        )
        recs = run(spec)
        assert all(r.extra["baseline"] == pytest.approx(2.0) for r in recs)
        assert recs[0].mean < recs[1].mean

    def test_agility_monotone(self):
        spec = make_spec(
            "agility", "exponential:rate=1", "alpha", [0.5, 2.0], 60,
            lam=5.0, alpha=1.0, seed=8, extra={"L": 15.0},
        )
        recs = run(spec)
        assert recs[0].mean < recs[1].mean

    def test_workload_counters(self):
        spec = make_spec(
            "workload", "bernoulli:p=0.5", "S", [4.0, 8.0], 15,
            lam=1.0, alpha=1.0, seed=9, extra={"strips": 5},
        )
        recs = run(spec)
        for r in recs:
            assert r.mean > 0
            assert r.extra["relax_per_distance"] * r.sweep_value == pytest.approx(r.mean)
            assert r.extra["visits_per_distance"] > 0

    def test_ugs_two_records_per_point(self):
        spec = make_spec(
            "ugs", "exponential:rate=1", "L", [10.0], 20,
            lam=1.0, alpha=1.0, seed=10,
        )
        recs = run(spec)
        assert {r.extra["strategy"] for r in recs} == {"homogeneous", "randomized"}
        for r in recs:
            assert len(r.extra["posterior_variance"]) == 10


class TestFit:
    def test_exact_power_law(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        f = fit_xy(x, x**0.5, "power-law")
        assert f.exponent_or_rate == pytest.approx(0.5)
        assert f.r_squared == pytest.approx(1.0)
        assert f.ci95[0] <= f.exponent_or_rate <= f.ci95[1]

    def test_exact_exponential_growth(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        f = fit_xy(x, 2.0**x, "exp-growth")
        assert f.exponent_or_rate == pytest.approx(math.log(2.0))
        assert f.r_squared == pytest.approx(1.0)

    def test_exact_linear(self):
        f = fit_xy([1, 2, 3], [3.0, 5.0, 7.0], "linear")
        assert f.exponent_or_rate == pytest.approx(2.0)
        assert f.intercept == pytest.approx(1.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            fit_xy([1, 2], [1, 2], "power-law")
        with pytest.raises(ValueError):
            fit_xy([1, 1, 1], [1, 2, 3], "linear")
        with pytest.raises(ValueError):
            fit_xy([1, 2, 3], [-1, 2, 3], "power-law")
        with pytest.raises(ValueError):
            fit_xy([1, 2, 3], [1, 2, 3], "cubic-spline")

    def _record(self, x, y, capped=0, h="a"):
        return ExperimentRecord(
            "lattice-sensing", "exponential:rate=1", None, None, "m", x, 10, y, 0.0,
            {"capped": capped, "config_hash": h},
        )

    def test_capped_records_excluded_from_exp_growth(self):
        recs = [self._record(m, math.exp(m)) for m in (1, 2, 3, 4)]
        recs.append(self._record(5, 60.0, capped=10))  # censored, off-curve
        f = fit(recs, "exp-growth")
        assert f.n_points == 4
        assert f.exponent_or_rate == pytest.approx(1.0)

    def test_mixed_hash_aggregation_rejected(self):
        recs = [self._record(1, 1.0, h="a"), self._record(2, 2.0, h="b"),
                self._record(3, 3.0, h="a")]
        with pytest.raises(ValueError, match="different specs"):
            fit(recs, "linear")


class TestWorkloadReport:
    def test_synthetic_exponents(self):
        recs = []
        for S in (2.0, 4.0, 8.0):
            recs.append(ExperimentRecord(
                "workload", "bernoulli:p=0.5", 1.0, 1.0, "S", S, 5,
                S**4 / 2.0, 0.0,
                {"relax_per_distance": S**3 / 2.0, "visits_per_distance": 1.0},
            ))
        rep = workload_report(recs)
        assert rep["relax_per_call"].exponent_or_rate == pytest.approx(4.0)
        assert rep["relax_per_distance"].exponent_or_rate == pytest.approx(3.0)
        assert abs(rep["visits_per_distance"].exponent_or_rate) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            workload_report([])


class TestCsvRoundtrip:
    def spec_and_records(self):
        spec = make_spec("lattice-mean-reward", "exponential:rate=1", "n", [20, 40], 10, seed=11)
        return spec, run(spec)

    def test_roundtrip(self, tmp_path):
        spec, recs = self.spec_and_records()
        path = tmp_path / "out.csv"
        write_records(path, recs, spec)
        back = read_records(path)
        assert [(r.sweep_value, r.mean, r.stderr, r.trials) for r in back] == \
            [(float(r.sweep_value), r.mean, r.stderr, r.trials) for r in recs]
        sidecar = json.loads((tmp_path / "out.csv.json").read_text())
        assert sidecar["config_hash"] == config_hash(spec)
        assert sidecar["spec"]["family"] == "lattice-mean-reward"

    def test_bitwise_identical_reruns(self, tmp_path):
        spec, recs = self.spec_and_records()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_records(a, run(spec, workers=1), spec)
        write_records(b, run(spec, workers=3), spec)
        assert a.read_bytes() == b.read_bytes()

    def test_schema_header(self, tmp_path):
        spec, recs = self.spec_and_records()
        path = tmp_path / "out.csv"
        write_records(path, recs, spec)
        header = path.read_text().splitlines()[0]
        assert header == "family,dist,lambda,alpha,sweep_name,sweep_value,trials,mean,stderr,extra_json"

    def test_mixed_hash_write_rejected(self, tmp_path):
        _, recs = self.spec_and_records()
        recs[0].extra["config_hash"] = "zzz"
        with pytest.raises(ValueError):
            write_records(tmp_path / "bad.csv", recs)

    def test_read_rejects_wrong_schema(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="schema"):
            read_records(p)
