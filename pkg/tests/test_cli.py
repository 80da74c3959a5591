import json

import pytest

from maxreward.cli import OUTPUT_DIR_ENV, main
from maxreward.harness import read_records


def run_cli(args):
    return main(list(args))


class TestSmokePaths:
    def test_lattice_mean_reward(self, tmp_path, capsys):
        out = tmp_path / "lat.csv"
        code = run_cli([
            "lattice-mean-reward", "--dist", "exponential:rate=1",
            "--n", "50,100", "--trials", "20", "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        recs = read_records(out)
        assert len(recs) == 2
        assert (tmp_path / "lat.csv.json").exists()
        assert capsys.readouterr().out.strip() == str(out)

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "results"))
        code = run_cli([
            "lattice-mean-reward", "--n", "30", "--trials", "5", "--seed", "1",
        ])
        assert code == 0
        assert (tmp_path / "results" / "lattice-mean-reward.csv").exists()

    def test_cont_mean_reward_with_dump_and_replay(self, tmp_path):
        out = tmp_path / "cont.csv"
        dump = tmp_path / "plans.jsonl"
        code = run_cli([
            "cont-mean-reward", "--dist", "exponential:rate=1",
            "--lambda", "1", "--alpha", "1", "--L", "10",
            "--trials", "5", "--seed", "3", "--out", str(out),
            "--dump", str(dump),
        ])
        assert code == 0
        assert len(dump.read_text().splitlines()) == 5
        code = run_cli(["replay", str(dump), "--index", "2", "--assert",
                        "--out", str(tmp_path / "r.csv")])
        assert code == 0

    def test_workload(self, tmp_path):
        out = tmp_path / "w.csv"
        code = run_cli([
            "workload", "--S", "3,6", "--trials", "5", "--strips", "4",
            "--seed", "2", "--out", str(out),
        ])
        assert code == 0
        recs = read_records(out)
        assert all("relax_per_distance" in r.extra for r in recs)

    def test_ugs(self, tmp_path):
        out = tmp_path / "u.csv"
        code = run_cli([
            "ugs", "--L", "10", "--trials", "10", "--seed", "4", "--out", str(out),
        ])
        assert code == 0
        assert len(read_records(out)) == 2

    def test_oracle_check(self):
        assert run_cli(["oracle-check", "--cases", "30", "--seed", "5"]) == 0


class TestConfigHandling:
    def test_config_file_defaults(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 7, "n": "40", "seed": 9}))
        out = tmp_path / "o.csv"
        code = run_cli([
            "lattice-mean-reward", "--config", str(cfg), "--out", str(out),
        ])
        assert code == 0
        recs = read_records(out)
        assert recs[0].trials == 7
        assert recs[0].sweep_value == 40.0

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 7}))
        out = tmp_path / "o.csv"
        code = run_cli([
            "lattice-mean-reward", "--config", str(cfg), "--trials", "3",
            "--n", "30", "--out", str(out),
        ])
        assert code == 0
        assert read_records(out)[0].trials == 3

    def test_set_overrides_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 7}))
        out = tmp_path / "o.csv"
        code = run_cli([
            "lattice-mean-reward", "--config", str(cfg), "--set", "trials=4",
            "--n", "30", "--out", str(out),
        ])
        assert code == 0
        assert read_records(out)[0].trials == 4

    def test_unreadable_config_exit_1(self, tmp_path):
        assert run_cli([
            "lattice-mean-reward", "--config", str(tmp_path / "missing.json"),
        ]) == 1

    def test_bad_dist_exit_1(self, tmp_path):
        assert run_cli([
            "lattice-mean-reward", "--dist", "cauchy:x=1",
            "--out", str(tmp_path / "x.csv"),
        ]) == 1

    def test_bad_override_exit_1(self):
        assert run_cli(["lattice-mean-reward", "--set", "notkeyvalue"]) == 1

    def test_workload_needs_one_sweep(self, tmp_path):
        assert run_cli(["workload", "--out", str(tmp_path / "x.csv")]) == 1
        assert run_cli([
            "workload", "--S", "2,4", "--alphas", "1,2",
            "--out", str(tmp_path / "x.csv"),
        ]) == 1


class TestDeterminismAndAssert:
    def test_parallelism_invariant_csv(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        base = ["lattice-mean-reward", "--n", "40,80", "--trials", "20", "--seed", "6"]
        assert run_cli(base + ["--parallelism", "1", "--out", str(a)]) == 0
        assert run_cli(base + ["--parallelism", "4", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_assert_pass_exit_0(self, tmp_path):
        code = run_cli([
            "lattice-mean-reward", "--dist", "exponential:rate=1", "--n", "400",
            "--trials", "150", "--seed", "8", "--assert", "--tol", "0.15",
            "--out", str(tmp_path / "a.csv"),
        ])
        assert code == 0

    def test_assert_fail_exit_2(self, tmp_path):
        # a tiny lattice cannot reach the asymptotic constant within 0.001
        code = run_cli([
            "lattice-mean-reward", "--dist", "exponential:rate=1", "--n", "10",
            "--trials", "30", "--seed", "8", "--assert", "--tol", "0.001",
            "--out", str(tmp_path / "a.csv"),
        ])
        assert code == 2
