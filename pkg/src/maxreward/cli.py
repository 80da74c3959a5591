"""Command-line front end for the experiment harness.

Exit codes: 0 success, 1 configuration error, 2 acceptance-check failure
(only with --assert). Progress goes to stderr; data goes to files, so the
standard output stays pipeline-clean.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, oracles
from .continuous import RobotState, optimal_plan, dump_plans, load_plans
from .distributions import SeededRng, parse_distribution
from .lattice import LatticeField, optimal_total_reward, r_star_closed_form
from .bayes import GaussianBelief, Measurement, update
from .poisson_field import Cone, generate
from .harness import ExperimentSpec, make_spec

OUTPUT_DIR_ENV = "SIM_OUTPUT_DIR"


def _progress(msg: str):
    print(msg, file=sys.stderr, flush=True)


class ConfigError(Exception):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in str(text).split(","))
    except ValueError as e:
        raise ConfigError(f"bad numeric list {text!r}") from e


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in str(text).split(","))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="config override, applied after the file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--out", help="CSV output path")
        p.add_argument("--output-dir", default=None,
                       help=f"defaults to ${OUTPUT_DIR_ENV} or the working directory")
        p.add_argument("--parallelism", type=int, default=1)
        p.add_argument("--assert", dest="check", action="store_true",
                       help="exit 2 when the family's acceptance check fails")

    p = sub.add_parser("lattice-mean-reward")
    common(p)
    p.add_argument("--dist", default="exponential:rate=1")
    p.add_argument("--n", default="1000", help="comma-separated sweep over path length")
    p.add_argument("--tol", type=float, default=0.1,
                   help="assert: allowed |mean - (mu+sigma)| at the largest n")

    p = sub.add_parser("lattice-sensing")
    common(p)
    p.add_argument("--dist", default="exponential:rate=1")
    p.add_argument("--m", default="4,6,8,10,12,14,16", help="sensing-range sweep")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--baseline", choices=["closed-form", "growing", "empirical"])
    p.add_argument("--max-steps", type=int, default=10**6)

    p = sub.add_parser("cont-mean-reward")
    common(p)
    p.add_argument("--dist", default="constant:c=1")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--L", default="100", help="comma-separated travel distances")
    p.add_argument("--dump", help="also write a JSONL plan dump (exact DP per trial)")

    p = sub.add_parser("cont-sensing")
    common(p)
    p.add_argument("--dist", default="constant:c=1")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--S", default="2,4,6,8", help="sensing-range sweep")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--max-distance", type=float, default=1e4)

    p = sub.add_parser("agility")
    common(p)
    p.add_argument("--dist", default="exponential:rate=1")
    p.add_argument("--lambda", dest="lam", type=float, default=10.0)
    p.add_argument("--L", type=float, default=30.0)
    p.add_argument("--alphas", default="0.25,0.5,1,2,4")

    p = sub.add_parser("workload")
    common(p)
    p.add_argument("--dist", default="bernoulli:p=0.5")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--S", default=None, help="sweep sensing range at fixed alpha")
    p.add_argument("--alphas", default=None, help="sweep alpha at fixed sensing range")
    p.add_argument("--fixed-S", dest="fixed_s", type=float, default=8.0,
                   help="sensing range used during an alpha sweep")
    p.add_argument("--strips", type=int, default=10)

    p = sub.add_parser("ugs")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--L", default="100")
    p.add_argument("--mean-precision", type=float, default=1.0)

    p = sub.add_parser("oracle-check")
    common(p)
    p.add_argument("--cases", type=int, default=200,
                   help="random instances per equivalence suite")

    p = sub.add_parser("replay")
    common(p)
    p.add_argument("dump", help="JSONL plan dump")
    p.add_argument("--index", type=int, default=0)

    return parser


def _apply_config(argv):
    """Two-phase parse: pull --config/--set first, feed them in as defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("--set", action="append", default=[])
    known, _ = pre.parse_known_args(argv[1:] if argv and not argv[0].startswith("-") else argv)
    defaults = {}
    if known.config:
        try:
            with open(known.config) as fh:
                defaults.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"unreadable config {known.config!r}: {e}") from e
    for item in known.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        defaults[key.replace("-", "_")] = value
    return defaults


def _out_path(args, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    base = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    return Path(base) / default_name


def _finish(args, spec, records, check_fn):
    path = _out_path(args, f"{spec.family}.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    harness.write_records(path, records, spec)
    _progress(f"wrote {len(records)} records to {path}")
    print(str(path))
    if args.check:
        ok, msg = check_fn(records)
        _progress(("PASS: " if ok else "FAIL: ") + msg)
        return 0 if ok else 2
    return 0


def _cmd_lattice_mean(args):
    spec = make_spec(
        "lattice-mean-reward", args.dist, "n", _int_list(args.n), args.trials,
        seed=args.seed,
    )
    records = harness.run(spec, workers=args.parallelism)

    def check(records):
        dist = parse_distribution(args.dist)
        closed = r_star_closed_form(dist)
        if closed is not None:
            last = max(records, key=lambda r: r.sweep_value)
            gap = abs(last.mean - closed)
            return gap <= args.tol, (
                f"mean {last.mean:.4f} vs closed form {closed:.4f} (|gap| {gap:.4f})"
            )
        f = harness.fit(records, "power-law")
        ok = abs(f.exponent_or_rate - 1.0 / 3.0) <= 0.10
        return ok, f"log-log slope {f.exponent_or_rate:.4f} vs 1/3"

    return _finish(args, spec, records, check)


def _cmd_lattice_sensing(args):
    extra = {"max_steps": args.max_steps}
    if args.baseline:
        extra["baseline"] = args.baseline
    spec = make_spec(
        "lattice-sensing", args.dist, "m", _int_list(args.m), args.trials,
        delta=args.delta, seed=args.seed, extra=extra,
    )
    records = harness.run(spec, workers=args.parallelism)

    def check(records):
        f = harness.fit(records, "exp-growth")
        return f.r_squared >= 0.9, f"semi-log r^2 {f.r_squared:.4f}"

    return _finish(args, spec, records, check)


def _cmd_cont_mean(args):
    spec = make_spec(
        "continuous-mean-reward", args.dist, "L", _float_list(args.L), args.trials,
        lam=args.lam, alpha=args.alpha, seed=args.seed,
    )
    records = harness.run(spec, workers=args.parallelism)
    if args.dump:
        _write_plan_dump(args, spec)

    def check(records):
        last = max(records, key=lambda r: r.sweep_value)
        target = math.sqrt(2.0 * args.lam)
        ok = abs(last.mean - target) <= 0.1 * target
        return ok, f"T(L)/L {last.mean:.4f} vs sqrt(2 lambda) {target:.4f}"

    return _finish(args, spec, records, check)


def _write_plan_dump(args, spec):
    dist = parse_distribution(args.dist)
    L = max(_float_list(args.L))
    rows = []
    for t in range(args.trials):
        rng = SeededRng(args.seed, t)
        f = generate(args.lam, Cone(L, args.alpha), dist, rng)
        plan = optimal_plan(f, RobotState(0.0, 0.0), L, args.alpha)
        rows.append({
            "seed": args.seed,
            "params": {"stream": t, "lambda": args.lam, "alpha": args.alpha,
                       "L": L, "dist": args.dist},
            "total_reward": plan.total_reward,
            "visited": [[p.p1, p.p2, p.reward] for p in plan.visited],
            "counters": plan.metadata,
        })
    dump_plans(args.dump, rows)
    _progress(f"dumped {len(rows)} plans to {args.dump}")


def _cmd_cont_sensing(args):
    spec = make_spec(
        "continuous-sensing", args.dist, "S", _float_list(args.S), args.trials,
        lam=args.lam, alpha=args.alpha, delta=args.delta, seed=args.seed,
        extra={"max_distance": args.max_distance},
    )
    records = harness.run(spec, workers=args.parallelism)

    def check(records):
        f = harness.fit(records, "exp-growth")
        return f.r_squared >= 0.9, f"semi-log r^2 {f.r_squared:.4f}"

    return _finish(args, spec, records, check)


def _cmd_agility(args):
    spec = make_spec(
        "agility", args.dist, "alpha", _float_list(args.alphas), args.trials,
        lam=args.lam, alpha=1.0, seed=args.seed, extra={"L": args.L},
    )
    records = harness.run(spec, workers=args.parallelism)

    def check(records):
        f = harness.fit(records, "power-law")
        ok = 0.45 <= f.exponent_or_rate <= 0.55
        return ok, f"power-law exponent {f.exponent_or_rate:.4f} vs 0.5"

    return _finish(args, spec, records, check)


def _cmd_workload(args):
    if (args.S is None) == (args.alphas is None):
        raise ConfigError("workload needs exactly one of --S or --alphas")
    if args.S is not None:
        sweep_name, values = "S", _float_list(args.S)
    else:
        sweep_name, values = "alpha", _float_list(args.alphas)
    spec = make_spec(
        "workload", args.dist, sweep_name, values, args.trials,
        lam=args.lam, alpha=args.alpha, seed=args.seed,
        extra={"strips": args.strips, "S": args.fixed_s},
    )
    records = harness.run(spec, workers=args.parallelism)

    def check(records):
        report = harness.workload_report(records)
        e_call = report["relax_per_call"].exponent_or_rate
        if sweep_name == "S":
            ok = abs(e_call - 4.0) <= 0.5
            return ok, f"per-call relaxations exponent {e_call:.3f} vs 4"
        ok = abs(e_call - 2.0) <= 0.4
        return ok, f"per-call relaxations exponent {e_call:.3f} vs 2"

    return _finish(args, spec, records, check)


def _cmd_ugs(args):
    spec = make_spec(
        "ugs", "exponential:rate=1", "L", _float_list(args.L), args.trials,
        lam=args.lam, alpha=args.alpha, seed=args.seed,
        extra={"mean_precision": args.mean_precision},
    )
    records = harness.run(spec, workers=args.parallelism)

    def check(records):
        rand = [r for r in records if r.extra.get("strategy") == "randomized"]
        ok = all(r.mean >= 2.0 for r in rand)
        gaps_ok = all(r.extra["gap_mean"] > 1.96 * r.extra["gap_stderr"] for r in rand)
        return ok and gaps_ok, (
            f"randomized gain {[round(r.mean, 3) for r in rand]}, "
            f"gap significance {'ok' if gaps_ok else 'FAILED'}"
        )

    return _finish(args, spec, records, check)


def _cmd_oracle_check(args):
    cases = args.cases
    rng = np.random.default_rng(args.seed)
    failures = 0

    for c in range(cases):
        n = int(rng.integers(2, 9))
        rewards = np.full((n, n), np.nan)
        for i in range(n):
            for j in range(n - i):
                rewards[i, j] = rng.exponential()
        f = LatticeField.from_array(rewards)
        dp_val, _ = optimal_total_reward(f, n)
        enum_val, _ = oracles.enumerate_lattice_max(f, n)
        if dp_val != enum_val:
            failures += 1
    _progress(f"lattice DP vs enumeration: {cases} cases, {failures} mismatches")

    for c in range(cases):
        n = int(rng.integers(0, 13))
        p1 = np.sort(rng.uniform(0.1, 10.0, n))
        p2 = rng.uniform(-5.0, 5.0, n)
        r = rng.exponential(size=n)
        alpha = float(rng.uniform(0.3, 3.0))
        field_p1 = p1
        plan = optimal_plan(
            _ArrayField(field_p1, p2, r), RobotState(0.0, 0.0), math.inf, alpha
        )
        enum_val, _ = oracles.enumerate_chain_max(p1, p2, r, RobotState(0.0, 0.0), alpha)
        if plan.total_reward != enum_val:
            failures += 1
    _progress(f"continuous DP vs enumeration: {cases} cases checked")

    for c in range(min(cases, 100)):
        prior = GaussianBelief(float(rng.normal()), float(rng.uniform(0.2, 5.0)))
        belief = prior
        ms = []
        for _ in range(int(rng.integers(1, 5))):
            m = Measurement(float(rng.normal(0, 3)), float(rng.uniform(0.2, 5.0)))
            ms.append((m.y, m.beta_i))
            belief = update(belief, m)
        mean, beta = oracles.grid_posterior(prior.mu, prior.beta, ms)
        if abs(mean - belief.mu) > 1e-6 * max(1.0, abs(belief.mu)) or \
           abs(beta - belief.beta) > 1e-6 * belief.beta:
            failures += 1
    _progress("Bayes update vs grid integration: checked")

    if failures:
        _progress(f"FAIL: {failures} oracle mismatches")
        return 2
    _progress("PASS: all oracle equivalences exact")
    return 0


class _ArrayField:
    """Minimal duck-typed field over raw arrays, for oracle checks and replay."""

    def __init__(self, p1, p2, rewards):
        order = np.argsort(p1, kind="stable")
        self.p1 = np.asarray(p1, dtype=float)[order]
        self.p2 = np.asarray(p2, dtype=float)[order]
        self.rewards = np.asarray(rewards, dtype=float)[order]


def _cmd_replay(args):
    rows = load_plans(args.dump)
    if not 0 <= args.index < len(rows):
        raise ConfigError(f"index {args.index} out of range for {len(rows)} plans")
    row = rows[args.index]
    p = row["params"]
    rng = SeededRng(row["seed"], p["stream"])
    f = generate(p["lambda"], Cone(p["L"], p["alpha"]), parse_distribution(p["dist"]), rng)
    plan = optimal_plan(f, RobotState(0.0, 0.0), p["L"], p["alpha"])
    match = plan.total_reward == row["total_reward"]
    _progress(
        f"replayed trial {args.index}: reward {plan.total_reward!r}, "
        f"recorded {row['total_reward']!r}, {'match' if match else 'MISMATCH'}"
    )
    print(repr(plan.total_reward))
    if args.check and not match:
        return 2
    return 0


_COMMANDS = {
    "lattice-mean-reward": _cmd_lattice_mean,
    "lattice-sensing": _cmd_lattice_sensing,
    "cont-mean-reward": _cmd_cont_mean,
    "cont-sensing": _cmd_cont_sensing,
    "agility": _cmd_agility,
    "workload": _cmd_workload,
    "ugs": _cmd_ugs,
    "oracle-check": _cmd_oracle_check,
    "replay": _cmd_replay,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _build_parser()
    try:
        defaults = _apply_config(argv)
        if defaults:
            for sp in parser._subparsers._group_actions[0].choices.values():
                sp.set_defaults(**{k: v for k, v in defaults.items()
                                   if any(a.dest == k for a in sp._actions)})
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        _progress(f"config error: {e}")
        return 1
    except (ValueError, OSError) as e:
        _progress(f"error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
