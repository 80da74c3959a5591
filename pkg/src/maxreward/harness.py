"""Monte-Carlo experiment orchestration: sweeps, fits, CSV emission.

Every experiment is fully described by an ExperimentSpec; identical specs
(including the seed) produce bitwise-identical CSV output at any parallelism
degree, because each trial draws from its own (seed, stream) pair and
reduction order is fixed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np
from scipy import stats

from .bayes import compare_ugs_strategies
from .continuous import (
    RobotState,
    estimate_continuous_r_star,
    receding_horizon_plan,
    run_until_suboptimal_continuous,
)
from .distributions import Constant, Pareto, SeededRng, parse_distribution
from .lattice import (
    StoppingRule,
    estimate_r_star,
    r_star_closed_form,
    run_until_suboptimal,
)
from .poisson_field import StripLazyField

__all__ = [
    "FAMILIES",
    "ExperimentSpec",
    "ExperimentRecord",
    "FitResult",
    "run",
    "fit",
    "fit_xy",
    "workload_report",
    "write_records",
    "read_records",
    "config_hash",
]

FAMILIES = (
    "lattice-mean-reward",
    "lattice-sensing",
    "continuous-mean-reward",
    "continuous-sensing",
    "agility",
    "workload",
    "ugs",
)

CSV_COLUMNS = (
    "family",
    "dist",
    "lambda",
    "alpha",
    "sweep_name",
    "sweep_value",
    "trials",
    "mean",
    "stderr",
    "extra_json",
)

# stream layout per sweep point: trials at the base, pre-estimation streams
# above them, so trial counts up to the offset never collide
_POINT_STRIDE = 1_000_000
_BASELINE_OFFSET = 900_000


@dataclass(frozen=True)
class ExperimentSpec:
    family: str
    dist: str
    sweep_name: str
    sweep_values: tuple
    trials: int
    lam: float | None = None
    alpha: float | None = None
    delta: float = 0.1
    seed: int = 0
    extra: tuple = ()  # sorted (key, value) pairs; dict-like free parameters

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.sweep_values) == 0:
            raise ValueError("sweep must be non-empty")
        parse_distribution(self.dist)
        if self.family not in ("lattice-mean-reward", "lattice-sensing"):
            if self.lam is None or self.alpha is None:
                raise ValueError(f"{self.family} requires lambda and alpha")

    def params(self) -> dict:
        return dict(self.extra)


def make_spec(family, dist, sweep_name, sweep_values, trials, **kw) -> ExperimentSpec:
    extra = tuple(sorted(kw.pop("extra", {}).items()))
    return ExperimentSpec(
        family, dist, sweep_name, tuple(sweep_values), trials, extra=extra, **kw
    )


@dataclass
class ExperimentRecord:
    family: str
    dist: str
    lam: float | None
    alpha: float | None
    sweep_name: str
    sweep_value: float | str
    trials: int
    mean: float
    stderr: float
    extra: dict = dc_field(default_factory=dict)


def config_hash(spec: ExperimentSpec) -> str:
    payload = json.dumps(asdict(spec), sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _pool_map(fn, count: int, workers: int) -> None:
    """Run fn(t) for t in range(count); fn writes into preallocated storage."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fn, range(count)))
    else:
        for t in range(count):
            fn(t)


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    if values.shape[0] < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.shape[0]))


def run(spec: ExperimentSpec, workers: int = 1) -> list[ExperimentRecord]:
    runner = {
        "lattice-mean-reward": _run_lattice_mean,
        "lattice-sensing": _run_lattice_sensing,
        "continuous-mean-reward": _run_continuous_mean,
        "continuous-sensing": _run_continuous_sensing,
        "agility": _run_agility,
        "workload": _run_workload,
        "ugs": _run_ugs,
    }[spec.family]
    records = runner(spec, workers)
    h = config_hash(spec)
    for rec in records:
        rec.extra["config_hash"] = h
    return records


def _record(spec, value, trials, mean, stderr, extra=None, lam=None, alpha=None):
    return ExperimentRecord(
        family=spec.family,
        dist=spec.dist,
        lam=spec.lam if lam is None else lam,
        alpha=spec.alpha if alpha is None else alpha,
        sweep_name=spec.sweep_name,
        sweep_value=value,
        trials=trials,
        mean=mean,
        stderr=stderr,
        extra=extra or {},
    )


def _run_lattice_mean(spec, workers):
    dist = parse_distribution(spec.dist)
    records = []
    for i, n in enumerate(spec.sweep_values):
        rng = SeededRng(spec.seed, i * _POINT_STRIDE)
        mean, err = estimate_r_star(dist, int(n), spec.trials, rng, workers=workers)
        records.append(_record(spec, int(n), spec.trials, mean, err))
    return records


def _sensing_baseline(spec, dist, m, i):
    """Per-point stopping baseline: closed form when it exists, the growing
    R*(m^1.1) pre-estimate for heavy tails, an empirical constant otherwise."""
    params = spec.params()
    mode = params.get("baseline", None)
    closed = r_star_closed_form(dist)
    if mode is None:
        mode = "closed-form" if closed is not None else (
            "growing" if isinstance(dist, Pareto) else "empirical"
        )
    if mode == "closed-form":
        if closed is None:
            raise ValueError(
                "no closed-form stopping baseline for this distribution; "
                "heavy tails need the growing R*(m^1.1) baseline variant"
            )
        return mode, closed
    rng = SeededRng(spec.seed, i * _POINT_STRIDE + _BASELINE_OFFSET)
    if mode == "growing":
        n_pre = max(int(round(m ** 1.1)), 2)
        pre_trials = int(params.get("baseline_trials", 400))
        return mode, estimate_r_star(dist, n_pre, pre_trials, rng)[0]
    if mode == "empirical":
        n_pre = int(params.get("baseline_n", 10_000))
        pre_trials = int(params.get("baseline_trials", 2000))
        return mode, estimate_r_star(dist, n_pre, pre_trials, rng)[0]
    raise ValueError(f"unknown baseline mode {mode!r}")


def _run_lattice_sensing(spec, workers):
    dist = parse_distribution(spec.dist)
    max_steps = int(spec.params().get("max_steps", 10**6))
    records = []
    for i, m in enumerate(spec.sweep_values):
        m = int(m)
        mode, baseline = _sensing_baseline(spec, dist, m, i)
        rule = StoppingRule(delta=spec.delta, baseline=baseline, max_steps=max_steps)
        distances = np.empty(spec.trials)
        capped = np.zeros(spec.trials, dtype=bool)

        def one(t, m=m, rule=rule):
            out = run_until_suboptimal(dist, m, rule, SeededRng(spec.seed, i * _POINT_STRIDE + t))
            distances[t] = out.distance
            capped[t] = out.capped

        _pool_map(one, spec.trials, workers)
        mean, err = _mean_stderr(distances)
        records.append(
            _record(
                spec, m, spec.trials, mean, err,
                extra={
                    "baseline": baseline,
                    "baseline_mode": mode,
                    "capped": int(capped.sum()),
                    "max_steps": max_steps,
                },
            )
        )
    return records


def _run_continuous_mean(spec, workers):
    dist = parse_distribution(spec.dist)
    records = []
    for i, L in enumerate(spec.sweep_values):
        rng = SeededRng(spec.seed, i * _POINT_STRIDE)
        mean, err = estimate_continuous_r_star(
            spec.lam, dist, spec.alpha, float(L), spec.trials, rng
        )
        records.append(_record(spec, float(L), spec.trials, mean, err))
    return records


def _run_agility(spec, workers):
    dist = parse_distribution(spec.dist)
    L = float(spec.params().get("L", 30.0))
    records = []
    for i, alpha in enumerate(spec.sweep_values):
        rng = SeededRng(spec.seed, i * _POINT_STRIDE)
        mean, err = estimate_continuous_r_star(
            spec.lam, dist, float(alpha), L, spec.trials, rng
        )
        records.append(
            _record(spec, float(alpha), spec.trials, mean, err,
                    extra={"L": L}, alpha=float(alpha))
        )
    return records


def _run_continuous_sensing(spec, workers):
    dist = parse_distribution(spec.dist)
    params = spec.params()
    max_distance = float(params.get("max_distance", 1e4))
    records = []
    for i, S in enumerate(spec.sweep_values):
        S = float(S)
        if "baseline" in params:
            baseline = float(params["baseline"])
            mode = "fixed"
        elif isinstance(dist, Constant):
            # unit-reward rate limit sqrt(2 * lambda * alpha), scaled by the mark
            baseline = dist.c * math.sqrt(2.0 * spec.lam * spec.alpha)
            mode = "closed-form"
        else:
            rng = SeededRng(spec.seed, i * _POINT_STRIDE + _BASELINE_OFFSET)
            pre_L = float(params.get("baseline_L", 200.0))
            pre_trials = int(params.get("baseline_trials", 100))
            baseline = estimate_continuous_r_star(
                spec.lam, dist, spec.alpha, pre_L, pre_trials, rng
            )[0]
            mode = "empirical"
        threshold = baseline - spec.delta
        distances = np.empty(spec.trials)
        capped = np.zeros(spec.trials, dtype=bool)

        def one(t, S=S, threshold=threshold):
            d, c = run_until_suboptimal_continuous(
                spec.lam, dist, spec.alpha, S, threshold,
                SeededRng(spec.seed, i * _POINT_STRIDE + t),
                max_distance=max_distance,
            )
            distances[t] = d
            capped[t] = c

        _pool_map(one, spec.trials, workers)
        mean, err = _mean_stderr(distances)
        records.append(
            _record(
                spec, S, spec.trials, mean, err,
                extra={
                    "baseline": baseline,
                    "baseline_mode": mode,
                    "capped": int(capped.sum()),
                    "max_distance": max_distance,
                },
            )
        )
    return records


def _run_workload(spec, workers):
    dist = parse_distribution(spec.dist)
    params = spec.params()
    strips = int(params.get("strips", 10))
    records = []
    for i, value in enumerate(spec.sweep_values):
        if spec.sweep_name == "S":
            S, alpha = float(value), spec.alpha
        elif spec.sweep_name == "alpha":
            S, alpha = float(params.get("S", 8.0)), float(value)
        else:
            raise ValueError("workload sweeps over 'S' or 'alpha'")
        relax = np.empty(spec.trials)
        visits = np.empty(spec.trials)

        def one(t, S=S, alpha=alpha):
            rng = SeededRng(spec.seed, i * _POINT_STRIDE + t)
            field = StripLazyField(spec.lam, alpha, dist, rng.seed, S, stream_id=rng.stream_id)
            _, counters, _ = receding_horizon_plan(
                field, RobotState(0.0, 0.0), strips * S, S, alpha
            )
            relax[t] = counters.dp_relaxations
            visits[t] = counters.targets_visited

        _pool_map(one, spec.trials, workers)
        distance = strips * S
        per_call, per_call_err = _mean_stderr(relax / strips)
        records.append(
            _record(
                spec, float(value), spec.trials, per_call, per_call_err,
                extra={
                    "S": S,
                    "strips": strips,
                    "relax_per_distance": float(relax.mean() / distance),
                    "visits_per_distance": float(visits.mean() / distance),
                    "visits_per_distance_stderr": float(
                        visits.std(ddof=1) / distance / math.sqrt(spec.trials)
                    ) if spec.trials > 1 else 0.0,
                },
                alpha=alpha,
            )
        )
    return records


def _run_ugs(spec, workers):
    params = spec.params()
    mean_precision = float(params.get("mean_precision", 1.0))
    records = []
    for i, L in enumerate(spec.sweep_values):
        rng = SeededRng(spec.seed, i * _POINT_STRIDE)
        cmp = compare_ugs_strategies(
            spec.lam, mean_precision, float(L), spec.alpha, spec.trials, rng
        )
        common = {
            "checkpoints": cmp.checkpoints,
            "gap_mean": cmp.gap_mean,
            "gap_stderr": cmp.gap_stderr,
            "L": float(L),
        }
        for name, gain, err, var in (
            ("homogeneous", cmp.homogeneous_gain, cmp.homogeneous_gain_stderr,
             cmp.homogeneous_variance),
            ("randomized", cmp.randomized_gain, cmp.randomized_gain_stderr,
             cmp.randomized_variance),
        ):
            rec = _record(spec, float(L), spec.trials, gain, err,
                          extra=dict(common, strategy=name, posterior_variance=var))
            records.append(rec)
    return records


@dataclass
class FitResult:
    model: str
    exponent_or_rate: float
    r_squared: float
    ci95: tuple[float, float]
    intercept: float = 0.0
    n_points: int = 0


def fit_xy(x, y, model: str) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[0] < 3:
        raise ValueError("need at least 3 points to fit")
    if np.all(x == x[0]):
        raise ValueError("degenerate (constant) abscissa")
    if model == "power-law":
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("power-law fit needs positive data")
        xs, ys = np.log(x), np.log(y)
    elif model == "exp-growth":
        if np.any(y <= 0):
            raise ValueError("exp-growth fit needs positive ordinates")
        xs, ys = x, np.log(y)
    elif model in ("linear", "constant"):
        xs, ys = x, y
    else:
        raise ValueError(f"unknown fit model {model!r}")
    res = stats.linregress(xs, ys)
    df = x.shape[0] - 2
    half = stats.t.ppf(0.975, df) * res.stderr if df > 0 else math.inf
    return FitResult(
        model=model,
        exponent_or_rate=float(res.slope),
        r_squared=float(res.rvalue**2),
        ci95=(float(res.slope - half), float(res.slope + half)),
        intercept=float(res.intercept),
        n_points=int(x.shape[0]),
    )


def fit(records: list[ExperimentRecord], model: str) -> FitResult:
    """Fit mean vs sweep_value. Cap-censored stopping records are excluded
    from exponential-growth fits (right censoring would flatten the slope)."""
    hashes = {r.extra.get("config_hash") for r in records}
    if len(hashes) > 1:
        raise ValueError("records from different specs cannot be aggregated")
    used = [
        r
        for r in records
        if not (model == "exp-growth" and r.extra.get("capped", 0) > 0)
    ]
    return fit_xy([r.sweep_value for r in used], [r.mean for r in used], model)


def workload_report(records: list[ExperimentRecord]) -> dict[str, FitResult]:
    """Power-law fits of the workload counters against the sweep variable."""
    if not records:
        raise ValueError("no records")
    x = [r.sweep_value for r in records]
    out = {
        "relax_per_call": fit_xy(x, [r.mean for r in records], "power-law"),
        "relax_per_distance": fit_xy(
            x, [r.extra["relax_per_distance"] for r in records], "power-law"
        ),
        "visits_per_distance": fit_xy(
            x, [r.extra["visits_per_distance"] for r in records], "power-law"
        ),
    }
    return out


def _csv_row(rec: ExperimentRecord) -> list:
    return [
        rec.family,
        rec.dist,
        "" if rec.lam is None else repr(float(rec.lam)),
        "" if rec.alpha is None else repr(float(rec.alpha)),
        rec.sweep_name,
        rec.sweep_value if isinstance(rec.sweep_value, str) else repr(float(rec.sweep_value)),
        rec.trials,
        repr(float(rec.mean)),
        repr(float(rec.stderr)),
        json.dumps(rec.extra, sort_keys=True),
    ]


def _git_version() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=10,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def write_records(path, records: list[ExperimentRecord], spec: ExperimentSpec = None):
    """CSV plus a JSON sidecar (<path>.json) echoing the effective spec.

    Timestamps live only in the sidecar; the CSV bytes depend on nothing but
    the records.
    """
    hashes = {r.extra.get("config_hash") for r in records}
    if len(hashes) > 1:
        raise ValueError("records from different specs cannot be written together")
    order = sorted(range(len(records)), key=lambda k: (str(records[k].sweep_value),
                                                       records[k].extra.get("strategy", ""), k))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for k in order:
            w.writerow(_csv_row(records[k]))
    sidecar = {
        "spec": asdict(spec) if spec is not None else None,
        "config_hash": config_hash(spec) if spec is not None else hashes.pop(),
        "version": _git_version(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True, default=str)


def read_records(path) -> list[ExperimentRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV schema {reader.fieldnames}")
        for row in reader:
            try:
                sweep_value = float(row["sweep_value"])
            except ValueError:
                sweep_value = row["sweep_value"]
            records.append(
                ExperimentRecord(
                    family=row["family"],
                    dist=row["dist"],
                    lam=float(row["lambda"]) if row["lambda"] else None,
                    alpha=float(row["alpha"]) if row["alpha"] else None,
                    sweep_name=row["sweep_name"],
                    sweep_value=sweep_value,
                    trials=int(row["trials"]),
                    mean=float(row["mean"]),
                    stderr=float(row["stderr"]),
                    extra=json.loads(row["extra_json"]),
                )
            )
    return records
