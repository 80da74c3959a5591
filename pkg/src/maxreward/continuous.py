"""Maximum-reward trajectory planning over continuous Poisson fields.

The reachability relation is a closed cone: target t is reachable from state
s iff t.p1 >= s.x1 and |t.p2 - s.x2| <= alpha * (t.p1 - s.x1). Planning is a
longest-path DP on the induced DAG. Two implementations exist: an O(N^2)
pair scan whose examination count feeds the workload model, and an
O(N log N) dominance DP used by the Monte-Carlo estimators (value only).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .distributions import RewardDistribution, SeededRng
from .poisson_field import Cone, MarkedPointField, StripLazyField, Target, generate

__all__ = [
    "RobotState",
    "ContinuousPlan",
    "WorkloadCounters",
    "reachable",
    "optimal_plan",
    "optimal_reward_fast",
    "receding_horizon_plan",
    "estimate_continuous_r_star",
    "dump_plans",
    "load_plans",
]


@dataclass(frozen=True)
class RobotState:
    x1: float
    x2: float


@dataclass
class ContinuousPlan:
    visited: list[Target]
    total_reward: float
    end_state: RobotState
    metadata: dict = dc_field(default_factory=dict)


@dataclass
class WorkloadCounters:
    dp_relaxations: int = 0
    planner_calls: int = 0
    targets_visited: int = 0
    distance: float = 0.0

    def merge(self, other: "WorkloadCounters") -> "WorkloadCounters":
        return WorkloadCounters(
            self.dp_relaxations + other.dp_relaxations,
            self.planner_calls + other.planner_calls,
            self.targets_visited + other.targets_visited,
            self.distance + other.distance,
        )


def reachable(state: RobotState, target: Target, alpha: float) -> bool:
    """Closed-cone feasibility; boundary targets are admissible (bang-bang control)."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    dx = target.p1 - state.x1
    return dx >= 0.0 and abs(target.p2 - state.x2) <= alpha * dx


def _plan_window(p1, p2, r, start: RobotState, alpha: float, horizon: float):
    """O(N^2) chain DP over one window; returns (visited indices, reward, relaxations)."""
    val, parent, relax = _kernels.chain_dp_pairs(
        p1, p2, r, start.x1, start.x2, alpha, horizon
    )
    if val.shape[0] == 0 or not np.isfinite(val).any():
        return [], 0.0, int(relax)
    j = int(np.argmax(np.where(np.isfinite(val), val, -np.inf)))
    chain = []
    while j >= 0:
        chain.append(j)
        j = int(parent[j])
    chain.reverse()
    return chain, float(val[chain[-1]]), int(relax)


def optimal_plan(
    field: MarkedPointField, start: RobotState, horizon_L: float, alpha: float
) -> ContinuousPlan:
    """Maximum-reward feasible target chain with p1 in (start.x1, start.x1 + horizon_L].

    Every ordered target pair in the window is examined once; the examination
    count is reported in metadata["dp_relaxations"].
    """
    lo = np.searchsorted(field.p1, start.x1, side="right")
    if math.isinf(horizon_L):
        hi = len(field.p1)
    else:
        hi = np.searchsorted(field.p1, start.x1 + horizon_L, side="right")
    p1 = field.p1[lo:hi]
    p2 = field.p2[lo:hi]
    r = field.rewards[lo:hi]
    chain, reward, relax = _plan_window(p1, p2, r, start, alpha, np.inf)
    visited = [Target(float(p1[k]), float(p2[k]), float(r[k])) for k in chain]
    end_x1 = start.x1 + horizon_L if math.isfinite(horizon_L) else (
        visited[-1].p1 if visited else start.x1
    )
    end_x2 = visited[-1].p2 if visited else start.x2
    return ContinuousPlan(
        visited=visited,
        total_reward=reward,
        end_state=RobotState(end_x1, end_x2),
        metadata={"dp_relaxations": relax, "exit_rule": "hold-x2"},
    )


def optimal_reward_fast(p1, p2, alpha: float, rewards) -> float:
    """Value of the optimal chain from the origin state (0, 0), O(N log N).

    Valid only when every target is origin-feasible (cone-generated fields).
    In the sheared coordinates a = p2 - alpha*p1, b = p2 + alpha*p1 the
    predecessor relation becomes 2-D dominance (a_s >= a_t, b_s <= b_t).
    """
    n = p1.shape[0]
    if n == 0:
        return 0.0
    a = p2 - alpha * p1
    b = p2 + alpha * p1
    # sort by b ascending, ties by a descending, so earlier entries are
    # exactly the dominance-eligible predecessors
    order = np.lexsort((-a, b))
    ranks = np.empty(n, dtype=np.int64)
    # descending-a rank; equal a broken by ascending b so boundary-feasible
    # predecessors land at lower ranks
    ranks[np.lexsort((b, -a))] = np.arange(n)
    return float(_kernels.chain_dp_fast(ranks[order], rewards[order], n))


def _strip_window(field, x1: float, depth: float, k: int):
    if isinstance(field, StripLazyField):
        if field.depth != depth:
            raise ValueError("lazy field strip depth must equal the sensing range")
        return field.strip(k)
    lo = np.searchsorted(field.p1, x1, side="right")
    hi = np.searchsorted(field.p1, x1 + depth, side="right")
    return field.p1[lo:hi], field.p2[lo:hi], field.rewards[lo:hi]


def receding_horizon_plan(
    field, start: RobotState, L: float, S: float, alpha: float
) -> tuple[ContinuousPlan, WorkloadCounters, list[float]]:
    """Iterated limited-sensing planning: ceil(L/S) strips of depth S.

    Each iteration restricts the visible strip to cone-feasible targets, runs
    the pair-scan DP, executes the chain, then advances x1 by S holding x2 at
    the last visited target's lateral position. Accepts a MarkedPointField or
    a StripLazyField (strip depth S, start at the origin).
    """
    if not S > 0:
        raise ValueError("sensing range S must be > 0")
    n_strips = math.ceil(L / S)
    state = start
    counters = WorkloadCounters(distance=n_strips * S)
    visited: list[Target] = []
    per_iteration: list[float] = []
    for k in range(n_strips):
        x1 = start.x1 + k * S
        p1, p2, r = _strip_window(field, x1, S, k)
        feas = np.abs(p2 - state.x2) <= alpha * (p1 - state.x1)
        p1, p2, r = p1[feas], p2[feas], r[feas]
        chain, reward, relax = _plan_window(p1, p2, r, state, alpha, np.inf)
        counters.planner_calls += 1
        counters.dp_relaxations += relax
        counters.targets_visited += len(chain)
        visited.extend(Target(float(p1[i]), float(p2[i]), float(r[i])) for i in chain)
        per_iteration.append(reward)
        state = RobotState(x1 + S, visited[-1].p2 if visited else state.x2)
    plan = ContinuousPlan(
        visited=visited,
        total_reward=float(sum(per_iteration)),
        end_state=state,
        metadata={"exit_rule": "hold-x2", "S": S},
    )
    return plan, counters, per_iteration


def run_until_suboptimal_continuous(
    lam: float,
    dist: RewardDistribution,
    alpha: float,
    S: float,
    threshold: float,
    rng: SeededRng,
    max_distance: float = 1e4,
) -> tuple[float, bool]:
    """Strip-by-strip planning until the first strip with T_i / S < threshold.

    The failing strip counts as traveled. Returns (distance, capped flag);
    the field is strip-lazy, so memory stays bounded however far the run goes.
    """
    if not S > 0:
        raise ValueError("sensing range S must be > 0")
    field = StripLazyField(lam, alpha, dist, rng.seed, S, stream_id=rng.stream_id)
    state = RobotState(0.0, 0.0)
    max_strips = max(int(max_distance // S), 1)
    for k in range(max_strips):
        x1 = k * S
        p1, p2, r = field.strip(k)
        feas = np.abs(p2 - state.x2) <= alpha * (p1 - state.x1)
        chain, reward, _ = _plan_window(p1[feas], p2[feas], r[feas], state, alpha, np.inf)
        x2 = p2[feas][chain[-1]] if chain else state.x2
        state = RobotState(x1 + S, float(x2))
        if reward / S < threshold:
            return (k + 1) * S, False
    return max_strips * S, True


def estimate_continuous_r_star(
    lam: float,
    dist: RewardDistribution,
    alpha: float,
    L: float,
    trials: int,
    rng: SeededRng,
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of T*(L)/L over independent fields.

    Uses the O(N log N) DP; on cone fields from the origin it returns the
    same value as optimal_plan (asserted by the equivalence tests).
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    region = Cone(L, alpha)
    values = np.empty(trials)
    for t in range(trials):
        f = generate(lam, region, dist, rng.substream(t))
        values[t] = optimal_reward_fast(f.p1, f.p2, alpha, f.rewards) / L
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(trials))


def dump_plans(path, records: list[dict]):
    """JSON lines, one plan per trial: {seed, params, total_reward, visited, counters}."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_plans(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
