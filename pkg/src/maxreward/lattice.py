"""Maximum-reward paths on the 2-D directed regular lattice.

Exact dynamic programming over the triangular wedge (the last-passage
quantities T*(n), T*(v), R*(n)), the limited-sensing iterative planner, and
the stopping-rule runs used by the sensing-range experiments.

Conventions: a "path of n steps" crosses exactly n vertices including the
origin, so it ends on the layer |v| = n - 1. An iterative leg with sensing
range m collects exactly m vertex rewards; the first leg includes the origin,
later legs collect the m vertices strictly after their root (whose reward
belongs to the previous leg). Summed over n/m legs this covers one n-step
path, so T_iterative(n; m) <= T*(n) holds exactly per field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .distributions import (
    Exponential,
    Geometric,
    RewardDistribution,
    SeededRng,
    stream_key,
    vertex_uniforms,
)

__all__ = [
    "LatticeField",
    "LatticePlanResult",
    "StoppingRule",
    "StoppingOutcome",
    "optimal_total_reward",
    "optimal_reward_to_vertex",
    "shape_function_closed_form",
    "r_star_closed_form",
    "iterative_plan",
    "run_until_suboptimal",
    "estimate_r_star",
]


class LatticeField:
    """I.i.d. rewards on the wedge {v : v1 + v2 <= horizon}.

    Rewards are keyed by (seed, stream_id, vertex), so any sub-wedge of the
    same seed agrees with the full field.
    """

    def __init__(self, rewards: np.ndarray, horizon: int, dist=None, seed=None, stream_id=0):
        self.rewards = rewards
        self.horizon = horizon
        self.dist = dist
        self.seed = seed
        self.stream_id = stream_id

    @classmethod
    def from_dist(cls, dist: RewardDistribution, horizon: int, seed: int, stream_id: int = 0):
        size = horizon + 1
        i, j = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        u = vertex_uniforms(seed, stream_id, i, j)
        rewards = dist.ppf(u)
        rewards[i + j > horizon] = np.nan
        return cls(rewards, horizon, dist=dist, seed=seed, stream_id=stream_id)

    @classmethod
    def from_array(cls, rewards) -> "LatticeField":
        rewards = np.asarray(rewards, dtype=float)
        return cls(rewards, horizon=rewards.shape[0] - 1)

    def reward_at(self, v1: int, v2: int) -> float:
        return float(self.rewards[v1, v2])


@dataclass
class LatticePlanResult:
    total_reward: float
    per_leg_rewards: list[float]
    end_vertex: tuple[int, int]
    legs: int
    relaxation_count: int
    path: list[tuple[int, int]] = dc_field(default_factory=list)


@dataclass
class StoppingRule:
    """Stop once a leg's per-step reward drops below baseline - delta."""

    delta: float
    baseline: float
    max_steps: int = 10**6

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if not math.isfinite(self.baseline):
            raise ValueError("baseline must be finite")
        if not math.isfinite(self.max_steps):
            raise ValueError("max_steps must be finite")


@dataclass
class StoppingOutcome:
    distance: int
    capped: bool


def _leg_dp(field: LatticeField, i0: int, j0: int, m: int, include_root: bool):
    """DP for one leg; returns (reward, path excluding the root unless included, relaxations)."""
    last = m - 1 if include_root else m
    R = field.rewards
    V = np.full((last + 1, last + 1), -np.inf)
    V[0, 0] = R[i0, j0] if include_root else 0.0
    relax = 0
    for s in range(1, last + 1):
        for a in range(s + 1):
            b = s - a
            best = -np.inf
            if a > 0:
                best = V[a - 1, b]
                relax += 1
            if b > 0:
                relax += 1
                if V[a, b - 1] > best:
                    best = V[a, b - 1]
            V[a, b] = best + R[i0 + a, j0 + b]
    best = -np.inf
    best_a = last
    for a in range(last, -1, -1):  # tie-break: prefer the v1 direction
        if V[a, last - a] > best:
            best = V[a, last - a]
            best_a = a
    # backtrack
    path = []
    a, b = best_a, last - best_a
    while (a, b) != (0, 0):
        path.append((i0 + a, j0 + b))
        if a > 0 and (b == 0 or V[a - 1, b] >= V[a, b - 1]):
            a -= 1
        else:
            b -= 1
    if include_root:
        path.append((i0, j0))
    path.reverse()
    return best, path, relax


def optimal_total_reward(field: LatticeField, n: int):
    """Best total reward over monotone paths crossing exactly n vertices from the origin.

    Returns (reward, path); the origin's reward is included, and ties prefer
    the v1 predecessor so the argmax path is deterministic.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n - 1 > field.horizon:
        raise ValueError(f"n={n} exceeds the materialized horizon {field.horizon}")
    reward, path, _ = _leg_dp(field, 0, 0, n, include_root=True)
    return reward, path


def optimal_reward_to_vertex(field: LatticeField, v: tuple[int, int]) -> float:
    """DP value of the best monotone path from the origin ending exactly at v."""
    v1, v2 = v
    if v1 < 0 or v2 < 0 or v1 + v2 > field.horizon:
        raise ValueError(f"vertex {v} outside the wedge of horizon {field.horizon}")
    R = field.rewards
    V = np.empty(v2 + 1)
    for i in range(v1 + 1):
        for j in range(v2 + 1):
            if i == 0:
                V[j] = R[0, 0] if j == 0 else V[j - 1] + R[0, j]
            elif j == 0:
                V[0] = V[0] + R[i, 0]
            else:
                V[j] = max(V[j], V[j - 1]) + R[i, j]
    return float(V[v2])


def shape_function_closed_form(dist: RewardDistribution, v: tuple[int, int]):
    """Exact shape-function value g(v), or None when no closed form is known."""
    v1, v2 = v
    if isinstance(dist, Exponential):
        return (math.sqrt(v1) + math.sqrt(v2)) ** 2 / dist.rate
    if isinstance(dist, Geometric):
        p = dist.p
        return (v1 + 2.0 * math.sqrt(v1 * v2 * (1.0 - p)) + v2) / p
    return None


def r_star_closed_form(dist: RewardDistribution):
    """The large-n limit of E[T*(n)]/n, exactly mu + sigma for exponential and
    geometric rewards; None for every other family (open problem)."""
    if isinstance(dist, (Exponential, Geometric)):
        mean, std = dist.moments()
        return mean + std
    return None


def iterative_plan(field: LatticeField, m: int, n: int) -> LatticePlanResult:
    """Limited-sensing planner: n/m legs, each re-planning over the m-deep
    sub-wedge visible from the current vertex.

    With m == n this is exactly optimal_total_reward. The end vertex sits at
    |v| = n - 1 (paths of n vertices take n - 1 steps).
    """
    if m < 1:
        raise ValueError("sensing range m must be >= 1")
    if m > n:
        raise ValueError(f"sensing range m={m} exceeds total steps n={n}")
    legs_total, rem = divmod(n, m)
    leg_sizes = [m] * legs_total + ([rem] if rem else [])
    if n - 1 > field.horizon:
        raise ValueError(f"n={n} exceeds the materialized horizon {field.horizon}")
    i0 = j0 = 0
    per_leg = []
    path: list[tuple[int, int]] = []
    relax_total = 0
    for k, leg_m in enumerate(leg_sizes):
        reward, leg_path, relax = _leg_dp(field, i0, j0, leg_m, include_root=(k == 0))
        per_leg.append(float(reward))
        path.extend(leg_path)
        relax_total += relax
        i0, j0 = leg_path[-1]
    return LatticePlanResult(
        total_reward=float(sum(per_leg)),
        per_leg_rewards=per_leg,
        end_vertex=(i0, j0),
        legs=len(leg_sizes),
        relaxation_count=relax_total,
        path=path,
    )


def run_until_suboptimal(
    dist: RewardDistribution, m: int, rule: StoppingRule, rng: SeededRng
) -> StoppingOutcome:
    """Iterative legs on the lazily hashed field until the first leg with
    T_i / m < baseline - delta, or until the step cap.

    The failing leg counts as traveled; distance is legs * m.
    """
    if m < 1:
        raise ValueError("sensing range m must be >= 1")
    threshold = rule.baseline - rule.delta
    max_legs = max(rule.max_steps // m, 1)
    code, p0, p1 = dist._code()
    key = stream_key(rng.seed, rng.stream_id)
    legs, capped = _kernels.stopping_run(key, m, threshold, max_legs, code, p0, p1)
    return StoppingOutcome(distance=int(legs) * m, capped=bool(capped))


def _trial_values(dist, n, trials, seed, stream_offset, workers=1):
    code, p0, p1 = dist._code()
    values = np.empty(trials)

    def one(t):
        key = stream_key(seed, stream_offset + t)
        values[t] = _kernels.lattice_max(n, key, code, p0, p1)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(trials)))
    else:
        for t in range(trials):
            one(t)
    return values


def estimate_r_star(
    dist: RewardDistribution,
    n: int,
    trials: int,
    rng: SeededRng,
    workers: int = 1,
):
    """Monte-Carlo mean and standard error of R*(n) = T*(n)/n over independent fields."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    values = _trial_values(dist, n, trials, rng.seed, rng.stream_id, workers) / n
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(trials))
