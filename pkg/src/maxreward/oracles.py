"""Brute-force oracles: exhaustive enumeration and numerical integration.

These are the ground truth the fast implementations are tested against.
Exponential cost limits them to tiny instances, which is the point: they are
simple enough to trust by inspection.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .lattice import LatticeField
from .continuous import RobotState

__all__ = [
    "enumerate_lattice_max",
    "enumerate_chain_max",
    "grid_posterior",
]


def enumerate_lattice_max(field: LatticeField, n: int):
    """Max reward over all 2^(n-1) monotone n-vertex paths from the origin.

    Returns (reward, path). Ties resolved toward the lexicographically
    largest step sequence with the v1 step ordered first, matching the DP
    tie-break.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    best = -math.inf
    best_path = None
    # steps[k] == 0 is a v1 move; iterate v1-first so the first maximal path
    # found matches the DP's preference for the v1 predecessor
    for steps in itertools.product((0, 1), repeat=n - 1):
        i = j = 0
        total = field.reward_at(0, 0)
        path = [(0, 0)]
        for s in steps:
            i, j = (i + 1, j) if s == 0 else (i, j + 1)
            total += field.reward_at(i, j)
            path.append((i, j))
        if total > best:
            best = total
            best_path = path
    return best, best_path


def enumerate_chain_max(
    p1, p2, rewards, start: RobotState, alpha: float, horizon: float = math.inf
):
    """Max reward over every feasible target chain, by subset enumeration.

    A subset ordered by p1 is a valid chain iff its first target is
    cone-feasible from the start state and every consecutive pair satisfies
    the cone condition. Exponential in the target count; keep it small.
    """
    idx = [
        k
        for k in range(len(p1))
        if start.x1 < p1[k] <= start.x1 + horizon
    ]
    idx.sort(key=lambda k: p1[k])
    best = 0.0
    best_chain: tuple = ()
    for size in range(1, len(idx) + 1):
        for chain in itertools.combinations(idx, size):
            x1, x2 = start.x1, start.x2
            ok = True
            for k in chain:
                dx = p1[k] - x1
                if dx < 0 or abs(p2[k] - x2) > alpha * dx:
                    ok = False
                    break
                x1, x2 = p1[k], p2[k]
            if ok:
                total = sum(rewards[k] for k in chain)
                if total > best:
                    best = total
                    best_chain = chain
    return best, list(best_chain)


def grid_posterior(prior_mu, prior_beta, measurements, span=12.0, points=200001):
    """Posterior (mean, precision) by trapezoidal integration on a fine grid.

    measurements: iterable of (y, beta_i). The grid spans `span` prior
    standard deviations around a crude center so the posterior mass is
    captured even for far-out measurements.
    """
    ys = [y for y, _ in measurements]
    centers = [prior_mu] + ys
    lo = min(centers) - span / math.sqrt(prior_beta)
    hi = max(centers) + span / math.sqrt(prior_beta)
    theta = np.linspace(lo, hi, points)
    log_post = -0.5 * prior_beta * (theta - prior_mu) ** 2
    for y, beta_i in measurements:
        log_post += -0.5 * beta_i * (theta - y) ** 2
    log_post -= log_post.max()
    w = np.exp(log_post)
    z = np.trapezoid(w, theta)
    mean = np.trapezoid(w * theta, theta) / z
    var = np.trapezoid(w * (theta - mean) ** 2, theta) / z
    return float(mean), float(1.0 / var)
