"""Numba kernels for the hot loops: wedge DP, stopping runs, chain DP.

The per-vertex hash here must stay in sync with
``distributions.vertex_uniforms`` (same SplitMix64 finalizer and constants);
the tests assert bitwise agreement.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_K1 = np.uint64(0xA24BAED4963EE407)
_K2 = np.uint64(0x9FB21C651E98DF25)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)

DIST_CONSTANT = 0
DIST_BERNOULLI = 1
DIST_GEOMETRIC = 2
DIST_EXPONENTIAL = 3
DIST_PARETO = 4


@njit(cache=True, nogil=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def _vertex_u(key, i, j):
    x = np.uint64(i) * _K1 + np.uint64(j) * _K2
    h = _mix(_mix(x ^ key) + _GOLDEN)
    return np.float64(h >> np.uint64(11)) * (2.0 ** -53)


@njit(cache=True, nogil=True, inline="always")
def _ppf(code, p0, p1, u):
    if code == DIST_CONSTANT:
        return p0
    if code == DIST_BERNOULLI:
        return 1.0 if u >= 1.0 - p0 else 0.0
    if code == DIST_GEOMETRIC:
        if p0 >= 1.0:
            return 1.0
        k = np.ceil(np.log1p(-u) / np.log1p(-p0))
        return k if k > 1.0 else 1.0
    if code == DIST_EXPONENTIAL:
        return -np.log1p(-u) / p0
    # Pareto
    return p0 * (1.0 - u) ** (-1.0 / p1)


@njit(cache=True, nogil=True)
def vertex_reward(key, i, j, code, p0, p1):
    return _ppf(code, p0, p1, _vertex_u(key, i, j))


@njit(cache=True, nogil=True)
def lattice_max(n, key, code, p0, p1):
    """Max total reward over monotone paths crossing exactly n vertices from the origin.

    Row-rolling DP over the triangular wedge |v| <= n - 1; rewards come from
    the per-vertex hash, so memory is O(n).
    """
    V = np.empty(n, dtype=np.float64)
    best = -np.inf
    for i in range(n):
        width = n - i
        for j in range(width):
            r = _ppf(code, p0, p1, _vertex_u(key, i, j))
            if i == 0:
                v = r if j == 0 else V[j - 1] + r
            elif j == 0:
                v = V[0] + r
            else:
                up = V[j]
                left = V[j - 1]
                v = (up if up >= left else left) + r
            V[j] = v
        if V[width - 1] > best:
            best = V[width - 1]
    return best


@njit(cache=True, nogil=True)
def rect_corner_value(v1, v2, key, code, p0, p1):
    """DP value of the best monotone path from the origin to exactly (v1, v2)."""
    V = np.empty(v2 + 1, dtype=np.float64)
    for i in range(v1 + 1):
        for j in range(v2 + 1):
            r = _ppf(code, p0, p1, _vertex_u(key, i, j))
            if i == 0:
                V[j] = r if j == 0 else V[j - 1] + r
            elif j == 0:
                V[0] = V[0] + r
            else:
                up = V[j]
                left = V[j - 1]
                V[j] = (up if up >= left else left) + r
    return V[v2]


@njit(cache=True, nogil=True)
def _leg(key, i0, j0, m, include_root, code, p0, p1):
    """One planning leg rooted at absolute vertex (i0, j0).

    include_root: the leg path starts at the root and crosses m vertices
    counting the root (used for the first leg, whose root is the origin).
    Otherwise the leg crosses the m vertices strictly after the root, whose
    reward was collected by the previous leg.
    Returns (leg reward over exactly m vertices, end offset a, end offset b).
    """
    last = m - 1 if include_root else m
    V = np.full((last + 1, last + 1), -np.inf)
    if include_root:
        V[0, 0] = _ppf(code, p0, p1, _vertex_u(key, i0, j0))
    else:
        V[0, 0] = 0.0
    for s in range(1, last + 1):
        for a in range(s + 1):
            b = s - a
            up = V[a - 1, b] if a > 0 else -np.inf
            left = V[a, b - 1] if b > 0 else -np.inf
            prev = up if up >= left else left
            V[a, b] = prev + _ppf(code, p0, p1, _vertex_u(key, i0 + a, j0 + b))
    best = -np.inf
    best_a = last
    for a in range(last, -1, -1):  # prefer the v1 direction on ties
        if V[a, last - a] > best:
            best = V[a, last - a]
            best_a = a
    return best, best_a, last - best_a


@njit(cache=True, nogil=True)
def stopping_run(key, m, threshold, max_legs, code, p0, p1):
    """Iterative legs until the first leg with T_i / m < threshold.

    Returns (legs executed including the failing one, capped flag). The leg
    rewards come from the lazily hashed field, so memory stays O(m^2) no
    matter how far the run goes.
    """
    i0 = 0
    j0 = 0
    for leg in range(1, max_legs + 1):
        t, da, db = _leg(key, i0, j0, m, leg == 1, code, p0, p1)
        i0 += da
        j0 += db
        if t / m < threshold:
            return leg, False
    return max_legs, True


@njit(cache=True, nogil=True)
def chain_dp_pairs(p1, p2, r, x1, x2, alpha, horizon):
    """O(N^2) maximum-reward chain DP over targets sorted by p1.

    Every ordered pair (i < j) is examined once and counted, matching the
    planner workload model. Returns (values, parents, relaxations); parent
    -1 means the chain starts at the robot state, -2 unreachable.
    """
    n = p1.shape[0]
    val = np.full(n, -np.inf)
    parent = np.full(n, -2, dtype=np.int64)
    relax = 0
    for j in range(n):
        if p1[j] <= x1 or p1[j] > x1 + horizon:
            continue
        dx = p1[j] - x1
        if np.abs(p2[j] - x2) <= alpha * dx:
            val[j] = r[j]
            parent[j] = -1
        for i in range(j):
            relax += 1
            if val[i] == -np.inf:
                continue
            step = p1[j] - p1[i]
            if step <= 0.0:
                continue
            if np.abs(p2[j] - p2[i]) <= alpha * step:
                cand = val[i] + r[j]
                if cand > val[j]:
                    val[j] = cand
                    parent[j] = i
    return val, parent, relax


@njit(cache=True, nogil=True)
def chain_dp_fast(a_rank, r, n_ranks):
    """O(N log N) maximum-reward chain via a Fenwick max-tree.

    Inputs are pre-sorted by (b ascending, a descending); a_rank[t] is the
    rank of a_t among all a values in DESCENDING order (0 = largest a).
    A predecessor s of t needs a_s >= a_t and b_s <= b_t, i.e. a_rank[s] <=
    a_rank[t] among already-processed targets.
    """
    n = a_rank.shape[0]
    tree = np.zeros(n_ranks + 1, dtype=np.float64)
    best_total = 0.0
    for t in range(n):
        # prefix max over ranks 0..a_rank[t]
        idx = a_rank[t] + 1
        pred = 0.0
        while idx > 0:
            if tree[idx] > pred:
                pred = tree[idx]
            idx -= idx & (-idx)
        v = pred + r[t]
        if v > best_total:
            best_total = v
        idx = a_rank[t] + 1
        while idx <= n_ranks:
            if v > tree[idx]:
                tree[idx] = v
            idx += idx & (-idx)
    return best_total
