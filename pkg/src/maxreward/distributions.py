"""Reward distributions with exact moments, inverse-CDF sampling and seeded RNG streams.

All sampling is driven by uniforms on [0, 1), either from a counter-based
Philox stream (sequence sampling) or from a per-vertex hash (lazy lattice
fields), so that identical seeds reproduce identical values bit for bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TailClass",
    "RewardDistribution",
    "Constant",
    "Bernoulli",
    "Geometric",
    "Exponential",
    "Pareto",
    "SeededRng",
    "parse_distribution",
    "vertex_uniforms",
]

INFINITE = math.inf

# integer codes used by the numba kernels
DIST_CONSTANT = 0
DIST_BERNOULLI = 1
DIST_GEOMETRIC = 2
DIST_EXPONENTIAL = 3
DIST_PARETO = 4


class TailClass(enum.Enum):
    LIGHT_TAILED = "light"
    HEAVY_TAILED = "heavy"


@dataclass(frozen=True)
class RewardDistribution:
    """Base class; concrete families implement ppf/moments/tail_class."""

    def ppf(self, u):
        """Inverse CDF, mapping uniforms on [0, 1) to reward values."""
        raise NotImplementedError

    def sample(self, rng: "SeededRng", size=None):
        u = rng.uniforms(1 if size is None else size)
        x = self.ppf(u)
        return float(x[0]) if size is None else x

    def moments(self) -> tuple[float, float]:
        """Exact (mean, std_dev); math.inf marks a divergent moment."""
        raise NotImplementedError

    def tail_class(self) -> TailClass:
        return TailClass.LIGHT_TAILED

    def spec_string(self) -> str:
        raise NotImplementedError

    def _code(self) -> tuple[int, float, float]:
        """(kind, param0, param1) triple consumed by numba kernels."""
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(RewardDistribution):
    c: float

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError(f"constant reward must be >= 0, got {self.c}")

    def ppf(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.c)

    def moments(self):
        return self.c, 0.0

    def spec_string(self):
        return f"constant:c={self.c:g}"

    def _code(self):
        return DIST_CONSTANT, self.c, 0.0


@dataclass(frozen=True)
class Bernoulli(RewardDistribution):
    """Reward 1 with probability p, else 0."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must be in (0, 1], got {self.p}")

    def ppf(self, u):
        return np.where(np.asarray(u) >= 1.0 - self.p, 1.0, 0.0)

    def moments(self):
        return self.p, math.sqrt(self.p * (1.0 - self.p))

    def spec_string(self):
        return f"bernoulli:p={self.p:g}"

    def _code(self):
        return DIST_BERNOULLI, self.p, 0.0


@dataclass(frozen=True)
class Geometric(RewardDistribution):
    """Support {1, 2, ...} with P(X = k) = p (1 - p)^(k-1)."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must be in (0, 1], got {self.p}")

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        if self.p == 1.0:
            return np.ones_like(u)
        k = np.ceil(np.log1p(-u) / math.log1p(-self.p))
        return np.maximum(k, 1.0)

    def moments(self):
        q = 1.0 - self.p
        return 1.0 / self.p, math.sqrt(q) / self.p

    def spec_string(self):
        return f"geometric:p={self.p:g}"

    def _code(self):
        return DIST_GEOMETRIC, self.p, 0.0


@dataclass(frozen=True)
class Exponential(RewardDistribution):
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be > 0, got {self.rate}")

    def ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def moments(self):
        return 1.0 / self.rate, 1.0 / self.rate

    def spec_string(self):
        return f"exponential:rate={self.rate:g}"

    def _code(self):
        return DIST_EXPONENTIAL, self.rate, 0.0


@dataclass(frozen=True)
class Pareto(RewardDistribution):
    """P(X <= x) = 1 - (x_m / x)^alpha for x >= x_m."""

    x_m: float
    alpha: float

    def __post_init__(self):
        if not self.x_m > 0:
            raise ValueError(f"x_m must be > 0, got {self.x_m}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")

    def ppf(self, u):
        return self.x_m * np.power(1.0 - np.asarray(u, dtype=float), -1.0 / self.alpha)

    def moments(self):
        a, xm = self.alpha, self.x_m
        mean = a * xm / (a - 1.0) if a > 1.0 else INFINITE
        if a > 2.0:
            var = xm * xm * a / ((a - 1.0) ** 2 * (a - 2.0))
            std = math.sqrt(var)
        else:
            std = INFINITE
        return mean, std

    def tail_class(self):
        return TailClass.HEAVY_TAILED

    def spec_string(self):
        return f"pareto:xm={self.x_m:g},alpha={self.alpha:g}"

    def _code(self):
        return DIST_PARETO, self.x_m, self.alpha


_FAMILIES = {
    "constant": (Constant, {"c"}),
    "bernoulli": (Bernoulli, {"p"}),
    "geometric": (Geometric, {"p"}),
    "exponential": (Exponential, {"rate"}),
    "pareto": (Pareto, {"xm", "alpha"}),
}


def parse_distribution(spec: str) -> RewardDistribution:
    """Parse a spec string like ``exponential:rate=1`` or ``pareto:xm=1,alpha=1.5``."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name not in _FAMILIES:
        raise ValueError(f"unknown distribution family {name!r} in {spec!r}")
    cls, allowed = _FAMILIES[name]
    params = {}
    if rest.strip():
        for item in rest.split(","):
            key, _, value = item.partition("=")
            key = key.strip().lower()
            if key not in allowed or not _:
                raise ValueError(f"bad parameter {item!r} in {spec!r}")
            params[key] = float(value)
    if set(params) != allowed:
        raise ValueError(f"{name} needs parameters {sorted(allowed)}, got {sorted(params)}")
    if name == "pareto":
        return Pareto(x_m=params["xm"], alpha=params["alpha"])
    return cls(**params)


class SeededRng:
    """Counter-based Philox stream keyed by (seed, stream_id).

    Identical (seed, stream_id) pairs reproduce bitwise-identical draws;
    distinct stream_ids give statistically independent streams, so parallel
    trials do not depend on execution order.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array(
            [self.seed & 0xFFFFFFFFFFFFFFFF, self.stream_id & 0xFFFFFFFFFFFFFFFF],
            dtype=np.uint64,
        )
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniforms(self, size) -> np.ndarray:
        """Uniform draws on the half-open interval [0, 1)."""
        return self._gen.random(size)

    def poisson(self, mean: float) -> int:
        return int(self._gen.poisson(mean))

    def normal(self, loc: float, scale: float, size=None):
        return self._gen.normal(loc, scale, size)

    def substream(self, offset: int) -> "SeededRng":
        return SeededRng(self.seed, self.stream_id + offset)


# SplitMix64 finalizer, used as the per-vertex hash for lazy lattice fields.
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_K1 = np.uint64(0xA24BAED4963EE407)
_K2 = np.uint64(0x9FB21C651E98DF25)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, stream_id: int) -> np.uint64:
    s = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    t = np.uint64(stream_id & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        return _mix(s + _GOLDEN) ^ _mix(t * _K1 + _GOLDEN)


def vertex_uniforms(seed: int, stream_id: int, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Deterministic uniform on [0, 1) for each lattice vertex (v1, v2).

    The value depends only on (seed, stream_id, v1, v2), so any sub-wedge of
    the same field agrees with the full field.
    """
    key = stream_key(seed, stream_id)
    with np.errstate(over="ignore"):
        x = np.asarray(v1, dtype=np.uint64) * _K1 + np.asarray(v2, dtype=np.uint64) * _K2
        h = _mix(_mix(x ^ key) + _GOLDEN)
    return (h >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
