"""Marked Poisson point fields on planar cones and strips.

Target locations are Poisson-distributed with i.i.d. reward marks; fields are
immutable after generation and fully determined by (seed, stream_id). The
receding-horizon experiments use a strip-lazy variant keyed by (seed, strip
index) so revisiting a strip reproduces identical targets.
"""

from __future__ import annotations

import io
import json
import math
import threading
from dataclasses import dataclass

import numpy as np

from .distributions import RewardDistribution, SeededRng, parse_distribution

__all__ = [
    "RobotConfig",
    "Target",
    "Cone",
    "Strip",
    "MarkedPointField",
    "generate",
    "agility_transform",
    "visible_targets",
    "StripLazyField",
    "save_field_csv",
    "load_field_csv",
]


@dataclass(frozen=True)
class RobotConfig:
    """Constant longitudinal speed v, lateral speed bound w, sensing range S."""

    v: float
    w: float
    sensing_range: float

    def __post_init__(self):
        if not (self.v > 0 and self.w > 0 and self.sensing_range > 0):
            raise ValueError("v, w and sensing_range must all be > 0")

    @property
    def agility(self) -> float:
        return self.w / self.v


@dataclass(frozen=True)
class Target:
    p1: float
    p2: float
    reward: float


@dataclass(frozen=True)
class Cone:
    """Reachable cone {0 <= p1 <= length, |p2 - start| <= alpha * p1}."""

    length: float
    alpha: float
    start: float = 0.0

    def area(self) -> float:
        return self.alpha * self.length**2

    def sample_positions(self, u1: np.ndarray, u2: np.ndarray):
        p1 = self.length * np.sqrt(u1)
        p2 = self.start + self.alpha * p1 * (2.0 * u2 - 1.0)
        return p1, p2

    def sample_p1(self, u: np.ndarray) -> np.ndarray:
        return self.length * np.sqrt(u)

    def to_json(self):
        return {"kind": "cone", "length": self.length, "alpha": self.alpha, "start": self.start}


@dataclass(frozen=True)
class Strip:
    """Rectangle {0 <= p1 <= length, |p2| <= half_width}."""

    length: float
    half_width: float

    def area(self) -> float:
        return 2.0 * self.half_width * self.length

    def sample_positions(self, u1: np.ndarray, u2: np.ndarray):
        p1 = self.length * u1
        p2 = self.half_width * (2.0 * u2 - 1.0)
        return p1, p2

    def sample_p1(self, u: np.ndarray) -> np.ndarray:
        return self.length * u

    def to_json(self):
        return {"kind": "strip", "length": self.length, "half_width": self.half_width}


def _region_from_json(obj):
    if obj["kind"] == "cone":
        return Cone(obj["length"], obj["alpha"], obj.get("start", 0.0))
    if obj["kind"] == "strip":
        return Strip(obj["length"], obj["half_width"])
    raise ValueError(f"unknown region kind {obj['kind']!r}")


class MarkedPointField:
    """Immutable marked Poisson field, sorted by strictly increasing p1."""

    def __init__(self, intensity, region, p1, p2, rewards, dist=None, seed=None, redraws=0):
        order = np.argsort(p1, kind="stable")
        self.intensity = intensity
        self.region = region
        self.p1 = np.asarray(p1, dtype=float)[order]
        self.p2 = np.asarray(p2, dtype=float)[order]
        self.rewards = np.asarray(rewards, dtype=float)[order]
        self.dist = dist
        self.seed = seed
        self.redraws = redraws

    def __len__(self):
        return self.p1.shape[0]

    def targets(self) -> list[Target]:
        return [Target(*t) for t in zip(self.p1, self.p2, self.rewards)]


def generate(
    lam: float,
    region,
    dist: RewardDistribution,
    rng: SeededRng,
) -> MarkedPointField:
    """Draw N ~ Poisson(lam * area) targets uniform on the region with i.i.d. marks."""
    if not lam > 0:
        raise ValueError("intensity must be > 0")
    area = region.area()
    if area == 0.0:
        return MarkedPointField(lam, region, np.empty(0), np.empty(0), np.empty(0), dist, rng.seed)
    n = rng.poisson(lam * area)
    p1, p2 = region.sample_positions(rng.uniforms(n), rng.uniforms(n))
    rewards = dist.ppf(rng.uniforms(n))
    p1, redraws = _dedupe_p1(p1, region, rng)
    return MarkedPointField(lam, region, p1, p2, rewards, dist, rng.seed, redraws=redraws)


def _dedupe_p1(p1: np.ndarray, region, rng: SeededRng):
    """Re-draw duplicate longitudinal positions (measure zero, but floats collide)."""
    redraws = 0
    while p1.shape[0] > 1:
        order = np.argsort(p1)
        dup = order[1:][np.diff(p1[order]) == 0.0]
        if dup.size == 0:
            break
        p1[dup] = region.sample_p1(rng.uniforms(dup.size))
        redraws += int(dup.size)
    return p1, redraws


def agility_transform(field: MarkedPointField, alpha: float) -> MarkedPointField:
    """Lateral rescaling p2 -> p2 / alpha; distributionally a Poisson field of
    intensity alpha * lambda on the transformed region, rewards unchanged."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    region = field.region
    if isinstance(region, Cone):
        new_region = Cone(region.length, region.alpha / alpha, region.start / alpha)
    elif isinstance(region, Strip):
        new_region = Strip(region.length, region.half_width / alpha)
    else:
        raise TypeError(f"unsupported region {type(region)!r}")
    return MarkedPointField(
        field.intensity * alpha,
        new_region,
        field.p1.copy(),
        field.p2 / alpha,
        field.rewards.copy(),
        field.dist,
        field.seed,
        redraws=field.redraws,
    )


def visible_targets(field: MarkedPointField, x1: float, sensing_range: float) -> list[Target]:
    """Targets with x1 <= p1 <= x1 + S, in p1 order; S = math.inf sees everything ahead."""
    lo = np.searchsorted(field.p1, x1, side="left")
    if math.isinf(sensing_range):
        hi = len(field.p1)
    else:
        hi = np.searchsorted(field.p1, x1 + sensing_range, side="right")
    return [
        Target(float(field.p1[k]), float(field.p2[k]), float(field.rewards[k]))
        for k in range(lo, hi)
    ]


class StripLazyField:
    """Global-cone field materialized strip by strip.

    Strip k covers p1 in (k*depth, (k+1)*depth] intersected with the cone
    {|p2| <= alpha * p1}; its targets are keyed by (seed, stream_id + k), so
    generation order never matters and revisits are identical. Concurrent
    queries of the same strip observe a single generation event.
    """

    def __init__(self, lam, alpha, dist, seed, depth, stream_id=0):
        self.lam = lam
        self.alpha = alpha
        self.dist = dist
        self.seed = seed
        self.depth = depth
        self.stream_id = stream_id
        self._cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._lock = threading.Lock()

    def strip(self, k: int):
        with self._lock:
            if k not in self._cache:
                self._cache[k] = self._generate(k)
            return self._cache[k]

    def _generate(self, k: int):
        a = k * self.depth
        b = (k + 1) * self.depth
        area = self.alpha * (b * b - a * a)
        rng = SeededRng(self.seed, self.stream_id + k)
        n = rng.poisson(self.lam * area)
        # p1 density proportional to the cone width 2*alpha*p1
        p1 = np.sqrt(a * a + rng.uniforms(n) * (b * b - a * a))
        p2 = self.alpha * p1 * (2.0 * rng.uniforms(n) - 1.0)
        rewards = self.dist.ppf(rng.uniforms(n))
        order = np.argsort(p1, kind="stable")
        return p1[order], p2[order], rewards[order]


def save_field_csv(field: MarkedPointField, path):
    """CSV rows p1,p2,reward behind a one-line JSON header for replay."""
    header = {
        "lambda": field.intensity,
        "region": field.region.to_json(),
        "dist": field.dist.spec_string() if field.dist is not None else None,
        "seed": field.seed,
    }
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write("p1,p2,reward\n")
        for p1, p2, r in zip(field.p1, field.p2, field.rewards):
            fh.write(f"{float(p1)!r},{float(p2)!r},{float(r)!r}\n")


def load_field_csv(path) -> MarkedPointField:
    with open(path) as fh:
        header = json.loads(fh.readline().lstrip("# "))
        assert fh.readline().strip() == "p1,p2,reward"
        body = fh.read().strip()
    if body:
        rows = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    else:
        rows = np.empty((0, 3))
    dist = parse_distribution(header["dist"]) if header.get("dist") else None
    return MarkedPointField(
        header["lambda"],
        _region_from_json(header["region"]),
        rows[:, 0],
        rows[:, 1],
        rows[:, 2],
        dist,
        header.get("seed"),
    )
