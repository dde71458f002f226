"""Shared domain types, time and geometry utilities, seeded randomness
derivation, and the ground-truth close-contact oracle that every protocol's
detections are judged against.

All types are immutable values and all operations are pure functions; a
seeded random stream is always an explicit argument, never ambient state.
"""

from __future__ import annotations

import hashlib
import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

EARTH_RADIUS_M = 6371000.0

# Plausible received-signal band (dBm); samples outside are clamped at the
# radio layer, constructions outside are rejected.
RSSI_BAND_DBM = (-110.0, -20.0)

# Users are plain integer indices in [0, N); kept as an alias so signatures
# stay readable.
UserId = int


class ConfigError(ValueError):
    """A scenario or operation was configured inconsistently."""


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class TimeInterval:
    """Half-open time span [start_s, end_s) on the scenario clock."""

    index: int
    start_s: float
    end_s: float

    def __post_init__(self):
        if self.index < 0:
            raise ConfigError(f"interval index must be >= 0, got {self.index}")
        if not self.start_s < self.end_s:
            raise ConfigError(
                f"interval start {self.start_s} must precede end {self.end_s}"
            )

    def contains(self, time_s: float) -> bool:
        return self.start_s <= time_s < self.end_s

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        if not (-90.0 <= self.lat_deg <= 90.0):
            raise ConfigError(f"latitude {self.lat_deg} outside [-90, 90]")
        if not (-180.0 <= self.lon_deg <= 180.0):
            raise ConfigError(f"longitude {self.lon_deg} outside [-180, 180]")


@dataclass(frozen=True)
class SignalStrength:
    """Received signal strength in dBm."""

    rssi_dbm: float

    def __post_init__(self):
        lo, hi = RSSI_BAND_DBM
        if not math.isfinite(self.rssi_dbm) or not lo <= self.rssi_dbm <= hi:
            raise ConfigError(
                f"rssi {self.rssi_dbm} outside plausible band [{lo}, {hi}] dBm"
            )


@dataclass(frozen=True)
class GroundTruthEncounter:
    """A maximal contiguous span during which a pair stayed within the
    contact distance.  Stored with a < b."""

    a: UserId
    b: UserId
    interval: TimeInterval
    min_distance_m: float
    duration_s: float

    def __post_init__(self):
        if self.a == self.b:
            raise ConfigError("encounter endpoints must differ")
        if self.a > self.b:
            raise ConfigError("encounter must be stored with a < b")
        if self.min_distance_m < 0:
            raise ConfigError("min_distance_m must be >= 0")

    @property
    def pair(self) -> tuple[UserId, UserId]:
        return (self.a, self.b)


@dataclass(frozen=True)
class TransmissionEvent:
    source: UserId
    target: UserId
    time_s: float
    mode: str  # "direct" | "indirect"

    def __post_init__(self):
        if self.source == self.target:
            raise ConfigError("transmission source and target must differ")
        if self.mode not in ("direct", "indirect"):
            raise ConfigError(f"unknown transmission mode {self.mode!r}")


# ---------------------------------------------------------------------------
# Seeded randomness
# ---------------------------------------------------------------------------


def derive_seed(master_seed: int, *labels) -> int:
    """Derive a 64-bit substream seed from the master seed and a label path.

    Independent components each own a labelled substream, so adding a
    consumer never perturbs another component's random draws.
    """
    h = hashlib.sha256()
    h.update(b"tracebench-seed")
    h.update(int(master_seed).to_bytes(8, "big", signed=True))
    for label in labels:
        h.update(b"/" + str(label).encode())
    return int.from_bytes(h.digest()[:8], "big")


def derive_rng(master_seed: int, *labels) -> random.Random:
    return random.Random(derive_seed(master_seed, *labels))


def derive_np_rng(master_seed: int, *labels) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *labels)))


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


def distance_meters(p: GeoPoint, q: GeoPoint) -> float:
    """Equirectangular-approximation distance in meters.

    Adequate at encounter scales (well below kilometers of separation);
    symmetric, and zero iff the points are equal.
    """
    phi1 = math.radians(p.lat_deg)
    phi2 = math.radians(q.lat_deg)
    x = math.radians(q.lon_deg - p.lon_deg) * math.cos(0.5 * (phi1 + phi2))
    y = phi2 - phi1
    return EARTH_RADIUS_M * math.hypot(x, y)


def haversine_meters(p: GeoPoint, q: GeoPoint) -> float:
    """Great-circle distance; kept alongside the equirectangular form for
    validation."""
    phi1 = math.radians(p.lat_deg)
    phi2 = math.radians(q.lat_deg)
    dphi = phi2 - phi1
    dlmb = math.radians(q.lon_deg - p.lon_deg)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(a))


def pairwise_distance_series(
    lat_a: np.ndarray, lon_a: np.ndarray, lat_b: np.ndarray, lon_b: np.ndarray
) -> np.ndarray:
    """Vectorized equirectangular distance between two co-sampled tracks.

    Matches distance_meters() per element exactly (same formula).
    """
    phi1 = np.radians(lat_a)
    phi2 = np.radians(lat_b)
    x = np.radians(lon_b - lon_a) * np.cos(0.5 * (phi1 + phi2))
    y = phi2 - phi1
    return EARTH_RADIUS_M * np.hypot(x, y)


# ---------------------------------------------------------------------------
# Interval schedules
# ---------------------------------------------------------------------------


def make_schedule(horizon_s: float, interval_s: float) -> list[TimeInterval]:
    """Partition [0, horizon_s) into consecutive half-open intervals."""
    if horizon_s <= 0 or interval_s <= 0:
        raise ConfigError("horizon and interval length must be positive")
    n = math.ceil(horizon_s / interval_s)
    return [
        TimeInterval(i, i * interval_s, min((i + 1) * interval_s, horizon_s))
        for i in range(n)
    ]


def interval_of(time_s: float, schedule: Sequence[TimeInterval]) -> TimeInterval:
    """The unique schedule interval containing time_s ([start, end) convention)."""
    if not schedule:
        raise ValueError("empty schedule")
    starts = [iv.start_s for iv in schedule]
    k = bisect_right(starts, time_s) - 1
    if k < 0 or not schedule[k].contains(time_s):
        raise ValueError(
            f"time {time_s} outside schedule span "
            f"[{schedule[0].start_s}, {schedule[-1].end_s})"
        )
    return schedule[k]


# ---------------------------------------------------------------------------
# Ground-truth close-contact oracle
# ---------------------------------------------------------------------------


def close_contact_oracle(
    trajectories: Mapping[UserId, "TrajectoryLike"],
    dist_threshold_m: float = 2.0,
    min_duration_s: float = 900.0,
    exclude_pairs: Iterable[tuple[UserId, UserId]] = (),
) -> list[GroundTruthEncounter]:
    """Find every maximal contiguous span where a pair stays within
    dist_threshold_m for at least min_duration_s.

    Each tick at time t covers [t, t + tick); a span of k consecutive
    in-threshold ticks therefore lasts k * tick seconds.  All trajectories
    must share one tick grid.  exclude_pairs (e.g. neighbours separated by a
    wall) are dropped from the output.
    """
    users = sorted(trajectories)
    if not users:
        return []
    ref = trajectories[users[0]]
    times = np.asarray(ref.times_s, dtype=float)
    if len(times) < 2:
        raise ConfigError("trajectories need at least two samples")
    tick = float(times[1] - times[0])
    for u in users:
        tr = trajectories[u]
        if not np.array_equal(np.asarray(tr.times_s, dtype=float), times):
            raise ConfigError(f"trajectory of user {u} is not on the shared tick grid")

    excluded = {tuple(sorted(p)) for p in exclude_pairs}
    encounters: list[GroundTruthEncounter] = []
    lat = {u: np.asarray(trajectories[u].lat_deg, dtype=float) for u in users}
    lon = {u: np.asarray(trajectories[u].lon_deg, dtype=float) for u in users}

    for i, a in enumerate(users):
        for b in users[i + 1 :]:
            if (a, b) in excluded:
                continue
            d = pairwise_distance_series(lat[a], lon[a], lat[b], lon[b])
            close = d <= dist_threshold_m
            if not close.any():
                continue
            # maximal runs of consecutive True
            edges = np.flatnonzero(np.diff(close.astype(np.int8)))
            starts = [0] if close[0] else []
            starts += [int(e) + 1 for e in edges if close[e + 1]]
            ends = [int(e) for e in edges if close[e]]
            if close[-1]:
                ends.append(len(close) - 1)
            for s_idx, e_idx in zip(starts, ends):
                duration = (e_idx - s_idx + 1) * tick
                if duration < min_duration_s:
                    continue
                span = TimeInterval(s_idx, float(times[s_idx]), float(times[e_idx]) + tick)
                encounters.append(
                    GroundTruthEncounter(
                        a=a,
                        b=b,
                        interval=span,
                        min_distance_m=float(d[s_idx : e_idx + 1].min()),
                        duration_s=float(duration),
                    )
                )

    encounters.sort(key=lambda e: (e.interval.start_s, e.a, e.b))
    return encounters


class TrajectoryLike:
    """Structural contract for close_contact_oracle inputs: numpy-compatible
    times_s / lat_deg / lon_deg arrays on a shared tick grid."""

    times_s: Sequence[float]
    lat_deg: Sequence[float]
    lon_deg: Sequence[float]
