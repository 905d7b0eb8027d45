"""Crowdsensed per-edge trajectory store with time-window retrieval."""
from __future__ import annotations

import bisect
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .trajectory import Trajectory


class InterpolationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TrafficObservation:
    driver_id: str
    edge_id: str
    trajectory: Trajectory  # clipped to the edge
    submitted_at: float  # s

    @property
    def key(self) -> tuple[str, str, float]:
        return (self.driver_id, self.edge_id, self.submitted_at)

    def to_json(self) -> str:
        return json.dumps({
            "driver_id": self.driver_id,
            "edge_id": self.edge_id,
            "submitted_at": self.submitted_at,
            "trajectory": self.trajectory.to_dict(),
        })

    @classmethod
    def from_json(cls, line: str) -> "TrafficObservation":
        d = json.loads(line)
        return cls(str(d["driver_id"]), str(d["edge_id"]), Trajectory.from_dict(d["trajectory"]),
                   float(d["submitted_at"]))


@dataclass(frozen=True)
class TrafficConfig:
    window_rush: float = 3600.0  # s
    window_offpeak: float = 7200.0  # s
    rush_hours: tuple[tuple[float, float], ...] = ((7.0, 9.0), (17.0, 19.0))
    utc_offset_hours: float = 8.0  # timestamps are UTC epoch seconds

    def __post_init__(self):
        if self.window_rush <= 0 or self.window_offpeak <= 0:
            raise ValueError("windows must be positive")

    def window(self, t0: float) -> float:
        hour = ((t0 + self.utc_offset_hours * 3600.0) % 86400.0) / 3600.0
        rush = any(lo <= hour < hi for lo, hi in self.rush_hours)
        return self.window_rush if rush else self.window_offpeak


@dataclass(eq=False)
class TrafficStore:
    """In-memory observation index, optionally mirrored to a JSON-lines log."""

    log_path: Path | None = None
    _by_edge: dict[str, list[tuple[float, int, TrafficObservation]]] = field(default_factory=dict, repr=False)
    _keys: set = field(default_factory=set, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _seq: int = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._keys)

    def ingest(self, obs: TrafficObservation) -> None:
        """Index ``obs``; re-submitting the same (driver, edge, time) is a no-op."""
        if len(obs.trajectory) == 0 or obs.trajectory.distance_km() < 0:
            raise ValueError("observation trajectory must be non-empty with non-negative distance")
        with self._lock:
            if obs.key in self._keys:
                return
            self._keys.add(obs.key)
            bucket = self._by_edge.setdefault(obs.edge_id, [])
            bisect.insort(bucket, (obs.submitted_at, self._seq, obs))
            self._seq += 1
            if self.log_path is not None:
                with open(self.log_path, "a") as fh:
                    fh.write(obs.to_json() + "\n")

    def latest_time(self) -> float | None:
        with self._lock:
            stamps = [bucket[-1][0] for bucket in self._by_edge.values() if bucket]
        return max(stamps) if stamps else None

    def query(self, edge_id: str, t_start: float, t_end: float) -> list[TrafficObservation]:
        """Observations on ``edge_id`` with ``t_start <= submitted_at <= t_end``."""
        with self._lock:
            bucket = self._by_edge.get(edge_id, [])
            lo = bisect.bisect_left(bucket, (t_start, -1))
            hi = bisect.bisect_right(bucket, (t_end, float("inf")))
            return [item[2] for item in bucket[lo:hi]]

    def representative(self, edge, t0: float, cfg: TrafficConfig | None = None) -> TrafficObservation | None:
        cfg = cfg or TrafficConfig()
        window = self.query(edge.id, t0 - cfg.window(t0), t0)
        best = None
        best_key = None
        for obs in window:
            # smallest distance mismatch, then most recent
            k = (abs(obs.trajectory.distance_km() - edge.length), -obs.submitted_at)
            if best_key is None or k < best_key:
                best, best_key = obs, k
        return best

    def representative_trajectory(self, edge, t0: float, cfg: TrafficConfig | None = None) -> Trajectory | None:
        """Trajectory whose travelled distance best matches the edge length, or None."""
        if t0 is None:
            return None
        obs = self.representative(edge, t0, cfg)
        return None if obs is None else obs.trajectory

    @classmethod
    def load(cls, path: str | Path, persist: bool = False) -> "TrafficStore":
        store = cls()
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    store.ingest(TrafficObservation.from_json(line))
        if persist:
            store.log_path = Path(path)
        return store

    def dump(self, path: str | Path) -> None:
        with self._lock:
            items = sorted(
                (item for bucket in self._by_edge.values() for item in bucket),
                key=lambda it: (it[0], it[2].edge_id, it[2].driver_id),
            )
        with open(path, "w") as fh:
            for _, _, obs in items:
                fh.write(obs.to_json() + "\n")


def interpolate(traj: Trajectory, target_dt: float = 1.0) -> Trajectory:
    """Resample to a uniform ``target_dt`` grid by linear interpolation.

    Both endpoints are kept; if the duration is not a multiple of
    ``target_dt`` the final interval is shorter.
    """
    if len(traj) < 2:
        raise InterpolationError("need at least two points to interpolate")
    if target_dt <= 0:
        raise ValueError("target_dt must be positive")
    if np.all(np.diff(traj.t) == target_dt):
        return traj
    t0, tn = float(traj.t[0]), float(traj.t[-1])
    steps = int(np.floor((tn - t0) / target_dt + 1e-9))
    grid = t0 + np.arange(steps + 1) * target_dt
    if grid[-1] < tn - 1e-9:
        grid = np.append(grid, tn)
    else:
        grid[-1] = tn
    cum = None if traj.cum_km is None else np.interp(grid, traj.t, traj.cum_km)
    return Trajectory(
        grid,
        np.interp(grid, traj.t, traj.lat),
        np.interp(grid, traj.t, traj.lon),
        np.interp(grid, traj.t, traj.v_kmh),
        cum,
    )


def free_flow_trajectory(edge, t_start: float = 0.0) -> Trajectory:
    """Constant free-flow-speed traversal of ``edge`` at 1 s sampling."""
    duration = edge.free_flow_time
    t = np.arange(0.0, np.floor(duration) + 1.0)
    if t[-1] < duration - 1e-9:
        t = np.append(t, duration)
    v = np.full(len(t), edge.free_flow_speed)
    cum = t * edge.free_flow_speed / 3600.0
    zeros = np.zeros(len(t))
    return Trajectory(t + t_start, zeros, zeros, v, cum)
