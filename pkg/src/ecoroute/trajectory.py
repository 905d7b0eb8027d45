"""Time-ordered GPS samples and their CSV form (``t,lat,lon,v_kmh``)."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .vehicle_model import KMH_TO_MS

CSV_COLUMNS = ("t", "lat", "lon", "v_kmh")


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray  # s
    lat: np.ndarray  # deg
    lon: np.ndarray  # deg
    v_kmh: np.ndarray  # km/h
    cum_km: np.ndarray | None = None  # cumulative distance, optional

    def __post_init__(self):
        for name in ("t", "lat", "lon", "v_kmh"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.cum_km is not None:
            object.__setattr__(self, "cum_km", np.asarray(self.cum_km, dtype=float))
        n = len(self.t)
        if n == 0:
            raise ValueError("trajectory has no points")
        if not (len(self.lat) == len(self.lon) == len(self.v_kmh) == n):
            raise ValueError("trajectory columns differ in length")
        if self.cum_km is not None and len(self.cum_km) != n:
            raise ValueError("cum_km length mismatch")
        if n > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if np.any(self.v_kmh < 0):
            raise ValueError("speeds must be non-negative")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def v_ms(self) -> np.ndarray:
        """Speed in m/s; the single km/h -> m/s conversion point."""
        return self.v_kmh * KMH_TO_MS

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def distance_km(self) -> float:
        """Cumulative travelled distance: recorded if present, else trapezoidal speed integral."""
        if self.cum_km is not None:
            return float(self.cum_km[-1] - self.cum_km[0])
        if len(self) < 2:
            return 0.0
        return float(np.sum(0.5 * (self.v_kmh[1:] + self.v_kmh[:-1]) * np.diff(self.t)) / 3600.0)

    def shifted(self, dt: float) -> "Trajectory":
        return Trajectory(self.t + dt, self.lat, self.lon, self.v_kmh, self.cum_km)

    def equals(self, other: "Trajectory") -> bool:
        same_cum = (self.cum_km is None and other.cum_km is None) or (
            self.cum_km is not None and other.cum_km is not None
            and np.array_equal(self.cum_km, other.cum_km)
        )
        return (
            same_cum
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.lat, other.lat)
            and np.array_equal(self.lon, other.lon)
            and np.array_equal(self.v_kmh, other.v_kmh)
        )

    def to_dict(self) -> dict:
        d = {
            "t": self.t.tolist(),
            "lat": self.lat.tolist(),
            "lon": self.lon.tolist(),
            "v_kmh": self.v_kmh.tolist(),
        }
        if self.cum_km is not None:
            d["cum_km"] = self.cum_km.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Trajectory":
        return cls(d["t"], d["lat"], d["lon"], d["v_kmh"], d.get("cum_km"))


def concatenate(parts: list[Trajectory]) -> Trajectory:
    """Join trajectories end to end, merging a shared boundary sample.

    Each part must start at the timestamp where the previous one ends; that
    duplicated sample is kept once (from the later part).
    """
    if not parts:
        raise ValueError("nothing to concatenate")
    cols = {k: [np.asarray(getattr(parts[0], k))] for k in CSV_COLUMNS}
    for prev, nxt in zip(parts, parts[1:]):
        if nxt.t[0] != prev.t[-1]:
            raise ValueError("parts do not share a boundary timestamp")
        for k in CSV_COLUMNS:
            cols[k][-1] = cols[k][-1][:-1]
            cols[k].append(np.asarray(getattr(nxt, k)))
    return Trajectory(*(np.concatenate(cols[k]) for k in CSV_COLUMNS))


def read_table(path: str | Path) -> dict[str, np.ndarray]:
    """Read a numeric CSV with a header row into column arrays."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i].copy() for i, name in enumerate(header)}


def write_table(path: str | Path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*arrays):
            w.writerow([repr(float(x)) for x in row])


def read_csv(path: str | Path) -> Trajectory:
    cols = read_table(path)
    missing = [c for c in CSV_COLUMNS if c not in cols]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    return Trajectory(cols["t"], cols["lat"], cols["lon"], cols["v_kmh"], cols.get("cum_km"))


def write_csv(path: str | Path, traj: Trajectory, **extra: np.ndarray) -> None:
    cols = {k: getattr(traj, k) for k in CSV_COLUMNS}
    if traj.cum_km is not None:
        cols["cum_km"] = traj.cum_km
    cols.update(extra)
    write_table(path, cols)
