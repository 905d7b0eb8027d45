"""Small deterministic networks and drive cycles used by tests, the CLI and benchmarks."""
from __future__ import annotations

import numpy as np

from .roadnet import RoadNetwork, load_network
from .traffic import TrafficObservation, TrafficStore
from .trajectory import Trajectory

T0 = 1_462_078_800.0  # a weekday 13:00 local (off-peak)


def stop_and_go(length_km: float, cruise_kmh: float, stop_every_km: float, dwell_s: float = 25.0,
                accel: float = 1.5, decel: float = 2.0, t_start: float = 0.0) -> Trajectory:
    """1 s trace covering ``length_km`` with full stops every ``stop_every_km``.

    Starts and ends at rest; ``dwell_s`` seconds are spent at each intermediate stop.
    """
    if length_km <= 0 or cruise_kmh <= 0 or stop_every_km <= 0:
        raise ValueError("length, cruise speed and stop spacing must be positive")
    vc = cruise_kmh / 3.6
    total = length_km * 1000.0
    stop_at = min(stop_every_km * 1000.0, total)
    v, x = [0.0], [0.0]
    while True:
        cur, pos = v[-1], x[-1]
        if cur == 0.0 and pos >= stop_at - 1e-6:
            if stop_at >= total - 1e-6:
                break
            v.extend([0.0] * int(dwell_s))
            x.extend([pos] * int(dwell_s))
            stop_at = min(stop_at + stop_every_km * 1000.0, total)
        # brake when the remaining gap is within stopping distance plus one step
        if stop_at - pos <= cur * cur / (2 * decel) + cur:
            nv = max(cur - decel, 0.0)
        else:
            nv = min(cur + accel, vc)
        step = 0.5 * (cur + nv)
        if nv == 0.0 or pos + step > stop_at:
            step = stop_at - pos
            nv = 0.0
        v.append(nv)
        x.append(pos + step)
        if len(v) > 1_000_000:
            raise RuntimeError("drive cycle did not terminate")
    t = np.arange(len(v), dtype=float) + t_start
    zeros = np.zeros(len(t))
    return Trajectory(t, zeros, zeros, np.asarray(v) * 3.6, np.asarray(x) / 1000.0)


def two_route_network() -> RoadNetwork:
    """S to D by a short signalised street (via A) or a longer expressway (via B)."""
    return load_network({
        "nodes": [{"id": n} for n in ("S", "A", "B", "D")],
        "edges": [
            {"id": "u1", "from": "S", "to": "A", "length_km": 3.5, "ffs_kmh": 40, "ts": 6, "poi": 8},
            {"id": "u2", "from": "A", "to": "D", "length_km": 3.5, "ffs_kmh": 40, "ts": 6, "poi": 8},
            {"id": "h1", "from": "S", "to": "B", "length_km": 4.0, "ffs_kmh": 100},
            {"id": "h2", "from": "B", "to": "D", "length_km": 4.0, "ffs_kmh": 100},
        ],
    })


def two_route_store(net: RoadNetwork, t0: float = T0) -> TrafficStore:
    """One crowdsensed trace per edge: stop-and-go on the street, steady on the expressway."""
    store = TrafficStore()
    for eid, e in sorted(net.edges.items()):
        if e.features.n_traffic_stops > 0:
            # lights plus crossings: a full stop every 200 m
            traj = stop_and_go(e.length, 40.0, 0.2, accel=2.0, decel=2.5)
        else:
            traj = stop_and_go(e.length, e.free_flow_speed, e.length, accel=2.0)
        traj = traj.shifted(t0 - 600.0 - traj.t[0])
        store.ingest(TrafficObservation("fixture", eid, traj, t0 - 600.0))
    return store
