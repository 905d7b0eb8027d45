"""Seeded desk-scale corpus: grid road network, driven trips, crowdsensed clips.

Stands in for a real city dataset. Each trip is a 1 s trajectory of one driver
along a path; other simulated drivers traverse the same edges shortly before
the trip starts and contribute 6 s GPS clips to a traffic store.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .roadnet import Node, RoadNetwork, _search, load_network, save_network, shortest_path
from .traffic import TrafficConfig, TrafficObservation, TrafficStore
from .trajectory import Trajectory, read_table, write_table

LAT0, LON0 = 39.80, 116.30
KM_PER_DEG = 111.32
GPS_PERIOD = 6  # s, crowdsensed sampling interval
DAY0 = 1_462_032_000.0  # 2016-05-01 00:00 local (UTC+8) as UTC epoch, approx


@dataclass
class Trip:
    id: str
    t0: float
    edges: tuple[str, ...]
    source: str
    dest: str
    length_km: float
    split: str  # "train" or "test"
    traj: Trajectory
    edge_idx: np.ndarray  # edge position within ``edges`` per sample
    q_kw: np.ndarray | None = None  # observed demand per interval, overrides the simulator

    def feature_track(self, net: RoadNetwork) -> np.ndarray:
        feats = np.array([net.edges[e].features for e in self.edges], dtype=float)
        return feats[self.edge_idx]

    def theta_track(self, net: RoadNetwork) -> np.ndarray:
        th = np.array([net.edges[e].theta for e in self.edges])
        return th[self.edge_idx]


@dataclass
class Corpus:
    net: RoadNetwork
    store: TrafficStore
    trips: list[Trip]
    traffic_cfg: TrafficConfig = field(default_factory=TrafficConfig)
    seed: int = 42
    case_trips: list[str] = field(default_factory=list)

    def split(self, name: str) -> list[Trip]:
        return [t for t in self.trips if t.split == name]

    def save(self, directory: str | Path) -> None:
        d = Path(directory)
        (d / "trips").mkdir(parents=True, exist_ok=True)
        save_network(self.net, d / "network.json")
        self.store.dump(d / "traffic.jsonl")
        manifest = {
            "seed": self.seed,
            "case_trips": self.case_trips,
            "trips": [
                {"id": t.id, "t0": t.t0, "edges": list(t.edges), "source": t.source,
                 "dest": t.dest, "length_km": t.length_km, "split": t.split}
                for t in self.trips
            ],
        }
        (d / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
        for t in self.trips:
            feats = t.feature_track(self.net)
            write_table(d / "trips" / f"{t.id}.csv", {
                "t": t.traj.t, "lat": t.traj.lat, "lon": t.traj.lon, "v_kmh": t.traj.v_kmh,
                "cum_km": t.traj.cum_km, "edge_idx": t.edge_idx,
                "ts": feats[:, 0], "nb": feats[:, 1], "poi": feats[:, 2],
                "theta": t.theta_track(self.net),
                **({} if t.q_kw is None else {"q_kw": np.append(t.q_kw, np.nan)}),
            })

    @classmethod
    def load(cls, directory: str | Path) -> "Corpus":
        d = Path(directory)
        manifest = json.loads((d / "manifest.json").read_text())
        net = load_network(d / "network.json")
        store = TrafficStore.load(d / "traffic.jsonl")
        trips = []
        for m in manifest["trips"]:
            cols = read_table(d / "trips" / f"{m['id']}.csv")
            traj = Trajectory(cols["t"], cols["lat"], cols["lon"], cols["v_kmh"], cols["cum_km"])
            trips.append(Trip(m["id"], float(m["t0"]), tuple(m["edges"]), m["source"], m["dest"],
                              float(m["length_km"]), m["split"], traj, cols["edge_idx"].astype(int),
                              cols["q_kw"][:-1].copy() if "q_kw" in cols else None))
        return cls(net, store, trips, TrafficConfig(), int(manifest["seed"]), manifest.get("case_trips", []))


def grid_network(rng: np.random.Generator, size: int = 16, spacing_km: float = 1.0,
                 relief_m: float = 15.0) -> RoadNetwork:
    """Jittered square grid; every fourth row/column is an arterial.

    Grades come from node elevations on a smooth terrain field, so any closed
    loop has zero net climb. ``relief_m`` is the amplitude of each of the
    three terrain waves.
    """
    nodes = []
    xy = {}
    z = {}
    waves = [(rng.uniform(4.0, 10.0), rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))
             for _ in range(3)]
    for r in range(size):
        for c in range(size):
            nid = f"n{r:02d}_{c:02d}"
            x = c * spacing_km + rng.uniform(-0.15, 0.15) * spacing_km
            y = r * spacing_km + rng.uniform(-0.15, 0.15) * spacing_km
            xy[nid] = (x, y)
            z[nid] = sum(relief_m * math.sin(2 * math.pi * (x * math.cos(d) + y * math.sin(d)) / wl + ph)
                         for wl, d, ph in waves) / 3 + rng.normal(0.0, 1.5)
            lat = LAT0 + y / KM_PER_DEG
            nodes.append(Node(nid, lat, LON0 + x / (KM_PER_DEG * math.cos(math.radians(lat)))))
    edges = []

    def street(a: str, b: str, arterial: bool) -> None:
        (x1, y1), (x2, y2) = xy[a], xy[b]
        length = round(math.hypot(x2 - x1, y2 - y1) * rng.uniform(1.0, 1.08), 4)
        ffs = 60.0 if arterial else float(rng.choice([30.0, 40.0, 50.0]))
        ts = int(rng.integers(0, 2)) if arterial else int(rng.integers(0, 4))
        poi = int(rng.integers(0, 6))
        theta = math.asin(max(-1.0, min(1.0, (z[b] - z[a]) / (1000.0 * length))))
        for u, v, sign in ((a, b, 1.0), (b, a, -1.0)):
            edges.append({"id": f"{u}>{v}", "from": u, "to": v, "length_km": length,
                          "ffs_kmh": ffs, "ts": ts, "poi": poi, "theta": sign * theta})

    for r in range(size):
        for c in range(size):
            if c + 1 < size:
                street(f"n{r:02d}_{c:02d}", f"n{r:02d}_{c + 1:02d}", r % 4 == 0)
            if r + 1 < size:
                street(f"n{r:02d}_{c:02d}", f"n{r + 1:02d}_{c:02d}", c % 4 == 0)
    return RoadNetwork.build(nodes, edges)


@dataclass(frozen=True)
class DriverStyle:
    speed_factor: float
    accel: float  # m/s^2
    decel: float  # m/s^2

    @classmethod
    def sample(cls, rng: np.random.Generator) -> "DriverStyle":
        return cls(rng.uniform(0.85, 1.1), rng.uniform(1.0, 2.2), rng.uniform(1.5, 2.5))


def congestion_table(rng: np.random.Generator, net: RoadNetwork) -> dict[str, np.ndarray]:
    """Speed multiplier per edge per hour of day (rush hours slower)."""
    hours = np.arange(24)
    rush = ((hours >= 7) & (hours < 9)) | ((hours >= 17) & (hours < 19))
    table = {}
    for eid in net.edges:
        base = rng.uniform(0.75, 1.0)
        table[eid] = np.clip(base * np.where(rush, rng.uniform(0.55, 0.8), 1.0)
                             * rng.uniform(0.9, 1.05, size=24), 0.3, 1.05)
    return table


def local_hour(t: float, cfg: TrafficConfig) -> int:
    return int(((t + cfg.utc_offset_hours * 3600.0) % 86400.0) // 3600.0)


def drive_path(net: RoadNetwork, edges: tuple[str, ...], style: DriverStyle,
               congestion: dict[str, np.ndarray], t_start: float, rng: np.random.Generator,
               cfg: TrafficConfig, initial_speed: float = 0.0) -> tuple[Trajectory, np.ndarray]:
    """1 s kinematic drive along ``edges``; returns the trajectory and edge index per sample."""
    lengths = np.array([net.edges[e].length * 1000.0 for e in edges])
    ends = np.cumsum(lengths)
    total = ends[-1]
    hour = local_hour(t_start, cfg)
    cruise = np.array([
        net.edges[e].free_flow_speed / 3.6 * congestion[e][hour] * style.speed_factor for e in edges
    ])
    stops = []
    for k, e in enumerate(edges[:-1]):
        ts = net.edges[e].features.n_traffic_stops
        if ts > 0 and rng.random() < min(0.8, 0.3 * ts):
            stops.append((ends[k], rng.uniform(8.0, 45.0)))
    s, v = 0.0, min(initial_speed, cruise[0])
    wander = 0.0
    ts_, vs, ss = [0.0], [v], [s]
    t = 0.0
    while s < total:
        k = min(int(np.searchsorted(ends, s, side="right")), len(edges) - 1)
        wander = 0.9 * wander + rng.normal(0.0, 0.02)
        target = cruise[k] * (1.0 + wander)
        if stops:
            d = stops[0][0] - s
            target = min(target, math.sqrt(max(0.0, 2.0 * style.decel * d)))
        a = min(max(target - v, -3.0), style.accel)
        v_new = min(max(v + a, 0.0), 33.0)
        s_new = s + 0.5 * (v + v_new)
        if stops and s_new >= stops[0][0] - 1.0:
            stop_at, dwell = stops.pop(0)
            if v_new <= 3.0 and v - v_new <= 3.0:
                v_new, s_new = 0.0, max(s, stop_at)
                t += 1.0
                ts_.append(t); vs.append(v_new); ss.append(s_new)
                for _ in range(int(dwell)):
                    t += 1.0
                    ts_.append(t); vs.append(0.0); ss.append(s_new)
                v, s = 0.0, s_new
                continue
        t += 1.0
        v, s = v_new, s_new
        ts_.append(t); vs.append(v); ss.append(s)
    s_arr = np.array(ss)
    idx = np.minimum(np.searchsorted(ends, s_arr, side="right"), len(edges) - 1)
    lat, lon = _positions(net, edges, ends, s_arr)
    traj = Trajectory(np.array(ts_) + t_start, lat, lon, np.array(vs) * 3.6, s_arr / 1000.0)
    return traj, idx


def _positions(net: RoadNetwork, edges, ends, s_arr):
    starts = ends - np.array([net.edges[e].length * 1000.0 for e in edges])
    idx = np.minimum(np.searchsorted(ends, s_arr, side="right"), len(edges) - 1)
    lat = np.empty(len(s_arr))
    lon = np.empty(len(s_arr))
    for k, e in enumerate(edges):
        m = idx == k
        if not np.any(m):
            continue
        a = net.nodes[net.edges[e].from_node]
        b = net.nodes[net.edges[e].to_node]
        frac = np.clip((s_arr[m] - starts[k]) / (ends[k] - starts[k]), 0.0, 1.0)
        lat[m] = a.lat + frac * (b.lat - a.lat)
        lon[m] = a.lon + frac * (b.lon - a.lon)
    return lat, lon


def clip_observations(driver_id: str, edges, traj: Trajectory, edge_idx: np.ndarray,
                      rng: np.random.Generator) -> list[TrafficObservation]:
    """Per-edge 6 s GPS clips from a 1 s drive (one sample past the edge end included)."""
    phase = int(rng.integers(0, GPS_PERIOD))
    keep = np.arange(phase, len(traj), GPS_PERIOD)
    out = []
    for k, eid in enumerate(edges):
        pos = np.flatnonzero(edge_idx[keep] == k)
        if len(pos) == 0:
            continue
        sel = list(keep[pos])
        nxt = pos[-1] + 1
        if nxt < len(keep):
            sel.append(keep[nxt])
        if len(sel) < 2 and pos[0] > 0:
            sel.insert(0, keep[pos[0] - 1])
        if len(sel) < 2:
            continue
        sel = np.array(sel)
        clip = Trajectory(traj.t[sel], traj.lat[sel], traj.lon[sel], traj.v_kmh[sel],
                          traj.cum_km[sel] - traj.cum_km[sel[0]])
        out.append(TrafficObservation(driver_id, eid, clip, float(traj.t[sel[-1]])))
    return out


def _distances(net: RoadNetwork, source: str) -> dict[str, float]:
    import heapq

    dist = {source: 0.0}
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for eid in net.out_edges[u]:
            e = net.edges[eid]
            nd = d + e.length
            if nd < dist.get(e.to_node, math.inf):
                dist[e.to_node] = nd
                heapq.heappush(heap, (nd, e.to_node))
    return dist


def generate_corpus(
    seed: int = 42,
    n_trips: int = 300,
    grid_size: int = 16,
    train_fraction: float = 0.3,
    mcs_drivers: int = 3,
    length_range: tuple[float, float] = (1.0, 25.0),
    n_cases: int = 4,
    relief_m: float = 15.0,
) -> Corpus:
    rng = np.random.default_rng(seed)
    cfg = TrafficConfig()
    net = grid_network(rng, grid_size, relief_m=relief_m)
    congestion = congestion_table(rng, net)
    node_ids = sorted(net.nodes)
    store = TrafficStore()
    trips = []
    n_train = int(round(train_fraction * n_trips))
    for i in range(n_trips):
        # the weighted search can wander off the target, so redraw until in range
        while True:
            src = node_ids[int(rng.integers(len(node_ids)))]
            dist = _distances(net, src)
            target = rng.uniform(*length_range)
            cands = sorted((abs(d - target), n) for n, d in dist.items() if n != src)
            dst = cands[int(rng.integers(0, 3))][1]
            weights = rng.uniform(0.8, 1.4, size=len(net.edges))
            wmap = dict(zip(net.edges, weights))
            _, edges = _search(net, src, dst, lambda e: e.length * wmap[e.id])
            if length_range[0] <= net.path_length(edges) <= length_range[1]:
                break
        t0 = DAY0 + float(rng.integers(0, 7)) * 86400.0 + rng.uniform(6.0, 22.0) * 3600.0 - cfg.utc_offset_hours * 3600.0
        style = DriverStyle.sample(rng)
        traj, idx = drive_path(net, edges, style, congestion, t0, rng, cfg)
        trips.append(Trip(f"trip{i:04d}", t0, edges, src, dst, net.path_length(edges),
                          "train" if i < n_train else "test", traj, idx))
        if i >= n_train:
            _crowdsense(net, edges, t0, congestion, rng, cfg, store, f"trip{i:04d}", mcs_drivers)
    case_ids = []
    tests = [t for t in trips if t.split == "test" and 8.0 <= t.length_km <= 20.0]
    for trip in tests[:n_cases]:
        case_ids.append(trip.id)
        for path in (shortest_path(net, trip.source, trip.dest).edges,
                     _search(net, trip.source, trip.dest, lambda e: e.free_flow_time)[1]):
            _crowdsense(net, path, trip.t0, congestion, rng, cfg, store, f"{trip.id}-alt", mcs_drivers)
    return Corpus(net, store, trips, cfg, seed, case_ids)


def _crowdsense(net, edges, t0, congestion, rng, cfg, store, tag, n_drivers):
    window = cfg.window(t0)
    for j in range(n_drivers):
        style = DriverStyle.sample(rng)
        # arrive at the destination before t0 so every clip lies in the window
        start = t0 - rng.uniform(0.1, 0.9) * window
        traj, idx = drive_path(net, edges, style, congestion, start, rng, cfg,
                               initial_speed=rng.uniform(0.0, 10.0))
        shift = min(0.0, t0 - 1.0 - traj.t[-1])
        traj = traj.shifted(shift)
        for obs in clip_observations(f"{tag}-d{j}", edges, traj, idx, rng):
            if obs.submitted_at >= t0 - window:
                store.ingest(obs)
