"""Directed road graph with shortest (distance) and fastest (time) path search.

Network files are JSON::

    {"nodes": [{"id": "a", "lat": 39.9, "lon": 116.4}, ...],
     "edges": [{"id": "e1", "from": "a", "to": "b", "length_km": 1.2,
                "ffs_kmh": 50, "ts": 1, "poi": 0, "theta": 0.0}, ...]}

``ts``, ``poi`` and ``theta`` are optional (default 0). The neighbouring-edge
count of an edge is derived at load time: the number of other edges touching
either of its endpoints.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Callable, Mapping

from .vehicle_model import PathFeatures


class NetworkError(ValueError):
    pass


class NoPathError(LookupError):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    lat: float = 0.0
    lon: float = 0.0


@dataclass(frozen=True)
class Edge:
    id: str
    from_node: str
    to_node: str
    length: float  # km
    free_flow_speed: float  # km/h
    theta: float = 0.0  # rad
    features: PathFeatures = PathFeatures()

    @property
    def free_flow_time(self) -> float:
        """Seconds at free-flow speed."""
        return self.length / self.free_flow_speed * 3600.0


@dataclass(frozen=True)
class Path:
    edges: tuple[str, ...]
    source: str
    destination: str
    total_length: float  # km
    total_time: float | None = None  # s, filled by fastest_path

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True, eq=False)
class RoadNetwork:
    nodes: Mapping[str, Node]
    edges: Mapping[str, Edge]
    out_edges: Mapping[str, tuple[str, ...]] = field(repr=False)

    @classmethod
    def build(cls, nodes: list[Node], raw_edges: list[dict]) -> "RoadNetwork":
        node_map = {}
        for n in nodes:
            if n.id in node_map:
                raise NetworkError(f"duplicate node id {n.id!r}")
            node_map[n.id] = n
        incident: dict[str, set[str]] = {nid: set() for nid in node_map}
        seen = set()
        for e in raw_edges:
            eid = str(e["id"])
            if eid in seen:
                raise NetworkError(f"duplicate edge id {eid!r}")
            seen.add(eid)
            for end in ("from", "to"):
                if str(e[end]) not in node_map:
                    raise NetworkError(f"edge {eid!r} references missing node {e[end]!r}")
            if not float(e["length_km"]) > 0:
                raise NetworkError(f"edge {eid!r} has non-positive length {e['length_km']!r}")
            if not float(e["ffs_kmh"]) > 0:
                raise NetworkError(f"edge {eid!r} has non-positive free-flow speed {e['ffs_kmh']!r}")
            incident[str(e["from"])].add(eid)
            incident[str(e["to"])].add(eid)
        edges = {}
        out: dict[str, list[str]] = {nid: [] for nid in node_map}
        for e in raw_edges:
            eid, u, v = str(e["id"]), str(e["from"]), str(e["to"])
            neighbours = len((incident[u] | incident[v]) - {eid})
            edges[eid] = Edge(
                eid, u, v, float(e["length_km"]), float(e["ffs_kmh"]),
                float(e.get("theta", 0.0)),
                PathFeatures(float(e.get("ts", 0)), float(neighbours), float(e.get("poi", 0))),
            )
            out[u].append(eid)
        return cls(node_map, edges, {k: tuple(sorted(v)) for k, v in out.items()})

    def path_length(self, edge_ids) -> float:
        return sum(self.edges[e].length for e in edge_ids)

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n.id, "lat": n.lat, "lon": n.lon} for n in self.nodes.values()],
            "edges": [
                {
                    "id": e.id, "from": e.from_node, "to": e.to_node,
                    "length_km": e.length, "ffs_kmh": e.free_flow_speed,
                    "ts": e.features.n_traffic_stops, "poi": e.features.n_poi, "theta": e.theta,
                }
                for e in self.edges.values()
            ],
        }


def load_network(file: str | FilePath | dict) -> RoadNetwork:
    if isinstance(file, dict):
        raw = file
    else:
        try:
            raw = json.loads(FilePath(file).read_text())
        except json.JSONDecodeError as exc:
            raise NetworkError(f"{file}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict) or "nodes" not in raw or "edges" not in raw:
        raise NetworkError("network file needs top-level 'nodes' and 'edges'")
    try:
        nodes = [Node(str(n["id"]), float(n.get("lat", 0.0)), float(n.get("lon", 0.0))) for n in raw["nodes"]]
        for e in raw["edges"]:
            for key in ("id", "from", "to", "length_km", "ffs_kmh"):
                if key not in e:
                    raise NetworkError(f"edge {e.get('id')!r} missing field {key!r}")
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"malformed network: {exc}") from exc
    return RoadNetwork.build(nodes, raw["edges"])


def save_network(net: RoadNetwork, path: str | FilePath) -> None:
    FilePath(path).write_text(json.dumps(net.to_dict(), indent=1) + "\n")


def _search(net: RoadNetwork, source: str, dest: str, weight: Callable[[Edge], float]) -> tuple[float, tuple[str, ...]]:
    # Labels are (cost, edge-id sequence); heap order gives the lexicographically
    # smallest sequence among equal-cost paths.
    for node in (source, dest):
        if node not in net.nodes:
            raise NetworkError(f"unknown node {node!r}")
    heap: list[tuple[float, tuple[str, ...], str]] = [(0.0, (), source)]
    settled: set[str] = set()
    while heap:
        cost, seq, node = heapq.heappop(heap)
        if node in settled:
            continue
        if node == dest:
            return cost, seq
        settled.add(node)
        for eid in net.out_edges[node]:
            e = net.edges[eid]
            if e.to_node not in settled:
                heapq.heappush(heap, (cost + weight(e), seq + (eid,), e.to_node))
    raise NoPathError(f"no path from {source!r} to {dest!r}")


def shortest_path(net: RoadNetwork, S: str, D: str) -> Path:
    """Minimum-length path; ties go to the lexicographically smallest edge sequence."""
    length, seq = _search(net, S, D, lambda e: e.length)
    return Path(seq, S, D, net.path_length(seq))


def fastest_path(
    net: RoadNetwork,
    S: str,
    D: str,
    t0: float | None = None,
    traffic=None,
    cfg=None,
) -> Path:
    """Minimum expected travel-time path.

    Edge time is the duration of the edge's representative crowdsensed
    trajectory at ``t0`` when ``traffic`` has one, otherwise the free-flow time.
    """
    times = edge_times(net, t0, traffic, cfg)
    total, seq = _search(net, S, D, lambda e: times[e.id])
    return Path(seq, S, D, net.path_length(seq), total)


def edge_times(net: RoadNetwork, t0=None, traffic=None, cfg=None) -> dict[str, float]:
    times = {}
    for eid, e in net.edges.items():
        rep = traffic.representative_trajectory(e, t0, cfg) if traffic is not None else None
        times[eid] = rep.duration if rep is not None and rep.duration > 0 else e.free_flow_time
    return times


def path_features(net: RoadNetwork, path: Path | tuple[str, ...]) -> PathFeatures:
    seq = path.edges if isinstance(path, Path) else path
    total = PathFeatures()
    for eid in seq:
        total = total + net.edges[eid].features
    return total


def validate_path(net: RoadNetwork, path: Path) -> None:
    node = path.source
    for eid in path.edges:
        e = net.edges.get(eid)
        if e is None or e.from_node != node:
            raise NetworkError(f"edge {eid!r} does not continue the path at node {node!r}")
        node = e.to_node
    if node != path.destination:
        raise NetworkError("path does not end at its destination")
