import json

import numpy as np
import pytest

import _oracles as orc
from ecoroute.roadnet import (
    NetworkError,
    NoPathError,
    edge_times,
    fastest_path,
    load_network,
    path_features,
    save_network,
    shortest_path,
)
from ecoroute.traffic import TrafficObservation, TrafficStore
from ecoroute.trajectory import Trajectory
from ecoroute.vehicle_model import PathFeatures


def test_single_edge_network():
    net = load_network({"nodes": [{"id": "a"}, {"id": "b"}],
                        "edges": [{"id": "e", "from": "a", "to": "b", "length_km": 1.0, "ffs_kmh": 50}]})
    assert len(net.edges) == 1
    assert net.edges["e"].features == PathFeatures(0, 0, 0)


def test_neighbour_count(diamond):
    # sa touches S (sb) and A (ad)
    assert diamond.edges["sa"].features == PathFeatures(1, 2, 0)
    assert diamond.edges["ad"].features == PathFeatures(0, 2, 3)


def test_missing_node_names_edge():
    with pytest.raises(NetworkError, match="'e1'"):
        load_network({"nodes": [{"id": "a"}],
                      "edges": [{"id": "e1", "from": "a", "to": "zz", "length_km": 1, "ffs_kmh": 40}]})


@pytest.mark.parametrize("edge", [
    {"id": "e", "from": "a", "to": "b", "length_km": 0, "ffs_kmh": 40},
    {"id": "e", "from": "a", "to": "b", "length_km": 1, "ffs_kmh": -1},
    {"id": "e", "from": "a", "to": "b", "ffs_kmh": 40},
])
def test_bad_edges(edge):
    with pytest.raises(NetworkError):
        load_network({"nodes": [{"id": "a"}, {"id": "b"}], "edges": [edge]})


def test_invalid_json(tmp_path):
    (tmp_path / "n.json").write_text("{nope")
    with pytest.raises(NetworkError):
        load_network(tmp_path / "n.json")


def test_round_trip(diamond, tmp_path):
    save_network(diamond, tmp_path / "n.json")
    again = load_network(tmp_path / "n.json")
    assert again.edges == diamond.edges


def test_diamond_paths(diamond):
    sp = shortest_path(diamond, "S", "D")
    assert sp.edges == ("sa", "ad") and sp.total_length == pytest.approx(3.0)
    fp = fastest_path(diamond, "S", "D")
    assert fp.edges == ("sb", "bd")  # 5 km at 80 beats 3 km at 30
    assert len(orc.all_simple_paths({e.id: (e.from_node, e.to_node) for e in diamond.edges.values()}, "S", "D")) == 2


def test_same_node(diamond):
    assert shortest_path(diamond, "S", "S").edges == () and shortest_path(diamond, "S", "S").total_length == 0
    fp = fastest_path(diamond, "A", "A")
    assert fp.edges == () and fp.total_time == 0


def test_unreachable(diamond):
    with pytest.raises(NoPathError):
        shortest_path(diamond, "D", "S")


def test_equal_length_tie_is_lexicographic():
    net = load_network({
        "nodes": [{"id": n} for n in "SXYD"],
        "edges": [
            {"id": "b1", "from": "S", "to": "X", "length_km": 2, "ffs_kmh": 50},
            {"id": "b2", "from": "X", "to": "D", "length_km": 2, "ffs_kmh": 50},
            {"id": "a1", "from": "S", "to": "Y", "length_km": 2, "ffs_kmh": 50},
            {"id": "a2", "from": "Y", "to": "D", "length_km": 2, "ffs_kmh": 50},
        ],
    })
    assert shortest_path(net, "S", "D").edges == ("a1", "a2")


def _slow_obs(edge, t0, seconds):
    n = int(seconds) + 1
    t = t0 - 900 + np.arange(n, dtype=float)
    z = np.zeros(n)
    cum = np.linspace(0, edge.length, n)
    return TrafficObservation("d0", edge.id, Trajectory(t, z, z, np.full(n, 5.0), cum), t0 - 900)


def test_congested_short_arm_detoured():
    net = load_network({
        "nodes": [{"id": n} for n in "SABD"],
        "edges": [
            {"id": "sa", "from": "S", "to": "A", "length_km": 1.5, "ffs_kmh": 60},
            {"id": "ad", "from": "A", "to": "D", "length_km": 1.5, "ffs_kmh": 60},
            {"id": "sb", "from": "S", "to": "B", "length_km": 2.5, "ffs_kmh": 60},
            {"id": "bd", "from": "B", "to": "D", "length_km": 2.5, "ffs_kmh": 60},
        ],
    })
    t0 = 1_462_078_800.0
    assert fastest_path(net, "S", "D", t0, TrafficStore()).edges == ("sa", "ad")
    store = TrafficStore()
    store.ingest(_slow_obs(net.edges["sa"], t0, 1000))
    fp = fastest_path(net, "S", "D", t0, store)
    assert fp.edges == ("sb", "bd")
    assert fp.total_time == pytest.approx(2 * 2.5 / 60 * 3600)


def test_path_features(diamond):
    assert path_features(diamond, ()) == PathFeatures(0, 0, 0)
    assert path_features(diamond, ("sa",)) == diamond.edges["sa"].features
    assert path_features(diamond, shortest_path(diamond, "S", "D")) == PathFeatures(1, 4, 3)


@pytest.mark.parametrize("seed", range(40))
def test_brute_force_equivalence(seed):
    rng = np.random.default_rng(seed)
    raw = orc.random_digraph(rng, int(rng.integers(3, 9)))
    net = load_network(raw)
    pairs = {e["id"]: (e["from"], e["to"]) for e in raw["edges"]}
    lengths = {e["id"]: e["length_km"] for e in raw["edges"]}
    times = edge_times(net)
    nodes = [n["id"] for n in raw["nodes"]]
    for s in nodes:
        for d in nodes:
            if s == d:
                continue
            best = orc.best_path(pairs, lengths, s, d)
            if best is None:
                with pytest.raises(NoPathError):
                    shortest_path(net, s, d)
                continue
            sp = shortest_path(net, s, d)
            assert sp.total_length == pytest.approx(best[0], abs=1e-9)
            ft = orc.best_path(pairs, times, s, d)
            fp = fastest_path(net, s, d)
            assert fp.total_time == pytest.approx(ft[0], abs=1e-6)
            assert fp.total_time <= sum(times[e] for e in sp.edges) + 1e-9
            assert sp.total_length <= fp.total_length + 1e-9


def test_deterministic(tmp_path):
    rng = np.random.default_rng(5)
    raw = orc.random_digraph(rng, 8, p_edge=0.6)
    a = load_network(raw)
    b = load_network(json.loads(json.dumps(raw)))
    for s in ("v0", "v3"):
        for d in ("v5", "v7"):
            assert shortest_path(a, s, d) == shortest_path(b, s, d)


def test_unknown_node_is_input_error(diamond):
    with pytest.raises(NetworkError, match="unknown node"):
        shortest_path(diamond, "S", "nowhere")
    with pytest.raises(NetworkError):
        fastest_path(diamond, "nowhere", "D")
