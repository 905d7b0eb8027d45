import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecoroute.roadnet import Edge
from ecoroute.traffic import (
    InterpolationError,
    TrafficConfig,
    TrafficObservation,
    TrafficStore,
    free_flow_trajectory,
    interpolate,
)
from ecoroute.trajectory import Trajectory

NOON = 1_462_075_200.0  # 12:00 local
RUSH = 1_462_060_800.0  # 08:00 local
EDGE = Edge("e", "a", "b", 2.0, 50.0)


def traj(dist_km, t_end, n=5):
    t = t_end - np.arange(n)[::-1] * 6.0
    z = np.zeros(n)
    return Trajectory(t, z, z, np.full(n, 30.0), np.linspace(0, dist_km, n))


def obs(driver, dist_km, at, edge="e"):
    return TrafficObservation(driver, edge, traj(dist_km, at), at)


def test_window_length():
    cfg = TrafficConfig()
    assert cfg.window(NOON) == 7200.0
    assert cfg.window(RUSH) == 3600.0
    assert cfg.window(RUSH + 3600 * 9.5) == 3600.0  # 17:30


def test_ingest_query_and_duplicates():
    s = TrafficStore()
    o = obs("d1", 2.0, NOON - 60)
    s.ingest(o)
    s.ingest(obs("d1", 2.0, NOON - 60))
    assert len(s) == 1
    assert s.query("e", NOON - 120, NOON) == [o]
    assert s.query("e", NOON - 30, NOON) == []
    assert s.query("other", 0, NOON) == []


def test_representative_examples():
    s = TrafficStore()
    s.ingest(obs("only", 1.0, NOON - 100))
    assert s.representative(EDGE, NOON).driver_id == "only"
    for i, d in enumerate((1.7, 1.95, 2.4)):
        s.ingest(obs(f"d{i}", d, NOON - 10 * (i + 1)))
    assert s.representative_trajectory(EDGE, NOON).distance_km() == pytest.approx(1.95)


def test_old_observations_ignored():
    s = TrafficStore()
    s.ingest(obs("d", 2.0, NOON - 7201))
    assert s.representative_trajectory(EDGE, NOON) is None
    assert s.representative_trajectory(EDGE, None) is None


def test_tie_prefers_most_recent():
    s = TrafficStore()
    s.ingest(obs("old", 2.1, NOON - 500))
    s.ingest(obs("new", 1.9, NOON - 100))
    assert s.representative(EDGE, NOON).driver_id == "new"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 4.0), st.floats(0, 10000)), min_size=1, max_size=15),
       st.booleans())
def test_selection_matches_brute_force(items, rush):
    t0 = RUSH if rush else NOON
    cfg = TrafficConfig()
    s = TrafficStore()
    all_obs = []
    for i, (d, age) in enumerate(items):
        o = obs(f"d{i}", d, t0 - age)
        s.ingest(o)
        all_obs.append(o)
    window = [o for o in all_obs if t0 - cfg.window(t0) <= o.submitted_at <= t0]
    got = s.representative(EDGE, t0, cfg)
    if not window:
        assert got is None
        return
    for o in s.query("e", t0 - cfg.window(t0), t0):
        assert t0 - cfg.window(t0) <= o.submitted_at <= t0
    best = min(window, key=lambda o: (abs(o.trajectory.distance_km() - 2.0), -o.submitted_at))
    assert abs(got.trajectory.distance_km() - 2.0) == abs(best.trajectory.distance_km() - 2.0)
    assert got.submitted_at == best.submitted_at


def test_concurrent_ingest():
    s = TrafficStore()

    def worker(k):
        for i in range(200):
            s.ingest(obs(f"w{k}", 2.0, NOON - i))

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert len(s) == 800
    assert len(s.query("e", 0, NOON)) == 800


def test_persistence(tmp_path):
    log = tmp_path / "log.jsonl"
    s = TrafficStore(log_path=log)
    s.ingest(obs("a", 2.0, NOON - 5))
    s.ingest(obs("b", 1.0, NOON - 50, edge="f"))
    again = TrafficStore.load(log)
    assert len(again) == 2
    assert again.query("e", 0, NOON)[0].trajectory.equals(s.query("e", 0, NOON)[0].trajectory)
    s.dump(tmp_path / "dump.jsonl")
    assert len(TrafficStore.load(tmp_path / "dump.jsonl")) == 2


def test_interpolate_examples():
    z = np.zeros(2)
    out = interpolate(Trajectory([0.0, 6.0], z, z, [0.0, 12.0]), 1.0)
    assert list(out.t) == [0, 1, 2, 3, 4, 5, 6]
    assert list(out.v_kmh) == [0, 2, 4, 6, 8, 10, 12]
    uniform = Trajectory(np.arange(5.0), np.zeros(5), np.zeros(5), np.full(5, 7.0))
    assert interpolate(uniform, 1.0) is uniform
    const = interpolate(Trajectory([0.0, 4.0, 10.0], np.zeros(3), np.zeros(3), np.full(3, 33.0)), 1.0)
    assert np.all(const.v_kmh == 33.0)
    with pytest.raises(InterpolationError):
        interpolate(Trajectory([0.0], [0.0], [0.0], [1.0]))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.2, 12.0), min_size=1, max_size=20), st.lists(st.floats(0, 100), min_size=21, max_size=21))
def test_interpolate_preserves_endpoints(gaps, speeds):
    t = np.concatenate([[0.0], np.cumsum(gaps)])
    v = np.array(speeds[: len(t)])
    z = np.zeros(len(t))
    out = interpolate(Trajectory(t, z, z, v), 1.0)
    assert out.t[0] == t[0] and out.t[-1] == t[-1]
    assert out.v_kmh[0] == v[0] and out.v_kmh[-1] == v[-1]
    assert np.all(np.diff(out.t)[:-1] == 1.0) and np.diff(out.t)[-1] <= 1.0


def test_free_flow_trajectory():
    tr = free_flow_trajectory(EDGE, 100.0)
    assert tr.duration == pytest.approx(EDGE.free_flow_time)
    assert tr.distance_km() == pytest.approx(2.0)
    assert tr.t[0] == 100.0
