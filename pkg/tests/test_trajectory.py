import numpy as np
import pytest

from ecoroute.trajectory import Trajectory, concatenate, read_csv, write_csv


def make(t, v):
    z = np.zeros(len(t))
    return Trajectory(t, z, z, v)


def test_validation():
    with pytest.raises(ValueError):
        make([0.0, 0.0], [1, 1])
    with pytest.raises(ValueError):
        make([0.0, 1.0], [1, -1])
    with pytest.raises(ValueError):
        Trajectory([], [], [], [])


def test_speed_conversion_and_distance():
    tr = make(np.arange(3601.0), np.full(3601, 36.0))
    assert tr.v_ms[0] == pytest.approx(10.0)
    assert tr.distance_km() == pytest.approx(36.0)
    assert tr.duration == 3600.0


def test_recorded_distance_wins():
    z = np.zeros(3)
    tr = Trajectory([0.0, 1.0, 2.0], z, z, [0.0, 0.0, 0.0], [1.0, 1.5, 2.0])
    assert tr.distance_km() == 1.0


def test_concatenate_merges_boundary():
    a = make([0.0, 1.0, 2.0], [0, 5, 10])
    b = make([2.0, 3.0], [10, 0])
    c = concatenate([a, b])
    assert list(c.t) == [0, 1, 2, 3] and list(c.v_kmh) == [0, 5, 10, 0]
    with pytest.raises(ValueError):
        concatenate([a, make([5.0, 6.0], [0, 0])])


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    t = np.cumsum(rng.uniform(0.5, 2, 50))
    tr = Trajectory(t, rng.normal(39.9, 0.01, 50), rng.normal(116.4, 0.01, 50), rng.uniform(0, 90, 50))
    write_csv(tmp_path / "t.csv", tr)
    assert read_csv(tmp_path / "t.csv").equals(tr)


def test_csv_missing_column(tmp_path):
    (tmp_path / "bad.csv").write_text("t,v_kmh\n0,1\n")
    with pytest.raises(ValueError, match="missing"):
        read_csv(tmp_path / "bad.csv")
