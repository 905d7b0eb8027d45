import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecoroute.drcm import DrcmCoefficients
from ecoroute.vehicle_model import (
    PathFeatures,
    VehicleParams,
    load_vehicles,
    physical_coefficients,
    power_demand,
    total_force,
)

NO_FEATS = PathFeatures(0, 0, 0)


def test_bundled_vehicle_rows(vehicles):
    assert sorted(vehicles) == list(range(1, 9))
    expected = {1: (1650, 7.6), 2: (1620, 9.0), 3: (1925, 6.3), 4: (1677, 15.0),
                5: (1835, 12.0), 6: (1700, 9.0), 7: (1996, 11.1), 8: (1699, 12.0)}
    for vid, (mass, cap) in expected.items():
        assert vehicles[vid].mass == mass
        assert vehicles[vid].battery_capacity == cap
    assert (vehicles[1].make, vehicles[1].model) == ("Hyundai", "Sonata")


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        VehicleParams(0, "x", "y", mass=-1, battery_capacity=5)
    with pytest.raises(ValueError):
        VehicleParams(0, "x", "y", mass=1500, battery_capacity=5, engine_eta_min=0.4, engine_eta_max=0.3)


def test_force_at_rest_is_friction_only(sonata):
    assert total_force(0, 0, 0, NO_FEATS, sonata) == pytest.approx(0.01 * 1650 * 9.81)


def test_force_at_10ms(sonata):
    # 0.01*1650*9.81 + 0.5*0.3*1.2*2.2*100
    assert total_force(10, 0, 0, NO_FEATS, sonata) == pytest.approx(201.465, abs=1e-9)


@given(x=st.floats(0.0, 0.2))
def test_grade_term_is_odd(sonata, x):
    up = total_force(8, 0, x, NO_FEATS, sonata)
    down = total_force(8, 0, -x, NO_FEATS, sonata)
    assert up - down == pytest.approx(2 * 1650 * 9.81 * math.sin(x), rel=1e-9, abs=1e-9)


def test_negative_speed_rejected(sonata):
    with pytest.raises(ValueError):
        total_force(-1, 0, 0, NO_FEATS, sonata)


def test_power_demand_examples():
    assert power_demand(0, 3.0, PathFeatures(2, 3, 1), DrcmCoefficients(1, 1, 1, 1, 1, 1)) == 0
    k = DrcmCoefficients(0.2, 0.001, 0, 0, 0, 0)
    assert power_demand(5, 0, NO_FEATS, k) == pytest.approx(1.125)
    planted = DrcmCoefficients(0.2, 0.001, 0.5, 0.01, 0.01, 0.01)
    assert power_demand(10, 1, PathFeatures(2, 3, 1), planted) == pytest.approx(8.6)


def test_negative_demand_passes_through():
    k = DrcmCoefficients(0.2, 0.001, 0.5, 0.01, 0.01, 0.01)
    assert power_demand(10, -3, NO_FEATS, k) < 0


@given(v1=st.floats(0.1, 40), dv=st.floats(0.01, 10))
def test_power_demand_increasing_in_speed(v1, dv):
    k = DrcmCoefficients(0.16, 0.0004, 1.6, 0.08, 0.08, 0.08)
    assert power_demand(v1 + dv, 0, NO_FEATS, k) > power_demand(v1, 0, NO_FEATS, k)


def test_physical_coefficients_reproduce_force_model(sonata):
    rng = np.random.default_rng(0)
    k = DrcmCoefficients(*physical_coefficients(sonata))
    for _ in range(100):
        v = rng.uniform(0, 35)
        a = rng.uniform(-3, 3)
        feats = PathFeatures(*rng.integers(0, 6, size=3).astype(float))
        oracle = total_force(v, a, 0.0, feats, sonata) * v / 1000.0
        got = power_demand(v, a, feats, k)
        assert got == pytest.approx(oracle, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("v", [0.5, 5.0, 20.0, 33.0])
def test_force_speed_gradient(sonata, v):
    h = 1e-4
    fd = (total_force(v + h, 0.7, 0.01, NO_FEATS, sonata) - total_force(v - h, 0.7, 0.01, NO_FEATS, sonata)) / (2 * h)
    analytic = 0.3 * 1.2 * 2.2 * v  # d/dv of 0.5*phi*Cr*A*v^2
    assert fd == pytest.approx(analytic, rel=1e-6)


def test_path_features_add_componentwise():
    assert PathFeatures(1, 2, 0) + PathFeatures(0, 1, 3) == PathFeatures(1, 3, 3)
    assert PathFeatures(1, 2, 3).total == 6


def test_custom_vehicle_file(tmp_path):
    p = tmp_path / "v.json"
    p.write_text('{"9": {"make": "T", "model": "X", "mass": 1500, "battery_capacity": 10}}')
    table = load_vehicles(p)
    assert table[9].mass == 1500 and table[9].frontal_area == 2.2
