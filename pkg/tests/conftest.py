import pytest

from ecoroute.drcm import DrcmCoefficients, PriceTable
from ecoroute.ecms import EcmsConfig
from ecoroute.roadnet import load_network
from ecoroute.vehicle_model import load_vehicles


@pytest.fixture(scope="session")
def vehicles():
    return load_vehicles()


@pytest.fixture(scope="session")
def sonata(vehicles):
    return vehicles[1]


@pytest.fixture(scope="session")
def cfg(sonata):
    return EcmsConfig().for_vehicle(sonata)


@pytest.fixture(scope="session")
def prices():
    return PriceTable()


@pytest.fixture(scope="session")
def physics_coeffs(sonata):
    return DrcmCoefficients.from_physics(sonata)


DIAMOND = {
    "nodes": [{"id": n} for n in ("S", "A", "B", "D")],
    "edges": [
        {"id": "sa", "from": "S", "to": "A", "length_km": 1.5, "ffs_kmh": 30, "ts": 1, "poi": 0},
        {"id": "ad", "from": "A", "to": "D", "length_km": 1.5, "ffs_kmh": 30, "ts": 0, "poi": 3},
        {"id": "sb", "from": "S", "to": "B", "length_km": 2.5, "ffs_kmh": 80},
        {"id": "bd", "from": "B", "to": "D", "length_km": 2.5, "ffs_kmh": 80},
    ],
}


@pytest.fixture
def diamond():
    """Arms of 3 km (slow, via A) and 5 km (fast, via B)."""
    return load_network(DIAMOND)
