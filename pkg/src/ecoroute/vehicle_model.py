"""Longitudinal vehicle physics and the linearised power-demand model."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, NamedTuple

if TYPE_CHECKING:
    from .drcm import DrcmCoefficients

KMH_TO_MS = 1.0 / 3.6


class PathFeatures(NamedTuple):
    """Traffic-stop, neighbouring-edge and POI counts of a path or edge."""

    n_traffic_stops: float = 0
    n_neighbor_edges: float = 0
    n_poi: float = 0

    def __add__(self, other):  # component-wise, unlike tuple concatenation
        return PathFeatures(
            self.n_traffic_stops + other.n_traffic_stops,
            self.n_neighbor_edges + other.n_neighbor_edges,
            self.n_poi + other.n_poi,
        )

    @property
    def total(self) -> float:
        return self.n_traffic_stops + self.n_neighbor_edges + self.n_poi


@dataclass(frozen=True)
class VehicleParams:
    id: int
    make: str
    model: str
    mass: float  # kg
    battery_capacity: float  # kWh
    frontal_area: float = 2.2  # m^2
    drag_coefficient_phi: float = 0.30
    air_density_Cr: float = 1.2  # kg/m^3
    friction_coefficient_mu: float = 0.01
    gravity_g: float = 9.81
    accel_coefficient_beta: float = 0.05
    congestion_gamma: float = 20.0
    fuel_lhv_Qlhv: float = 44.0  # MJ/kg == kJ/g
    fuel_density_rho: float = 725.0  # g/L
    engine_rated_power: float = 80.0  # kW
    engine_eta_max: float = 0.36
    engine_eta_min: float = 0.10

    def __post_init__(self):
        if self.mass <= 0 or self.battery_capacity <= 0:
            raise ValueError(f"vehicle {self.id}: mass and battery capacity must be positive")
        if not 0 < self.engine_eta_min < self.engine_eta_max < 1:
            raise ValueError(f"vehicle {self.id}: need 0 < eta_min < eta_max < 1")
        if self.fuel_lhv_Qlhv <= 0 or self.fuel_density_rho <= 0:
            raise ValueError(f"vehicle {self.id}: fuel constants must be positive")
        if self.engine_rated_power <= 0:
            raise ValueError(f"vehicle {self.id}: engine_rated_power must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "VehicleParams":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def to_dict(self) -> dict:
        return asdict(self)


def load_vehicles(path: str | Path | None = None) -> dict[int, VehicleParams]:
    """Load the vehicle fixture keyed by car number; the bundled table by default."""
    if path is None:
        text = resources.files("ecoroute.data").joinpath("vehicles.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    return {int(k): VehicleParams.from_dict({"id": int(k), **v}) for k, v in raw.items()}


def total_force(v: float, a: float, theta: float, feats: PathFeatures, params: VehicleParams) -> float:
    """Tractive force in N: friction + grade + aerodynamic drag + inertial term.

    The inertial term is scaled by ``beta * (gamma + |ts| + |n| + |poi|)``; the
    feature sum is treated as a dimensionless congestion multiplier. Negative
    ``a`` yields a negative inertial term (regeneration potential).
    """
    if v < 0:
        raise ValueError("speed must be non-negative")
    m = params.mass
    g = params.gravity_g
    return (
        params.friction_coefficient_mu * m * g * math.cos(theta)
        + m * g * math.sin(theta)
        + 0.5 * params.drag_coefficient_phi * params.air_density_Cr * params.frontal_area * v * v
        + params.accel_coefficient_beta * m * a
        * (params.congestion_gamma + feats.n_traffic_stops + feats.n_neighbor_edges + feats.n_poi)
    )


def power_demand(v: float, dv: float, feats: PathFeatures, coeffs: "DrcmCoefficients") -> float:
    """Total demanded power in kW from the six-coefficient linear model.

    ``dv`` is the speed change over one 1 s sample (m/s). May be negative.
    """
    if v < 0:
        raise ValueError("speed must be non-negative")
    return (
        coeffs.k1 * v
        + coeffs.k2 * v**3
        + (
            coeffs.k3
            + coeffs.k4 * feats.n_traffic_stops
            + coeffs.k5 * feats.n_neighbor_edges
            + coeffs.k6 * feats.n_poi
        )
        * v
        * dv
    )


def physical_coefficients(params: VehicleParams) -> tuple[float, ...]:
    """(k1..k6) that make ``power_demand`` equal ``total_force * v / 1000`` on flat road."""
    m = params.mass
    k1 = params.friction_coefficient_mu * m * params.gravity_g / 1000.0
    k2 = 0.5 * params.drag_coefficient_phi * params.air_density_Cr * params.frontal_area / 1000.0
    k_feat = params.accel_coefficient_beta * m / 1000.0
    k3 = k_feat * params.congestion_gamma
    return (k1, k2, k3, k_feat, k_feat, k_feat)
