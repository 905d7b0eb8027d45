"""Instantaneous equivalent-consumption power split between engine and battery.

The objective at each step is

    J(p_eng) = p_eng / (eta(p_eng) * Q_lhv) + s * p_batt / Q_lhv,   p_batt = Q - p_eng

in grams of equivalent fuel per second. Because eta depends on p_eng the
minimum is found by scanning a grid of engine powers (plus the feasible
endpoints and the analytic stationary point of the unclamped efficiency map).
"""
from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path

from ._backend import CD, CS, SOC_EPS, kernels
from .vehicle_model import VehicleParams


class InfeasibleDemand(ValueError):
    """Demanded power exceeds engine plus battery discharge limits."""


class Stage(enum.IntEnum):
    CD = CD  # charge depleting
    CS = CS  # charge sustaining


@dataclass(frozen=True)
class EcmsConfig:
    equivalence_factor_s: float = 2.5
    soc_cs_threshold: float = 0.30
    soc_cs_band: float = 0.03
    p_eng_max: float = 80.0  # kW
    p_batt_discharge_max: float = 50.0  # kW
    p_batt_charge_max: float = 25.0  # kW, applied as negative battery power
    grid_resolution: float = 0.1  # kW

    def __post_init__(self):
        if self.equivalence_factor_s <= 0:
            raise ValueError("equivalence_factor_s must be positive")
        if not 0 < self.soc_cs_threshold < 1:
            raise ValueError("soc_cs_threshold must lie in (0, 1)")
        if self.soc_cs_band < 0 or self.soc_cs_threshold + self.soc_cs_band >= 1:
            raise ValueError("soc_cs_band out of range")
        if self.grid_resolution <= 0:
            raise ValueError("grid_resolution must be positive")
        if self.p_eng_max <= 0 or self.p_batt_discharge_max <= 0 or self.p_batt_charge_max < 0:
            raise ValueError("power limits out of range")

    @classmethod
    def from_dict(cls, d: dict) -> "EcmsConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    @classmethod
    def load(cls, path: str | Path | None = None) -> "EcmsConfig":
        if path is None:
            text = resources.files("ecoroute.data").joinpath("ecms.json").read_text()
        else:
            text = Path(path).read_text()
        return cls.from_dict(json.loads(text))

    def for_vehicle(self, params: VehicleParams) -> "EcmsConfig":
        """Same settings with the engine limit set to the vehicle's rated power."""
        return replace(self, p_eng_max=params.engine_rated_power)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SocState:
    soc: float
    stage: Stage

    @classmethod
    def initial(cls, soc: float, cfg: EcmsConfig) -> "SocState":
        """Stage for a fresh start: CD only above the upper edge of the hysteresis band."""
        if not 0.0 <= soc <= 1.0:
            raise ValueError(f"soc {soc} outside [0, 1]")
        stage = Stage.CD if soc > cfg.soc_cs_threshold + cfg.soc_cs_band + SOC_EPS else Stage.CS
        return cls(soc, stage)


@dataclass(frozen=True)
class PowerSplit:
    p_eng: float  # kW
    p_batt: float  # kW, negative while charging


def engine_efficiency(p_eng: float, params: VehicleParams) -> float:
    """Concave efficiency map eta_max * (2u - u^2), clamped to [eta_min, eta_max]."""
    if p_eng < 0:
        raise ValueError(f"engine power must be non-negative, got {p_eng}")
    return kernels.engine_efficiency(
        float(p_eng), params.engine_rated_power, params.engine_eta_max, params.engine_eta_min
    )


def equivalent_fuel_rate(split: PowerSplit, cfg: EcmsConfig, params: VehicleParams) -> float:
    """Objective value (g/s) of a split."""
    eta = engine_efficiency(split.p_eng, params)
    q = params.fuel_lhv_Qlhv
    return split.p_eng / (eta * q) + cfg.equivalence_factor_s * split.p_batt / q


def split_power(
    Q: float, state: SocState, cfg: EcmsConfig, params: VehicleParams, dt: float = 1.0
) -> PowerSplit:
    """Split demand ``Q`` (kW) for one step of length ``dt`` seconds.

    Battery limits combine the configured power caps with the energy left
    between the current SOC and the stage's SOC window (``[0, 1]`` in CD,
    ``[threshold, threshold + band]`` in CS). The CS discharge window is
    exceeded only when the engine alone cannot meet ``Q``. Negative demand
    charges the battery up to the charge cap; the rest goes to friction brakes.

    Ties prefer the smaller engine power in CD and the larger in CS.
    """
    limit = cfg.p_eng_max + cfg.p_batt_discharge_max
    if Q > limit:
        raise InfeasibleDemand(f"demand {Q:.3f} kW exceeds {limit:.3f} kW")
    pe, pb, _ = kernels.split(
        float(Q), float(state.soc), int(state.stage), float(dt),
        params.engine_rated_power, params.engine_eta_max, params.engine_eta_min,
        params.fuel_lhv_Qlhv, params.battery_capacity,
        cfg.equivalence_factor_s, cfg.soc_cs_threshold, cfg.soc_cs_band,
        cfg.p_eng_max, cfg.p_batt_discharge_max, cfg.p_batt_charge_max, cfg.grid_resolution,
    )
    return PowerSplit(pe, pb)


def step_soc(
    state: SocState, split: PowerSplit, dt: float, cfg: EcmsConfig, params: VehicleParams
) -> SocState:
    """Advance SOC by one step; the stage switches with hysteresis."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    soc = state.soc - split.p_batt * dt / (3600.0 * params.battery_capacity)
    soc = min(max(soc, 0.0), 1.0)
    stage = kernels.next_stage(int(state.stage), soc, cfg.soc_cs_threshold, cfg.soc_cs_band)
    return SocState(soc, Stage(stage))
