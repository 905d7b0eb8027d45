"""Per-vehicle route cost model: least-squares calibration and monetary cost."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .ecms import EcmsConfig, PowerSplit, SocState, Stage, engine_efficiency
from .phev_sim import run_kernel
from .trajectory import Trajectory
from .vehicle_model import PathFeatures, VehicleParams, physical_coefficients

FEATURE_NAMES = ("v", "v^3", "v*dv", "v*dv*ts", "v*dv*n", "v*dv*poi")


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class DrcmCoefficients:
    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    residual_rms: float = 0.0  # kW
    n_training_samples: int = 0

    def __iter__(self):
        return iter((self.k1, self.k2, self.k3, self.k4, self.k5, self.k6))

    def as_array(self) -> np.ndarray:
        return np.array(list(self))

    @classmethod
    def from_physics(cls, params: VehicleParams) -> "DrcmCoefficients":
        """Coefficients implied by the flat-road force model (no fitting)."""
        return cls(*physical_coefficients(params))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PriceTable:
    gasoline_price_n: float = 6.20  # CNY/L
    electricity_price_m: float = 0.8  # CNY/kWh

    def __post_init__(self):
        if self.gasoline_price_n <= 0 or self.electricity_price_m <= 0:
            raise ValueError("prices must be positive")

    @classmethod
    def load(cls, path: str | Path | None = None) -> "PriceTable":
        if path is None:
            return cls()
        d = json.loads(Path(path).read_text())
        return cls(float(d["gasoline_price_n"]), float(d["electricity_price_m"]))

    def scaled(self, factor: float) -> "PriceTable":
        return PriceTable(self.gasoline_price_n * factor, self.electricity_price_m * factor)


@dataclass(frozen=True)
class CostBreakdown:
    gasoline_cost: float  # CNY
    electricity_cost: float  # CNY
    total: float
    gasoline_liters: float
    battery_kWh: float

    @classmethod
    def zero(cls) -> "CostBreakdown":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)

    def __add__(self, other: "CostBreakdown") -> "CostBreakdown":
        g = self.gasoline_cost + other.gasoline_cost
        e = self.electricity_cost + other.electricity_cost
        return CostBreakdown(
            g, e, g + e,
            self.gasoline_liters + other.gasoline_liters,
            self.battery_kWh + other.battery_kWh,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def design_matrix(v, dv, ts, nb, poi) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    vdv = v * np.asarray(dv, dtype=float)
    return np.column_stack([v, v**3, vdv, vdv * ts, vdv * nb, vdv * poi])


def _collinear_columns(X: np.ndarray, tol: float) -> list[str]:
    _, sv, vt = np.linalg.svd(X, full_matrices=False)
    null = vt[sv <= tol * sv[0]]
    involved = np.any(np.abs(null) > 1e-8, axis=0)
    return [FEATURE_NAMES[i] for i in np.flatnonzero(involved)]


def calibrate_arrays(v, dv, ts, nb, poi, q) -> DrcmCoefficients:
    """Ordinary least squares of observed power ``q`` (kW) on the six features."""
    X = design_matrix(v, dv, ts, nb, poi)
    q = np.asarray(q, dtype=float)
    n = X.shape[0]
    if n < 6:
        raise CalibrationError(f"need at least 6 samples, got {n}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(q))):
        raise CalibrationError("non-finite calibration samples")
    scale = np.linalg.norm(X, axis=0)
    if np.any(scale == 0):
        dead = [FEATURE_NAMES[i] for i in np.flatnonzero(scale == 0)]
        raise CalibrationError(f"design matrix is rank deficient; all-zero columns: {', '.join(dead)}")
    Xs = X / scale
    tol = max(Xs.shape) * np.finfo(float).eps * 1e3
    rank = np.linalg.matrix_rank(Xs, tol=tol * np.linalg.norm(Xs, 2))
    if rank < 6:
        cols = _collinear_columns(Xs, tol)
        raise CalibrationError(
            f"design matrix is rank deficient (rank {rank}); collinear columns: {', '.join(cols)}"
        )
    beta, *_ = np.linalg.lstsq(Xs, q, rcond=None)
    k = beta / scale
    resid = q - X @ k
    return DrcmCoefficients(*map(float, k), float(np.sqrt(np.mean(resid**2))), int(n))


def calibrate(samples: Iterable[tuple[float, float, PathFeatures, float]]) -> DrcmCoefficients:
    """Fit k1..k6 from ``(v, dv, features, Q_observed)`` samples."""
    rows = [(v, dv, f[0], f[1], f[2], q) for v, dv, f, q in samples]
    if not rows:
        raise CalibrationError("no calibration samples")
    a = np.array(rows, dtype=float)
    return calibrate_arrays(*a.T)


def instantaneous_cost(split: PowerSplit, params: VehicleParams, prices: PriceTable) -> float:
    """Cost rate in CNY/s of one engine/battery split; negative battery power credits."""
    eta = engine_efficiency(split.p_eng, params)
    gas = prices.gasoline_price_n * split.p_eng / (eta * params.fuel_lhv_Qlhv * params.fuel_density_rho)
    return gas + prices.electricity_price_m * split.p_batt / 3600.0


def breakdown_from_series(m_f, p_batt, dt, params: VehicleParams, prices: PriceTable) -> CostBreakdown:
    liters = float(np.sum(np.asarray(m_f) * dt)) / params.fuel_density_rho
    kwh = float(np.sum(np.asarray(p_batt) * dt)) / 3600.0
    g = prices.gasoline_price_n * liters
    e = prices.electricity_price_m * kwh
    return CostBreakdown(g, e, g + e, liters, kwh)


def route_cost(
    traj: Trajectory,
    coeffs: DrcmCoefficients,
    params: VehicleParams,
    cfg: EcmsConfig,
    prices: PriceTable,
    soc0: float | SocState,
    feats=PathFeatures(),
    diagnostics: dict | None = None,
) -> tuple[CostBreakdown, SocState]:
    """Estimated monetary cost of driving ``traj`` and the SOC state at its end.

    Demand comes from the fitted coefficients, the split from the ECMS, and
    the cost rate is summed over the 1 s intervals (left rectangle). Pass the
    returned state as ``soc0`` of the next segment to chain edges.
    """
    if len(traj) < 2:
        state = soc0 if isinstance(soc0, SocState) else SocState.initial(float(soc0), cfg)
        return CostBreakdown.zero(), state
    out = run_kernel(
        traj, params, cfg, soc0, feats=feats, coeffs=coeffs,
        prices=(prices.gasoline_price_n, prices.electricity_price_m),
    )
    if diagnostics is not None:
        diagnostics["n_clipped"] = diagnostics.get("n_clipped", 0) + out["n_clipped"]
        diagnostics["unmet_kj"] = diagnostics.get("unmet_kj", 0.0) + out["unmet_kj"]
    cost = breakdown_from_series(out["m_f"], out["p_batt"], np.diff(traj.t), params, prices)
    return cost, SocState(out["soc_final"], Stage(out["stage_final"]))


def save_coefficients(path: str | Path, table: dict[int, DrcmCoefficients]) -> None:
    data = {str(k): c.to_dict() for k, c in sorted(table.items())}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def load_coefficients(path: str | Path) -> dict[int, DrcmCoefficients]:
    raw = json.loads(Path(path).read_text())
    return {int(k): DrcmCoefficients(**v) for k, v in raw.items()}
