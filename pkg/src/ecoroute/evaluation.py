"""Error metrics and the desk-scale evaluation harness."""
from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus, Trip
from .drcm import (
    CalibrationError,
    DrcmCoefficients,
    PriceTable,
    breakdown_from_series,
    calibrate_arrays,
    route_cost,
)
from .ecms import EcmsConfig
from .phev_sim import run_kernel
from .recommend import estimate_path_cost, recommend
from .roadnet import Path as RoutePath
from .vehicle_model import VehicleParams

LENGTH_BINS: tuple[tuple[float, float], ...] = ((0, 5), (5, 10), (10, 15), (15, 20), (20, 25))
SOC_GRID = (0.8, 0.5, 0.33)
VEHICLE_PATH_RANGE = (8.0, 12.0)  # km, "10 km" paths


class MissingCalibration(KeyError):
    pass


@dataclass(frozen=True)
class ErrorRecord:
    path_id: str
    path_length: float  # km
    soc0: float
    estimated: float  # CNY
    actual: float  # CNY
    error_pct: float
    vehicle: int = 1
    method: str = "actual"  # trajectory source: "actual" or "mcs"


def route_error(estimated: float, actual: float) -> float:
    """Signed percentage error of an estimate against the simulated cost."""
    if actual <= 0:
        raise ValueError(f"actual cost must be positive, got {actual}")
    return (estimated - actual) / actual * 100.0


def mean_error(records: Iterable[ErrorRecord | float]) -> float:
    """Mean absolute percentage error over records (or raw signed errors)."""
    errs = [r.error_pct if isinstance(r, ErrorRecord) else float(r) for r in records]
    if not errs:
        raise ValueError("mean_error of an empty set")
    return float(np.mean(np.abs(errs)))


def bin_of(length: float, bins: Sequence[tuple[float, float]] = LENGTH_BINS) -> int | None:
    for i, (lo, hi) in enumerate(bins):
        last = i == len(bins) - 1
        if lo <= length < hi or (last and length == hi):
            return i
    return None


def training_samples(trips: Iterable[Trip], corpus: Corpus, params: VehicleParams, cfg: EcmsConfig):
    """(v, dv, ts, nb, poi, q) arrays from simulated readings of ``trips``.

    A trip carrying its own ``q_kw`` readings is used as-is.
    """
    cols = [[] for _ in range(6)]
    for trip in trips:
        feats = trip.feature_track(corpus.net)
        if trip.q_kw is not None:
            q = trip.q_kw
        else:
            q = run_kernel(trip.traj, params, cfg, 0.8, feats=feats, theta=trip.theta_track(corpus.net))["q"]
        v = trip.traj.v_ms
        dt = np.diff(trip.traj.t)
        for store, arr in zip(cols, (v[:-1], np.diff(v) / dt, feats[:-1, 0], feats[:-1, 1],
                                     feats[:-1, 2], q)):
            store.append(arr)
    return [np.concatenate(c) for c in cols]


def calibrate_vehicle(corpus: Corpus, params: VehicleParams, cfg: EcmsConfig | None = None,
                      trips: Sequence[Trip] | None = None) -> DrcmCoefficients:
    cfg = cfg or EcmsConfig().for_vehicle(params)
    trips = corpus.split("train") if trips is None else trips
    if not trips:
        raise CalibrationError("no training trips")
    return calibrate_arrays(*training_samples(trips, corpus, params, cfg))


def actual_cost(trip: Trip, corpus: Corpus, params: VehicleParams, cfg: EcmsConfig,
                prices: PriceTable, soc0: float) -> float:
    """Ground-truth cost: simulator readings priced per litre and kWh."""
    out = run_kernel(trip.traj, params, cfg, soc0, feats=trip.feature_track(corpus.net),
                     theta=trip.theta_track(corpus.net))
    return breakdown_from_series(out["m_f"], out["p_batt"], np.diff(trip.traj.t), params, prices).total


def estimate_from_trajectory(trip: Trip, corpus: Corpus, coeffs, params, cfg, prices, soc0) -> float:
    cost, _ = route_cost(trip.traj, coeffs, params, cfg, prices, soc0, trip.feature_track(corpus.net))
    return cost.total


def estimate_from_mcs(trip: Trip, corpus: Corpus, coeffs, params, cfg, prices, soc0) -> float:
    path = RoutePath(trip.edges, trip.source, trip.dest, trip.length_km)
    est = estimate_path_cost(params, coeffs, path, trip.t0, corpus.store, cfg, prices, soc0,
                             corpus.net, corpus.traffic_cfg)
    return est.cost.total


def _record(trip, soc0, est, act, vehicle, method) -> ErrorRecord | None:
    # error is undefined when the trip nets out at zero or negative cost (regeneration)
    if act <= 0:
        return None
    return ErrorRecord(trip.id, trip.length_km, soc0, est, act, route_error(est, act), vehicle, method)


@dataclass
class ExperimentReport:
    records: list[ErrorRecord]
    length_bins: list[dict]
    by_vehicle: list[dict]
    mcs_vs_actual: list[dict]
    cases: list[dict]
    coefficients: dict[int, DrcmCoefficients]
    meta: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "meta": self.meta,
            "coefficients": {str(k): c.to_dict() for k, c in sorted(self.coefficients.items())},
            "length_bins": self.length_bins,
            "by_vehicle": self.by_vehicle,
            "mcs_vs_actual": self.mcs_vs_actual,
            "cases": self.cases,
        }

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_rows(out / "records.csv", [asdict(r) for r in self.records])
        _write_rows(out / "length_bins.csv", self.length_bins)
        _write_rows(out / "vehicles.csv", self.by_vehicle)
        _write_rows(out / "mcs_vs_actual.csv", self.mcs_vs_actual)
        _write_rows(out / "case_studies.csv", self.cases)
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")


def _write_rows(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


def _bin_table(records, bins, soc_grid, method):
    rows = []
    for soc in soc_grid:
        for i, (lo, hi) in enumerate(bins):
            sel = [r for r in records if r.soc0 == soc and r.method == method and bin_of(r.path_length, bins) == i]
            rows.append({
                "soc0": soc, "bin_lo": float(lo), "bin_hi": float(hi), "n": len(sel),
                "mape": mean_error(sel) if sel else float("nan"),
                "mean_signed": float(np.mean([r.error_pct for r in sel])) if sel else float("nan"),
            })
    return rows


def run_experiment(
    corpus: Corpus,
    vehicle_set: dict[int, VehicleParams],
    soc_grid: Sequence[float] = SOC_GRID,
    length_bins: Sequence[tuple[float, float]] = LENGTH_BINS,
    coeffs: dict[int, DrcmCoefficients] | None = None,
    prices: PriceTable | None = None,
    ecms: EcmsConfig | None = None,
    main_vehicle: int | None = None,
    workers: int = 1,
) -> ExperimentReport:
    """Length-binned, per-vehicle and crowdsensed-vs-actual error tables plus case studies.

    The first vehicle (or ``main_vehicle``) gets the full length sweep; every
    vehicle is evaluated on ~10 km paths. Without ``coeffs`` each vehicle is
    calibrated on the corpus training split. ``workers > 1`` evaluates paths
    on a thread pool (the compiled kernel releases the GIL); results keep
    path order either way.
    """
    prices = prices or PriceTable()
    ecms = ecms or EcmsConfig()
    ids = sorted(vehicle_set)
    main = ids[0] if main_vehicle is None else main_vehicle
    if coeffs is None:
        coeffs = {vid: calibrate_vehicle(corpus, vehicle_set[vid], ecms.for_vehicle(vehicle_set[vid]))
                  for vid in ids}
    missing = [vid for vid in ids if vid not in coeffs]
    if missing:
        raise MissingCalibration(f"no calibrated coefficients for vehicle(s) {missing}")
    tests = corpus.split("test")
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    run = pool.map if pool is not None else map

    params = vehicle_set[main]
    cfg = ecms.for_vehicle(params)
    k = coeffs[main]

    def main_rows(trip):
        rows = []
        for soc in soc_grid:
            act = actual_cost(trip, corpus, params, cfg, prices, soc)
            rows.append(_record(trip, soc, estimate_from_trajectory(trip, corpus, k, params, cfg, prices, soc),
                                act, main, "actual"))
            rows.append(_record(trip, soc, estimate_from_mcs(trip, corpus, k, params, cfg, prices, soc),
                                act, main, "mcs"))
        return rows

    raw: list[ErrorRecord | None] = [r for rows in run(main_rows, tests) for r in rows]

    by_vehicle = []
    ten_km = [t for t in tests if VEHICLE_PATH_RANGE[0] <= t.length_km < VEHICLE_PATH_RANGE[1]]
    for vid in ids:
        p = vehicle_set[vid]
        c = ecms.for_vehicle(p)
        for soc in soc_grid:
            if vid == main:
                sel = [r for r in raw if r is not None and r.method == "actual" and r.soc0 == soc
                       and VEHICLE_PATH_RANGE[0] <= r.path_length < VEHICLE_PATH_RANGE[1]]
            else:
                def other_row(t, p=p, c=c, vid=vid, soc=soc):
                    return _record(t, soc, estimate_from_trajectory(t, corpus, coeffs[vid], p, c, prices, soc),
                                   actual_cost(t, corpus, p, c, prices, soc), vid, "actual")

                rows = list(run(other_row, ten_km))
                raw.extend(rows)
                sel = [r for r in rows if r is not None]
            by_vehicle.append({"vehicle": vid, "soc0": soc, "n": len(sel),
                         "mape": mean_error(sel) if sel else float("nan")})
    if pool is not None:
        pool.shutdown()
    records = [r for r in raw if r is not None]

    actual_rows = _bin_table([r for r in records if r.vehicle == main], length_bins, soc_grid, "actual")
    mcs_rows = _bin_table([r for r in records if r.vehicle == main], length_bins, soc_grid, "mcs")
    mcs_vs_actual = [
        {"soc0": a["soc0"], "bin_lo": a["bin_lo"], "bin_hi": a["bin_hi"], "n": a["n"],
         "mape_actual": a["mape"], "mape_mcs": m["mape"]}
        for a, m in zip(actual_rows, mcs_rows)
    ]

    cases = []
    by_id = {t.id: t for t in corpus.trips}
    for n, tid in enumerate(corpus.case_trips, 1):
        trip = by_id[tid]
        soc = 0.8
        act = actual_cost(trip, corpus, params, cfg, prices, soc)
        rec = recommend(corpus.net, trip.source, trip.dest, params, k, trip.t0, soc, corpus.store,
                        cfg, prices, corpus.traffic_cfg, actual_cost=act)
        cases.append({
            "case": n, "trip": tid,
            "actual_km": trip.length_km, "actual_cost": act,
            "fastest_km": rec.fastest_path.total_length, "fastest_cost": rec.fastest_cost.total,
            "shortest_km": rec.shortest_path.total_length, "shortest_cost": rec.shortest_cost.total,
            "chosen": rec.chosen, "saving_vs_actual": rec.saving_vs_actual, "saving_eq23": rec.saving_eq23,
        })

    meta = {"seed": corpus.seed, "main_vehicle": main, "vehicles": ids, "n_test_paths": len(tests),
            "n_skipped_nonpositive_actual": sum(r is None for r in raw),
            "soc_grid": list(soc_grid), "length_bins": [list(b) for b in length_bins]}
    return ExperimentReport(records, actual_rows, by_vehicle, mcs_vs_actual, cases, dict(coeffs), meta)
