"""Command-line front end: simulate, calibrate, recommend, evaluate, make-corpus.

Exit codes: 0 ok, 2 input error, 3 no path, 4 calibration failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .corpus import Corpus, generate_corpus
from .drcm import (
    CalibrationError,
    DrcmCoefficients,
    PriceTable,
    calibrate_arrays,
    design_matrix,
    load_coefficients,
    save_coefficients,
)
from .ecms import EcmsConfig
from .evaluation import run_experiment, training_samples
from .phev_sim import simulate
from .recommend import recommend
from .roadnet import NetworkError, NoPathError, load_network
from .traffic import TrafficStore, interpolate
from .trajectory import Trajectory, read_table
from .vehicle_model import VehicleParams, load_vehicles

log = logging.getLogger("ecoroute")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_PATH = 3
EXIT_CALIBRATION = 4


class InputError(Exception):
    pass


def _require_file(path: str | None, what: str) -> Path:
    if path is None:
        raise InputError(f"missing required {what}")
    p = Path(path)
    if not p.exists():
        raise InputError(f"{what} not found: {p}")
    return p


def _vehicle(args) -> VehicleParams:
    vehicles = load_vehicles(_require_file(args.vehicles, "--vehicles file") if args.vehicles else None)
    if args.vehicle not in vehicles:
        raise InputError(f"unknown vehicle id {args.vehicle}; known: {sorted(vehicles)}")
    return vehicles[args.vehicle]


def _ecms(args, params: VehicleParams) -> EcmsConfig:
    cfg = EcmsConfig.load(_require_file(args.ecms, "--ecms file") if args.ecms else None)
    return cfg.for_vehicle(params)


def _prices(args) -> PriceTable:
    return PriceTable.load(_require_file(args.prices, "--prices file") if args.prices else None)


def _write_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_simulate(args) -> int:
    params = _vehicle(args)
    cfg = _ecms(args, params)
    cols = read_table(_require_file(args.traj, "trajectory file"))
    missing = [c for c in ("t", "v_kmh") if c not in cols]
    if missing:
        raise InputError(f"{args.traj}: missing columns {missing}")
    n = len(cols["t"])
    zeros = np.zeros(n)
    traj = Trajectory(cols["t"], cols.get("lat", zeros), cols.get("lon", zeros), cols["v_kmh"], cols.get("cum_km"))
    feats = theta = None
    if all(c in cols for c in ("ts", "nb", "poi")):
        feats = np.column_stack([cols["ts"], cols["nb"], cols["poi"]])
    theta = cols.get("theta", zeros)
    if len(traj) >= 2 and not np.all(np.diff(traj.t) == 1.0):
        resampled = interpolate(traj, 1.0)
        if feats is not None:
            # piecewise-constant features follow the sample at or before each new time
            idx = np.searchsorted(traj.t, resampled.t, side="right") - 1
            feats, theta = feats[idx], theta[idx]
        else:
            theta = np.interp(resampled.t, traj.t, theta)
        traj = resampled
    kwargs = {"theta": theta}
    if feats is not None:
        kwargs["feats"] = feats
    readings = simulate(traj, params, cfg, args.soc0, **kwargs)
    readings.write_csv(args.out)
    log.info("simulated %d intervals: %.3f g gasoline, %.4f kWh battery",
             len(readings.t), readings.gasoline_g, readings.battery_kWh)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    params = _vehicle(args)
    cfg = _ecms(args, params)
    corpus = Corpus.load(_require_file(args.corpus, "corpus directory"))
    if not corpus.trips:
        raise CalibrationError("corpus has no trips")
    if not 0 < args.train_fraction <= 1:
        raise InputError("--train-fraction must lie in (0, 1]")
    rng = np.random.default_rng(args.seed)
    order = rng.permutation(len(corpus.trips))
    n_train = max(1, int(round(args.train_fraction * len(order))))
    train = [corpus.trips[i] for i in order[:n_train]]
    test = [corpus.trips[i] for i in order[n_train:]]
    coeffs = calibrate_arrays(*training_samples(train, corpus, params, cfg))
    table = {args.vehicle: coeffs}
    if Path(args.out).exists() and args.merge:
        table = {**load_coefficients(args.out), **table}
    save_coefficients(args.out, table)
    report = {
        "vehicle": args.vehicle,
        "seed": args.seed,
        "train_fraction": args.train_fraction,
        "train_trips": [t.id for t in train],
        "coefficients": coeffs.to_dict(),
    }
    if test:
        v, dv, ts, nb, poi, q = training_samples(test, corpus, params, cfg)
        resid = q - design_matrix(v, dv, ts, nb, poi) @ coeffs.as_array()
        report["heldout_rms_kw"] = float(np.sqrt(np.mean(resid**2)))
        report["heldout_samples"] = int(len(q))
    else:
        log.warning("train_fraction=1.0: no held-out trips, skipping held-out report")
    report_path = Path(args.out).with_suffix(".report.json")
    _write_json(report, str(report_path))
    return EXIT_OK


def cmd_recommend(args) -> int:
    params = _vehicle(args)
    cfg = _ecms(args, params)
    prices = _prices(args)
    net = load_network(_require_file(args.network, "--network file"))
    store = TrafficStore.load(_require_file(args.traffic_log, "--traffic-log file")) if args.traffic_log else None
    if args.coeffs:
        table = load_coefficients(_require_file(args.coeffs, "--coeffs file"))
        if args.vehicle not in table:
            raise InputError(f"{args.coeffs} has no coefficients for vehicle {args.vehicle}")
        coeffs = table[args.vehicle]
    else:
        log.warning("no --coeffs given; using flat-road physical coefficients")
        coeffs = DrcmCoefficients.from_physics(params)
    if not 0 <= args.soc0 <= 1:
        raise InputError("--soc0 must lie in [0, 1]")
    t0 = args.time
    if t0 is None and store is not None:
        t0 = store.latest_time()
        log.info("no --time given; departing at the newest observation, %s", t0)
    rec = recommend(net, args.source, args.dest, params, coeffs, t0, args.soc0, store, cfg, prices)
    _write_json(rec.to_dict(), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    corpus = Corpus.load(_require_file(args.corpus, "corpus directory"))
    vehicles = load_vehicles(_require_file(args.vehicles, "--vehicles file") if args.vehicles else None)
    try:
        ids = [int(x) for x in args.vehicle_set.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"bad --vehicle-set {args.vehicle_set!r}") from exc
    unknown = [i for i in ids if i not in vehicles]
    if not ids or unknown:
        raise InputError(f"bad --vehicle-set; unknown ids {unknown}")
    coeffs = None
    if args.coeffs:
        coeffs = load_coefficients(_require_file(args.coeffs, "--coeffs file"))
    ecms = EcmsConfig.load(_require_file(args.ecms, "--ecms file") if args.ecms else None)
    report = run_experiment(corpus, {i: vehicles[i] for i in ids}, coeffs=coeffs, prices=_prices(args), ecms=ecms)
    report.write(args.out)
    return EXIT_OK


def cmd_make_corpus(args) -> int:
    corpus = generate_corpus(seed=args.seed, n_trips=args.n_trips, train_fraction=args.train_fraction)
    corpus.save(args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--vehicles", help="vehicle table JSON (default: bundled)")
    common.add_argument("--prices", help="price table JSON (default: bundled)")
    common.add_argument("--ecms", help="ECMS settings JSON (default: bundled)")
    common.add_argument("--seed", type=int, default=42, help="seed for corpus generation and the calibration split (default: 42)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="ecoroute", description="PHEV route cost estimation and eco-routing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="per-second consumption readings for a trajectory")
    p.add_argument("traj", help="trajectory CSV (t, v_kmh; optional lat, lon, cum_km, ts, nb, poi, theta)")
    p.add_argument("--vehicle", type=int, default=1, help="vehicle number in the vehicle table (default: 1)")
    p.add_argument("--soc0", type=float, default=0.8, help="initial state of charge, 0..1 (default: 0.8)")
    p.add_argument("--out", required=True, help="readings CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", parents=[common], help="fit k1..k6 on a corpus")
    p.add_argument("corpus", help="corpus directory")
    p.add_argument("--vehicle", type=int, default=1, help="vehicle number to calibrate (default: 1)")
    p.add_argument("--train-fraction", type=float, default=0.3, help="share of trips used for fitting; the rest are held out (default: 0.3)")
    p.add_argument("--merge", action="store_true", help="add to an existing coefficients file")
    p.add_argument("--out", required=True, help="coefficients JSON; a .report.json is written next to it")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("recommend", parents=[common], help="cheaper of the shortest and fastest routes")
    p.add_argument("source", help="origin node id")
    p.add_argument("dest", help="destination node id")
    p.add_argument("--network", required=True, help="road network JSON")
    p.add_argument("--traffic-log", help="crowdsensed observations (JSON lines); free-flow profiles if omitted")
    p.add_argument("--coeffs", help="coefficients JSON from calibrate; physical coefficients if omitted")
    p.add_argument("--vehicle", type=int, default=1, help="vehicle number (default: 1)")
    p.add_argument("--soc0", type=float, default=0.8, help="initial state of charge, 0..1 (default: 0.8)")
    p.add_argument("--time", type=float, default=None, help="departure time, UTC epoch seconds (default: newest observation in the traffic log)")
    p.add_argument("--out", help="recommendation JSON (default: stdout)")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate", parents=[common], help="error tables over a corpus")
    p.add_argument("corpus", help="corpus directory")
    p.add_argument("--vehicle-set", default="1", help="comma-separated vehicle numbers; the first gets the length sweep (default: 1)")
    p.add_argument("--coeffs", help="coefficients JSON; vehicles are calibrated on the corpus if omitted")
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("make-corpus", parents=[common], help="generate the synthetic evaluation corpus")
    p.add_argument("--n-trips", type=int, default=300, help="number of trips (default: 300)")
    p.add_argument("--train-fraction", type=float, default=0.3, help="share of trips in the training split (default: 0.3)")
    p.add_argument("--out", required=True, help="corpus directory")
    p.set_defaults(func=cmd_make_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except NoPathError as exc:
        log.error("no path: %s", exc)
        return EXIT_NO_PATH
    except CalibrationError as exc:
        log.error("calibration failed: %s", exc)
        return EXIT_CALIBRATION
    except (InputError, NetworkError, FileNotFoundError, ValueError, KeyError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
