"""Compiled vs pure-Python drive loop.

    python benchmarks/bench_kernels.py [--seconds 600 1800 3600] [--repeat 5]

Both backends run the same trajectory through ``run_kernel``; the outputs are
checked for bit equality before timing.
"""
import argparse
import timeit

import numpy as np

from ecoroute import _pykernels, phev_sim
from ecoroute.drcm import DrcmCoefficients
from ecoroute.ecms import EcmsConfig
from ecoroute.vehicle_model import PathFeatures, load_vehicles

try:
    from ecoroute import _kernels
except ImportError:
    _kernels = None


def run(backend, traj, params, cfg, coeffs):
    phev_sim.kernels = backend
    return phev_sim.run_kernel(traj, params, cfg, 0.6, feats=PathFeatures(2, 3, 1), coeffs=coeffs,
                               prices=(6.2, 0.8))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seconds", type=int, nargs="+", default=[600, 1800, 3600])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    params = load_vehicles()[1]
    cfg = EcmsConfig().for_vehicle(params)
    coeffs = DrcmCoefficients.from_physics(params)
    original = phev_sim.kernels
    print(f"{'samples':>8} {'cython ms':>10} {'python ms':>10} {'speedup':>8}")
    try:
        for n in args.seconds:
            traj = phev_sim.generate_synthetic_trajectory(0, n, "urban")
            a = run(_kernels, traj, params, cfg, coeffs)
            b = run(_pykernels, traj, params, cfg, coeffs)
            assert all(np.array_equal(a[k], b[k]) for k in a), "backends disagree"
            times = {}
            for name, mod in (("cython", _kernels), ("python", _pykernels)):
                number = 20 if mod is _kernels else 1
                best = min(timeit.repeat(lambda: run(mod, traj, params, cfg, coeffs),
                                         number=number, repeat=args.repeat))
                times[name] = best / number * 1e3
            print(f"{n:>8} {times['cython']:>10.2f} {times['python']:>10.1f} "
                  f"{times['python'] / times['cython']:>7.0f}x")
    finally:
        phev_sim.kernels = original


if __name__ == "__main__":
    main()
