"""Independent re-implementations used as test oracles.

Nothing here imports the package's kernels: formulas are written out again
from the model definitions so that a bug in one copy shows up as a mismatch.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def eta(p, rated, eta_max, eta_min):
    p = np.asarray(p, dtype=float)
    u = p / rated
    return np.where(p <= 0, eta_min, np.clip(eta_max * (2 * u - u * u), eta_min, eta_max))


def objective(p, q, s, rated, eta_max, eta_min, qlhv):
    p = np.asarray(p, dtype=float)
    return p / (eta(p, rated, eta_max, eta_min) * qlhv) + s * (q - p) / qlhv


def feasible_engine_range(q, soc, stage_cs, dt, cap_kwh, thr, band, p_eng_max, p_dis, p_chg):
    """(lo, hi) engine power interval allowed by the battery window and caps."""
    floor, ceil = (thr, thr + band) if stage_cs else (0.0, 1.0)
    kw_per_soc = 3600.0 * cap_kwh / dt
    chg = min(p_chg, max(ceil - soc, 0.0) * kw_per_soc)
    dis = min(p_dis, max(soc - floor, 0.0) * kw_per_soc)
    dis = max(dis, q - p_eng_max)  # engine saturated: battery must cover the rest
    return max(q - dis, 0.0), min(q + chg, p_eng_max), chg


def brute_split(q, soc, stage_cs, params, cfg, dt=1.0, refine=10):
    """Argmin of the equivalent-fuel objective over a grid ``refine`` times finer."""
    lo, hi, chg = feasible_engine_range(
        q, soc, stage_cs, dt, params.battery_capacity, cfg.soc_cs_threshold, cfg.soc_cs_band,
        cfg.p_eng_max, cfg.p_batt_discharge_max, cfg.p_batt_charge_max)
    if q < 0:
        return 0.0, max(q, -chg), None
    step = cfg.grid_resolution / refine
    grid = np.concatenate([[lo], np.arange(math.floor(lo / step) + 1, math.ceil(hi / step)) * step, [hi]])
    grid = grid[(grid >= lo) & (grid <= hi)]
    j = objective(grid, q, cfg.equivalence_factor_s, params.engine_rated_power,
                  params.engine_eta_max, params.engine_eta_min, params.fuel_lhv_Qlhv)
    i = int(np.argmin(j))
    return float(grid[i]), q - float(grid[i]), float(j[i])


def all_simple_paths(edges, source, dest):
    """Every simple path as a tuple of edge ids (edges: dict id -> (u, v))."""
    out = {}
    for eid, (u, v) in edges.items():
        out.setdefault(u, []).append((eid, v))
    found = []

    def walk(node, seen, seq):
        if node == dest:
            found.append(tuple(seq))
            return
        for eid, nxt in out.get(node, []):
            if nxt not in seen:
                walk(nxt, seen | {nxt}, seq + [eid])

    walk(source, {source}, [])
    return found


def best_path(edges, weights, source, dest):
    """(cost, edge sequence) minimum over all simple paths; lexicographic tie-break."""
    paths = all_simple_paths(edges, source, dest)
    if not paths:
        return None
    return min((sum(weights[e] for e in p), p) for p in paths)


def straight_line_cost(t, v_kmh, feats, k, params, cfg, prices, soc0):
    """Row-by-row cost of a trajectory: linear demand, ECMS split, money.

    The split takes the best of: the feasible endpoints, every grid point
    strictly inside, and the interior stationary point of the objective.
    """
    rated, emax, emin = params.engine_rated_power, params.engine_eta_max, params.engine_eta_min
    qlhv, rho, cap = params.fuel_lhv_Qlhv, params.fuel_density_rho, params.battery_capacity
    s, thr, band = cfg.equivalence_factor_s, cfg.soc_cs_threshold, cfg.soc_cs_band
    v = np.asarray(v_kmh) / 3.6
    soc = soc0
    cs = not soc0 > thr + band
    total = 0.0
    # u* solves 1 / (eta_max (2 - u)^2) = s
    u_star = 2 - 1 / math.sqrt(s * emax)
    for i in range(len(t) - 1):
        dt = t[i + 1] - t[i]
        a = (v[i + 1] - v[i]) / dt
        ts, nb, poi = feats
        q = k[0] * v[i] + k[1] * v[i] ** 3 + (k[2] + k[3] * ts + k[4] * nb + k[5] * poi) * v[i] * a
        q = min(q, cfg.p_eng_max + cfg.p_batt_discharge_max)
        lo, hi, chg = feasible_engine_range(q, soc, cs, dt, cap, thr, band, cfg.p_eng_max,
                                            cfg.p_batt_discharge_max, cfg.p_batt_charge_max)
        if q < 0:
            pe, pb = 0.0, max(q, -chg)
        else:
            res = cfg.grid_resolution
            cands = [lo] + [n * res for n in range(math.floor(lo / res) + 1, math.ceil(hi / res))]
            e_star = emax * (2 * u_star - u_star ** 2)
            if 0 < u_star and emin < e_star < emax and lo < u_star * rated < hi:
                cands.append(u_star * rated)
            cands.append(hi)
            js = [float(objective(p, q, s, rated, emax, emin, qlhv)) for p in cands]
            best = min(js)
            ties = [p for p, j in zip(cands, js) if j == best]
            pe = max(ties) if cs else min(ties)
            pb = q - pe
        e = float(eta(pe, rated, emax, emin))
        total += (prices.gasoline_price_n * pe / (e * qlhv * rho) + prices.electricity_price_m * pb / 3600.0) * dt
        soc = min(max(soc - pb * dt / (3600.0 * cap), 0.0), 1.0)
        if not cs and soc <= thr:
            cs = True
        elif cs and soc > thr + band:
            cs = False
    return total, soc


def random_digraph(rng, n_nodes, p_edge=0.4, max_len=5.0):
    """Small random directed graph in network-file dict form."""
    nodes = [f"v{i}" for i in range(n_nodes)]
    edges = []
    for a, b in itertools.permutations(nodes, 2):
        if rng.random() < p_edge:
            edges.append({
                "id": f"{a}-{b}", "from": a, "to": b,
                "length_km": round(float(rng.uniform(0.5, max_len)), 1),
                "ffs_kmh": float(rng.choice([30.0, 50.0, 80.0])),
            })
    return {"nodes": [{"id": n} for n in nodes], "edges": edges}
