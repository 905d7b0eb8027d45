"""Pure-Python drive kernels.

Reference implementation of the per-second loop. ``_kernels.pyx`` mirrors
this file statement for statement so both backends produce identical
floating-point results; keep them in sync.
"""
import math

import numpy as np

CD = 0
CS = 1

BACKEND = "python"
# tolerance on the upper band edge so float round-off at the CS charge ceiling
# cannot flip the stage
SOC_EPS = 1e-9


def engine_efficiency(p, rated, eta_max, eta_min):
    if p <= 0.0:
        return eta_min
    u = p / rated
    e = eta_max * (2.0 * u - u * u)
    if e < eta_min:
        return eta_min
    if e > eta_max:
        return eta_max
    return e


def stationary_engine_power(rated, eta_max, eta_min, s):
    """Engine power where d(p/eta)/dp == s on the unclamped part of the map, or -1."""
    if s * eta_max <= 0.25:
        return -1.0
    u = 2.0 - 1.0 / math.sqrt(s * eta_max)
    if u <= 0.0:
        return -1.0
    e = eta_max * (2.0 * u - u * u)
    if e <= eta_min or e >= eta_max:
        return -1.0
    return u * rated


def split(q, soc, stage, dt, rated, eta_max, eta_min, qlhv, cap_kwh, s, thr,
          band, p_eng_max, p_dis_max, p_chg_max, res):
    """Return (p_eng, p_batt, objective) for a demand q already within limits."""
    e_scale = 3600.0 * cap_kwh / dt
    if stage == CS:
        floor = thr
        ceiling = thr + band
    else:
        floor = 0.0
        ceiling = 1.0
    room = (ceiling - soc) * e_scale
    if room < 0.0:
        room = 0.0
    chg_cap = p_chg_max if room > p_chg_max else room

    if q < 0.0:
        pb = q if q > -chg_cap else -chg_cap
        return 0.0, pb, s * pb / qlhv

    room = (soc - floor) * e_scale
    if room < 0.0:
        room = 0.0
    dis_cap = p_dis_max if room > p_dis_max else room
    if q - dis_cap > p_eng_max:
        # SOC limit is soft: the battery covers what the engine cannot
        dis_cap = q - p_eng_max

    lo = q - dis_cap
    if lo < 0.0:
        lo = 0.0
    hi = q + chg_cap
    if hi > p_eng_max:
        hi = p_eng_max

    best_p = lo
    eta = engine_efficiency(lo, rated, eta_max, eta_min)
    best_j = lo / (eta * qlhv) + s * (q - lo) / qlhv

    k = math.floor(lo / res) + 1.0
    k_end = math.ceil(hi / res) - 1.0
    p_star = stationary_engine_power(rated, eta_max, eta_min, s)
    while True:
        if k <= k_end:
            p = k * res
            k += 1.0
        elif p_star > lo and p_star < hi:
            p = p_star
            p_star = -1.0
        elif hi > lo:
            p = hi
            hi = lo
        else:
            break
        eta = engine_efficiency(p, rated, eta_max, eta_min)
        j = p / (eta * qlhv) + s * (q - p) / qlhv
        if j < best_j:
            best_j = j
            best_p = p
        elif j == best_j:
            if stage == CS:
                if p > best_p:
                    best_p = p
            elif p < best_p:
                best_p = p
    return best_p, q - best_p, best_j


def next_stage(stage, soc, thr, band):
    if stage == CD:
        if soc <= thr:
            return CS
    elif soc > thr + band + SOC_EPS:
        return CD
    return stage


def drive(t, v, ts, nb, poi, theta, physics, k1, k2, k3, k4, k5, k6,
          mass, g, mu, phi, cr, area, beta, gamma,
          rated, eta_max, eta_min, qlhv, rho, cap_kwh,
          s, thr, band, p_eng_max, p_dis_max, p_chg_max, res,
          soc0, stage0, price_n, price_m):
    """Integrate one trajectory over its 1 s intervals (left rectangle).

    Speeds in m/s. Interval i spans [t[i], t[i+1]) and uses v[i] with the
    per-second speed change (v[i+1] - v[i]) / dt. Returns a dict of per-interval
    series plus final state and clipping diagnostics.
    """
    n = len(t) - 1
    if n < 0:
        n = 0
    q_out = np.zeros(n)
    pe_out = np.zeros(n)
    pb_out = np.zeros(n)
    mf_out = np.zeros(n)
    soc_out = np.zeros(n)
    cost_out = np.zeros(n)
    q_lim = p_eng_max + p_dis_max
    soc = soc0
    stage = stage0
    n_clipped = 0
    unmet = 0.0
    for i in range(n):
        dt = float(t[i + 1]) - float(t[i])
        vi = float(v[i])
        rate = (float(v[i + 1]) - vi) / dt
        if physics:
            th = float(theta[i])
            f = (mu * mass * g * math.cos(th) + mass * g * math.sin(th)
                 + 0.5 * phi * cr * area * vi * vi
                 + beta * mass * rate * (gamma + float(ts[i]) + float(nb[i]) + float(poi[i])))
            qd = f * vi / 1000.0
        else:
            qd = (k1 * vi + k2 * vi * vi * vi
                  + (k3 + k4 * float(ts[i]) + k5 * float(nb[i]) + k6 * float(poi[i])) * vi * rate)
        q_out[i] = qd
        if qd > q_lim:
            unmet += (qd - q_lim) * dt
            n_clipped += 1
            qd = q_lim
        pe, pb, _ = split(qd, soc, stage, dt, rated, eta_max, eta_min, qlhv, cap_kwh,
                          s, thr, band, p_eng_max, p_dis_max, p_chg_max, res)
        eta = engine_efficiency(pe, rated, eta_max, eta_min)
        pe_out[i] = pe
        pb_out[i] = pb
        mf_out[i] = pe / (eta * qlhv)
        cost_out[i] = (price_n * pe / (eta * qlhv * rho) + price_m * pb / 3600.0) * dt
        soc = soc - pb * dt / (3600.0 * cap_kwh)
        if soc < 0.0:
            soc = 0.0
        elif soc > 1.0:
            soc = 1.0
        stage = next_stage(stage, soc, thr, band)
        soc_out[i] = soc
    return {
        "q": q_out,
        "p_eng": pe_out,
        "p_batt": pb_out,
        "m_f": mf_out,
        "soc": soc_out,
        "cost": cost_out,
        "soc_final": soc,
        "stage_final": stage,
        "n_clipped": n_clipped,
        "unmet_kj": unmet,
    }
