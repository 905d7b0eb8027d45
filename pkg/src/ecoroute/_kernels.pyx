# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled drive kernels; statement-for-statement mirror of ``_pykernels``."""
from libc.math cimport sin, cos, sqrt, floor, ceil

import numpy as np
cimport numpy as cnp

cnp.import_array()

CD = 0
CS = 1

BACKEND = "cython"


cdef inline double _eta(double p, double rated, double eta_max, double eta_min) noexcept nogil:
    cdef double u, e
    if p <= 0.0:
        return eta_min
    u = p / rated
    e = eta_max * (2.0 * u - u * u)
    if e < eta_min:
        return eta_min
    if e > eta_max:
        return eta_max
    return e


cdef inline double _p_star(double rated, double eta_max, double eta_min, double s) noexcept nogil:
    cdef double u, e
    if s * eta_max <= 0.25:
        return -1.0
    u = 2.0 - 1.0 / sqrt(s * eta_max)
    if u <= 0.0:
        return -1.0
    e = eta_max * (2.0 * u - u * u)
    if e <= eta_min or e >= eta_max:
        return -1.0
    return u * rated


cdef inline double _split(double q, double soc, int stage, double dt, double rated,
                          double eta_max, double eta_min, double qlhv, double cap_kwh,
                          double s, double thr, double band, double p_eng_max,
                          double p_dis_max, double p_chg_max, double res,
                          double* out_pb, double* out_j) noexcept nogil:
    cdef double e_scale = 3600.0 * cap_kwh / dt
    cdef double floor_, ceiling, room, chg_cap, dis_cap, pb, lo, hi
    cdef double best_p, best_j, eta, k, k_end, p_star, p, j
    if stage == 1:
        floor_ = thr
        ceiling = thr + band
    else:
        floor_ = 0.0
        ceiling = 1.0
    room = (ceiling - soc) * e_scale
    if room < 0.0:
        room = 0.0
    chg_cap = p_chg_max if room > p_chg_max else room

    if q < 0.0:
        pb = q if q > -chg_cap else -chg_cap
        out_pb[0] = pb
        out_j[0] = s * pb / qlhv
        return 0.0

    room = (soc - floor_) * e_scale
    if room < 0.0:
        room = 0.0
    dis_cap = p_dis_max if room > p_dis_max else room
    if q - dis_cap > p_eng_max:
        dis_cap = q - p_eng_max

    lo = q - dis_cap
    if lo < 0.0:
        lo = 0.0
    hi = q + chg_cap
    if hi > p_eng_max:
        hi = p_eng_max

    best_p = lo
    eta = _eta(lo, rated, eta_max, eta_min)
    best_j = lo / (eta * qlhv) + s * (q - lo) / qlhv

    k = floor(lo / res) + 1.0
    k_end = ceil(hi / res) - 1.0
    p_star = _p_star(rated, eta_max, eta_min, s)
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
        eta = _eta(p, rated, eta_max, eta_min)
        j = p / (eta * qlhv) + s * (q - p) / qlhv
        if j < best_j:
            best_j = j
            best_p = p
        elif j == best_j:
            if stage == 1:
                if p > best_p:
                    best_p = p
            elif p < best_p:
                best_p = p
    out_pb[0] = q - best_p
    out_j[0] = best_j
    return best_p


# tolerance on the upper band edge so float round-off at the CS charge ceiling
# cannot flip the stage
cdef double SOC_EPS = 1e-9


cdef inline int _next_stage(int stage, double soc, double thr, double band) noexcept nogil:
    if stage == 0:
        if soc <= thr:
            return 1
    elif soc > thr + band + SOC_EPS:
        return 0
    return stage


def engine_efficiency(double p, double rated, double eta_max, double eta_min):
    return _eta(p, rated, eta_max, eta_min)


def stationary_engine_power(double rated, double eta_max, double eta_min, double s):
    return _p_star(rated, eta_max, eta_min, s)


def split(double q, double soc, int stage, double dt, double rated, double eta_max,
          double eta_min, double qlhv, double cap_kwh, double s, double thr, double band,
          double p_eng_max, double p_dis_max, double p_chg_max, double res):
    cdef double pb = 0.0, j = 0.0, pe
    pe = _split(q, soc, stage, dt, rated, eta_max, eta_min, qlhv, cap_kwh, s, thr, band,
                p_eng_max, p_dis_max, p_chg_max, res, &pb, &j)
    return pe, pb, j


def next_stage(int stage, double soc, double thr, double band):
    return _next_stage(stage, soc, thr, band)


def drive(t, v, ts, nb, poi, theta, bint physics,
          double k1, double k2, double k3, double k4, double k5, double k6,
          double mass, double g, double mu, double phi, double cr, double area,
          double beta, double gamma,
          double rated, double eta_max, double eta_min, double qlhv, double rho,
          double cap_kwh, double s, double thr, double band, double p_eng_max,
          double p_dis_max, double p_chg_max, double res,
          double soc0, int stage0, double price_n, double price_m):
    cdef const double[::1] t_ = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[::1] v_ = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[::1] ts_ = np.ascontiguousarray(ts, dtype=np.float64)
    cdef const double[::1] nb_ = np.ascontiguousarray(nb, dtype=np.float64)
    cdef const double[::1] poi_ = np.ascontiguousarray(poi, dtype=np.float64)
    cdef const double[::1] th_ = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t n = t_.shape[0] - 1
    if n < 0:
        n = 0
    q_arr = np.zeros(n)
    pe_arr = np.zeros(n)
    pb_arr = np.zeros(n)
    mf_arr = np.zeros(n)
    soc_arr = np.zeros(n)
    cost_arr = np.zeros(n)
    cdef double[::1] q_out = q_arr
    cdef double[::1] pe_out = pe_arr
    cdef double[::1] pb_out = pb_arr
    cdef double[::1] mf_out = mf_arr
    cdef double[::1] soc_out = soc_arr
    cdef double[::1] cost_out = cost_arr
    cdef double q_lim = p_eng_max + p_dis_max
    cdef double soc = soc0
    cdef int stage = stage0
    cdef long n_clipped = 0
    cdef double unmet = 0.0
    cdef double dt, vi, rate, th, f, qd, pe, pb = 0.0, j = 0.0, eta
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            dt = t_[i + 1] - t_[i]
            vi = v_[i]
            rate = (v_[i + 1] - vi) / dt
            if physics:
                th = th_[i]
                f = (mu * mass * g * cos(th) + mass * g * sin(th)
                     + 0.5 * phi * cr * area * vi * vi
                     + beta * mass * rate * (gamma + ts_[i] + nb_[i] + poi_[i]))
                qd = f * vi / 1000.0
            else:
                qd = (k1 * vi + k2 * vi * vi * vi
                      + (k3 + k4 * ts_[i] + k5 * nb_[i] + k6 * poi_[i]) * vi * rate)
            q_out[i] = qd
            if qd > q_lim:
                unmet += (qd - q_lim) * dt
                n_clipped += 1
                qd = q_lim
            pe = _split(qd, soc, stage, dt, rated, eta_max, eta_min, qlhv, cap_kwh,
                        s, thr, band, p_eng_max, p_dis_max, p_chg_max, res, &pb, &j)
            eta = _eta(pe, rated, eta_max, eta_min)
            pe_out[i] = pe
            pb_out[i] = pb
            mf_out[i] = pe / (eta * qlhv)
            cost_out[i] = (price_n * pe / (eta * qlhv * rho) + price_m * pb / 3600.0) * dt
            soc = soc - pb * dt / (3600.0 * cap_kwh)
            if soc < 0.0:
                soc = 0.0
            elif soc > 1.0:
                soc = 1.0
            stage = _next_stage(stage, soc, thr, band)
            soc_out[i] = soc
    return {
        "q": q_arr,
        "p_eng": pe_arr,
        "p_batt": pb_arr,
        "m_f": mf_arr,
        "soc": soc_arr,
        "cost": cost_arr,
        "soc_final": soc,
        "stage_final": stage,
        "n_clipped": int(n_clipped),
        "unmet_kj": unmet,
    }
