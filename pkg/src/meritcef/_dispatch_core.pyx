# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled hourly dispatch kernel.

Mirrors `_dispatch_py.dispatch_hours` operation-for-operation so both
backends produce bit-identical output; keep the two in sync.
"""

from libc.math cimport NAN

import numpy as np

cimport numpy as cnp

cnp.import_array()


def dispatch_hours(capacity, emission, cost, residual, total_gen, double eta_t, double dt):
    """See `meritcef._dispatch_py.dispatch_hours` for the contract."""
    cdef double[::1] cap = np.ascontiguousarray(capacity, dtype=np.float64)
    cdef double[::1] eps = np.ascontiguousarray(emission, dtype=np.float64)
    cdef double[::1] cst = np.ascontiguousarray(cost, dtype=np.float64)
    cdef double[::1] res = np.ascontiguousarray(residual, dtype=np.float64)
    cdef double[::1] tot = np.ascontiguousarray(total_gen, dtype=np.float64)

    cdef Py_ssize_t n_blocks = cap.shape[0]
    cdef Py_ssize_t n_hours = res.shape[0]

    cum_arr = np.empty(n_blocks, dtype=np.float64)
    epre_arr = np.empty(n_blocks, dtype=np.float64)
    cdef double[::1] cum = cum_arr
    cdef double[::1] epre = epre_arr

    cdef Py_ssize_t i
    cdef double acc_cap = 0.0, acc_energy = 0.0
    for i in range(n_blocks):
        acc_cap = acc_cap + cap[i]
        acc_energy = acc_energy + (eps[i] * cap[i])
        cum[i] = acc_cap
        epre[i] = acc_energy
    cdef double total = cum[n_blocks - 1]

    midx_arr = np.empty(n_hours, dtype=np.int64)
    mef_arr = np.empty(n_hours, dtype=np.float64)
    xef_arr = np.empty(n_hours, dtype=np.float64)
    price_arr = np.empty(n_hours, dtype=np.float64)
    sat_arr = np.empty(n_hours, dtype=np.bool_)
    inv_arr = np.empty(n_hours, dtype=np.bool_)

    cdef cnp.int64_t[::1] midx = midx_arr
    cdef double[::1] mef = mef_arr
    cdef double[::1] xef = xef_arr
    cdef double[::1] price = price_arr
    cdef cnp.uint8_t[::1] sat = sat_arr.view(np.uint8)
    cdef cnp.uint8_t[::1] inv = inv_arr.view(np.uint8)

    cdef Py_ssize_t t, lo, hi, mid, m
    cdef double r, prev_cum, prev_energy, eps_m, numer

    for t in range(n_hours):
        r = res[t]
        if r > total:
            sat[t] = 1
            r = total
        else:
            sat[t] = 0

        # first block whose cumulative capacity reaches r
        lo = 0
        hi = n_blocks
        while lo < hi:
            mid = (lo + hi) // 2
            if cum[mid] < r:
                lo = mid + 1
            else:
                hi = mid
        m = lo
        midx[t] = m

        if m > 0:
            prev_cum = cum[m - 1]
            prev_energy = epre[m - 1]
        else:
            prev_cum = 0.0
            prev_energy = 0.0

        eps_m = eps[m]
        mef[t] = eps_m / eta_t
        price[t] = cst[m]

        numer = prev_energy + eps_m * (r - prev_cum)
        if tot[t] > 0.0:
            inv[t] = 0
            xef[t] = (numer * dt) / (eta_t * tot[t])
        else:
            inv[t] = 1
            xef[t] = NAN

    return midx_arr, mef_arr, xef_arr, price_arr, sat_arr, inv_arr
