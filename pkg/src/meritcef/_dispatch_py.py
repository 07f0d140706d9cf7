"""NumPy implementation of the hourly dispatch kernel.

This is the fallback used when the compiled extension is unavailable. Both
implementations must return bit-identical arrays: they share the same
left-to-right prefix sums and the same per-hour expression structure.
"""

from __future__ import annotations

import numpy as np


def dispatch_hours(
    capacity: np.ndarray,
    emission: np.ndarray,
    cost: np.ndarray,
    residual: np.ndarray,
    total_gen: np.ndarray,
    eta_t: float,
    dt: float,
):
    """Apply a sorted block stack to each hour's residual load.

    Parameters are the per-block capacity/emission-intensity/cost arrays of
    a merit order, the per-hour residual load (MW) and total generation
    (MWh), the transmission efficiency divisor and the time-step width.

    Returns (marginal_index, mef, xef, price, saturated, invalid) arrays.
    Hours with residual load above the stack total are clamped to the last
    block and flagged saturated; hours without any generation get NaN grid
    mix factors and the invalid flag.
    """
    capacity = np.ascontiguousarray(capacity, dtype=np.float64)
    emission = np.ascontiguousarray(emission, dtype=np.float64)
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    residual = np.ascontiguousarray(residual, dtype=np.float64)
    total_gen = np.ascontiguousarray(total_gen, dtype=np.float64)

    cum = np.cumsum(capacity)
    energy_prefix = np.cumsum(emission * capacity)
    total = cum[-1]

    saturated = residual > total
    r = np.minimum(residual, total)
    midx = np.searchsorted(cum, r, side="left").astype(np.int64)

    prev = np.maximum(midx - 1, 0)
    has_prev = midx > 0
    prev_cum = np.where(has_prev, cum[prev], 0.0)
    prev_energy = np.where(has_prev, energy_prefix[prev], 0.0)

    eps_m = emission[midx]
    mef = eps_m / eta_t
    price = cost[midx]

    numer = prev_energy + eps_m * (r - prev_cum)
    invalid = ~(total_gen > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        xef = (numer * dt) / (eta_t * total_gen)
    xef = np.where(invalid, np.nan, xef)

    return midx, mef, xef, price, saturated, invalid
