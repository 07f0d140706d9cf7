"""Rank-correlation analytics, carbon-price sweeps, and method comparison."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .config import ScenarioConfig
from .dispatch import CefSeries, compute_cef_series
from .ingest import GenerationSeries
from .loadshift import run_shift_study
from .merit_order import MeritOrder

log = logging.getLogger(__name__)

MeritBuilder = Callable[[float], MeritOrder]


@dataclass(frozen=True)
class CorrelationResult:
    r: float | None
    n: int
    context: str
    note: str = ""


def spearman(x: Sequence[float], y: Sequence[float], context: str = "series") -> CorrelationResult:
    """Spearman rank correlation with average ranks for ties."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman needs two equally long 1-d vectors")
    if len(x) < 2:
        raise ValueError("spearman needs at least 2 observations")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return CorrelationResult(None, len(x), context, note="undefined: constant input")
    r = float(stats.spearmanr(x, y).statistic)
    return CorrelationResult(r, len(x), context)


def _element_values(mo: MeritOrder, element_mw: float) -> tuple[np.ndarray, np.ndarray]:
    """Sample block attributes at fixed-width capacity elements.

    Element midpoints walk the cumulative-capacity axis so each block
    contributes proportionally to its size, making the statistic independent
    of how finely the stack happens to be split into blocks.
    """
    total = mo.total_capacity_mw
    centers = np.arange(element_mw / 2.0, total, element_mw)
    idx = np.searchsorted(mo.cum_capacity_mw, centers, side="left")
    return mo.marginal_cost[idx], mo.emission_intensity[idx]


def merit_order_correlation(
    mo: MeritOrder, element_mw: float = 10.0, per_plant: bool = False
) -> CorrelationResult:
    """Rank correlation of marginal cost vs. emission intensity along the stack."""
    if len(mo) < 2:
        return CorrelationResult(None, len(mo), "merit-order", note="undefined: single block")
    if per_plant:
        cost, eps = mo.marginal_cost, mo.emission_intensity
    else:
        cost, eps = _element_values(mo, element_mw)
        if len(cost) < 2:
            return CorrelationResult(
                None, len(cost), "merit-order", note="undefined: fewer than 2 elements"
            )
    return spearman(cost, eps, context="merit-order")


@dataclass
class SweepCurve:
    carbon_prices: list[float]
    r_values: list[float | None]
    zero_crossing: float | None = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"c_ghg_eur_t": self.carbon_prices, "r": self.r_values})


def _bisect_zero_crossing(
    builder: MeritBuilder,
    lo: float,
    hi: float,
    r_lo: float,
    element_mw: float,
    tol: float,
) -> float:
    """Narrow a sign change of r(c) down to `tol` EUR/t; returns the midpoint."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        r_mid = merit_order_correlation(builder(mid), element_mw).r
        if r_mid is None or r_mid == 0.0:
            return mid
        if (r_mid < 0) == (r_lo < 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def carbon_price_sweep(
    merit_builder: MeritBuilder,
    grid: Sequence[float],
    element_mw: float = 10.0,
    crossing_tol: float = 0.01,
) -> SweepCurve:
    """Correlation along the merit order for each carbon price on the grid.

    The first sign change of r is refined by bisection; a grid point with
    r exactly 0 counts as the crossing itself.
    """
    grid = [float(c) for c in grid]
    if not grid:
        raise ValueError("carbon price grid must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("carbon price grid must be strictly increasing")

    r_values = [merit_order_correlation(merit_builder(c), element_mw).r for c in grid]

    crossing: float | None = None
    for (c_lo, c_hi), (r_lo, r_hi) in zip(zip(grid, grid[1:]), zip(r_values, r_values[1:])):
        if r_lo is None or r_hi is None:
            continue
        if r_lo == 0.0:
            crossing = c_lo
            break
        if r_hi == 0.0:
            crossing = c_hi
            break
        if (r_lo < 0) != (r_hi < 0):
            crossing = _bisect_zero_crossing(
                merit_builder, c_lo, c_hi, r_lo, element_mw, crossing_tol
            )
            break
    return SweepCurve(grid, r_values, crossing)


def shift_study_vs_carbon_price(
    merit_builder: MeritBuilder,
    gen: GenerationSeries,
    config: ScenarioConfig,
    grid: Sequence[float],
    driver: str = "price",
    element_mw: float = 10.0,
    jobs: int = 1,
) -> list[dict]:
    """Full recompute per grid point: stack, dispatch, shift study.

    Returns one row per carbon price with the stack correlation and the
    relative changes of cost, grid-mix emissions, and marginal emissions.
    Grid points are independent, so they can run on `jobs` threads; the
    result order (and content) does not depend on it.
    """

    def one_point(c: float) -> dict:
        mo = merit_builder(float(c))
        cef = compute_cef_series(mo, gen, replace(config, carbon_price=float(c)))
        report = run_shift_study(cef, driver)
        return {
            "c_ghg_eur_t": float(c),
            "r": merit_order_correlation(mo, element_mw).r,
            "dc_pct": report.dc_pct,
            "dxe_pct": report.dxe_pct,
            "dme_pct": report.dme_pct,
        }

    if jobs <= 1:
        return [one_point(c) for c in grid]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one_point, grid))


@dataclass
class ValidationReport:
    """Relative errors (%) of a candidate method against a reference method."""

    mo_cost_pct: float
    mo_emission_pct: float
    price_pct: float
    mef_pct: float
    xef_pct: float
    annual_price_pct: float
    annual_mef_pct: float
    annual_xef_pct: float
    excluded: dict = field(default_factory=dict)

    def as_rows(self, year: int) -> list[dict]:
        names = [
            ("mo_cost", self.mo_cost_pct),
            ("mo_emission", self.mo_emission_pct),
            ("price", self.price_pct),
            ("mef", self.mef_pct),
            ("xef", self.xef_pct),
            ("annual_price", self.annual_price_pct),
            ("annual_mef", self.annual_mef_pct),
            ("annual_xef", self.annual_xef_pct),
        ]
        return [{"error_name": n, "year": year, "value_pct": v} for n, v in names]


def _mean_relative_error(ref: np.ndarray, cand: np.ndarray) -> tuple[float, int]:
    """Mean of |cand - ref| / ref over usable points; returns (%, n excluded)."""
    usable = np.isfinite(ref) & np.isfinite(cand) & (ref != 0)
    excluded = int(len(ref) - usable.sum())
    if not usable.any():
        return float("nan"), excluded
    rel = np.abs(cand[usable] - ref[usable]) / ref[usable]
    return float(rel.mean() * 100.0), excluded


def _annual_relative_error(ref: np.ndarray, cand: np.ndarray) -> float:
    both = np.isfinite(ref) & np.isfinite(cand)
    ref_mean = ref[both].mean()
    if ref_mean == 0:
        return float("nan")
    return float(abs(cand[both].mean() - ref_mean) / ref_mean * 100.0)


def validation_errors(
    mo_ref: MeritOrder,
    cef_ref: CefSeries,
    mo_cand: MeritOrder,
    cef_cand: CefSeries,
    element_mw: float = 10.0,
) -> ValidationReport:
    """Compare a candidate stack/dispatch against a reference one.

    Stack errors average |cand - ref| / ref of marginal cost and emission
    intensity over fixed-width capacity elements covering the overlap of the
    two stacks; series errors average over hours; annual errors compare the
    yearly means. Points with a zero or missing reference are excluded and
    counted.
    """
    if not cef_ref.frame.index.equals(cef_cand.frame.index):
        raise ValueError("reference and candidate series must share one index")

    overlap = min(mo_ref.total_capacity_mw, mo_cand.total_capacity_mw)
    centers = np.arange(element_mw / 2.0, overlap, element_mw)
    ref_idx = np.searchsorted(mo_ref.cum_capacity_mw, centers, side="left")
    cand_idx = np.searchsorted(mo_cand.cum_capacity_mw, centers, side="left")

    excluded: dict[str, int] = {}
    mo_cost, excluded["mo_cost"] = _mean_relative_error(
        mo_ref.marginal_cost[ref_idx], mo_cand.marginal_cost[cand_idx]
    )
    mo_eps, excluded["mo_emission"] = _mean_relative_error(
        mo_ref.emission_intensity[ref_idx], mo_cand.emission_intensity[cand_idx]
    )

    pairs = {
        "price": (cef_ref.price, cef_cand.price),
        "mef": (cef_ref.mef, cef_cand.mef),
        "xef": (cef_ref.xef, cef_cand.xef),
    }
    series_err: dict[str, float] = {}
    annual_err: dict[str, float] = {}
    for name, (ref, cand) in pairs.items():
        ref_arr = ref.to_numpy(dtype=float)
        cand_arr = cand.to_numpy(dtype=float)
        series_err[name], excluded[name] = _mean_relative_error(ref_arr, cand_arr)
        annual_err[name] = _annual_relative_error(ref_arr, cand_arr)

    return ValidationReport(
        mo_cost_pct=mo_cost,
        mo_emission_pct=mo_eps,
        price_pct=series_err["price"],
        mef_pct=series_err["mef"],
        xef_pct=series_err["xef"],
        annual_price_pct=annual_err["price"],
        annual_mef_pct=annual_err["mef"],
        annual_xef_pct=annual_err["xef"],
        excluded=excluded,
    )
