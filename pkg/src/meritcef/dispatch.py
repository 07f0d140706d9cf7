"""Apply a merit order to hourly residual load.

Produces aligned series of the marginal fuel, the marginal cost (the price
proxy), the marginal emission factor (intensity of the marginal block over
transmission efficiency) and the grid-mix emission factor (dispatched
emissions over total generation).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd

from . import kernels
from .config import ScenarioConfig
from .fuels import CONVENTIONAL_FUELS, RESIDUAL_LOAD_FUELS, FuelType
from .ingest import GenerationSeries
from .merit_order import MeritOrder

CEF_CSV_COLUMNS = [
    "residual_load_mw",
    "marginal_fuel",
    "marginal_cost_eur_mwh",
    "mef_t_per_mwh",
    "xef_t_per_mwh",
    "saturated_flag",
]


@dataclass
class CefSeries:
    """Hourly dispatch outcome for one scenario."""

    frame: pd.DataFrame
    country: str = ""
    year: int = 0
    method: str = ""
    carbon_price: float = float("nan")
    provenance: str = ""

    @property
    def price(self) -> pd.Series:
        return self.frame["marginal_cost_eur_mwh"]

    @property
    def mef(self) -> pd.Series:
        return self.frame["mef_t_per_mwh"]

    @property
    def xef(self) -> pd.Series:
        return self.frame["xef_t_per_mwh"]

    @property
    def marginal_fuel(self) -> pd.Series:
        return self.frame["marginal_fuel"]

    @property
    def n_saturated(self) -> int:
        return int(self.frame["saturated_flag"].sum())

    @property
    def n_invalid_xef(self) -> int:
        return int(self.frame["xef_t_per_mwh"].isna().sum())

    def to_csv(self, path: str | Path) -> None:
        out = self.frame.copy()
        out.index.name = "timestamp"
        out["saturated_flag"] = out["saturated_flag"].astype(int)
        out[CEF_CSV_COLUMNS].to_csv(path, float_format="%.6g", date_format="%Y-%m-%dT%H:%M:%S")

    @classmethod
    def from_csv(cls, path: str | Path, **meta) -> "CefSeries":
        frame = pd.read_csv(path, index_col="timestamp", parse_dates=True)
        frame["saturated_flag"] = frame["saturated_flag"].astype(bool)
        return cls(frame=frame, **meta)


def residual_load(
    series: GenerationSeries, fuels: Iterable[FuelType] | None = None
) -> pd.Series:
    """Hourly residual load: the generation the dispatchable stack covers.

    Defaults to the conventional fuels that can appear in a merit order
    (`other_conv` has no cost model, so its generation is left out).
    """
    selected = set(RESIDUAL_LOAD_FUELS if fuels is None else fuels)
    present = [f for f in series.frame.columns if f in selected]
    if not present:
        return pd.Series(0.0, index=series.frame.index, name="residual_load_mw")
    return series.frame[present].sum(axis=1).rename("residual_load_mw")


def conv_res_shares(series: GenerationSeries) -> pd.DataFrame:
    """Hourly conventional and renewable shares of total generation."""
    total = series.frame.sum(axis=1)
    conv_cols = [f for f in series.frame.columns if f in CONVENTIONAL_FUELS]
    conv = series.frame[conv_cols].sum(axis=1) if conv_cols else 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        conv_share = np.where(total > 0, conv / total, np.nan)
    out = pd.DataFrame(index=series.frame.index)
    out["conv_share"] = conv_share
    out["res_share"] = 1.0 - out["conv_share"]
    return out


def marginal_block(mo: MeritOrder, residual_mw: float) -> tuple[int, bool]:
    """Index of the block whose capacity interval brackets the residual load.

    Zero residual maps to the first block (a marginal unit always exists);
    residual beyond the stack maps to the last block with a saturation flag.
    """
    if residual_mw < 0:
        raise ValueError(f"residual load must be >= 0, got {residual_mw}")
    saturated = residual_mw > mo.total_capacity_mw
    r = min(residual_mw, mo.total_capacity_mw)
    idx = int(np.searchsorted(mo.cum_capacity_mw, r, side="left"))
    return idx, saturated


def mef_at(mo: MeritOrder, residual_mw: float, eta_t: float) -> float:
    """Marginal emission factor, t CO2eq per MWh_el delivered."""
    idx, _ = marginal_block(mo, residual_mw)
    return mo.emission_intensity[idx] / eta_t


def price_at(mo: MeritOrder, residual_mw: float) -> float:
    idx, _ = marginal_block(mo, residual_mw)
    return float(mo.marginal_cost[idx])


def dispatched_mw(mo: MeritOrder, residual_mw: float) -> np.ndarray:
    """Per-block dispatched power; sums to min(residual, total) exactly."""
    idx, _ = marginal_block(mo, residual_mw)
    r = min(residual_mw, mo.total_capacity_mw)
    out = np.zeros(len(mo))
    out[:idx] = mo.capacity_mw[:idx]
    prev_cum = mo.cum_capacity_mw[idx - 1] if idx > 0 else 0.0
    out[idx] = r - prev_cum
    return out


def utilization(mo: MeritOrder, residual_mw: float) -> np.ndarray:
    """Capacity utilization per block: full 1, idle 0, marginal fractional."""
    return dispatched_mw(mo, residual_mw) / mo.capacity_mw


def xef_at(
    mo: MeritOrder,
    residual_mw: float,
    total_generation_mwh: float,
    eta_t: float,
    dt: float = 1.0,
) -> float:
    """Grid-mix emission factor: dispatched emissions over total generation."""
    if total_generation_mwh <= 0:
        raise ValueError("total generation must be > 0 for a grid-mix factor")
    emissions = float(np.sum(mo.emission_intensity * dispatched_mw(mo, residual_mw)))
    return emissions * dt / (eta_t * total_generation_mwh)


def compute_cef_series(
    mo: MeritOrder,
    gen: GenerationSeries,
    config: ScenarioConfig,
    residual_fuels: Iterable[FuelType] | None = None,
) -> CefSeries:
    """Hour-by-hour dispatch of a full generation series.

    Problem hours never abort the year: residual load beyond the stack is
    clamped and flagged, hours without generation get a NaN grid-mix factor.
    """
    gen.require_hourly_gap_free()
    if gen.country and config.country and gen.country != config.country:
        raise ValueError(f"series is for {gen.country}, scenario for {config.country}")
    if gen.year and config.year and gen.year != config.year:
        raise ValueError(f"series is for {gen.year}, scenario for {config.year}")

    resid = residual_load(gen, residual_fuels).to_numpy(dtype=float)
    total_gen = gen.frame.sum(axis=1).to_numpy(dtype=float)

    midx, mef, xef, price, saturated, invalid = kernels.dispatch_hours(
        mo.capacity_mw,
        mo.emission_intensity,
        mo.marginal_cost,
        resid,
        total_gen,
        config.transmission_efficiency,
        config.dt_hours,
    )

    frame = pd.DataFrame(index=gen.frame.index)
    frame["residual_load_mw"] = resid
    frame["marginal_fuel"] = mo.fuel_values[midx]
    frame["marginal_cost_eur_mwh"] = price
    frame["mef_t_per_mwh"] = mef
    frame["xef_t_per_mwh"] = xef
    frame["saturated_flag"] = saturated
    return CefSeries(
        frame=frame,
        country=config.country,
        year=config.year,
        method=config.method,
        carbon_price=config.carbon_price,
        provenance=mo.provenance,
    )
