"""Parse, clean, and normalize the input datasets.

Handles four kinds of files: per-country-year generation exports (possibly
sub-hourly, with gaps), installed-capacity matrices, power plant lists, and
weekly emission-allowance prices. Everything downstream assumes the outputs
of this module: hourly, gap-free, non-negative generation frames and
validated plant records.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Mapping, NamedTuple

import numpy as np
import pandas as pd

from .config import load_fuel_rename_table
from .fuels import FuelType

log = logging.getLogger(__name__)

TIMESTAMP_COLUMN_NAMES = {"timestamp", "time", "datetime", "date", "mtu"}


class IngestError(Exception):
    """Base class for input-data problems."""


class ParseError(IngestError):
    """The file structure itself is unusable (missing columns, bad header)."""


class DataError(IngestError):
    """The file parsed but its contents violate a hard requirement."""


class FillRecord(NamedTuple):
    timestamp: pd.Timestamp
    fuel: FuelType
    kind: str  # forward_fill | backfill | outlier


@dataclass
class PowerPlant:
    """One dispatchable unit: fuel, size, efficiency, activity window."""

    plant_id: str
    fuel: FuelType
    capacity_mw: float
    efficiency: float
    commissioned: int | None = None
    shutdown: int | None = None

    def __post_init__(self) -> None:
        if self.capacity_mw <= 0:
            raise ValueError(f"plant {self.plant_id}: capacity must be > 0")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"plant {self.plant_id}: efficiency must be in (0, 1]")

    def is_active(self, year: int) -> bool:
        """Active if commissioned on or before `year` and not yet shut down."""
        if self.commissioned is not None and self.commissioned > year:
            return False
        if self.shutdown is not None and year >= self.shutdown:
            return False
        return True


@dataclass
class GenerationSeries:
    """Per-fuel net generation in MWh/h for one country-year.

    `frame` is indexed by naive local-market timestamps with one column per
    canonical fuel. Raw series may be sub-hourly and contain NaN markers;
    after `normalize_generation` the index is hourly and gap-free and all
    values are finite and non-negative. Every imputed or outlier-replaced
    point is listed in `fill_report`.
    """

    frame: pd.DataFrame
    country: str
    year: int
    resolution_minutes: int
    fill_report: list[FillRecord] = field(default_factory=list)
    skipped_columns: list[str] = field(default_factory=list)

    def copy(self) -> "GenerationSeries":
        return GenerationSeries(
            frame=self.frame.copy(),
            country=self.country,
            year=self.year,
            resolution_minutes=self.resolution_minutes,
            fill_report=list(self.fill_report),
            skipped_columns=list(self.skipped_columns),
        )

    @property
    def fuels(self) -> list[FuelType]:
        return list(self.frame.columns)

    @property
    def fill_fraction(self) -> float:
        """Share of all points that had to be imputed (outliers re-count as fills)."""
        filled = {(r.timestamp, r.fuel) for r in self.fill_report if r.kind != "outlier"}
        return len(filled) / self.frame.size if self.frame.size else 0.0

    def require_hourly_gap_free(self) -> None:
        idx = self.frame.index
        if len(idx) == 0:
            raise DataError("empty generation series")
        if not idx.is_monotonic_increasing or idx.has_duplicates:
            raise DataError("generation index must be strictly increasing")
        deltas = np.diff(idx.asi8)
        if len(deltas) and not (deltas == 3_600_000_000_000).all():
            raise DataError("generation index must be hourly and gap-free")
        values = self.frame.to_numpy()
        if np.isnan(values).any():
            raise DataError("generation series still contains missing values")
        if not np.isfinite(values).all() or (values < 0).any():
            raise DataError("generation values must be finite and non-negative")


def _find_timestamp_column(frame: pd.DataFrame) -> str:
    for col in frame.columns:
        if str(col).strip().lower() in TIMESTAMP_COLUMN_NAMES:
            return col
    raise ParseError(
        f"no timestamp column found (looked for one of {sorted(TIMESTAMP_COLUMN_NAMES)})"
    )


def _parse_timestamps(raw: pd.Series) -> pd.DatetimeIndex:
    try:
        idx = pd.DatetimeIndex(pd.to_datetime(raw, format="ISO8601"))
    except (ValueError, TypeError) as exc:
        raise ParseError(f"unparseable timestamps: {exc}") from exc
    if idx.tz is not None:
        # Exports carry local market time; keep the clock time as-is.
        idx = idx.tz_localize(None)
    return idx


def _infer_resolution_minutes(idx: pd.DatetimeIndex) -> int:
    if len(idx) < 2:
        return 60
    deltas = np.diff(idx.asi8)
    minutes = int(deltas.min() // 60_000_000_000)
    if minutes <= 0:
        raise DataError("duplicate timestamps in generation file")
    if 60 % minutes != 0:
        raise DataError(f"resolution of {minutes} min does not divide one hour")
    return minutes


def parse_generation_csv(
    source: str | Path | IO,
    column_map: Mapping[str, FuelType] | None = None,
    country: str = "",
    year: int | None = None,
) -> GenerationSeries:
    """Read a raw generation export into a (possibly sub-hourly) series.

    Columns are renamed to canonical fuels via `column_map` (defaults to the
    shipped source-label table plus the canonical names themselves); columns
    mapping to the same fuel are summed. Unparseable or negative cells become
    missing markers. Unknown fuel columns are skipped and recorded.
    """
    try:
        # round_trip: the default float parser can be off by one ulp, which
        # would break write/parse round-trips of normalized files.
        raw = pd.read_csv(source, float_precision="round_trip")
    except Exception as exc:
        raise ParseError(f"cannot read generation CSV: {exc}") from exc
    if raw.empty:
        raise ParseError("generation CSV has no rows")

    ts_col = _find_timestamp_column(raw)
    idx = _parse_timestamps(raw[ts_col])

    if column_map is None:
        column_map = dict(load_fuel_rename_table())
        column_map.update({f.value: f for f in FuelType})

    columns: dict[FuelType, pd.Series] = {}
    skipped: list[str] = []
    for col in raw.columns:
        if col == ts_col:
            continue
        fuel = column_map.get(str(col).strip())
        if fuel is None:
            log.warning("skipping unknown fuel column %r", col)
            skipped.append(str(col))
            continue
        values = pd.to_numeric(raw[col], errors="coerce")
        values[~np.isfinite(values)] = np.nan
        n_negative = int((values < 0).sum())
        if n_negative:
            log.warning("column %r: %d negative values treated as missing", col, n_negative)
            values[values < 0] = np.nan
        if fuel in columns:
            # Several source categories can fold into one canonical fuel.
            columns[fuel] = columns[fuel].add(values, fill_value=0.0)
        else:
            columns[fuel] = values
    if not columns:
        raise ParseError("no recognizable fuel columns")

    frame = pd.DataFrame(columns)
    frame.index = idx
    frame = frame.sort_index()
    if frame.index.has_duplicates:
        dups = frame.index[frame.index.duplicated()][:3]
        raise DataError(f"duplicate timestamps, e.g. {list(dups)}")

    if year is None:
        year = int(frame.index[0].year)
    return GenerationSeries(
        frame=frame,
        country=country,
        year=year,
        resolution_minutes=_infer_resolution_minutes(frame.index),
        skipped_columns=skipped,
    )


def resample_hourly(series: GenerationSeries) -> GenerationSeries:
    """Average sub-hourly power values into hourly ones.

    The mean (not the sum) keeps MWh/h readings energy-consistent. Hours
    whose sub-points are all missing stay missing; hours with off-grid
    timestamps are a fatal data error.
    """
    if series.resolution_minutes == 60:
        return series.copy()

    res = series.resolution_minutes
    idx = series.frame.index
    off_grid = (idx.minute % res != 0) | (idx.second != 0) | (idx.nanosecond != 0)
    if off_grid.any():
        bad_hour = idx[off_grid][0].floor("h")
        raise DataError(f"irregular sub-hourly spacing in hour {bad_hour}")

    hourly = series.frame.groupby(idx.floor("h")).mean()
    hourly.index.name = series.frame.index.name
    out = series.copy()
    out.frame = hourly
    out.resolution_minutes = 60
    return out


def reindex_full_year(series: GenerationSeries) -> GenerationSeries:
    """Expand an hourly series to the full calendar year (8760/8784 stamps)."""
    if series.resolution_minutes != 60:
        raise DataError("reindex_full_year expects an hourly series")
    start = pd.Timestamp(series.year, 1, 1)
    full = pd.date_range(start, start + pd.DateOffset(years=1), freq="h", inclusive="left")
    outside = ~series.frame.index.isin(full)
    if outside.any():
        log.warning(
            "%s %d: dropping %d rows outside the calendar year",
            series.country,
            series.year,
            int(outside.sum()),
        )
    out = series.copy()
    out.frame = series.frame.loc[~outside].reindex(full)
    out.frame.index.name = series.frame.index.name
    return out


def detect_outliers_zscore(
    series: GenerationSeries, threshold: float = 12.0
) -> list[tuple[pd.Timestamp, FuelType]]:
    """Flag points whose per-fuel Z-score magnitude exceeds `threshold`.

    Scores use the population standard deviation over the whole series;
    zero-variance columns cannot be scored and are skipped with a warning.
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    flags: list[tuple[pd.Timestamp, FuelType]] = []
    for fuel in series.frame.columns:
        values = series.frame[fuel].to_numpy(dtype=float)
        if np.isnan(values).all():
            continue
        mean = np.nanmean(values)
        std = np.nanstd(values)
        if std == 0.0 or np.isnan(std):
            log.warning("%s: zero variance, skipping outlier scan", fuel)
            continue
        scores = (values - mean) / std
        for pos in np.flatnonzero(np.abs(scores) > threshold):
            flags.append((series.frame.index[pos], fuel))
    return flags


def remove_outliers(series: GenerationSeries, threshold: float = 12.0) -> GenerationSeries:
    """Convert flagged outliers to missing markers and record them."""
    out = series.copy()
    for timestamp, fuel in detect_outliers_zscore(series, threshold):
        out.frame.loc[timestamp, fuel] = np.nan
        out.fill_report.append(FillRecord(timestamp, fuel, "outlier"))
    return out


def fill_missing(series: GenerationSeries) -> GenerationSeries:
    """Forward-fill gaps; backfill leading gaps from the first observation.

    Columns with no data at all are dropped with a warning. Every filled
    point is appended to the fill report.
    """
    out = series.copy()
    empty = [f for f in out.frame.columns if out.frame[f].isna().all()]
    for fuel in empty:
        log.warning("%s: no observed values, dropping column", fuel)
        out.skipped_columns.append(f"{fuel} (no data)")
    out.frame = out.frame.drop(columns=empty)

    missing_before = out.frame.isna()
    forward = out.frame.ffill()
    filled = forward.bfill()

    for fuel in out.frame.columns:
        was_missing = missing_before[fuel].to_numpy()
        by_forward = was_missing & forward[fuel].notna().to_numpy()
        by_backward = was_missing & ~by_forward
        for pos in np.flatnonzero(by_forward):
            out.fill_report.append(FillRecord(out.frame.index[pos], fuel, "forward_fill"))
        for pos in np.flatnonzero(by_backward):
            out.fill_report.append(FillRecord(out.frame.index[pos], fuel, "backfill"))

    out.frame = filled
    return out


def normalize_generation(series: GenerationSeries, zscore_threshold: float = 12.0) -> GenerationSeries:
    """Full cleaning pipeline: hourly, full-year, outlier-free, gap-free."""
    out = resample_hourly(series)
    out = reindex_full_year(out)
    out = remove_outliers(out, zscore_threshold)
    out = fill_missing(out)
    out.require_hourly_gap_free()
    return out


def write_generation_csv(series: GenerationSeries, path: str | Path) -> None:
    """Canonical normalized CSV: ISO timestamps, full-precision floats."""
    frame = series.frame.copy()
    frame.columns = [f.value for f in series.frame.columns]
    frame.index.name = "timestamp"
    frame.to_csv(path, date_format="%Y-%m-%dT%H:%M:%S")


def write_fill_report(series: GenerationSeries, path: str | Path) -> None:
    report = pd.DataFrame(
        [(r.timestamp, r.fuel.value, r.kind) for r in series.fill_report],
        columns=["timestamp", "fuel", "kind"],
    )
    report.to_csv(path, index=False, date_format="%Y-%m-%dT%H:%M:%S")


def load_plant_list(
    source: str | Path | IO,
    year: int,
    country: str | None = None,
) -> tuple[list[PowerPlant], list[dict]]:
    """Read a plant list CSV, keeping plants active in `year`.

    Expected columns: id, country, fuel, capacity_mw, efficiency,
    commissioned, shutdown. Rows with missing/invalid efficiency,
    non-positive capacity, or unknown fuel are rejected with a reason;
    plants outside their activity window are silently filtered.
    """
    try:
        raw = pd.read_csv(source)
    except Exception as exc:
        raise ParseError(f"cannot read plant list: {exc}") from exc
    required = {"id", "country", "fuel", "capacity_mw", "efficiency", "commissioned", "shutdown"}
    missing = required - set(raw.columns)
    if missing:
        raise ParseError(f"plant list is missing columns: {sorted(missing)}")

    renames = load_fuel_rename_table()
    renames.update({f.value: f for f in FuelType})

    plants: list[PowerPlant] = []
    rejected: list[dict] = []

    def reject(row: pd.Series, reason: str) -> None:
        rejected.append({"id": str(row["id"]), "reason": reason})

    for _, row in raw.iterrows():
        if country is not None and str(row["country"]).strip() != country:
            continue
        fuel = renames.get(str(row["fuel"]).strip())
        if fuel is None:
            reject(row, f"unknown fuel {row['fuel']!r}")
            continue
        capacity = pd.to_numeric(row["capacity_mw"], errors="coerce")
        if pd.isna(capacity) or capacity <= 0:
            reject(row, f"invalid capacity {row['capacity_mw']!r}")
            continue
        efficiency = pd.to_numeric(row["efficiency"], errors="coerce")
        if pd.isna(efficiency):
            reject(row, "missing efficiency")
            continue
        if not 0.0 < efficiency <= 1.0:
            reject(row, f"efficiency {efficiency} outside (0, 1]")
            continue
        commissioned = pd.to_numeric(row["commissioned"], errors="coerce")
        shutdown = pd.to_numeric(row["shutdown"], errors="coerce")
        plant = PowerPlant(
            plant_id=str(row["id"]),
            fuel=fuel,
            capacity_mw=float(capacity),
            efficiency=float(efficiency),
            commissioned=None if pd.isna(commissioned) else int(commissioned),
            shutdown=None if pd.isna(shutdown) else int(shutdown),
        )
        if plant.is_active(year):
            plants.append(plant)
    return plants, rejected


def read_capacity_csv(source: str | Path | IO) -> dict[str, dict[FuelType, float]]:
    """Installed capacity per country and fuel (MW), one year per file."""
    try:
        raw = pd.read_csv(source)
    except Exception as exc:
        raise ParseError(f"cannot read capacity CSV: {exc}") from exc
    if "country" not in raw.columns:
        raise ParseError("capacity CSV needs a 'country' column")

    renames = load_fuel_rename_table()
    renames.update({f.value: f for f in FuelType})

    table: dict[str, dict[FuelType, float]] = {}
    for _, row in raw.iterrows():
        cc = str(row["country"]).strip()
        caps: dict[FuelType, float] = {}
        for col in raw.columns:
            if col == "country":
                continue
            fuel = renames.get(str(col).strip())
            if fuel is None:
                log.warning("capacity CSV: skipping unknown fuel column %r", col)
                continue
            value = pd.to_numeric(row[col], errors="coerce")
            if pd.isna(value):
                continue
            if value < 0:
                raise DataError(f"negative capacity for {cc}/{fuel}")
            caps[fuel] = caps.get(fuel, 0.0) + float(value)
        table[cc] = caps
    return table


def annual_carbon_price(source: str | Path | IO | pd.DataFrame, year: int) -> float:
    """Average the weekly allowance prices that fall in `year` (EUR/t)."""
    if isinstance(source, pd.DataFrame):
        raw = source
    else:
        try:
            raw = pd.read_csv(source)
        except Exception as exc:
            raise ParseError(f"cannot read allowance price CSV: {exc}") from exc
    required = {"date", "price_eur_per_t"}
    if not required <= set(raw.columns):
        raise ParseError(f"allowance price CSV needs columns {sorted(required)}")
    dates = pd.to_datetime(raw["date"])
    in_year = raw.loc[dates.dt.year == year, "price_eur_per_t"]
    prices = pd.to_numeric(in_year, errors="coerce").dropna()
    if prices.empty:
        raise IngestError(
            f"no allowance prices for {year}; pass an explicit carbon price instead"
        )
    return float(prices.mean())
