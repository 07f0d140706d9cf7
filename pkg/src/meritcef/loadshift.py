"""Standardized daily load-shift simulation.

Each complete day, a fixed (default 1 kWh) load is moved from the hour where
the driving signal peaks to the hour where it is lowest. The shift is assumed
small enough never to change the dispatch itself, so its cost/emission effect
is the difference of the per-kWh factors at the two hours. A study evaluates
the same events under all three metrics: marginal cost, grid-mix emission
factor, and marginal emission factor.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from .dispatch import CefSeries

METRICS = ("price", "xef", "mef")

#: Report keys per metric: cost, grid-mix emissions, marginal emissions.
_METRIC_KEYS = {"price": "dc_pct", "xef": "dxe_pct", "mef": "dme_pct"}


@dataclass
class ShiftEvent:
    """One daily shift: energy leaves `source_time` and lands at `sink_time`."""

    day: pd.Timestamp
    source_time: pd.Timestamp
    sink_time: pd.Timestamp
    shifted_kwh: float = 1.0
    source_values: dict[str, float] = field(default_factory=dict)
    sink_values: dict[str, float] = field(default_factory=dict)
    source_fuel: str | None = None
    sink_fuel: str | None = None

    def __post_init__(self) -> None:
        if self.source_time == self.sink_time:
            raise ValueError("source and sink hour must differ")


@dataclass
class DailySelection:
    events: list[ShiftEvent]
    n_skipped_days: int = 0
    n_zero_spread_days: int = 0


@dataclass
class ShiftReport:
    """Annual outcome of one study: events plus relative changes in percent.

    Relative changes use the sum of the metric over all source hours as the
    baseline, i.e. they answer "by how much did the shifted energy's cost or
    emissions change". -100 means the shifted energy became free/carbon-free.
    A value is None when no events occurred or the baseline sum is zero.
    """

    driver: str | None
    events: list[ShiftEvent]
    dc_pct: float | None
    dxe_pct: float | None
    dme_pct: float | None
    n_skipped_days: int = 0
    n_zero_spread_days: int = 0
    fuel_pair_counts: Counter = field(default_factory=Counter)
    source_hour_counts: Counter = field(default_factory=Counter)
    sink_hour_counts: Counter = field(default_factory=Counter)

    @property
    def n_events(self) -> int:
        return len(self.events)

    def summary_dict(self) -> dict:
        return {
            "driver": self.driver or "",
            "baseline": "metric summed over source hours",
            "dc_pct": self.dc_pct,
            "dxe_pct": self.dxe_pct,
            "dme_pct": self.dme_pct,
            "n_events": self.n_events,
            "n_skipped_days": self.n_skipped_days,
            "n_zero_spread_days": self.n_zero_spread_days,
        }

    def events_frame(self) -> pd.DataFrame:
        rows = []
        for ev in self.events:
            rows.append(
                {
                    "date": ev.day.date().isoformat(),
                    "source_hour": ev.source_time.hour,
                    "sink_hour": ev.sink_time.hour,
                    "src_fuel": ev.source_fuel or "",
                    "sink_fuel": ev.sink_fuel or "",
                    "d_price": ev.sink_values.get("price", np.nan)
                    - ev.source_values.get("price", np.nan),
                    "d_xef": ev.sink_values.get("xef", np.nan)
                    - ev.source_values.get("xef", np.nan),
                    "d_mef": ev.sink_values.get("mef", np.nan)
                    - ev.source_values.get("mef", np.nan),
                }
            )
        columns = ["date", "source_hour", "sink_hour", "src_fuel", "sink_fuel",
                   "d_price", "d_xef", "d_mef"]
        return pd.DataFrame(rows, columns=columns)


def daily_shift_events(
    signal: pd.Series, shift_kwh: float = 1.0, signal_name: str = "signal"
) -> DailySelection:
    """Pick (source, sink) = (argmax, argmin) of the signal for each day.

    Ties resolve to the earliest hour. Days that are not complete 24-hour
    blocks, or whose signal contains gaps, are skipped and counted; days with
    zero spread produce no event (there is nothing to gain from shifting).
    """
    events: list[ShiftEvent] = []
    n_skipped = 0
    n_zero = 0
    for day, chunk in signal.groupby(signal.index.normalize()):
        hours = chunk.index.hour
        if len(chunk) != 24 or set(hours) != set(range(24)):
            n_skipped += 1
            continue
        values = chunk.to_numpy(dtype=float)
        if np.isnan(values).any():
            n_skipped += 1
            continue
        hi = int(np.argmax(values))
        lo = int(np.argmin(values))
        if values[hi] == values[lo]:
            n_zero += 1
            continue
        events.append(
            ShiftEvent(
                day=day,
                source_time=chunk.index[hi],
                sink_time=chunk.index[lo],
                shifted_kwh=shift_kwh,
                source_values={signal_name: float(values[hi])},
                sink_values={signal_name: float(values[lo])},
            )
        )
    return DailySelection(events, n_skipped_days=n_skipped, n_zero_spread_days=n_zero)


def evaluate_shifts(
    events: Sequence[ShiftEvent],
    price: pd.Series,
    xef: pd.Series,
    mef: pd.Series,
    driver: str | None = None,
) -> ShiftReport:
    """Account the events under all three metrics.

    For each metric the relative annual change is
    100 * sum(value at sinks - value at sources) / sum(value at sources).
    """
    series = {"price": price, "xef": xef, "mef": mef}
    if not (price.index.equals(xef.index) and price.index.equals(mef.index)):
        raise ValueError("price, xef, and mef series must share one index")

    for ev in events:
        for name, s in series.items():
            try:
                ev.source_values[name] = float(s.loc[ev.source_time])
                ev.sink_values[name] = float(s.loc[ev.sink_time])
            except KeyError:
                raise ValueError(f"series do not cover event at {ev.source_time}") from None

    deltas: dict[str, float | None] = {}
    for name in METRICS:
        if not events:
            deltas[_METRIC_KEYS[name]] = None
            continue
        source_sum = sum(ev.source_values[name] for ev in events)
        sink_sum = sum(ev.sink_values[name] for ev in events)
        if source_sum == 0 or not math.isfinite(source_sum) or not math.isfinite(sink_sum):
            deltas[_METRIC_KEYS[name]] = None
        else:
            deltas[_METRIC_KEYS[name]] = 100.0 * (sink_sum - source_sum) / source_sum

    fuel_pairs = Counter(
        (ev.source_fuel, ev.sink_fuel) for ev in events if ev.source_fuel and ev.sink_fuel
    )
    return ShiftReport(
        driver=driver,
        events=list(events),
        dc_pct=deltas["dc_pct"],
        dxe_pct=deltas["dxe_pct"],
        dme_pct=deltas["dme_pct"],
        fuel_pair_counts=fuel_pairs,
        source_hour_counts=Counter(ev.source_time.hour for ev in events),
        sink_hour_counts=Counter(ev.sink_time.hour for ev in events),
    )


def run_shift_study(cef: CefSeries, driver: str, shift_kwh: float = 1.0) -> ShiftReport:
    """Full study on one dispatch result with the given incentive signal."""
    if driver not in METRICS:
        raise ValueError(f"driver must be one of {METRICS}, got {driver!r}")
    signal = {"price": cef.price, "xef": cef.xef, "mef": cef.mef}[driver]
    selection = daily_shift_events(signal, shift_kwh=shift_kwh, signal_name=driver)

    fuels = cef.marginal_fuel
    for ev in selection.events:
        ev.source_fuel = str(fuels.loc[ev.source_time])
        ev.sink_fuel = str(fuels.loc[ev.sink_time])

    report = evaluate_shifts(selection.events, cef.price, cef.xef, cef.mef, driver=driver)
    report.n_skipped_days = selection.n_skipped_days
    report.n_zero_spread_days = selection.n_zero_spread_days
    return report
