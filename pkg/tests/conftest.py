"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np
import pandas as pd
import pytest

from meritcef import (
    ConfigBundle,
    DispatchBlock,
    FuelParams,
    FuelType,
    GenerationSeries,
    MeritOrder,
    PowerPlant,
    ScenarioConfig,
    compute_cef_series,
)


@pytest.fixture(scope="session")
def bundle() -> ConfigBundle:
    return ConfigBundle.default()


def hourly_index(year: int = 2019, days: int | None = None, start_day: int = 1):
    start = pd.Timestamp(year, 1, start_day)
    if days is None:
        end = pd.Timestamp(year + 1, 1, 1)
        return pd.date_range(start, end, freq="h", inclusive="left")
    return pd.date_range(start, periods=24 * days, freq="h")


def make_series(
    frame: pd.DataFrame, country: str = "XX", year: int | None = None, resolution: int = 60
) -> GenerationSeries:
    if year is None:
        year = int(frame.index[0].year)
    return GenerationSeries(
        frame=frame, country=country, year=year, resolution_minutes=resolution
    )


def simple_params(overrides: dict | None = None) -> FuelParams:
    """Fuel parameters with the shipped defaults, overridable per fuel."""
    emissions = {
        FuelType.OIL: 0.28,
        FuelType.GAS: 0.25,
        FuelType.GAS_CC: 0.25,
        FuelType.COAL: 0.34,
        FuelType.LIGNITE: 0.36,
        FuelType.NUCLEAR: 0.0,
    }
    prices = {
        FuelType.OIL: 54.31,
        FuelType.GAS: 26.10,
        FuelType.GAS_CC: 26.10,
        FuelType.COAL: 14.58,
        FuelType.LIGNITE: 6.18,
        FuelType.NUCLEAR: 4.18,
    }
    for fuel, (eps, price) in (overrides or {}).items():
        emissions[fuel] = eps
        prices[fuel] = price
    return FuelParams(emission_intensity=emissions, fuel_price=prices)


def make_plant(
    plant_id="p1",
    fuel=FuelType.COAL,
    capacity=100.0,
    efficiency=0.5,
    commissioned=None,
    shutdown=None,
) -> PowerPlant:
    return PowerPlant(
        plant_id=plant_id,
        fuel=fuel,
        capacity_mw=capacity,
        efficiency=efficiency,
        commissioned=commissioned,
        shutdown=shutdown,
    )


def make_config(
    country="XX",
    year=2019,
    method="pp",
    carbon_price=24.9,
    eta_t=1.0,
    gas_cc_share=0.5,
    params=None,
    avg_sizes=None,
    envelope=None,
) -> ScenarioConfig:
    return ScenarioConfig(
        country=country,
        year=year,
        method=method,
        carbon_price=carbon_price,
        transmission_efficiency=eta_t,
        fuel_params=params or simple_params(),
        gas_cc_share=gas_cc_share,
        avg_plant_size_mw=avg_sizes
        or {
            FuelType.NUCLEAR: 1000.0,
            FuelType.LIGNITE: 600.0,
            FuelType.COAL: 500.0,
            FuelType.GAS_CC: 400.0,
            FuelType.GAS: 150.0,
            FuelType.OIL: 200.0,
        },
        efficiency_envelope=envelope
        or {
            FuelType.NUCLEAR: (0.33, 0.33),
            FuelType.LIGNITE: (0.33, 0.43),
            FuelType.COAL: (0.35, 0.46),
            FuelType.GAS: (0.28, 0.40),
            FuelType.GAS_CC: (0.40, 0.60),
            FuelType.OIL: (0.30, 0.44),
        },
    )


def dilemma_system(days: int = 10):
    """Two-fuel system where price-driven shifts raise marginal emissions.

    A cheap high-emission coal band sits left of a pricier low-emission
    combined-cycle band. Half of each day the residual load sits in the coal
    band (high renewable feed-in), half in the gas band, with total
    generation constant, so the price incentive points from the gas hours to
    the coal hours while the marginal intensity points the other way.
    """
    params = simple_params()
    plants = [
        make_plant("coal", FuelType.COAL, capacity=100.0, efficiency=0.5),
        make_plant("cc", FuelType.GAS_CC, capacity=100.0, efficiency=0.55),
    ]
    config = make_config(method="pp", params=params)
    from meritcef import build_merit_order_pp

    mo = build_merit_order_pp(plants, params, config.carbon_price)

    idx = hourly_index(2019, days=days)
    resid = np.where(idx.hour < 12, 80.0, 150.0)
    total = 200.0
    frame = pd.DataFrame(
        {
            FuelType.COAL: resid,
            FuelType.WIND_ONSHORE: total - resid,
        },
        index=idx,
    )
    gen = make_series(frame)
    cef = compute_cef_series(mo, gen, config)
    return mo, gen, config, cef


def random_cef(rng: np.random.Generator, days: int = 6):
    """Synthetic dispatch result with continuous (tie-free) signals."""
    from meritcef.dispatch import CefSeries

    idx = hourly_index(2019, days=days)
    n = len(idx)
    frame = pd.DataFrame(
        {
            "residual_load_mw": rng.uniform(10, 100, n),
            "marginal_fuel": rng.choice(["coal", "gas_cc", "lignite"], n),
            "marginal_cost_eur_mwh": rng.uniform(5, 120, n),
            "mef_t_per_mwh": rng.uniform(0.01, 1.2, n),
            "xef_t_per_mwh": rng.uniform(0.01, 1.0, n),
            "saturated_flag": np.zeros(n, dtype=bool),
        },
        index=idx,
    )
    return CefSeries(frame=frame, country="XX", year=2019, method="pp")


def stack_from_values(costs, epsilons, capacities=None, fuels=None) -> MeritOrder:
    """Merit order straight from value arrays, bypassing fuel parameters."""
    n = len(costs)
    capacities = capacities if capacities is not None else [100.0] * n
    fuels = fuels if fuels is not None else [FuelType.COAL] * n
    blocks = [
        DispatchBlock(
            fuel=fuels[i],
            capacity_mw=float(capacities[i]),
            efficiency=0.5,
            marginal_cost=float(costs[i]),
            emission_intensity=float(epsilons[i]),
        )
        for i in range(n)
    ]
    return MeritOrder(blocks)
