"""Merit-order construction.

Two routes produce the same structure: the plant-list route ("pp") builds one
dispatch block per real unit, the piecewise-linear route ("pwl") discretizes
installed capacity per fuel into equally sized virtual plants whose
efficiencies ramp linearly between per-fuel envelope bounds. "pwlv" is the
pwl route fed with capacities aggregated from a plant list, used to compare
both routes on an identical capacity universe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from .config import FuelParams, ScenarioConfig
from .fuels import FuelType, MERIT_ORDER_FUELS
from .ingest import PowerPlant


class MeritOrderError(ValueError):
    """Raised when a merit order cannot be built from the given inputs."""


def plant_emission_intensity(plant: PowerPlant, params: FuelParams) -> float:
    """Emission intensity of delivered electricity, t CO2eq per MWh_el."""
    try:
        fuel_eps = params.emission_intensity[plant.fuel]
    except KeyError:
        raise MeritOrderError(f"no emission intensity for fuel {plant.fuel}") from None
    return fuel_eps / plant.efficiency


def plant_marginal_cost(plant: PowerPlant, params: FuelParams, carbon_price: float) -> float:
    """Fuel cost plus carbon cost per MWh_el at the plant's efficiency."""
    if plant.efficiency <= 0:
        raise MeritOrderError(f"plant {plant.plant_id}: efficiency must be > 0")
    if carbon_price < 0:
        raise MeritOrderError("carbon price must be >= 0")
    try:
        price = params.fuel_price[plant.fuel]
        fuel_eps = params.emission_intensity[plant.fuel]
    except KeyError:
        raise MeritOrderError(f"no fuel parameters for {plant.fuel}") from None
    return price / plant.efficiency + (fuel_eps / plant.efficiency) * carbon_price


@dataclass(frozen=True)
class DispatchBlock:
    """One slice of the supply stack, sorted into place by marginal cost."""

    fuel: FuelType
    capacity_mw: float
    efficiency: float
    marginal_cost: float  # EUR per MWh_el
    emission_intensity: float  # t CO2eq per MWh_el
    cum_capacity_mw: float = float("nan")  # filled in by MeritOrder

    def sort_key(self) -> tuple:
        # Equal costs break ties by cleaner-first, then fuel name and size,
        # so two builds of the same inputs are always identical.
        return (self.marginal_cost, self.emission_intensity, self.fuel.value, self.capacity_mw)


class MeritOrder:
    """Cost-sorted dispatch blocks with cumulative capacities.

    Immutable after construction; exposes NumPy views for the dispatch
    kernels.
    """

    def __init__(self, blocks: Sequence[DispatchBlock], method: str = "", provenance: str = ""):
        if not blocks:
            raise MeritOrderError("merit order needs at least one block")
        ordered = sorted(blocks, key=DispatchBlock.sort_key)
        capacities = np.array([b.capacity_mw for b in ordered], dtype=float)
        if (capacities <= 0).any():
            raise MeritOrderError("all block capacities must be > 0")
        cum = np.cumsum(capacities)
        self.blocks: tuple[DispatchBlock, ...] = tuple(
            DispatchBlock(
                fuel=b.fuel,
                capacity_mw=b.capacity_mw,
                efficiency=b.efficiency,
                marginal_cost=b.marginal_cost,
                emission_intensity=b.emission_intensity,
                cum_capacity_mw=float(c),
            )
            for b, c in zip(ordered, cum)
        )
        self.method = method
        self.provenance = provenance
        self.capacity_mw = capacities
        self.cum_capacity_mw = cum
        self.emission_intensity = np.array([b.emission_intensity for b in ordered])
        self.marginal_cost = np.array([b.marginal_cost for b in ordered])
        self.fuel_values = np.array([b.fuel.value for b in ordered], dtype=object)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def total_capacity_mw(self) -> float:
        return float(self.cum_capacity_mw[-1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "rank": np.arange(1, len(self.blocks) + 1),
                "fuel": [b.fuel.value for b in self.blocks],
                "capacity_mw": self.capacity_mw,
                "cum_capacity_mw": self.cum_capacity_mw,
                "efficiency": [b.efficiency for b in self.blocks],
                "marginal_cost_eur_mwh": self.marginal_cost,
                "emission_intensity_t_mwh": self.emission_intensity,
            }
        )


def _block_from_plant(plant: PowerPlant, params: FuelParams, carbon_price: float) -> DispatchBlock:
    return DispatchBlock(
        fuel=plant.fuel,
        capacity_mw=plant.capacity_mw,
        efficiency=plant.efficiency,
        marginal_cost=plant_marginal_cost(plant, params, carbon_price),
        emission_intensity=plant_emission_intensity(plant, params),
    )


def build_merit_order_pp(
    plants: Iterable[PowerPlant],
    params: FuelParams,
    carbon_price: float,
    provenance: str = "",
) -> MeritOrder:
    """Sort an explicit plant list into a merit order, one block per plant."""
    plants = list(plants)
    if not plants:
        raise MeritOrderError("empty plant list")
    blocks = [_block_from_plant(p, params, carbon_price) for p in plants]
    return MeritOrder(blocks, method="pp", provenance=provenance)


def split_gas_capacity(gas_capacity_mw: float, cc_share: float) -> tuple[float, float]:
    """Split total gas capacity into (combined-cycle, open-cycle) parts."""
    if not 0.0 <= cc_share <= 1.0:
        raise MeritOrderError(f"cc share must be in [0, 1], got {cc_share}")
    cc = cc_share * gas_capacity_mw
    return cc, gas_capacity_mw - cc


def efficiency_envelope_from_regression(
    plants: Iterable[PowerPlant],
) -> dict[FuelType, tuple[float, float]]:
    """Per-fuel efficiency bounds from a least-squares fit over the fleet.

    Plants of one fuel are lined up by ascending efficiency; the regressor is
    the cumulative capacity preceding each plant. The envelope is the fitted
    line evaluated at the first and last plant's position. Fuels with a
    single plant fall back to that plant's efficiency for both bounds.
    """
    by_fuel: dict[FuelType, list[PowerPlant]] = {}
    for plant in plants:
        by_fuel.setdefault(plant.fuel, []).append(plant)

    envelope: dict[FuelType, tuple[float, float]] = {}
    for fuel, group in by_fuel.items():
        if len(group) == 1:
            eta = group[0].efficiency
            envelope[fuel] = (eta, eta)
            continue
        group = sorted(group, key=lambda p: p.efficiency)
        caps = np.array([p.capacity_mw for p in group])
        positions = np.concatenate([[0.0], np.cumsum(caps)[:-1]])
        etas = np.array([p.efficiency for p in group])
        slope, intercept = np.polyfit(positions, etas, deg=1)
        lo = float(intercept + slope * positions[0])
        hi = float(intercept + slope * positions[-1])
        if lo > hi:
            lo, hi = hi, lo
        clip = lambda v: min(max(v, 1e-6), 1.0)
        envelope[fuel] = (clip(lo), clip(hi))
    return envelope


def discretize_virtual_plants(
    capacity_by_fuel: Mapping[FuelType, float],
    avg_size_by_fuel: Mapping[FuelType, float],
    envelope: Mapping[FuelType, tuple[float, float]],
) -> list[PowerPlant]:
    """Slice per-fuel capacity into equally sized virtual plants.

    A fuel with capacity C and average unit size s yields n = max(1,
    round(C/s)) plants of C/n MW each. Plant i (0-based) sits at the midpoint
    of its segment on the linear efficiency ramp between the envelope bounds,
    so the fleet's mean efficiency equals the ramp average and total capacity
    is conserved exactly.
    """
    plants: list[PowerPlant] = []
    for fuel in sorted(capacity_by_fuel, key=lambda f: f.value):
        capacity = capacity_by_fuel[fuel]
        if capacity < 0:
            raise MeritOrderError(f"negative capacity for {fuel}")
        if capacity == 0:
            continue
        try:
            size = avg_size_by_fuel[fuel]
        except KeyError:
            raise MeritOrderError(f"no average plant size for {fuel}") from None
        try:
            eta_min, eta_max = envelope[fuel]
        except KeyError:
            raise MeritOrderError(f"no efficiency envelope for {fuel}") from None
        if size <= 0:
            raise MeritOrderError(f"average plant size for {fuel} must be > 0")
        n = max(1, math.floor(capacity / size + 0.5))
        block_capacity = capacity / n
        for i in range(n):
            eta = eta_min + ((i + 0.5) / n) * (eta_max - eta_min)
            plants.append(
                PowerPlant(
                    plant_id=f"virt_{fuel.value}_{i:04d}",
                    fuel=fuel,
                    capacity_mw=block_capacity,
                    efficiency=eta,
                )
            )
    return plants


def build_merit_order_pwl(
    capacity_by_fuel: Mapping[FuelType, float],
    config: ScenarioConfig,
    provenance: str = "",
) -> MeritOrder:
    """Merit order from installed capacities via virtual plants.

    Gas capacity is split into combined- and open-cycle parts first; fuels
    without cost/emission parameters never become blocks.
    """
    caps = {
        fuel: float(mw)
        for fuel, mw in capacity_by_fuel.items()
        if fuel in MERIT_ORDER_FUELS and mw
    }
    if FuelType.GAS in caps:
        cc, oc = split_gas_capacity(caps.pop(FuelType.GAS), config.gas_cc_share)
        if cc:
            caps[FuelType.GAS_CC] = caps.get(FuelType.GAS_CC, 0.0) + cc
        if oc:
            caps[FuelType.GAS] = oc
    if not caps or not any(caps.values()):
        raise MeritOrderError("no dispatchable capacity to build a merit order from")

    virtual = discretize_virtual_plants(caps, config.avg_plant_size_mw, config.efficiency_envelope)
    blocks = [_block_from_plant(p, config.fuel_params, config.carbon_price) for p in virtual]
    method = "pwl" if config.method != "pwlv" else "pwlv"
    return MeritOrder(blocks, method=method, provenance=provenance)


def capacities_from_plants(plants: Iterable[PowerPlant]) -> dict[FuelType, float]:
    """Aggregate a plant list into installed capacity per fuel."""
    caps: dict[FuelType, float] = {}
    for plant in plants:
        caps[plant.fuel] = caps.get(plant.fuel, 0.0) + plant.capacity_mw
    return caps


def build_merit_order(
    config: ScenarioConfig,
    plants: Sequence[PowerPlant] | None = None,
    capacity_by_fuel: Mapping[FuelType, float] | None = None,
    carbon_price: float | None = None,
) -> MeritOrder:
    """Build the stack for a scenario, choosing the route from its method."""
    if carbon_price is not None:
        from dataclasses import replace

        config = replace(config, carbon_price=carbon_price)
    if config.method == "pp":
        if plants is None:
            raise MeritOrderError("pp method requires a plant list")
        active = [p for p in plants if p.is_active(config.year)]
        return build_merit_order_pp(active, config.fuel_params, config.carbon_price, provenance=config.tag())
    if config.method == "pwlv":
        if plants is None:
            raise MeritOrderError("pwlv requires plant-list capacities")
        active = [p for p in plants if p.is_active(config.year)]
        return build_merit_order_pwl(capacities_from_plants(active), config, provenance=config.tag())
    if capacity_by_fuel is None:
        raise MeritOrderError("pwl method requires installed capacities")
    return build_merit_order_pwl(capacity_by_fuel, config, provenance=config.tag())
