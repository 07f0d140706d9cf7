"""Canonical fuel-type taxonomy shared by all pipeline stages."""

from __future__ import annotations

import enum


class FuelType(enum.Enum):
    """Fuel/technology labels after source-data normalization.

    ``GAS_CC`` (combined-cycle gas) is listed as its own member even though
    it burns the same fuel as ``GAS``: the efficiency gap between open- and
    combined-cycle turbines is large enough that they occupy very different
    positions in the dispatch stack.
    """

    BIOMASS = "biomass"
    LIGNITE = "lignite"
    OIL = "oil"
    GAS = "gas"
    GAS_CC = "gas_cc"
    COAL = "coal"
    NUCLEAR = "nuclear"
    HYDRO = "hydro"
    PUMPED_HYDRO = "pumped_hydro"
    SOLAR = "solar"
    WIND_ONSHORE = "wind_onshore"
    WIND_OFFSHORE = "wind_offshore"
    OTHER_CONV = "other_conv"
    OTHER_RES = "other_res"

    def __str__(self) -> str:
        return self.value

    @property
    def is_conventional(self) -> bool:
        return self in CONVENTIONAL_FUELS


#: Dispatchable generation; drives the residual load.
CONVENTIONAL_FUELS = frozenset(
    {
        FuelType.BIOMASS,
        FuelType.LIGNITE,
        FuelType.OIL,
        FuelType.GAS,
        FuelType.GAS_CC,
        FuelType.COAL,
        FuelType.NUCLEAR,
        FuelType.PUMPED_HYDRO,
        FuelType.OTHER_CONV,
    }
)

#: Variable/renewable generation; covered demand that never reaches the stack.
RENEWABLE_FUELS = frozenset(
    {
        FuelType.HYDRO,
        FuelType.SOLAR,
        FuelType.WIND_ONSHORE,
        FuelType.WIND_OFFSHORE,
        FuelType.OTHER_RES,
    }
)

#: Fuels with cost/emission parameters, i.e. the ones that can form dispatch
#: blocks. Everything else is either renewable or lacks a marginal-cost model.
MERIT_ORDER_FUELS = frozenset(
    {
        FuelType.NUCLEAR,
        FuelType.LIGNITE,
        FuelType.COAL,
        FuelType.GAS,
        FuelType.GAS_CC,
        FuelType.OIL,
    }
)

#: Conventional fuels whose generation counts toward the residual load.
#: ``other_conv`` is excluded on purpose: it has no cost/emission parameters,
#: so demand attributed to it could never be matched by a dispatch block.
RESIDUAL_LOAD_FUELS = frozenset(CONVENTIONAL_FUELS - {FuelType.OTHER_CONV})


def parse_fuel(label: str) -> FuelType:
    """Look up a canonical fuel name, raising ``ValueError`` with context."""
    try:
        return FuelType(label)
    except ValueError:
        known = ", ".join(sorted(f.value for f in FuelType))
        raise ValueError(f"unknown fuel type {label!r} (known: {known})") from None
