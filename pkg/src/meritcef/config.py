"""Scenario configuration: fuel parameters, country tables, TOML loading."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .fuels import FuelType, MERIT_ORDER_FUELS

METHODS = ("pp", "pwl", "pwlv")


class ConfigError(ValueError):
    """Raised for inconsistent or incomplete scenario configuration."""


@dataclass(frozen=True)
class FuelParams:
    """Per-fuel emission intensity (t CO2eq/MWh fuel) and price (EUR/MWh fuel)."""

    emission_intensity: Mapping[FuelType, float]
    fuel_price: Mapping[FuelType, float]

    def __post_init__(self) -> None:
        for fuel, eps in self.emission_intensity.items():
            if eps < 0:
                raise ConfigError(f"negative emission intensity for {fuel}: {eps}")
        for fuel, price in self.fuel_price.items():
            if price < 0:
                raise ConfigError(f"negative fuel price for {fuel}: {price}")

    def fuels(self) -> frozenset[FuelType]:
        """Fuels that carry both an emission intensity and a price."""
        return frozenset(self.emission_intensity) & frozenset(self.fuel_price)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to build and dispatch one country-year merit order."""

    country: str
    year: int
    method: str
    carbon_price: float  # EUR per t CO2eq
    transmission_efficiency: float  # delivered fraction, 0 < eta <= 1
    fuel_params: FuelParams
    gas_cc_share: float = 0.0
    dt_hours: float = 1.0
    avg_plant_size_mw: Mapping[FuelType, float] = field(default_factory=dict)
    efficiency_envelope: Mapping[FuelType, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0.0 < self.transmission_efficiency <= 1.0:
            raise ConfigError(
                f"transmission efficiency must be in (0, 1], got {self.transmission_efficiency}"
            )
        if not 0.0 <= self.gas_cc_share <= 1.0:
            raise ConfigError(f"gas_cc share must be in [0, 1], got {self.gas_cc_share}")
        if self.dt_hours <= 0.0:
            raise ConfigError(f"time-step width must be positive, got {self.dt_hours}")
        if self.carbon_price < 0.0:
            raise ConfigError(f"carbon price must be >= 0, got {self.carbon_price}")
        for fuel, (lo, hi) in self.efficiency_envelope.items():
            if not 0.0 < lo <= hi <= 1.0:
                raise ConfigError(f"bad efficiency envelope for {fuel}: ({lo}, {hi})")
        for fuel, size in self.avg_plant_size_mw.items():
            if size <= 0.0:
                raise ConfigError(f"average plant size for {fuel} must be > 0, got {size}")

    def tag(self) -> str:
        return f"{self.country}_{self.year}_{self.method}"


def _deep_merge(base: dict, override: Mapping) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _fuel_map(table: Mapping[str, Any]) -> dict[FuelType, float]:
    return {FuelType(name): float(v) for name, v in table.items()}


class ConfigBundle:
    """Merged configuration tables plus scenario resolution logic."""

    def __init__(self, raw: Mapping[str, Any]):
        self.raw = dict(raw)
        canonical = json.dumps(self.raw, sort_keys=True, default=str)
        self.digest = hashlib.sha256(canonical.encode()).hexdigest()[:16]

    @classmethod
    def default(cls) -> "ConfigBundle":
        return cls(_load_default_tables())

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ConfigBundle":
        """Default tables, optionally overlaid with a user TOML file."""
        tables = _load_default_tables()
        if path is not None:
            with open(path, "rb") as fh:
                tables = _deep_merge(tables, tomllib.load(fh))
        return cls(tables)

    # -- table lookups ------------------------------------------------------

    def zscore_threshold(self) -> float:
        return float(self.raw.get("preprocessing", {}).get("zscore_threshold", 12.0))

    def dt_hours(self) -> float:
        return float(self.raw.get("dispatch", {}).get("dt_hours", 1.0))

    def carbon_price(self, year: int) -> float:
        table = self.raw.get("carbon_price_eur_per_t", {})
        try:
            return float(table[str(year)])
        except KeyError:
            raise ConfigError(
                f"no carbon price configured for {year}; pass an explicit value"
            ) from None

    def transmission_efficiency(self, country: str) -> float:
        table = self.raw.get("transmission_efficiency", {})
        try:
            return float(table[country])
        except KeyError:
            raise ConfigError(f"no transmission efficiency configured for {country}") from None

    def gas_cc_share(self, country: str) -> float:
        table = self.raw.get("gas_cc_share", {})
        try:
            return float(table[country])
        except KeyError:
            raise ConfigError(f"no gas_cc share configured for {country}") from None

    def fuel_params(self, year: int, country: str | None = None) -> FuelParams:
        emissions = _fuel_map(self.raw.get("emission_intensity_t_per_mwh", {}))
        price_tables = self.raw.get("fuel_price_eur_per_mwh", {})
        table = price_tables.get(str(year), price_tables.get("default"))
        if table is None:
            raise ConfigError(f"no fuel price table for {year} and no default table")
        prices = _fuel_map(table)
        if country is not None:
            by_country = self.raw.get("gas_price_by_country", {}).get(str(year), {})
            if country in by_country:
                gas_price = float(by_country[country])
                prices[FuelType.GAS] = gas_price
                prices[FuelType.GAS_CC] = gas_price
        return FuelParams(emission_intensity=emissions, fuel_price=prices)

    def efficiency_envelope(self) -> dict[FuelType, tuple[float, float]]:
        table = self.raw.get("efficiency_envelope", {})
        return {FuelType(name): (float(v[0]), float(v[1])) for name, v in table.items()}

    def avg_plant_size_mw(self, country: str | None = None) -> dict[FuelType, float]:
        sizes = _fuel_map(self.raw.get("avg_plant_size_mw", {}))
        if country is not None:
            overrides = self.raw.get("avg_plant_size_mw_by_country", {}).get(country, {})
            sizes.update(_fuel_map(overrides))
        return sizes

    # -- scenario assembly --------------------------------------------------

    def scenario(
        self,
        country: str,
        year: int,
        method: str,
        carbon_price: float | None = None,
    ) -> ScenarioConfig:
        method = method.lower()
        params = self.fuel_params(year, country)
        missing = MERIT_ORDER_FUELS - params.fuels()
        if missing:
            names = ", ".join(sorted(f.value for f in missing))
            raise ConfigError(f"fuel parameters incomplete, missing: {names}")
        return ScenarioConfig(
            country=country,
            year=year,
            method=method,
            carbon_price=self.carbon_price(year) if carbon_price is None else carbon_price,
            transmission_efficiency=self.transmission_efficiency(country),
            fuel_params=params,
            gas_cc_share=self.gas_cc_share(country),
            dt_hours=self.dt_hours(),
            avg_plant_size_mw=self.avg_plant_size_mw(country),
            efficiency_envelope=self.efficiency_envelope(),
        )


def _load_default_tables() -> dict:
    data = resources.files("meritcef.data").joinpath("default_config.toml").read_bytes()
    return tomllib.loads(data.decode())


def load_fuel_rename_table() -> dict[str, FuelType]:
    """Source-data column label -> canonical fuel, shipped as package data."""
    text = resources.files("meritcef.data").joinpath("etp_fuel_names.csv").read_text()
    mapping: dict[str, FuelType] = {}
    for line in text.strip().splitlines()[1:]:
        label, fuel = line.rsplit(",", 1)
        mapping[label] = FuelType(fuel)
    return mapping
