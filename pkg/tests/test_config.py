import pytest

from meritcef import ConfigBundle, ConfigError, FuelParams, FuelType, PowerPlant, ScenarioConfig
from meritcef import cli

from conftest import simple_params


def test_default_tables_carry_the_reference_parameters(bundle):
    params = bundle.fuel_params(2019, "DE")
    assert params.emission_intensity[FuelType.NUCLEAR] == 0.0
    assert params.emission_intensity[FuelType.LIGNITE] == 0.36
    assert params.fuel_price[FuelType.COAL] == 14.58
    assert bundle.carbon_price(2019) == 24.9
    assert bundle.carbon_price(2017) == 5.8
    assert bundle.transmission_efficiency("DE") == 0.961
    assert bundle.gas_cc_share("DE") == 0.5352
    assert bundle.gas_cc_share("RS") == 0.0


def test_twenty_countries_configured(bundle):
    countries = [
        "AT", "BE", "CZ", "DE", "DK", "ES", "FI", "FR", "GB", "GR",
        "HU", "IE", "IT", "LT", "NL", "PL", "PT", "RO", "RS", "SI",
    ]
    for cc in countries:
        assert 0.0 < bundle.transmission_efficiency(cc) <= 1.0
        assert 0.0 <= bundle.gas_cc_share(cc) <= 1.0


def test_unknown_year_or_country_raises(bundle):
    with pytest.raises(ConfigError, match="carbon price"):
        bundle.carbon_price(1999)
    with pytest.raises(ConfigError, match="transmission"):
        bundle.transmission_efficiency("ZZ")


def test_missing_year_falls_back_to_default_price_table(bundle):
    params = bundle.fuel_params(2018)
    assert params.fuel_price[FuelType.COAL] == 14.58


def test_user_config_overlays_defaults(tmp_path):
    overlay = tmp_path / "local.toml"
    overlay.write_text(
        """
[carbon_price_eur_per_t]
2019 = 50.0

[transmission_efficiency]
ZZ = 0.9
"""
    )
    bundle = ConfigBundle.load(overlay)
    assert bundle.carbon_price(2019) == 50.0
    assert bundle.carbon_price(2018) == 16.0  # untouched default
    assert bundle.transmission_efficiency("ZZ") == 0.9
    assert bundle.transmission_efficiency("DE") == 0.961


def test_config_digest_changes_with_content(tmp_path):
    overlay = tmp_path / "local.toml"
    overlay.write_text("[carbon_price_eur_per_t]\n2019 = 50.0\n")
    assert ConfigBundle.load(overlay).digest != ConfigBundle.default().digest


def test_scenario_assembly(bundle):
    config = bundle.scenario("DE", 2019, "PWL")
    assert config.method == "pwl"
    assert config.carbon_price == 24.9
    assert config.transmission_efficiency == 0.961
    assert config.efficiency_envelope[FuelType.GAS_CC] == (0.40, 0.60)
    assert config.avg_plant_size_mw[FuelType.NUCLEAR] == 1000.0


def test_scenario_validation():
    params = simple_params()
    with pytest.raises(ConfigError, match="transmission"):
        ScenarioConfig("DE", 2019, "pp", 24.9, 1.5, params)
    with pytest.raises(ConfigError, match="gas_cc share"):
        ScenarioConfig("DE", 2019, "pp", 24.9, 0.9, params, gas_cc_share=2.0)
    with pytest.raises(ConfigError, match="time-step"):
        ScenarioConfig("DE", 2019, "pp", 24.9, 0.9, params, dt_hours=0.0)
    with pytest.raises(ConfigError, match="method"):
        ScenarioConfig("DE", 2019, "nope", 24.9, 0.9, params)
    with pytest.raises(ConfigError, match="envelope"):
        ScenarioConfig(
            "DE", 2019, "pp", 24.9, 0.9, params,
            efficiency_envelope={FuelType.COAL: (0.5, 0.4)},
        )


def test_fuel_params_reject_negative_values():
    with pytest.raises(ConfigError):
        FuelParams(emission_intensity={FuelType.COAL: -0.1}, fuel_price={})
    with pytest.raises(ConfigError):
        FuelParams(emission_intensity={}, fuel_price={FuelType.COAL: -1.0})


def test_plant_validation():
    with pytest.raises(ValueError, match="capacity"):
        PowerPlant("x", FuelType.COAL, 0.0, 0.4)
    with pytest.raises(ValueError, match="efficiency"):
        PowerPlant("x", FuelType.COAL, 10.0, 1.2)


def test_config_path_env_var_override(monkeypatch, tmp_path):
    overlay = tmp_path / "env.toml"
    overlay.write_text("[carbon_price_eur_per_t]\n2019 = 77.0\n")
    monkeypatch.setenv("MERITCEF_CONFIG", str(overlay))
    args = cli.build_parser().parse_args(["compute"])
    assert args.config == str(overlay)
    assert ConfigBundle.load(args.config).carbon_price(2019) == 77.0
