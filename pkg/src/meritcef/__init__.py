"""Merit-order dispatch reconstruction and hourly carbon emission factors.

Builds national supply stacks from plant lists or installed capacities,
derives hourly marginal/grid-mix emission factors and marginal prices from
per-fuel generation series, simulates daily load shifts under price or
emission incentive signals, and quantifies how carbon prices reshape the
cost-emission ordering of the stack.
"""

from .analysis import (
    CorrelationResult,
    SweepCurve,
    ValidationReport,
    carbon_price_sweep,
    merit_order_correlation,
    shift_study_vs_carbon_price,
    spearman,
    validation_errors,
)
from .config import ConfigBundle, ConfigError, FuelParams, ScenarioConfig
from .dispatch import (
    CefSeries,
    compute_cef_series,
    conv_res_shares,
    dispatched_mw,
    marginal_block,
    mef_at,
    price_at,
    residual_load,
    utilization,
    xef_at,
)
from .fuels import (
    CONVENTIONAL_FUELS,
    MERIT_ORDER_FUELS,
    RENEWABLE_FUELS,
    RESIDUAL_LOAD_FUELS,
    FuelType,
)
from .ingest import (
    DataError,
    FillRecord,
    GenerationSeries,
    IngestError,
    ParseError,
    PowerPlant,
    annual_carbon_price,
    detect_outliers_zscore,
    fill_missing,
    load_plant_list,
    normalize_generation,
    parse_generation_csv,
    read_capacity_csv,
    remove_outliers,
    resample_hourly,
)
from .loadshift import (
    ShiftEvent,
    ShiftReport,
    daily_shift_events,
    evaluate_shifts,
    run_shift_study,
)
from .merit_order import (
    DispatchBlock,
    MeritOrder,
    MeritOrderError,
    build_merit_order,
    build_merit_order_pp,
    build_merit_order_pwl,
    capacities_from_plants,
    discretize_virtual_plants,
    efficiency_envelope_from_regression,
    plant_emission_intensity,
    plant_marginal_cost,
    split_gas_capacity,
)

__version__ = "0.1.0"
