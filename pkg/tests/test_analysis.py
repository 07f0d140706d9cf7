import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meritcef import (
    FuelType,
    build_merit_order_pp,
    carbon_price_sweep,
    compute_cef_series,
    merit_order_correlation,
    shift_study_vs_carbon_price,
    spearman,
    validation_errors,
)

from conftest import (
    dilemma_system,
    hourly_index,
    make_config,
    make_plant,
    make_series,
    simple_params,
    stack_from_values,
)


# ---------------------------------------------------------------------------
# rank correlation


def test_spearman_perfect_monotone():
    x = np.array([1.0, 2.0, 5.0, 9.0])
    assert spearman(x, np.exp(x)).r == pytest.approx(1.0)


def test_spearman_reversed():
    x = np.array([1.0, 2.0, 5.0, 9.0])
    assert spearman(x, -x).r == pytest.approx(-1.0)


def test_spearman_hand_ranked_example():
    # ranks x = (1,2,3,4), ranks y = (2,1,4,3) -> Pearson 0.6
    result = spearman([1, 2, 3, 4], [2, 1, 4, 3])
    assert result.r == pytest.approx(0.6)
    assert result.n == 4


def test_spearman_average_ranks_for_ties():
    # x ranks (1.5, 1.5, 3) vs y ranks (1, 2, 3) -> sqrt(3)/2
    result = spearman([1.0, 1.0, 2.0], [3.0, 5.0, 8.0])
    assert result.r == pytest.approx(math.sqrt(3) / 2)


def test_spearman_constant_vector_undefined():
    result = spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    assert result.r is None
    assert "constant" in result.note


def test_spearman_length_checks():
    with pytest.raises(ValueError):
        spearman([1.0], [2.0])
    with pytest.raises(ValueError):
        spearman([1.0, 2.0], [1.0, 2.0, 3.0])


@given(
    st.lists(st.integers(-10**6, 10**6), min_size=3, max_size=40, unique=True),
    st.floats(0.1, 100.0),
    st.floats(-50.0, 50.0),
)
@settings(max_examples=60)
def test_spearman_invariant_under_increasing_transforms(x, a, b):
    # Integer inputs keep a*x+b collision-free, so ranks are untouched.
    rng = np.random.default_rng(len(x))
    y = rng.normal(size=len(x))
    base = spearman(x, y).r
    transformed = spearman([a * v + b for v in x], y).r
    assert transformed == pytest.approx(base, abs=1e-12)


# ---------------------------------------------------------------------------
# correlation along the stack


def test_stack_correlation_aligned_is_one():
    mo = stack_from_values([10.0, 20.0, 30.0], [0.1, 0.5, 0.9], [50.0, 50.0, 50.0])
    assert merit_order_correlation(mo).r == pytest.approx(1.0)


def test_stack_correlation_cheap_dirty_is_minus_one():
    mo = stack_from_values([10.0, 30.0], [0.9, 0.2], [100.0, 100.0])
    assert merit_order_correlation(mo).r == pytest.approx(-1.0)


def test_stack_correlation_single_block_undefined():
    mo = stack_from_values([10.0], [0.5], [100.0])
    assert merit_order_correlation(mo).r is None


def test_stack_correlation_weighs_capacity_not_block_count():
    # One huge clean-cheap block vs many small dirty-expensive ones: the
    # element view must see mostly the big block.
    mo = stack_from_values(
        [10.0] + [30.0] * 5, [0.1] + [0.9] * 5, [1000.0] + [10.0] * 5
    )
    result = merit_order_correlation(mo, element_mw=10.0)
    assert result.n == 105  # 1050 MW in 10 MW elements
    per_plant = merit_order_correlation(mo, per_plant=True)
    assert per_plant.n == 6


# ---------------------------------------------------------------------------
# carbon price sweep


def coal_vs_cc_builder():
    params = simple_params()
    plants = [
        make_plant("coal", FuelType.COAL, 100.0, 0.4),
        make_plant("cc", FuelType.GAS_CC, 100.0, 0.6),
    ]
    return lambda cghg: build_merit_order_pp(plants, params, cghg)


def analytic_crossing(eta_a=0.4, eta_b=0.6):
    # price equality: (x_a + e_a c)/eta_a == (x_b + e_b c)/eta_b
    params = simple_params()
    x_a, e_a = params.fuel_price[FuelType.COAL], params.emission_intensity[FuelType.COAL]
    x_b, e_b = params.fuel_price[FuelType.GAS_CC], params.emission_intensity[FuelType.GAS_CC]
    return (eta_b * x_a - eta_a * x_b) / (eta_a * e_b - eta_b * e_a)


def test_sweep_finds_the_analytic_reordering_price():
    c_star = analytic_crossing()
    assert c_star == pytest.approx(16.2692, abs=1e-4)  # hand: 1.692 / 0.104
    curve = carbon_price_sweep(coal_vs_cc_builder(), grid=[0.0, 5.0, 10.0, 15.0, 20.0, 25.0])
    assert curve.zero_crossing == pytest.approx(c_star, abs=0.02)
    assert curve.r_values[0] == pytest.approx(-1.0)
    assert curve.r_values[-1] == pytest.approx(1.0)


def test_sweep_without_crossing_reports_none():
    curve = carbon_price_sweep(coal_vs_cc_builder(), grid=[20.0, 30.0, 40.0])
    assert curve.zero_crossing is None
    assert all(r == pytest.approx(1.0) for r in curve.r_values)


def test_sweep_grid_must_be_increasing_and_non_empty():
    with pytest.raises(ValueError):
        carbon_price_sweep(coal_vs_cc_builder(), grid=[])
    with pytest.raises(ValueError):
        carbon_price_sweep(coal_vs_cc_builder(), grid=[10.0, 10.0])


def test_sweep_to_frame():
    curve = carbon_price_sweep(coal_vs_cc_builder(), grid=[0.0, 30.0])
    frame = curve.to_frame()
    assert list(frame.columns) == ["c_ghg_eur_t", "r"]
    assert len(frame) == 2


# ---------------------------------------------------------------------------
# shift studies across carbon prices


def test_shift_effect_changes_sign_along_the_carbon_axis():
    mo, gen, config, _ = dilemma_system(days=6)
    params = simple_params()
    plants = [
        make_plant("coal", FuelType.COAL, 100.0, 0.5),
        make_plant("cc", FuelType.GAS_CC, 100.0, 0.55),
    ]

    def builder(cghg):
        return build_merit_order_pp(plants, params, cghg)

    rows = shift_study_vs_carbon_price(builder, gen, config, grid=[0.0, 200.0])
    assert rows[0]["dme_pct"] > 0.0
    assert rows[-1]["dme_pct"] < 0.0
    assert rows[0]["c_ghg_eur_t"] == 0.0


def test_emission_sorted_stack_makes_price_and_marginal_drivers_agree():
    from meritcef import run_shift_study

    _, gen, config, _ = dilemma_system(days=4)
    params = simple_params()
    plants = [
        make_plant("coal", FuelType.COAL, 100.0, 0.5),
        make_plant("cc", FuelType.GAS_CC, 100.0, 0.55),
    ]
    mo = build_merit_order_pp(plants, params, 200.0)  # emission-aligned order
    intensities = [b.emission_intensity for b in mo.blocks]
    assert intensities == sorted(intensities)

    from dataclasses import replace

    cef = compute_cef_series(mo, gen, replace(config, carbon_price=200.0))
    by_price = run_shift_study(cef, "price")
    by_mef = run_shift_study(cef, "mef")
    assert [(e.source_time, e.sink_time) for e in by_price.events] == [
        (e.source_time, e.sink_time) for e in by_mef.events
    ]


# ---------------------------------------------------------------------------
# method comparison errors


def reference_case(days=3):
    rng = np.random.default_rng(21)
    mo = stack_from_values(
        np.sort(rng.uniform(10, 90, 6)), rng.uniform(0.1, 1.0, 6), rng.uniform(30, 300, 6)
    )
    idx = hourly_index(2019, days=days)
    resid = rng.uniform(0.1, mo.total_capacity_mw, len(idx))
    frame = pd.DataFrame(
        {FuelType.COAL: resid, FuelType.WIND_ONSHORE: rng.uniform(1, 50, len(idx))}, index=idx
    )
    cef = compute_cef_series(mo, make_series(frame), make_config())
    return mo, cef


def test_validation_errors_reflexive():
    mo, cef = reference_case()
    report = validation_errors(mo, cef, mo, cef)
    assert report.mo_cost_pct == 0.0
    assert report.mo_emission_pct == 0.0
    assert report.price_pct == 0.0
    assert report.mef_pct == 0.0
    assert report.xef_pct == 0.0
    assert report.annual_price_pct == 0.0
    assert report.annual_mef_pct == 0.0
    assert report.annual_xef_pct == 0.0


def test_uniform_one_percent_perturbation():
    mo, cef = reference_case()
    cand_mo = stack_from_values(
        mo.marginal_cost * 1.01, mo.emission_intensity * 1.01, mo.capacity_mw
    )
    cand_cef_frame = cef.frame.copy()
    for col in ("marginal_cost_eur_mwh", "mef_t_per_mwh", "xef_t_per_mwh"):
        cand_cef_frame[col] = cand_cef_frame[col] * 1.01
    from meritcef.dispatch import CefSeries

    cand_cef = CefSeries(frame=cand_cef_frame)
    report = validation_errors(mo, cef, cand_mo, cand_cef)
    for value in (
        report.mo_cost_pct,
        report.mo_emission_pct,
        report.price_pct,
        report.mef_pct,
        report.xef_pct,
        report.annual_price_pct,
        report.annual_mef_pct,
        report.annual_xef_pct,
    ):
        assert value == pytest.approx(1.0, abs=1e-3)


def test_stack_errors_ignore_block_granularity():
    # Two 50 MW blocks with identical attributes describe the same supply
    # curve as one 100 MW block; the element comparison must see no error.
    ref = stack_from_values([20.0, 30.0], [0.6, 0.3], [100.0, 100.0])
    cand = stack_from_values(
        [20.0, 20.0, 30.0, 30.0], [0.6, 0.6, 0.3, 0.3], [50.0, 50.0, 50.0, 50.0]
    )
    _, cef = reference_case()
    report = validation_errors(ref, cef, cand, cef)
    assert report.mo_cost_pct == 0.0
    assert report.mo_emission_pct == 0.0


def test_zero_reference_points_are_excluded_and_counted():
    ref = stack_from_values([10.0, 20.0], [0.0, 0.5], [100.0, 100.0])
    cand = stack_from_values([10.0, 20.0], [0.1, 0.5], [100.0, 100.0])
    _, cef = reference_case()
    report = validation_errors(ref, cef, cand, cef)
    assert report.excluded["mo_emission"] == 10  # the zero-intensity block's elements
    assert report.mo_emission_pct == 0.0


def test_report_rows_for_export():
    mo, cef = reference_case()
    rows = validation_errors(mo, cef, mo, cef).as_rows(2019)
    assert {r["error_name"] for r in rows} == {
        "mo_cost",
        "mo_emission",
        "price",
        "mef",
        "xef",
        "annual_price",
        "annual_mef",
        "annual_xef",
    }
    assert all(r["year"] == 2019 for r in rows)
