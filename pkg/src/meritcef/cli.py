"""Command-line front end: ingest | compute | shift | sweep | validate.

Wires the pipeline together over a directory convention:

    generation_<CC>_<YYYY>.csv   raw or normalized per-fuel generation
    capacity_<YYYY>.csv          installed capacity matrix (country x fuel)
    plants.csv                   plant list (id, country, fuel, capacity_mw,
                                 efficiency, commissioned, shutdown)
    eua_weekly.csv               weekly allowance prices (date, price_eur_per_t)

Outputs are deterministic: fixed column orders, floats at 6 significant
digits, manifests with content digests. Exit codes: 0 ok, 1 partial
failures, 2 fatal.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import re
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import pandas as pd

from .analysis import carbon_price_sweep, shift_study_vs_carbon_price, validation_errors
from .config import ConfigBundle, ConfigError, METHODS
from .fuels import FuelType
from .dispatch import CefSeries, compute_cef_series
from .ingest import (
    IngestError,
    annual_carbon_price,
    load_plant_list,
    normalize_generation,
    parse_generation_csv,
    read_capacity_csv,
    write_fill_report,
    write_generation_csv,
)
from .loadshift import run_shift_study
from .merit_order import MeritOrderError, build_merit_order

log = logging.getLogger("meritcef")

EXIT_OK, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2

GENERATION_RE = re.compile(r"generation_([A-Z]{2})_(\d{4})\.csv$")

_OPTIMIZED_KEY = {"price": "dc_pct", "xef": "dxe_pct", "mef": "dme_pct"}


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _round6(value):
    if value is None:
        return None
    return float(f"{value:.6g}")


def _write_manifest(out_dir: Path, command: str, payload: dict) -> None:
    payload = {"command": command, **payload}
    path = out_dir / f"manifest_{command}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _parse_scenarios(args, default_method: str = "pwl") -> list[tuple[str, int, str]]:
    scenarios = []
    for spec_str in args.scenario or []:
        parts = spec_str.split(":")
        if len(parts) == 2:
            cc, year = parts
            method = default_method
        elif len(parts) == 3:
            cc, year, method = parts
        else:
            raise ValueError(f"bad scenario {spec_str!r}, expected CC:YYYY[:method]")
        method = method.lower()
        if method not in METHODS:
            raise ValueError(f"bad method {method!r}, expected one of {METHODS}")
        scenarios.append((cc, int(year), method))
    return scenarios


def _discover_generation_files(data_dir: Path) -> list[tuple[str, int, Path]]:
    found = []
    for path in sorted(data_dir.glob("generation_*.csv")):
        match = GENERATION_RE.search(path.name)
        if match:
            found.append((match.group(1), int(match.group(2)), path))
    return found


def _load_normalized(data_dir: Path, country: str, year: int):
    path = data_dir / f"generation_{country}_{year}.csv"
    if not path.exists():
        raise IngestError(f"no normalized generation file for {country} {year} ({path})")
    series = parse_generation_csv(path, country=country, year=year)
    series.require_hourly_gap_free()
    return series, path


def _stack_inputs(data_dir: Path, country: str, year: int, method: str):
    """Fetch whatever the chosen stack construction route needs."""
    plants = None
    capacities = None
    inputs: list[Path] = []
    if method in ("pp", "pwlv"):
        plants_path = data_dir / "plants.csv"
        if not plants_path.exists():
            article = "pp requires a plant list" if method == "pp" else \
                "pwlv requires plant-list capacities"
            raise IngestError(f"{article} ({plants_path} not found)")
        plants, rejected = load_plant_list(plants_path, year=year, country=country)
        if rejected:
            log.warning("%s: %d plant rows rejected", plants_path.name, len(rejected))
        inputs.append(plants_path)
    else:
        cap_path = data_dir / f"capacity_{year}.csv"
        if not cap_path.exists():
            raise IngestError(f"missing capacity file for year {year} ({cap_path})")
        table = read_capacity_csv(cap_path)
        if country not in table:
            raise IngestError(f"capacity file {cap_path} has no row for {country}")
        capacities = table[country]
        inputs.append(cap_path)
    return plants, capacities, inputs


def _resolve_carbon_price(args, bundle: ConfigBundle, data_dir: Path, year: int) -> float | None:
    """Explicit flag wins; otherwise fall back to the weekly price file, then config."""
    if getattr(args, "cghg", None) is not None:
        return float(args.cghg)
    eua = data_dir / "eua_weekly.csv"
    if eua.exists():
        try:
            return annual_carbon_price(eua, year)
        except IngestError:
            pass
    return None  # ConfigBundle.scenario falls back to the configured table


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    data_dir = Path(args.data_dir)
    out_dir = Path(args.out_dir)
    if not data_dir.is_dir():
        log.error("data directory %s does not exist", data_dir)
        return EXIT_FATAL
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = ConfigBundle.load(args.config)

    files = _discover_generation_files(data_dir)
    if args.country:
        files = [f for f in files if f[0] == args.country]
    if args.year:
        files = [f for f in files if f[1] == args.year]
    if not files:
        log.error("no generation files found in %s", data_dir)
        return EXIT_FATAL

    if not args.skip_capacity_check:
        for cc, year, _ in files:
            if not (data_dir / f"capacity_{year}.csv").exists():
                log.error("missing capacity file for %s %d (capacity_%d.csv)", cc, year, year)
                return EXIT_FATAL

    inputs: dict[str, str] = {}
    outputs: dict[str, str] = {}
    results = []
    failures = 0
    for cc, year, path in files:
        inputs[path.name] = _sha256(path)
        try:
            raw = parse_generation_csv(path, country=cc, year=year)
            clean = normalize_generation(raw, bundle.zscore_threshold())
            norm_path = out_dir / f"generation_{cc}_{year}.csv"
            report_path = out_dir / f"fillreport_{cc}_{year}.csv"
            write_generation_csv(clean, norm_path)
            write_fill_report(clean, report_path)
            outputs[norm_path.name] = _sha256(norm_path)
            outputs[report_path.name] = _sha256(report_path)
            results.append(
                {
                    "file": path.name,
                    "status": "ok",
                    "fill_fraction": _round6(clean.fill_fraction),
                    "n_outliers": sum(1 for r in clean.fill_report if r.kind == "outlier"),
                    "skipped_columns": clean.skipped_columns,
                }
            )
        except IngestError as exc:
            log.error("%s: %s", path.name, exc)
            results.append({"file": path.name, "status": "failed", "error": str(exc)})
            failures += 1

    for name in ["plants.csv", "eua_weekly.csv"] + sorted(
        p.name for p in data_dir.glob("capacity_*.csv")
    ):
        src = data_dir / name
        if src.exists():
            shutil.copyfile(src, out_dir / name)
            inputs[name] = _sha256(src)
            outputs[name] = _sha256(out_dir / name)

    _write_manifest(
        out_dir,
        "ingest",
        {
            "config_digest": bundle.digest,
            "inputs": inputs,
            "outputs": outputs,
            "files": results,
        },
    )
    return EXIT_PARTIAL if failures else EXIT_OK


def _compute_one(bundle: ConfigBundle, data_dir: Path, out_dir: Path, args, scenario):
    cc, year, method = scenario
    tag = f"{cc}_{year}_{method}"
    gen, gen_path = _load_normalized(data_dir, cc, year)
    config = bundle.scenario(cc, year, method, _resolve_carbon_price(args, bundle, data_dir, year))
    plants, capacities, stack_inputs = _stack_inputs(data_dir, cc, year, method)
    mo = build_merit_order(config, plants=plants, capacity_by_fuel=capacities)
    cef = compute_cef_series(mo, gen, config)

    # Generation in the catch-all conventional bucket has no cost model and
    # stays outside both the stack and the residual load; a large share makes
    # the scenario's factors questionable, so surface it.
    other_conv_share = 0.0
    if FuelType.OTHER_CONV in gen.frame.columns:
        total = float(gen.frame.to_numpy().sum())
        if total > 0:
            other_conv_share = float(gen.frame[FuelType.OTHER_CONV].sum()) / total
    if other_conv_share > 0.05:
        log.warning(
            "%s: %.1f%% of generation is unparameterized conventional capacity",
            tag,
            100 * other_conv_share,
        )

    cef_path = out_dir / f"cef_{tag}.csv"
    cef.to_csv(cef_path)
    mo_path = out_dir / f"merit_order_{tag}.csv"
    mo.to_frame().to_csv(mo_path, index=False, float_format="%.6g")
    return {
        "tag": tag,
        "status": "ok",
        "inputs": [gen_path] + stack_inputs,
        "outputs": [cef_path, mo_path],
        "warnings": {
            "saturated_hours": cef.n_saturated,
            "invalid_xef_hours": cef.n_invalid_xef,
            "other_conv_share": _round6(other_conv_share),
        },
        "carbon_price_eur_per_t": _round6(config.carbon_price),
    }


def cmd_compute(args) -> int:
    data_dir = Path(args.data_dir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = ConfigBundle.load(args.config)

    scenarios = _parse_scenarios(args, default_method=args.method)
    if not scenarios:
        scenarios = [
            (cc, year, args.method) for cc, year, _ in _discover_generation_files(data_dir)
        ]
    if not scenarios:
        log.error("no scenarios: pass --scenario or point --data-dir at normalized files")
        return EXIT_FATAL

    def run(scenario):
        try:
            return _compute_one(bundle, data_dir, out_dir, args, scenario)
        except (IngestError, MeritOrderError, ConfigError, ValueError) as exc:
            tag = f"{scenario[0]}_{scenario[1]}_{scenario[2]}"
            log.error("%s: %s", tag, exc)
            return {"tag": tag, "status": "failed", "error": str(exc)}

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(run, scenarios))
    results.sort(key=lambda r: r["tag"])

    inputs: dict[str, str] = {}
    outputs: dict[str, str] = {}
    rows = []
    failures = 0
    for res in results:
        if res["status"] == "ok":
            for p in res.pop("inputs"):
                inputs[p.name] = _sha256(p)
            for p in res.pop("outputs"):
                outputs[p.name] = _sha256(p)
        else:
            failures += 1
        rows.append(res)

    _write_manifest(
        out_dir,
        "compute",
        {
            "config_digest": bundle.digest,
            "inputs": inputs,
            "outputs": outputs,
            "scenarios": rows,
        },
    )
    if failures:
        return EXIT_FATAL if failures == len(rows) else EXIT_PARTIAL
    return EXIT_OK


def cmd_shift(args) -> int:
    data_dir = Path(args.data_dir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = ConfigBundle.load(args.config)

    scenarios = _parse_scenarios(args, default_method=args.method)
    if not scenarios:
        found = sorted(data_dir.glob("cef_*.csv"))
        match = re.compile(r"cef_([A-Z]{2})_(\d{4})_(\w+)\.csv$")
        scenarios = [
            (m.group(1), int(m.group(2)), m.group(3))
            for m in (match.search(p.name) for p in found)
            if m
        ]
    if not scenarios:
        log.error("no dispatch results found; run compute first")
        return EXIT_FATAL

    inputs: dict[str, str] = {}
    outputs: dict[str, str] = {}
    rows = []
    failures = 0
    for cc, year, method in scenarios:
        tag = f"{cc}_{year}_{method}"
        cef_path = data_dir / f"cef_{tag}.csv"
        try:
            if not cef_path.exists():
                raise IngestError(f"no dispatch result {cef_path}")
            cef = CefSeries.from_csv(cef_path, country=cc, year=year, method=method)
            report = run_shift_study(cef, args.driver)
            inputs[cef_path.name] = _sha256(cef_path)

            events_path = out_dir / f"shift_events_{tag}_{args.driver}.csv"
            report.events_frame().to_csv(events_path, index=False, float_format="%.6g")
            summary = {k: _round6(v) if isinstance(v, float) else v
                       for k, v in report.summary_dict().items()}
            summary["optimized"] = _OPTIMIZED_KEY[args.driver]
            summary_path = out_dir / f"shift_summary_{tag}_{args.driver}.json"
            summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

            outputs[events_path.name] = _sha256(events_path)
            outputs[summary_path.name] = _sha256(summary_path)
            rows.append({"tag": tag, "status": "ok", **summary})
        except (IngestError, ValueError) as exc:
            log.error("%s: %s", tag, exc)
            rows.append({"tag": tag, "status": "failed", "error": str(exc)})
            failures += 1

    _write_manifest(
        out_dir,
        "shift",
        {
            "config_digest": bundle.digest,
            "driver": args.driver,
            "inputs": inputs,
            "outputs": outputs,
            "scenarios": rows,
        },
    )
    if failures:
        return EXIT_FATAL if failures == len(rows) else EXIT_PARTIAL
    return EXIT_OK


def _parse_grid(spec_str: str) -> list[float]:
    try:
        start, stop, step = (float(v) for v in spec_str.split(":"))
    except ValueError:
        raise ValueError(f"bad grid {spec_str!r}, expected start:stop:step") from None
    if step <= 0 or stop < start:
        raise ValueError(f"bad grid {spec_str!r}: need step > 0 and stop >= start")
    grid = []
    value = start
    while value <= stop + 1e-9:
        grid.append(round(value, 9))
        value += step
    return grid


def cmd_sweep(args) -> int:
    data_dir = Path(args.data_dir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = ConfigBundle.load(args.config)

    scenarios = _parse_scenarios(args, default_method=args.method)
    if len(scenarios) != 1:
        log.error("sweep needs exactly one --scenario CC:YYYY[:method]")
        return EXIT_FATAL
    cc, year, method = scenarios[0]
    tag = f"{cc}_{year}_{method}"
    grid = _parse_grid(args.cghg_grid)

    try:
        gen, gen_path = _load_normalized(data_dir, cc, year)
        config = bundle.scenario(cc, year, method)
        plants, capacities, stack_inputs = _stack_inputs(data_dir, cc, year, method)

        def builder(cghg: float):
            return build_merit_order(
                config, plants=plants, capacity_by_fuel=capacities, carbon_price=cghg
            )

        rows = shift_study_vs_carbon_price(
            builder, gen, config, grid, driver=args.driver, jobs=max(1, args.jobs)
        )
        curve = carbon_price_sweep(builder, grid)
    except (IngestError, MeritOrderError, ConfigError, ValueError) as exc:
        log.error("%s: %s", tag, exc)
        return EXIT_FATAL

    frame = pd.DataFrame(rows, columns=["c_ghg_eur_t", "r", "dc_pct", "dxe_pct", "dme_pct"])
    sweep_path = out_dir / f"sweep_{tag}.csv"
    frame.to_csv(sweep_path, index=False, float_format="%.6g")

    inputs = {p.name: _sha256(p) for p in [gen_path] + stack_inputs}
    _write_manifest(
        out_dir,
        "sweep",
        {
            "config_digest": bundle.digest,
            "driver": args.driver,
            "inputs": inputs,
            "outputs": {sweep_path.name: _sha256(sweep_path)},
            "scenario": tag,
            "zero_crossing_eur_per_t": _round6(curve.zero_crossing),
        },
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    data_dir = Path(args.data_dir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = ConfigBundle.load(args.config)

    scenarios = _parse_scenarios(args, default_method="pp")
    if len(scenarios) != 1:
        log.error("validate needs exactly one --scenario CC:YYYY")
        return EXIT_FATAL
    cc, year, _ = scenarios[0]
    tag = f"{cc}_{year}"

    try:
        gen, gen_path = _load_normalized(data_dir, cc, year)
        carbon_price = _resolve_carbon_price(args, bundle, data_dir, year)
        config_pp = bundle.scenario(cc, year, "pp", carbon_price)
        config_pwlv = bundle.scenario(cc, year, "pwlv", carbon_price)
        plants, _, stack_inputs = _stack_inputs(data_dir, cc, year, "pp")

        mo_ref = build_merit_order(config_pp, plants=plants)
        mo_cand = build_merit_order(config_pwlv, plants=plants)
        cef_ref = compute_cef_series(mo_ref, gen, config_pp)
        cef_cand = compute_cef_series(mo_cand, gen, config_pwlv)
        report = validation_errors(mo_ref, cef_ref, mo_cand, cef_cand)
    except (IngestError, MeritOrderError, ConfigError, ValueError) as exc:
        log.error("%s: %s", tag, exc)
        return EXIT_FATAL

    frame = pd.DataFrame(report.as_rows(year), columns=["error_name", "year", "value_pct"])
    out_path = out_dir / f"validate_{tag}.csv"
    frame.to_csv(out_path, index=False, float_format="%.6g")

    inputs = {p.name: _sha256(p) for p in [gen_path] + stack_inputs}
    _write_manifest(
        out_dir,
        "validate",
        {
            "config_digest": bundle.digest,
            "inputs": inputs,
            "outputs": {out_path.name: _sha256(out_path)},
            "scenario": tag,
            "excluded_points": report.excluded,
        },
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meritcef",
        description="Merit-order dispatch, hourly emission factors, and load-shift studies.",
    )
    parser.add_argument(
        "--config",
        default=os.environ.get("MERITCEF_CONFIG"),
        help="TOML config overlay (default: $MERITCEF_CONFIG or built-in tables)",
    )
    parser.add_argument("--data-dir", default=".", help="input directory")
    parser.add_argument("--out-dir", default="out", help="output directory")
    parser.add_argument("--jobs", type=int, default=1, help="parallel scenarios")
    parser.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="normalize raw generation exports")
    p_ingest.add_argument("--country", help="restrict to one country code")
    p_ingest.add_argument("--year", type=int, help="restrict to one year")
    p_ingest.add_argument(
        "--skip-capacity-check",
        action="store_true",
        help="do not require capacity_<year>.csv for every ingested year",
    )
    p_ingest.set_defaults(func=cmd_ingest)

    p_compute = sub.add_parser("compute", help="build merit orders and dispatch them")
    p_compute.add_argument("--scenario", action="append", help="CC:YYYY[:method], repeatable")
    p_compute.add_argument("--method", default="pwl", choices=list(METHODS))
    p_compute.add_argument("--cghg", type=float, help="carbon price override, EUR/t")
    p_compute.set_defaults(func=cmd_compute)

    p_shift = sub.add_parser("shift", help="daily load-shift study on dispatch results")
    p_shift.add_argument("--driver", required=True, choices=["price", "xef", "mef"])
    p_shift.add_argument("--scenario", action="append", help="CC:YYYY[:method], repeatable")
    p_shift.add_argument("--method", default="pwl", choices=list(METHODS))
    p_shift.set_defaults(func=cmd_shift)

    p_sweep = sub.add_parser("sweep", help="carbon-price sensitivity sweep")
    p_sweep.add_argument("--scenario", action="append", required=True)
    p_sweep.add_argument("--method", default="pwl", choices=list(METHODS))
    p_sweep.add_argument("--driver", default="price", choices=["price", "xef", "mef"])
    p_sweep.add_argument("--cghg-grid", required=True, help="start:stop:step in EUR/t")
    p_sweep.set_defaults(func=cmd_sweep)

    p_validate = sub.add_parser("validate", help="compare plant-list vs. virtual-plant route")
    p_validate.add_argument("--scenario", action="append", required=True, help="CC:YYYY")
    p_validate.add_argument("--cghg", type=float, help="carbon price override, EUR/t")
    p_validate.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
