"""Command-line front end: ``gen-corpus``, ``synth``, ``validate``, ``scenario``.

Every command accepts ``--config FILE.json``; its keys use the option names
with dashes turned into underscores and act as defaults, so explicit flags
win.  Output files are written atomically.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .aggregation import AggregationConfig, synthesize_system
from .composition import bus_compositions, dominant_type, dominant_type_census
from .desk import DEFAULT_REGIONS, generate_desk_buses, generate_desk_corpus, generate_desk_solar
from .ingest import (
    BUSES,
    SOLAR,
    IngestError,
    format_bus_table,
    format_series_csv,
    parse_bus_table,
    parse_series_csv,
    read_corpus,
    write_corpus,
    write_text_atomic,
)
from .scenario import (
    DuckCurveConfig,
    SolarResourceRecord,
    apply_duck_curve,
    format_allocation_csv,
    format_solar_csv,
    format_system_csv,
    parse_solar_csv,
)
from .types import CompositionRatio
from .validation import (
    DEFAULT_BIN_WIDTH,
    DEFAULT_MAX_LAG,
    METRICS,
    default_bands,
    format_metric_csv,
    parse_band_csv,
    validate,
)

log = logging.getLogger("synthload")


class UsageError(Exception):
    pass


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc.strerror}") from None


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


# ---------------------------------------------------------------------------
# commands


def cmd_gen_corpus(args: argparse.Namespace) -> None:
    _require(args, "out")
    if args.locations < 1:
        raise UsageError("--locations must be >= 1")
    if args.buses < 1:
        raise UsageError("--buses must be >= 1")
    regions = [r.strip() for r in args.regions.split(",") if r.strip()]
    out = Path(args.out)
    corpus = generate_desk_corpus(
        args.seed,
        args.locations,
        regions,
        feeders_per_region=args.feeders_per_region,
        n_facilities=args.facilities,
    )
    write_corpus(out, corpus)
    buses = generate_desk_buses(args.seed, args.buses, args.total_peak_mw)
    write_text_atomic(out / BUSES, format_bus_table(buses))
    solar = [SolarResourceRecord(loc, v) for loc, v in generate_desk_solar(args.seed)]
    write_text_atomic(out / SOLAR, format_solar_csv(solar))
    log.info("wrote %d profiles, %d buses to %s", len(corpus.profiles), len(buses), out)


def cmd_synth(args: argparse.Namespace) -> None:
    _require(args, "corpus", "out")
    corpus_dir = Path(args.corpus)
    buses = parse_bus_table(_read(args.buses or corpus_dir / BUSES))
    corpus = read_corpus(corpus_dir)
    config = AggregationConfig(noise_sigma_frac=args.noise_sigma, master_seed=args.seed)

    assigned = bus_compositions(buses, corpus.utilities)
    ratios = {bid: r for bid, (_, r) in assigned.items()}
    t0 = time.perf_counter()
    results = synthesize_system(buses, ratios, corpus, config, workers=args.workers)
    log.info("synthesized %d buses in %.1f s", len(results), time.perf_counter() - t0)

    by_id = {b.bus_id: b for b in buses}
    series = {r.bus_id: r.series for r in results}
    pfs = {bid: b.power_factor for bid, b in by_id.items()} if args.reactive else None
    meta = {
        "seed": args.seed,
        "noise_sigma_frac": config.noise_sigma_frac,
        "sigma_shift": dict(config.sigma_shift),
        "permutation_pairs": dict(config.permutation_pairs),
        "dominant_type_census": dominant_type_census(ratios.values()),
        "buses": [
            {
                "bus_id": r.bus_id,
                "peak_mw": by_id[r.bus_id].peak_mw,
                "utility_id": assigned[r.bus_id][0],
                "composition": dict(zip(("residential", "commercial", "industrial"),
                                        ratios[r.bus_id].as_tuple())),
                "dominant_type": dominant_type(ratios[r.bus_id]).value,
                "iterations": dict(zip(("residential", "commercial", "industrial"), r.iterations)),
                "reference_load_factor": r.reference_load_factor,
                "lf_constant_mw": r.lf_constant,
                "lf_constant_clamped": r.clamped,
                "final_scale": r.final_scale,
                "load_factor": r.series.mean() / r.series.max(),
            }
            for r in results
        ],
    }
    out = Path(args.out)
    write_text_atomic(out / "series.csv", format_series_csv(series, pfs))
    write_text_atomic(out / "metadata.json", json.dumps(meta, indent=1) + "\n")


def cmd_validate(args: argparse.Namespace) -> None:
    _require(args, "series", "out")
    series = parse_series_csv(_read(args.series))
    if args.bands:
        bands = {m: parse_band_csv(_read(Path(args.bands) / f"{m}.csv"), m) for m in METRICS}
    else:
        bands = default_bands()
    report = validate(series, bands, args.bin_width, args.max_lag)
    out = Path(args.out)
    write_text_atomic(out / "report.json", report.to_json())
    for metric, result in report.system.items():
        if result.error is None:
            write_text_atomic(out / f"system_{metric}.csv", format_metric_csv(result))
    for metric, result in report.system.items():
        if result.check is not None:
            log.info("system %s: pass fraction %.3f", metric, result.check.pass_fraction)


def _ratios_from_metadata(text: str) -> dict[int, CompositionRatio]:
    try:
        meta = json.loads(text)
        return {
            int(b["bus_id"]): CompositionRatio(
                b["composition"]["residential"],
                b["composition"]["commercial"],
                b["composition"]["industrial"],
            )
            for b in meta["buses"]
        }
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise IngestError(f"synthesis metadata: malformed ({exc})") from None


def cmd_scenario(args: argparse.Namespace) -> None:
    _require(args, "series", "buses", "metadata", "solar", "out")
    config = DuckCurveConfig(
        system_btm_capacity_mw=args.system_btm_capacity_mw,
        x1=args.x1,
        x2=1.0 - args.x1 if args.x2 is None else args.x2,
        day_index=args.day_index,
        seed=args.seed,
    )
    series = parse_series_csv(_read(args.series))
    buses = parse_bus_table(_read(args.buses))
    ratios = _ratios_from_metadata(_read(args.metadata))
    solar = parse_solar_csv(_read(args.solar))
    result = apply_duck_curve(series, buses, ratios, solar, config)

    out = Path(args.out)
    write_text_atomic(out / "allocation.csv", format_allocation_csv(result.capacities))
    write_text_atomic(out / "net_load.csv", format_series_csv(result.net))
    write_text_atomic(out / "benchmark_day.csv", format_series_csv(result.benchmark))
    write_text_atomic(
        out / "btm_solar.csv", format_series_csv({b: p.values for b, p in result.profiles.items()})
    )
    write_text_atomic(out / "system.csv", format_system_csv(result.system_benchmark, result.system_net))
    anchors = {
        str(b): {"start": p.start, "peak": p.peak, "end": p.end}
        for b, p in sorted(result.profiles.items())
    }
    write_text_atomic(
        out / "scenario.json",
        json.dumps({"config": json.loads(config.to_json()), "anchors": anchors}, indent=1) + "\n",
    )


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthload", description="Synthetic bus-level hourly load time series."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file of option defaults")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("gen-corpus", help="write a deterministic desk-scale input corpus")
    common(p)
    p.add_argument("--locations", type=int, default=12, help="prototype building locations")
    p.add_argument("--regions", default=",".join(DEFAULT_REGIONS), help="comma-separated region tags")
    p.add_argument("--feeders-per-region", type=int, default=60)
    p.add_argument("--facilities", type=int, default=60, help="industrial facility records")
    p.add_argument("--buses", type=int, default=50, help="buses in the generated bus table")
    p.add_argument("--total-peak-mw", type=float, default=100_000.0)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("synth", help="synthesize bus-level yearly series")
    common(p)
    p.add_argument("--corpus", help="corpus directory (manifest.json, facilities.csv, ...)")
    p.add_argument("--buses", help="bus table CSV (default: <corpus>/buses.csv)")
    p.add_argument("--workers", type=int, default=1, help="parallel bus workers")
    p.add_argument("--noise-sigma", type=float, default=0.02, help="relative white-noise sigma")
    p.add_argument("--reactive", action="store_true",
                   help="add q_mvar at each bus's fixed power factor")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="metric report and plot-ready CSVs")
    common(p)
    p.add_argument("--series", help="long-format series CSV")
    p.add_argument("--bands", help="directory with <metric>.csv band files (default: shipped)")
    p.add_argument("--bin-width", type=float, default=DEFAULT_BIN_WIDTH)
    p.add_argument("--max-lag", type=int, default=DEFAULT_MAX_LAG)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("scenario", help="behind-the-meter solar duck-curve day")
    common(p)
    p.add_argument("--series", help="benchmark long-format series CSV")
    p.add_argument("--buses", help="bus table CSV")
    p.add_argument("--metadata", help="metadata.json from synth (composition ratios)")
    p.add_argument("--solar", help="solar resource CSV lat,lon,avg_output")
    p.add_argument("--capacity-mw", dest="system_btm_capacity_mw", type=float, default=30_000.0)
    p.add_argument("--x1", type=float, default=0.5, help="weight on load size")
    p.add_argument("--x2", type=float, default=None, help="weight on solar resource (default 1 - x1)")
    p.add_argument("--day-index", type=int, default=140, help="day of year, 0 = Jan 1")
    p.set_defaults(func=cmd_scenario)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        overrides = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot load --config {args.config}: {exc}")
    if not isinstance(overrides, dict):
        parser.error("--config must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    unknown = set(overrides) - known
    if unknown:
        parser.error(f"unknown keys in --config: {sorted(unknown)}")
    subparser.set_defaults(**overrides)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _apply_config(parser, argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"synthload {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
