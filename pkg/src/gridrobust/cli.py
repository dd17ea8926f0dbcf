"""Command-line entry point: ``gridrobust {aggregate,sweep,synth}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from gridrobust import __version__
from gridrobust.aggregation import aggregate
from gridrobust.errors import GridRobustError
from gridrobust.grid_model import AggregationSpec
from gridrobust.io import (
    config_for_panel,
    ensure_dir,
    file_sha256,
    load_config,
    panel_period_column,
    read_panel,
    write_config,
    write_panel,
    write_results,
)
from gridrobust.report import PlotMode, PlotSpec, Tail, render_scatter, summarize, write_summary, write_svg
from gridrobust.sampling import SubsamplePlan
from gridrobust.sweep import SweepConfig, run_sweep
from gridrobust.synth import SCENARIOS, map_to_panel, planted_effect_panel

log = logging.getLogger("gridrobust")

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2

RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.csv"
PSHADE_FILE = "estimates_pvalue.svg"
SIGNIFICANCE_FILE = "estimates_significance.svg"
MANIFEST_FILE = "manifest.json"

SYNTH_SCENARIOS = sorted(list(SCENARIOS) + ["planted-effect"])


class UsageError(GridRobustError):
    pass


def cmd_aggregate(panel_path, config_path, k, s, out_path) -> int:
    try:
        spec = AggregationSpec(k, s)
    except GridRobustError as exc:
        raise UsageError(f"invalid specification: {exc}") from None
    config = load_config(config_path)
    panel = read_panel(panel_path, config)
    ensure_dir(Path(out_path).parent)
    write_panel(aggregate(panel, spec), out_path, period_column=panel_period_column(panel_path, config))
    log.info("wrote %s (k=%d, s=%d)", out_path, k, s)
    return EXIT_OK


def build_manifest(panel_path, config_path, max_multiplier, keep_rate, n_subsamples, base_seed,
                   alpha, tail, independent_shifts=False) -> dict:
    """Every parameter that determines a sweep's outputs.

    The worker count is deliberately absent: outputs do not depend on it.
    """
    return {
        "tool": "gridrobust",
        "version": __version__,
        "panel": str(panel_path),
        "panel_sha256": file_sha256(panel_path),
        "config": str(config_path),
        "config_sha256": file_sha256(config_path),
        "max_multiplier": max_multiplier,
        "keep_rate": keep_rate,
        "n_subsamples": n_subsamples,
        "base_seed": base_seed,
        "alpha": alpha,
        "tail": Tail(tail).value,
        "independent_shifts": independent_shifts,
    }


def cmd_sweep(panel_path, config_path, max_multiplier=6, keep_rate=0.05, n_subsamples=30, base_seed=0,
              out_dir=".", alpha=0.05, tail="two", jobs=None, independent_shifts=False) -> int:
    try:
        plan = SubsamplePlan(keep_rate, n_subsamples, base_seed)
        plot_args = dict(alpha=alpha, tail=tail)
        PlotSpec(**plot_args)
    except GridRobustError as exc:
        raise UsageError(str(exc)) from None
    role_config = load_config(config_path)
    panel = read_panel(panel_path, role_config)
    sweep_config = SweepConfig(max_multiplier, plan, role_config.model_variables, role_config.treatment,
                               independent_shifts)
    manifest = build_manifest(panel_path, config_path, max_multiplier, keep_rate, n_subsamples, base_seed,
                              alpha, tail, independent_shifts)
    manifest["model_variables"] = list(role_config.model_variables)
    manifest["treatment"] = role_config.treatment

    jobs = jobs or os.cpu_count() or 1
    result = run_sweep(panel, sweep_config, jobs=jobs)

    out = ensure_dir(out_dir)
    write_results(result, out / RESULTS_FILE)
    write_summary(summarize(result, alpha), out / SUMMARY_FILE)
    write_svg(render_scatter(result, PlotSpec(PlotMode.P_SHADE, **plot_args)), out / PSHADE_FILE)
    write_svg(
        render_scatter(result, PlotSpec(PlotMode.SIGNIFICANCE, **plot_args,
                                        title="Treatment estimate by specification: significance")),
        out / SIGNIFICANCE_FILE,
    )
    with open(out / MANIFEST_FILE, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    failed = sum(not r.ok for r in result)
    log.info("sweep wrote %d rows (%d failed fits) to %s", len(result), failed, out)
    return EXIT_OK


def cmd_sweep_from_manifest(manifest_path, out_dir, jobs=None) -> int:
    """Re-run a sweep with the parameters recorded in ``manifest_path``."""
    with open(manifest_path, encoding="utf-8") as fh:
        m = json.load(fh)
    for key in ("panel", "config"):
        digest = file_sha256(m[key])
        if digest != m[f"{key}_sha256"]:
            log.warning("%s %s has changed since the manifest was written", key, m[key])
    return cmd_sweep(
        m["panel"], m["config"], m["max_multiplier"], m["keep_rate"], m["n_subsamples"], m["base_seed"],
        out_dir, m["alpha"], m["tail"], jobs, m.get("independent_shifts", False),
    )


def cmd_synth(scenario_name, out_path, seed=0) -> int:
    """Write a synthetic panel plus its role config (same stem, ``.json``)."""
    if scenario_name == "planted-effect":
        panel = planted_effect_panel(seed=seed)
    elif scenario_name in SCENARIOS:
        panel = map_to_panel(SCENARIOS[scenario_name])
    else:
        raise UsageError(f"unknown scenario {scenario_name!r}; available: {', '.join(SYNTH_SCENARIOS)}")
    out_path = Path(out_path)
    ensure_dir(out_path.parent)
    write_panel(panel, out_path)
    model = [panel.treatment.name] + [
        v.name for v in panel.variables if v.name not in (panel.outcome.name, panel.treatment.name, "y_true")
    ]
    write_config(config_for_panel(panel, model), config_path_for(out_path))
    log.info("wrote %s and %s", out_path, config_path_for(out_path))
    return EXIT_OK


def config_path_for(panel_path) -> Path:
    panel_path = Path(panel_path)
    return panel_path.with_name(panel_path.stem + ".json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridrobust",
        description="Grid-cell robustness test: aggregate, shift, subsample and re-fit.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("aggregate", help="aggregate a panel for one (multiplier, shift)")
    p.add_argument("--panel", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--multiplier", "-k", type=int, required=True)
    p.add_argument("--shift", "-s", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="run the full robustness sweep")
    p.add_argument("--panel")
    p.add_argument("--config")
    p.add_argument("--manifest", help="re-run with the parameters of an earlier manifest.json")
    p.add_argument("--max-multiplier", type=int, default=6)
    p.add_argument("--keep-rate", type=float, default=0.05)
    p.add_argument("--subsamples", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--tail", choices=["one", "two"], default="two")
    p.add_argument("--independent-shifts", action="store_true",
                   help="shift rows and columns independently (k*k partitions per multiplier)")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="write a synthetic demonstration panel")
    p.add_argument("--scenario", required=True, help=f"one of: {', '.join(SYNTH_SCENARIOS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "aggregate":
            return cmd_aggregate(args.panel, args.config, args.multiplier, args.shift, args.out)
        if args.command == "sweep":
            if args.manifest:
                return cmd_sweep_from_manifest(args.manifest, args.out, args.jobs)
            if not (args.panel and args.config):
                raise UsageError("sweep needs --panel and --config (or --manifest)")
            if args.jobs is not None and args.jobs < 1:
                raise UsageError("--jobs must be >= 1")
            return cmd_sweep(args.panel, args.config, args.max_multiplier, args.keep_rate, args.subsamples,
                             args.seed, args.out, args.alpha, args.tail, args.jobs, args.independent_shifts)
        if args.command == "synth":
            return cmd_synth(args.scenario, args.out, args.seed)
    except UsageError as exc:
        print(f"gridrobust: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GridRobustError, OSError, ValueError, KeyError) as exc:
        print(f"gridrobust: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
