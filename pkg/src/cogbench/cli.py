"""Command-line front end: simulate -> analyze -> report, plus validate.

Exit codes: 0 success, 1 internal/assembly failure, 2 configuration or
scenario-file error, 3 component-plot axis out of range.  With
``--json-errors`` every failure also prints a machine-parseable JSON
diagnostic to stderr.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import AnalysisOptions, analyze_performance, read_eigenvalues, read_loadings, write_analysis
from .config import RunConfig, load_config, with_overrides
from .errors import AssemblyError, ConfigurationError
from .harness import read_performance_csv, run_grid, write_performance_csv
from .policies import PolicyKind
from .radio import enumerate_grid
from .reporting import (
    AxisSelectionError,
    default_axis_triples,
    write_clusters,
    write_components,
    write_scree,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_AXIS = 3


def _parse_policies(text: str) -> tuple[str, ...]:
    names = tuple(p.strip().lower() for p in text.split(",") if p.strip())
    if not names:
        raise ConfigurationError("--policies needs a comma-separated list")
    return names


def _parse_axes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigurationError(f"--axes expects comma-separated integers, got {text!r}") from None


def _resolve_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = dict(
        master_seed=args.seed,
        out_dir=args.out,
    )
    if getattr(args, "policies", None) is not None:
        overrides["policies"] = _parse_policies(args.policies)
    for name, attr in (("slots", "slots"), ("reps", "reps"),
                       ("scenario_file", "scenarios"), ("workers", "workers"),
                       ("retention", "retention"), ("rotate", "rotate"),
                       ("method", "method")):
        if hasattr(args, attr):
            overrides[name] = getattr(args, attr)
    return with_overrides(config, **overrides)


def _manifest(config: RunConfig, n_radios: int, n_scenarios: int,
              wall_time_s: float) -> dict:
    return {
        "seed": config.master_seed,
        "config": config.canonical_dict(),
        "config_hash": config.config_hash(),
        "versions": {
            "cogbench": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "n_radios": n_radios,
        "n_scenarios": n_scenarios,
        "wall_time_s": wall_time_s,
    }


def cmd_simulate(args) -> int:
    config = _resolve_config(args)
    scenario_list = config.load_scenarios()
    C = min(s.n_channels for s in scenario_list)
    if max(config.m_set) > C:
        raise ConfigurationError(
            f"sensor count {max(config.m_set)} exceeds channel count {C}")
    if PolicyKind.PROLA.value in config.policies and max(config.m_set) > C - 1:
        raise ConfigurationError(
            f"prola radios need m <= C-1 = {C - 1}, got m = {max(config.m_set)}")
    specs = enumerate_grid(
        policies=config.policy_kinds(), m_set=config.m_set,
        accuracy_set=config.accuracy_set, hw_delay_set=config.hw_delay_set)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.dry_run:
        manifest = _manifest(config, len(specs), len(scenario_list), 0.0)
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        print(f"dry run: {len(specs)} radios x {len(scenario_list)} scenarios, "
              f"manifest written to {out / 'manifest.json'}")
        return EXIT_OK
    t0 = time.perf_counter()
    pm = run_grid(specs, scenario_list, reps=config.reps,
                  master_seed=config.master_seed, T=config.slots,
                  params=config.policy_params(), workers=config.workers)
    wall = time.perf_counter() - t0
    write_performance_csv(out / "performance.csv", pm)
    manifest = _manifest(config, len(specs), len(scenario_list), wall)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"simulated {len(specs)} radios x {len(scenario_list)} scenarios "
          f"({config.reps} reps) in {wall:.1f}s -> {out / 'performance.csv'}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    config = _resolve_config(args)
    out = Path(config.out_dir)
    perf_path = Path(args.performance) if args.performance else out / "performance.csv"
    if not perf_path.exists():
        raise ConfigurationError(f"performance file not found: {perf_path}")
    pm = read_performance_csv(perf_path)
    options = AnalysisOptions(retention=config.retention, rotate=config.rotate,
                              method=config.method, force_factors=args.force_factors)
    result = analyze_performance(pm, options)
    write_analysis(out, result)
    model = result.model
    print(f"retained {model.retained} factor(s) "
          f"(method={model.method}, rotation={model.rotation}, "
          f"converged={model.converged} in {model.iterations} iteration(s))")
    for i in range(model.retained):
        col = np.abs(model.loadings[:, i])
        top = np.argsort(col)[::-1][:3]
        desc = ", ".join(f"{model.labels[p]}={model.loadings[p, i]:+.3f}" for p in top)
        print(f"  f{i + 1}: {desc}")
    if result.report["dropped_columns"]:
        print(f"  dropped constant columns: {result.report['dropped_columns']}")
    return EXIT_OK


def cmd_report(args) -> int:
    config = _resolve_config(args)
    out = Path(config.out_dir)
    for required in ("performance.csv", "loadings.csv", "eigenvalues.csv"):
        if not (out / required).exists():
            raise ConfigurationError(
                f"{out / required} missing; run simulate/analyze first")
    pm = read_performance_csv(out / "performance.csv")
    labels, loadings, _ = read_loadings(out / "loadings.csv")
    eigenvalues = read_eigenvalues(out / "eigenvalues.csv")
    written = [write_clusters(out, pm), write_scree(out, eigenvalues)]
    retained = loadings.shape[1]
    axes = [tuple(a) for a in args.axes] if args.axes else default_axis_triples(retained)
    if axes:
        written += write_components(out, labels, loadings, axes)
    else:
        print(f"retained factor count {retained} < 2: component plots skipped")
    print("wrote " + ", ".join(str(p) for p in written))
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _resolve_config(args)
    scenario_list = config.load_scenarios()
    print(f"config OK (hash {config.config_hash()[:12]})")
    print(f"scenario file OK: {len(scenario_list)} scenarios, "
          f"channels {sorted({s.n_channels for s in scenario_list})}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogbench",
        description="Cognitive-radio test bench: simulate radios over spectrum "
                    "scenarios, extract latent capability factors, emit plot data.")
    parser.add_argument("--json-errors", action="store_true",
                        help="print failures as JSON diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("simulate", help="run the radio x scenario grid")
    add_common(p)
    p.add_argument("--policies", default=None,
                   help="comma-separated policy subset (e.g. ucb1,exp3,random)")
    p.add_argument("--slots", type=int, default=None, help="slots per run")
    p.add_argument("--reps", type=int, default=None, help="repetitions per cell")
    p.add_argument("--scenarios", default=None, help="scenario JSON file")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel workers (COGBENCH_THREADS caps this)")
    p.add_argument("--dry-run", action="store_true",
                   help="validate and write the manifest without simulating")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="factor-analyze a performance matrix")
    add_common(p)
    p.add_argument("--performance", default=None,
                   help="performance.csv path (default: <out>/performance.csv)")
    p.add_argument("--retention", type=float, default=None,
                   help="eigenvalue retention threshold (default 1.0)")
    p.add_argument("--rotate", choices=("none", "varimax"), default=None)
    p.add_argument("--method", choices=("fa", "pca"), default=None)
    p.add_argument("--force-factors", type=int, default=None,
                   help="fix the retained factor count (confirmatory run)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="emit cluster/scree/component plot data")
    add_common(p)
    p.add_argument("--axes", action="append", type=_parse_axes, default=None,
                   metavar="I,J,K", help="factor axes per component file (repeatable)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("validate", help="check config and scenario file")
    add_common(p)
    p.add_argument("--scenarios", default=None, help="scenario JSON file")
    p.set_defaults(func=cmd_validate)
    return parser


def _emit_error(args, kind: str, detail: str, code: int) -> int:
    print(f"error: {detail}", file=sys.stderr)
    if getattr(args, "json_errors", False):
        print(json.dumps({"error": kind, "detail": detail, "exit_code": code}),
              file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as e:
        return _emit_error(args, "configuration", str(e), EXIT_CONFIG)
    except AxisSelectionError as e:
        return _emit_error(args, "axis-selection", str(e), EXIT_AXIS)
    except AssemblyError as e:
        return _emit_error(args, "assembly", str(e), EXIT_FAILURE)


if __name__ == "__main__":
    sys.exit(main())
