"""Command line front end.

    liftsim run   --preset fig6 --seed 42 --out results/fig6
    liftsim run   --config scenario.cfg --runs 10 --out results/custom
    liftsim sweep --fractions 0.01,0.02,0.05 --attack coordinated ... --out results/sweep

Exit codes: 0 success, 2 configuration error, 3 I/O error. Every run requires
an explicit seed (flag, config file, or preset override); there is no ambient
entropy. Flags override config-file and preset values, and the effective
configuration is echoed to <out>/config.txt.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import metrics
from .engine import run_scenario
from .model import (
    ATTACKS,
    DEFAULT_LIFT_CYCLE,
    ConfigError,
    ScenarioConfig,
    config_to_text,
    load_config,
    validate_config,
)
from .presets import CATALOG

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value scenario file")
    p.add_argument("--preset", choices=sorted(CATALOG), help="named scenario from the catalog")
    p.add_argument("--nodes", type=int)
    p.add_argument("--cache", type=int, help="cache size c")
    p.add_argument("--hubs", type=int, help="target hub count h")
    p.add_argument("--attack", choices=sorted(ATTACKS))
    p.add_argument("--byzantine-fraction", type=float)
    p.add_argument("--lift-cycle", type=int, nargs="?", const=DEFAULT_LIFT_CYCLE,
                   help=f"redistribution cycle; bare flag means {DEFAULT_LIFT_CYCLE}, 0 disables")
    p.add_argument("--cycles", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, help="master seed (required somewhere: flag, config, preset)")
    p.add_argument("--hub-threshold", type=float)
    p.add_argument("--intra-cycle", choices=["current", "snapshot"],
                   help="response semantics sensitivity switch (default current)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--workers", type=int, help="parallel run workers (default: up to 2)")
    p.add_argument("--engine", choices=["fast", "reference"], default="fast")


_FLAG_FIELDS = {
    "nodes": "n_nodes",
    "cache": "cache_size",
    "hubs": "hubs",
    "attack": "attack",
    "byzantine_fraction": "byzantine_fraction",
    "lift_cycle": "lift_cycle",
    "cycles": "cycles",
    "runs": "runs",
    "seed": "seed",
    "hub_threshold": "hub_threshold",
    "intra_cycle": "intra_cycle",
}


def _build_config(args: argparse.Namespace) -> ScenarioConfig:
    overrides = {
        field: getattr(args, flag)
        for flag, field in _FLAG_FIELDS.items()
        if getattr(args, flag, None) is not None
    }
    if args.preset:
        base = CATALOG[args.preset].cfg
        if args.config:
            raise ConfigError("--preset and --config are mutually exclusive")
        if "seed" not in overrides:
            raise ConfigError("--seed is required (presets do not pin one)")
        return validate_config(replace(base, **overrides))
    if args.config:
        return load_config(args.config, **overrides)
    required = ("nodes", "cache", "hubs", "seed")
    missing = [f"--{flag}" for flag in required if getattr(args, flag) is None]
    if missing:
        raise ConfigError(f"missing {', '.join(missing)} (or use --config/--preset)")
    defaults = dict(byzantine_fraction=0.0, attack="none", lift_cycle=0,
                    cycles=1000, runs=100, hub_threshold=0.5)
    defaults.update(overrides)
    return validate_config(ScenarioConfig(**defaults))


def _write_outputs(cfg: ScenarioConfig, results, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config_to_text(cfg))
    runs = [r.records for r in results]
    metrics.write_raw_csv(runs, out / "raw.csv")
    metrics.write_agg_csv(metrics.aggregate(runs), out / "agg.csv")


def _final_cycle_means(results) -> dict[str, float]:
    finals = [r.records[-1] for r in results]
    n = len(finals)
    return {
        "total_hubs": sum(f.total_hubs for f in finals) / n,
        "byzantine_hubs": sum(f.byzantine_hubs for f in finals) / n,
        "correct_hubs": sum(f.correct_hubs for f in finals) / n,
        "converged": sum(f.converged for f in finals) / n,
    }


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    results = run_scenario(cfg, engine=args.engine, workers=args.workers)
    _write_outputs(cfg, results, args.out)
    means = _final_cycle_means(results)
    summary = " ".join(f"{k}={v:.3f}" for k, v in means.items())
    print(f"[liftsim] {cfg.runs} runs x {cfg.cycles} cycles; final-cycle means: {summary}")
    print(f"[liftsim] wrote {args.out / 'raw.csv'} and {args.out / 'agg.csv'}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        fractions = [float(tok) for tok in args.fractions.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --fractions value: {args.fractions!r}") from exc
    if not fractions:
        raise ConfigError("--fractions must list at least one value")
    base = _build_config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    summary_rows = []
    for fraction in fractions:
        cfg = validate_config(replace(base, byzantine_fraction=fraction))
        results = run_scenario(cfg, engine=args.engine, workers=args.workers)
        sub = args.out / f"f{fraction:g}"
        _write_outputs(cfg, results, sub)
        means = _final_cycle_means(results)
        summary_rows.append((fraction, means["byzantine_hubs"], means["total_hubs"]))
        print(f"[liftsim] fraction {fraction:g}: final byzantine_hubs mean "
              f"{means['byzantine_hubs']:.3f}, total_hubs mean {means['total_hubs']:.3f}")
    with open(args.out / "sweep_summary.csv", "w") as fh:
        fh.write("fraction,final_byzantine_hubs_mean,final_total_hubs_mean\n")
        for fraction, byz, total in summary_rows:
            fh.write(f"{fraction:g},{byz:.10g},{total:.10g}\n")
    print(f"[liftsim] wrote {args.out / 'sweep_summary.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liftsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario and write CSVs")
    _add_scenario_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a byzantine-fraction sweep")
    _add_scenario_flags(p_sweep)
    p_sweep.add_argument("--fractions", required=True,
                         help="comma-separated byzantine fractions, e.g. 0.01,0.02,0.05")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
