"""Command-line driver: ``admaiora [flags]`` for one run, ``--sweep`` for a sweep.

Exit status: 0 success, 1 usage error, 2 runtime or consistency error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import (
    ALLOCATORS,
    SweepSpec,
    per_gw_report,
    run_sweep,
    sf_histogram_report,
    simulate,
    write_csv,
)
from .scenario import ScenarioConfig, ScenarioError, TOPOLOGIES, load_config


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="admaiora", description="LoRa multi-gateway SF allocation experiments.")
    p.add_argument("--config", type=Path, help="YAML scenario file; flags override it")
    p.add_argument("--nodes", type=int)
    p.add_argument("--gateways", type=int)
    p.add_argument("--allocator", action="append", choices=ALLOCATORS,
                   help="repeatable; a single run uses the first one")
    p.add_argument("--topology", choices=TOPOLOGIES)
    p.add_argument("--mp", type=float, help="message period, s")
    p.add_argument("--duty-cycle", type=float, help="duty-cycle limit as a fraction, e.g. 0.1")
    p.add_argument("--payload", type=int, help="payload bytes")
    p.add_argument("--sim-time", type=float, help="simulated seconds")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds from --seed")
    p.add_argument("--sweep", help="axis=v1,v2,... with axis in message_period|n_nodes|n_gateways")
    p.add_argument("--out", type=Path, help="output directory for CSV files")
    p.add_argument("--jobs", type=int, default=1)
    return p


def _config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {
        "n_nodes": args.nodes,
        "n_gateways": args.gateways,
        "topology": args.topology,
        "message_period": args.mp,
        "duty_cycle_limit": args.duty_cycle,
        "payload_bytes": args.payload,
        "sim_duration": args.sim_time,
        "seed": args.seed,
    }
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    if cfg.topology == "single":
        cfg = replace(cfg, n_gateways=1)
    cfg.validate()
    return cfg


def _parse_sweep(text: str) -> tuple[str, list[float]]:
    axis, sep, values = text.partition("=")
    if not sep or not values:
        raise UsageError(f"--sweep expects axis=v1,v2,..., got {text!r}")
    try:
        return axis.strip(), [float(v) for v in values.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad sweep value in {text!r}") from exc


def _emit(rows, out: Path | None, name: str) -> None:
    if out is not None:
        write_csv(rows, out / name)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seeds < 1 or args.jobs < 1:
            raise UsageError("--seeds and --jobs must be >= 1")
        cfg = _config(args)
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
        if args.sweep:
            axis, values = _parse_sweep(args.sweep)
            seeds = [cfg.seed + i for i in range(args.seeds)]
            try:
                spec = SweepSpec(axis, values, tuple(args.allocator or ALLOCATORS), cfg.topology, seeds, cfg)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            rows, agg = run_sweep(spec, args.jobs)
            _emit(rows, args.out, "runs.csv")
            _emit(agg, args.out, f"aggregate_{spec.axis}.csv")
            _print(agg)
            return 2 if any("error" in r for r in rows) else 0

        allocator = (args.allocator or ["admaiora"])[0]
        rows = []
        for i in range(args.seeds):
            result = simulate(replace(cfg, seed=cfg.seed + i), allocator)
            rows.append(result.row())
            if i == 0:
                _emit(per_gw_report(result), args.out, "per_gw.csv")
                _emit(sf_histogram_report({allocator: result.assignment}), args.out, "sf_hist.csv")
        _emit(rows, args.out, "runs.csv")
        _print(rows)
        return 0
    except (UsageError, ScenarioError) as exc:
        print(f"admaiora: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"admaiora: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _print(rows) -> None:
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    w = csv.DictWriter(sys.stdout, fieldnames=cols, restval="", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    sys.exit(main())
