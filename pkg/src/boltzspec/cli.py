"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 blow-up during time
integration, 4 validation suite failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .acceptance import SUITES, run_suite
from .collision import KernelTable, dump_table
from .sim import BlowUpError, ConfigError, parse_config, run, sweep


def _cmd_run(args) -> int:
    config = parse_config(args.config)
    out = args.out if args.out is not None else config.out_dir
    if out is None:
        raise ConfigError("no output directory: set out_dir or pass --out")
    series = run(config, out)
    print(
        f"completed {len(series.records)} diagnostic records in "
        f"{series.wall_seconds:.2f}s, outputs in {out}"
    )
    return 0


def _cmd_sweep(args) -> int:
    base = parse_config(args.config)
    try:
        values = [float(x) for x in args.values.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad sweep values {args.values!r}") from None
    out = args.out if args.out is not None else base.out_dir
    if out is None:
        raise ConfigError("no output directory: set out_dir or pass --out")
    result = sweep(base, args.axis, values, out)
    for value, series in zip(result.values, result.series):
        if series is None:
            print(f"{args.axis}={value:g}: FAILED ({result.failures[value]})")
        else:
            print(f"{args.axis}={value:g}: {series.wall_seconds:.2f}s")
    if result.failures:
        print(f"{len(result.failures)} of {len(values)} runs failed", file=sys.stderr)
        return 3
    return 0


def _cmd_validate(args) -> int:
    results = run_suite(args.suite)
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 4


def _cmd_kernel_table(args) -> int:
    config = parse_config(args.config)
    spec = config.build_spec()
    table = KernelTable(spec)
    table.dense_for_modes()
    dump_table(args.dump, table)
    print(f"wrote kernel table for R={spec.R:g}, N={spec.N}, gamma={spec.gamma:g} "
          f"to {args.dump}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boltzspec",
        description="Fourier spectral solver for the truncated Boltzmann equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="advance one configuration in time")
    p_run.add_argument("--config", required=True, help="path to a config file")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a family of configurations")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--axis", required=True, choices=["L", "N"])
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_val = sub.add_parser("validate", help="run an acceptance check suite")
    p_val.add_argument("--suite", required=True, choices=sorted(SUITES))
    p_val.set_defaults(func=_cmd_validate)

    p_tab = sub.add_parser("kernel-table", help="precompute and save a kernel table")
    p_tab.add_argument("--config", required=True)
    p_tab.add_argument("--dump", required=True, help="output file path")
    p_tab.set_defaults(func=_cmd_kernel_table)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except BlowUpError as exc:
        print(
            f"blow-up: {exc} (last valid time {exc.last_valid_time:g})",
            file=sys.stderr,
        )
        return 3


if __name__ == "__main__":
    sys.exit(main())
