"""Batch command-line front end.

Subcommands: ``simulate-discrete``, ``simulate-continuous``,
``verify-channel``, ``analyze``, ``export``. Every run is a pure function of
config file + seed; outputs are byte-identical across repeats. Exit codes:
0 success, 2 bad configuration or arguments, 3 enumeration capacity
exceeded, 4 a verification check failed.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis, io
from .config import (
    config_digest,
    load_continuous_config,
    load_discrete_config,
)
from .continuous import simulate_continuous
from .errors import CapacityError, ConfigurationError, VerificationError
from .geometry import build_alphabet
from .location import LocationTrace
from .processes import (
    channel_total_mass,
    check_channel_stationarity,
    check_output_mixing,
    uniform_prefix,
)
from .simulate import simulate_joint

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_VERIFICATION = 4


def _read_config(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    return p.read_text()


def _cmd_simulate_discrete(args: argparse.Namespace) -> int:
    text = _read_config(args.config)
    cfg = load_discrete_config(text)
    alphabet = build_alphabet(cfg.grid(), cfg.speeds)
    trace = simulate_joint(
        cfg.waypoint_spec(), alphabet, cfg.horizon, cfg.nodes, args.seed
    )
    io.save_locations(args.out, trace, seed=args.seed, config_digest=cfg.digest)
    print(f"wrote {cfg.nodes} node(s) x {cfg.horizon} steps to {args.out}")
    return EXIT_OK


def _cmd_simulate_continuous(args: argparse.Namespace) -> int:
    cfg = load_continuous_config(_read_config(args.config))
    trace = simulate_continuous(
        cfg.area(), cfg.nodes, cfg.duration, cfg.time_step, args.seed
    )
    io.save_positions(args.out, trace, seed=args.seed, config_digest=cfg.digest)
    print(
        f"wrote {cfg.nodes} node(s) x {trace.step_count} samples to {args.out}"
    )
    return EXIT_OK


def _cmd_verify_channel(args: argparse.Namespace) -> int:
    cfg = load_discrete_config(_read_config(args.config))
    grid = cfg.grid()
    alphabet = build_alphabet(grid, cfg.speeds)
    rng = np.random.default_rng(args.seed)
    horizon = args.horizon
    # long enough for the stationarity window and the largest decoupling shift
    prefix_len = max(horizon + 2, 6)
    failures = 0
    for k in range(args.prefixes):
        prefix = uniform_prefix(grid, prefix_len, rng)
        gap = check_channel_stationarity(alphabet, prefix, horizon)
        mass = channel_total_mass(alphabet, prefix, horizon)
        ok = gap == 0 and mass == 1
        print(
            f"prefix {k}: stationarity gap = {gap}, total mass = {mass} "
            f"-> {'ok' if ok else 'FAIL'}"
        )
        if not ok:
            failures += 1
        # decoupling at and beyond the second event's span
        fam0 = sorted(alphabet.family_id_set(prefix[0], prefix[1]))
        fam1 = sorted(alphabet.family_id_set(prefix[1], prefix[2]))
        event_b = [fam0[0], fam1[0]]
        span = len(event_b)
        for shift in range(span, span + 3):
            event_a_fam = sorted(
                alphabet.family_id_set(prefix[shift], prefix[shift + 1])
            )
            check = check_output_mixing(
                alphabet, prefix, [event_a_fam[0]], event_b, shift
            )
            tag = "ok" if check.discrepancy == 0 else "FAIL"
            print(
                f"prefix {k}: decoupling at shift {shift} = {check.discrepancy} -> {tag}"
            )
            if check.discrepancy != 0:
                failures += 1
    if failures:
        raise VerificationError(f"{failures} channel check(s) failed")
    print(f"all checks passed on {args.prefixes} random prefixes")
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    if not Path(args.trace).is_file():
        raise ConfigurationError(f"trace file not found: {args.trace}")
    trace, header = io.load_locations(args.trace)
    if args.config is not None:
        digest = config_digest(_read_config(args.config))
        stored = header.get("config", "none")
        if stored not in ("none", digest):
            raise ConfigurationError(
                f"trace was produced by config {stored[:12]}.., "
                f"given config digests to {digest[:12]}.."
            )
    grid = trace.grid
    hist = analysis.location_histogram(trace)
    rows = []
    for node in range(trace.node_count):
        node_trace = trace.node(node)
        for cell in grid.cells():
            indicator = analysis.CellIndicator(grid, cell)
            report = analysis.time_average(indicator, node_trace)
            rows.append(
                (
                    node,
                    cell.x,
                    cell.y,
                    int(hist.per_node[node][grid.cell_id(cell)])
                    if hist.per_node is not None
                    else int(hist.counts[grid.cell_id(cell)]),
                    report.final_value,
                    report.cauchy_width,
                    report.converged,
                )
            )
    io.export_csv_report(
        args.out,
        ("node", "x", "y", "visits", "frequency", "cauchy_width", "converged"),
        rows,
    )
    steps = len(trace)
    print(
        f"analyzed {trace.node_count} node(s) x {steps} steps; "
        f"wrote per-cell report to {args.out}"
    )
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    cfg = load_continuous_config(_read_config(args.config))
    trace = simulate_continuous(
        cfg.area(), cfg.nodes, cfg.duration, cfg.time_step, args.seed
    )
    if args.format == "ns2":
        io.export_ns2(args.out, trace)
    else:
        io.save_positions(args.out, trace, seed=args.seed, config_digest=cfg.digest)
    print(f"exported {args.format} movement for {cfg.nodes} node(s) to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rwmm",
        description="Random-waypoint mobility: simulate, verify, analyze.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim_d = sub.add_parser(
        "simulate-discrete", help="simulate grid-model nodes and write a trace"
    )
    sim_d.add_argument("--config", required=True, help="key=value config file")
    sim_d.add_argument("--seed", type=int, required=True)
    sim_d.add_argument("--out", required=True, help="output trace path")
    sim_d.set_defaults(func=_cmd_simulate_discrete)

    sim_c = sub.add_parser(
        "simulate-continuous",
        help="simulate continuous-space nodes and write sampled positions",
    )
    sim_c.add_argument("--config", required=True)
    sim_c.add_argument("--seed", type=int, required=True)
    sim_c.add_argument("--out", required=True)
    sim_c.set_defaults(func=_cmd_simulate_continuous)

    verify = sub.add_parser(
        "verify-channel",
        help="exact stationarity / normalization / decoupling checks",
    )
    verify.add_argument("--config", required=True)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--horizon", type=int, default=2)
    verify.add_argument("--prefixes", type=int, default=20)
    verify.set_defaults(func=_cmd_verify_channel)

    analyze = sub.add_parser(
        "analyze", help="per-cell occupancy and convergence report for a trace"
    )
    analyze.add_argument("--trace", required=True)
    analyze.add_argument("--out", required=True)
    analyze.add_argument(
        "--config", help="cross-check the trace against this config's digest"
    )
    analyze.set_defaults(func=_cmd_analyze)

    export = sub.add_parser(
        "export", help="regenerate a continuous run and export it"
    )
    export.add_argument("--config", required=True)
    export.add_argument("--seed", type=int, required=True)
    export.add_argument("--format", choices=("ns2", "csv"), default="ns2")
    export.add_argument("--out", required=True)
    export.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
