"""Command-line interface: run, sweep, fit, check, oracle-line.

Exit codes: 0 on success (for run/sweep: every trial silent and valid; for
check: no bad silent configurations and none unreachable), 1 when the
command ran but the outcome fails those conditions, 2 on usage or input
errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .engine import Configuration
from .harness import (
    SweepSpec,
    build_protocol,
    fit_exponent,
    read_csv,
    run_single,
    run_trials,
    write_csv,
)
from .oracles import exhaustive_silence_check
from .protocol import read_config_file
from .protocols import make_line, make_ring
from .protocols.line import line_vectors


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _usage_error(message: str) -> SystemExit:
    print(f"error: {message}", file=sys.stderr)
    return SystemExit(2)


def _resolve_size(args) -> tuple[object, int | None]:
    """Build the protocol for run/check from --n/--m flags."""
    family = args.protocol
    if family in ("generic", "tree"):
        if args.n is None:
            raise _usage_error(f"--n is required for {family}")
        proto = build_protocol(family, args.n, getattr(args, "k", None))
        return proto, None
    if family == "ring":
        if args.m is not None:
            return build_protocol("ring", args.m), args.m
        if args.n is None:
            raise _usage_error("ring needs --m (exact layout) or --n (population)")
        proto = make_ring(args.n)
        return proto, proto.layout.m
    if family == "line":
        if args.m is None:
            raise _usage_error("--m is required for line")
        return build_protocol("line", args.m), args.m
    raise _usage_error(f"unknown protocol {family!r}")


def _cmd_run(args) -> int:
    protocol, m = _resolve_size(args)
    record = run_single(protocol, args.protocol, args.init, args.seed, args.budget, m)
    _emit(dataclasses.asdict(record), args.out)
    return 0 if (record.silent and record.valid) else 1


def _cmd_sweep(args) -> int:
    sizes = tuple(int(tok) for tok in args.sizes.split(","))
    spec = SweepSpec(
        protocol=args.protocol,
        sizes=sizes,
        trials=args.trials,
        init=args.init,
        seed_base=args.seed_base,
        budget=args.budget,
        k=args.k,
    )
    records = run_trials(spec)
    write_csv(args.out, records)
    ok = all(rec.silent and rec.valid for rec in records)
    print(
        f"wrote {len(records)} records to {args.out} "
        f"({'all silent and valid' if ok else 'FAILURES present'})"
    )
    return 0 if ok else 1


def _cmd_fit(args) -> int:
    records = read_csv(args.csv)
    try:
        fit = fit_exponent(records)
    except ValueError as exc:
        print(f"cannot fit: {exc}", file=sys.stderr)
        return 2
    _emit(dataclasses.asdict(fit), args.out)
    return 0


def _cmd_check(args) -> int:
    protocol, _m = _resolve_size(args)
    population = args.population if args.population is not None else protocol.population
    try:
        report = exhaustive_silence_check(
            protocol, population, max_states=args.max_states
        )
    except ValueError as exc:
        print(f"check refused: {exc}", file=sys.stderr)
        return 2
    _emit(report, args.out)
    clean = (
        report["bad_silent"] == 0
        and report["unreachable"] == 0
        and not report.get("partial", False)
    )
    return 0 if clean else 1


def _cmd_oracle_line(args) -> int:
    header = None
    for ln in Path(args.file).read_text().splitlines():
        if ln.strip():
            header = ln.strip()
            break
    if header is None or not header.startswith("line m="):
        print(f"{args.file}: expected a 'line m=<m>' header", file=sys.stderr)
        return 2
    m = int(header.split("m=")[1].split()[0])
    protocol = make_line(m)
    layout = protocol.layout
    states = read_config_file(args.file, protocol)
    counts = np.bincount(
        np.asarray(states, dtype=np.int64), minlength=protocol.num_states
    ).astype(np.int64)
    config = Configuration(
        agents=np.asarray(states, dtype=np.int32), counts=counts
    )
    lines = [args.line] if args.line is not None else range(1, layout.lines + 1)
    entries = []
    sum_s = 0
    sum_d = 0
    for l in lines:
        vec = line_vectors(config, layout, l)
        sum_s += vec.s
        sum_d += vec.d
        entries.append(dataclasses.asdict(vec))
    x_count = int(counts[layout.x_state])
    payload = {
        "m": m,
        "x_count": x_count,
        "lines": entries,
        "sum_s": sum_s,
        "sum_d": sum_d,
    }
    if args.line is None:
        payload["identity_holds"] = x_count + sum_s == sum_d
    _emit(payload, args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="poprank",
        description="Self-stabilising ranking protocols: simulate, sweep, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    families = ("generic", "ring", "line", "tree")

    p_run = sub.add_parser("run", help="one seeded run, record as JSON")
    p_run.add_argument("--protocol", required=True, choices=families)
    p_run.add_argument("--n", type=int, help="population (generic/tree/ring)")
    p_run.add_argument("--m", type=int, help="trap parameter (ring/line)")
    p_run.add_argument("--k", type=int, help="tree reset-line length override")
    p_run.add_argument(
        "--init",
        default="random",
        help="uniform:<state> | kdist:<k> | random | file:<path>",
    )
    p_run.add_argument("--seed", type=int, required=True)
    p_run.add_argument("--budget", type=float, help="parallel-time budget")
    p_run.add_argument("--out", help="also write the JSON to this path")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="trial batch over sizes, CSV out")
    p_sweep.add_argument("--protocol", required=True, choices=families)
    p_sweep.add_argument(
        "--sizes", required=True, help="comma-separated n (generic/tree) or m (ring/line)"
    )
    p_sweep.add_argument("--trials", type=int, required=True)
    p_sweep.add_argument("--init", default="random")
    p_sweep.add_argument("--seed-base", type=int, default=0)
    p_sweep.add_argument("--budget", type=float, help="parallel-time budget")
    p_sweep.add_argument("--k", type=int, help="tree reset-line length override")
    p_sweep.add_argument("--out", required=True, help="CSV path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_fit = sub.add_parser("fit", help="power-law fit of a sweep CSV")
    p_fit.add_argument("--csv", required=True)
    p_fit.add_argument("--out", help="also write the JSON to this path")
    p_fit.set_defaults(func=_cmd_fit)

    p_check = sub.add_parser("check", help="exhaustive silence check (small sizes)")
    p_check.add_argument("--protocol", required=True, choices=families)
    p_check.add_argument("--n", type=int)
    p_check.add_argument("--m", type=int)
    p_check.add_argument("--k", type=int)
    p_check.add_argument(
        "--population", type=int, help="agents to enumerate (default: one per rank)"
    )
    p_check.add_argument("--max-states", type=int, default=12)
    p_check.add_argument("--out", help="also write the JSON to this path")
    p_check.set_defaults(func=_cmd_check)

    p_ol = sub.add_parser(
        "oracle-line", help="silent-outcome vectors for a line state file"
    )
    p_ol.add_argument("--file", required=True, help="state file with 'line m=<m>' header")
    p_ol.add_argument("--line", type=int, help="restrict to one line")
    p_ol.add_argument("--out", help="also write the JSON to this path")
    p_ol.set_defaults(func=_cmd_oracle_line)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
