"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 a reference-table check failed,
3 refused by the resource guard.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import report
from .attack import AVERAGE, ResourceGuardError, aggregate, sweep
from .protocol import honest_run, resolve_omega

EXIT_OK, EXIT_USAGE, EXIT_GATE, EXIT_GUARD = 0, 1, 2, 3

log = logging.getLogger("groverqss")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _omega_arg(text: str) -> str:
    if text.lower() in ("opt", "optimal", "pi"):
        return text.lower()
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected opt, pi or radians, got {text!r}")
    if not 0 < value < 2 * math.pi:
        raise argparse.ArgumentTypeError("explicit omega must lie in (0, 2*pi)")
    return text


def _message_arg(text: str):
    if text == AVERAGE:
        return AVERAGE
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected avg or an integer, got {text!r}")


def _seed_arg(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="groverqss", description="Grover-search secret sharing: protocol runs and attack sweeps.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output_flags(p):
        p.add_argument("--out", type=Path, help="output file (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("grover-table", help="optimal phase and success probability per register size")
    p.add_argument("--dims", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    output_flags(p)

    p = sub.add_parser("omega-scan", help="success probability as a function of the phase")
    p.add_argument("-d", "--dim", type=int, default=8)
    p.add_argument("--steps", type=int, default=629)
    output_flags(p)

    p = sub.add_parser("sweep", help="attack success over all (true, guessed) initial states")
    p.add_argument("-q", "--participants", type=int, required=True)
    p.add_argument("--omega", type=_omega_arg, default="opt", help="opt, pi or radians")
    p.add_argument("--strategy", choices=["complete", "half", "variant2", "wrong-oracle"], default="complete")
    p.add_argument("--message", type=_message_arg, default=AVERAGE, help="true chunk, or avg")
    p.add_argument("--oracle", type=_message_arg, default=AVERAGE, help="guessed chunk for wrong-oracle, or avg")
    p.add_argument("--reduction", choices=["full", "diff"], help="default: full for Q<=4, diff above")
    p.add_argument("--expand", action="store_true", help="write the full grid even for a diff sweep")
    p.add_argument("--k1", type=int, help="dealer iterations (insecure experiments)")
    p.add_argument("--allow-insecure", action="store_true", help="acknowledge a non-default --k1")
    p.add_argument("--allow-full-q7", action="store_true", help="lift the Q=7 full-sweep guard")
    p.add_argument("--spot-checks", type=int, default=100_000, help="direct re-evaluations for diff sweeps")
    p.add_argument("--seed", type=_seed_arg, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--summary", type=Path, help="summary JSON path (default: <out>.summary.json or stdout)")
    output_flags(p)

    p = sub.add_parser("tables", help="recompute the reference tables and check them")
    p.add_argument("which", choices=["1", "2", "4", "5"])
    p.add_argument("-q", "--participants", type=int, default=3, help="participants for table 5")
    output_flags(p)

    p = sub.add_parser("demo", help="run the honest protocol on a secret")
    p.add_argument("value", type=int)
    p.add_argument("-q", "--participants", type=int, default=2)
    p.add_argument("--omega", type=_omega_arg, default="opt")
    p.add_argument("--seed", type=_seed_arg, default=0)
    p.add_argument("--out", type=Path)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.write_text(text, encoding="utf-8")


def _cmd_sweep(args) -> int:
    q = args.participants
    if args.k1 is not None and not args.allow_insecure:
        raise UsageError("--k1 changes the secure schedule; pass --allow-insecure to confirm")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    reduction = args.reduction or ("full" if q <= 4 else "diff")
    try:
        omega = resolve_omega(args.omega, q)
        grid = sweep(
            q,
            args.strategy,
            omega,
            message=args.message,
            reduction=reduction,
            seed=args.seed,
            k1=args.k1,
            oracle=args.oracle if args.strategy == "wrong-oracle" else None,
            workers=args.workers,
            spot_checks=args.spot_checks if reduction == "diff" else 0,
            allow_full_q7=args.allow_full_q7,
        )
        grid_rep = report.grid_report(grid, args.seed, expand=args.expand)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    summary = report.summary_report(grid, aggregate(grid), args.seed).to_json()
    if args.out is not None:
        _emit(grid_rep.render(args.format), args.out)
        _emit(summary, args.summary or args.out.with_name(args.out.name + ".summary.json"))
    else:
        _emit(summary, args.summary)
    return EXIT_OK


def _cmd_tables(args) -> int:
    builders = {
        "1": report.table1,
        "2": report.table2,
        "4": report.table4,
        "5": lambda: report.table5(args.participants),
    }
    if args.which == "5" and not 2 <= args.participants <= 7:
        raise UsageError("table 5 needs 2..7 participants")
    rep = builders[args.which]()
    _emit(rep.render(args.format), args.out)
    for row in rep.failed:
        log.error("table %s mismatch: %s", args.which, row)
    return EXIT_GATE if rep.failed else EXIT_OK


def demo_transcript(value: int, q: int, omega, seed: int) -> str:
    run = honest_run(value, q, omega, rng_seed=seed)
    lines = [
        f"secret {value} with {q} participants, omega = {run.omega:.9g}",
        f"chunks: {run.chunks}",
    ]
    for i, (chunk, s, x, p, got) in enumerate(
        zip(run.chunks, run.initial_states, run.encoded, run.probabilities, run.decoded_chunks)
    ):
        amps = " ".join(f"{a.real:+.4f}{a.imag:+.4f}j" for a in np.round(x.amplitudes, 4) + 0.0)
        lines += [
            f"chunk {i}: value {chunk}, initial state {s} (grid number {s.index()})",
            f"  encoded: {amps}",
            f"  P(decode {chunk}) = {p:.9g}, measured {got}",
        ]
    lines.append(f"decoded secret: {run.decoded}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "grover-table":
            rep = report.grover_table(args.dims)
            _emit(rep.render(args.format), args.out)
            return EXIT_GATE if rep.failed else EXIT_OK
        if args.command == "omega-scan":
            _emit(report.omega_scan(args.dim, args.steps).render(args.format), args.out)
            return EXIT_OK
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "tables":
            return _cmd_tables(args)
        if args.command == "demo":
            if args.value < 0:
                raise UsageError("secret must be non-negative")
            _emit(demo_transcript(args.value, args.participants, args.omega, args.seed), args.out)
            return EXIT_OK
    except ResourceGuardError as exc:
        print(f"groverqss: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, ValueError) as exc:
        print(f"groverqss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"groverqss: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
