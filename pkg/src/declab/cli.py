"""Command-line front end: ``declab run | verify | convert | table1``."""

from __future__ import annotations

import argparse
import os
import sys

from . import serialize
from .plan import PlanError, load_plan
from .popcore import PAULI_LABELS, pauli_hadamard_table
from .reps import NonPSDError
from .runner import DEFAULT_TOL, EXIT_INVALID, EXIT_NUMERIC, EXIT_OK, convert, run_plan, verify


def table1() -> str:
    """Hadamard products of the single-spin Pauli matrices, left factor by row."""
    table = pauli_hadamard_table()
    lines = ["(.) " + " ".join(f"{b:>3}" for b in PAULI_LABELS)]
    for a in PAULI_LABELS:
        lines.append(f"{a:<3} " + " ".join(f"{table[a, b]:>3}" for b in PAULI_LABELS))
    return "\n".join(lines) + "\n"


def _default_tol() -> float:
    env = os.environ.get("DECLAB_TOL")
    if env is None:
        return DEFAULT_TOL
    try:
        return float(env)
    except ValueError:
        raise PlanError(f"DECLAB_TOL: not a number: {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="declab", description="Diagonal decoherence channels and their representations.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="evolve the initial state over the time grid and write artifacts")
    r.add_argument("--plan", required=True)
    r.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="cross-check all available channel representations")
    v.add_argument("--plan", required=True)
    v.add_argument("--tol", type=float, default=None, help="max abs deviation (default 1e-9 or $DECLAB_TOL)")
    v.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("convert", help="print one representation of the plan's channel at time T")
    c.add_argument("--plan", required=True)
    c.add_argument("--to", required=True, choices=["lindblad", "kraus", "extended", "damping"])
    c.add_argument("--t", type=float, required=True)

    sub.add_parser("table1", help="print the Pauli Hadamard multiplication table")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "table1":
            sys.stdout.write(table1())
            return EXIT_OK
        plan = load_plan(args.plan)
        if args.command == "run":
            return run_plan(plan, args.out)
        if args.command == "verify":
            tol = args.tol if args.tol is not None else _default_tol()
            report = verify(plan, tol=tol, seed=args.seed)
            sys.stdout.write(report.format())
            return report.exit_code
        doc = convert(plan, args.to, args.t)
        sys.stdout.write(serialize.dumps(doc))
        return EXIT_OK
    except NonPSDError as exc:
        print(f"declab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PlanError, ValueError, TypeError) as exc:
        print(f"declab: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
