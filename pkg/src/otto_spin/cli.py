"""Command line entry point: ``otto-spin {cycle,sweep,verify}``.

Exit codes: 0 success, 1 invariant violation, 2 usage or domain error,
3 I/O error.
"""
from __future__ import annotations

import argparse
import math
import sys

from .otto_cycle import CycleParams, bound_audit, classify, run_cycle, sign_link
from .spin_model import DomainError
from .sweep import VARIABLES, SweepError, SweepSpec, run_sweep, write_csv
from .verify import format_params, run_verify

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

FLAGS = {"J": "--j", "B1": "--b1", "B2": "--b2", "T1": "--t1", "T2": "--t2"}


class UsageError(Exception):
    pass


def finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return value


def _domain_message(exc: DomainError) -> str:
    flag = FLAGS.get(getattr(exc, "param", None) or "")
    return f"{flag}: {exc}" if flag else str(exc)


def _fmt(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def cycle_report(params: CycleParams) -> list[str]:
    r = run_cycle(params)
    rep = classify(params, r)
    audit = bound_audit(params, r)
    link = sign_link(params, r)

    lines = ["[params]"]
    lines += [f"{k} = {_fmt(getattr(params, k))}" for k in VARIABLES]
    lines.append("[cycle]")
    for k in ("Q1", "Q2", "W", "q1", "q2", "w", "leak", "eta", "eta_local",
              "eta0", "eta_carnot", "bound", "t1_local", "t2_local"):
        lines.append(f"{k} = {_fmt(getattr(r, k))}")
    lines.append("[regime]")
    for k in ("is_engine", "case_label", "beats_uncoupled", "local_counterflow",
              "bound_ok", "carnot_ok", "pwc_condition", "appendix_ok"):
        lines.append(f"{k} = {_fmt(getattr(rep, k))}")
    lines.append("[bound_audit]")
    if not audit.applicable:
        lines.append("applicable = false")
    else:
        lines.append("applicable = true")
        lines += [f"{name} = {_fmt(ok)}" for name, ok in audit.links.items()]
    if link is not None:
        lines.append("[sign_link]")
        lines.append(f"sign(eta0 - eta) = {link.eta_sign}")
        lines.append(f"sign(p1' - p1) = {link.population_sign}")
        lines.append(f"consistent = {_fmt(link.consistent)}")
    return lines


def cmd_cycle(args) -> int:
    params = CycleParams(args.j, args.b1, args.b2, args.t1, args.t2)
    print("\n".join(cycle_report(params)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    fixed = {}
    for name, flag in FLAGS.items():
        value = getattr(args, flag[2:])
        if name == args.var:
            continue
        if value is None:
            raise UsageError(f"{flag} is required when sweeping {args.var}")
        fixed[name] = value
    spec = SweepSpec(fixed, args.var, args.lo, args.hi, args.steps)
    rows = run_sweep(spec)
    try:
        write_csv(rows, args.output)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(rows)} rows to {args.output}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.samples < 1:
        raise UsageError(f"--samples must be >= 1, got {args.samples}")
    report = run_verify(args.samples, args.seed)
    print("\n".join(report.lines()))
    if not report.ok:
        for name, p in report.failures():
            print(f"violation {name} at {format_params(p)}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otto-spin",
        description="Quantum Otto engine on a two-spin Heisenberg dimer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cycle", help="evaluate one parameter point")
    for name, flag in FLAGS.items():
        p.add_argument(flag, type=finite_float, required=True, help=name)
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("sweep", help="sweep one parameter and write CSV")
    p.add_argument("--var", choices=VARIABLES, required=True)
    p.add_argument("--lo", type=finite_float, required=True)
    p.add_argument("--hi", type=finite_float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--output", "-o", required=True)
    for name, flag in FLAGS.items():
        p.add_argument(flag, type=finite_float, help=f"{name} (omit for the swept one)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="randomised invariant checks")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {_domain_message(exc)}", file=sys.stderr)
        return EXIT_USAGE
    except (SweepError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
