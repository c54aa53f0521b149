"""Command-line front end.

    pathinv verify [--transform SPEC] [--order 1|2] [--omega W] [--a A] ...
    pathinv diagrams --order 2 --class watermelon
    pathinv reduce-expr "Dm^2*D^2"
    pathinv oracle-check

Exit status: 0 on PASS, 1 on a failed cancellation or oracle mismatch,
2 on bad usage.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .action import TransformError
from .pipeline import fmt_decimal, run
from .reducer import IrreducibleTerm, Reducer, TraceEntry, reduce_sum
from .symexpr import OpaqueResidue, eval_at_D1
from .wick import CLASSES

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _rational(flag):
    def conv(text):
        try:
            v = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"{flag} expects a rational such as 3/2, got {text!r}")
        return v
    return conv


def _a_value(text):
    if text == "symbolic":
        return None
    return _rational("--a")(text)


def _omega(text):
    v = _rational("--omega")(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("--omega must be positive")
    return v


def _emit(text: str, out: str | None):
    print(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _report(args, oracle: bool):
    try:
        return run(args.transform, args.order, args.omega, args.a, oracle=oracle,
                   trace=getattr(args, "trace", False))
    except TransformError as e:
        raise UsageError(f"--transform: {e}") from None


def cmd_verify(args) -> int:
    rep = _report(args, args.oracle)
    _emit(rep.to_json() if args.format == "json" else rep.to_text(), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_diagrams(args) -> int:
    rep = _report(args, False)
    entries = [d for sec in rep.orders if sec.order == args.order for d in sec.diagrams
               if args.klass is None or d.tag == args.klass]
    if args.format == "json":
        text = json.dumps([d.__dict__ for d in entries], indent=2)
    else:
        text = "\n".join(d.line() for d in entries) or "(no diagrams)"
    _emit(text, args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    log: list[TraceEntry] | None = [] if args.trace else None
    try:
        e = reduce_sum(args.expr, Reducer(trace=log))
    except IrreducibleTerm as exc:
        print(f"irreducible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, IndexError) as exc:
        raise UsageError(f"expression: {exc}") from None
    d1 = None
    try:
        v = eval_at_D1(e.drop_dirac0(), args.omega)
        d1 = f"{v} ({fmt_decimal(v)})"
    except (OpaqueResidue, ValueError, ZeroDivisionError):
        pass
    if args.format == "json":
        payload = {"input": args.expr, "value": e.to_json(), "d1": d1}
        if log is not None:
            payload["trace"] = [t.__dict__ for t in log]
        text = json.dumps(payload, indent=2)
    else:
        lines = [str(e)]
        if d1:
            lines.append(f"D=1, w={args.omega}: {d1}")
        for t in log or []:
            lines.append(f"  {'  ' * t.depth}{t.rule}: {t.term} -> {t.result}")
        text = "\n".join(lines)
    _emit(text, args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import format_rows, run_catalogue
    rows = run_catalogue()
    if args.format == "json":
        text = json.dumps([r.to_dict() for r in rows], indent=2)
    else:
        text = format_rows(rows)
    _emit(text, args.out)
    return EXIT_OK if all(r.ok for r in rows) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pathinv",
                                description="Check coordinate invariance of the perturbative "
                                            "free energy of the harmonic oscillator.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="also write the output to this file")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--transform", default="paper-default",
                       help="paper-default, identity, or power:coeff pairs like 1:1,3:-1/3*g")
    model.add_argument("--order", type=int, choices=(1, 2), default=2)
    model.add_argument("--omega", type=_omega, default=Fraction(1),
                       help="frequency used for D=1 values (default 1)")
    model.add_argument("--a", type=_a_value, default=None,
                       help="rational value of a, or 'symbolic' (default)")

    v = sub.add_parser("verify", parents=[common, model], help="run the full check")
    v.add_argument("--trace", action="store_true", help="log rule applications")
    v.add_argument("--oracle", action="store_true", help="append the numeric oracle section")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("diagrams", parents=[common, model], help="list diagram classes")
    d.add_argument("--class", dest="klass", choices=CLASSES)
    d.set_defaults(func=cmd_diagrams)

    r = sub.add_parser("reduce-expr", parents=[common], help="reduce one integrand")
    r.add_argument("expr", help="e.g. 'Dm^2*D^2' or 'Dmn^2 + 2*w^2*Dm^2'")
    r.add_argument("--omega", type=_omega, default=Fraction(1))
    r.add_argument("--trace", action="store_true")
    r.set_defaults(func=cmd_reduce)

    o = sub.add_parser("oracle-check", parents=[common], help="closed forms vs quadrature")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as e:
        print(f"pathinv: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
