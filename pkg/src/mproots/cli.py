"""Command-line front end: ``mproots {solve,bench,coc,basin} ...``.

Exit codes: 0 success, 1 usage error, 2 no convergence (``solve`` only),
3 numeric failure.  Every subcommand accepts ``--config FILE`` holding
``key = value`` lines (``#`` starts a comment); explicit flags win.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .analysis import InsufficientData, measure_coc
from .basins import BasinConfig, NoRootsFound, render_basin, write_ppm
from .bench import emit, merge, reference_cases, run_tnfe12, run_tolerance
from .expr import BUILTINS, ExpressionSyntaxError, resolve_function
from .numerics import NumericError, Precision
from .solvers import (
    FamilyParams,
    InvalidWeights,
    MethodSpec,
    SolveConfig,
    Status,
    Tolerance,
    parse_methods,
    solve,
)

__all__ = ["main", "UsageError"]

EXIT_OK, EXIT_USAGE, EXIT_NO_CONVERGENCE, EXIT_NUMERIC = 0, 1, 2, 3

GRAMMAR = """\
expression grammar (variable x):
  expr   := term (('+' | '-') term)*
  term   := unary (('*' | '/') unary)*
  unary  := '-' unary | power
  power  := atom ('^' unary)?          right-associative, -x^2 = -(x^2)
  atom   := number | x | pi | e | func '(' expr ')' | '(' expr ')'
  func   := sin | cos | exp | ln | abs
builtin functions: """ + ", ".join(
    f"{k} = {v.text}" for k, v in BUILTINS.items()
)

METHODS = ("newton", "steffensen", "sm7", "om8", "om8df")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="key = value defaults for any flag")
    p.add_argument("--verbose", action="store_true", help="print a header echoing every flag")


def _method_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--function", required=True, help="builtin id (f1..f7) or expression in x")
    p.add_argument("--guess", required=True, help="initial guess, parsed as an exact decimal")
    p.add_argument("--method", default="om8", choices=METHODS)
    p.add_argument("--alpha", default="0")
    p.add_argument("--beta", default="3")
    p.add_argument("--gamma", default="0")
    p.add_argument("--delta", default="1")
    p.add_argument("--shift-exponent", type=int, default=3, help="om8df: m in w = x + a*f(x)^m")
    p.add_argument("--shift-scale", default="1", help="om8df: a in w = x + a*f(x)^m")
    p.add_argument("--digits", type=int, default=1000)
    p.add_argument("--max-iters", type=int, default=100)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mproots", description="Multiprecision multipoint root finding.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="solve f(x) = 0 from one guess")
    _method_flags(p)
    p.add_argument("--tol", default="1e-50")
    p.add_argument("--trace", action="store_true", help="print |f(x_n)| per iteration")
    p.add_argument("--show-digits", type=int, default=50, help="significant digits of the printed root")
    _common(p)

    p = sub.add_parser("bench", help="run the TNFE-12 and tolerance protocols")
    p.add_argument("--suite", default="all", choices=("table2", "table3", "all"))
    p.add_argument("--methods", default="om8", help="comma list, e.g. om8,sm7")
    p.add_argument("--format", default="csv", choices=("csv", "markdown"))
    p.add_argument("--out", help="write here instead of standard output")
    p.add_argument("--digits", type=int, default=1000)
    p.add_argument("--tol", default="1e-50")
    _common(p)

    p = sub.add_parser("coc", help="computational order of convergence")
    _method_flags(p)
    _common(p)

    p = sub.add_parser("basin", help="render a basin-of-attraction PPM")
    p.add_argument("--polynomial", required=True, help="coefficients, highest degree first: 1,0,0,-1")
    p.add_argument("--window", default="-2,2,-2,2", help="re_min,re_max,im_min,im_max")
    p.add_argument("--resolution", default="256x256", help="WIDTHxHEIGHT")
    p.add_argument("--out", required=True)
    p.add_argument("--method", default="om8", choices=METHODS)
    p.add_argument("--max-iters", type=int, default=25)
    p.add_argument("--tol", default="1e-8")
    _common(p)
    return parser


# ------------------------------------------------------------------ config


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _apply_config(sub: argparse.ArgumentParser, config: dict) -> None:
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, value in config.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            low = value.lower()
            if low not in _TRUE | _FALSE:
                raise UsageError(f"config key {key!r} expects true/false")
            defaults[key] = low in _TRUE
        else:
            defaults[key] = value  # string defaults go through the flag's type
        action.required = False
    sub.set_defaults(**defaults)


def _prescan(argv: Sequence[str]) -> tuple:
    """``(subcommand, config path)`` found in ``argv`` without full parsing."""
    command = next((a for a in argv if a in COMMANDS), None)
    config = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif a.startswith("--config="):
            config = a.split("=", 1)[1]
    return command, config


_NEGATIVE_VALUE = re.compile(r"^-\.?\d")


def _glue_negative_values(argv: Sequence[str]) -> list:
    """``--window -2,2,-2,2`` -> ``--window=-2,2,-2,2`` so argparse sees a value."""
    out = []
    for a in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE_VALUE.match(a):
            out[-1] = f"{out[-1]}={a}"
        else:
            out.append(a)
    return out


def parse(argv: Sequence[str]) -> tuple:
    parser = build_parser()
    argv = _glue_negative_values(argv)
    command, config = _prescan(argv)
    if command and config:
        sub = parser._subparsers._group_actions[0].choices[command]
        try:
            _apply_config(sub, read_config(config))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required")
    return parser, args


# ----------------------------------------------------------------- helpers


def _method(args, out_err) -> MethodSpec:
    params = FamilyParams(args.alpha, args.beta, args.gamma, args.delta)
    if args.method == "om8":
        return MethodSpec.om8(params)
    if args.method == "om8df":
        m = args.shift_exponent
        if m < 1:
            raise UsageError("--shift-exponent must be >= 1 for om8df")
        if m < 3:
            order = {1: 5, 2: 7}[m]
            print(f"warning: shift exponent {m} < 3, expect order about {order} instead of 8", file=out_err)
        return MethodSpec.om8df(m, args.shift_scale, params)
    return parse_methods([args.method])[0]


def _header(args, out) -> None:
    if not args.verbose:
        return
    print(f"# mproots {__version__} {args.command}", file=out)
    for key, value in sorted(vars(args).items()):
        if key != "command":
            print(f"# {key.replace('_', '-')} = {value}", file=out)


def _guess(prec: Precision, text: str):
    try:
        return prec.real(text)
    except NumericError:
        raise UsageError(f"--guess must be a decimal number, got {text!r}") from None


def _precision(digits: int) -> Precision:
    try:
        return Precision(digits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ------------------------------------------------------------- subcommands


def cmd_solve(args, out, err) -> int:
    prec = _precision(args.digits)
    f = resolve_function(args.function)
    method = _method(args, err)
    cfg = SolveConfig(prec, Tolerance(args.tol), max_iterations=args.max_iters)
    x0 = _guess(prec, args.guess)
    res = solve(method, f, x0, cfg)
    if args.trace:
        for rec in res.trace:
            print(f"n={rec.n} |f(x_n)| = {prec.context.nstr(rec.abs_f, 5)}", file=out)
    print(f"root: {prec.context.nstr(res.root, args.show_digits)}", file=out)
    print(f"status: {res.status.value}", file=out)
    print(f"iterations: {res.iterations}", file=out)
    print(f"TNFE: {res.tnfe}", file=out)
    if res.status is Status.CONVERGED:
        return EXIT_OK
    if res.message:
        print(res.message, file=err)
    if res.status is Status.DOMAIN_FAILURE:
        return EXIT_NUMERIC
    return EXIT_NO_CONVERGENCE


def cmd_bench(args, out, err) -> int:
    prec = _precision(args.digits)
    try:
        methods = parse_methods([m for m in args.methods.split(",") if m.strip()])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not methods:
        raise UsageError("--methods is empty")
    reports = []
    if args.suite in ("table2", "all"):
        four = [m for m in methods if m.evals_per_iteration == 4]
        if args.suite == "table2" and len(four) < len(methods):
            raise UsageError("table2 (TNFE-12) needs four-evaluation methods: sm7, om8, om8df")
        if four:
            reports.append(run_tnfe12(reference_cases(four), prec))
    if args.suite in ("table3", "all"):
        reports.append(run_tolerance(reference_cases(methods), args.tol, prec))
    text = emit(merge(*reports), args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_coc(args, out, err) -> int:
    prec = _precision(args.digits)
    f = resolve_function(args.function)
    method = _method(args, err)
    try:
        est = measure_coc(method, f, _guess(prec, args.guess), prec, max_iterations=args.max_iters)
    except InsufficientData as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NUMERIC
    print(f"COC: {est.value:.6f}", file=out)
    print(f"window: iterates {est.window[0]}..{est.window[1]}", file=out)
    print(f"stderr: {est.stderr:.3e}", file=out)
    return EXIT_OK


def _floats(text: str, n: Optional[int], what: str, kind=float) -> list:
    try:
        vals = [kind(s.strip().replace(" ", "")) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"bad {what}: {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{what} needs {n} values, got {len(vals)}")
    return vals


def cmd_basin(args, out, err) -> int:
    coeffs = _floats(args.polynomial, None, "--polynomial", complex)
    window = _floats(args.window, 4, "--window")
    try:
        w, h = (int(v) for v in args.resolution.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad --resolution {args.resolution!r}, expected WIDTHxHEIGHT") from None
    method = parse_methods([args.method])[0]
    cfg = BasinConfig(tuple(coeffs), tuple(window), (w, h), args.max_iters, float(args.tol), method)
    path = write_ppm(args.out, render_basin(cfg))
    print(f"wrote {path} ({w}x{h})", file=out)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "coc": cmd_coc, "basin": cmd_basin}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        parser, args = parse(argv)
        _header(args, out)
        return COMMANDS[args.command](args, out, err)
    except (NumericError, NoRootsFound) as exc:
        print(f"numeric failure: {exc}", file=err)
        return EXIT_NUMERIC
    except (UsageError, ExpressionSyntaxError, KeyError, InvalidWeights, ValueError) as exc:
        print(f"usage error: {exc}", file=err)
        print(parser.format_help(), file=err)
        for sub in parser._subparsers._group_actions[0].choices.values():
            print(sub.format_help(), file=err)
        print(GRAMMAR, file=err)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=err)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
