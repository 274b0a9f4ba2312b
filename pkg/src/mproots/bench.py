"""Benchmark protocols over the builtin test functions.

``run_tnfe12``   -- three iterations of a four-evaluation method, report |f(x_3)|
``run_tolerance``-- iterate until |f(x_{n+1})| < epsilon, report n+1 and TNFE

Reports render as CSV or as Markdown laid out like the published tables
(methods as columns, ``0.4e-688`` / ``2(8)`` cells).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

from . import __version__
from .expr import resolve_function
from .numerics import Precision
from .solvers import FixedIterations, MethodSpec, SolveConfig, Status, Tolerance, solve

__all__ = [
    "BenchmarkCase",
    "BenchmarkReport",
    "BenchmarkRow",
    "REFERENCE_GUESSES",
    "REFERENCE_TNFE12_OM8",
    "REFERENCE_TOLERANCE_OM8",
    "ProtocolMismatch",
    "emit",
    "merge",
    "reference_cases",
    "run_tnfe12",
    "run_tolerance",
]

# Starting points per function, in published row order.
REFERENCE_GUESSES = {
    "f1": ("1.72", "1.5", "1.7", "1.1"),
    "f2": ("1.1", "1.8", "1.5", "2.0"),
    "f3": ("-1.1", "-1.5", "-1.0", "-1.3"),
    "f4": ("1.0", "1.6", "1.5", "2.1"),
    "f5": ("0.1", "0.5", "-0.1", "-0.5"),
    "f6": ("-0.8", "-1.2", "-0.9", "-1.5"),
    "f7": ("1.0", "0.8", "1.8", "0.3"),
}

# Published |f(x_3)| for the default eighth-order method.
REFERENCE_TNFE12_OM8 = {
    ("f1", "1.72"): "0.4e-688", ("f1", "1.5"): "0.2e-448", ("f1", "1.7"): "0.4e-866", ("f1", "1.1"): "0.6e-259",
    ("f2", "1.1"): "0.3e-127", ("f2", "1.8"): "0.1e-225", ("f2", "1.5"): "0.4e-436", ("f2", "2.0"): "0.1e-150",
    ("f3", "-1.1"): "0.1e-301", ("f3", "-1.5"): "0.2e-254", ("f3", "-1.0"): "0.9e-116", ("f3", "-1.3"): "0.1e-468",
    ("f4", "1.0"): "0.2e-262", ("f4", "1.6"): "0.1e-441", ("f4", "1.5"): "0.3e-532", ("f4", "2.1"): "0.3e-159",
    ("f5", "0.1"): "0.1e-364", ("f5", "0.5"): "0.5e-339", ("f5", "-0.1"): "0.4e-485", ("f5", "-0.5"): "0.2e-277",
    ("f6", "-0.8"): "0.3e-254", ("f6", "-1.2"): "0.2e-435", ("f6", "-0.9"): "0.6e-526", ("f6", "-1.5"): "0.3e-336",
    ("f7", "1.0"): "0.2e-505", ("f7", "0.8"): "0.6e-150", ("f7", "1.8"): "0.6e-29", ("f7", "0.3"): "0.2e-416",
}  # fmt: skip

# Published (iterations, TNFE) for the default eighth-order method, epsilon = 1e-50.
REFERENCE_TOLERANCE_OM8 = {
    ("f1", "1.72"): (2, 8), ("f1", "1.5"): (2, 8), ("f1", "1.7"): (2, 8), ("f1", "1.1"): (2, 8),
    ("f2", "1.1"): (3, 12), ("f2", "1.8"): (3, 12), ("f2", "1.5"): (2, 8), ("f2", "2.0"): (3, 12),
    ("f3", "-1.1"): (2, 8), ("f3", "-1.5"): (3, 12), ("f3", "-1.0"): (3, 12), ("f3", "-1.3"): (2, 8),
    ("f4", "1.0"): (3, 12), ("f4", "1.6"): (2, 8), ("f4", "1.5"): (2, 8), ("f4", "2.1"): (3, 12),
    ("f5", "0.1"): (3, 12), ("f5", "0.5"): (3, 12), ("f5", "-0.1"): (2, 8), ("f5", "-0.5"): (3, 12),
    ("f6", "-0.8"): (3, 12), ("f6", "-1.2"): (2, 8), ("f6", "-0.9"): (2, 8), ("f6", "-1.5"): (3, 12),
    ("f7", "1.0"): (2, 8), ("f7", "0.8"): (3, 12), ("f7", "1.8"): (4, 16), ("f7", "0.3"): (3, 12),
}  # fmt: skip

CSV_COLUMNS = (
    "function",
    "guess",
    "method",
    "protocol",
    "exponent_or_iterations",
    "tnfe",
    "status",
    "precision_digits",
)


class ProtocolMismatch(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkCase:
    function_id: str
    guesses: tuple
    methods: tuple

    def __post_init__(self):
        if not self.guesses:
            raise ValueError("a benchmark case needs at least one guess")
        object.__setattr__(self, "guesses", tuple(str(g) for g in self.guesses))
        object.__setattr__(self, "methods", tuple(self.methods))
        resolve_function(self.function_id)


def reference_cases(methods: Sequence[MethodSpec] = (MethodSpec.om8(),)) -> list:
    return [BenchmarkCase(fid, guesses, tuple(methods)) for fid, guesses in REFERENCE_GUESSES.items()]


@dataclass(frozen=True)
class BenchmarkRow:
    function: str
    guess: str
    method: str
    protocol: str  # "tnfe12" | "tolerance"
    status: str  # "converged" | "completed" | "NC" | "DIV"
    iterations: int
    tnfe: int
    log10_residual: float
    mantissa: Optional[int] = None  # |f(x_3)| = 0.<mantissa> * 10**exponent
    exponent: Optional[int] = None

    @property
    def sort_key(self):
        return (self.function, self.guess, self.method, self.protocol)

    @property
    def cell(self) -> str:
        """Published-table cell text."""
        if self.status == "DIV":
            return "div."
        if self.protocol == "tolerance":
            return "NC" if self.status == "NC" else f"{self.iterations}({self.tnfe})"
        if self.exponent is None:
            return "0"
        return f"0.{self.mantissa}e{self.exponent}"


@dataclass
class BenchmarkReport:
    rows: list = field(default_factory=list)
    precision_digits: int = 1000
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    version: str = __version__

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=lambda r: r.sort_key)

    def row(self, function: str, guess: str, method: str = "OM8", protocol: Optional[str] = None):
        for r in self.rows:
            if (r.function, r.guess, r.method) == (function, guess, method) and protocol in (None, r.protocol):
                return r
        raise KeyError((function, guess, method, protocol))


def merge(*reports: BenchmarkReport) -> BenchmarkReport:
    out = BenchmarkReport(precision_digits=reports[0].precision_digits if reports else 1000)
    for rep in reports:
        out.rows.extend(rep.rows)
    return out


_STATUS = {
    Status.CONVERGED: "converged",
    Status.MAX_ITERATIONS: "NC",
    Status.DIVERGED: "DIV",
    Status.DOMAIN_FAILURE: "DIV",
}


def table_scientific(value) -> tuple:
    """``(d, e)`` with ``value ~ 0.d * 10**e`` and one mantissa digit, rounded."""
    ctx = value.context
    v = abs(value)
    e = int(ctx.floor(ctx.log10(v))) + 1
    d = int(ctx.nint(v / ctx.mpf(10) ** (e - 1)))
    if d >= 10:  # 9.6 rounds up to 0.1e(e+1)
        d, e = 1, e + 1
    return d, e


def run_tnfe12(cases: Iterable[BenchmarkCase], precision: Precision = Precision()) -> BenchmarkReport:
    cases = list(cases)
    for case in cases:
        for m in case.methods:
            if m.evals_per_iteration != 4:
                raise ProtocolMismatch(
                    f"{m.label} uses {m.evals_per_iteration} evaluations per iteration; "
                    "TNFE-12 is defined as 3 iterations of a 4-evaluation method"
                )
    report = BenchmarkReport(precision_digits=precision.digits)
    cfg = SolveConfig(precision, FixedIterations(3))
    for case in cases:
        for guess in case.guesses:
            for m in case.methods:
                res = solve(m, resolve_function(case.function_id), guess, cfg)
                status = _STATUS[res.status]
                if status == "NC":
                    # all three steps ran; the residual is simply above the tolerance
                    status = "completed"
                mantissa = exponent = None
                log10 = -math.inf
                if status != "DIV" and res.residual:
                    mantissa, exponent = table_scientific(res.residual)
                    log10 = float(res.residual.context.log10(res.residual))
                report.rows.append(
                    BenchmarkRow(
                        case.function_id, guess, m.label, "tnfe12", status,
                        res.iterations, res.tnfe, log10, mantissa, exponent,
                    )  # fmt: skip
                )
    return report


def run_tolerance(
    cases: Iterable[BenchmarkCase],
    epsilon="1e-50",
    precision: Precision = Precision(),
    max_iterations: int = 100,
) -> BenchmarkReport:
    if precision.real(epsilon) <= 0:
        raise ValueError("epsilon must be positive")
    report = BenchmarkReport(precision_digits=precision.digits)
    cfg = SolveConfig(precision, Tolerance(epsilon), max_iterations=max_iterations)
    for case in cases:
        for guess in case.guesses:
            for m in case.methods:
                res = solve(m, resolve_function(case.function_id), guess, cfg)
                log10 = float(res.residual.context.log10(res.residual)) if res.residual else -math.inf
                report.rows.append(
                    BenchmarkRow(
                        case.function_id, guess, m.label, "tolerance", _STATUS[res.status],
                        res.iterations, res.tnfe, log10,
                    )  # fmt: skip
                )
    return report


def _csv(report: BenchmarkReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.sorted_rows():
        if r.protocol == "tolerance":
            value = r.iterations
        else:
            value = "" if r.exponent is None else r.exponent
        w.writerow([r.function, r.guess, r.method, r.protocol, value, r.tnfe, r.status, report.precision_digits])
    return buf.getvalue()


def _markdown(report: BenchmarkReport) -> str:
    lines = []
    for protocol, title in (
        ("tnfe12", "|f(x_3)| after three iterations (TNFE-12)"),
        ("tolerance", "iterations (TNFE) until |f| < epsilon"),
    ):
        rows = [r for r in report.sorted_rows() if r.protocol == protocol]
        if not rows:
            continue
        methods = sorted({r.method for r in rows})
        cells = {(r.function, r.guess, r.method): r.cell for r in rows}
        keys = []
        for r in rows:
            if (r.function, r.guess) not in keys:
                keys.append((r.function, r.guess))
        if lines:
            lines.append("")
        lines.append(f"**{title}**, {report.precision_digits} digits")
        lines.append("")
        lines.append("| f | Guess | " + " | ".join(methods) + " |")
        lines.append("|---|---|" + "---|" * len(methods))
        last = None
        for fn, guess in keys:
            label = fn if fn != last else ""
            last = fn
            row = [cells.get((fn, guess, m), "") for m in methods]
            lines.append(f"| {label} | {guess} | " + " | ".join(row) + " |")
    if not lines:
        lines = ["| f | Guess |", "|---|---|"]
    return "\n".join(lines) + "\n"


def emit(report: BenchmarkReport, format: str = "csv") -> str:
    """Deterministic CSV or Markdown rendering (no timestamps)."""
    if format == "csv":
        return _csv(report)
    if format == "markdown":
        return _markdown(report)
    raise ValueError(f"format must be 'csv' or 'markdown', not {format!r}")
