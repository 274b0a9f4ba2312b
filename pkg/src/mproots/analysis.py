"""Convergence-order measurement and error-constant cross-checks.

Errors near a root of an eighth-order method shrink from ``1e-50`` to
``1e-400`` in one step, so every estimator here works on ``mpf`` values and
returns floats only at the end.  Measurements discard iterates that are not
reproduced by a run at twice the working precision; those are rounding
noise rather than convergence data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .expr import ScalarFunction
from .numerics import Precision
from .solvers import (
    DegenerateNodes,
    FamilyParams,
    FixedIterations,
    MethodSpec,
    SolveConfig,
    Tolerance,
    solve,
    step_newton,
)

__all__ = [
    "AsymptoticRatios",
    "CocEstimate",
    "ConstantReport",
    "InsufficientData",
    "MultipleRoot",
    "NotARoot",
    "TaylorCoefficients",
    "ZeroError",
    "asymptotic_ratio",
    "coc",
    "coc_from_iterates",
    "constant_report",
    "default_window",
    "efficiency_index",
    "measure_coc",
    "measure_ratios",
    "predicted_constant",
    "reference_root",
    "taylor_coeffs",
    "trusted_errors",
]


class InsufficientData(ValueError):
    pass


class ZeroError(ValueError):
    """An iterate hit the root exactly; the order is not measurable."""


class NotARoot(ValueError):
    pass


class MultipleRoot(ValueError):
    pass


def _ln_abs(v):
    ctx = getattr(v, "context", mpmath.mp)
    return ctx.ln(abs(ctx.mpf(v)))


def _abs_mpf(v):
    ctx = getattr(v, "context", mpmath.mp)
    return abs(ctx.mpf(v))


def _in_window(e, window) -> bool:
    if window is None:
        return True
    upper, lower = window
    a = _abs_mpf(e)
    ctx = getattr(a, "context", mpmath.mp)
    return ctx.mpf(lower) <= a <= ctx.mpf(upper)


def default_window(precision: Precision) -> tuple:
    """Errors between ``1e-30`` and ``10**(-0.8*digits)``."""
    return ("1e-30", f"1e-{int(0.8 * precision.digits)}")


# -------------------------------------------------------------------- COC


@dataclass(frozen=True)
class CocEstimate:
    value: float
    window: tuple
    stderr: float
    estimates: tuple = ()

    def __str__(self):
        return f"COC = {self.value:.6f} (indices {self.window[0]}..{self.window[1]}, stderr {self.stderr:.2e})"


def coc(errors: Sequence, window: Optional[tuple] = None) -> CocEstimate:
    """Mean of ``ln(e[n+1]/e[n]) / ln(e[n]/e[n-1])``.

    With ``window = (upper, lower)`` only indices whose ``|e[n]|`` lies in
    ``[lower, upper]`` contribute; the neighbours may lie outside it.
    """
    estimates = []
    used = []
    for n in range(1, len(errors) - 1):
        if not _in_window(errors[n], window):
            continue
        prev, cur, nxt = errors[n - 1], errors[n], errors[n + 1]
        if not prev or not cur or not nxt:
            raise ZeroError(f"exact root hit near index {n}")
        lc = _ln_abs(cur)
        denom = lc - _ln_abs(prev)
        if not denom:
            continue
        estimates.append((_ln_abs(nxt) - lc) / denom)
        used.append(n)
    if not estimates:
        raise InsufficientData("need three consecutive nonzero errors with the middle one in the window")
    ctx = getattr(estimates[0], "context", mpmath.mp)
    mean = ctx.fsum(estimates) / len(estimates)
    spread = max(abs(r - mean) for r in estimates)
    return CocEstimate(float(mean), (used[0], used[-1]), float(spread), tuple(float(r) for r in estimates))


def coc_from_iterates(xs: Sequence, window: Optional[tuple] = None) -> CocEstimate:
    """Root-free COC using the increments ``|x[n+1] - x[n]|`` as error proxies."""
    incs = [abs(b - a) for a, b in zip(xs, xs[1:])]
    while incs and not incs[-1]:
        incs.pop()
    return coc(incs, window)


def efficiency_index(order: float, evals: int) -> float:
    """``order ** (1 / evals)``."""
    if order < 1 or evals < 1:
        raise ValueError("order and evals must be at least 1")
    return order ** (1.0 / evals)


# ------------------------------------------------------- asymptotic ratios


@dataclass(frozen=True)
class AsymptoticRatios:
    ratios: tuple
    indices: tuple
    drift: float

    @property
    def last(self):
        return self.ratios[-1]


def asymptotic_ratio(errors: Sequence, order: int, window: Optional[tuple] = None) -> AsymptoticRatios:
    """Ratios ``e[n+1] / e[n]**order`` for in-window ``e[n]``.

    ``drift`` is the largest relative change between consecutive ratios; it
    stays small only when ``order`` is the true order.
    """
    ratios, indices = [], []
    for n in range(len(errors) - 1):
        if not _in_window(errors[n], window):
            continue
        e, e_next = errors[n], errors[n + 1]
        if not e:
            raise ZeroError(f"exact root hit at index {n}")
        ratios.append(e_next / e**order)
        indices.append(n)
    if not ratios:
        raise InsufficientData("no in-window error with a successor")
    drift = 0.0
    for a, b in zip(ratios, ratios[1:]):
        if a:
            drift = max(drift, float(abs(b - a) / abs(a)))
        else:
            drift = math.inf
    return AsymptoticRatios(tuple(ratios), tuple(indices), drift)


# ------------------------------------------------------------ reference roots


def reference_root(f: ScalarFunction, precision: Precision = Precision(), hint=None):
    """High-precision root of ``f`` near ``hint`` (default: the function's own hint).

    Exact roots are used when ``f`` knows them; otherwise Newton's method is
    run at ``max(2000, 2*digits)`` digits until the correction vanishes.
    """
    high = Precision(max(2000, 2 * precision.digits), precision.guard)
    ctx = high.context
    if hint is None and f.exact_root is not None:
        return f.exact_root(ctx)
    start = hint if hint is not None else f.root_hint
    if start is None:
        raise ValueError(f"no root hint for {f.id}")
    g = f.session()
    x = ctx.mpf(start) if isinstance(start, str) else ctx.mpf(start)
    for _ in range(200):
        try:
            x_next = step_newton(g, x).x_next
        except DegenerateNodes:
            break
        if abs(x_next - x) <= abs(x) * ctx.mpf(10) ** (-high.dps + 5):
            x = x_next
            break
        x = x_next
    return x


def _run(method, f, x0, precision, iterations=None, max_iterations=100):
    if iterations is None:
        mode = Tolerance(f"1e-{precision.digits - 20}")
    else:
        mode = FixedIterations(iterations)
    cfg = SolveConfig(precision, mode, max_iterations=max_iterations)
    return solve(method, f.session(), x0, cfg)


def trusted_errors(
    method: MethodSpec,
    f: ScalarFunction,
    x0,
    root,
    precision: Precision = Precision(),
    max_iterations: int = 100,
) -> list:
    """Signed errors ``x_n - root`` that survive a rerun at doubled precision.

    The list stops at the first iterate that disagrees with the doubled run
    by more than ``1e-3`` of its own error, or that is exact.
    """
    primary = _run(method, f, x0, precision, max_iterations=max_iterations)
    check = _run(method, f, x0, precision.scaled(2), iterations=primary.iterations)
    ctx = precision.context
    tol = ctx.mpf("1e-3")
    out = []
    for k, rec in enumerate(primary.trace):
        if k >= len(check.trace):
            break
        e = rec.x - ctx.mpf(root)
        if not e:
            break
        if abs(rec.x - check.trace[k].x) > tol * abs(e):
            break
        out.append(e)
    return out


def measure_coc(
    method: MethodSpec,
    f: ScalarFunction,
    x0,
    precision: Precision = Precision(),
    root=None,
    window: Optional[tuple] = None,
    max_iterations: int = 100,
) -> CocEstimate:
    """Windowed COC of ``method`` on ``f`` from ``x0``.

    Without ``root`` and without a root hint on ``f`` the increments are used
    instead of true errors (allow an extra 0.2 of slack for those).
    """
    window = window or default_window(precision)
    if root is None and (f.root_hint is not None or f.exact_root is not None):
        root = reference_root(f, precision)
    if root is None:
        res = _run(method, f, x0, precision, max_iterations=max_iterations)
        return coc_from_iterates([r.x for r in res.trace], window)
    return coc(trusted_errors(method, f, x0, root, precision, max_iterations), window)


def measure_ratios(
    method: MethodSpec,
    f: ScalarFunction,
    x0,
    order: int,
    precision: Precision = Precision(),
    root=None,
    window: Optional[tuple] = None,
) -> AsymptoticRatios:
    window = window or default_window(precision)
    if root is None:
        root = reference_root(f, precision)
    errors = trusted_errors(method, f, x0, root, precision)
    # a ratio needs a trusted successor
    return asymptotic_ratio(errors, order, window) if len(errors) > 1 else asymptotic_ratio([], order)


# ------------------------------------------------------ Taylor coefficients


@dataclass(frozen=True)
class TaylorCoefficients:
    """``c[h-1] = f^(h)(root) / h!`` for ``h = 1..k``."""

    c: tuple

    def __getitem__(self, h: int):
        return self.c[h - 1]


def _stencil(order: int, nodes: Sequence[int]) -> list:
    """Exact finite-difference weights for the ``order``-th derivative."""
    n = len(nodes)
    rows = [[Fraction(node) ** p for node in nodes] for p in range(n)]
    rhs = [Fraction(math.factorial(order)) if p == order else Fraction(0) for p in range(n)]
    # Gauss-Jordan on the small Vandermonde system
    m = [row[:] + [b] for row, b in zip(rows, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


_NODES = tuple(range(-3, 4))


def taylor_coeffs(f: ScalarFunction, root, k: int = 4) -> TaylorCoefficients:
    """Taylor coefficients at ``root`` by 7-point central differences.

    Step ``h = 10**(-dps/8)``; the result is good to about half the working
    digits for ``k <= 4``.
    """
    if not 1 <= k <= 4:
        raise ValueError("k must be between 1 and 4")
    ctx = root.context
    dps = ctx.dps
    if abs(f(root)) >= ctx.mpf(10) ** (-(dps // 2)):
        raise NotARoot(f"|f(root)| = {ctx.nstr(abs(f(root)), 5)} is not small")
    h = ctx.mpf(10) ** (-(dps // 8))
    samples = {i: f(root + i * h) for i in _NODES if i}
    samples[0] = f(root)
    cs = []
    for order in range(1, k + 1):
        weights = _stencil(order, _NODES)
        acc = ctx.fsum(ctx.mpf(w.numerator) / w.denominator * samples[i] for w, i in zip(weights, _NODES) if w)
        cs.append(acc / h**order / math.factorial(order))
    if abs(cs[0]) < ctx.mpf(10) ** (-(dps // 4)):
        raise MultipleRoot("f'(root) vanishes; the root is not simple")
    return TaylorCoefficients(tuple(cs))


# ----------------------------------------------------------- error constants


def predicted_constant(c: TaylorCoefficients, params: FamilyParams = FamilyParams(), formula: str = "general"):
    """Coefficient of ``e_n^8`` predicted by one of the two printed error expressions.

    ``general`` substitutes the particular-case weight derivatives
    (A''' = 6 alpha, B'' = 2 beta, B''' = 0, Q'' = 2 gamma, P'''' = 0) into the
    general expression; ``particular`` is the four-parameter expression as
    printed.  Neither is assumed correct.
    """
    c1, c2, c3, c4 = c.c[:4]
    ctx = c1.context
    q = lambda v: ctx.mpf(v.numerator) / v.denominator  # noqa: E731
    alpha, beta, gamma = q(params.alpha), q(params.beta), q(params.gamma)
    if formula == "general":
        a3, b2, b3, q2, p4 = 6 * alpha, 2 * beta, 0, 2 * gamma, 0
        lead = c2 / (48 * c1**7) * (2 * c1 * c3 + c2**2 * (b2 - 6))
        body = (
            12 * c1**2 * c3**2 * q2
            + 12 * c1 * c2**2 * c3 * (8 + (b2 - 6) * q2)
            + 4 * c1**2 * c2 * (-6 * c4 + c1 * a3)
            + c2**4 * (108 * q2 + 3 * b2 * (8 + (b2 - 12) * q2) - 8 * (9 + b3 + p4))
        )
        return lead * body
    if formula == "particular":
        lead = c2 / c1**7 * (c1 * c3 + c2**2 * (beta - 3))
        body = (
            alpha * c1**2 * c2
            + (-3 + 2 * beta + (-3 + beta**2) * gamma) * c2**4
            + 2 * (2 + (beta - 3) * gamma) * c1 * c2**2 * c3
            + c1**2 * (gamma * c3**2 - c2 * c4)
        )
        return lead * body
    raise ValueError(f"formula must be 'general' or 'particular', not {formula!r}")


@dataclass(frozen=True)
class ConstantReport:
    function: str
    guess: str
    params: FamilyParams
    measured: object
    general: object
    particular: object

    @staticmethod
    def _rel(pred, meas):
        if not meas:
            return math.inf if pred else 0.0
        return float(abs(pred - meas) / abs(meas))

    @property
    def general_deviation(self) -> float:
        return self._rel(self.general, self.measured)

    @property
    def particular_deviation(self) -> float:
        return self._rel(self.particular, self.measured)

    def format(self) -> str:
        p = self.params
        nstr = lambda v: mpmath.nstr(v, 12)  # noqa: E731
        return "\n".join(
            [
                f"error constant for OM8(alpha={p.alpha}, beta={p.beta}, gamma={p.gamma}, delta={p.delta})"
                f" on {self.function} from {self.guess}",
                f"  measured e[n+1]/e[n]^8 : {nstr(self.measured)}",
                f"  general expression     : {nstr(self.general)}  (rel. deviation {self.general_deviation:.3e})",
                f"  particular expression  : {nstr(self.particular)}  (rel. deviation {self.particular_deviation:.3e})",
            ]
        )


def constant_report(
    f: ScalarFunction,
    x0,
    params: FamilyParams = FamilyParams(),
    precision: Precision = Precision(),
    window: Optional[tuple] = None,
) -> ConstantReport:
    """Measure the asymptotic error constant and set it against both printed formulas."""
    root = reference_root(f, precision)
    ratios = measure_ratios(MethodSpec.om8(params), f, x0, 8, precision, root, window)
    c = taylor_coeffs(f.session(), root, 4)
    return ConstantReport(
        f.id,
        str(x0),
        params,
        ratios.last,
        predicted_constant(c, params, "general"),
        predicted_constant(c, params, "particular"),
    )
