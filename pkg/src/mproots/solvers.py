"""Iteration kernels and the solve driver.

Implemented schemes, all for simple roots:

* ``Newton``     -- x - f/f'                                   (f, f')
* ``Steffensen`` -- x - f^2 / (f(x + f) - f)                    (f, f(x+f))
* ``SM7``        -- three-step seventh-order scheme with weights G, H
* ``OM8``        -- optimal eighth-order three-step family with weights
                    A(t1), B(t2) and P(t2) + Q(t3) + R(t4)
* ``OM8DF``      -- OM8 with f'(x) replaced by f[w, x], w = x + a*f(x)^m

The OM8 step reads::

    y      = x - A(t1) * f(x)/f'(x)
    z      = y - B(t2) * f(y)/f[x, y]
    x_next = z - (P(t2) + Q(t3) + R(t4)) * f(z)/f[y, z]

with ``t1 = f(x)/f'(x)``, ``t2 = f(y)/f(x)``, ``t3 = f(z)/f(y)`` and
``t4 = f(z)/f(x)``.  Weight functions are polynomials with exact rational
coefficients, which turns the eighth-order conditions into coefficient
identities (see :func:`validate_weights`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence, Union

from . import numerics as nx
from .expr import ScalarFunction
from .numerics import APReal, NumericError, Precision

__all__ = [
    "ConditionViolation",
    "DegenerateDifference",
    "DegenerateNodes",
    "DerivativeZero",
    "FamilyParams",
    "FixedIterations",
    "InvalidWeights",
    "IterationRecord",
    "MethodKind",
    "MethodSpec",
    "SolveConfig",
    "SolveResult",
    "Status",
    "Step",
    "StepRatios",
    "Tolerance",
    "WeightFamily",
    "WeightPolynomial",
    "divided_difference",
    "solve",
    "step_newton",
    "step_om8",
    "step_om8_df",
    "step_sm7",
    "step_steffensen",
    "validate_sm7_weights",
    "validate_weights",
    "weights_from_params",
]


class DerivativeZero(NumericError):
    pass


class DegenerateNodes(NumericError):
    """Two interpolation nodes coincide at working precision."""


class DegenerateDifference(DegenerateNodes):
    """The derivative-free slope f[w, x] is unusable."""


class InvalidWeights(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, str)):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    if hasattr(v, "man"):  # mpf: exact binary value man * 2**exp
        return Fraction(int(v.man)) * Fraction(2) ** int(v.exp) if v else Fraction(0)
    raise TypeError(f"cannot convert {v!r} to an exact rational")


# ---------------------------------------------------------------- weights


@dataclass(frozen=True)
class WeightPolynomial:
    """``c0 + c1*t + c2*t^2 + ...`` with exact rational coefficients."""

    coeffs: tuple

    def __post_init__(self):
        cs = [_frac(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs) or (Fraction(0),))
        object.__setattr__(self, "_cache", {})

    @classmethod
    def of(cls, *coeffs) -> "WeightPolynomial":
        return cls(tuple(coeffs))

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if k < len(self.coeffs) else Fraction(0)

    def derivative_at_zero(self, k: int) -> Fraction:
        return math.factorial(k) * self.coefficient(k)

    def with_coefficient(self, k: int, value) -> "WeightPolynomial":
        cs = list(self.coeffs) + [Fraction(0)] * max(0, k + 1 - len(self.coeffs))
        cs[k] = _frac(value)
        return WeightPolynomial(tuple(cs))

    def _coeffs_in(self, ctx):
        cs = self._cache.get(ctx)
        if cs is None:
            cs = [ctx.mpf(c.numerator) / c.denominator for c in self.coeffs]
            self._cache[ctx] = cs
        return cs

    def __call__(self, t):
        ctx = getattr(t, "context", None)
        cs = self._coeffs_in(ctx) if ctx is not None else [float(c) for c in self.coeffs]
        acc = cs[-1]
        for c in reversed(cs[:-1]):
            acc = acc * t + c
        if len(cs) == 1:
            acc = acc + 0 * t
        return acc

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0 and len(self.coeffs) > 1:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            if k and c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class WeightFamily:
    A: WeightPolynomial
    B: WeightPolynomial
    P: WeightPolynomial
    Q: WeightPolynomial
    R: WeightPolynomial


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of the four-parameter particular case; defaults are the tabulated method."""

    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(3)
    gamma: Fraction = Fraction(0)
    delta: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, _frac(getattr(self, name)))


def weights_from_params(p: FamilyParams = FamilyParams()) -> WeightFamily:
    """A = 1 + a t^3, B = 1 + t + b t^2, P = t^2 + 2(b-1) t^3, Q = g t^2, R = 1 + 2t + d t^2."""
    W = WeightPolynomial.of
    return WeightFamily(
        A=W(1, 0, 0, p.alpha),
        B=W(1, 1, p.beta),
        P=W(0, 0, 1, 2 * (p.beta - 1)),
        Q=W(0, 0, p.gamma),
        R=W(1, 2, p.delta),
    )


@dataclass(frozen=True)
class ConditionViolation:
    condition: str
    detail: str

    def __str__(self):
        return f"{self.condition} violated: {self.detail}"


def _require(out, condition, lhs, rhs, what):
    if lhs != rhs:
        out.append(ConditionViolation(condition, f"{what} = {lhs}, required {rhs}"))


def validate_weights(w: WeightFamily) -> list:
    """Check the eighth-order conditions; an empty list means the family is valid."""
    A, B, P, Q, R = w.A, w.B, w.P, w.Q, w.R
    d = lambda poly, k: poly.derivative_at_zero(k)  # noqa: E731
    out: list = []
    _require(out, "A(0)=1", d(A, 0), 1, "A(0)")
    _require(out, "A'(0)=0", d(A, 1), 0, "A'(0)")
    _require(out, "A''(0)=0", d(A, 2), 0, "A''(0)")
    _require(out, "B(0)=1", d(B, 0), 1, "B(0)")
    _require(out, "B'(0)=1", d(B, 1), 1, "B'(0)")
    _require(out, "R(0)=1-P(0)-Q(0)", d(R, 0), 1 - d(P, 0) - d(Q, 0), "R(0)")
    _require(out, "P'(0)=0", d(P, 1), 0, "P'(0)")
    _require(out, "P''(0)=2", d(P, 2), 2, "P''(0)")
    _require(out, "P'''(0)=6B''(0)-12", d(P, 3), 6 * d(B, 2) - 12, "P'''(0)")
    _require(out, "Q'(0)=0", d(Q, 1), 0, "Q'(0)")
    _require(out, "R'(0)=2", d(R, 1), 2, "R'(0)")
    return out


DEFAULT_G = WeightPolynomial.of(1, 1)
DEFAULT_H = WeightPolynomial.of(1, 0, 1)


def validate_sm7_weights(G: WeightPolynomial, H: WeightPolynomial) -> list:
    out: list = []
    _require(out, "G(0)=1", G.derivative_at_zero(0), 1, "G(0)")
    _require(out, "G'(0)=1", G.derivative_at_zero(1), 1, "G'(0)")
    _require(out, "H(0)=1", H.derivative_at_zero(0), 1, "H(0)")
    _require(out, "H'(0)=0", H.derivative_at_zero(1), 0, "H'(0)")
    _require(out, "H''(0)=2", H.derivative_at_zero(2), 2, "H''(0)")
    return out


# --------------------------------------------------------------- methods


class MethodKind(str, enum.Enum):
    NEWTON = "Newton"
    STEFFENSEN = "Steffensen"
    SM7 = "SM7"
    OM8 = "OM8"
    OM8DF = "OM8DF"


_EVALS = {
    MethodKind.NEWTON: 2,
    MethodKind.STEFFENSEN: 2,
    MethodKind.SM7: 4,
    MethodKind.OM8: 4,
    MethodKind.OM8DF: 4,
}


@dataclass(frozen=True)
class MethodSpec:
    kind: MethodKind
    weights: Optional[WeightFamily] = None
    gh: Optional[tuple] = None
    shift_exponent: int = 3
    shift_scale: Fraction = Fraction(1)
    checked: bool = True

    @classmethod
    def newton(cls) -> "MethodSpec":
        return cls(MethodKind.NEWTON)

    @classmethod
    def steffensen(cls) -> "MethodSpec":
        return cls(MethodKind.STEFFENSEN)

    @classmethod
    def sm7(cls, G: WeightPolynomial = DEFAULT_G, H: WeightPolynomial = DEFAULT_H) -> "MethodSpec":
        return cls(MethodKind.SM7, gh=(G, H))

    @classmethod
    def om8(cls, params: FamilyParams = FamilyParams(), weights=None) -> "MethodSpec":
        return cls(MethodKind.OM8, weights=weights or weights_from_params(params))

    @classmethod
    def om8df(
        cls, shift_exponent: int = 3, shift_scale=1, params: FamilyParams = FamilyParams(), weights=None
    ) -> "MethodSpec":
        return cls(
            MethodKind.OM8DF,
            weights=weights or weights_from_params(params),
            shift_exponent=shift_exponent,
            shift_scale=_frac(shift_scale),
        )

    def unchecked(self) -> "MethodSpec":
        """Same method with weight validation disabled (arbitrary callables allowed)."""
        return replace(self, checked=False)

    @property
    def label(self) -> str:
        return self.kind.value

    @property
    def evals_per_iteration(self) -> int:
        return _EVALS[self.kind]

    def validate(self) -> None:
        """Raise :class:`InvalidWeights` (or ``ValueError``) for unusable configurations."""
        if self.kind in (MethodKind.OM8, MethodKind.OM8DF):
            if self.weights is None:
                raise ValueError(f"{self.label} requires a weight family")
            if self.checked:
                violations = validate_weights(self.weights)
                if violations:
                    raise InvalidWeights(violations)
        if self.kind is MethodKind.OM8DF:
            if self.shift_exponent < 1:
                raise ValueError("shift exponent must be a positive integer")
            if self.shift_scale == 0:
                raise ValueError("shift scale must be nonzero")
        if self.kind is MethodKind.SM7:
            G, H = self.gh or (DEFAULT_G, DEFAULT_H)
            if self.checked:
                violations = validate_sm7_weights(G, H)
                if violations:
                    raise InvalidWeights(violations)


# ----------------------------------------------------------------- kernels


class StepRatios(NamedTuple):
    t1: APReal
    t2: APReal
    t3: APReal
    t4: APReal


class Step(NamedTuple):
    x_next: APReal
    f_next: Optional[APReal] = None  # known when a sub-step landed on a root
    ratios: Optional[StepRatios] = None


def divided_difference(a: APReal, fa: APReal, b: APReal, fb: APReal) -> APReal:
    """``f[a, b] = (fa - fb) / (a - b)``."""
    if a == b:
        raise DegenerateNodes("coincident divided-difference nodes")
    return (fa - fb) / (a - b)


def _slope(a, fa, b, fb):
    s = divided_difference(a, fa, b, fb)
    if not s:
        raise DegenerateNodes("vanishing divided difference")
    return s


def _om8_tail(f, x, fx, slope, w: WeightFamily) -> Step:
    t1 = fx / slope
    y = nx.check_magnitude(x - w.A(t1) * t1)
    if y == x:
        raise DegenerateNodes("y == x at working precision")
    fy = f(y)
    if not fy:
        return Step(y, fy)
    t2 = fy / fx
    z = nx.check_magnitude(y - w.B(t2) * fy / _slope(x, fx, y, fy))
    if z == y:  # correction below working precision: y is as good as it gets
        return Step(y, fy)
    fz = f(z)
    if not fz:
        return Step(z, fz)
    t3 = fz / fy
    t4 = fz / fx
    weight = w.P(t2) + w.Q(t3) + w.R(t4)
    x_next = nx.check_magnitude(z - weight * fz / _slope(y, fy, z, fz))
    return Step(x_next, None, StepRatios(t1, t2, t3, t4))


def step_om8(f: ScalarFunction, x: APReal, w: WeightFamily, fx: Optional[APReal] = None) -> Step:
    if fx is None:
        fx = f(x)
    if not fx:
        return Step(x, fx)
    dfx = f.derivative(x)
    if not dfx:
        raise DerivativeZero(f"f'(x) = 0 at x = {x}")
    return _om8_tail(f, x, fx, dfx, w)


def step_om8_df(
    f: ScalarFunction,
    x: APReal,
    w: WeightFamily,
    m: int = 3,
    a=1,
    fx: Optional[APReal] = None,
) -> Step:
    if fx is None:
        fx = f(x)
    if not fx:
        return Step(x, fx)
    ctx = x.context
    scale = ctx.mpf(a.numerator) / a.denominator if isinstance(a, Fraction) else ctx.mpf(a)
    node = nx.check_magnitude(x + scale * fx**m)
    if node == x:
        raise DegenerateDifference("shifted node w == x at working precision")
    fw = f(node)
    slope = (fw - fx) / (node - x)
    if not slope:
        raise DegenerateDifference("f[w, x] = 0")
    return _om8_tail(f, x, fx, slope, w)


def step_sm7(
    f: ScalarFunction,
    x: APReal,
    G: WeightPolynomial = DEFAULT_G,
    H: WeightPolynomial = DEFAULT_H,
    fx: Optional[APReal] = None,
) -> Step:
    if fx is None:
        fx = f(x)
    if not fx:
        return Step(x, fx)
    dfx = f.derivative(x)
    if not dfx:
        raise DerivativeZero(f"f'(x) = 0 at x = {x}")
    y = nx.check_magnitude(x - fx / dfx)
    if y == x:
        raise DegenerateNodes("y == x at working precision")
    fy = f(y)
    if not fy:
        return Step(y, fy)
    t = fy / fx
    z = nx.check_magnitude(y - G(t) * fy / _slope(x, fx, y, fy))
    if z == y:
        return Step(y, fy)
    fz = f(z)
    if not fz:
        return Step(z, fz)
    return Step(nx.check_magnitude(z - H(t) * fz / _slope(y, fy, z, fz)))


def step_newton(f: ScalarFunction, x: APReal, fx: Optional[APReal] = None) -> Step:
    if fx is None:
        fx = f(x)
    if not fx:
        return Step(x, fx)
    dfx = f.derivative(x)
    if not dfx:
        raise DerivativeZero(f"f'(x) = 0 at x = {x}")
    x_next = nx.check_magnitude(x - fx / dfx)
    if x_next == x:
        raise DegenerateNodes("Newton correction below working precision")
    return Step(x_next)


def step_steffensen(f: ScalarFunction, x: APReal, fx: Optional[APReal] = None) -> Step:
    if fx is None:
        fx = f(x)
    if not fx:
        return Step(x, fx)
    node = nx.check_magnitude(x + fx)
    if node == x:
        raise DegenerateDifference("x + f(x) == x at working precision")
    denom = f(node) - fx
    if not denom:
        raise DegenerateDifference("f(x + f(x)) == f(x)")
    return Step(nx.check_magnitude(x - fx * fx / denom))


def kernel_for(method: MethodSpec) -> Callable:
    """Return ``step(f, x, fx) -> Step`` for ``method``."""
    kind = method.kind
    if kind is MethodKind.NEWTON:
        return lambda f, x, fx: step_newton(f, x, fx)
    if kind is MethodKind.STEFFENSEN:
        return lambda f, x, fx: step_steffensen(f, x, fx)
    if kind is MethodKind.SM7:
        G, H = method.gh or (DEFAULT_G, DEFAULT_H)
        return lambda f, x, fx: step_sm7(f, x, G, H, fx)
    if kind is MethodKind.OM8:
        w = method.weights
        return lambda f, x, fx: step_om8(f, x, w, fx)
    w, m, a = method.weights, method.shift_exponent, method.shift_scale
    return lambda f, x, fx: step_om8_df(f, x, w, m, a, fx)


# ------------------------------------------------------------------ driver


@dataclass(frozen=True)
class FixedIterations:
    count: int = 3


@dataclass(frozen=True)
class Tolerance:
    epsilon: Union[str, Fraction] = "1e-50"


@dataclass(frozen=True)
class SolveConfig:
    precision: Precision = field(default_factory=Precision)
    mode: Union[FixedIterations, Tolerance] = field(default_factory=Tolerance)
    max_iterations: int = 100
    divergence_bound: Union[str, Fraction] = "1e100"
    # residual threshold used to accept a stalled iteration in FixedIterations mode
    epsilon: Union[str, Fraction] = "1e-50"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if isinstance(self.mode, FixedIterations) and self.mode.count < 0:
            raise ValueError("iteration count must be non-negative")

    @property
    def tolerance(self):
        if isinstance(self.mode, Tolerance):
            return self.mode.epsilon
        return self.epsilon


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGED = "diverged"
    DOMAIN_FAILURE = "domain_failure"


class IterationRecord(NamedTuple):
    n: int
    x: APReal
    abs_f: APReal
    ratios: Optional[StepRatios] = None


@dataclass
class SolveResult:
    status: Status
    root: APReal
    trace: list
    iterations: int
    tnfe: int
    message: str = ""

    @property
    def residual(self) -> APReal:
        return self.trace[-1].abs_f

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def solve(
    method: MethodSpec,
    f: ScalarFunction,
    x0,
    cfg: SolveConfig = SolveConfig(),
) -> SolveResult:
    """Iterate ``method`` on ``f`` from ``x0``.

    Numerical trouble is reported through :class:`Status`; only configuration
    errors raise.  ``f(x_{n+1})`` evaluated for the stopping test is reused as
    the next step's ``f(x_n)``, so the evaluation counters grow by
    ``evals_per_iteration`` per step plus one for the final residual.
    """
    method.validate()
    step = kernel_for(method)
    prec = cfg.precision
    eps = prec.real(cfg.tolerance)
    bound = prec.real(cfg.divergence_bound)
    per_iter = method.evals_per_iteration
    tolerance_mode = isinstance(cfg.mode, Tolerance)
    limit = cfg.max_iterations if tolerance_mode else cfg.mode.count

    x = prec.real(x0)
    trace: list = []

    def result(status, n, message=""):
        return SolveResult(status, x, trace, n, per_iter * n, message)

    try:
        fx = f(x)
    except nx.Overflow as exc:
        return SolveResult(Status.DIVERGED, x, [IterationRecord(0, x, prec.real("inf"))], 0, 0, str(exc))
    except NumericError as exc:
        return SolveResult(
            Status.DOMAIN_FAILURE, x, [IterationRecord(0, x, prec.real("nan"))], 0, 0, str(exc)
        )
    trace.append(IterationRecord(0, x, abs(fx)))
    if tolerance_mode and abs(fx) < eps:
        return result(Status.CONVERGED, 0)

    n = 0
    while n < limit:
        if not fx:
            return result(Status.CONVERGED, n, "exact root")
        try:
            s = step(f, x, fx)
            fx_next = s.f_next if s.f_next is not None else f(s.x_next)
        except DegenerateNodes as exc:
            status = Status.CONVERGED if abs(fx) < eps else Status.DOMAIN_FAILURE
            return result(status, n, str(exc))
        except DerivativeZero as exc:
            status = Status.CONVERGED if abs(fx) < eps else Status.DOMAIN_FAILURE
            return result(status, n, str(exc))
        except nx.Overflow as exc:
            return result(Status.DIVERGED, n, str(exc))
        except NumericError as exc:
            return result(Status.DOMAIN_FAILURE, n, str(exc))
        n += 1
        x, fx = s.x_next, fx_next
        trace.append(IterationRecord(n, x, abs(fx), s.ratios))
        if abs(x) > bound or abs(fx) > bound:
            return result(Status.DIVERGED, n, "iterate left the divergence bound")
        if tolerance_mode and abs(fx) < eps:
            return result(Status.CONVERGED, n)

    if tolerance_mode:
        return result(Status.MAX_ITERATIONS, n)
    return result(Status.CONVERGED if abs(fx) < eps else Status.MAX_ITERATIONS, n)


def parse_methods(names: Sequence[str]) -> list:
    """Default-configured methods from lowercase names (``om8``, ``sm7``, ...)."""
    table = {
        "newton": MethodSpec.newton,
        "steffensen": MethodSpec.steffensen,
        "sm7": MethodSpec.sm7,
        "om8": MethodSpec.om8,
        "om8df": MethodSpec.om8df,
    }
    out = []
    for name in names:
        key = name.strip().lower()
        if key not in table:
            raise ValueError(f"unknown method {name!r}; choose from {sorted(table)}")
        out.append(table[key]())
    return out
