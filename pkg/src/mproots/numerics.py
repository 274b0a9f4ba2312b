"""Arbitrary-precision real arithmetic facade.

Every real quantity in the package is an ``mpf`` belonging to a private
``mpmath`` context whose working precision is ``digits + guard`` decimal
digits.  Contexts are shared per precision and never mutated after creation,
so values carry their precision with them and no global state is touched.

The helpers here convert the silent failure modes of ``mpmath`` (complex
results from ``ln``/``pow`` of negatives, unbounded exponents) into
exceptions at the operation boundary.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from mpmath.ctx_mp import MPContext

__all__ = [
    "APReal",
    "DivisionByZero",
    "DomainError",
    "NumericError",
    "Overflow",
    "Precision",
    "ap_arith",
    "ap_transcendental",
    "check_magnitude",
    "context_for",
    "cos",
    "exp",
    "ln",
    "log10_abs",
    "pi",
    "sin",
    "to_real",
]

# Any mpf created through this module; kept as an alias for annotations.
APReal = object

OVERFLOW_EXP10 = 10**6
# |x| > 10**(10**6)  <=>  mag(x) > ~3.32e6 bits
_OVERFLOW_BITS = int(OVERFLOW_EXP10 * math.log2(10)) + 1
_EXP_ARG_LIMIT = OVERFLOW_EXP10 * math.log(10)


class NumericError(ArithmeticError):
    """Base class for arithmetic failures raised by the facade."""


class DivisionByZero(NumericError, ZeroDivisionError):
    pass


class DomainError(NumericError, ValueError):
    pass


class Overflow(NumericError, OverflowError):
    pass


@functools.lru_cache(maxsize=None)
def context_for(dps: int) -> MPContext:
    """Return the shared, never-mutated context working at ``dps`` digits."""
    ctx = MPContext()
    ctx.dps = dps
    return ctx


@dataclass(frozen=True)
class Precision:
    """Decimal working precision: ``digits`` significant plus ``guard`` hidden."""

    digits: int = 1000
    guard: int = 20

    def __post_init__(self):
        if self.digits < 50:
            raise ValueError(f"digits must be >= 50, got {self.digits}")
        if self.guard < 0:
            raise ValueError(f"guard must be >= 0, got {self.guard}")

    @property
    def dps(self) -> int:
        return self.digits + self.guard

    @property
    def context(self) -> MPContext:
        return context_for(self.dps)

    def real(self, value) -> APReal:
        return to_real(value, self)

    def scaled(self, factor: int) -> "Precision":
        return Precision(self.digits * factor, self.guard)


Number = Union[str, int, float, Fraction, APReal]


def to_real(value: Number, precision: Precision) -> APReal:
    """Convert ``value`` into an mpf at ``precision``.

    Decimal strings and fractions are rounded once, directly at the working
    precision; there is no detour through machine floats.
    """
    ctx = precision.context
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            return to_real(Fraction(text), precision)
        try:
            return ctx.mpf(text)
        except ValueError as exc:
            raise DomainError(f"not a real number: {value!r}") from exc
    return ctx.mpf(value)


def check_magnitude(x: APReal) -> APReal:
    """Raise :class:`Overflow` if ``|x|`` exceeds ``10**(10**6)`` or is not finite."""
    ctx = x.context
    if not ctx.isfinite(x):
        raise Overflow(f"non-finite value {x}")
    if x and ctx.mag(x) > _OVERFLOW_BITS:
        raise Overflow("magnitude exceeds 10^(10^6)")
    return x


def _is_integer(x) -> bool:
    if isinstance(x, int):
        return True
    return x.context.isint(x)


def ap_arith(a: APReal, b: APReal, op: str) -> APReal:
    if op == "add":
        r = a + b
    elif op == "sub":
        r = a - b
    elif op == "mul":
        r = a * b
    elif op == "div":
        if not b:
            raise DivisionByZero("division by zero")
        r = a / b
    elif op == "pow":
        if _is_integer(b):
            if not a and b < 0:
                raise DivisionByZero("zero raised to a negative power")
            r = a ** int(b)
        else:
            if a <= 0:
                raise DomainError(f"non-integer power of non-positive base {a}")
            r = a**b
    else:
        raise ValueError(f"unknown operation {op!r}")
    return check_magnitude(r)


def exp(x: APReal) -> APReal:
    if x > _EXP_ARG_LIMIT:
        raise Overflow("exp argument too large")
    return x.context.exp(x)


def ln(x: APReal) -> APReal:
    if x <= 0:
        raise DomainError(f"ln of non-positive value {x}")
    return x.context.ln(x)


def _check_trig_arg(x: APReal) -> None:
    check_magnitude(x)


def sin(x: APReal) -> APReal:
    _check_trig_arg(x)
    return x.context.sin(x)


def cos(x: APReal) -> APReal:
    _check_trig_arg(x)
    return x.context.cos(x)


_TRANSCENDENTALS = {"exp": exp, "sin": sin, "cos": cos, "ln": ln}


def ap_transcendental(x: APReal, fn: str) -> APReal:
    try:
        impl = _TRANSCENDENTALS[fn]
    except KeyError:
        raise ValueError(f"unknown function {fn!r}") from None
    return impl(x)


def pi(ctx: MPContext) -> APReal:
    return +ctx.pi


def log10_abs(x: APReal) -> float:
    """``log10|x|`` as a float; valid far outside the double exponent range."""
    if not x:
        return -math.inf
    return float(x.context.log10(abs(x)))
