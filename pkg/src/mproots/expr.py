"""Expression language, forward-mode dual numbers and the builtin test functions.

Grammar (whitespace insignificant, names lowercase)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := number | 'x' | 'pi' | 'e' | name '(' expr ')' | '(' expr ')'

so ``-x^2`` is ``-(x^2)``, ``2^3^2`` is ``2^(3^2)`` and ``2^-1`` is allowed.
Implicit multiplication is rejected: write ``10*x``, not ``10x``.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Callable, Optional, Union

from . import numerics as nx
from .numerics import APReal, DivisionByZero, DomainError

__all__ = [
    "BUILTINS",
    "BinOp",
    "Call",
    "Const",
    "DualNumber",
    "ExpressionSyntaxError",
    "Neg",
    "Num",
    "ScalarFunction",
    "UnknownBuiltin",
    "UnknownIdentifier",
    "Var",
    "builtin",
    "eval_dual",
    "evaluate",
    "from_expression",
    "parse",
    "resolve_function",
]

FUNCTIONS = ("sin", "cos", "exp", "ln", "abs")
CONSTANTS = ("pi", "e")


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, text: str, offset: int):
        self.text = text
        self.offset = offset
        super().__init__(f"{message} at byte offset {offset}: {text!r}")


class UnknownIdentifier(ExpressionSyntaxError):
    pass


class UnknownBuiltin(KeyError):
    pass


# --------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    text: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str = "x"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Num, Const, Var, Neg, BinOp, Call]

# ------------------------------------------------------------------ parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(
                f"unexpected character {text[bad]!r}", text, _byte_offset(text, bad)
            )
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok, cls=ExpressionSyntaxError):
        raise cls(message, self.text, _byte_offset(self.text, tok[2]))

    def expect(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.fail(f"expected {op!r}, found {tok[1] or 'end of input'!r}", tok)

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(f"unexpected token {tok[1]!r}", tok)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        kind, value, _ = tok
        if kind == "num":
            return Num(value)
        if kind == "name":
            if value == "x":
                return Var()
            if value in CONSTANTS:
                return Const(value)
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            self.fail(f"unknown identifier {value!r}", tok, UnknownIdentifier)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"unexpected {value or 'end of input'!r}", tok)


def parse(text: str) -> Node:
    """Parse ``text`` into an expression tree in the single variable ``x``."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", text, 0)
    return _Parser(text).parse()


# -------------------------------------------------------------- evaluation


@functools.lru_cache(maxsize=4096)
def _literal(text: str, ctx) -> APReal:
    return ctx.mpf(text)


def _constant(name: str, ctx) -> APReal:
    return +ctx.pi if name == "pi" else +ctx.e


def _pow(a, b):
    return nx.ap_arith(a, b, "pow")


def _div(a, b):
    return nx.ap_arith(a, b, "div")


_PLAIN_CALLS = {
    "sin": nx.sin,
    "cos": nx.cos,
    "exp": nx.exp,
    "ln": nx.ln,
    "abs": abs,
}


def evaluate(node: Node, x: APReal) -> APReal:
    """Evaluate ``node`` at ``x`` in the precision of ``x``."""
    ctx = x.context
    if isinstance(node, Var):
        return x
    if isinstance(node, Num):
        return _literal(node.text, ctx)
    if isinstance(node, Const):
        return _constant(node.name, ctx)
    if isinstance(node, Neg):
        return -evaluate(node.operand, x)
    if isinstance(node, BinOp):
        a = evaluate(node.left, x)
        b = evaluate(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return _div(a, b)
        return _pow(a, b)
    if isinstance(node, Call):
        return _PLAIN_CALLS[node.name](evaluate(node.arg, x))
    raise TypeError(f"not an expression node: {node!r}")


class DualNumber:
    """``primal + tangent*eps`` with ``eps**2 == 0``."""

    __slots__ = ("primal", "tangent")

    def __init__(self, primal, tangent):
        self.primal = primal
        self.tangent = tangent

    def __repr__(self):
        return f"DualNumber({self.primal}, {self.tangent})"

    def __add__(self, other):
        return DualNumber(self.primal + other.primal, self.tangent + other.tangent)

    def __sub__(self, other):
        return DualNumber(self.primal - other.primal, self.tangent - other.tangent)

    def __mul__(self, other):
        return DualNumber(
            self.primal * other.primal,
            self.tangent * other.primal + self.primal * other.tangent,
        )

    def __truediv__(self, other):
        q = _div(self.primal, other.primal)
        return DualNumber(q, (self.tangent - q * other.tangent) / other.primal)

    def __neg__(self):
        return DualNumber(-self.primal, -self.tangent)

    def __pow__(self, other):
        a, da = self.primal, self.tangent
        b, db = other.primal, other.tangent
        value = _pow(a, b)
        if not db and nx._is_integer(b):
            n = int(b)
            if n == 0:
                return DualNumber(value, 0 * da)
            return DualNumber(value, n * _pow(a, b - 1) * da)
        # general case needs a > 0, already enforced by _pow
        return DualNumber(value, value * (db * nx.ln(a) + b * da / a))

    def sin(self):
        return DualNumber(nx.sin(self.primal), nx.cos(self.primal) * self.tangent)

    def cos(self):
        return DualNumber(nx.cos(self.primal), -nx.sin(self.primal) * self.tangent)

    def exp(self):
        v = nx.exp(self.primal)
        return DualNumber(v, v * self.tangent)

    def ln(self):
        return DualNumber(nx.ln(self.primal), self.tangent / self.primal)

    def abs(self):
        p = self.primal
        sign = (p > 0) - (p < 0)
        return DualNumber(abs(p), sign * self.tangent)


def _eval_dual(node: Node, x: DualNumber, ctx) -> DualNumber:
    if isinstance(node, Var):
        return x
    if isinstance(node, Num):
        return DualNumber(_literal(node.text, ctx), ctx.zero)
    if isinstance(node, Const):
        return DualNumber(_constant(node.name, ctx), ctx.zero)
    if isinstance(node, Neg):
        return -_eval_dual(node.operand, x, ctx)
    if isinstance(node, BinOp):
        a = _eval_dual(node.left, x, ctx)
        b = _eval_dual(node.right, x, ctx)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return a**b
    if isinstance(node, Call):
        return getattr(_eval_dual(node.arg, x, ctx), node.name)()
    raise TypeError(f"not an expression node: {node!r}")


def eval_dual(node: Node, x: APReal) -> tuple[APReal, APReal]:
    """Return ``(f(x), f'(x))`` by forward-mode differentiation."""
    ctx = x.context
    d = _eval_dual(node, DualNumber(x, ctx.one), ctx)
    return d.primal, ctx.mpf(d.tangent)


# ----------------------------------------------------------- scalar functions


class ScalarFunction:
    """A real function with an optional derivative channel and call counters.

    Each instance is one counting session; use :meth:`session` to obtain a
    copy with fresh counters for an independent solve.
    """

    def __init__(
        self,
        id: str,
        func: Callable[[APReal], APReal],
        deriv: Optional[Callable[[APReal], APReal]] = None,
        *,
        text: Optional[str] = None,
        root_hint: Optional[str] = None,
        exact_root: Optional[Callable] = None,
    ):
        self.id = id
        self._func = func
        self._deriv = deriv
        self.text = text
        self.root_hint = root_hint
        self.exact_root = exact_root
        self.eval_count = 0
        self.deriv_count = 0

    def __repr__(self):
        return f"ScalarFunction({self.id!r})"

    @property
    def has_derivative(self) -> bool:
        return self._deriv is not None

    @property
    def evaluations(self) -> int:
        return self.eval_count + self.deriv_count

    def __call__(self, x: APReal) -> APReal:
        self.eval_count += 1
        return _guarded(self._func, x)

    def derivative(self, x: APReal) -> APReal:
        if self._deriv is None:
            raise TypeError(f"{self.id} has no derivative channel")
        self.deriv_count += 1
        return _guarded(self._deriv, x)

    def session(self) -> "ScalarFunction":
        return ScalarFunction(
            self.id,
            self._func,
            self._deriv,
            text=self.text,
            root_hint=self.root_hint,
            exact_root=self.exact_root,
        )


def _guarded(fn, x):
    try:
        value = fn(x)
    except nx.NumericError:
        raise
    except ZeroDivisionError as exc:
        raise DivisionByZero(str(exc) or "division by zero") from exc
    return nx.check_magnitude(value)


def from_expression(text: str, id: Optional[str] = None) -> ScalarFunction:
    ast = parse(text)
    return ScalarFunction(
        id or text,
        lambda x: evaluate(ast, x),
        lambda x: eval_dual(ast, x)[1],
        text=text,
    )


# ----------------------------------------------------------------- builtins


@functools.lru_cache(maxsize=None)
def _half_sqrt2(ctx) -> APReal:
    return ctx.sqrt(2) / 2


def _f1(x):
    return 10 * x * nx.exp(-x * x) - 1


def _d1(x):
    return 10 * nx.exp(-x * x) * (1 - 2 * x * x)


def _f2(x):
    x2 = x * x
    return x2 * x2 * x + x2 * x2 + 4 * x2 - 15


def _d2(x):
    x2 = x * x
    return 5 * x2 * x2 + 4 * x2 * x + 8 * x


def _f3(x):
    s = nx.sin(x)
    return x * nx.exp(x * x) - s * s + 3 * nx.cos(x) + 5


def _d3(x):
    s, c = nx.sin(x), nx.cos(x)
    return nx.exp(x * x) * (1 + 2 * x * x) - 2 * s * c - 3 * s


def _f4_guard(x):
    ctx = x.context
    if abs(x) < ctx.mpf(10) ** (-(ctx.dps // 4)):
        raise DomainError("sin(pi/x^2) undefined near x = 0")


def _f4(x):
    _f4_guard(x)
    x2 = x * x
    return x2 * x2 + nx.sin(x.context.pi / x2) - 5


def _d4(x):
    _f4_guard(x)
    pi = x.context.pi
    x2 = x * x
    return 4 * x2 * x - 2 * pi / (x2 * x) * nx.cos(pi / x2)


def _f5(x):
    return x * x * nx.exp(x) - nx.sin(x)


def _d5(x):
    return (2 * x + x * x) * nx.exp(x) - nx.cos(x)


def _f6(x):
    u = nx.sin(x) - _half_sqrt2(x.context)
    return u * u * (x + 1)


def _d6(x):
    u = nx.sin(x) - _half_sqrt2(x.context)
    return 2 * u * nx.cos(x) * (x + 1) + u * u


def _f7(x):
    return nx.sin(3 * x) + x * nx.cos(x)


def _d7(x):
    return 3 * nx.cos(3 * x) + nx.cos(x) - x * nx.sin(x)


@dataclass(frozen=True)
class _Builtin:
    func: Callable
    deriv: Callable
    text: str
    root_hint: str
    exact_root: Optional[Callable] = None


BUILTINS: dict[str, _Builtin] = {
    "f1": _Builtin(_f1, _d1, "10*x*exp(-x^2)-1", "1.67963"),
    "f2": _Builtin(_f2, _d2, "x^5+x^4+4*x^2-15", "1.34742"),
    "f3": _Builtin(_f3, _d3, "x*exp(x^2)-sin(x)^2+3*cos(x)+5", "-1.20764"),
    "f4": _Builtin(_f4, _d4, "x^4+sin(pi/x^2)-5", "1.41421", lambda ctx: ctx.sqrt(2)),
    "f5": _Builtin(_f5, _d5, "x^2*exp(x)-sin(x)", "0", lambda ctx: ctx.zero),
    "f6": _Builtin(_f6, _d6, "(sin(x)-2^0.5/2)^2*(x+1)", "-1", lambda ctx: -ctx.one),
    "f7": _Builtin(_f7, _d7, "sin(3*x)+x*cos(x)", "1.19776"),
}


def builtin(id: str) -> ScalarFunction:
    """Fresh counting session for one of the test functions ``f1`` .. ``f7``."""
    try:
        b = BUILTINS[id]
    except KeyError:
        raise UnknownBuiltin(f"unknown builtin {id!r}; choose from {sorted(BUILTINS)}") from None
    return ScalarFunction(
        id, b.func, b.deriv, text=b.text, root_hint=b.root_hint, exact_root=b.exact_root
    )


def resolve_function(spec: str) -> ScalarFunction:
    """Builtin id or expression text."""
    if spec in BUILTINS:
        return builtin(spec)
    return from_expression(spec)
