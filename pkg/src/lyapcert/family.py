"""Analytic one-parameter families.

Two pieces live here: a tiny expression language for entries that depend on
a parameter ``t`` (constants, + − * /, integer powers, sqrt, log), and the
truncated Taylor jet that every pipeline quantity is pushed through when
derivatives in ``t`` are wanted.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import flint

from . import numeric
from .errors import DomainError, NumericError, ParseError


# -- jets ----------------------------------------------------------------------

class Jet:
    """Σ c_j (t − t₀)^j truncated after order q; c_j = f^{(j)}(t₀)/j!."""

    __slots__ = ("coeffs", "t0")

    def __init__(self, coeffs: Sequence[Any], t0: Any = None):
        self.coeffs = tuple(coeffs)
        if not self.coeffs:
            raise ValueError("a jet needs at least one coefficient")
        self.t0 = t0

    @classmethod
    def variable(cls, t0: Any, order: int) -> "Jet":
        one = numeric.like(1, t0)
        zero = numeric.like(0, t0)
        return cls([t0] + [one] + [zero] * (order - 1), t0) if order >= 1 else cls([t0], t0)

    @classmethod
    def constant_jet(cls, c: Any, order: int, t0: Any = None) -> "Jet":
        zero = c * 0
        return cls([c] + [zero] * order, t0)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def constant(self) -> Any:
        return self.coeffs[0]

    def __getitem__(self, j: int) -> Any:
        return self.coeffs[j]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __repr__(self) -> str:
        return f"Jet({list(self.coeffs)!r})"

    def derivative(self, j: int) -> Any:
        """The j-th derivative at t₀, i.e. j!·c_j."""
        fact = 1
        for k in range(2, j + 1):
            fact *= k
        return self.coeffs[j] * fact

    def _pair(self, other) -> "tuple[Jet, Jet] | None":
        """Both operands as jets over a common scalar kind."""
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jets of different orders")
        elif not isinstance(other, (int, Fraction, flint.arb, flint.acb)):
            return None
        a, b = numeric.promote(self, other)
        if not isinstance(b, Jet):
            c = numeric.like(b, a.coeffs[0])
            b = Jet([c] + [c * 0] * a.order, a.t0)
        return a, b

    def __add__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        a, b = p
        return Jet([x + y for x, y in zip(a.coeffs, b.coeffs)], self.t0)

    __radd__ = __add__

    def __neg__(self):
        return Jet([-a for a in self.coeffs], self.t0)

    def __pos__(self):
        return self

    def __sub__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        a, b = p
        return Jet([x - y for x, y in zip(a.coeffs, b.coeffs)], self.t0)

    def __rsub__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        a, b = p
        return b - a

    def __mul__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        a, b = p
        if not isinstance(other, Jet):
            c = b.coeffs[0]
            return Jet([x * c for x in a.coeffs], self.t0)
        x, y = a.coeffs, b.coeffs
        return Jet([_dot(x, y, k) for k in range(len(x))], self.t0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        a, b = p
        if not isinstance(other, Jet):
            c = b.coeffs[0]
            if numeric.is_zero(c):
                raise DomainError("jet division by zero")
            return Jet([x / c for x in a.coeffs], self.t0)
        if a.order == 0 and not numeric.is_zero(b.coeffs[0]):
            return Jet([a.coeffs[0] / b.coeffs[0]], self.t0)
        return a * b.reciprocal()

    def __rtruediv__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        a, b = p
        if a.order == 0 and not numeric.is_zero(a.coeffs[0]):
            return Jet([b.coeffs[0] / a.coeffs[0]], self.t0)
        return b * a.reciprocal()

    def reciprocal(self) -> "Jet":
        b = self.coeffs
        if numeric.is_zero(b[0]):
            raise DomainError("jet division by a series with zero constant term")
        q = [1 / b[0] if not numeric.is_exact(b[0]) else Fraction(1) / b[0]]
        for k in range(1, len(b)):
            acc = b[1] * q[k - 1]
            for j in range(2, k + 1):
                acc = acc + b[j] * q[k - j]
            q.append(-acc / b[0])
        return Jet(q, self.t0)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.reciprocal() ** (-n)
        result = self._pair(1)[1]
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sqrt(self) -> "Jet":
        s0 = numeric.sqrt(self.coeffs[0])
        f = [numeric.like(c, s0) for c in self.coeffs] if not numeric.is_exact(s0) else self.coeffs
        if numeric.is_zero(s0):
            raise DomainError("jet sqrt needs a nonzero constant term")
        s = [s0]
        for k in range(1, len(f)):
            acc = f[k]
            for j in range(1, k):
                acc = acc - s[j] * s[k - j]
            s.append(acc / (2 * s0))
        return Jet(s, self.t0)

    def log(self) -> "Jet":
        h = [numeric.log(self.coeffs[0])]
        f = [numeric.like(c, h[0]) for c in self.coeffs] if not numeric.is_exact(h[0]) else self.coeffs
        for k in range(1, len(f)):
            acc = f[k] * k
            for j in range(1, k):
                acc = acc - h[j] * f[k - j] * j
            h.append(acc / (f[0] * k))
        return Jet(h, self.t0)

    def map(self, fn) -> "Jet":
        return Jet([fn(c) for c in self.coeffs], self.t0)


def _dot(a, b, k):
    acc = a[0] * b[k]
    for j in range(1, k + 1):
        acc = acc + a[j] * b[k - j]
    return acc


def jet_solve_linear(M: Sequence[Sequence[Jet]], rhs: Sequence[Jet]) -> list[Jet]:
    """Gaussian elimination in the jet ring; pivots ranked by constant terms."""
    try:
        return numeric.gauss_solve(M, rhs)
    except NumericError as exc:
        raise NumericError("jet system has a singular constant term") from exc


# -- expressions -----------------------------------------------------------------

class Expr:
    """Base class of expression trees; operators build new trees."""

    def __add__(self, other):
        return _binop("+", self, _wrap(other))

    def __radd__(self, other):
        return _binop("+", _wrap(other), self)

    def __sub__(self, other):
        return _binop("-", self, _wrap(other))

    def __rsub__(self, other):
        return _binop("-", _wrap(other), self)

    def __mul__(self, other):
        return _binop("*", self, _wrap(other))

    def __rmul__(self, other):
        return _binop("*", _wrap(other), self)

    def __truediv__(self, other):
        return _binop("/", self, _wrap(other))

    def __rtruediv__(self, other):
        return _binop("/", _wrap(other), self)

    def __neg__(self):
        if isinstance(self, Const):
            return Const(-self.value)
        if isinstance(self, Neg):
            return self.arg
        return Neg(self)

    def __str__(self) -> str:
        return to_string(self)

    def depends_on_t(self) -> bool:
        return any(isinstance(n, Param) for n in walk(self))


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True)
class Param(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    name: str
    arg: Expr


FUNCTIONS = ("sqrt", "log")


def _wrap(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(Fraction(x))
    raise TypeError(f"cannot mix {type(x).__name__} into an expression")


def _binop(op: str, a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        if op == "/" and b.value == 0:
            return BinOp(op, a, b)
        return Const({"+": a.value + b.value, "-": a.value - b.value,
                      "*": a.value * b.value, "/": a.value / b.value if b.value else 0}[op])
    if op == "*":
        for x, y in ((a, b), (b, a)):
            if isinstance(x, Const) and x.value == 0:
                return Const(Fraction(0))
            if isinstance(x, Const) and x.value == 1:
                return y
            if isinstance(x, Const) and x.value == -1:
                return -y
    if op == "+":
        if isinstance(a, Const) and a.value == 0:
            return b
        if isinstance(b, Const) and b.value == 0:
            return a
    if op == "+" and isinstance(b, Neg):
        return BinOp("-", a, b.arg)
    if op in ("-", "/") and isinstance(b, Const) and b.value == (0 if op == "-" else 1):
        return a
    return BinOp(op, a, b)


def walk(e: Expr):
    yield e
    for child in _children(e):
        yield from walk(child)


def _children(e: Expr):
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Call):
        return (e.arg,)
    return ()


# -- parsing ---------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1):
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("name", m.group(2), m.start(2)))
        elif m.group(3):
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


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

    def expect(self, value: str):
        kind, val, pos = self.peek()
        if val != value or kind == "end":
            raise ParseError(f"expected {value!r}", pos)
        self.i += 1

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            e = _binop(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            e = _binop(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            negative = False
            if self.peek()[:2] == ("op", "-"):
                self.take()
                negative = True
            kind, val, pos = self.take()
            if kind != "num" or not val.isdigit():
                raise ParseError("exponent must be an integer literal", pos)
            exponent = -int(val) if negative else int(val)
            if isinstance(base, Const) and (base.value != 0 or exponent >= 0):
                return Const(base.value ** exponent)
            return Pow(base, exponent)
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(Fraction(val))
        if kind == "name":
            if val == "t":
                return Param()
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if (kind, val) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {val!r}", pos)


def parse(text: str) -> Expr:
    """Parse an entry expression. Precedence: ^ > unary − > * / > + −."""
    return _Parser(text).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_string(e: Expr, parent: int = 0) -> str:
    """Render with the minimum parentheses needed to parse back to the same tree."""
    if isinstance(e, Const):
        v = e.value
        if v.denominator == 1:
            text = str(v.numerator)
            return f"({text})" if v < 0 and parent >= 4 else text
        text = f"{v.numerator}/{v.denominator}"
        return f"({text})" if parent >= 3 else text
    if isinstance(e, Param):
        return "t"
    if isinstance(e, Neg):
        s = f"-{to_string(e.arg, 3)}"
        return f"({s})" if parent >= 4 else s
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        s = f"{to_string(e.left, p)} {e.op} {to_string(e.right, p + 1)}"
        return f"({s})" if p < parent else s
    if isinstance(e, Pow):
        s = f"{to_string(e.base, 4)}^{e.exponent}"
        return f"({s})" if parent >= 4 else s
    if isinstance(e, Call):
        return f"{e.name}({to_string(e.arg)})"
    raise TypeError(type(e).__name__)


# -- evaluation --------------------------------------------------------------------

def _const_like(value: Fraction, t):
    if isinstance(t, Jet):
        c = numeric.like(value, t.constant)
        return Jet.constant_jet(c, t.order, t.t0)
    return numeric.like(value, t)


def evaluate(e: Expr, t):
    """Evaluate at ``t`` (rational, real ball, complex ball or jet)."""
    if isinstance(e, Const):
        return _const_like(e.value, t)
    if isinstance(e, Param):
        return t
    if isinstance(e, Neg):
        return -evaluate(e.arg, t)
    if isinstance(e, BinOp):
        a, b = numeric.promote(evaluate(e.left, t), evaluate(e.right, t))
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if numeric.is_zero(b):
            raise DomainError(f"division by zero in {to_string(e)}")
        return a / b
    if isinstance(e, Pow):
        base = evaluate(e.base, t)
        if e.exponent < 0 and numeric.is_zero(base):
            raise DomainError(f"zero to a negative power in {to_string(e)}")
        if isinstance(base, Fraction):
            return base ** e.exponent
        if e.exponent < 0:
            return 1 / _ipow(base, -e.exponent)
        return _ipow(base, e.exponent)
    if isinstance(e, Call):
        x = evaluate(e.arg, t)
        if isinstance(x, Jet):
            return x.sqrt() if e.name == "sqrt" else x.log()
        return numeric.sqrt(x) if e.name == "sqrt" else numeric.log(x)
    raise TypeError(type(e).__name__)


def _ipow(x, n: int):
    if isinstance(x, Jet):
        return x ** n
    result = numeric.like(1, x)
    while n:
        if n & 1:
            result = result * x
        x = x * x
        n >>= 1
    return result


def eval_constant(e: Expr):
    """Value of a parameter-free expression (exact when it is rational)."""
    return evaluate(e, Fraction(0))
