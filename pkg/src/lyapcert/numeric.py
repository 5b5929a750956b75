"""Scalar arithmetic: exact rationals, precision-p reals, complex numbers.

Rationals are :class:`fractions.Fraction`. Reals and complex numbers are
``flint.arb`` / ``flint.acb`` balls evaluated at the working precision held in
a context variable. In ``float`` mode only ball midpoints are trusted and sign
decisions use the tolerance band ``2**(16 - p)``; in ``interval`` mode the ball
radius is honoured everywhere and a ball straddling zero has no sign.
"""
from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

import flint
import mpmath

from .errors import DomainError, IndeterminateSignError, NumericError, ParseError

Rational = Fraction
Real = flint.arb
ComplexReal = flint.acb

DEFAULT_PRECISION = 128
MODES = ("float", "interval")


@dataclass(frozen=True)
class Context:
    precision: int = DEFAULT_PRECISION
    mode: str = "float"

    def __post_init__(self):
        if self.precision < 24:
            raise ValueError("precision must be at least 24 bits")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


_context: contextvars.ContextVar[Context] = contextvars.ContextVar("lyapcert_context", default=Context())
flint.ctx.prec = DEFAULT_PRECISION
mpmath.mp.prec = DEFAULT_PRECISION


def current() -> Context:
    return _context.get()


def precision() -> int:
    return _context.get().precision


def interval_mode() -> bool:
    return _context.get().mode == "interval"


@contextlib.contextmanager
def working_precision(bits: int | None = None, mode: str | None = None):
    """Run a block at ``bits`` of precision (and optionally another mode)."""
    old = _context.get()
    ctx = Context(bits if bits is not None else old.precision, mode if mode is not None else old.mode)
    token = _context.set(ctx)
    old_flint, old_mp = flint.ctx.prec, mpmath.mp.prec
    flint.ctx.prec = ctx.precision
    mpmath.mp.prec = ctx.precision
    try:
        yield ctx
    finally:
        flint.ctx.prec, mpmath.mp.prec = old_flint, old_mp
        _context.reset(token)


def tolerance(p: int | None = None) -> Fraction:
    """The float-mode sign tolerance 2^(16-p)."""
    p = precision() if p is None else p
    return Fraction(2) ** (16 - p)


# -- conversion -------------------------------------------------------------

def parse_rational(text: str) -> Fraction:
    """Parse ``"n/d"``, ``"n"`` or a finite decimal into an exact rational."""
    s = text.strip()
    try:
        value = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {text!r}") from exc
    return value


def is_exact(x: Any) -> bool:
    return isinstance(x, (int, Fraction))


def to_real(q: Any, p: int | None = None) -> flint.arb:
    """Round a rational (or anything numeric) to a real ball at precision ``p``.

    Dyadic rationals come out exact; others carry a radius of at most one ulp.
    """
    if p is not None and p < 24:
        raise ValueError("precision must be at least 24 bits")
    if p is None:
        return real(q)
    old = flint.ctx.prec
    flint.ctx.prec = p
    try:
        return real(q)
    finally:
        flint.ctx.prec = old


def real(x: Any) -> flint.arb:
    if isinstance(x, flint.arb):
        return +x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return flint.arb(x)
    if isinstance(x, Fraction):
        return flint.arb(flint.fmpq(x.numerator, x.denominator))
    if isinstance(x, str):
        return flint.arb(x)
    if isinstance(x, float):
        return flint.arb(x)
    if isinstance(x, mpmath.mpf):
        return flint.arb(mpmath.nstr(x, mpmath.mp.dps + 5))
    raise TypeError(f"cannot convert {type(x).__name__} to a real")


def complex_(x: Any) -> flint.acb:
    if isinstance(x, flint.acb):
        return x
    return flint.acb(real(x))


def like(value: Any, sample: Any) -> Any:
    """Convert ``value`` (usually an exact number) to the scalar kind of ``sample``."""
    constant = getattr(sample, "constant", None)
    if constant is not None:
        return like(value, constant)
    if isinstance(sample, flint.acb):
        return complex_(value)
    if isinstance(sample, flint.arb):
        return value if isinstance(value, (flint.arb, flint.acb)) else real(value)
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    return value


def _rank(x: Any) -> int:
    if isinstance(x, flint.acb):
        return 2
    if isinstance(x, flint.arb):
        return 1
    return 0


def promote(a: Any, b: Any) -> tuple[Any, Any]:
    """Bring two scalars (or jets) to a common kind so flint and Fraction never mix."""
    ca = getattr(a, "constant", a)
    cb = getattr(b, "constant", b)
    ra, rb = _rank(ca), _rank(cb)
    if ra == rb:
        return a, b
    if ra < rb:
        return _lift_to(a, cb), b
    return a, _lift_to(b, ca)


def _lift_to(x: Any, sample: Any) -> Any:
    if hasattr(x, "map") and hasattr(x, "constant"):
        return x.map(lambda c: like(c, sample))
    return like(x, sample)


def to_mpf(x: Any) -> mpmath.mpf:
    """Midpoint of a ball (or an exact rational) as an mpmath number."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, int):
        return mpmath.mpf(x)
    if isinstance(x, flint.arb):
        return mpmath.mpf(x.mid().str(precision() // 3 + 10, radius=False, more=True))
    return mpmath.mpf(x)


def to_float(x: Any) -> float:
    if isinstance(x, flint.arb):
        return float(x.mid())
    return float(x)


def upper(x: Any) -> flint.arb:
    """An exact (radius-free) upper bound for a real quantity."""
    if isinstance(x, (int, Fraction)):
        return real(x)
    return flint.arb(x.upper())


def decimal_string(x: Any, digits: int | None = None) -> str:
    """Decimal midpoint of ``x`` with ``digits`` significant digits."""
    if digits is None:
        digits = max(17, int(precision() * math.log10(2)))
    if isinstance(x, (int, Fraction)):
        x = real(x)
    if isinstance(x, flint.acb):
        return f"{decimal_string(x.real, digits)}{'+' if x.imag >= 0 else ''}{decimal_string(x.imag, digits)}j"
    return x.mid().str(digits, radius=False, more=True)


# -- elementary functions -----------------------------------------------------

def _as_ball(x):
    if isinstance(x, (flint.arb, flint.acb)):
        return x
    return real(x)


def sqrt(x: Any):
    if isinstance(x, Fraction) or isinstance(x, int):
        q = Fraction(x)
        if q < 0:
            raise DomainError("sqrt of a negative number")
        rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
        if rn * rn == q.numerator and rd * rd == q.denominator:
            return Fraction(rn, rd)
        return real(q).sqrt()
    if isinstance(x, flint.arb) and not interval_mode() and x.mid() < 0:
        raise DomainError("sqrt of a negative number")
    if isinstance(x, flint.arb) and interval_mode() and not x >= 0:
        raise DomainError("sqrt of a possibly negative number")
    return _as_ball(x).sqrt()


def log(x: Any):
    if isinstance(x, (int, Fraction)):
        if x <= 0:
            raise DomainError("log of a non-positive number")
        if x == 1:
            return Fraction(0)
        return real(x).log()
    if isinstance(x, flint.arb):
        if (interval_mode() and not x > 0) or x.mid() <= 0:
            raise DomainError("log of a non-positive number")
        return x.log()
    if isinstance(x, flint.acb):
        if x == 0:
            raise DomainError("log of zero")
        return x.log()
    raise TypeError(f"log of {type(x).__name__}")


def artanh(x: Any):
    """Inverse hyperbolic tangent, ½·log((1+x)/(1−x)), for |x| < 1."""
    if isinstance(x, (int, Fraction)):
        if abs(x) >= 1:
            raise DomainError("artanh needs |x| < 1")
        if x == 0:
            return Fraction(0)
        return real(x).atanh()
    if isinstance(x, flint.arb):
        if abs(x.mid()) >= 1 or (interval_mode() and not abs(x) < 1):
            raise DomainError("artanh needs |x| < 1")
        return x.atanh()
    raise TypeError(f"artanh of {type(x).__name__}")


def d_hyp(x: Any, y: Any):
    """Hyperbolic distance 2|artanh x − artanh y| on (−1, 1)."""
    return 2 * abs(artanh(x) - artanh(y))


# -- sign and magnitude policy -----------------------------------------------

def sign(x: Any) -> int:
    """Sign of a real scalar under the current mode.

    Exact inputs get their exact sign. Balls raise
    :class:`IndeterminateSignError` when the decision is not safe.
    """
    if isinstance(x, (int, Fraction)):
        return (x > 0) - (x < 0)
    if isinstance(x, flint.arb):
        if interval_mode():
            if x > 0:
                return 1
            if x < 0:
                return -1
            raise IndeterminateSignError(f"ball {x.str(5)} contains zero")
        mid = x.mid()
        tol = real(tolerance())
        if mid > tol:
            return 1
        if mid < -tol:
            return -1
        raise IndeterminateSignError(f"value {mid.str(5)} is within 2^(16-p) of zero")
    constant = getattr(x, "constant", None)
    if constant is not None:
        return sign(constant)
    raise TypeError(f"no sign for {type(x).__name__}")


def is_zero(x: Any) -> bool:
    """Hard zero test used for supports: exact for rationals, midpoint for balls."""
    if isinstance(x, (int, Fraction)):
        return x == 0
    if isinstance(x, flint.arb):
        return x.mid() == 0
    if isinstance(x, flint.acb):
        return x.real.mid() == 0 and x.imag.mid() == 0
    constant = getattr(x, "constant", None)
    if constant is not None:
        return is_zero(constant)
    raise TypeError(f"no zero test for {type(x).__name__}")


def magnitude(x: Any) -> float:
    """Rough |x| used only for pivot selection."""
    if isinstance(x, (int, Fraction, float)):
        return abs(float(x))
    if isinstance(x, flint.arb):
        return abs(float(x.mid()))
    if isinstance(x, flint.acb):
        return float(abs(x).mid())
    constant = getattr(x, "constant", None)
    if constant is not None:
        return magnitude(constant)
    return abs(complex(x))


def gauss_solve(matrix: Sequence[Sequence[Any]], rhs: Sequence[Any], key: Callable[[Any], float] = magnitude) -> list:
    """Solve ``matrix · x = rhs`` by Gaussian elimination with partial pivoting.

    Works over any field-like scalar type (rationals, balls, jets); ``key``
    ranks pivot candidates.
    """
    n = len(matrix)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: key(a[r][col]))
        if key(a[piv][col]) == 0:
            raise NumericError("singular linear system")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        for r in range(col + 1, n):
            if key(a[r][col]) == 0:
                continue
            factor = a[r][col] / p
            row, prow = a[r], a[col]
            for c in range(col + 1, n + 1):
                row[c] = row[c] - factor * prow[c]
            row[col] = 0 * factor
    x = [None] * n
    for r in range(n - 1, -1, -1):
        acc = a[r][n]
        for c in range(r + 1, n):
            acc = acc - a[r][c] * x[c]
        x[r] = acc / a[r][r]
    return x
