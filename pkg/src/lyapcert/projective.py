"""2×2 matrices, Möbius maps and arcs of the real projective line.

Points of RP¹ are written in the slope coordinate v1/v2 (so [1;0] is ∞).
An arc is stored as a frame: the closed set of directions αu + βv with
α, β ≥ 0, where u and v are the frame columns. Column 1 is the image of
ψ(1) = [1;0] and column 2 the image of ψ(−1) = [0;1].
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterator

from . import numeric
from .errors import DomainError, IndeterminateSignError, NumericError

INF = "inf"


@dataclass(frozen=True)
class Mat2:
    a: Any
    b: Any
    c: Any
    d: Any

    @classmethod
    def rows(cls, rows) -> "Mat2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(Fraction(1), Fraction(0), Fraction(0), Fraction(1))

    def __iter__(self) -> Iterator[Any]:
        return iter((self.a, self.b, self.c, self.d))

    def tolist(self):
        return [[self.a, self.b], [self.c, self.d]]

    def map(self, fn: Callable[[Any], Any]) -> "Mat2":
        return Mat2(fn(self.a), fn(self.b), fn(self.c), fn(self.d))

    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __mul__(self, s) -> "Mat2":
        return Mat2(self.a * s, self.b * s, self.c * s, self.d * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Mat2":
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def apply(self, v):
        x, y = v
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def inverse(self) -> "Mat2":
        det = self.det()
        if numeric.is_zero(det):
            raise NumericError("singular 2x2 matrix")
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def transpose(self) -> "Mat2":
        return Mat2(self.a, self.c, self.b, self.d)

    def col(self, k: int):
        return (self.a, self.c) if k == 0 else (self.b, self.d)


def f_conjugate(m: Mat2) -> Mat2:
    """The conjugation F(m) taking the action on the cone to the action on [−1, 1]."""
    a, b, c, d = m
    return Mat2(
        (a - b - c + d) / 2,
        (a + b - c - d) / 2,
        (a - b + c - d) / 2,
        (a + b + c + d) / 2,
    )


@dataclass(frozen=True)
class Mobius:
    """x ↦ (αx + β)/(γx + δ)."""

    alpha: Any
    beta: Any
    gamma: Any
    delta: Any

    @classmethod
    def from_mat(cls, m: Mat2) -> "Mobius":
        return cls(m.a, m.b, m.c, m.d)

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(Fraction(1), Fraction(0), Fraction(0), Fraction(1))

    def mat(self) -> Mat2:
        return Mat2(self.alpha, self.beta, self.gamma, self.delta)

    def denominator(self, x):
        return self.gamma * x + self.delta

    def __call__(self, x):
        return mobius_eval(self, x)

    def compose(self, inner: "Mobius") -> "Mobius":
        """self ∘ inner."""
        return Mobius.from_mat(self.mat() @ inner.mat())


def _check_pole(den) -> None:
    if numeric.is_exact(den):
        if den == 0:
            raise DomainError("Möbius map evaluated at its pole")
        return
    if numeric.magnitude(den) <= float(numeric.tolerance()):
        raise DomainError("Möbius map evaluated at (or within tolerance of) its pole")


def mobius_eval(f: Mobius, x):
    den = f.denominator(x)
    _check_pole(den)
    return (f.alpha * x + f.beta) / den


def mobius_transpose(f: Mobius) -> Mobius:
    return Mobius(f.alpha, f.gamma, f.beta, f.delta)


def mobius_derivative_at(f: Mobius, x):
    den = f.denominator(x)
    _check_pole(den)
    return (f.alpha * f.delta - f.beta * f.gamma) / (den * den)


def mobius_from_mat(m: Mat2) -> Mobius:
    return Mobius.from_mat(m)


# -- projective points ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProjPoint:
    v1: Any
    v2: Any

    @classmethod
    def from_slope(cls, s) -> "ProjPoint":
        if isinstance(s, str) and s.strip().lower() in ("inf", "∞", "infinity"):
            return cls(1, 0)
        return cls(s, 1)

    def is_infinite(self) -> bool:
        return numeric.is_zero(self.v2)

    def slope(self):
        if self.is_infinite():
            return INF
        return self.v1 / self.v2

    def vector(self):
        return (self.v1, self.v2)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjPoint):
            return NotImplemented
        cross = self.v1 * other.v2 - self.v2 * other.v1
        if numeric.is_exact(cross):
            return cross == 0
        scale = max(numeric.magnitude(self.v1) + numeric.magnitude(self.v2), 1.0)
        scale *= max(numeric.magnitude(other.v1) + numeric.magnitude(other.v2), 1.0)
        return numeric.magnitude(cross) <= float(numeric.tolerance()) * scale

    __hash__ = None


def chart_psi(x) -> ProjPoint:
    """ψ(x) = ½(1 + x, 1 − x): [−1, 1] onto the non-negative cone."""
    return ProjPoint((1 + x) / 2, (1 - x) / 2)


def chart_psi_inv(p: ProjPoint):
    s = p.v1 + p.v2
    if numeric.is_zero(s):
        raise DomainError("ψ⁻¹ is undefined at the point [1; −1]")
    return (p.v1 - p.v2) / s


# -- arcs --------------------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    frame: Mat2

    def __post_init__(self):
        if numeric.is_zero(self.frame.det()):
            raise NumericError("degenerate arc frame (columns are parallel)")

    def endpoints(self) -> tuple[ProjPoint, ProjPoint]:
        u, v = self.frame.col(0), self.frame.col(1)
        return ProjPoint(*u), ProjPoint(*v)

    def coordinates(self, p: ProjPoint):
        return self.frame.inverse().apply(p.vector())

    def contains(self, p: ProjPoint, strict: bool = False) -> bool:
        return arc_contains(self, p, strict)


def arc_contains(arc: Arc, p: ProjPoint, strict: bool = False) -> bool:
    """Whether ``p`` lies in the arc (its interior when ``strict``).

    Solves frame·x = p and compares the signs of the two coordinates. An
    exactly-zero coordinate means ``p`` is an endpoint. In float mode a
    coordinate inside the tolerance band raises.
    """
    x1, x2 = arc.coordinates(p)
    s1, s2 = numeric.sign(x1), numeric.sign(x2)
    if s1 == 0 or s2 == 0:
        return not strict
    return s1 == s2


def strict_image_containment(target: Arc, m: Mat2, source: Arc) -> int | None:
    """+1/−1 if target⁻¹·m·source is strictly positive/negative, else ``None``.

    Success is equivalent to [m](source) ⊂ interior(target). Raises
    :class:`IndeterminateSignError` if some entry cannot be signed.
    """
    prod = target.frame.inverse() @ m @ source.frame
    signs = []
    for e in prod:
        try:
            signs.append(numeric.sign(e))
        except IndeterminateSignError:
            signs.append(None)
    decided = {s for s in signs if s is not None}
    if 0 in decided or decided == {1, -1}:
        return None
    if None in signs:
        raise IndeterminateSignError("cannot certify the image containment at working precision")
    if all(s > 0 for s in signs):
        return 1
    if all(s < 0 for s in signs):
        return -1
    return None


__all__ = [
    "Mat2", "Mobius", "ProjPoint", "Arc", "INF", "f_conjugate", "mobius_eval", "mobius_transpose",
    "mobius_derivative_at", "mobius_from_mat", "chart_psi", "chart_psi_inv", "arc_contains",
    "strict_image_containment", "IndeterminateSignError",
]
