"""Local charts, positive matrices B_r, the maps f_r and the contraction factor ρ.

The arcs of the multicone double as charts: the frame L of a component maps
the non-negative cone onto its closure, so B_r = ε(r)·L_t⁻¹ A_τ L_s is
strictly positive whenever the multicone is valid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from . import numeric
from .errors import NumericError, ValidationError
from .markov import StochasticMatrix, accelerate, period, stationary
from .multicone import BranchState, BranchSystem, Multicone, SignTable, branch_matrix
from .projective import (INF, Arc, Mat2, Mobius, ProjPoint, arc_contains, f_conjugate, mobius_derivative_at,
                         mobius_transpose)

GRID_POINTS = 100


def constant(x):
    """Order-zero part of a jet; other scalars pass through."""
    c = getattr(x, "constant", None)
    return x if c is None else c


# -- charts ----------------------------------------------------------------------

def _is_inf(s) -> bool:
    return isinstance(s, str) and s.strip().lower() in ("inf", "∞", "infinity")


def _rep(s, sample):
    one, zero = numeric.like(1, sample), numeric.like(0, sample)
    return (one, zero) if _is_inf(s) else (s, one)


def _probe(p, q):
    """A slope strictly inside the arc running upward from p to q."""
    if _is_inf(p):
        return q - 1
    if _is_inf(q):
        return p + 1
    if numeric.to_float(q - p) > 0:
        return (p + q) / 2
    return INF


def default_chart(p, q) -> Mat2:
    """Frame for the arc that runs in increasing slope from ``p`` to ``q``.

    Columns are the canonical representatives [s; 1] (or [1; 0] for ∞), with
    the second column negated when needed so the cone they span is the
    intended arc. An arc with p > q passes through ∞.
    """
    if _is_inf(p) and _is_inf(q):
        raise ValidationError("degenerate arc: both endpoints are ∞")
    if not _is_inf(p) and not _is_inf(q) and numeric.is_zero(p - q):
        raise ValidationError("degenerate arc: equal endpoints")
    sample = q if _is_inf(p) else p
    u, v = _rep(p, sample), _rep(q, sample)
    frame = Mat2(u[0], v[0], u[1], v[1])
    if not arc_contains(Arc(frame), ProjPoint.from_slope(_probe(p, q)), strict=True):
        frame = Mat2(u[0], -v[0], u[1], -v[1])
    return frame


def chart_frames_arc(frame: Mat2, p, q) -> bool:
    """Whether an explicit frame spans the same arc as ``default_chart(p, q)``."""
    ref = Arc(default_chart(p, q))
    got = Arc(frame)
    e1, e2 = got.endpoints()
    r1, r2 = ref.endpoints()
    if not (e1 == r1 and e2 == r2):
        return False
    return arc_contains(got, ProjPoint.from_slope(_probe(p, q)), strict=True)


# -- the lifted system ---------------------------------------------------------

@dataclass
class LiftedSystem:
    """Everything the kernel and the error bounds need about one recurrent class."""

    states: tuple[Any, ...]
    Q: list[list[Any]]
    pi: list[Any]
    B: list[Mat2]
    f: list[Mobius]
    ft0: list[Any]
    f0: list[Any]
    fp0: list[Any]
    delta: list[Any]
    rho: Any
    D: Any
    d: int = 1
    lift_period: int = 1
    signs: list[int] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.states)

    def predecessors(self) -> list[list[int]]:
        n = self.size
        return [[r for r in range(n) if not numeric.is_zero(self.Q[r][s])] for s in range(n)]

    def weights(self) -> dict[tuple[int, int], Any]:
        """π_r Q_{r,r'} / π_{r'} for each positive transition."""
        w = {}
        for s, preds in enumerate(self.predecessors()):
            for r in preds:
                w[(r, s)] = self.pi[r] * self.Q[r][s] / self.pi[s]
        return w


def maps_from_positive(B: Mat2):
    """(f, f^⊤(0), f(0), f'(0), δ) for a positive matrix."""
    f = Mobius.from_mat(f_conjugate(B))
    ft0 = mobius_transpose(f).beta / f.delta
    f0 = f.beta / f.delta
    fp0 = mobius_derivative_at(f, 0 * f.delta)
    return f, ft0, f0, fp0, f.delta


def positive_matrices(A: Mapping[str, Mat2], states: Sequence[BranchState], table: SignTable,
                      M: Multicone) -> tuple[list[Mat2], list[int]]:
    Bs, signs = [], []
    for r in states:
        eps = table[(r.src, r.src_comp, r.dst)].sign
        L_s = M[r.src][r.src_comp].frame
        L_t = M[r.dst][r.dst_comp].frame
        B = (L_t.inverse() @ A[r.dst] @ L_s) * eps
        Bs.append(B)
        signs.append(eps)
    return Bs, signs


def contraction_factor(fs: Sequence[Mobius]):
    """ρ = max over r of |f_r(±1)|, with a grid sanity check of monotonicity."""
    rho = None
    for f in fs:
        for x in (-1, 1):
            val = abs(constant(f(x)))
            if rho is None or numeric.to_float(val - rho) > 0:
                rho = val
    slack = float(numeric.tolerance())
    for f in fs:
        for k in range(GRID_POINTS):
            x = numeric.like(Fraction(2 * k, GRID_POINTS - 1) - 1, constant(f.delta))
            if numeric.to_float(abs(constant(f(x))) - rho) > slack:
                raise NumericError("f_r exceeds its endpoint values inside [-1, 1]")
    return rho


def _check_positive(B: Mat2, label) -> None:
    for e in B:
        if numeric.sign(constant(e)) <= 0:
            raise NumericError(f"B_{label} is not strictly positive")


def build_lift(A: Mapping[str, Mat2], P: StochasticMatrix, M: Multicone, branch: BranchSystem,
               cls: Sequence[int], base_period: int = 1) -> LiftedSystem:
    """Assemble the lifted system on the recurrent class ``cls``.

    ``A`` and ``P`` may hold rationals, balls or jets; the sign table of
    ``branch`` (decided at the base point) fixes ε(r). If Q|_C is periodic the
    lifted chain is replaced by its block chain and its period recorded.
    """
    states = [branch.states[i] for i in cls]
    Q_full = branch_matrix(P, states)
    Bs, signs = positive_matrices(A, states, branch.table, M)
    labels = tuple(str(s) for s in states)
    Qc = StochasticMatrix.from_rows(labels, Q_full.entries)
    lift_d = period(Qc.map(constant))
    out_states: tuple[Any, ...] = tuple(states)
    if lift_d > 1:
        mats = dict(zip(labels, Bs))
        acc = accelerate(Qc, mats)
        Qc = acc.chain
        out_states = acc.blocks
        Bs = [acc.matrices[lab] for lab in Qc.labels]
        sign_of = dict(zip(labels, signs))
        signs = [_prod(sign_of[s] for s in blk) for blk in acc.blocks]
    Q = [list(row) for row in Qc.entries]
    for r, B in enumerate(Bs):
        _check_positive(B, Qc.labels[r])
    fs, ft0s, f0s, fp0s, deltas = [], [], [], [], []
    for B in Bs:
        f, ft0, f0, fp0, delta = maps_from_positive(B)
        fs.append(f)
        ft0s.append(ft0)
        f0s.append(f0)
        fp0s.append(fp0)
        deltas.append(delta)
    for r, (ft, dl) in enumerate(zip(ft0s, deltas)):
        if numeric.sign(constant(dl)) <= 0:
            raise NumericError(f"δ_r is not positive for {Qc.labels[r]}")
        if numeric.to_float(abs(constant(ft)) - 1) >= 0:
            raise NumericError(f"|f^T(0)| >= 1 for {Qc.labels[r]}")
    rho = contraction_factor(fs)
    if numeric.to_float(rho - 1) >= 0:
        raise NumericError("contraction factor ρ >= 1: no strict contraction")
    D = max((abs(constant(x)) for x in ft0s), key=numeric.to_float)
    pi = stationary(Qc)
    return LiftedSystem(
        states=out_states, Q=Q, pi=pi, B=Bs, f=fs, ft0=ft0s, f0=f0s, fp0=fp0s, delta=deltas,
        rho=rho, D=D, d=base_period * lift_d, lift_period=lift_d, signs=signs,
    )


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


def chart_invariance_check(system_a, system_b, epsilon, **options) -> bool:
    """Both lifts give certificates whose midpoints differ by < 2× the larger bound."""
    from .certify import certify_lift

    ca = certify_lift(system_a, epsilon, **options)
    cb = certify_lift(system_b, epsilon, **options)
    gap = abs(ca.value - cb.value)
    return bool(gap < 2 * max(ca.total_bound, cb.total_bound))
