"""The truncated kernel operator and the partial sums that approximate λ.

Each branch state r carries an m×m block with entries

    b_{k,n} = Σ_{ℓ=1}^{min(k,n)} C(n,ℓ) C(k−1,ℓ−1) s^{n−ℓ} (−f(0))^{k−ℓ} f'(0)^ℓ,

where s = f^⊤(0), together with b_{0,n} = s^n and b_{k,0} = 0. The sum
factors as E·S with E[k][ℓ] = C(k−1,ℓ−1)(−f(0))^{k−ℓ} f'(0)^ℓ and
S[ℓ][n] = C(n,ℓ) s^{n−ℓ}, both triangular, so a block costs one matrix product.

Every scalar in here is a coefficient list: ``[x]`` for a plain number and
``[c_0, …, c_q]`` for an order-q jet. Blocks and state vectors are lists of
``flint.arb_mat`` indexed by jet order, and products are truncated Cauchy
products. The scalar pipeline is simply the q = 0 case.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

import flint

from . import numeric
from .errors import NumericError
from .lift import LiftedSystem


# -- coefficient lists -----------------------------------------------------------

def coefficients(x: Any, order: int) -> list[flint.arb]:
    """A scalar or jet as a list of ``order + 1`` real balls."""
    cs = getattr(x, "coeffs", None)
    if cs is None:
        cs = (x,)
    out = [numeric.real(c) for c in cs[: order + 1]]
    return out + [flint.arb(0)] * (order + 1 - len(out))


def _order_of(system: LiftedSystem) -> int:
    return max((getattr(x, "order", 0) for x in system.ft0), default=0)


def cmul(a: Sequence, b: Sequence) -> list:
    """Truncated product of two coefficient lists of equal length."""
    return [sum((a[i] * b[k - i] for i in range(1, k + 1)), a[0] * b[k]) for k in range(len(a))]


def _powers(x: list, count: int) -> list[list]:
    one = [flint.arb(1)] + [flint.arb(0)] * (len(x) - 1)
    out = [one]
    for _ in range(1, count):
        out.append(cmul(out[-1], x))
    return out


def binomial_rows(m: int) -> list[list[int]]:
    """Pascal's triangle rows 0..m−1 by the additive recurrence (exact integers)."""
    rows = [[1]]
    for n in range(1, m):
        prev = rows[-1]
        rows.append([1] + [prev[k - 1] + prev[k] for k in range(1, n)] + [1])
    return rows


class OpCounter:
    """Tally of scalar multiply-adds issued by the engine (per jet coefficient pair)."""

    def __init__(self):
        self.count = 0

    def add(self, k: int) -> None:
        self.count += k


# -- blocks ------------------------------------------------------------------------

@dataclass
class KernelBlock:
    """The m×m truncation of T_r, one arb_mat per jet order."""

    state: Any
    m: int
    mats: list[flint.arb_mat]

    @property
    def order(self) -> int:
        return len(self.mats) - 1

    def entry(self, k: int, n: int, j: int = 0) -> flint.arb:
        return self.mats[j][k, n]

    def tolist(self, j: int = 0) -> list[list[flint.arb]]:
        M = self.mats[j]
        return [[M[k, n] for n in range(self.m)] for k in range(self.m)]


def _jet_matmul(A: list[flint.arb_mat], B: list[flint.arb_mat]) -> list[flint.arb_mat]:
    return [sum((A[i] * B[k - i] for i in range(1, k + 1)), A[0] * B[k]) for k in range(len(A))]


def _scalar_block(s, f0, fp0, m: int) -> flint.arb_mat:
    """Column n holds the first m coefficients of (s + g(x))^n, g(x) = f'(0)x/(1 + f(0)x).

    Expanding the power reproduces the binomial double sum, so this is the
    same block, built with series products instead of m² scalar formulas.
    """
    old = flint.ctx.cap
    flint.ctx.cap = m
    try:
        x = flint.arb_series([0, 1])
        h = s + fp0 * x / (1 + f0 * x)
        cols = [[0] * m]
        col = h
        for _ in range(1, m):
            c = col.coeffs()
            cols.append(c + [0] * (m - len(c)))
            col = col * h
    finally:
        flint.ctx.cap = old
    return flint.arb_mat(cols).transpose()


def kernel_entries(ft0: Any, f0: Any, fp0: Any, m: int, order: int = 0, state: Any = None,
                   binomials: list[list[int]] | None = None, counter: OpCounter | None = None) -> KernelBlock:
    """Fill the m×m block of T_r from f^⊤(0), f(0) and f'(0)."""
    if m < 1:
        raise ValueError("m must be positive")
    s = coefficients(ft0, order)
    if abs(numeric.to_float(s[0])) >= 1:
        raise NumericError("kernel block needs |f^T(0)| < 1")
    if order == 0:
        mats = [_scalar_block(s[0], coefficients(f0, 0)[0], coefficients(fp0, 0)[0], m)]
        if counter is not None:
            counter.add(m ** 3)
        return KernelBlock(state, m, mats)
    mf0 = [-c for c in coefficients(f0, order)]
    fp = coefficients(fp0, order)
    C = binomials if binomials is not None and len(binomials) >= m else binomial_rows(m)
    ps, pf, pp = _powers(s, m), _powers(mf0, m), _powers(fp, m)
    q1 = order + 1
    E = [[[0] * m for _ in range(m)] for _ in range(q1)]
    S = [[[0] * m for _ in range(m)] for _ in range(q1)]
    E[0][0][0] = 1
    for k in range(1, m):
        row = C[k - 1]
        for l in range(1, k + 1):
            val = cmul(pf[k - l], pp[l])
            c = row[l - 1]
            for j in range(q1):
                E[j][k][l] = val[j] * c
    for n in range(1, m):
        row = C[n]
        for l in range(0, n + 1):
            val = ps[n - l]
            c = row[l]
            for j in range(q1):
                S[j][l][n] = val[j] * c
    Em = [flint.arb_mat(E[j]) for j in range(q1)]
    Sm = [flint.arb_mat(S[j]) for j in range(q1)]
    if counter is not None:
        counter.add(m ** 3 * q1 * (q1 + 1) // 2)
    return KernelBlock(state, m, _jet_matmul(Em, Sm))


# -- operator -----------------------------------------------------------------------

StateVector = list  # per state: list over jet order of m×1 arb_mat


@dataclass
class KernelOperator:
    blocks: list[KernelBlock]
    weights: dict[tuple[int, int], list]
    m: int
    order: int = 0
    counter: OpCounter = field(default_factory=OpCounter)

    @property
    def size(self) -> int:
        return len(self.blocks)

    def incoming(self) -> list[list[tuple[int, list]]]:
        out: list[list[tuple[int, list]]] = [[] for _ in self.blocks]
        for (r, s), w in sorted(self.weights.items()):
            out[s].append((r, w))
        return out


def build_operator(system: LiftedSystem, m: int, order: int | None = None,
                   counter: OpCounter | None = None) -> KernelOperator:
    q = _order_of(system) if order is None else order
    counter = counter or OpCounter()
    C = binomial_rows(m)
    blocks = [kernel_entries(system.ft0[r], system.f0[r], system.fp0[r], m, q, system.states[r], C, counter)
              for r in range(system.size)]
    weights = {key: coefficients(w, q) for key, w in system.weights().items()}
    return KernelOperator(blocks, weights, m, q, counter)


def _zero_vec(m: int, q1: int) -> list[flint.arb_mat]:
    return [flint.arb_mat(m, 1) for _ in range(q1)]


def seed_vector(system: LiftedSystem, m: int, order: int | None = None) -> StateVector:
    """v̂ = v/d with v_s = Σ_r w(r,s)·v(f_r(0); log δ_r)."""
    if m < 2:
        raise ValueError("the seed needs m >= 2")
    q = _order_of(system) if order is None else order
    q1 = q + 1
    local = []
    for r in range(system.size):
        logd = system.delta[r].log() if hasattr(system.delta[r], "coeffs") else numeric.log(system.delta[r])
        mf0 = [-c for c in coefficients(system.f0[r], q)]
        pw = _powers(mf0, m)
        vec = [coefficients(logd, q)]
        for n in range(1, m):
            vec.append([-c / n for c in pw[n]])
        local.append(vec)
    weights = {key: coefficients(w, q) for key, w in system.weights().items()}
    out = []
    d = system.d
    for s in range(system.size):
        acc = [[flint.arb(0)] * q1 for _ in range(m)]
        for (r, s2), w in weights.items():
            if s2 != s:
                continue
            for n in range(m):
                term = cmul(w, local[r][n])
                acc[n] = [a + b for a, b in zip(acc[n], term)]
        out.append([flint.arb_mat([[acc[n][j] / d] for n in range(m)]) for j in range(q1)])
    return out


def apply(T: KernelOperator, u: StateVector, incoming=None) -> StateVector:
    """(Tu)_s = Σ_r w(r,s)·T_r u_r."""
    q1 = T.order + 1
    z = [_jet_matmul_vec(T.blocks[r].mats, u[r]) for r in range(T.size)]
    T.counter.add(T.size * T.m * T.m * q1 * (q1 + 1) // 2)
    out = []
    for s, pairs in enumerate(incoming if incoming is not None else T.incoming()):
        acc = _zero_vec(T.m, q1)
        for r, w in pairs:
            for k in range(q1):
                for i in range(k + 1):
                    acc[k] = acc[k] + z[r][k - i] * w[i]
        out.append(acc)
    T.counter.add(len(T.weights) * T.m * q1 * (q1 + 1) // 2)
    return out


def _jet_matmul_vec(B: list[flint.arb_mat], u: list[flint.arb_mat]) -> list[flint.arb_mat]:
    return [sum((B[i] * u[k - i] for i in range(1, k + 1)), B[0] * u[k]) for k in range(len(B))]


def functional(system_pi: Sequence[list], u: StateVector) -> list:
    """[u]_0 = Σ_r π_r (u_r)_0, as a coefficient list."""
    q1 = len(u[0])
    acc = [flint.arb(0)] * q1
    for r, vec in enumerate(u):
        zero_coords = [vec[j][0, 0] for j in range(q1)]
        acc = [a + b for a, b in zip(acc, cmul(system_pi[r], zero_coords))]
    return acc


def iterates(T: KernelOperator, seed: StateVector) -> Iterator[StateVector]:
    """v̂, T v̂, T² v̂, … (only the current vector is held)."""
    incoming = T.incoming()
    u = seed
    while True:
        yield u
        u = apply(T, u, incoming)


def partial_sum_coefficients(system: LiftedSystem, n: int, m: int, order: int | None = None,
                             operator: KernelOperator | None = None, sums_at: Sequence[int] = ()) -> Any:
    """Σ_{ℓ<n} [T^ℓ v̂]_0 as a coefficient list; also records running sums at ``sums_at``."""
    if n < 1 or m < 2:
        raise ValueError("need n >= 1 and m >= 2")
    q = _order_of(system) if order is None else order
    T = operator if operator is not None else build_operator(system, m, q)
    pi = [coefficients(p, q) for p in system.pi]
    seed = seed_vector(system, m, q)
    total = [flint.arb(0)] * (q + 1)
    marks = {}
    for ell, u in enumerate(iterates(T, seed)):
        if ell >= n:
            break
        total = [a + b for a, b in zip(total, functional(pi, u))]
        if ell + 1 in sums_at:
            marks[ell + 1] = list(total)
    if sums_at:
        return total, marks
    return total


def partial_sum(system: LiftedSystem, n: int, m: int, operator: KernelOperator | None = None) -> flint.arb:
    """Λ_{n,m} = Σ_{ℓ<n} Σ_r π_r (T^ℓ v̂)_{r,0} for the scalar pipeline."""
    return partial_sum_coefficients(system, n, m, 0, operator)[0]


__all__ = [
    "KernelBlock", "KernelOperator", "OpCounter", "kernel_entries", "build_operator", "seed_vector",
    "apply", "functional", "iterates", "partial_sum", "partial_sum_coefficients", "binomial_rows",
    "coefficients", "cmul",
]
