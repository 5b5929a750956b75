"""Row-stochastic matrices on a finite alphabet.

Covers validation, strongly connected components, the period, stationary
vectors by the column-replacement solve, and the d-step block chain used to
remove periodicity.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from . import numeric
from .errors import NumericError, ReducibleError, ValidationError


@dataclass(frozen=True)
class StochasticMatrix:
    labels: tuple[str, ...]
    entries: tuple[tuple[Any, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        if n == 0:
            raise ValidationError("empty alphabet")
        if len(set(self.labels)) != n:
            raise ValidationError("duplicate state labels")
        if len(self.entries) != n or any(len(row) != n for row in self.entries):
            raise ValidationError("transition matrix is not square over the alphabet")

    @classmethod
    def from_rows(cls, labels: Sequence[str], rows: Sequence[Sequence[Any]]) -> "StochasticMatrix":
        return cls(tuple(labels), tuple(tuple(r) for r in rows))

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def __getitem__(self, key):
        i, j = key
        if isinstance(i, str):
            i = self.index(i)
        if isinstance(j, str):
            j = self.index(j)
        return self.entries[i][j]

    def support(self) -> list[list[int]]:
        """Adjacency lists of the positive entries (hard zero test)."""
        return [[j for j, p in enumerate(row) if not numeric.is_zero(p)] for row in self.entries]

    def map(self, fn) -> "StochasticMatrix":
        return StochasticMatrix(self.labels, tuple(tuple(fn(x) for x in row) for row in self.entries))

    def restrict(self, indices: Sequence[int]) -> "StochasticMatrix":
        return StochasticMatrix(
            tuple(self.labels[i] for i in indices),
            tuple(tuple(self.entries[i][j] for j in indices) for i in indices),
        )


@dataclass
class ValidationReport:
    ok: bool
    row_deviations: dict[str, Any] = field(default_factory=dict)
    negative_entries: list[tuple[str, str]] = field(default_factory=list)
    components: list[list[str]] = field(default_factory=list)
    irreducible: bool = False

    def raise_for_failure(self) -> None:
        if self.ok:
            return
        parts = []
        if self.row_deviations:
            parts.append("rows not summing to 1: " + ", ".join(self.row_deviations))
        if self.negative_entries:
            parts.append("negative entries: " + ", ".join(f"{i}->{j}" for i, j in self.negative_entries))
        raise ValidationError("; ".join(parts) or "invalid stochastic matrix")


def _row_tolerance():
    return Fraction(2) ** (8 - numeric.precision())


def validate(P: StochasticMatrix) -> ValidationReport:
    """Row sums, signs and reachability structure of ``P``."""
    report = ValidationReport(ok=True)
    for i, row in enumerate(P.entries):
        for j, p in enumerate(row):
            if not numeric.is_zero(p) and numeric.to_float(_base(p)) < 0:
                report.negative_entries.append((P.labels[i], P.labels[j]))
        total = sum(row[1:], row[0])
        dev = _base(total) - 1
        if numeric.is_exact(dev):
            bad = dev != 0
        else:
            bad = abs(numeric.to_float(dev)) > float(_row_tolerance())
        if bad:
            report.row_deviations[P.labels[i]] = dev
    report.components = [[P.labels[k] for k in comp] for comp in strongly_connected_components(P.support())]
    report.irreducible = len(report.components) == 1
    report.ok = not report.row_deviations and not report.negative_entries
    return report


def _base(x):
    constant = getattr(x, "constant", None)
    return x if constant is None else constant


def strongly_connected_components(adj: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Components come out sorted by smallest member."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            if k < len(adj[v]):
                work[-1] = (v, k + 1)
                w = adj[v][k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return sorted(comps, key=min)


def sink_components(adj: Sequence[Sequence[int]]) -> list[list[int]]:
    """Strongly connected components with no edge leaving them."""
    comps = strongly_connected_components(adj)
    where = {}
    for c, comp in enumerate(comps):
        for v in comp:
            where[v] = c
    return [comp for c, comp in enumerate(comps) if all(where[w] == c for v in comp for w in adj[v])]


def _require_irreducible(P: StochasticMatrix) -> list[list[int]]:
    adj = P.support()
    comps = strongly_connected_components(adj)
    if len(comps) > 1:
        a, b = comps[0][0], comps[1][0]
        raise ReducibleError(f"reducible chain: states {P.labels[a]!r} and {P.labels[b]!r} are not mutually reachable")
    return adj


def _anchor(P: StochasticMatrix) -> int:
    return P.labels.index(min(P.labels))


def _levels(adj, start) -> list[int]:
    level = [-1] * len(adj)
    level[start] = 0
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if level[w] == -1:
                level[w] = level[v] + 1
                queue.append(w)
    return level


def period(P: StochasticMatrix) -> int:
    """gcd of cycle lengths, from BFS levels: gcd over edges of level(u)+1−level(v)."""
    adj = _require_irreducible(P)
    level = _levels(adj, _anchor(P))
    g = 0
    for u, nbrs in enumerate(adj):
        for v in nbrs:
            g = math.gcd(g, level[u] + 1 - level[v])
    return g


def stationary(P: StochasticMatrix, pivot_state: str | None = None) -> list:
    """Stationary vector by solving π^T M = e_pivot^T.

    M is I − P with the pivot column replaced by ones. The same elimination
    runs over rationals, balls, complex balls and jets.
    """
    n = P.size
    pivot = P.index(pivot_state) if pivot_state is not None else _anchor(P)
    one, zero = _unit(P.entries[0][0])
    # rows of M^T: (M^T)[c][r] = M[r][c]
    mt = []
    for c in range(n):
        if c == pivot:
            mt.append([one for _ in range(n)])
        else:
            mt.append([(one if r == c else zero) - P.entries[r][c] for r in range(n)])
    rhs = [one if c == pivot else zero for c in range(n)]
    try:
        return numeric.gauss_solve(mt, rhs)
    except NumericError as exc:
        raise NumericError("column-replacement matrix is singular") from exc


def _unit(sample):
    if isinstance(sample, (int, Fraction)):
        return Fraction(1), Fraction(0)
    return sample * 0 + 1, sample * 0


# -- aperiodic reduction -------------------------------------------------------

@dataclass(frozen=True)
class AcceleratedChain:
    chain: StochasticMatrix
    blocks: tuple[tuple[str, ...], ...]
    period: int
    matrices: dict[str, Any] | None = None
    cyclic_classes: tuple[tuple[str, ...], ...] = ()


def block_label(path: Sequence[str], sep: str = "") -> str:
    return sep.join(path)


def cyclic_classes(P: StochasticMatrix) -> tuple[int, list[list[int]]]:
    d = period(P)
    adj = P.support()
    level = _levels(adj, _anchor(P))
    classes = [[v for v in range(P.size) if level[v] % d == u] for u in range(d)]
    return d, classes


def accelerate(P: StochasticMatrix, matrices: Mapping[str, Any] | None = None, *, product=None) -> AcceleratedChain:
    """Block chain of admissible d-paths starting in the anchor's cyclic class.

    ``product(later, earlier)`` multiplies cocycle values; it defaults to ``@``
    so the block matrix is A_{i_{d−1}}⋯A_{i_0}.
    """
    d, classes = cyclic_classes(P)
    if d == 1:
        return AcceleratedChain(P, tuple((s,) for s in P.labels), 1, dict(matrices) if matrices else None,
                                (tuple(P.labels),))
    adj = P.support()
    paths: list[tuple[int, ...]] = []
    for start in classes[0]:
        frontier = [(start,)]
        for _ in range(d - 1):
            frontier = [p + (w,) for p in frontier for w in adj[p[-1]]]
        paths.extend(frontier)
    paths.sort(key=lambda p: tuple(P.labels[i] for i in p))
    names = [tuple(P.labels[i] for i in p) for p in paths]
    labels = [block_label(n) for n in names]
    if len(set(labels)) != len(labels):
        labels = [block_label(n, "-") for n in names]
    rows = []
    for p in paths:
        row = []
        for q in paths:
            w = P.entries[p[-1]][q[0]]
            for u in range(d - 1):
                w = w * P.entries[q[u]][q[u + 1]]
            row.append(w)
        rows.append(row)
    block_mats = None
    if matrices is not None:
        mul = product or (lambda later, earlier: later @ earlier)
        block_mats = {}
        for label, n in zip(labels, names):
            acc = matrices[n[0]]
            for s in n[1:]:
                acc = mul(matrices[s], acc)
            block_mats[label] = acc
    chain = StochasticMatrix.from_rows(labels, rows)
    return AcceleratedChain(chain, tuple(names), d, block_mats,
                            tuple(tuple(P.labels[i] for i in c) for c in classes))
