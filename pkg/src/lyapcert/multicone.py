"""Multicone validation and the branch-state extension.

A branch state ((i, a), (j, b)) remembers that the orbit sits in component
a of M_i and moves to letter j, landing in component b = β(i, a, j) of M_j.
Components are indexed from 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from . import numeric
from .errors import MulticoneError, ValidationError
from .markov import StochasticMatrix, sink_components
from .projective import Arc, Mat2, arc_contains, strict_image_containment

Multicone = Mapping[str, Sequence[Arc]]


@dataclass(frozen=True, order=True)
class BranchState:
    src: str
    src_comp: int
    dst: str
    dst_comp: int

    @property
    def source(self) -> tuple[str, int]:
        return (self.src, self.src_comp)

    @property
    def target(self) -> tuple[str, int]:
        return (self.dst, self.dst_comp)

    @property
    def letter(self) -> str:
        """τ(r): the letter being applied."""
        return self.dst

    def __str__(self) -> str:
        return f"({self.src}:{self.src_comp},{self.dst}:{self.dst_comp})"


@dataclass(frozen=True)
class EdgeSign:
    target_comp: int
    sign: int


SignTable = dict[tuple[str, int, str], EdgeSign]


def _closures_disjoint(a: Arc, b: Arc) -> bool:
    for p in a.endpoints():
        if arc_contains(b, p, strict=False):
            return False
    for p in b.endpoints():
        if arc_contains(a, p, strict=False):
            return False
    return True


def check_components(M: Multicone) -> None:
    for label, arcs in M.items():
        if not arcs:
            raise ValidationError(f"multicone for {label!r} has no components")
        for x in range(len(arcs)):
            for y in range(x + 1, len(arcs)):
                if not _closures_disjoint(arcs[x], arcs[y]):
                    raise ValidationError(f"components {x} and {y} of M_{label} have intersecting closures")


def validate_multicone(A: Mapping[str, Mat2], P: StochasticMatrix, M: Multicone) -> SignTable:
    """Find β(i, a, j) and the sign ε for every admissible edge and component.

    Raises :class:`MulticoneError` listing every (i, a, j) without a containing
    component.
    """
    missing = [s for s in P.labels if s not in M]
    if missing:
        raise ValidationError(f"no multicone given for letters {missing}")
    for s in P.labels:
        if numeric.is_zero(A[s].det()):
            raise ValidationError(f"matrix A_{s} is singular")
    check_components(M)
    table: SignTable = {}
    violations = []
    adj = P.support()
    for i_idx, i in enumerate(P.labels):
        for j_idx in adj[i_idx]:
            j = P.labels[j_idx]
            for a, source in enumerate(M[i]):
                hits = []
                for b, target in enumerate(M[j]):
                    sgn = strict_image_containment(target, A[j], source)
                    if sgn is not None:
                        hits.append(EdgeSign(b, sgn))
                if len(hits) > 1:
                    raise MulticoneError(f"edge ({i},{a},{j}) lands in several components; components overlap")
                if not hits:
                    violations.append((i, a, j))
                    continue
                table[(i, a, j)] = hits[0]
    if violations:
        listing = ", ".join(f"({i},{a},{j})" for i, a, j in violations)
        raise MulticoneError(f"strict containment fails on {listing}", violations)
    return table


@dataclass(frozen=True)
class BranchSystem:
    states: tuple[BranchState, ...]
    Q: StochasticMatrix
    classes: tuple[tuple[int, ...], ...]
    table: SignTable

    def index(self, state: BranchState) -> int:
        return self.states.index(state)


def branch_states(P: StochasticMatrix, M: Multicone, table: SignTable) -> list[BranchState]:
    states = []
    adj = P.support()
    for i_idx, i in enumerate(P.labels):
        for j_idx in adj[i_idx]:
            j = P.labels[j_idx]
            for a in range(len(M[i])):
                states.append(BranchState(i, a, j, table[(i, a, j)].target_comp))
    return sorted(states)


def branch_matrix(P: StochasticMatrix, states: Sequence[BranchState], entry=None) -> StochasticMatrix:
    """Q_{r,r'} = P_{τ(r),τ(r')} when t(r) = s(r'), else 0."""
    zero = P.entries[0][0] * 0
    rows = []
    for r in states:
        row = []
        for s in states:
            if r.target == s.source:
                row.append(P[r.dst, s.dst])
            else:
                row.append(zero)
        rows.append(row)
    return StochasticMatrix.from_rows([str(s) for s in states], rows)


def build_branch_system(table: SignTable, P: StochasticMatrix, M: Multicone) -> BranchSystem:
    states = branch_states(P, M, table)
    Q = branch_matrix(P, states)
    classes = tuple(tuple(c) for c in sink_components(Q.support()))
    return BranchSystem(tuple(states), Q, classes, table)


def select_class(B: BranchSystem, choice: int | None = None) -> tuple[int, ...]:
    """The recurrent class to work on; default: the one holding the smallest state."""
    if choice is None:
        return min(B.classes, key=lambda c: min(B.states[i] for i in c))
    if not 0 <= choice < len(B.classes):
        raise ValidationError(f"class choice {choice} out of range (there are {len(B.classes)} classes)")
    ordered = sorted(B.classes, key=lambda c: min(B.states[i] for i in c))
    return ordered[choice]
