"""System description files.

A system file is a JSON document in which every number is a string, so
rationals stay exact and entries may be expressions in the parameter ``t``::

    {
      "alphabet": ["x", "y"],
      "matrices": {"x": [["1", "0"], ["1", "4"]], ...},
      "transition": [["1/3", "2/3"], ...],
      "multicone": {"x": [["-5/12", "31/30"]], ...},
      "charts": {"x": [[["-5/12", "93/200"], ["1", "9/20"]]]},
      "parameter": {"t0": "3"},
      "base_period": "1",
      "options": {"precision_bits": 256, "epsilon": "1e-30", ...}
    }

Arcs are pairs of slopes in increasing-slope order; an arc whose first slope
exceeds its second runs through ∞. ``charts`` is optional and gives one frame
per multicone component.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import flint

from . import numeric
from .errors import ParseError, ValidationError
from .family import Expr, Jet, evaluate, parse, to_string
from .lift import _is_inf, chart_frames_arc, default_chart
from .markov import StochasticMatrix, accelerate
from .projective import Arc, Mat2

KNOWN_KEYS = {"alphabet", "matrices", "transition", "multicone", "charts", "parameter", "base_period", "options",
              "description"}


def _expr(text: Any, where: str) -> Expr:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = str(text)
    if not isinstance(text, str):
        raise ParseError(f"{where}: expected a string, got {type(text).__name__}")
    try:
        return parse(text)
    except ParseError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def _slope(text: Any, where: str):
    if isinstance(text, str) and _is_inf(text):
        return "inf"
    return _expr(text, where)


@dataclass
class SystemFile:
    alphabet: list[str]
    matrices: dict[str, list[list[Expr]]]
    transition: list[list[Expr]]
    multicone: dict[str, list[tuple[Any, Any]]] = field(default_factory=dict)
    charts: dict[str, list[list[list[Expr]]]] | None = None
    t0: Expr | None = None
    base_period: int = 1
    options: dict[str, Any] = field(default_factory=dict)
    description: str = ""

    # -- loading ------------------------------------------------------------------

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "SystemFile":
        if not isinstance(doc, Mapping):
            raise ParseError("system file must be a JSON object")
        unknown = set(doc) - KNOWN_KEYS
        if unknown:
            raise ParseError(f"unknown keys in system file: {sorted(unknown)}")
        for key in ("alphabet", "matrices", "transition"):
            if key not in doc:
                raise ParseError(f"system file lacks {key!r}")
        alphabet = [str(a) for a in doc["alphabet"]]
        if len(set(alphabet)) != len(alphabet) or not alphabet:
            raise ValidationError("alphabet must be a non-empty list of distinct labels")
        mats = {}
        for a in alphabet:
            rows = doc["matrices"].get(a)
            if rows is None or len(rows) != 2 or any(len(r) != 2 for r in rows):
                raise ValidationError(f"matrix for {a!r} must be 2x2")
            mats[a] = [[_expr(x, f"matrices.{a}") for x in r] for r in rows]
        trans = doc["transition"]
        if len(trans) != len(alphabet) or any(len(r) != len(alphabet) for r in trans):
            raise ValidationError("transition matrix shape does not match the alphabet")
        transition = [[_expr(x, "transition") for x in r] for r in trans]
        multicone = {}
        for a, arcs in (doc.get("multicone") or {}).items():
            if a not in alphabet:
                raise ValidationError(f"multicone given for unknown letter {a!r}")
            parsed = []
            for arc in arcs:
                if len(arc) != 2:
                    raise ValidationError(f"arc for {a!r} must have two endpoints")
                parsed.append((_slope(arc[0], f"multicone.{a}"), _slope(arc[1], f"multicone.{a}")))
            multicone[a] = parsed
        charts = None
        if doc.get("charts"):
            charts = {}
            for a, frames in doc["charts"].items():
                charts[a] = [[[_expr(x, f"charts.{a}") for x in r] for r in fr] for fr in frames]
        param = doc.get("parameter") or {}
        t0 = _expr(param["t0"], "parameter.t0") if "t0" in param else None
        return cls(alphabet, mats, transition, multicone, charts, t0, int(doc.get("base_period", 1)),
                   dict(doc.get("options") or {}), str(doc.get("description", "")))

    @classmethod
    def load(cls, path: str | Path) -> "SystemFile":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc.msg})", exc.pos) from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        s = lambda e: "inf" if isinstance(e, str) else to_string(e)
        doc: dict[str, Any] = {}
        if self.description:
            doc["description"] = self.description
        doc["alphabet"] = list(self.alphabet)
        doc["matrices"] = {a: [[s(x) for x in r] for r in self.matrices[a]] for a in self.alphabet}
        doc["transition"] = [[s(x) for x in r] for r in self.transition]
        if self.multicone:
            doc["multicone"] = {a: [[s(p), s(q)] for p, q in arcs] for a, arcs in self.multicone.items()}
        if self.charts:
            doc["charts"] = {a: [[[s(x) for x in r] for r in fr] for fr in frames] for a, frames in self.charts.items()}
        if self.t0 is not None:
            doc["parameter"] = {"t0": s(self.t0)}
        if self.base_period != 1:
            doc["base_period"] = str(self.base_period)
        if self.options:
            doc["options"] = dict(self.options)
        return doc

    def dump(self, path: str | Path | None = None) -> str:
        text = _compact(json.dumps(self.to_dict(), indent=2, ensure_ascii=False)) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    # -- evaluation -----------------------------------------------------------------

    @property
    def parametric(self) -> bool:
        exprs = [x for a in self.alphabet for r in self.matrices[a] for x in r]
        exprs += [x for r in self.transition for x in r]
        return any(e.depends_on_t() for e in exprs)

    def base_point(self):
        """t₀ as an exact rational when possible, else as a real ball."""
        if self.t0 is None:
            return Fraction(0)
        return evaluate(self.t0, Fraction(0))

    def instantiate(self, t=None, *, exact: bool = True):
        """(A, P, M) with every entry evaluated at ``t`` (defaults to t₀).

        Entries are brought to one scalar kind: exact rationals if everything is
        rational (and ``exact``), otherwise balls, complex balls or jets
        following ``t``.
        """
        if t is None:
            t = self.base_point()
        raw_A = {a: [[evaluate(x, t) for x in r] for r in self.matrices[a]] for a in self.alphabet}
        raw_P = [[evaluate(x, t) for x in r] for r in self.transition]
        values = [x for m in raw_A.values() for r in m for x in r] + [x for r in raw_P for x in r]
        target = _common_kind(values, t, exact)
        conv = lambda x: _convert(x, target)
        A = {a: Mat2.rows([[conv(x) for x in r] for r in m]) for a, m in raw_A.items()}
        P = StochasticMatrix.from_rows(self.alphabet, [[conv(x) for x in r] for r in raw_P])
        M = self.arcs(frame_kind=None if target == "jet" else target) if self.multicone else None
        return A, P, M

    def arcs(self, frame_kind=None) -> dict[str, list[Arc]]:
        """The multicone as frames (explicit charts when given, else default charts)."""
        if not self.multicone:
            raise ValidationError("the system file has no multicone")
        out = {}
        for a, arcs in self.multicone.items():
            frames = []
            for k, (p, q) in enumerate(arcs):
                pv = p if isinstance(p, str) else evaluate(p, Fraction(0))
                qv = q if isinstance(q, str) else evaluate(q, Fraction(0))
                if not isinstance(pv, str) and not isinstance(qv, str):
                    pv, qv = numeric.promote(pv, qv)
                if self.charts and a in self.charts:
                    if len(self.charts[a]) != len(arcs):
                        raise ValidationError(f"charts for {a!r} do not match its {len(arcs)} components")
                    entries = [[evaluate(x, Fraction(0)) for x in r] for r in self.charts[a][k]]
                    kind = _common_kind([x for r in entries for x in r], Fraction(0), True)
                    frame = Mat2.rows([[_convert(x, kind) for x in r] for r in entries])
                    if not chart_frames_arc(frame, pv, qv):
                        raise ValidationError(f"chart {k} of {a!r} does not frame the arc ({p}, {q})")
                else:
                    frame = default_chart(pv, qv)
                if frame_kind is not None:
                    frame = frame.map(lambda x: _convert(x, frame_kind))
                frames.append(Arc(frame))
            out[a] = frames
        return out

    def with_default_charts(self) -> "SystemFile":
        copy = SystemFile.from_dict(self.to_dict())
        copy.charts = None
        return copy

    # -- base-chain reduction ----------------------------------------------------------

    def reduce_base(self) -> "SystemFile":
        """The d-step block system; an unchanged copy when the base chain is aperiodic."""
        P0 = self.instantiate(exact=True)[1]
        acc = accelerate(P0)
        if acc.period == 1:
            return SystemFile.from_dict(self.to_dict())
        idx = {a: i for i, a in enumerate(self.alphabet)}
        names = acc.blocks
        labels = list(acc.chain.labels)
        mats = {}
        for label, path in zip(labels, names):
            prod = self.matrices[path[0]]
            for s in path[1:]:
                prod = _expr_matmul(self.matrices[s], prod)
            mats[label] = prod
        trans = []
        for p in names:
            row = []
            for q in names:
                w = self.transition[idx[p[-1]]][idx[q[0]]]
                for u in range(len(q) - 1):
                    w = w * self.transition[idx[q[u]]][idx[q[u + 1]]]
                row.append(w)
            trans.append(row)
        opts = dict(self.options)
        return SystemFile(labels, mats, trans, {}, None, self.t0, self.base_period * acc.period, opts,
                          self.description)


_FLAT_LIST = re.compile(r'\[\s+("[^"\]]*"(?:,\s+"[^"\]]*")*)\s+\]')


def _compact(text: str) -> str:
    """Put innermost lists of strings on one line."""
    text = _FLAT_LIST.sub(lambda m: "[" + re.sub(r'",\s+"', '", "', m.group(1)) + "]", text)
    return re.sub(r'\[\s+(\[[^\[\]]*\](?:,\s+\[[^\[\]]*\])*)\s+\]',
                  lambda m: "[" + re.sub(r'\],\s+\[', '], [', m.group(1)) + "]", text)


def _expr_matmul(a, b):
    return [[a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)] for i in range(2)]


def _common_kind(values, t, exact: bool) -> str:
    if isinstance(t, Jet):
        return "jet"
    if isinstance(t, flint.acb) or any(isinstance(v, flint.acb) for v in values):
        return "complex"
    if not exact or isinstance(t, flint.arb) or any(isinstance(v, flint.arb) for v in values):
        return "real"
    return "exact"


def _convert(x, kind: str):
    if kind == "exact":
        return Fraction(x)
    if kind == "real":
        return numeric.real(x)
    if kind == "complex":
        return numeric.complex_(x)
    return x


def load_system(path: str | Path) -> SystemFile:
    return SystemFile.load(path)


__all__ = ["SystemFile", "load_system"]
