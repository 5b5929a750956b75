"""Certified derivatives and Taylor coefficients of λ along an analytic family.

The kernel pipeline runs unchanged over jets, so one pass at order Q returns
a₀ … a_Q. Two certifiers sit on top of it. The default one is a Cauchy-formula
bound that needs five constants on a disk U = {|z − t₀| ≤ c}; those constants
may be supplied (and are then trusted) or estimated by sampling the boundary
circle. The optional first-order certifier works from real data at t₀ only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import flint
import numpy as np

from . import numeric
from .certify import _alpha, _lt, k_rho, rounding_floor
from .errors import NumericError, ValidationError
from .family import Call, Jet, eval_constant, evaluate, parse, walk
from .kernel import OpCounter, build_operator, coefficients, partial_sum_coefficients
from .lift import LiftedSystem, build_lift, constant, positive_matrices
from .markov import StochasticMatrix, accelerate, stationary, validate
from .multicone import BranchSystem, SignTable, branch_matrix, build_branch_system, select_class, validate_multicone
from .projective import Mobius, f_conjugate
from .systemfile import SystemFile

USER = "user-certified"
ESTIMATED = "boundary-estimated"
START_SAMPLES = 1024
MAX_SAMPLES = 1 << 15
AGREEMENT = 0.01
SAMPLE_PRECISION = 64


def _r(x) -> flint.arb:
    return numeric.real(constant(x))


def _const(text) -> flint.arb:
    return numeric.real(eval_constant(parse(str(text))))


# -- the family at its base point ---------------------------------------------------

@dataclass
class FamilyLift:
    """The branch structure decided at t₀, reused for jets and complex samples."""

    source: SystemFile
    t0: Any
    table: SignTable
    branch: BranchSystem
    cls: tuple[int, ...]
    system: LiftedSystem

    @property
    def states(self):
        return [self.branch.states[i] for i in self.cls]


def prepare(source: SystemFile, class_choice: int | None = None) -> FamilyLift:
    """Validate the family at t₀ and fix the branch system and recurrent class."""
    A, P, M = source.instantiate()
    if M is None:
        raise ValidationError("the system file has no multicone")
    validate(P).raise_for_failure()
    table = validate_multicone(A, P, M)
    branch = build_branch_system(table, P, M)
    cls = select_class(branch, class_choice)
    system = build_lift(A, P, M, branch, cls, source.base_period)
    return FamilyLift(source, source.base_point(), table, branch, cls, system)


def lift_at(family: FamilyLift, t) -> LiftedSystem:
    """The lift at ``t`` (a real ball or a jet) using the branch signs of t₀."""
    A, P, M = family.source.instantiate(t, exact=False)
    return build_lift(A, P, M, family.branch, family.cls, family.source.base_period)


def jet_lift(family: FamilyLift, order: int) -> LiftedSystem:
    return lift_at(family, Jet.variable(numeric.real(family.t0), order))


def derivative_series(family: FamilyLift | SystemFile, order: int, n: int, m: int, *,
                      counter: OpCounter | None = None) -> list[flint.arb]:
    """a₀ … a_order of Λ_{n,m}(t) at t₀, from one jet-valued kernel run."""
    if order < 0:
        raise ValueError("order must be non-negative")
    fam = family if isinstance(family, FamilyLift) else prepare(family)
    system = jet_lift(fam, order)
    T = build_operator(system, m, order, counter)
    return partial_sum_coefficients(system, n, m, order, T)


# -- Ω-constants ----------------------------------------------------------------------

@dataclass
class OmegaData:
    """Constants on the disk U = {|z − t₀| ≤ c} for the Cauchy bound."""

    t0: Any
    c: flint.arb
    rho_bar: flint.arb
    Q_bar: flint.arb
    D_bar: flint.arb
    M_ell: flint.arb
    M_sigma_pi: flint.arb
    m_pi: flint.arb
    provenance: str = USER

    @classmethod
    def from_options(cls, options: Mapping[str, Any], t0=None, *, radius=None, rho_bar=None) -> "OmegaData":
        consts = options.get("omega_constants")
        if not consts:
            raise ValidationError("no omega_constants given; supply them in the file or estimate them")
        missing = [k for k in ("Q_bar", "D_bar", "M_ell", "M_sigma_pi", "m_pi") if k not in consts]
        if missing:
            raise ValidationError(f"omega_constants lacks {missing}")
        c = radius if radius is not None else options.get("disk_radius")
        rb = rho_bar if rho_bar is not None else options.get("rho_bar")
        if c is None or rb is None:
            raise ValidationError("the Cauchy bound needs disk_radius and rho_bar")
        return cls(t0, _const(c), _const(rb), *(_const(consts[k]) for k in
                                                  ("Q_bar", "D_bar", "M_ell", "M_sigma_pi", "m_pi")))

    def check(self, rho=None) -> None:
        """Raise unless the constants are usable: c > 0, ρ < ρ̄ < 1, D̄ < 1, m̄_π > 0, ρ̄Q̄ < 1."""
        if not self.c > 0:
            raise ValidationError("disk radius c must be positive")
        if not (self.rho_bar > 0 and self.rho_bar < 1):
            raise ValidationError("rho_bar must lie in (0, 1)")
        if rho is not None and not _r(rho) < self.rho_bar:
            raise ValidationError("rho_bar must exceed the contraction factor at t0")
        if not self.D_bar < 1:
            raise ValidationError("D_bar must be below 1")
        if not self.m_pi > 0:
            raise ValidationError("m_pi must be positive")
        if not self.rho_bar * self.Q_bar < 1:
            raise NumericError("rho_bar * Q_bar >= 1: the Cauchy bound diverges; use a smaller disk radius")

    def to_dict(self, digits: int = 20) -> dict:
        ds = lambda x: numeric.decimal_string(x, digits)
        return {
            "c": ds(self.c), "rho_bar": ds(self.rho_bar), "Q_bar": ds(self.Q_bar), "D_bar": ds(self.D_bar),
            "M_ell": ds(self.M_ell), "M_sigma_pi": ds(self.M_sigma_pi), "m_pi": ds(self.m_pi),
            "provenance": self.provenance,
        }


@dataclass
class Sample:
    """Per-point quantities of the complexified lift at one z."""

    f_max: float
    re_min: float
    q_row: float
    top: float
    ell: float
    sum_pi: float
    min_pi: float
    branch_re: float


def _branch_arguments(source: SystemFile) -> list:
    """Arguments of sqrt/log calls that move with t (their cut must be avoided)."""
    exprs = [x for a in source.alphabet for r in source.matrices[a] for x in r]
    exprs += [x for r in source.transition for x in r]
    return [node.arg for e in exprs for node in walk(e) if isinstance(node, Call) and node.arg.depends_on_t()]


def complex_maps(family: FamilyLift, z: flint.acb):
    """(Möbius maps, Q, π) of the lift complexified at ``z``."""
    A, P, M = family.source.instantiate(z)
    states = family.states
    Q = branch_matrix(P, states)
    Bs, _ = positive_matrices(A, states, family.table, M)
    if family.system.lift_period > 1:
        labels = [str(s) for s in states]
        acc = accelerate(StochasticMatrix.from_rows(labels, Q.entries), dict(zip(labels, Bs)))
        Q = acc.chain
        Bs = [acc.matrices[lab] for lab in Q.labels]
    pi = stationary(Q)
    return [Mobius.from_mat(f_conjugate(B)) for B in Bs], Q, pi


def sample_point(family: FamilyLift, z: flint.acb, rho_bar: flint.arb, branch_args=()) -> Sample:
    fs, Q, pi = complex_maps(family, z)
    rb = numeric.to_float(rho_bar)
    f_max = re_min = top = ell = 0.0
    re_min = math.inf
    for f in fs:
        a, b, g, d = (complex(numeric.to_float(x.real), numeric.to_float(x.imag)) for x in
                      (f.alpha, f.beta, f.gamma, f.delta))
        gap = abs(d) ** 2 - abs(g) ** 2
        if gap <= 0:
            f_max = math.inf
        else:
            center = (b * d.conjugate() - a * g.conjugate()) / gap
            f_max = max(f_max, abs(center) + abs(a * d - b * g) / gap)
        re_min = min(re_min, d.real - abs(g))
        top = max(top, abs(g / d))
        denom = abs(d) - rb * abs(g)
        ell = max(ell, abs(g) / denom if denom > 0 else math.inf)
    mags = [abs(complex(numeric.to_float(x.real), numeric.to_float(x.imag))) for x in pi]
    q_row = max(sum(abs(complex(numeric.to_float(x.real), numeric.to_float(x.imag))) for x in row)
                for row in Q.entries)
    branch_re = min((numeric.to_float(evaluate(e, z).real) for e in branch_args), default=math.inf)
    return Sample(f_max, re_min, q_row, top, ell, sum(mags), min(mags), branch_re)


_MAX_FIELDS = ("f_max", "q_row", "top", "ell", "sum_pi")
_MIN_FIELDS = ("re_min", "min_pi", "branch_re")


def _combine(samples: Sequence[Sample]) -> dict[str, float]:
    out = {k: max(getattr(s, k) for s in samples) for k in _MAX_FIELDS}
    out.update({k: min(getattr(s, k) for s in samples) for k in _MIN_FIELDS})
    return out


def _agree(a: Mapping[str, float], b: Mapping[str, float]) -> bool:
    for k in a:
        x, y = a[k], b[k]
        if math.isinf(x) or math.isinf(y):
            if x != y:
                return False
            continue
        if abs(x - y) > AGREEMENT * max(abs(x), abs(y), 1e-300):
            return False
    return True


@dataclass
class OmegaReport:
    """Boundary estimates on |z − t₀| = c and the pass/fail state of (Ω1)–(Ω5)."""

    t0: Any
    c: float
    rho_bar: float
    rho: float
    samples: int
    estimates: dict[str, float]
    conditions: dict[str, bool]
    notes: dict[str, str] = field(default_factory=dict)
    consistent: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.conditions.values()) and all(self.consistent.values())

    def omega_data(self) -> OmegaData:
        e = self.estimates
        return OmegaData(self.t0, numeric.real(Fraction(self.c).limit_denominator(10 ** 12)),
                         numeric.real(self.rho_bar), numeric.real(max(1.0, e["q_row"])), numeric.real(e["top"]),
                         numeric.real(e["ell"]), numeric.real(e["sum_pi"]), numeric.real(e["min_pi"]), ESTIMATED)

    def to_dict(self) -> dict:
        return {
            "t0": str(self.t0), "c": self.c, "rho_bar": self.rho_bar, "rho": self.rho, "samples": self.samples,
            "provenance": ESTIMATED,
            "estimates": {
                "max_f": self.estimates["f_max"], "Q_bar": max(1.0, self.estimates["q_row"]),
                "D_bar": self.estimates["top"], "M_ell": self.estimates["ell"],
                "M_sigma_pi": self.estimates["sum_pi"], "m_pi": self.estimates["min_pi"],
                "min_re_denominator": self.estimates["re_min"],
            },
            "conditions": {k: bool(v) for k, v in self.conditions.items()},
            "user_constants_cover_estimates": dict(self.consistent),
            "notes": dict(self.notes),
            "ok": self.ok,
        }


def _real_points(t0, c, count: int = 9):
    """Real points of U, exact when t₀ and c are rational."""
    if isinstance(t0, Fraction) and isinstance(c, Fraction):
        return [t0 + c * Fraction(2 * k - (count - 1), count - 1) for k in range(count)]
    t0r, cr = numeric.real(t0), numeric.real(c)
    return [t0r + cr * (2 * k - (count - 1)) / (count - 1) for k in range(count)]


def _omega1_real(family: FamilyLift, c) -> tuple[bool, str]:
    """The multicone and its sign pattern persist at real points of U."""
    for t in _real_points(family.t0, c):
        try:
            A, P, M = family.source.instantiate(t)
            validate(P).raise_for_failure()
            table = validate_multicone(A, P, M)
        except (ValidationError, NumericError) as exc:
            return False, f"at t = {t}: {exc}"
        if table != family.table:
            return False, f"sign table changes at t = {t}"
    return True, "multicone valid with unchanged signs at 9 real points of U"


def check_omega(family: FamilyLift | SystemFile, c, rho_bar, omega: OmegaData | None = None, *,
                start: int = START_SAMPLES) -> OmegaReport:
    """Estimate the Ω-constants on the circle |z − t₀| = c and flag (Ω1)–(Ω5).

    Every quantity is a modulus (or real part) of a function holomorphic in z,
    so its extremum over U sits on the boundary circle. The circle is sampled
    at ``start`` points and the count doubled until two successive
    resolutions agree to 1%.
    """
    fam = family if isinstance(family, FamilyLift) else prepare(family)
    c_val = Fraction(c) if isinstance(c, (int, Fraction)) else eval_constant(parse(str(c)))
    rb_val = Fraction(rho_bar) if isinstance(rho_bar, (int, Fraction)) else eval_constant(parse(str(rho_bar)))
    args = _branch_arguments(fam.source)
    notes: dict[str, str] = {}
    with numeric.working_precision(SAMPLE_PRECISION):
        t0, cr, rb = numeric.real(fam.t0), numeric.real(c_val), numeric.real(rb_val)
        rho = numeric.to_float(_r(fam.system.rho))

        def point(k: int, N: int) -> Sample:
            z = flint.acb(t0) + flint.acb(cr) * flint.acb(flint.arb(2 * k) / N).exp_pi_i()
            return sample_point(fam, z, rb, args)

        try:
            samples = [point(k, start) for k in range(start)]
            prev = _combine(samples)
            N = start
            while True:
                samples += [point(2 * k + 1, 2 * N) for k in range(N)]
                N *= 2
                cur = _combine(samples)
                if _agree(prev, cur) or N >= MAX_SAMPLES:
                    if N >= MAX_SAMPLES and not _agree(prev, cur):
                        notes["resolution"] = f"estimates still moving at {N} samples"
                    break
                prev = cur
        except (NumericError, ZeroDivisionError) as exc:
            raise NumericError(f"complexified lift failed on the boundary circle: {exc}") from exc
    est = cur
    ok1, note1 = _omega1_real(fam, c_val)
    notes["Omega1"] = note1
    if est["branch_re"] <= 0:
        ok1 = False
        notes["Omega1"] = "a sqrt/log argument reaches its branch cut on the circle"
    rbf = float(rb_val)
    conditions = {
        "Omega1": ok1,
        "Omega2": est["min_pi"] > 0,
        "Omega3": rho < rbf < 1 and est["f_max"] < rbf,
        "Omega4": est["re_min"] > 0,
        "Omega5": rbf * max(1.0, est["q_row"]) < 1,
    }
    consistent = {}
    if omega is not None:
        f = numeric.to_float
        slack = 1 + AGREEMENT
        consistent = {
            "Q_bar": f(omega.Q_bar) * slack >= max(1.0, est["q_row"]),
            "D_bar": f(omega.D_bar) * slack >= est["top"],
            "M_ell": f(omega.M_ell) * slack >= est["ell"],
            "M_sigma_pi": f(omega.M_sigma_pi) * slack >= est["sum_pi"],
            "m_pi": f(omega.m_pi) <= est["min_pi"] * slack,
        }
    return OmegaReport(fam.t0, float(c_val), rbf, rho, N, est, conditions, notes, consistent)


# -- the Cauchy bound --------------------------------------------------------------------

def derivative_error_bound(omega: OmegaData, d: int, q: int, n: int, m: int, *, K=None) -> flint.arb:
    """Bound on |λ^{(q)}(t₀) − Λ^{(q)}_{n,m}(t₀)| from the Cauchy formula on U."""
    if n < 1 or m < 2:
        raise ValueError("the derivative bound needs n >= 1 and m >= 2")
    rb, Qb, Db = omega.rho_bar, omega.Q_bar, omega.D_bar
    if not rb * Qb < 1:
        raise NumericError("rho_bar * Q_bar >= 1: the Cauchy bound diverges; use a smaller disk radius")
    K = k_rho(rb) if K is None else K
    alpha = _alpha(rb ** (m - 1) * K, n)
    rd = rb * Db
    first = omega.M_sigma_pi * omega.M_ell * numeric.artanh(rb) / (rb * (1 - rb * Qb)) * rb ** n
    second = 2 * omega.M_sigma_pi ** 2 / omega.m_pi * (
        alpha * (1 / (1 - rd)).log() + (n - 1) * rd ** m / (m * (1 - rd)))
    return math.factorial(q) * Qb ** n / (omega.c ** q * d) * (first + second)


def coefficient_bound(omega: OmegaData, d: int, q: int, n: int, m: int, *, K=None) -> flint.arb:
    """The same bound for the Taylor coefficient a_q = λ^{(q)}/q!."""
    return derivative_error_bound(omega, d, q, n, m, K=K) / math.factorial(q)


def _smallest_m(bound, eps, start: int = 2) -> int:
    hi = start
    while not _lt(bound(hi), eps):
        hi *= 2
        if hi > 1 << 16:
            raise NumericError("no truncation order m reaches the requested epsilon")
    lo = max(2, hi // 2)
    if _lt(bound(lo), eps):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _lt(bound(mid), eps):
            hi = mid
        else:
            lo = mid
    return hi


def choose_taylor_params(omega: OmegaData, d: int, order: int, epsilon) -> tuple[list[tuple[int, int]], int, int]:
    """Per-order (n_q, m_q), then one shared (N, M) good for every order.

    n_q is the smallest n with the geometric term below ε/2 and m_q the
    smallest m with the whole coefficient bound below ε. Since the bound grows
    with n through Q̄ⁿ, the shared run uses N = max n_q and the smallest M that
    keeps every order below ε at N.
    """
    omega.check()
    eps = numeric.real(epsilon)
    K = k_rho(omega.rho_bar)
    rb, Qb = omega.rho_bar, omega.Q_bar
    head = omega.M_sigma_pi * omega.M_ell * numeric.artanh(rb) / (rb * (1 - rb * Qb))
    per = []
    for q in range(order + 1):
        scale = 1 / (omega.c ** q * d)
        n = 2
        while not _lt(scale * head * (Qb * rb) ** n, eps / 2):
            n += 1
            if n > 1 << 16:
                raise NumericError("no n reaches the requested epsilon")
        m = _smallest_m(lambda mm: coefficient_bound(omega, d, q, n, mm, K=K), eps)
        per.append((n, m))
    N = max(n for n, _ in per)
    worst = lambda mm: max((coefficient_bound(omega, d, q, N, mm, K=K) for q in range(order + 1)),
                           key=lambda x: numeric.to_float(x))
    M = _smallest_m(worst, eps, max(2, min(m for _, m in per)))
    return per, N, M


@dataclass
class TaylorResult:
    coefficients: list[flint.arb]
    bounds: list[flint.arb]
    rounding: list[flint.arb]
    per_order: list[tuple[int, int]]
    n: int
    m: int
    omega: OmegaData
    epsilon: Any
    mode: str
    precision: int
    d: int

    @property
    def rigor(self) -> str:
        return "rigorous" if self.omega.provenance == USER else "conditionally rigorous"

    @property
    def ok(self) -> bool:
        return all(_lt(b + r, self.epsilon) for b, r in zip(self.bounds, self.rounding))

    def to_dict(self, digits: int | None = None) -> dict:
        up = lambda x: numeric.decimal_string(numeric.upper(x), 6)
        return {
            "t0": str(self.omega.t0),
            "coefficients": [
                {"order": q, "value": numeric.decimal_string(a, digits), "bound": up(b), "rounding_allowance": up(r),
                 "n": nq, "m": mq}
                for q, (a, b, r, (nq, mq)) in enumerate(zip(self.coefficients, self.bounds, self.rounding,
                                                             self.per_order))
            ],
            "n": self.n, "m": self.m, "d": self.d,
            "epsilon": str(self.epsilon), "certified": self.ok, "rigor": self.rigor,
            "omega": self.omega.to_dict(), "mode": self.mode, "precision_bits": self.precision,
        }


def taylor(family: FamilyLift | SystemFile, order: int, epsilon, omega: OmegaData) -> TaylorResult:
    """a₀ … a_order with per-coefficient Cauchy bounds below ``epsilon``."""
    fam = family if isinstance(family, FamilyLift) else prepare(family)
    omega.check(fam.system.rho)
    d = fam.system.d
    per, N, M = choose_taylor_params(omega, d, order, epsilon)
    if rounding_floor(N) >= numeric.to_float(numeric.real(epsilon)):
        raise NumericError("epsilon is below the rounding floor at this precision; raise the precision")
    K = k_rho(omega.rho_bar)
    values = derivative_series(fam, order, N, M)
    bounds = [numeric.upper(coefficient_bound(omega, d, q, N, M, K=K)) for q in range(order + 1)]
    if numeric.interval_mode():
        rounding = [flint.arb(v.rad()) for v in values]
    else:
        tol = numeric.real(numeric.tolerance())
        rounding = [numeric.upper(tol * N * abs(v).max(flint.arb(1))) for v in values]
    values = [flint.arb(v.mid()) for v in values]
    return TaylorResult(values, bounds, rounding, per, N, M, omega, epsilon, numeric.current().mode,
                        numeric.precision(), d)


# -- the first-order certifier -------------------------------------------------------------

@dataclass
class FirstOrderConstants:
    m_pi: flint.arb
    M_pi: flint.arb
    M_sigma_pi: flint.arb
    M_Q: flint.arb
    M_top: flint.arb
    M_f: flint.arb
    M_l2: flint.arb
    M_l22: flint.arb
    M_l12: flint.arb
    M_g12: flint.arb
    M_g22: flint.arb
    provenance: str = "grid-estimated"

    @classmethod
    def zero(cls, m_pi) -> "FirstOrderConstants":
        z = flint.arb(0)
        return cls(numeric.real(m_pi), z, z, z, z, z, z, z, z, z, z, USER)

    def to_dict(self, digits: int = 12) -> dict:
        out = {k: numeric.decimal_string(getattr(self, k), digits) for k in self.__dataclass_fields__
               if k != "provenance"}
        out["provenance"] = self.provenance
        return out


def _refine(fn, lo: float, hi: float, closed: bool = False, start: int = 257) -> float:
    """max of fn over a uniform grid, doubled until two grids agree to 1%."""
    N = start
    prev = None
    while True:
        pts = np.linspace(lo, hi, N, endpoint=not closed)
        cur = float(np.max(fn(pts)))
        if prev is not None and abs(cur - prev) <= AGREEMENT * max(abs(cur), 1e-300):
            return cur
        if N > 1 << 16:
            return cur
        prev, N = cur, 2 * N - (0 if closed else 1)


def first_order_constants(family: FamilyLift | SystemFile) -> FirstOrderConstants:
    """Estimate the first-order constants from an order-1 jet lift at t₀.

    The stationary, transition and f^⊤ data are exact derivatives at t₀; the
    suprema over x or s are maxima over refined grids.
    """
    fam = family if isinstance(family, FamilyLift) else prepare(family)
    sj = jet_lift(fam, 1)
    c0 = lambda x: numeric.to_float(coefficients(x, 1)[0])
    c1 = lambda x: numeric.to_float(coefficients(x, 1)[1])
    pi0 = [c0(p) for p in sj.pi]
    pi1 = [abs(c1(p)) for p in sj.pi]
    dQ = [[abs(c1(x)) for x in row] for row in sj.Q]
    M_Q = max(max(sum(row) for row in dQ), max(sum(col) for col in zip(*dQ)))
    M_top = max(abs(c1(x)) for x in sj.ft0)
    rho = numeric.to_float(_r(sj.rho))
    urange = math.atanh(rho)
    M_f = M_l2 = M_l22 = M_l12 = M_g12 = M_g22 = 0.0
    for f in sj.f:
        a0, b0, g0, d0 = (c0(x) for x in (f.alpha, f.beta, f.gamma, f.delta))
        a1, b1, g1, d1 = (c1(x) for x in (f.alpha, f.beta, f.gamma, f.delta))

        def dt_f(theta):
            x = np.exp(1j * theta)
            den = g0 * x + d0
            return np.abs(((a1 * x + b1) * den - (a0 * x + b0) * (g1 * x + d1)) / den ** 2)

        M_f = max(M_f, _refine(dt_f, 0.0, 2 * math.pi, closed=True))
        den = lambda x: g0 * x + d0
        M_l2 = max(M_l2, _refine(lambda x: np.abs(g0 / den(x)), -rho, rho))
        M_l22 = max(M_l22, _refine(lambda x: (g0 / den(x)) ** 2, -rho, rho))
        M_l12 = max(M_l12, _refine(lambda x: np.abs(g1 * d0 - g0 * d1) / den(x) ** 2, -rho, rho))
        det0 = a0 * d0 - b0 * g0
        det1 = a1 * d0 + a0 * d1 - b1 * g0 - b0 * g1

        def g_mixed(s):
            u = np.tanh(s)
            N0 = (g0 * u + d0) ** 2 - (a0 * u + b0) ** 2
            N1 = 2 * (g1 * u + d1) * (g0 * u + d0) - 2 * (a1 * u + b1) * (a0 * u + b0)
            return np.abs((det1 * N0 - det0 * N1) * (1 - u * u) / N0 ** 2)

        def g_second(s):
            u = np.tanh(s)
            N0 = (g0 * u + d0) ** 2 - (a0 * u + b0) ** 2
            dN0 = 2 * g0 * (g0 * u + d0) - 2 * a0 * (a0 * u + b0)
            return np.abs(det0 * (-2 * u * N0 - (1 - u * u) * dN0) / N0 ** 2 * (1 - u * u))

        M_g12 = max(M_g12, _refine(g_mixed, -urange, urange))
        M_g22 = max(M_g22, _refine(g_second, -urange, urange))
    R = numeric.real
    return FirstOrderConstants(R(min(pi0)), R(max(pi1)), R(sum(pi1)), R(M_Q), R(M_top), R(M_f), R(M_l2), R(M_l22),
                               R(M_l12), R(M_g12), R(M_g22))


def _beta(k: int, C: FirstOrderConstants, rho, rho_bar) -> flint.arb:
    if k <= 0:
        return flint.arb(0)
    return 2 * ((2 * C.M_pi + (k + 1) * C.M_Q) / C.m_pi + (2 * k + 1) * C.M_f / (rho_bar - rho))


def first_order_bound(system: LiftedSystem, C: FirstOrderConstants, rho_bar, n: int, m: int, *,
                      K=None) -> flint.arb:
    """Radius-free bound on |λ'(t₀) − Λ'_{n,m}(t₀)| (three blocks: tail, truncation, weak tail)."""
    if n < 2 or m < 2:
        raise ValueError("the first-order bound needs n >= 2 and m >= 2")
    rho, D, d = _r(system.rho), _r(system.D), system.d
    rb = numeric.real(rho_bar)
    if not (rho < rb and rb < 1):
        raise ValidationError("rho_bar must lie in (rho, 1)")
    K = k_rho(rb) if K is None else K
    alpha = _alpha(rb ** (m - 1) * K, n)
    at = numeric.artanh(rho)
    one_r2 = 1 - rho * rho
    Xi = C.M_f / ((1 - rho) * one_r2)
    L_g = C.M_g12 + Xi * C.M_g22 / one_r2
    A_tail = (L_g / rho + C.M_Q) * C.M_l2 * at
    B_tail = (C.M_sigma_pi * C.M_l2 + C.M_l12 + Xi * C.M_l22 + Xi * C.M_l2 / one_r2) * at + C.M_f * C.M_l2 / one_r2
    tail = ((n / (1 - rho) + rho / (1 - rho) ** 2) * A_tail + B_tail / (1 - rho)) * rho ** (n - 1)
    rd, rbd = rho * D, rb * D
    middle = ((_beta(n - 2, C, rho, rb) + 2 * C.M_sigma_pi + (4 * C.M_pi + 2 * C.M_Q) / C.m_pi)
              * (1 / (1 - rbd)).log() + 2 * rho * C.M_top / (1 - rd)) * alpha
    last = (rd / m * (2 * (n - 1) * C.M_sigma_pi + (4 * C.M_pi + n * C.M_Q) / C.m_pi) + rho * C.M_top
            + C.M_f * D * (1 - rho ** (n - 1)) / (one_r2 * (1 - rho))) * rd ** (m - 1) / (1 - rd)
    return (tail + middle + last) / d


__all__ = [
    "FamilyLift", "prepare", "lift_at", "jet_lift", "derivative_series", "OmegaData", "OmegaReport", "check_omega",
    "complex_maps", "derivative_error_bound", "coefficient_bound", "choose_taylor_params", "TaylorResult", "taylor",
    "FirstOrderConstants", "first_order_constants", "first_order_bound",
]
