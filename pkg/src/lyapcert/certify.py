"""Error constants, the certified truncation bound, parameter selection,
the end-to-end λ pipeline and a Monte Carlo cross-check."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import flint
import mpmath
import numpy as np

from . import numeric
from .errors import NumericError
from .kernel import OpCounter, build_operator, partial_sum_coefficients
from .lift import LiftedSystem, build_lift, constant
from .markov import StochasticMatrix, stationary, validate
from .multicone import Multicone, build_branch_system, select_class, validate_multicone
from .projective import Mat2


def _r(x) -> flint.arb:
    return numeric.real(constant(x))


# -- constants -----------------------------------------------------------------

def tail_constant(system: LiftedSystem) -> flint.arb:
    """E_C = max_r |s_r|/(1+√(1−s_r²)) · Σ_r π_r d_hyp(f_r(0), 0) / (1 − ρ), s_r = f_r^⊤(0)."""
    worst = flint.arb(0)
    for s in system.ft0:
        s = _r(s)
        worst = worst.max(abs(s) / (1 + (1 - s * s).sqrt()))
    spread = flint.arb(0)
    for p, f0 in zip(system.pi, system.f0):
        spread += _r(p) * 2 * abs(numeric.artanh(_r(f0)))
    return worst * spread / (1 - _r(system.rho))


def k_rho(rho) -> flint.arb:
    """K(ρ) = (1/2π)∫ ρ dθ/|1 − ρe^{iθ}| by quadrature.

    Float mode uses mpmath's adaptive quadrature; interval mode uses arb's
    rigorous integrator so the result is an enclosure.
    """
    r = numeric.real(rho)
    if not 0 < numeric.to_float(r) < 1:
        raise NumericError("K(ρ) needs 0 < ρ < 1")
    if numeric.interval_mode():
        f = lambda x, analytic: r / (1 - 2 * r * x.cos() + r * r).sqrt(analytic=analytic)
        return flint.acb.integral(f, 0, flint.arb.pi()).real / flint.arb.pi()
    rm = numeric.to_mpf(r)
    val = mpmath.quad(lambda t: rm / mpmath.sqrt(1 - 2 * rm * mpmath.cos(t) + rm * rm),
                      [0, mpmath.pi / 2, mpmath.pi]) / mpmath.pi
    return numeric.real(val)


def k_rho_bound(rho) -> flint.arb:
    """min{ρ/√(1−ρ²), (2ρ/(π(1+ρ)))(π/2 + log((1+ρ)/(1−ρ)))}."""
    r = numeric.real(rho)
    a = r / (1 - r * r).sqrt()
    pi = flint.arb.pi()
    b = 2 * r / (pi * (1 + r)) * (pi / 2 + ((1 + r) / (1 - r)).log())
    return a.min(b)


def _alpha(rho_m: flint.arb, n: int) -> flint.arb:
    """((1+x)^k − 1 − kx)/x with k = n − 1, via Σ_{j≥2} C(k,j) x^{j−1} when kx is small."""
    k = n - 1
    if k <= 1:
        return flint.arb(0)
    ratio = k * rho_m
    if numeric.to_float(ratio) >= 0.5:
        return ((1 + rho_m) ** k - 1 - k * rho_m) / rho_m
    eps = flint.arb(2) ** (-numeric.precision() - 8)
    term = flint.arb(k * (k - 1) // 2) * rho_m
    acc = term
    for j in range(2, k):
        term = term * (k - j) / (j + 1) * rho_m
        acc += term
        if abs(term) < eps * abs(acc):
            # each further ratio is at most k·x
            acc += flint.arb(0, (abs(term) * ratio / (1 - ratio)).upper())
            break
    return acc


@dataclass
class BoundParts:
    tail: flint.arb
    middle: flint.arb
    last: flint.arb

    @property
    def total(self) -> flint.arb:
        return self.tail + self.middle + self.last


def error_bound_parts(system: LiftedSystem, n: int, m: int, *, E_C=None, K=None) -> BoundParts:
    if n < 1 or m < 2:
        raise ValueError("error bound needs n >= 1 and m >= 2")
    rho, D, d = _r(system.rho), _r(system.D), system.d
    E_C = tail_constant(system) if E_C is None else E_C
    K = k_rho(rho) if K is None else K
    rho_m = rho ** (m - 1) * K
    tail = E_C / d * rho ** (n - 1)
    rd = rho * D
    middle = 2 * (1 / (1 - rd)).log() / d * _alpha(rho_m, n)
    last = 2 * (n - 1) * rd ** m / (m * d * (1 - rd))
    return BoundParts(tail, middle, last)


def error_bound(system: LiftedSystem, n: int, m: int, *, E_C=None, K=None) -> flint.arb:
    """(E_C/d)ρ^{n−1} + (2/d)log(1/(1−ρD))·α_{n,m} + 2(n−1)(ρD)^m/(m d (1−ρD))."""
    return error_bound_parts(system, n, m, E_C=E_C, K=K).total


def _lt(a: flint.arb, eps) -> bool:
    """Whether the upper end of ``a`` is certainly below ``eps``."""
    return bool(a.upper() < numeric.real(eps))


def rounding_floor(n: int) -> float:
    return n * float(numeric.tolerance())


def choose_params(system: LiftedSystem, epsilon, *, E_C=None, K=None) -> tuple[int, int]:
    """Smallest n with the tail below ε/2, then the smallest m with the whole bound below ε."""
    eps = numeric.real(epsilon)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    E_C = tail_constant(system) if E_C is None else E_C
    K = k_rho(system.rho) if K is None else K
    rho, d = _r(system.rho), system.d
    bound = lambda n, m: error_bound(system, n, m, E_C=E_C, K=K)
    if _lt(E_C / d, eps):
        return 1, 2
    half = eps / 2
    # closed-form start, then step to the exact smallest n
    ratio = numeric.to_float((E_C / d / half).log() / (1 / rho).log()) if numeric.to_float(E_C) > 0 else 0.0
    n = max(1, int(math.floor(1 + ratio)) - 1)
    while n > 1 and _lt(E_C / d * rho ** (n - 2), half):
        n -= 1
    while not _lt(E_C / d * rho ** (n - 1), half):
        n += 1
    if rounding_floor(n) >= numeric.to_float(eps):
        raise NumericError(f"epsilon {float(numeric.to_float(eps)):.3g} is below the rounding floor at "
                           f"{numeric.precision()} bits; raise the precision")
    hi = 2
    while not _lt(bound(n, hi), eps):
        hi *= 2
        if hi > 1 << 20:
            raise NumericError("no truncation order m reaches the requested epsilon")
    lo = max(2, hi // 2)
    if _lt(bound(n, lo), eps):
        return n, lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _lt(bound(n, mid), eps):
            hi = mid
        else:
            lo = mid
    assert _lt(bound(n, hi), eps)
    return n, hi


# -- certificates -------------------------------------------------------------------

@dataclass
class Certificate:
    value: flint.arb
    epsilon_target: Any
    bound: flint.arb
    n: int
    m: int
    E_C: flint.arb
    D: flint.arb
    rho: flint.arb
    K_rho: flint.arb
    K_rho_bound: flint.arb
    rho_m: flint.arb
    d: int
    rounding_allowance: flint.arb
    mode: str
    precision: int
    operations: int = 0
    scale: Fraction = Fraction(1)

    @property
    def total_bound(self) -> flint.arb:
        return self.bound + self.rounding_allowance

    @property
    def ok(self) -> bool:
        return _lt(self.total_bound, self.epsilon_target) if self.epsilon_target is not None else True

    def scaled(self, factor) -> "Certificate":
        """The same certificate for factor·λ (e.g. a known drift factor)."""
        f = Fraction(factor)
        c = numeric.real(abs(f))
        return Certificate(self.value * numeric.real(f), self.epsilon_target, self.bound * c, self.n, self.m,
                           self.E_C, self.D, self.rho, self.K_rho, self.K_rho_bound, self.rho_m, self.d,
                           self.rounding_allowance * c, self.mode, self.precision, self.operations,
                           self.scale * f)

    def to_dict(self, digits: int | None = None) -> dict:
        ds = lambda x: numeric.decimal_string(x, digits)
        up = lambda x: numeric.decimal_string(numeric.upper(x))
        return {
            "value": ds(self.value),
            "epsilon": None if self.epsilon_target is None else str(self.epsilon_target),
            "bound": up(self.bound),
            "rounding_allowance": up(self.rounding_allowance),
            "total_bound": up(self.total_bound),
            "certified": self.ok,
            "n": self.n,
            "m": self.m,
            "d": self.d,
            "constants": {
                "E_C": ds(self.E_C), "D": ds(self.D), "rho": ds(self.rho), "K_rho": ds(self.K_rho),
                "K_rho_bound": ds(self.K_rho_bound), "rho_m": up(self.rho_m),
            },
            "scale": str(self.scale),
            "mode": self.mode,
            "precision_bits": self.precision,
            "operations": self.operations,
        }


def certify_lift(system: LiftedSystem, epsilon=None, *, n: int | None = None, m: int | None = None,
                 counter: OpCounter | None = None) -> Certificate:
    """Run the kernel at (n, m), chosen from ε unless given, and package the bound."""
    E_C = tail_constant(system)
    K = k_rho(system.rho)
    Kb = k_rho_bound(system.rho)
    if K.mid() > Kb.mid():
        raise NumericError("K(ρ) quadrature exceeds its closed-form ceiling")
    if n is None or m is None:
        if epsilon is None:
            raise ValueError("give either epsilon or both n and m")
        n, m = choose_params(system, epsilon, E_C=E_C, K=K)
    counter = counter or OpCounter()
    T = build_operator(system, m, 0, counter)
    value = partial_sum_coefficients(system, n, m, 0, T)[0]
    bound = numeric.upper(error_bound(system, n, m, E_C=E_C, K=K))
    mode = numeric.current().mode
    if mode == "interval":
        allowance = flint.arb(value.rad())
        value = flint.arb(value.mid())
    else:
        allowance = numeric.real(numeric.tolerance()) * n * abs(value).max(flint.arb(1))
        allowance = numeric.upper(allowance)
        value = flint.arb(value.mid())
    rho = _r(system.rho)
    return Certificate(
        value=value, epsilon_target=epsilon, bound=bound, n=n, m=m, E_C=E_C, D=_r(system.D), rho=rho,
        K_rho=K, K_rho_bound=Kb, rho_m=rho ** (m - 1) * K, d=system.d, rounding_allowance=allowance,
        mode=mode, precision=numeric.precision(), operations=counter.count,
    )


@dataclass
class LambdaOptions:
    epsilon: Any = Fraction(1, 10 ** 15)
    precision: int = numeric.DEFAULT_PRECISION
    mode: str = "float"
    class_choice: int | None = None
    base_period: int = 1
    n: int | None = None
    m: int | None = None


def lift_system(A: Mapping[str, Mat2], P: StochasticMatrix, M: Multicone, class_choice: int | None = None,
                base_period: int = 1) -> LiftedSystem:
    """validate → branch system → class → lift."""
    validate(P).raise_for_failure()
    table = validate_multicone(A, P, M)
    branch = build_branch_system(table, P, M)
    cls = select_class(branch, class_choice)
    return build_lift(A, P, M, branch, cls, base_period)


def compute_lambda(A: Mapping[str, Mat2], P: StochasticMatrix, M: Multicone,
                   options: LambdaOptions | None = None) -> Certificate:
    """The whole pipeline at the requested precision and mode."""
    opts = options or LambdaOptions()
    with numeric.working_precision(opts.precision, opts.mode):
        system = lift_system(A, P, M, opts.class_choice, opts.base_period)
        return certify_lift(system, opts.epsilon, n=opts.n, m=opts.m)


# -- Monte Carlo ---------------------------------------------------------------------

@dataclass
class MonteCarloResult:
    estimate: float
    stderr: float
    steps: int
    trials: int
    seed: int
    per_trial: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("per_trial")
        return d


def monte_carlo_lambda(A: Mapping[str, Mat2], P: StochasticMatrix, steps: int, trials: int, seed: int = 0,
                       burn_in: int | None = None) -> MonteCarloResult:
    """Average of (1/steps)·log‖A_{x_steps}⋯A_{x_1} v‖ over independent trajectories.

    Each trial gets its own generator spawned from ``seed``; the start state is
    drawn from the stationary law and the direction is randomised, then
    ``burn_in`` steps are discarded so the vector settles onto the top direction.
    """
    if steps < 1 or trials < 1:
        raise ValueError("steps and trials must be positive")
    burn = min(1000, steps // 10) if burn_in is None else burn_in
    k = P.size
    Pf = np.array([[numeric.to_float(constant(x)) for x in row] for row in P.entries])
    cum = np.cumsum(Pf, axis=1)
    cum[:, -1] = 1.0
    pi = np.array([numeric.to_float(constant(x)) for x in stationary(P.map(constant))])
    mats = np.array([[[numeric.to_float(constant(x)) for x in row] for row in A[s].tolist()] for s in P.labels])
    children = np.random.SeedSequence(seed).spawn(trials)
    gens = [np.random.default_rng(c) for c in children]
    total = burn + steps
    uniforms = np.stack([g.random(total + 1) for g in gens])  # (trials, total+1)
    angles = np.array([g.random() for g in gens]) * np.pi
    state = np.searchsorted(np.cumsum(pi), uniforms[:, 0] * pi.sum(), side="right").clip(0, k - 1)
    v = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    logs = np.zeros(trials)
    for step in range(total):
        M_ = mats[state]
        v = np.einsum("tij,tj->ti", M_, v)
        norms = np.linalg.norm(v, axis=1)
        v /= norms[:, None]
        if step >= burn:
            logs += np.log(norms)
        u = uniforms[:, step + 1]
        state = (cum[state] < u[:, None]).sum(axis=1).clip(0, k - 1)
    per = logs / steps
    stderr = float(per.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return MonteCarloResult(float(per.mean()), stderr, steps, trials, seed, per.tolist())


__all__ = [
    "tail_constant", "k_rho", "k_rho_bound", "error_bound", "error_bound_parts", "choose_params", "Certificate",
    "certify_lift", "LambdaOptions", "compute_lambda", "lift_system", "monte_carlo_lambda", "MonteCarloResult",
]
