import math
from fractions import Fraction

import flint
import mpmath
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import lifted
from lyapcert import numeric
from lyapcert.family import Jet
from lyapcert.kernel import (apply, binomial_rows, build_operator, iterates, kernel_entries, partial_sum,
                             partial_sum_coefficients, seed_vector)
from lyapcert.lift import maps_from_positive
from lyapcert.projective import Mat2

F = Fraction
EX1 = oracles.single_component_lift(oracles.load_rational_system("example1.json"))


def block_by_double_sum(s, f0, fp0, m):
    """b_{k,n} from the binomial double sum, in exact sympy rationals."""
    out = sp.zeros(m, m)
    for n in range(1, m):
        out[0, n] = s ** n
    for k in range(1, m):
        for n in range(1, m):
            out[k, n] = sum(sp.binomial(n, l) * sp.binomial(k - 1, l - 1) * s ** (n - l) * (-f0) ** (k - l) * fp0 ** l
                            for l in range(1, min(k, n) + 1))
    return out


def test_binomial_rows():
    rows = binomial_rows(12)
    assert all(rows[n][k] == math.comb(n, k) for n in range(12) for k in range(n + 1))


@settings(max_examples=25, deadline=None)
@given(st.fractions(min_value=F(-9, 10), max_value=F(9, 10), max_denominator=50),
       st.fractions(min_value=F(-9, 10), max_value=F(9, 10), max_denominator=50),
       st.fractions(min_value=F(1, 50), max_value=F(2), max_denominator=50),
       st.integers(2, 9))
def test_block_matches_binomial_double_sum(s, f0, fp0, m):
    q = lambda x: sp.Rational(x.numerator, x.denominator)
    want = block_by_double_sum(q(s), q(f0), q(fp0), m)
    with numeric.working_precision(128):
        got = kernel_entries(s, f0, fp0, m)
        for k in range(m):
            for n in range(m):
                w = want[k, n]
                assert abs(got.entry(k, n) - numeric.real(F(int(w.p), int(w.q)))) <= flint.arb(2) ** -100


def test_block_edge_entries():
    with numeric.working_precision(128):
        s, f0, fp0 = F(1, 3), F(-1, 5), F(2, 7)
        blk = kernel_entries(s, f0, fp0, 8)
        for k in range(8):
            assert blk.entry(k, 0) == 0
        for n in range(1, 8):
            assert abs(blk.entry(0, n) - numeric.real(s) ** n) < 1e-35


def test_jet_block_constant_term_matches_scalar_block():
    with numeric.working_precision(128):
        t = Jet.variable(numeric.real(F(1, 5)), 3)
        s, f0, fp0 = t * t, -t / 2, 1 + t
        scalar = kernel_entries(s.constant, f0.constant, fp0.constant, 10)
        jet = kernel_entries(s, f0, fp0, 10, order=3)
        assert jet.order == 3
        for k in range(10):
            for n in range(10):
                assert abs(jet.entry(k, n, 0) - scalar.entry(k, n)) <= flint.arb(2) ** -110


def test_weights_sum_to_one_into_every_state():
    system = lifted("example1.json")
    totals = {}
    for (r, s), w in system.weights().items():
        totals[s] = totals.get(s, 0) + w
    assert set(totals.values()) == {1}


def test_seed_of_a_fixed_origin_has_only_the_zero_coordinate():
    from lyapcert.lift import LiftedSystem

    B = Mat2(F(3), F(1), F(1), F(3))  # F(B) is diagonal, so f(0) = 0
    f, ft0, f0, fp0, delta = maps_from_positive(B)
    assert f0 == 0
    system = LiftedSystem(states=("r",), Q=[[F(1)]], pi=[F(1)], B=[B], f=[f], ft0=[ft0], f0=[f0], fp0=[fp0],
                          delta=[delta], rho=F(1, 2), D=abs(ft0))
    with numeric.working_precision(128):
        seed = seed_vector(system, 6)
        vec = seed[0][0]
        assert abs(vec[0, 0] - numeric.real(delta).log()) < 1e-35
        assert all(vec[k, 0] == 0 for k in range(1, 6))


def test_apply_is_linear_on_zero():
    system = lifted("example1.json")
    with numeric.working_precision(128):
        T = build_operator(system, 8, 0)
        zero = [[flint.arb_mat(8, 1)] for _ in range(system.size)]
        out = apply(T, zero)
        assert all(out[r][0][k, 0] == 0 for r in range(system.size) for k in range(8))


def test_iterate_coordinates_stay_below_the_decay_envelope():
    system = lifted("example1.json")
    rho = float(system.rho)
    with numeric.working_precision(128):
        T = build_operator(system, 40, 0)
        for ell, u in enumerate(iterates(T, seed_vector(system, 40, 0))):
            if ell > 12:
                break
            for r in range(system.size):
                for k in range(1, 40):
                    assert abs(numeric.to_float(u[r][0][k, 0])) <= 2 * rho ** k / k + 1e-30


@pytest.mark.parametrize("n", [1, 2, 3])
def test_path_enumeration_matches_iteration(n):
    p, m = 128, 160
    system = lifted("example1.json")
    ref = oracles.path_sum(EX1, n, m, p)
    labels = [(s.src, s.dst) for s in system.states]
    with numeric.working_precision(p):
        T = build_operator(system, m, 0)
        total = None
        for ell, u in enumerate(iterates(T, seed_vector(system, m, 0))):
            if ell == n:
                break
            total = u if total is None else [[a + b for a, b in zip(x, y)] for x, y in zip(total, u)]
        tol = mpmath.mpf(2) ** (24 - p)
        for r, label in enumerate(labels):
            for k in range(m):
                got = mpmath.mpf(total[r][0][k, 0].mid().str(60, radius=False))
                assert abs(got - ref[label][k]) <= tol


@settings(max_examples=20, deadline=None)
@given(st.lists(st.fractions(min_value=F(1, 30), max_value=30, max_denominator=30), min_size=4, max_size=4),
       st.fractions(min_value=-1, max_value=1, max_denominator=997),
       st.fractions(min_value=-3, max_value=3, max_denominator=11))
def test_block_action_is_a_coboundary(entries, u, c):
    p, m = 128, 40
    B = Mat2(*entries)
    f, ft0, f0, fp0, delta = maps_from_positive(B)
    # on |w| = 1 the symbol s + f'(0)w/(1 + f(0)w) stays below H
    H = abs(ft0) + abs(fp0) / (1 - abs(f0))
    x = u / (2 * max(H, F(1)))
    q = float(H * abs(x))
    tail = q ** m / (m * (1 - q))
    with numeric.working_precision(p):
        blk = kernel_entries(ft0, f0, fp0, m)
        v = oracles.generator_mp(x, c, m, p)
        vec = flint.arb_mat([[flint.arb(mpmath.nstr(t, 60))] for t in v])
        out = blk.mats[0] * vec
    Fm = oracles.conjugate(sp.Matrix(2, 2, [sp.Rational(e.numerator, e.denominator) for e in entries]))
    ref = oracles.coboundary_difference(Fm, x, c, m, p)
    for k in range(m):
        got = mpmath.mpf(out[k, 0].mid().str(50, radius=False))
        assert abs(got - ref[k]) <= tail + 2.0 ** (24 - p)


def test_partial_sum_increments_decay_geometrically():
    system = lifted("example1.json")
    with numeric.working_precision(128):
        _, marks = partial_sum_coefficients(system, 60, 48, 0, sums_at=range(1, 61))
        steps = [abs(numeric.to_float(marks[n + 1][0] - marks[n][0])) for n in range(1, 60)]
    rho = float(system.rho)
    big = max(steps[0], 1e-300) / rho
    assert all(s <= 4 * big * rho ** n for n, s in enumerate(steps, start=1))
    assert steps[-1] < 1e-5 * steps[0]


def test_partial_sum_helpers_agree():
    system = lifted("example1.json")
    with numeric.working_precision(128):
        a = partial_sum(system, 10, 12)
        b = partial_sum_coefficients(system, 10, 12)[0]
        T = build_operator(system, 12, 0)
        c = partial_sum(system, 10, 12, T)
    assert a == b == c or (a.mid() == b.mid() == c.mid())


def test_partial_sum_rejects_bad_sizes():
    system = lifted("example1.json")
    with pytest.raises(ValueError):
        partial_sum(system, 0, 4)
    with pytest.raises(ValueError):
        partial_sum(system, 3, 1)
