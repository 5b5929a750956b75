from fractions import Fraction

import flint
import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapcert import numeric
from lyapcert.errors import DomainError, IndeterminateSignError, ParseError

small_q = st.fractions(min_value=-50, max_value=50, max_denominator=60)
nonzero_q = small_q.filter(lambda q: q != 0)
open_unit = st.floats(min_value=-0.999, max_value=0.999, allow_nan=False)


def test_dyadic_rational_is_exact():
    x = numeric.to_real(Fraction(1, 2), 53)
    assert x.rad() == 0
    assert x == flint.arb("0.5")


def test_third_is_rounded_to_one_ulp():
    x = numeric.to_real(Fraction(1, 3), 53)
    err = abs(mpmath.mpf(x.mid().str(40, radius=False)) * 3 - 1)
    assert err <= mpmath.mpf(2) ** -52


def test_rho_of_example_one_prints_as_expected():
    x = numeric.to_real(Fraction(279, 359), 128)
    assert numeric.decimal_string(x, 6) == "0.777159"
    assert x.mid().str(7, radius=False).startswith("0.777158")


def test_artanh_half_matches_independent_log():
    with numeric.working_precision(200):
        got = numeric.to_mpf(numeric.artanh(Fraction(1, 2)))
    with mpmath.workprec(240):
        want = mpmath.log(3) / 2
        assert abs(got - want) < mpmath.mpf(2) ** -190


def test_artanh_edge_cases():
    assert numeric.artanh(Fraction(0)) == 0
    with numeric.working_precision(128):
        x = numeric.real(1).tanh()
        assert abs(numeric.artanh(x) - 1) < flint.arb(2) ** -100
    with pytest.raises(DomainError):
        numeric.artanh(Fraction(1))


@given(nonzero_q, nonzero_q)
def test_rational_arithmetic_is_exact(a, b):
    assert (a + b) - b == a
    assert (a * b) / b == a


@given(open_unit, open_unit)
def test_hyperbolic_distance_is_symmetric(x, y):
    with numeric.working_precision(128):
        a, b = numeric.real(x), numeric.real(y)
        assert abs(numeric.d_hyp(a, b) - numeric.d_hyp(b, a)) <= flint.arb(2) ** -110


@settings(max_examples=200)
@given(open_unit, open_unit, open_unit)
def test_hyperbolic_distance_triangle_inequality(x, y, z):
    with numeric.working_precision(128):
        a, b, c = (numeric.real(v) for v in (x, y, z))
        slack = flint.arb(2) ** -100
        assert numeric.to_float(numeric.d_hyp(a, c) - numeric.d_hyp(a, b) - numeric.d_hyp(b, c) - slack) <= 0


def test_doubling_precision_moves_a_quantity_by_less_than_an_ulp_band():
    def quantity():
        x = numeric.real(Fraction(279, 359))
        return numeric.log(x) + numeric.artanh(x / 2) + numeric.sqrt(x)

    for p in (64, 128, 256):
        with numeric.working_precision(p):
            lo = quantity()
        with numeric.working_precision(2 * p):
            hi = quantity()
        assert abs(lo - hi) <= abs(hi) * flint.arb(2) ** (8 - p)


def test_sign_policy():
    assert numeric.sign(Fraction(-3, 7)) == -1
    with numeric.working_precision(64):
        assert numeric.sign(numeric.real("1e-3")) == 1
        with pytest.raises(IndeterminateSignError):
            numeric.sign(numeric.real(2) ** -60)
    with numeric.working_precision(64, "interval"):
        with pytest.raises(IndeterminateSignError):
            numeric.sign(flint.arb(0, 1e-3))


def test_parse_rational():
    assert numeric.parse_rational(" 3/12 ") == Fraction(1, 4)
    assert numeric.parse_rational("1e-3") == Fraction(1, 1000)
    with pytest.raises(ParseError):
        numeric.parse_rational("1/0")


def test_working_precision_restores_state():
    before = (numeric.precision(), flint.ctx.prec, mpmath.mp.prec)
    with numeric.working_precision(300, "interval"):
        assert numeric.precision() == 300 and numeric.interval_mode()
        assert flint.ctx.prec == 300
    assert (numeric.precision(), flint.ctx.prec, mpmath.mp.prec) == before


def test_promote_never_mixes_kinds():
    a, b = numeric.promote(Fraction(1, 3), flint.arb(2))
    assert isinstance(a, flint.arb) and isinstance(b, flint.arb)
    a, b = numeric.promote(flint.acb(1, 1), Fraction(1))
    assert isinstance(b, flint.acb)


@given(st.lists(st.lists(small_q, min_size=3, max_size=3), min_size=3, max_size=3), st.lists(small_q, min_size=3,
                                                                                           max_size=3))
def test_gauss_solve_over_rationals(rows, rhs):
    import sympy as sp

    M = sp.Matrix(rows)
    if M.det() == 0:
        return
    want = M.LUsolve(sp.Matrix(rhs))
    got = numeric.gauss_solve(rows, rhs)
    assert [sp.Rational(g.numerator, g.denominator) for g in got] == list(want)
