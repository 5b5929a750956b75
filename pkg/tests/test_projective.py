from fractions import Fraction

import flint
import pytest
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import lifted
from lyapcert import numeric
from lyapcert.errors import NumericError
from lyapcert.lift import default_chart
from lyapcert.projective import (Arc, Mat2, Mobius, ProjPoint, arc_contains, chart_psi, chart_psi_inv,
                                 f_conjugate, mobius_derivative_at, mobius_eval, mobius_from_mat,
                                 mobius_transpose, strict_image_containment)

pos_q = st.fractions(min_value=Fraction(1, 40), max_value=40, max_denominator=40)
small_q = st.fractions(min_value=-20, max_value=20, max_denominator=30)
unit_q = st.fractions(min_value=-1, max_value=1, max_denominator=200)
positive_mats = st.tuples(pos_q, pos_q, pos_q, pos_q).map(lambda t: Mat2(*t))

M_X = Arc(default_chart(Fraction(-5, 12), Fraction(31, 30)))
L_X = Mat2(Fraction(-5, 12), Fraction(93, 200), Fraction(1), Fraction(9, 20))
A_X = Mat2(Fraction(1), Fraction(0), Fraction(1), Fraction(4))


def test_conjugation_fixes_identity():
    assert f_conjugate(Mat2.identity()) == Mat2.identity()


def test_conjugation_of_a_lower_triangular_matrix():
    got = f_conjugate(A_X)
    assert got == Mat2(Fraction(2), Fraction(-2), Fraction(-1), Fraction(3))


def test_conjugation_matches_sympy():
    m = sp.Matrix([[3, -2], [sp.Rational(1, 7), 5]])
    J = sp.Matrix([[1, 1], [-1, 1]])
    want = J.inv() * m * J
    got = f_conjugate(Mat2(Fraction(3), Fraction(-2), Fraction(1, 7), Fraction(5)))
    assert [sp.Rational(x.numerator, x.denominator) for x in got] == list(want)


def _example2_xy_map(t):
    u = sp.Symbol("u")
    return u, (9 * u - t ** 2) / (9 * t ** 2 * (3 * u + t ** 2))


def test_example_two_diagonal_branch_map():
    system = lifted("example2.json", 128)
    labels = [str(s) for s in system.states]
    f = system.f[labels.index("(xy:0,xy:0)")]
    u, ref = _example2_xy_map(sp.Integer(3))
    with numeric.working_precision(128):
        for x in (Fraction(-1), Fraction(-1, 3), Fraction(0), Fraction(1, 2), Fraction(1)):
            want = ref.subs(u, sp.Rational(x.numerator, x.denominator))
            got = mobius_eval(f, numeric.real(x))
            assert abs(got - numeric.real(Fraction(int(want.p), int(want.q)))) < 1e-30
        assert abs(mobius_eval(f, numeric.real(0)) + numeric.real(Fraction(1, 81))) < 1e-30
        slope = sp.diff(ref, u).subs(u, 0)
        got = mobius_derivative_at(f, numeric.real(0))
        assert abs(got - numeric.real(Fraction(int(slope.p), int(slope.q)))) < 1e-30


def test_mobius_identity_and_simple_maps():
    ident = Mobius.identity()
    assert mobius_eval(ident, Fraction(3, 10)) == Fraction(3, 10)
    assert mobius_transpose(ident) == ident
    assert mobius_derivative_at(ident, Fraction(7)) == 1
    inv = Mobius(Fraction(0), Fraction(1), Fraction(1), Fraction(0))
    assert mobius_derivative_at(inv, Fraction(2)) == Fraction(-1, 4)


@given(small_q, small_q, small_q)
def test_transpose_of_symmetric_coefficients_is_itself(a, b, d):
    assume(a * d - b * b != 0)
    f = Mobius(a, b, b, d)
    assert mobius_transpose(f) == f


def test_psi_chart_points():
    assert chart_psi(Fraction(0)) == ProjPoint.from_slope(Fraction(1))
    assert chart_psi(Fraction(1)) == ProjPoint.from_slope("inf")
    assert chart_psi(Fraction(-1)) == ProjPoint.from_slope(Fraction(0))


@given(unit_q.filter(lambda x: abs(x) < 1))
def test_psi_round_trip(x):
    assert chart_psi_inv(chart_psi(x)) == x


def test_projective_points_ignore_scale():
    assert ProjPoint(Fraction(2), Fraction(3)) == ProjPoint(Fraction(-4), Fraction(-6))
    assert not ProjPoint(Fraction(2), Fraction(3)) == ProjPoint(Fraction(3), Fraction(2))


def test_arc_membership_in_example_one_cone():
    nonneg = Arc(Mat2.identity())
    assert arc_contains(nonneg, ProjPoint.from_slope(Fraction(1)), strict=True)
    assert arc_contains(M_X, ProjPoint.from_slope(Fraction(-5, 43)), strict=True)
    assert not arc_contains(M_X, ProjPoint.from_slope(Fraction(2)))
    # the explicit fixture chart frames the same arc as the default one
    assert arc_contains(Arc(L_X), ProjPoint.from_slope(Fraction(-5, 43)), strict=True)
    assert arc_contains(M_X, ProjPoint.from_slope(Fraction(31, 30)))
    assert not arc_contains(M_X, ProjPoint.from_slope(Fraction(31, 30)), strict=True)


def test_image_containment_cases():
    nonneg = Arc(Mat2.identity())
    assert strict_image_containment(nonneg, Mat2(*(Fraction(k) for k in (1, 2, 3, 4))), nonneg) == 1
    assert strict_image_containment(Arc(L_X), A_X, Arc(L_X)) in (1, -1)
    wider = Arc(default_chart(Fraction(-1), Fraction(2)))
    assert strict_image_containment(M_X, Mat2.identity(), wider) is None


def _image_inside(target: Arc, m: Mat2, source: Arc) -> bool:
    """Both image endpoints inside the target, with the image midpoint between them."""
    u, v = source.frame.col(0), source.frame.col(1)
    mid = (u[0] + v[0], u[1] + v[1])
    pts = [ProjPoint(*m.apply(w)) for w in (u, v, mid)]
    if not all(arc_contains(target, p, strict=True) for p in pts):
        return False
    # position along the target arc: x1/x2 in target coordinates
    pos = [x1 / x2 for x1, x2 in (target.coordinates(p) for p in pts)]
    return min(pos[0], pos[1]) < pos[2] < max(pos[0], pos[1])


@settings(max_examples=300)
@given(small_q, small_q, small_q, small_q, small_q, small_q)
def test_containment_agrees_with_endpoint_and_midpoint_test(a, b, c, d, p, q):
    m = Mat2(a, b, c, d)
    assume(m.det() != 0 and p != q)
    source = Arc(default_chart(p, q))
    target = Arc(default_chart(Fraction(-1, 3), Fraction(5, 2)))
    got = strict_image_containment(target, m, source)
    assert (got is not None) == _image_inside(target, m, source)


@settings(max_examples=200)
@given(small_q, small_q, small_q, small_q, unit_q.filter(lambda x: abs(x) < 1))
def test_conjugated_action_matches_projective_action(a, b, c, d, x):
    m = Mat2(a, b, c, d)
    assume(m.det() != 0)
    image = ProjPoint(*m.apply(chart_psi(x).vector()))
    assume(image.v1 + image.v2 != 0)
    f = mobius_from_mat(f_conjugate(m))
    assume(f.denominator(x) != 0)
    assert mobius_eval(f, x) == chart_psi_inv(image)


@given(positive_mats, unit_q)
def test_denominator_positive_on_the_interval(m, x):
    f = mobius_from_mat(f_conjugate(m))
    assert f.gamma * x + f.delta > 0


@settings(max_examples=100)
@given(positive_mats)
def test_real_contraction_extends_to_the_disk_and_the_transpose(m):
    f = mobius_from_mat(f_conjugate(m))
    rho = max(abs(mobius_eval(f, Fraction(1))), abs(mobius_eval(f, Fraction(-1))))
    assume(rho < 1)
    assert abs(mobius_transpose(f).beta / f.delta) < 1
    with numeric.working_precision(64):
        for k in range(64):
            z = flint.acb(flint.arb(2 * k) / 64).exp_pi_i()
            val = (numeric.complex_(f.alpha) * z + numeric.complex_(f.beta)) / (
                numeric.complex_(f.gamma) * z + numeric.complex_(f.delta))
            assert float(abs(val).mid()) <= float(rho) + 1e-12


def test_singular_frame_is_rejected():
    with pytest.raises(NumericError):
        Arc(Mat2(Fraction(1), Fraction(2), Fraction(2), Fraction(4)))
