from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import lifted, system_file
from lyapcert import numeric
from lyapcert.certify import certify_lift, lift_system
from lyapcert.errors import LyapcertError
from lyapcert.lift import (GRID_POINTS, chart_frames_arc, chart_invariance_check, default_chart, maps_from_positive,
                           positive_matrices)
from lyapcert.multicone import build_branch_system, validate_multicone
from lyapcert.projective import Arc, Mat2, ProjPoint
from lyapcert.systemfile import SystemFile

F = Fraction
EX1 = oracles.single_component_lift(oracles.load_rational_system("example1.json"))


def _frac(x) -> F:
    x = sp.Rational(x)
    return F(int(x.p), int(x.q))


def test_default_chart_of_example_one_arc():
    frame = default_chart(F(-5, 12), F(31, 30))
    assert frame.col(0) == (F(-5, 12), F(1))
    assert frame.col(1) == (F(31, 30), F(1))
    # the fixture chart has the same columns up to positive rescaling
    explicit = Mat2(F(-5, 12), F(93, 200), F(1), F(9, 20))
    assert ProjPoint(*explicit.col(1)) == ProjPoint(*frame.col(1))
    assert chart_frames_arc(explicit, F(-5, 12), F(31, 30))


def test_default_chart_of_the_nonnegative_cone():
    frame = default_chart(F(0), "inf")
    assert Arc(frame).contains(ProjPoint.from_slope(F(1)), strict=True)
    assert {frame.col(0), frame.col(1)} == {(F(0), F(1)), (F(1), F(0))}


def test_default_chart_of_a_wrapped_arc():
    with numeric.working_precision(128):
        r = numeric.real(3).sqrt() / 9
        frame = default_chart(r, -r)
        assert abs(frame.a - r) < 1e-30 and frame.c == 1
        assert abs(frame.b - r) < 1e-30 and frame.d == -1


def test_example_one_b_matrices_are_exact():
    system = lifted("example1.json")
    labels = [str(s) for s in system.states]
    assert system.B[labels.index("(x:0,x:0)")] == Mat2(F(1483, 522), F(3751, 2900), F(3875, 2349), F(1127, 522))
    for s in EX1["states"]:
        r = labels.index(oracles.state_label(s))
        data = EX1["data"][s]
        assert list(system.B[r]) == [_frac(x) for x in data["B"]]
        assert system.ft0[r] == _frac(data["ft0"])
        assert system.f0[r] == _frac(data["f0"])
        assert system.fp0[r] == _frac(data["fp0"])
        assert system.signs[r] == data["sign"]


def test_example_one_contraction_constants():
    system = lifted("example1.json")
    assert system.rho == F(279, 359) == _frac(EX1["rho"])
    assert system.D == _frac(EX1["D"])
    assert system.d == 1


@pytest.mark.parametrize("name", ["example1.json", "example2.json", "period2_toy.json"])
def test_lift_invariants(name):
    system = lifted(name)
    with numeric.working_precision(128):
        rho = numeric.real(system.rho)
        for r in range(system.size):
            assert all(numeric.sign(e) > 0 for e in system.B[r])
            assert numeric.sign(system.delta[r]) > 0
            assert abs(numeric.to_float(system.ft0[r])) <= numeric.to_float(system.D) < 1
            f = system.f[r]
            for k in range(GRID_POINTS):
                x = numeric.like(F(2 * k, GRID_POINTS - 1) - 1, f.delta)
                assert numeric.to_float(numeric.real(abs(f(x))) - rho) <= 1e-30
        size = system.size
        for s in range(size):
            flow = sum((system.pi[r] * system.Q[r][s] for r in range(size)), system.pi[s] * 0)
            assert abs(numeric.to_float(flow - system.pi[s])) < 1e-30


def test_scalar_matrices_give_no_strict_contraction():
    sf = SystemFile.from_dict({
        "alphabet": ["a"],
        "matrices": {"a": [["2", "0"], ["0", "2"]]},
        "transition": [["1"]],
        "multicone": {"a": [["0", "inf"]]},
    })
    A, P, M = sf.instantiate()
    with pytest.raises(LyapcertError):
        lift_system(A, P, M)


def test_accelerated_block_map_is_the_composition():
    A, P, M = system_file("period2_toy.json").instantiate()
    table = validate_multicone(A, P, M)
    branch = build_branch_system(table, P, M)
    Bs, _ = positive_matrices(A, branch.states, table, M)
    maps = {str(s): maps_from_positive(B)[0] for s, B in zip(branch.states, Bs)}
    system = lifted("period2_toy.json")
    assert system.lift_period == 2 and system.d == 2
    for block, f in zip(system.states, system.f):
        first, second = (maps[s] for s in block)
        for x in (F(-1), F(-1, 3), F(0), F(2, 7), F(1)):
            assert f(x) == second(first(x))


def test_explicit_chart_must_frame_its_arc():
    doc = system_file("example1.json").to_dict()
    doc["charts"]["x"] = [[["1", "0"], ["0", "1"]]]
    with pytest.raises(LyapcertError):
        SystemFile.from_dict(doc).instantiate()


def test_same_charts_twice_give_identical_digits():
    with numeric.working_precision(64):
        A, P, M = system_file("example1.json").instantiate()
        a = certify_lift(lift_system(A, P, M), F(1, 10 ** 6))
        b = certify_lift(lift_system(A, P, M), F(1, 10 ** 6))
    assert a.value == b.value and a.bound == b.bound


def test_column_rescaled_charts_agree():
    doc = system_file("example1.json").to_dict()
    for label, frames in doc["charts"].items():
        (a, b), (c, d) = frames[0]
        doc["charts"][label] = [[[f"2*({a})", f"3*({b})"], [f"2*({c})", f"3*({d})"]]]
    scaled = SystemFile.from_dict(doc)
    with numeric.working_precision(64):
        A, P, M = system_file("example1.json").instantiate()
        A2, P2, M2 = scaled.instantiate()
        assert chart_invariance_check(lift_system(A, P, M), lift_system(A2, P2, M2), F(1, 10 ** 6))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(min_value=F(1, 20), max_value=20, max_denominator=20), min_size=4, max_size=4),
       st.fractions(min_value=-1, max_value=1, max_denominator=100))
def test_transpose_value_matches_sympy(entries, x):
    B = Mat2(*entries)
    f, ft0, f0, fp0, delta = maps_from_positive(B)
    Bs = sp.Matrix(2, 2, [sp.Rational(e.numerator, e.denominator) for e in entries])
    Fm = oracles.conjugate(Bs)
    data = oracles.mobius_data(Fm)
    assert ft0 == _frac(data["ft0"]) and f0 == _frac(data["f0"]) and fp0 == _frac(data["fp0"])
    assert f(x) == _frac(data["f"](sp.Rational(x.numerator, x.denominator)))
    assert delta > 0 and abs(ft0) < 1
