import json
from fractions import Fraction

import pytest

from conftest import FIXTURES, system_file
from lyapcert import numeric
from lyapcert.errors import ParseError, ValidationError
from lyapcert.systemfile import SystemFile

F = Fraction


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.json")), ids=lambda p: p.name)
def test_fixtures_round_trip(path, tmp_path):
    sf = SystemFile.load(path)
    out = tmp_path / path.name
    sf.dump(out)
    again = SystemFile.load(out)
    assert again.to_dict() == sf.to_dict()
    assert again == sf


def test_dump_keeps_innermost_rows_on_one_line():
    text = system_file("example1.json").dump()
    assert '["1", "0"]' in text
    json.loads(text)


def test_unknown_keys_are_rejected():
    doc = system_file("example1.json").to_dict()
    doc["matrix"] = {}
    with pytest.raises(ParseError, match="matrix"):
        SystemFile.from_dict(doc)


@pytest.mark.parametrize("edit, error", [
    (lambda d: d["matrices"].__setitem__("x", [["1", "0"]]), ValidationError),
    (lambda d: d["transition"].pop(), ValidationError),
    (lambda d: d["multicone"].__setitem__("z", [["0", "1"]]), ValidationError),
    (lambda d: d["multicone"].__setitem__("x", [["0"]]), ValidationError),
    (lambda d: d.__setitem__("alphabet", ["x", "x", "y", "ybar"]), ValidationError),
    (lambda d: d["matrices"]["x"][0].__setitem__(0, "1 +"), ParseError),
    (lambda d: d.pop("transition"), ParseError),
])
def test_malformed_documents(edit, error):
    doc = system_file("example1.json").to_dict()
    edit(doc)
    with pytest.raises(error):
        SystemFile.from_dict(doc)


def test_invalid_json_reports_a_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"alphabet": [}')
    with pytest.raises(ParseError) as info:
        SystemFile.load(bad)
    assert info.value.position == 14


def test_instantiation_kinds():
    A, P, _ = system_file("example1.json").instantiate()
    assert A["x"].c == 1 and isinstance(A["x"].a, F)
    A2, P2, _ = system_file("example2.json").instantiate()
    assert not isinstance(A2["xy"].a, F)
    # the transition entries are rational at t0 but share the ball kind of the matrices
    assert abs(numeric.to_float(P2.entries[0][0]) - 0.5) < 1e-30
    A3, _, _ = system_file("example2.json").instantiate(F(31, 10), exact=False)
    assert abs(numeric.to_float(A3["xy"].b) + 0.5) < 1e-30


def test_base_point_and_parametric_flag():
    assert system_file("example2.json").base_point() == 3
    assert system_file("example2.json").parametric
    assert not system_file("example1.json").parametric
    assert system_file("example1.json").base_point() == 0


def test_reducing_the_base_chain_gives_the_block_fixture():
    reduced = system_file("example2_base.json").reduce_base()
    block = system_file("example2.json")
    assert reduced.alphabet == block.alphabet
    assert reduced.base_period == 2
    for t in (F(3), F(29, 10)):
        with numeric.working_precision(128):
            A1, P1, _ = reduced.instantiate(t, exact=False)
            A2, P2, _ = block.instantiate(t, exact=False)
            for a in block.alphabet:
                assert all(abs(numeric.to_float(x - y)) < 1e-30 for x, y in zip(A1[a], A2[a]))
            for r1, r2 in zip(P1.entries, P2.entries):
                assert all(abs(numeric.to_float(x - y)) < 1e-30 for x, y in zip(r1, r2))


def test_reducing_an_aperiodic_chain_is_a_copy():
    sf = system_file("example1.json")
    assert sf.reduce_base().to_dict() == sf.to_dict()


def test_default_charts_drop_explicit_frames():
    sf = system_file("example1.json").with_default_charts()
    assert sf.charts is None
    assert "charts" not in sf.to_dict()
