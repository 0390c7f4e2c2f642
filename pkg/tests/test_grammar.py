from fractions import Fraction

import pytest

from simulhyp import groups as G
from simulhyp.actions import BassSerreTree, CayleyTree, Line
from simulhyp.grammar import ParseError, parse_action, parse_element, parse_group, parse_qm, split_list
from simulhyp.groups import DirectProduct, Free, FreeProduct


def test_groups():
    assert parse_group("free(2)") == Free(2)
    assert parse_group("PRODUCT(free(2), free(3))") == DirectProduct((Free(2), Free(3)))
    assert parse_group("freeprod(z, z/2)") == FreeProduct((0, 2))


@pytest.mark.parametrize("text", ["free(2", "free()", "product(free(2),)", "nope(1)", "freeprod(z, q)"])
def test_bad_groups(text):
    with pytest.raises(ParseError):
        parse_group(text)


def test_error_position():
    with pytest.raises(ParseError) as info:
        parse_group("free(2")
    assert (info.value.line, info.value.column) == (1, 7)


def test_elements():
    f2 = Free(2)
    assert parse_element(f2, "a^2 b^-1") == G.from_letters(f2, [(0, 2), (1, -1)])
    assert parse_element(f2, "aB") == parse_element(f2, "a b^-1")
    assert parse_element(f2, "1").is_identity()
    g = parse_element(DirectProduct((Free(2), Free(3))), "(a^2, y)")
    assert str(g) == "(a^2, y)"


def test_round_trip_formatting():
    spec = DirectProduct((Free(2), Free(3)))
    for text in ("(a^2 b^-1, x y z^-3)", "(1, x)", "(a, 1)"):
        assert str(parse_element(spec, text)) == text


def test_actions_and_qms():
    spec = DirectProduct((Free(2), Free(3)))
    assert parse_action(spec, "cayley(factor=2)") == CayleyTree(spec, 1)
    line = parse_action(spec, "line(a=1, x=-1/2)")
    assert isinstance(line, Line) and line.weights[2] == Fraction(-1, 2)
    assert isinstance(parse_action(FreeProduct((0, 2)), "bass-serre"), BassSerreTree)
    q = parse_qm(spec, "hom(a=1)")
    assert q.kind == "hom"
    assert parse_qm(spec, "count(w=ab)").kind == "count"
    assert parse_qm(spec, "busemann(1)", [line]).kind == "busemann"


@pytest.mark.parametrize("text", ["cayley(factor=3)", "line(q=1)", "cayley(side=1)", "torus"])
def test_bad_actions(text):
    with pytest.raises(ParseError):
        parse_action(DirectProduct((Free(2), Free(3))), text)


def test_bad_qms():
    spec = DirectProduct((Free(2), Free(3)))
    with pytest.raises(ParseError):
        parse_qm(spec, "count(w=ax)")  # straddles two factors
    with pytest.raises(ParseError):
        parse_qm(spec, "busemann(2)", [])


def test_split_list():
    assert split_list("cayley(factor=1); line(a=1, b=2)") == ["cayley(factor=1)", "line(a=1, b=2)"]
