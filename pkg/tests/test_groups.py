import random

import pytest
from hypothesis import given, settings, strategies as st

from simulhyp import groups as G
from simulhyp.grammar import parse_element
from simulhyp.groups import DirectProduct, Free, FreeProduct, GroupElement, SpecMismatch

from conftest import naive_reduce, random_letters

letters = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=30)


@given(letters, letters)
def test_free_mul_matches_stack_reduction(u, v):
    a, b = naive_reduce(u), naive_reduce(v)
    assert G._free_mul(a, b) == naive_reduce(list(a) + list(b))


@given(letters)
def test_reduce_is_idempotent(u):
    w = G.reduce(u)
    assert G.reduce(w.letters) == w
    assert w.syms == naive_reduce(u)


@given(letters, letters, letters)
def test_associativity_and_inverse(u, v, w):
    f = Free(2)
    x, y, z = (GroupElement(f, naive_reduce(t)) for t in (u, v, w))
    assert (x * y) * z == x * (y * z)
    assert (x * ~x).is_identity()
    assert G.inverse(x * y) == ~y * ~x


def test_power_and_conjugate(f2):
    a, b = G.generators(f2)
    assert str(G.power(a * b, 3)) == "a b a b a b"
    assert str(G.power(a, -2)) == "a^-2"
    assert str(G.conjugate(a, b)) == "a b a^-1"
    assert G.power(a, 0).is_identity()


def test_commutes(f2):
    a, b = G.generators(f2)
    assert G.commutes(a * b, G.power(a * b, 3))
    assert not G.commutes(a, b)


def test_word_length_and_distance(f2xf3):
    g = parse_element(f2xf3, "(a^2 b, x y^-1)")
    assert G.word_length(g) == 5
    assert G.word_distance(g, g) == 0
    assert G.word_distance(G.identity(f2xf3), g) == 5


def test_free_product_torsion():
    spec = FreeProduct((0, 3))
    b = G.generators(spec)[1]
    assert G.power(b, 3).is_identity()
    assert str(G.power(b, 2)) == "b^2"
    # b^2 has length 1 via b^-1
    assert G.word_length(G.power(b, 2)) == 1
    assert G.word_length(G.from_letters(spec, [(0, 2), (1, 1)])) == 3


def test_free_product_syllables_merge():
    spec = FreeProduct((0, 2))
    a, b = G.generators(spec)
    assert (a * b * b * a).payload == ((0, 2),)


def test_spec_mismatch(f2):
    with pytest.raises(SpecMismatch):
        G.multiply(G.generators(f2)[0], G.generators(Free(3))[0])


def test_cyclic_reduce(f2):
    g = parse_element(f2, "b a^2 b a b^-1")
    form = G.cyclic_reduce(g)
    assert str(form.conjugator) == "b"
    assert str(form.core) == "a^2 b a"
    assert G.conjugate(form.conjugator, form.core) == g
    assert G.is_cyclically_reduced(form.core)


@settings(max_examples=200)
@given(letters)
def test_cyclic_reduce_conjugates_back(u):
    g = GroupElement(Free(2), naive_reduce(u))
    form = G.cyclic_reduce(g)
    assert G.conjugate(form.conjugator, form.core) == g
    assert G.is_cyclically_reduced(form.core)


def test_geodesic_letters_spell_element():
    rng = random.Random(3)
    for spec in (Free(3), DirectProduct((Free(2), Free(3))), FreeProduct((0, 3, 2))):
        for _ in range(100):
            g = G.random_element(spec, 9, rng)
            word = G.geodesic_letters(g)
            assert len(word) == G.word_length(g)
            assert G.product(word, spec) == g


def test_format_names(f2xf3):
    assert G.generator_names(f2xf3) == ["a", "b", "x", "y", "z"]
    g = parse_element(f2xf3, "(a^2, y)")
    assert str(g) == "(a^2, y)"
    assert str(G.identity(Free(2))) == "1"


def test_sort_key_is_length_lex(f2):
    elts = [parse_element(f2, w) for w in ("b", "a", "A", "ab", "1")]
    assert [str(x) for x in sorted(elts, key=G.sort_key)] == ["1", "a", "a^-1", "b", "a b"]


def test_exponent_sums(f2xf3):
    g = parse_element(f2xf3, "(a b a^-3, z z)")
    assert G.exponent_sums(g) == [-2, 1, 0, 0, 2]
