import itertools
from fractions import Fraction

import pytest

from simulhyp import construct as K
from simulhyp import groups as G
from simulhyp.actions import (ActionError, BassSerreTree, CayleyTree, Line, is_hyperbolic, orbit_distance,
                              translation_length)
from simulhyp.census import enumerate_ball
from simulhyp.contracting import weakly_independent
from simulhyp.grammar import parse_element as P
from simulhyp.groups import DirectProduct, Free, FreeProduct, GroupElement
from simulhyp.quasimorphisms import evaluate, homomorphism


def both_hyp(X, f, g):
    return is_hyperbolic(X, f * g) and is_hyperbolic(X, g * f)


# -- extension lemma -----------------------------------------------------------------


def test_extension_pick_examples(f2):
    X = CayleyTree(f2)
    triple = [P(f2, w) for w in ("a", "b", "a b")]
    assert str(K.extension_pick(X, P(f2, "a^-1"), triple)) == "b"
    assert str(K.extension_pick(X, P(f2, "a b a b^-1 a^3"), triple)) == "a"


def test_extension_pick_exhaustive(f2):
    X = CayleyTree(f2)
    triple = [P(f2, w) for w in ("a^2", "b^2", "a b a b")]
    for g in enumerate_ball(f2, 5):
        f = K.extension_pick(X, g, triple)
        assert both_hyp(X, f, g)
        # lowest index: every earlier candidate fails
        assert all(not both_hyp(X, h, g) for h in triple[: triple.index(f)])


def test_extension_failure_witness(zz2):
    T = BassSerreTree(zz2)
    # f b = a^-1 b a is elliptic (it fixes a vertex), so a^-1 fails; nothing else is offered
    with pytest.raises(K.ExtensionFailure) as info:
        K.extension_pick(T, P(zz2, "b"), [P(zz2, "a^-1 b a b")])
    assert info.value.g == P(zz2, "b")


def test_calibration_f2(f2):
    X = CayleyTree(f2)
    res = K.calibrate_extension_constant([X], [P(f2, w) for w in ("a", "b", "a b")], 500, seed=1)
    assert res.D == 1 and not res.failures
    assert "D=1" in res.to_text()


def test_calibration_product(two_trees, f2xf3):
    pool = K.seed_family(two_trees, 6)
    res = K.calibrate_extension_constant(two_trees, pool, 10_000, seed=7)
    assert res.D >= 1 and res.trials >= 10_000


def test_calibration_failures_are_genuine(zz2):
    T = BassSerreTree(zz2)
    pool = K.seed_family([T], 6)
    res = K.calibrate_extension_constant([T], pool, 2000, seed=0)
    for D, space, g, triple in res.failures:
        assert D < res.D
        assert all(not both_hyp(space, f, g) for f in triple)


def test_calibration_rejects_dependent_pool(f2):
    with pytest.raises(Exception):
        K.calibrate_extension_constant([CayleyTree(f2)], [P(f2, w) for w in ("a", "a^2", "b")], 10, 0)


# -- powered families ------------------------------------------------------------------


def test_power_up_single(f2):
    X = CayleyTree(f2)
    fam = K.power_up([X], [P(f2, "a")], 1)
    assert fam.exponents == [4] and fam.validated


def test_power_up_chain_inequalities(f2):
    X = CayleyTree(f2)
    elts = [P(f2, w) for w in ("a", "b", "a b", "a b^-1")]
    D = Fraction(1)
    fam = K.power_up([X], elts, D)
    d = [orbit_distance(X, G.power(f, m)) for f, m in zip(elts, fam.exponents)]
    N = len(d)
    shifted = [d[i] - 2 * (N - 1 - i) * D for i in range(N)]
    assert all(shifted[i] > shifted[i + 1] for i in range(N - 1))
    assert d[-1] > 3 * D
    # smallest exponents: lowering any single one breaks the chain
    for i, m in enumerate(fam.exponents):
        if m > 1:
            lower = d[:i] + [orbit_distance(X, G.power(elts[i], m - 1))] + d[i + 1:]
            ok_next = lower[i] > lower[i + 1] + 2 * D if i + 1 < N else lower[i] > 3 * D
            assert not ok_next


def test_power_up_rejects_elliptic(f2xf3, two_trees):
    with pytest.raises(Exception):
        K.power_up(two_trees, [P(f2xf3, "(a, 1)")], 1)


# -- SC construction -------------------------------------------------------------------


def test_sc_construction_example(f2):
    X = CayleyTree(f2)
    pool = [P(f2, w) for w in ("a^2", "b^2", "a b a b", "b a b a", "a^2 b a^2 b")]
    out = K.sc_construction([X], [P(f2, "b^-2")], pool, D=0)
    assert len(out) >= 3
    for p in out:
        assert is_hyperbolic(X, p.product)


def test_sc_construction_all_valid(f2):
    X = CayleyTree(f2)
    pool = [P(f2, w) for w in ("a^2", "b^2", "a b a b", "b a b a", "a^2 b a^2 b")]
    out = K.sc_construction([X], [P(f2, "a b^-1 a b^-1 a^-1 b")], pool, D=0)
    assert len(out) == len(pool)


def test_sc_construction_two_spaces(two_trees, f2xf3):
    pool = K.power_up(two_trees, K.seed_family(two_trees, 9), 1)
    hs = [P(f2xf3, "(a^4 b, x^3 y^-1 z)"), P(f2xf3, "(b^5, y^7)")]
    out = K.sc_construction(two_trees, hs, pool)
    for j in range(len(hs)):
        assert sum(1 for p in out if p.h_index == j) >= len(pool) - 4
    assert all(K.is_sc(two_trees, p.product) for p in out)


def test_sc_construction_witness(zz2):
    T = BassSerreTree(zz2)
    h = P(zz2, "b a b")
    # f_k h = a^k b a^-k is elliptic for each k, so all three candidates fail
    pool = [G.multiply(P(zz2, f"a^{k} b a^{-k}"), G.inverse(h)) for k in (1, 2, 3)]
    with pytest.raises(K.ExtensionFailure):
        K.sc_construction([T], [h], pool + [P(zz2, "a b")], D=0)


def test_sc_construction_pool_size(f2):
    with pytest.raises(ValueError):
        K.sc_construction([CayleyTree(f2)], [P(f2, "a")], [P(f2, "b"), P(f2, "a b")], D=0)


# -- simultaneously contracting elements ---------------------------------------------


def test_pigeonhole_identities():
    vals = K.pigeonhole_identities(6, 2)
    assert vals == {"4s^2-4sl": 96, "4s^2-(8l-4)s": 72, "2s^2-(4l-2)s": 36, "2s^2-(2l+2)s": 36}
    # the f>g> count as a sum of run bounds
    s, l = 6, 2
    assert 2 * s * (2 * s - 2 * (l - 1)) + 2 * s * (2 * s - 2) - (2 * s) ** 2 == 4 * s * s - 4 * s * l
    with pytest.raises(AssertionError):
        K.pigeonhole_identities(3, 2)


def test_find_sc_base_case(f2):
    X = CayleyTree(f2)
    cert = K.find_simul_contracting([X])
    assert cert.case == "base" and cert.recheck() and str(cert.element) == "a"


def test_find_sc_two_trees(two_trees):
    cert = K.find_simul_contracting(two_trees)
    x, y = cert.element.payload
    assert not x.is_identity() and not y.is_identity()
    assert cert.recheck()
    assert cert.counts["candidates"] >= cert.counts["bound"] > 0
    assert cert.case == "f<g<"
    assert "case=f<g<" in cert.to_text()


def _shifted(f2xf3, fam, left, right):
    return [GroupElement(f2xf3, (G.multiply(left, f.payload[0]) if left else f.payload[0],
                                 G.multiply(f.payload[1], right) if right else f.payload[1])) for f in fam]


@pytest.mark.parametrize("fbig,gbig,case", [(False, False, "f<g<"), (True, False, "f>g<"),
                                            (False, True, "f<g>"), (True, True, "f>g>")])
def test_find_sc_all_cases(f2xf3, two_trees, fbig, gbig, case):
    s = 6
    F0 = K.seed_family(two_trees[:1], 4 * s)
    T0 = K.seed_family(two_trees[1:], 4 * s)
    x5 = G.power(G.generators(Free(3))[0], 5)
    a5 = G.power(G.generators(Free(2))[0], 5)
    F = [GroupElement(f2xf3, (f.payload[0], x5)) for f in F0] if fbig else F0
    T = [GroupElement(f2xf3, (a5, t.payload[1])) for t in T0] if gbig else T0
    cert = K.find_simul_contracting(two_trees, F, T)
    assert cert.case.startswith(case)
    assert cert.recheck()
    assert cert.counts["candidates"] >= cert.counts["bound"]


def test_find_sc_three_trees():
    spec = DirectProduct((Free(2), Free(3), Free(2)))
    X = [CayleyTree(spec, i) for i in range(3)]
    cert = K.find_simul_contracting(X)
    assert cert.recheck() and all(t > 0 for t in cert.translation_lengths)


def test_find_sc_deterministic(two_trees):
    assert K.find_simul_contracting(two_trees, seed=3).to_text() == K.find_simul_contracting(two_trees, seed=3).to_text()


def test_find_sc_rejects_dependent_seeds(two_trees, f2xf3):
    seeds = [P(f2xf3, "(a, 1)")] * 24
    with pytest.raises(Exception):
        K.find_simul_contracting(two_trees, seeds, seeds)


def test_independent_sc_family(two_trees):
    fam = K.independent_sc_family(two_trees, 5)
    assert len(fam) == 5
    for g, h in itertools.combinations(fam, 2):
        for X in two_trees:
            assert weakly_independent(X, g, h).verdict
    for X in two_trees:
        assert len({translation_length(X, g) for g in fam}) == 1
    assert K.independent_sc_family(two_trees, 1) == [K.find_simul_contracting(two_trees).element]


def test_independent_family_one_tree(f2):
    X = CayleyTree(f2)
    fam = K.independent_sc_family([X], 4)
    for g, h in itertools.combinations(fam, 2):
        assert weakly_independent(X, g, h).verdict


# -- extension sets --------------------------------------------------------------------


def test_sc_extension_set_free(f2):
    X = CayleyTree(f2)
    ext = K.sc_extension_set([X], 4)
    assert len(ext.F) == 6 and ext.passed and len(ext.ladder) == 2
    assert ext.M == max(G.word_length(f) for f in ext.F)
    # ladder gaps, rechecked by hand
    f1 = ext.base[0]
    L = orbit_distance(X, f1)
    j = ext.ladder
    assert all(orbit_distance(X, G.power(f1, j[r])) > 2 * ext.D + j[r - 1] * L for r in range(1, len(j)))
    # the extension property, rechecked independently
    for g in enumerate_ball(f2, 4):
        assert any(is_hyperbolic(X, g * f) for f in ext.F)
    assert all(orbit_distance(X, f) >= 2 * ext.D for f in ext.base)


def test_sc_extension_set_two_trees(two_trees, f2xf3):
    ext = K.sc_extension_set(two_trees, 3)
    assert ext.passed and len(ext.F) == 3 * 5
    for g in enumerate_ball(f2xf3, 3):
        assert any(K.is_sc(two_trees, g * f) for f in ext.F)
        # interval-partition claim
        assert any(all(orbit_distance(X, g * G.power(ext.base[0], j)) > ext.D for X in two_trees)
                   for j in ext.ladder)
    assert "[extension-set]" in ext.to_text()


def test_sh_extension_pure_general(two_trees):
    ext = K.sh_extension_set(two_trees, [], 2)
    assert ext.target == "SH" and ext.power_window == 1 and ext.passed


def test_sh_extension_with_line(two_trees, f2xf3):
    line = Line(f2xf3, (1, 0, 0, 0, 0))
    ext = K.sh_extension_set(two_trees + [line], [], 3)
    assert ext.passed and ext.power_window == 2
    q = ext.qms[0]
    for g in enumerate_ball(f2xf3, 3):
        h = next(f for f in ext.F if K.is_sc(two_trees, g * f) and evaluate(q, g * f) != 0)
        assert translation_length(line, g * h) > 0
        # power window: some p <= 2 keeps the evaluator nonzero
        for f in ext.base:
            assert any(evaluate(q, g * G.power(f, p)) != 0 for p in (1, 2))


def test_split_actions_errors(f2):
    with pytest.raises(ActionError):
        K.split_actions([Line(f2, (0, 0))])
    with pytest.raises(ActionError):
        K.split_actions([BassSerreTree(FreeProduct((2, 2)))])
    general, evals = K.split_actions([CayleyTree(DirectProduct((Free(1), Free(2))), 0)])
    assert not general and evals[0].kind == "hom"


# -- simultaneously hyperbolic elements -----------------------------------------------


def test_find_sh_all_lineal(f2):
    cert = K.find_simul_hyperbolic([Line(f2, (1, 0)), Line(f2, (0, 1))])
    assert cert.method == "lineal-focal" and cert.recheck()
    assert all(e != 0 for e in G.exponent_sums(cert.element))


def test_find_sh_trees(two_trees):
    cert = K.find_simul_hyperbolic(two_trees)
    x, y = cert.element.payload
    assert cert.recheck() and not x.is_identity() and not y.is_identity()


def test_find_sh_trees_and_line(two_trees, f2xf3):
    line = Line(f2xf3, (1, 0, 0, 0, 0))
    cert = K.find_simul_hyperbolic(two_trees + [line])
    assert cert.method == "coset-avoidance" and cert.recheck()
    assert translation_length(line, cert.element) > 0


def test_find_sh_bass_serre(zz2):
    cert = K.find_simul_hyperbolic([BassSerreTree(zz2), Line(zz2, (1, 0))])
    assert cert.recheck()


def test_find_sh_with_counting_qm(two_trees, f2xf3):
    from simulhyp.quasimorphisms import counting
    q = counting(f2xf3, "ab")
    cert = K.find_simul_hyperbolic(two_trees, [q])
    assert cert.recheck() and evaluate(q, cert.element) != 0


def test_threads_do_not_change_results(f2):
    X = CayleyTree(f2)
    one = K.sc_extension_set([X], 3, threads=1)
    two = K.sc_extension_set([X], 3, threads=2)
    assert one.to_text() == two.to_text()
