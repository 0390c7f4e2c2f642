import random
from fractions import Fraction

import pytest

from simulhyp import groups as G
from simulhyp.actions import BassSerreTree, CayleyTree, Line, orbit_distance
from simulhyp.contracting import (UNBOUNDED, ContractingError, axis, axis_distance_formula, axis_overlap,
                                  bounded_intersection_diam, check_contracting, conjugate_family, distance_to_axis,
                                  independent_on_all, project_to_axis, project_vertex, refine_independent_triple,
                                  weakly_independent)
from simulhyp.grammar import parse_element as P


def brute_projection(X, ax, v):
    """Closest axis vertex by scanning a long stretch of the axis."""
    pts = ax.vertices(-30, 30)
    best = min(X.vertex_distance(v, p) for p in pts)
    return best, [p for p in pts if X.vertex_distance(v, p) == best]


def test_axis_basic(f2):
    X = CayleyTree(f2)
    ax = axis(X, P(f2, "a b a^-1"))
    assert str(ax.entry) == "a" and str(ax.period) == "b"
    assert project_to_axis(X, axis(X, P(f2, "b")), P(f2, "a")) == ()
    with pytest.raises(ContractingError):
        axis(X, G.identity(f2))


def test_projection_matches_brute_force(f2):
    X = CayleyTree(f2)
    rng = random.Random(11)
    for _ in range(150):
        g = G.random_element(f2, 6, rng)
        if G.cyclic_reduce(g).core.is_identity():
            continue
        ax = axis(X, g)
        v = X.vertex(G.random_element(f2, 8, rng))
        best, pts = brute_projection(X, ax, v)
        assert pts == [project_vertex(ax, v)]
        assert distance_to_axis(ax, v) == best


def test_axis_distance_formula(f2, zz2):
    rng = random.Random(4)
    for X, spec in ((CayleyTree(f2), f2), (BassSerreTree(zz2), zz2)):
        for _ in range(100):
            g = G.random_element(spec, 8, rng)
            if not X.is_tree or G.cyclic_reduce(g).core.is_identity():
                continue
            try:
                ax = axis(X, g)
            except ContractingError:
                continue
            assert distance_to_axis(ax, X.base_vertex()) == axis_distance_formula(X, g)


def test_contraction_zero_on_trees(f2, zz2):
    for X, spec, g in ((CayleyTree(f2), f2, "a b"), (BassSerreTree(zz2), zz2, "a b")):
        rep = check_contracting(X, axis(X, P(spec, g)), 0, 40, seed=1)
        assert rep.passed and rep.max_diameter == 0 and rep.samples == 40


def test_overlaps(f2):
    X = CayleyTree(f2)
    a = axis(X, P(f2, "a"))
    assert axis_overlap(a, axis(X, P(f2, "a^3 b"))).length == 3
    assert axis_overlap(a, axis(X, P(f2, "a^3 b a^-3"))).length == 0
    d = [bounded_intersection_diam(X, a, axis(X, P(f2, "b")), r) for r in (0, 1, 2, 4)]
    assert d == [0, 2, 4, 8]
    d = [bounded_intersection_diam(X, a, axis(X, P(f2, "b a b^-1")), r) for r in (0, 1, 2, 4)]
    assert d == [0, 1, 3, 7]
    assert bounded_intersection_diam(X, a, axis(X, P(f2, "a^2")), 1) == UNBOUNDED


def brute_intersection_diam(X, Y, Z, r, radius=9):
    """Diameter of N_r(Y) & N_r(Z) over the vertices of a finite ball."""
    f2 = X.group
    from simulhyp.census import enumerate_ball
    pts = [X.vertex(g) for g in enumerate_ball(f2, radius)]
    ys, zs = Y.vertices(-12, 12), Z.vertices(-12, 12)
    inside = [p for p in pts if min(X.vertex_distance(p, y) for y in ys) <= r
              and min(X.vertex_distance(p, z) for z in zs) <= r]
    return max((X.vertex_distance(p, q) for p in inside for q in inside), default=0)


@pytest.mark.parametrize("z", ["b", "a^3 b", "b a b^-1", "a b^2 a^-1 b"])
@pytest.mark.parametrize("r", [0, 1, 2])
def test_intersection_diam_brute(f2, z, r):
    X = CayleyTree(f2)
    Y, Z = axis(X, P(f2, "a")), axis(X, P(f2, z))
    assert bounded_intersection_diam(X, Y, Z, r) == brute_intersection_diam(X, Y, Z, r, radius=7)


def test_weak_independence(f2, zz2):
    X = CayleyTree(f2)
    cert = weakly_independent(X, P(f2, "a"), P(f2, "a^2"))
    assert not cert.verdict and all(v == UNBOUNDED for v in cert.overlaps.values())
    cert = weakly_independent(X, P(f2, "a b"), P(f2, "b a"))
    assert cert.verdict and "[independence]" in cert.to_text()
    assert not weakly_independent(Line(f2, (1, 0)), P(f2, "a"), P(f2, "a b")).verdict
    T = BassSerreTree(zz2)
    assert weakly_independent(T, P(zz2, "a b"), P(zz2, "a^2 b")).verdict
    with pytest.raises(ContractingError):
        weakly_independent(X, G.identity(f2), P(f2, "a"))


def test_independent_on_all(two_trees, f2xf3):
    assert independent_on_all(two_trees, P(f2xf3, "(a, x)"), P(f2xf3, "(b, y)"))
    assert not independent_on_all(two_trees, P(f2xf3, "(a, x)"), P(f2xf3, "(b, x^2)"))


def test_refine_triple(f2):
    X = CayleyTree(f2)
    pool = [P(f2, w) for w in ("a^2", "b", "a b")]
    assert str(refine_independent_triple(X, P(f2, "a"), pool)) == "b"
    with pytest.raises(ValueError):
        refine_independent_triple(X, P(f2, "a"), pool[:2])


def test_conjugate_family(f2):
    X = CayleyTree(f2)
    fam = conjugate_family([X], P(f2, "a"), P(f2, "b"), 1, 4)
    assert len(fam) == 4
    assert all(orbit_distance(X, G.cyclic_reduce(x).core) == 1 for x in fam)
