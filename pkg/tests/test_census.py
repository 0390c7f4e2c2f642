import pathlib
from collections import deque
from fractions import Fraction

import pytest

from simulhyp import census as C
from simulhyp import groups as G
from simulhyp.actions import BassSerreTree, CayleyTree, Line
from simulhyp.groups import DirectProduct, Free, FreeProduct

GOLDEN = pathlib.Path(__file__).parent / "golden"


def element_bfs(spec, n):
    """Sphere sizes by BFS on GroupElements with the public multiplication."""
    S = G.generating_set(spec)
    seen = {G.identity(spec)}
    front = [G.identity(spec)]
    sizes = [1]
    for _ in range(n):
        nxt = []
        for g in front:
            for s in S:
                h = g * s
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        sizes.append(len(nxt))
        front = nxt
    return sizes


@pytest.mark.parametrize("spec", [Free(1), Free(2), Free(3), DirectProduct((Free(2), Free(3))),
                                  DirectProduct((Free(1), Free(2), Free(1)))])
def test_series_matches_element_bfs(spec):
    assert list(C.sphere_series(spec, 5).sizes) == element_bfs(spec, 5)
    for n in range(6):
        assert C.ball_count(spec, n) == C.ball_count(spec, n, "bfs") == C.ball_count(spec, n, "fast")


@pytest.mark.parametrize("orders", [(0, 2), (0, 3), (2, 3), (0, 0)])
def test_free_product_bfs(orders):
    spec = FreeProduct(orders)
    sizes = element_bfs(spec, 6)
    assert [len(x) for x in C.bfs_layers(spec, 6)] == sizes
    with pytest.raises(C.UnsupportedSeries):
        C.ball_count(spec, 3)


def test_z_star_z2_growth():
    # S = {a, A, b}: a geodesic extends by 2 letters (continue the a-run, or switch factor), so 3 * 2^(n-1)
    assert [len(x) for x in C.bfs_layers(FreeProduct((0, 2)), 6)] == [1] + [3 * 2 ** (n - 1) for n in range(1, 7)]


def test_enumerate_ball_order_and_content(f2xf3):
    for spec, n in ((Free(2), 4), (f2xf3, 3), (FreeProduct((0, 3)), 4)):
        elts = list(C.enumerate_ball(spec, n))
        assert len(elts) == len(set(elts)) == sum(element_bfs(spec, n))
        assert elts == sorted(elts, key=G.sort_key)
        assert all(G.word_length(g) <= n for g in elts)


def test_budget(f2xf3):
    with pytest.raises(C.BudgetExceeded):
        list(C.enumerate_ball(f2xf3, 6, budget=1000))
    with pytest.raises(C.BudgetExceeded):
        C.bfs_layers(f2xf3, 6, budget=1000)


def test_density_small_cases(f2xf3, two_trees):
    sh = C.SimulHyperbolic(two_trees)
    assert C.density(f2xf3, sh, 0).ratio == 0
    rep = C.density(f2xf3, sh, 2)
    assert (rep.hits, rep.ball) == (24, 77)
    for n in range(5):
        counts = {m: C.density(f2xf3, sh, n, m).hits for m in ("enumerate", "factorwise", "series")}
        assert len(set(counts.values())) == 1
        assert C.density(f2xf3, C.Complement(sh), n, "factorwise").hits == C.ball_count(f2xf3, n) - counts["series"]


def test_density_with_line(f2xf3, two_trees):
    pred = C.SimulHyperbolic(two_trees + [Line(f2xf3, (1, 0, 0, 0, 0))])
    assert not pred.factorwise(f2xf3)
    rep = C.density(f2xf3, pred, 2)
    # brute force: nonzero a-exponent sum, nontrivial F3 coordinate and (implied) nontrivial F2 coordinate
    brute = sum(1 for g in C.enumerate_ball(f2xf3, 2)
                if G.exponent_sums(g)[0] != 0 and not g.payload[1].is_identity())
    assert rep.hits == brute


def test_printed_formulas():
    for n in range(13):
        assert C.printed_factor_ball_f2(n) == C.ball_count(Free(2), n)
        assert C.printed_factor_ball_f3(n) == C.ball_count(Free(3), n)
    assert C.printed_product_ball(0) == 1
    assert C.printed_product_ball(1) == 13
    assert C.ball_count(C.F2xF3, 1) == 11
    for n in range(9):
        assert C.printed_nonsh_count(n) == C.ball_count(Free(2), n) + C.ball_count(Free(3), n) - 1


def residue_limit():
    """5^n coefficients by hand: residues of the generating functions at x = 1/5."""
    x = Fraction(1, 5)
    ball = (1 + x) ** 2 / ((1 - x) * (1 - 3 * x))
    nonsh = (1 + x) / (1 - x)
    return nonsh / ball


def test_oracle_limit():
    assert residue_limit() == Fraction(1, 3)
    assert C.oracle_limit() == Fraction(1, 3)
    assert abs(float(C.exact_nonsh_fraction(30)) - 1 / 3) < 1e-6
    assert C.PRINTED_LIMIT == Fraction(48, 225)


def test_audit_flags(tmp_path):
    audit = C.example_4_9_report(20, 4, 4)
    assert audit.first_divergence == 1
    assert all(r.ball_diverges for r in audit.rows[1:])
    assert all(r.nonsh_exhaustive == r.nonsh_exact for r in audit.rows[:5])
    assert audit.rows[1].exact_fraction == 1  # no element of length 1 is SH
    assert all(r.printed_fraction < 1 and r.exact_fraction < 1 for r in audit.rows[2:])
    text = audit.table()
    assert "48/225" in text and "1/3" in text and "DIVERGES" in text


def test_audit_golden():
    audit = C.example_4_9_report(20, 6, 6)
    assert audit.tsv() == (GOLDEN / "example_4_9.tsv").read_text()


def test_ball_golden():
    rows = ["\t".join(C.Audit.COLUMNS[:6])]
    for n in range(9):
        b = C.ball_count(C.F2xF3, n)
        rows.append(f"{n}\t{b}\t{C.ball_count(C.F2xF3, n, 'bfs')}\t\t\t")
    assert "\n".join(rows) + "\n" == (GOLDEN / "ball_f2xf3.tsv").read_text()


def test_density_bound_validation():
    with pytest.raises(AssertionError):
        C.DensityBound(None, 1, Fraction(1))
