"""Exact ball counts, length-lexicographic enumeration and density censuses.

Ball sizes come from two independent routes: sphere series (closed form for
free groups, convolution for direct products) and breadth-first search on
normal-form keys. Free products of cyclic groups are counted by BFS only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from . import groups as G
from .actions import CayleyTree, ActionSpace, translation_length
from .groups import DirectProduct, Free, FreeProduct, GroupElement, GroupSpec

DEFAULT_BUDGET = 5_000_000


class BudgetExceeded(RuntimeError):
    pass


class UnsupportedSeries(ValueError):
    pass


# ---------------------------------------------------------------------------
# Sphere series


@dataclass(frozen=True)
class SphereSeries:
    group: GroupSpec
    sizes: tuple

    def ball(self, n: int) -> int:
        return sum(self.sizes[: n + 1])

    def balls(self) -> list[int]:
        out, acc = [], 0
        for s in self.sizes:
            acc += s
            out.append(acc)
        return out


def convolve(a: Sequence[int], b: Sequence[int], n_max: int) -> list[int]:
    return [sum(a[i] * b[n - i] for i in range(n + 1) if i < len(a) and n - i < len(b)) for n in range(n_max + 1)]


def _sizes(group: GroupSpec, n_max: int) -> list[int]:
    if isinstance(group, Free):
        k = group.rank
        return [1] + [2 * k * (2 * k - 1) ** (n - 1) for n in range(1, n_max + 1)]
    if isinstance(group, DirectProduct):
        out = _sizes(group.factors[0], n_max)
        for f in group.factors[1:]:
            out = convolve(out, _sizes(f, n_max), n_max)
        return out
    raise UnsupportedSeries(f"no closed-form sphere series for {group}; use BFS")


def sphere_series(group: GroupSpec, n_max: int) -> SphereSeries:
    return SphereSeries(group, tuple(_sizes(group, n_max)))


def has_series(group: GroupSpec) -> bool:
    if isinstance(group, Free):
        return True
    if isinstance(group, DirectProduct):
        return all(has_series(f) for f in group.factors)
    return False


# ---------------------------------------------------------------------------
# BFS on normal-form keys


def _stepper(spec: GroupSpec):
    """(letters, step) with step(key, letter) = key * letter on raw payload keys."""
    if isinstance(spec, Free):
        letters = [s for i in range(1, spec.rank + 1) for s in (i, -i)]

        def step(u, s):
            return u[:-1] if u and u[-1] == -s else u + (s,)

        return letters, step
    if isinstance(spec, FreeProduct):
        letters = []
        for i, k in enumerate(spec.orders):
            for e in (1, -1):
                syl = (i, G._norm_exp(e, k))
                if syl not in letters:
                    letters.append(syl)

        def step(u, syl):
            return G._fp_mul(spec, u, (syl,))

        return letters, step
    subs = [_stepper(f) for f in spec.factors]
    letters = [(p, s) for p, (ls, _) in enumerate(subs) for s in ls]

    def step(u, ps):
        p, s = ps
        return u[:p] + (subs[p][1](u[p], s),) + u[p + 1 :]

    return letters, step


def _identity_key(spec: GroupSpec):
    if isinstance(spec, DirectProduct):
        return tuple(_identity_key(f) for f in spec.factors)
    return ()


def bfs_layers(group: GroupSpec, n: int, budget: int | None = DEFAULT_BUDGET) -> list[list]:
    """Spheres of radius 0..n as lists of raw keys, by breadth-first search."""
    letters, step = _stepper(group)
    start = _identity_key(group)
    seen = {start}
    layers = [[start]]
    for _ in range(n):
        nxt = []
        for u in layers[-1]:
            for s in letters:
                v = step(u, s)
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if budget is not None and len(seen) > budget:
            raise BudgetExceeded(f"BFS ball of {group} exceeds budget {budget}")
        layers.append(nxt)
    return layers


def _key_to_element(spec: GroupSpec, key) -> GroupElement:
    if isinstance(spec, DirectProduct):
        return GroupElement(spec, tuple(_key_to_element(f, k) for f, k in zip(spec.factors, key)))
    return GroupElement(spec, key)


def _free_ball(rank: int, n: int) -> int:
    if rank == 1:
        return 2 * n + 1
    q = 2 * rank - 1
    return 1 + 2 * rank * (q**n - 1) // (q - 1)


def _fast_ball(group: GroupSpec, n: int) -> int:
    """#S^{<=n} as sum_i a(i) B(n - i), with a the sphere series of all but the last factor."""
    if isinstance(group, Free):
        return _free_ball(group.rank, n)
    if not isinstance(group, DirectProduct):
        raise UnsupportedSeries(f"no closed-form sphere series for {group}; use BFS")
    *head, last = group.factors
    a = _sizes(head[0], n) if len(head) == 1 else _sizes(DirectProduct(tuple(head)), n)
    return sum(a[i] * _fast_ball(last, n - i) for i in range(n + 1))


def ball_count(group: GroupSpec, n: int, method: str = "series", budget: int | None = DEFAULT_BUDGET) -> int:
    if method == "series":
        return sphere_series(group, n).ball(n)
    if method == "fast":
        return _fast_ball(group, n)
    if method == "bfs":
        return sum(len(layer) for layer in bfs_layers(group, n, budget))
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Enumeration


def _lex_letter(s: int) -> int:
    return 2 * (abs(s) - 1) + (s < 0)


def _free_spheres(rank: int, n: int) -> list[list[tuple]]:
    letters = sorted((s for i in range(1, rank + 1) for s in (i, -i)), key=_lex_letter)
    layers = [[()]]
    for _ in range(n):
        layers.append([u + (s,) for u in layers[-1] for s in letters if not u or u[-1] != -s])
    return layers


def _spheres(spec: GroupSpec, n: int) -> list[list]:
    """Sorted spheres (raw keys) of radius 0..n for a non-product spec."""
    if isinstance(spec, Free):
        return _free_spheres(spec.rank, n)
    layers = bfs_layers(spec, n, None)
    return [sorted(layer) for layer in layers]


def _product_sphere(factor_spheres: list, m: int) -> Iterator[tuple]:
    if len(factor_spheres) == 1:
        yield from ((x,) for x in factor_spheres[0][m])
        return
    first, rest = factor_spheres[0], factor_spheres[1:]
    for i in range(m + 1):
        for x in first[i]:
            for tail in _product_sphere(rest, m - i):
                yield (x,) + tail


def _nested_spheres(spec: GroupSpec, n: int) -> list:
    if not isinstance(spec, DirectProduct):
        return _spheres(spec, n)
    subs = [_nested_spheres(f, n) for f in spec.factors]
    return [list(_product_sphere(subs, m)) for m in range(n + 1)]


def ball_size_estimate(group: GroupSpec, n: int) -> int | None:
    return ball_count(group, n) if has_series(group) else None


def enumerate_ball(group: GroupSpec, n: int, budget: int | None = DEFAULT_BUDGET) -> Iterator[GroupElement]:
    """Every element of S^{<=n} exactly once, in length-lexicographic order."""
    size = ball_size_estimate(group, n)
    if budget is not None and size is not None and size > budget:
        raise BudgetExceeded(f"ball of radius {n} in {group} has {size} elements (budget {budget})")
    spheres = _nested_spheres(group, n)
    if budget is not None and size is None and sum(len(s) for s in spheres) > budget:
        raise BudgetExceeded(f"ball of radius {n} in {group} exceeds budget {budget}")
    for layer in spheres:
        for key in layer:
            yield _key_to_element(group, key)


# ---------------------------------------------------------------------------
# Predicates and density


class SimulHyperbolic:
    """g is hyperbolic on every space and nonzero on every evaluator."""

    def __init__(self, spaces: Sequence[ActionSpace], qms: Sequence = (), label: str = "SH"):
        self.spaces = list(spaces)
        self.qms = list(qms)
        self.label = label

    def __call__(self, g: GroupElement) -> bool:
        from .quasimorphisms import evaluate

        return all(translation_length(s, g) > 0 for s in self.spaces) and all(evaluate(q, g) != 0 for q in self.qms)

    def factorwise(self, group: GroupSpec) -> bool:
        """True when the predicate is a conjunction of conditions on single free factors."""
        return (isinstance(group, DirectProduct) and not self.qms
                and all(isinstance(s, CayleyTree) and s.factor is not None for s in self.spaces))

    def series_hits(self, group: GroupSpec, n: int) -> int:
        if not self.factorwise(group) or not has_series(group):
            raise UnsupportedSeries("series hit counting needs factor trees on a product of free groups")
        acting = {s.factor for s in self.spaces}
        # on a free-group Cayley tree every nontrivial element is hyperbolic, so a
        # hit is a tuple whose acted-on coordinates are all nontrivial
        *head, last = range(len(group.factors))
        out = None
        for p in head:
            sizes = _sizes(group.factors[p], n)
            if p in acting:
                sizes = [0] + sizes[1:]
            out = sizes if out is None else convolve(out, sizes, n)
        drop = 1 if last in acting else 0
        return sum(out[i] * (_fast_ball(group.factors[last], n - i) - drop) for i in range(n + 1))


class Complement:
    def __init__(self, inner, label: str | None = None):
        self.inner = inner
        self.label = label or f"not {inner.label}"

    def __call__(self, g: GroupElement) -> bool:
        return not self.inner(g)

    def factorwise(self, group: GroupSpec) -> bool:
        return self.inner.factorwise(group)

    def series_hits(self, group: GroupSpec, n: int) -> int:
        return ball_count(group, n, "fast") - self.inner.series_hits(group, n)


@dataclass(frozen=True)
class DensityReport:
    n: int
    ball: int
    hits: int
    ratio: Fraction
    label: str
    method: str

    def __post_init__(self):
        if not 0 <= self.hits <= self.ball or self.ratio != Fraction(self.hits, self.ball):
            raise AssertionError("inconsistent density report")


def factorwise_hits(group: GroupSpec, predicate, n: int) -> int:
    """Exhaustive count over the product ball, classifying each coordinate once.

    Every element (x_1, ..., x_k) of S^{<=n} is visited; whether it satisfies
    the predicate is read off cached per-factor classifications, which is
    exact because each space sees a single coordinate.
    """
    negate = isinstance(predicate, Complement)
    base = predicate.inner if negate else predicate
    spec_spaces = {}
    for s in base.spaces:
        spec_spaces.setdefault(s.factor, []).append(s)
    tables = []
    for p, f in enumerate(group.factors):
        spaces = [CayleyTree(f)] * len(spec_spaces.get(p, []))
        by_len = []
        for m, layer in enumerate(_spheres(f, n)):
            by_len.append([all(translation_length(sp, GroupElement(f, x)) > 0 for sp in spaces) for x in layer])
        tables.append(by_len)

    hits = 0

    def walk(p: int, remaining: int, ok: bool):
        nonlocal hits
        if p == len(tables) - 1:
            for m in range(remaining + 1):
                for flag in tables[p][m]:
                    if (ok and flag) != negate:
                        hits += 1
            return
        for m in range(remaining + 1):
            for flag in tables[p][m]:
                walk(p + 1, remaining - m, ok and flag)

    walk(0, n, True)
    return hits


def density(group: GroupSpec, predicate: Callable, n: int, method: str = "enumerate",
            budget: int | None = DEFAULT_BUDGET) -> DensityReport:
    label = getattr(predicate, "label", getattr(predicate, "__name__", "predicate"))
    if method == "series":
        ball = ball_count(group, n)
        hits = predicate.series_hits(group, n)
    elif method == "fast-series":
        ball = ball_count(group, n, "fast")
        hits = predicate.series_hits(group, n)
    elif method == "factorwise":
        ball = ball_count(group, n)
        hits = factorwise_hits(group, predicate, n)
    elif method == "enumerate":
        ball = hits = 0
        for g in enumerate_ball(group, n, budget):
            ball += 1
            hits += bool(predicate(g))
    else:
        raise ValueError(f"unknown method {method!r}")
    return DensityReport(n, ball, hits, Fraction(hits, ball), label, method)


# ---------------------------------------------------------------------------
# Density bound from an extension set


@dataclass
class DensityBound:
    F: object
    M: int
    c: Fraction

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise AssertionError("density bound must lie in (0, 1)")


def density_bound_from_extension_set(ext, group: GroupSpec) -> DensityBound:
    F = ext.F if hasattr(ext, "F") else list(ext)
    if not F:
        raise ValueError("empty extension set")
    M = max(G.word_length(f) for f in F)
    return DensityBound(ext, M, Fraction(1, ball_count(group, 2 * M, "fast" if has_series(group) else "bfs")))


@dataclass
class ClaimReport:
    n: int
    M: int
    checked: int
    passed: bool
    max_distance: int = 0
    counterexample: str = ""


def _truncate(g: GroupElement, M: int) -> GroupElement:
    """The point at distance M from g on a geodesic from 1 to g."""
    letters = G.geodesic_letters(g)
    return G.product(letters[: len(letters) - M], g.spec)


def verify_extension_claim(ext, group: GroupSpec, n: int, predicate,
                           budget: int | None = DEFAULT_BUDGET) -> ClaimReport:
    """For every g in S^{<=n}, exhibit h in S^{<=n} & E with d_S(g, h) <= 2M.

    E is the set cut out by ``predicate``. When |g| <= M the witness is g f;
    otherwise g is cut back by M letters along a geodesic and extended by f.
    For n <= 2M only the first (degenerate) check applies to short g, without
    the length condition.
    """
    F = ext.F if hasattr(ext, "F") else list(ext)
    M = max(G.word_length(f) for f in F)
    checked = 0
    worst = 0
    for g in enumerate_ball(group, n, budget):
        checked += 1
        lg = G.word_length(g)
        base = g if lg <= M else _truncate(g, M)
        witness = None
        for f in F:
            h = G.multiply(base, f)
            if not predicate(h):
                continue
            if lg > M or n > 2 * M:
                if G.word_length(h) > n or G.word_distance(g, h) > 2 * M:
                    continue
            witness = h
            break
        if witness is None:
            return ClaimReport(n, M, checked, False, worst, f"g={g}")
        worst = max(worst, G.word_distance(g, witness))
    return ClaimReport(n, M, checked, True, worst)


# ---------------------------------------------------------------------------
# The F2 x F3 audit


def printed_factor_ball_f2(n: int) -> int:
    return 2 * 3**n - 1


def printed_factor_ball_f3(n: int) -> Fraction:
    return Fraction(3, 2) * 5**n - Fraction(1, 2)


def printed_product_ball(n: int) -> Fraction:
    """The product-ball closed form exactly as printed in the example."""
    return Fraction(45, 32) * (5 ** (n + 1) - 1) + 3 * (-(3 ** (n + 1)) + 1) + Fraction((n + 1) * (2 * n + 11), 8)


def printed_nonsh_count(n: int) -> Fraction:
    return Fraction(3, 2) * 5**n + 2 * 3**n - Fraction(5, 2)


PRINTED_LIMIT = Fraction(48, 225)


def product_ball_generating_function():
    """sympy expression of sum_n #S^{<=n} x^n for F2 x F3."""
    import sympy as sp

    x = sp.symbols("x")
    return x, (1 + x) ** 2 / ((1 - x) * (1 - 3 * x) * (1 - 5 * x))


def oracle_limit() -> Fraction:
    """Limit of the exact non-SH fraction, from partial fractions of the generating functions.

    The coefficient of 5^n in #S^{<=n} is minus the coefficient of 1/(5x - 1)
    in the partial-fraction expansion; the non-SH count is #S_1^{<=n} +
    #S_2^{<=n} - 1, whose 5^n coefficient comes from the F3 factor alone.
    """
    import sympy as sp

    x, ball = product_ball_generating_function()
    nonsh = (1 + x) / ((1 - x) * (1 - 3 * x)) + (1 + x) / ((1 - x) * (1 - 5 * x)) - 1 / (1 - x)

    def lead5(expr):
        total = sp.Integer(0)
        for term in sp.Add.make_args(sp.apart(sp.together(expr), x)):
            num, den = sp.fraction(sp.factor(term))
            if sp.degree(den, x) == 1 and sp.simplify(den.subs(x, sp.Rational(1, 5))) == 0:
                # c / (a - 5a x) contributes c/a * 5^n
                a = den.subs(x, 0)
                total += num / a
        return total

    lim = sp.nsimplify(lead5(nonsh) / lead5(ball))
    return Fraction(int(lim.p), int(lim.q))


@dataclass
class AuditRow:
    n: int
    f2_formula: int
    f2_series: int
    f3_formula: Fraction
    f3_series: int
    printed_ball: Fraction
    exact_ball: int
    bfs_ball: int | None
    printed_nonsh: Fraction
    nonsh_exact: int
    nonsh_exhaustive: int | None
    printed_fraction: Fraction
    exact_fraction: Fraction

    @property
    def ball_diverges(self) -> bool:
        return self.printed_ball != self.exact_ball


@dataclass
class Audit:
    rows: list = field(default_factory=list)
    printed_limit: Fraction = PRINTED_LIMIT
    oracle_limit: Fraction | None = None
    first_divergence: int | None = None

    COLUMNS = ("n", "ball_series", "ball_bfs", "hits", "ratio_num", "ratio_den",
               "printed_ball", "printed_hits", "printed_ratio_num", "printed_ratio_den", "diverges")

    def tsv(self) -> str:
        lines = ["\t".join(self.COLUMNS)]
        for r in self.rows:
            pb = r.printed_fraction
            lines.append("\t".join(str(v) for v in (
                r.n, r.exact_ball, "" if r.bfs_ball is None else r.bfs_ball, r.nonsh_exact,
                r.exact_fraction.numerator, r.exact_fraction.denominator,
                r.printed_ball, r.printed_nonsh, pb.numerator, pb.denominator,
                "yes" if r.ball_diverges else "no")))
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        head = f"{'n':>3} {'printed ball':>22} {'exact ball':>18} {'bfs':>9} {'non-SH':>16} {'printed frac':>10} {'exact frac':>10}  flag"
        lines = [head]
        for r in self.rows:
            lines.append(
                f"{r.n:>3} {str(r.printed_ball):>22} {r.exact_ball:>18} {'' if r.bfs_ball is None else r.bfs_ball:>9} "
                f"{r.nonsh_exact:>16} {float(r.printed_fraction):>10.6f} {float(r.exact_fraction):>10.6f}  "
                f"{'DIVERGES' if r.ball_diverges else 'ok'}")
        lines.append(f"first divergence of printed product-ball formula from exact count: n={self.first_divergence}")
        lines.append(f"printed limit of non-SH fraction: 48/225 = {float(self.printed_limit):.6f}")
        lines.append(f"partial-fraction oracle limit: {self.oracle_limit} = {float(self.oracle_limit):.6f}")
        return "\n".join(lines) + "\n"


F2xF3 = DirectProduct((Free(2), Free(3)))


def example_4_9_report(n_max: int, bfs_limit: int, exhaustive_limit: int | None = None) -> Audit:
    exhaustive_limit = bfs_limit if exhaustive_limit is None else exhaustive_limit
    s1 = sphere_series(Free(2), n_max).balls()
    s2 = sphere_series(Free(3), n_max).balls()
    prod = sphere_series(F2xF3, n_max).balls()
    bfs = [sum(len(x) for x in bfs_layers(F2xF3, n, None)[: n + 1]) for n in range(min(n_max, bfs_limit) + 1)] \
        if bfs_limit >= 0 else []
    sh = SimulHyperbolic([CayleyTree(F2xF3, 0), CayleyTree(F2xF3, 1)])
    audit = Audit(oracle_limit=oracle_limit())
    for n in range(n_max + 1):
        nonsh = s1[n] + s2[n] - 1
        exhaustive = None
        if n <= exhaustive_limit:
            exhaustive = factorwise_hits(F2xF3, Complement(sh), n)
        row = AuditRow(
            n, printed_factor_ball_f2(n), s1[n], printed_factor_ball_f3(n), s2[n],
            printed_product_ball(n), prod[n], bfs[n] if n < len(bfs) else None,
            printed_nonsh_count(n), nonsh, exhaustive,
            printed_nonsh_count(n) / printed_product_ball(n), Fraction(nonsh, prod[n]))
        audit.rows.append(row)
        if audit.first_divergence is None and row.ball_diverges:
            audit.first_divergence = n
    return audit


def exact_nonsh_fraction(n: int) -> Fraction:
    s1 = sphere_series(Free(2), n).ball(n)
    s2 = sphere_series(Free(3), n).ball(n)
    return Fraction(s1 + s2 - 1, ball_count(F2xF3, n))
