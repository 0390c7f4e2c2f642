"""Axes, closest-point projections, bounded intersections and weak independence on trees.

On a tree a hyperbolic isometry g = u c u^-1 (c cyclically reduced) has the
axis u . (union over n of c^n [p0, c p0]) where p0 is the identity vertex of
a Cayley tree or the trivial-stabilizer vertex 1 of a Bass-Serre tree.
Projections onto an axis are tree medians, so the projection of a connected
set missing the axis is a single vertex.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import groups as G
from .actions import ActionError, ActionSpace, Line, is_hyperbolic, orbit_distance, translation_length
from .groups import GroupElement
from .reports import fraction_text, to_kv

UNBOUNDED = math.inf
OVERLAP_RADII = (0, 1, 2, 4)


class ContractingError(ValueError):
    pass


@dataclass(frozen=True)
class Axis:
    space: ActionSpace
    element: GroupElement
    entry: GroupElement  # conjugator u, in the acting coordinate
    period: GroupElement  # cyclically reduced core c
    tau: Fraction

    def point(self, n: int):
        """The vertex u c^n p0."""
        x = G.multiply(self.entry, G.power(self.period, n))
        return self.space._translate(x.payload, self.space.center())

    def vertices(self, lo: int, hi: int) -> list:
        """Axis vertices from point(lo) to point(hi), in order."""
        out = [self.point(lo)]
        for n in range(lo, hi):
            out.extend(self.space.geodesic(self.point(n), self.point(n + 1))[1:])
        return out

    def window(self, v) -> tuple:
        """Endpoints u c^-N p0, u c^N p0 far enough out that v projects strictly between them."""
        d = self.space.vertex_distance(self.point(0), v)
        n = math.ceil(d / self.tau) + 1
        return self.point(-n), self.point(n)

    def __str__(self) -> str:
        return f"axis(entry={self.entry}, period={self.period})"


def _require_tree(space: ActionSpace) -> None:
    if not space.is_tree:
        raise ActionError(f"{space} is not a tree space")


def axis(space: ActionSpace, g: GroupElement) -> Axis:
    _require_tree(space)
    tau = translation_length(space, g)
    if tau == 0:
        raise ContractingError(f"{g} is elliptic on {space}; it has no axis")
    form = G.cyclic_reduce(space.coordinate(g))
    return Axis(space, g, form.conjugator, form.core, tau)


def project_vertex(ax: Axis, v):
    """Closest point of the axis to the vertex v (median of v and two far axis points)."""
    space = ax.space
    lo, hi = ax.window(v)
    to_v = space.geodesic(lo, v)
    line = space.geodesic(lo, hi)
    k = 0
    m = min(len(to_v), len(line))
    while k < m and to_v[k] == line[k]:
        k += 1
    return line[k - 1]


def project_to_axis(space: ActionSpace, ax: Axis, p: GroupElement):
    _require_tree(space)
    return project_vertex(ax, space.vertex(p))


def distance_to_axis(ax: Axis, v) -> Fraction:
    return ax.space.vertex_distance(v, project_vertex(ax, v))


def axis_distance_formula(space: ActionSpace, g: GroupElement) -> Fraction:
    """d(o, axis) = (d(o, g o) - tau(g)) / 2 on trees."""
    return (orbit_distance(space, g) - translation_length(space, g)) / 2


# ---------------------------------------------------------------------------
# Contraction


@dataclass
class ContractionReport:
    C: Fraction
    samples: int
    excluded: int
    max_diameter: Fraction
    passed: bool
    seed: int

    def to_text(self) -> str:
        return to_kv("contraction", {
            "C": fraction_text(self.C), "samples": self.samples, "excluded": self.excluded,
            "max_diameter": fraction_text(self.max_diameter), "pass": self.passed, "seed": self.seed,
        })


def check_contracting(space: ActionSpace, ax: Axis, C, samples: int, seed: int,
                      max_len: int = 8) -> ContractionReport:
    """Sample geodesics missing N_C(axis) and measure the diameter of their projections."""
    _require_tree(space)
    C = Fraction(C)
    rng = random.Random(seed)
    tested = excluded = 0
    worst = Fraction(0)
    attempts = 0
    while tested < samples and attempts < 50 * max(samples, 1):
        attempts += 1
        x = G.random_element(space.group, max_len, rng)
        z = G.random_element(space.group, max(1, max_len // 2), rng)
        path = space.geodesic(space.vertex(x), space.vertex(G.multiply(x, z)))
        projs = [project_vertex(ax, v) for v in path]
        if any(space.vertex_distance(v, p) <= C for v, p in zip(path, projs)):
            excluded += 1
            continue
        tested += 1
        uniq = list(dict.fromkeys(projs))
        diam = max((space.vertex_distance(a, b) for a in uniq for b in uniq), default=Fraction(0))
        worst = max(worst, diam)
    return ContractionReport(C, tested, excluded, worst, worst <= C, seed)


def is_contracting_element(space: ActionSpace, g: GroupElement) -> bool:
    # on trees and lines the orbit of a hyperbolic element is a quasi-geodesic
    # within bounded distance of its axis, which is 0-contracting
    return is_hyperbolic(space, g)


# ---------------------------------------------------------------------------
# Intersections of axis neighbourhoods


@dataclass(frozen=True)
class Overlap:
    """How two axes meet: a shared segment [start, end] or a bridge of length gap."""

    kind: str  # "shared-ray", "segment" or "disjoint"
    length: Fraction
    start: object = None
    end: object = None

    def __str__(self) -> str:
        if self.kind == "segment":
            return f"segment length {fraction_text(self.length)} from {self.start} to {self.end}"
        if self.kind == "disjoint":
            return f"disjoint, gap {fraction_text(self.length)} between {self.start} and {self.end}"
        return "shared ray"


def axis_overlap(Y: Axis, Z: Axis) -> Overlap:
    space = Y.space
    if G.commutes(space.coordinate(Y.element), space.coordinate(Z.element)):
        return Overlap("shared-ray", Fraction(0))
    o = space.base_vertex()
    # a shared segment contains the projection of o to Y or to Z, and is shorter
    # than tau(Y) + tau(Z) when the elements do not commute
    reach = max(distance_to_axis(Y, o), distance_to_axis(Z, o)) + Y.tau + Z.tau + 2
    segs = []
    for ax in (Y, Z):
        far = reach + space.vertex_distance(o, ax.point(0))
        n = math.ceil(far / ax.tau) + 1
        segs.append(ax.vertices(-n, n))
    common = set(segs[1])
    shared = [v for v in segs[0] if v in common]
    if shared:
        return Overlap("segment", space.vertex_distance(shared[0], shared[-1]), shared[0], shared[-1])
    p = project_vertex(Y, Z.point(0))
    q = project_vertex(Z, p)
    return Overlap("disjoint", space.vertex_distance(p, q), p, q)


def bounded_intersection_diam(space: ActionSpace, Y: Axis, Z: Axis, r) -> Fraction | float:
    """Diameter of N_r(Y) & N_r(Z); ``UNBOUNDED`` when the axes share a ray.

    An empty intersection (disjoint axes further than 2r apart) has diameter 0.
    """
    _require_tree(space)
    r = Fraction(r)
    ov = axis_overlap(Y, Z)
    if ov.kind == "shared-ray":
        return UNBOUNDED
    if ov.kind == "segment":
        return ov.length + 2 * r
    return max(Fraction(0), 2 * r - ov.length)


@dataclass
class IndependenceCert:
    verdict: bool
    overlaps: dict = field(default_factory=dict)
    witness: str = ""

    def to_text(self) -> str:
        return to_kv("independence", {
            "verdict": self.verdict,
            "overlaps": {r: ("unbounded" if d == UNBOUNDED else fraction_text(d)) for r, d in self.overlaps.items()},
            "witness": self.witness,
        })


def weakly_independent(space: ActionSpace, g: GroupElement, h: GroupElement) -> IndependenceCert:
    """Decided algebraically (no common power); overlap diameters are recorded as evidence."""
    for x in (g, h):
        if not is_contracting_element(space, x):
            raise ContractingError(f"{x} is not contracting on {space}")
    if isinstance(space, Line):
        # every hyperbolic orbit is coarsely the whole line
        return IndependenceCert(False, {r: UNBOUNDED for r in OVERLAP_RADII}, "common axis (the line)")
    verdict = not G.commutes(space.coordinate(g), space.coordinate(h))
    Y, Z = axis(space, g), axis(space, h)
    ov = axis_overlap(Y, Z)
    overlaps = {r: bounded_intersection_diam(space, Y, Z, r) for r in OVERLAP_RADII}
    if verdict and any(d == UNBOUNDED for d in overlaps.values()):
        raise AssertionError(f"independent pair {g}, {h} with an unbounded overlap")
    return IndependenceCert(verdict, overlaps, str(ov))


def independent_on_all(spaces: Sequence[ActionSpace], g: GroupElement, h: GroupElement) -> bool:
    return all(
        is_contracting_element(s, g) and is_contracting_element(s, h) and weakly_independent(s, g, h).verdict
        for s in spaces
    )


def refine_independent_triple(space: ActionSpace, g: GroupElement, pool: Sequence[GroupElement]) -> GroupElement:
    """Lowest-index pool member weakly independent from g."""
    if len(pool) < 3:
        raise ValueError("pool needs at least 3 elements")
    for f in pool:
        if weakly_independent(space, g, f).verdict:
            return f
    raise ContractingError(f"no pool member is weakly independent from {g} on {space}")


def conjugate_family(spaces: Sequence[ActionSpace], f: GroupElement, h: GroupElement, n: int,
                     count: int) -> list[GroupElement]:
    """[(f^n h^n)^k f (f^n h^n)^-k for 0 <= k < count], verified."""
    x = G.multiply(G.power(f, n), G.power(h, n))
    out = [G.conjugate(G.power(x, k), f) for k in range(count)]
    for s in spaces:
        for y in out:
            if not is_contracting_element(s, y):
                raise ContractingError(f"{y} is not contracting on {s} (n={n})")
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                if not weakly_independent(s, out[i], out[j]).verdict:
                    raise ContractingError(f"members {i} and {j} are not independent on {s} (n={n})")
    return out
