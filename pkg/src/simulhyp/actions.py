"""Isometric actions with exact distances: Cayley trees, Bass-Serre trees and lines.

All supported spaces are 0-hyperbolic. Distances are ``Fraction`` values;
Bass-Serre trees use edges of length 1/2 so that the translation length of
a cyclically reduced element equals its syllable count.

Tree spaces expose a vertex model (``base_vertex``, ``act``, ``geodesic``,
``vertex_distance``) that the contracting-geometry code uses to materialize
geodesics, axes and projections.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import groups as G
from .groups import DirectProduct, Free, FreeProduct, GroupElement, GroupSpec


class ActionError(ValueError):
    pass


class Kind(enum.Enum):
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class ActionType:
    """Declared type of an action: elliptic, lineal, focal or general type."""

    declared: str
    orientable: bool = True

    def __str__(self) -> str:
        if self.declared == "lineal":
            return f"lineal(orientable={str(self.orientable).lower()})"
        return self.declared


ELLIPTIC_ACTION = ActionType("elliptic")
GENERAL_TYPE = ActionType("general")
FOCAL = ActionType("focal")


@dataclass(frozen=True)
class ClassificationResult:
    kind: Kind
    translation_length: Fraction
    orbit_displacement: Fraction

    @property
    def hyperbolic(self) -> bool:
        return self.kind is Kind.HYPERBOLIC


def _factor_spec(group: GroupSpec, factor: int | None) -> GroupSpec:
    if factor is None:
        return group
    if not isinstance(group, DirectProduct):
        raise ActionError(f"factor={factor + 1} given but {group} is not a direct product")
    if not 0 <= factor < len(group.factors):
        raise ActionError(f"factor {factor + 1} out of range for {group}")
    return group.factors[factor]


@dataclass(frozen=True)
class ActionSpace:
    group: GroupSpec
    delta: Fraction = field(default=Fraction(0), init=False)

    def check(self, g: GroupElement) -> None:
        if g.spec != self.group:
            raise G.SpecMismatch(f"element of {g.spec} does not act on a space for {self.group}")

    is_tree = False


@dataclass(frozen=True)
class _TreeSpace(ActionSpace):
    factor: int | None = None

    is_tree = True

    @property
    def acting_spec(self) -> GroupSpec:
        return _factor_spec(self.group, self.factor)

    def coordinate(self, g: GroupElement) -> GroupElement:
        self.check(g)
        return g if self.factor is None else g.payload[self.factor]


@dataclass(frozen=True)
class CayleyTree(_TreeSpace):
    """Cayley tree of a free group (or of a free factor of a direct product)."""

    def __post_init__(self):
        if not isinstance(self.acting_spec, Free):
            raise ActionError(f"Cayley tree needs a free group, got {self.acting_spec}")

    def __str__(self) -> str:
        return "cayley" if self.factor is None else f"cayley(factor={self.factor + 1})"

    # vertex model: vertices are reduced words
    def base_vertex(self):
        return ()

    def vertex(self, g: GroupElement):
        return self.coordinate(g).payload

    def act(self, g: GroupElement, v):
        return G._free_mul(self.coordinate(g).payload, v)

    def _translate(self, x: tuple, v):
        return G._free_mul(x, v)

    def center(self):
        return ()

    def geodesic(self, v, w) -> list:
        k = 0
        m = min(len(v), len(w))
        while k < m and v[k] == w[k]:
            k += 1
        down = [v[:i] for i in range(len(v), k - 1, -1)]
        up = [w[:i] for i in range(k + 1, len(w) + 1)]
        return down + up

    def vertex_distance(self, v, w) -> Fraction:
        k = 0
        m = min(len(v), len(w))
        while k < m and v[k] == w[k]:
            k += 1
        return Fraction(len(v) + len(w) - 2 * k)

    edge_length = Fraction(1)


def _trim(spec: FreeProduct, syls: tuple, fac: int) -> tuple:
    return syls[:-1] if syls and syls[-1][0] == fac else syls


@dataclass(frozen=True)
class BassSerreTree(_TreeSpace):
    """Bass-Serre tree of a free product of cyclic groups.

    Vertices are ``('v', i, rep)`` for the coset rep*A_i and ``('c', g)`` for
    the trivial-stabilizer vertex g; each coset vertex rep*A_i is joined to
    the vertices rep*a, a in A_i. The basepoint is the vertex A_1.
    """

    def __post_init__(self):
        if not isinstance(self.acting_spec, FreeProduct):
            raise ActionError(f"Bass-Serre tree needs a free product, got {self.acting_spec}")

    def __str__(self) -> str:
        return "bass-serre" if self.factor is None else f"bass-serre(factor={self.factor + 1})"

    edge_length = Fraction(1, 2)

    def base_vertex(self):
        return ("v", 0, ())

    def center(self):
        return ("c", ())

    def vertex(self, g: GroupElement):
        return self.act(g, self.base_vertex())

    def act(self, g: GroupElement, v):
        spec = self.acting_spec
        x = self.coordinate(g).payload
        if v[0] == "c":
            return ("c", G._fp_mul(spec, x, v[1]))
        return ("v", v[1], _trim(spec, G._fp_mul(spec, x, v[2]), v[1]))

    def _path_from_center(self, syls: tuple) -> list:
        # center 1 -> A_{f(s1)} -> center s1 -> s1 A_{f(s2)} -> ... -> center syls
        path = [("c", ())]
        for i, (fac, _e) in enumerate(syls):
            path.append(("v", fac, syls[:i]))
            path.append(("c", syls[: i + 1]))
        return path

    def _path_from_base(self, w) -> list:
        """Geodesic from ``('c', ())`` to w."""
        if w[0] == "c":
            return self._path_from_center(w[1])
        path = self._path_from_center(w[2])
        path.append(("v", w[1], w[2]))
        return path

    def geodesic(self, v, w) -> list:
        spec = self.acting_spec
        # move v to a canonical base position by a group element x with x*base = v
        if v[0] == "c":
            x = v[1]
            start = ("c", ())
        else:
            x = v[2]
            start = ("v", v[1], ())
        xinv = G._fp_inv(spec, x)
        if w[0] == "c":
            rel = ("c", G._fp_mul(spec, xinv, w[1]))
        else:
            rel = ("v", w[1], _trim(spec, G._fp_mul(spec, xinv, w[2]), w[1]))
        path = self._path_from_base(rel)
        if start[0] == "v":
            # the coset vertex A_i is adjacent to the center 1
            path = path[1:] if len(path) >= 2 and path[1] == start else [start] + path
        return [self._translate(x, p) for p in path]

    def _translate(self, x: tuple, v):
        spec = self.acting_spec
        if v[0] == "c":
            return ("c", G._fp_mul(spec, x, v[1]))
        return ("v", v[1], _trim(spec, G._fp_mul(spec, x, v[2]), v[1]))

    def vertex_distance(self, v, w) -> Fraction:
        return (len(self.geodesic(v, w)) - 1) * self.edge_length

    def neighbors(self, v, window: int) -> list:
        """Neighbours of a vertex, with Z-factor exponents limited to |e| <= window."""
        spec = self.acting_spec
        if v[0] == "c":
            return [("v", i, _trim(spec, v[1], i)) for i in range(len(spec.orders))]
        i = v[1]
        k = spec.orders[i]
        exps = range(0, k) if k else range(-window, window + 1)
        out = []
        for e in exps:
            syl = ((i, e),) if e else ()
            out.append(("c", G._fp_mul(spec, v[2], syl)))
        return out


@dataclass(frozen=True)
class Line(ActionSpace):
    """The real line with g acting by translation through a homomorphism to Q."""

    weights: tuple = ()

    def __post_init__(self):
        n = G.num_generators(self.group)
        if len(self.weights) != n:
            raise ActionError(f"line action on {self.group} needs {n} weights, got {len(self.weights)}")
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))
        for w, k in zip(self.weights, G.generator_orders(self.group)):
            if k and w != 0:
                raise ActionError("a torsion generator must have weight 0 for a homomorphism")

    def __str__(self) -> str:
        names = G.generator_names(self.group)
        return "line(" + ",".join(f"{n}={w}" for n, w in zip(names, self.weights)) + ")"

    def value(self, g: GroupElement) -> Fraction:
        self.check(g)
        return sum((w * e for w, e in zip(self.weights, G.exponent_sums(g)) if w), Fraction(0))


# ---------------------------------------------------------------------------
# Operations


def orbit_distance(space: ActionSpace, g: GroupElement) -> Fraction:
    """d(o, g o) for the canonical basepoint o."""
    if isinstance(space, Line):
        return abs(space.value(g))
    if isinstance(space, CayleyTree):
        return Fraction(len(space.coordinate(g).payload))
    if isinstance(space, BassSerreTree):
        syls = space.coordinate(g).payload
        if syls and syls[0][0] == 0:
            syls = syls[1:]
        if syls and syls[-1][0] == 0:
            syls = syls[:-1]
        return Fraction(len(syls) + 1) if syls else Fraction(0)
    raise ActionError(f"unsupported space {space!r}")


def translation_length(space: ActionSpace, g: GroupElement) -> Fraction:
    if isinstance(space, Line):
        return abs(space.value(g))
    core = G.cyclic_reduce(space.coordinate(g)).core
    if isinstance(space, CayleyTree):
        return Fraction(len(core.payload))
    if isinstance(space, BassSerreTree):
        n = len(core.payload)
        return Fraction(n) if n >= 2 else Fraction(0)
    raise ActionError(f"unsupported space {space!r}")


_PROBE_POWERS = 32


def classify_isometry(space: ActionSpace, g: GroupElement, probe: bool = False) -> ClassificationResult:
    """Elliptic iff the translation length vanishes.

    With ``probe=True`` an elliptic verdict is sanity-checked: the orbit
    {g^n o : n <= 32} must stay within d(o, g o) of o. No parabolic
    isometries exist on the supported spaces, so a failed probe raises.
    """
    tau = translation_length(space, g)
    disp = orbit_distance(space, g)
    if tau > 0:
        return ClassificationResult(Kind.HYPERBOLIC, tau, disp)
    if probe:
        x = G.identity(space.group)
        for _ in range(_PROBE_POWERS):
            x = G.multiply(x, g)
            if orbit_distance(space, x) > disp:
                raise AssertionError(f"unbounded orbit for an element with zero translation length: {g}")
    return ClassificationResult(Kind.ELLIPTIC, tau, disp)


def is_hyperbolic(space: ActionSpace, g: GroupElement) -> bool:
    return translation_length(space, g) > 0


def is_simul_hyperbolic(spaces: Sequence[ActionSpace], g: GroupElement) -> bool:
    if not spaces:
        raise ValueError("need at least one space")
    return all(translation_length(s, g) > 0 for s in spaces)


def gromov_product(space: ActionSpace, x: GroupElement, y: GroupElement) -> Fraction:
    """(x o . y o)_o = (d(o,xo) + d(o,yo) - d(xo,yo)) / 2."""
    dxy = orbit_distance(space, G.multiply(G.inverse(x), y))
    return (orbit_distance(space, x) + orbit_distance(space, y) - dxy) / 2


def thin_triangle_check(space: ActionSpace, x: GroupElement, y: GroupElement, z: GroupElement,
                        delta=0) -> bool:
    """Every vertex of [xo, yo] lies within delta of [yo, zo] U [zo, xo]."""
    if not space.is_tree:
        raise ActionError("thin-triangle check is implemented for tree spaces")
    delta = Fraction(delta)
    px, py, pz = space.vertex(x), space.vertex(y), space.vertex(z)
    side = space.geodesic(px, py)
    others = space.geodesic(py, pz) + space.geodesic(pz, px)
    adj: dict = {}
    for path in (side, space.geodesic(py, pz), space.geodesic(pz, px)):
        for a, b in zip(path, path[1:]):
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
    targets = set(others)
    # the union of the three sides is a subtree, so BFS inside it gives true distances
    for v in side:
        if v in targets:
            continue
        dist = {v: 0}
        frontier = [v]
        found = None
        while frontier and found is None:
            nxt = []
            for a in frontier:
                for b in adj.get(a, ()):
                    if b not in dist:
                        dist[b] = dist[a] + 1
                        if b in targets:
                            found = dist[b]
                            break
                        nxt.append(b)
                if found is not None:
                    break
            frontier = nxt
        if found is None or found * space.edge_length > delta:
            return False
    return True


def action_type(space: ActionSpace) -> ActionType:
    """Declared action type, fixed by construction rules."""
    if isinstance(space, Line):
        if all(w == 0 for w in space.weights):
            return ELLIPTIC_ACTION
        return ActionType("lineal", orientable=True)
    if isinstance(space, CayleyTree):
        return GENERAL_TYPE if space.acting_spec.rank >= 2 else ActionType("lineal", orientable=True)
    if isinstance(space, BassSerreTree):
        if tuple(space.acting_spec.orders) == (2, 2):
            return ActionType("lineal", orientable=False)
        return GENERAL_TYPE
    raise ActionError(f"unsupported space {space!r}")
