"""Constructive engines: extension-lemma calibration, powered families, the SC
construction, simultaneous contracting / hyperbolic element searches and
extension-set ladders.

Nothing built here is trusted: every returned element or set is re-verified
by direct classification before it leaves the module.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import groups as G
from .actions import (ActionError, ActionSpace, BassSerreTree, CayleyTree, Line, action_type,
                      orbit_distance, translation_length)
from .census import enumerate_ball
from .contracting import ContractingError, conjugate_family, weakly_independent
from .groups import GroupElement, GroupSpec
from .quasimorphisms import (QmEvaluator, avoid_cosets, busemann, combine_nonvanishing, evaluate,
                             homomorphism, lineal_focal_extension_set, suite_delta)
from .reports import fraction_text, to_kv


class ConstructionError(RuntimeError):
    pass


class ExtensionFailure(ConstructionError):
    """A (space, g, triple) for which no candidate gives contracting products."""

    def __init__(self, space, g, triple, msg: str = ""):
        self.space, self.g, self.triple = space, g, list(triple)
        super().__init__(msg or f"no valid pick for g={g} among {[str(f) for f in self.triple]} on {space}")


MAX_DOUBLINGS = 8


def _hyp(space: ActionSpace, g: GroupElement) -> bool:
    return translation_length(space, g) > 0


def is_sc(spaces: Sequence[ActionSpace], g: GroupElement) -> bool:
    return all(_hyp(s, g) for s in spaces)


def _dist(space: ActionSpace, g: GroupElement) -> Fraction:
    return orbit_distance(space, g)


def _power_dist(space: ActionSpace, g: GroupElement, m: int) -> Fraction:
    # on trees d(o, g^m o) = m tau + (d(o, g o) - tau) for hyperbolic g
    tau = translation_length(space, g)
    if tau == 0:
        return _dist(space, G.power(g, m))
    return m * tau + (_dist(space, g) - tau)


def _pmap(fn: Callable, items: Sequence, threads: int = 1) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(fn, items))


def _independent_fast(spaces: Sequence[ActionSpace], g: GroupElement, h: GroupElement) -> bool:
    for s in spaces:
        if isinstance(s, Line) or not (_hyp(s, g) and _hyp(s, h)):
            return False
        if G.commutes(s.coordinate(g), s.coordinate(h)):
            return False
    return True


# ---------------------------------------------------------------------------
# Extension lemma


def extension_pick(space: ActionSpace, g: GroupElement, triple: Sequence[GroupElement]) -> GroupElement:
    """Lowest-index f in the triple with f g and g f both contracting."""
    for f in triple:
        if _hyp(space, G.multiply(f, g)) and _hyp(space, G.multiply(g, f)):
            return f
    raise ExtensionFailure(space, g, triple)


@dataclass
class CalibrationResult:
    D: Fraction
    spaces: list
    trials: int
    failures: list = field(default_factory=list)
    seed: int = 0

    def to_text(self) -> str:
        return to_kv("calibration", {
            "D": fraction_text(self.D), "trials": self.trials, "seed": self.seed,
            "failures": [f"D={fraction_text(D)} space={s} g={g} triple={'|'.join(map(str, t))}"
                         for D, s, g, t in self.failures] or "none",
        })


def _random_far(space: ActionSpace, D: Fraction, rng: random.Random, max_len: int = 10) -> GroupElement:
    for _ in range(1000):
        g = G.random_element(space.group, max_len, rng)
        if _dist(space, g) > D:
            return g
    raise ConstructionError(f"no random element with orbit distance > {D} on {space}")


def _min_power(space: ActionSpace, f: GroupElement, bound: Fraction) -> int:
    m = 1
    while not _power_dist(space, f, m) > bound:
        m += 1
    return m


def calibrate_extension_constant(spaces: Sequence[ActionSpace], pool: Sequence[GroupElement], budget: int,
                                 seed: int, max_doublings: int = MAX_DOUBLINGS) -> CalibrationResult:
    """Smallest D in 1, 2, 4, ... for which ``budget`` random trials find no counterexample."""
    if len(pool) < 3:
        raise ValueError("pool needs at least 3 elements")
    for s in spaces:
        for i, f in enumerate(pool):
            if not _hyp(s, f):
                raise ContractingError(f"pool element {f} is not contracting on {s}")
            for h in pool[i + 1:]:
                if not _independent_fast([s], f, h):
                    raise ContractingError(f"pool elements {f}, {h} are not independent on {s}")
    rng = random.Random(seed)
    D = Fraction(1)
    failures = []
    total = 0
    for _ in range(max_doublings + 1):
        ok = True
        for _ in range(budget):
            total += 1
            space = spaces[rng.randrange(len(spaces))]
            idx = sorted(rng.sample(range(len(pool)), 3))
            triple = [G.power(pool[i], _min_power(space, pool[i], D) + rng.randint(0, 2)) for i in idx]
            g = _random_far(space, D, rng)
            try:
                extension_pick(space, g, triple)
            except ExtensionFailure:
                failures.append((D, space, g, triple))
                ok = False
                break
        if ok:
            return CalibrationResult(D, list(spaces), total, failures, seed)
        D *= 2
    raise ConstructionError(f"calibration did not stabilize after {max_doublings} doublings")


# ---------------------------------------------------------------------------
# Powered families


@dataclass
class PoweredFamily:
    base: list
    exponents: list
    elements: list
    spaces: list
    D: Fraction
    floor: dict = field(default_factory=dict)
    validated: bool = False

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def distances(self, k: int) -> list:
        return [_dist(self.spaces[k], f) for f in self.elements]

    def recheck(self) -> bool:
        """The chain d_i - 2(N-1-i)D strictly decreasing, last > 3D, every d_i > floor_k."""
        N = len(self.elements)
        for k, space in enumerate(self.spaces):
            d = self.distances(k)
            shifted = [d[i] - 2 * (N - 1 - i) * self.D for i in range(N)]
            if any(not shifted[i] > shifted[i + 1] for i in range(N - 1)):
                return False
            if not d[-1] > 3 * self.D:
                return False
            if k in self.floor and not min(d) > self.floor[k]:
                return False
        return True

    def subfamily(self, idx: Sequence[int]) -> "PoweredFamily":
        sub = PoweredFamily([self.base[i] for i in idx], [self.exponents[i] for i in idx],
                            [self.elements[i] for i in idx], self.spaces, self.D, dict(self.floor))
        sub.validated = sub.recheck()
        return sub


def power_up(spaces: Sequence[ActionSpace], elements: Sequence[GroupElement], D,
             floor: dict | None = None) -> PoweredFamily:
    """Smallest exponents, chosen from the last element backwards, making the chain hold exactly.

    ``floor`` maps a space index to a value every powered distance must exceed.
    """
    D = Fraction(D)
    floor = dict(floor or {})
    for s in spaces:
        for f in elements:
            if not _hyp(s, f):
                raise ContractingError(f"{f} is elliptic on {s}; a distance bound is required there")
    N = len(elements)
    exps = [0] * N
    prev = None
    for i in range(N - 1, -1, -1):
        f = elements[i]

        def good(m: int) -> bool:
            for k, s in enumerate(spaces):
                d = _power_dist(s, f, m)
                if prev is None and not d > 3 * D:
                    return False
                if prev is not None and not d > prev[k] + 2 * D:
                    return False
                if k in floor and not d > floor[k]:
                    return False
            return True

        m = 1
        while not good(m):
            m += 1
        exps[i] = m
        prev = [_power_dist(s, f, m) for s in spaces]
    fam = PoweredFamily(list(elements), exps, [G.power(f, m) for f, m in zip(elements, exps)],
                        list(spaces), D, floor)
    fam.validated = fam.recheck()
    if not fam.validated:
        raise AssertionError("powered family fails its own inequality recheck")
    return fam


# ---------------------------------------------------------------------------
# SC construction


@dataclass(frozen=True)
class SCProduct:
    h_index: int
    f_index: int
    product: GroupElement


def sc_construction(spaces: Sequence[ActionSpace], h_list: Sequence[GroupElement], f_pool,
                    order: str = "fh", D=None) -> list[SCProduct]:
    """Products f h (or h f) contracting on every space, for every h and all but 2 l pool members.

    Per h and per space the pool is swept: a member fails when f h or h f is
    not contracting there. Any three failures on one space would be a triple
    defeating the extension lemma, so the sweep stops with that witness.
    """
    pool = list(f_pool.elements if isinstance(f_pool, PoweredFamily) else f_pool)
    if D is None:
        D = f_pool.D if isinstance(f_pool, PoweredFamily) else Fraction(0)
    if not len(pool) > 2 * len(spaces):
        raise ValueError(f"pool of {len(pool)} is too small for {len(spaces)} spaces")
    out = []
    for j, h in enumerate(h_list):
        for s in spaces:
            if not _dist(s, h) > D:
                raise ConstructionError(f"h={h} has orbit distance <= D={D} on {s}")
        bad = set()
        for s in spaces:
            failed = [i for i, f in enumerate(pool)
                      if not (_hyp(s, G.multiply(f, h)) and _hyp(s, G.multiply(h, f)))]
            if len(failed) > 2:
                raise ExtensionFailure(s, h, [pool[i] for i in failed[:3]])
            bad.update(failed)
        for i, f in enumerate(pool):
            if i in bad:
                continue
            p = G.multiply(f, h) if order == "fh" else G.multiply(h, f)
            if not is_sc(spaces, p):
                raise AssertionError(f"product {p} escaped the sweep but is not contracting")
            out.append(SCProduct(j, i, p))
        if sum(1 for x in out if x.h_index == j) < len(pool) - 2 * len(spaces):
            raise AssertionError("sweep returned fewer products than the pool bound")
    return out


# ---------------------------------------------------------------------------
# Seeds


def _classes_of_length(spec: GroupSpec, L: int, chosen: list) -> list[GroupElement]:
    """Cyclically reduced elements of word length L, greedily independent of ``chosen`` and each other."""
    space = CayleyTree(spec) if isinstance(spec, G.Free) else BassSerreTree(spec)
    out: list[GroupElement] = []
    for g in enumerate_ball(spec, L):
        if G.word_length(g) != L or not G.is_cyclically_reduced(g) or translation_length(space, g) == 0:
            continue
        if all(not G.commutes(g, h) for h in chosen + out):
            out.append(g)
    return out


def _matched_seeds(group, factors: list, count: int, max_radius: int) -> list[GroupElement]:
    """Seeds whose acted-on coordinates are cyclically reduced of one common length.

    Then the orbit distance of every power is the same on each space, so a
    distance chain imposed on all spaces at once grows linearly.
    """
    chosen = {p: [] for p in factors}
    for L in range(1, max_radius + 1):
        fresh = {p: _classes_of_length(group.factors[p], L, chosen[p]) for p in factors}
        k = min(len(v) for v in fresh.values())
        for p in factors:
            chosen[p].extend(fresh[p][:k])
        if len(chosen[factors[0]]) >= count:
            break
    n = len(chosen[factors[0]])
    if n < count:
        raise ConstructionError(f"only {n} matched independent seeds within radius {max_radius}")
    out = []
    for i in range(count):
        coords = [chosen[p][i] if p in chosen else G.identity(f) for p, f in enumerate(group.factors)]
        out.append(GroupElement(group, tuple(coords)))
    return out


def seed_family(spaces: Sequence[ActionSpace], count: int, start_radius: int = 3,
                max_radius: int = 10) -> list[GroupElement]:
    """Greedy pairwise-independent contracting elements in length-lex order.

    For one space, or several trees on distinct factors of a direct product,
    seeds are built coordinatewise from length-matched classes; otherwise the
    ball of the whole group is scanned, starting at radius 3 and growing
    until ``count`` seeds are found.
    """
    group = spaces[0].group
    factors = [getattr(s, "factor", None) for s in spaces]
    if isinstance(group, G.DirectProduct) and None not in factors and len(set(factors)) == len(factors) \
            and all(s.is_tree for s in spaces):
        if len(factors) > 1:
            return _matched_seeds(group, factors, count, max_radius)
    chosen: list[GroupElement] = []
    seen = set()
    for r in range(start_radius, max_radius + 1):
        for g in enumerate_ball(group, r):
            if g in seen:
                continue
            seen.add(g)
            if not is_sc(spaces, g):
                continue
            if all(_independent_fast(spaces, g, h) for h in chosen):
                chosen.append(g)
                if len(chosen) == count:
                    return chosen
    raise ConstructionError(f"only {len(chosen)} independent seeds within radius {max_radius}")


# ---------------------------------------------------------------------------
# Simultaneously contracting elements


def pigeonhole_identities(s: int, l: int) -> dict:
    """The four counting inequalities of the case analysis, in exact integers."""
    vals = {
        "4s^2-4sl": 4 * s * s - 4 * s * l,
        "4s^2-(8l-4)s": 4 * s * s - (8 * l - 4) * s,
        "2s^2-(4l-2)s": 2 * s * s - (4 * l - 2) * s,
        "2s^2-(2l+2)s": 2 * s * s - (2 * l + 2) * s,
    }
    for k, v in vals.items():
        if not v > 0:
            raise AssertionError(f"pigeonhole count {k} = {v} is not positive for s={s}, l={l}")
    return vals


@dataclass
class SCCertificate:
    element: GroupElement
    case: str
    D: Fraction
    s: int
    spaces: list
    translation_lengths: list
    counts: dict = field(default_factory=dict)
    mapping: dict = field(default_factory=dict)
    exponents: dict = field(default_factory=dict)
    identities: dict = field(default_factory=dict)
    candidates_tried: int = 0

    def recheck(self) -> bool:
        return self.translation_lengths == [translation_length(s, self.element) for s in self.spaces] \
            and all(t > 0 for t in self.translation_lengths)

    def to_text(self) -> str:
        return to_kv("simul-contracting", {
            "element": self.element, "case": self.case, "D": fraction_text(self.D), "s": self.s,
            "tau": [f"{s}:{fraction_text(t)}" for s, t in zip(self.spaces, self.translation_lengths)],
            "counts": self.counts or "none", "mapping": self.mapping or "none",
            "exponents": self.exponents or "none", "identities": self.identities or "none",
            "candidates_tried": self.candidates_tried, "verified": self.recheck(),
        })


def _split(items: Sequence, pred) -> tuple[list, str]:
    """First 2s... members of the preferred class: '>' if large enough, else '<='."""
    big = [i for i, x in enumerate(items) if pred(x)]
    small = [i for i, x in enumerate(items) if not pred(x)]
    return big, small


def _pick_class(big: list, small: list, need: int) -> tuple[list, str]:
    if len(big) >= need:
        return big[:need], ">"
    if len(small) >= need:
        return small[:need], "<"
    raise AssertionError("pigeonhole: neither class is large enough")


def _pairs(run: list[SCProduct], key: Callable) -> dict:
    return {key(p): p.product for p in run}


def _first_verified(spaces, cands: dict, bound: int, label: str):
    if len(cands) < bound:
        raise AssertionError(f"{label}: {len(cands)} candidates, fewer than the count bound {bound}")
    tried = 0
    for key, g in sorted(cands.items(), key=lambda kv: (G.word_length(kv[1]), kv[0])):
        tried += 1
        if is_sc(spaces, g):
            return g, tried
    raise ConstructionError(f"{label}: no candidate verified on all spaces")


def _intersect(a: dict, b: dict) -> dict:
    out = {}
    for k in a.keys() & b.keys():
        if a[k] != b[k]:
            raise AssertionError(f"runs disagree on candidate {k}")
        out[k] = a[k]
    return out


def _run_cases(spaces, F: PoweredFamily, T: PoweredFamily, D: Fraction, s: int):
    l = len(spaces)
    X1, Xl, mid = spaces[0], spaces[-1], spaces[1:-1]
    # pigeonhole on X_l for the f's and on X_1 for the g's
    fb, fs = _split(F.elements, lambda f: _dist(Xl, f) > D)
    gb, gs = _split(T.elements, lambda g: _dist(X1, g) > D)
    fi, fcls = _pick_class(fb, fs, 2 * s)
    gi, gcls = _pick_class(gb, gs, 2 * s)
    counts = {"f>": len(fb), "f<=": len(fs), "g>": len(gb), "g<=": len(gs)}
    mapping = {"f": fi, "g": gi}
    f = F.subfamily(fi)
    g = T.subfamily(gi)
    if not (f.validated and g.validated):
        raise AssertionError("re-indexed families lost the distance chain")
    f1, g1 = f[0], g[0]
    M = G.multiply
    case = f"f{fcls}g{gcls}"
    n = 2 * s

    if case == "f>g>":
        A = sc_construction(spaces[:-1], g.elements, f, "fh", D)
        B = sc_construction([Xl], f.elements, g, "hf", D)
        cand = _intersect(_pairs(A, lambda p: (p.f_index, p.h_index)), _pairs(B, lambda p: (p.h_index, p.f_index)))
        bound = n * (n - 2 * (l - 1)) + n * (n - 2) - n * n
        assert bound == 4 * s * s - 4 * s * l
        return case, cand, bound, counts, mapping

    if case == "f<g<":
        hA = [M(M(f1, g1), gj) for gj in g.elements]
        hB = [M(M(fi_, f1), g1) for fi_ in f.elements]
        A = sc_construction([X1], hA, f, "fh", D)
        B = sc_construction(spaces[1:], hB, g, "hf", D)
        cand = _intersect(_pairs(A, lambda p: (p.f_index, p.h_index)), _pairs(B, lambda p: (p.h_index, p.f_index)))
        bound = n * (n - 2) + n * (n - 2 * (l - 1)) - n * n
        assert bound == 4 * s * s - 4 * s * l
        return case, cand, bound, counts, mapping

    if case.startswith("f>"):
        # inner pigeonhole on d(o_l, f_1 f_i)
        ib, is_ = _split(f.elements, lambda x: _dist(Xl, M(f1, x)) > D)
        I, icls = _pick_class(ib, is_, s)
        mapping["I"] = I
        fI = f.subfamily(I)
        if icls == ">":
            case = "f>g<(1)"
            hA = [M(gj, f1) for gj in g.elements]
            hB = [M(f1, f.elements[i]) for i in I]
            A = sc_construction(spaces[:-1], hA, fI, "hf", D)
            B = sc_construction([Xl], hB, g, "fh", D)
            bound = n * (s - 2 * (l - 1)) + s * (n - 2) - n * s
            assert bound == 2 * s * s - (4 * l - 2) * s
        else:
            case = "f>g<(2)"
            hA = [M(M(gj, g1), f1) for gj in g.elements]
            hB = [M(M(g1, f1), f.elements[i]) for i in I]
            A = sc_construction([X1], hA, fI, "hf", D)
            B = sc_construction(spaces[1:], hB, g, "fh", D)
            bound = n * (s - 2) + s * (n - 2 * (l - 1)) - n * s
            assert bound == 2 * s * s - (2 * l + 2) * s
        # keys (position in I, j)
        cand = _intersect(_pairs(A, lambda p: (p.f_index, p.h_index)), _pairs(B, lambda p: (p.h_index, p.f_index)))
        return case, cand, bound, counts, mapping

    # f<g>: inner pigeonhole on d(o_1, g_j g_1)
    jb, js = _split(g.elements, lambda x: _dist(X1, M(x, g1)) > D)
    J, jcls = _pick_class(jb, js, s)
    mapping["J"] = J
    gJ = g.subfamily(J)
    if jcls == ">":
        case = "f<g>(1)"
        hA = [M(g.elements[j], g1) for j in J]
        hB = [M(g1, fi_) for fi_ in f.elements]
    else:
        case = "f<g>(2)"
        hA = [M(M(g.elements[j], g1), f1) for j in J]
        hB = [M(M(g1, f1), fi_) for fi_ in f.elements]
    A = sc_construction([X1], hA, f, "hf", D)
    B = sc_construction(spaces[1:], hB, gJ, "fh", D)
    bound = s * (n - 2) + n * (s - 2 * (l - 1)) - n * s
    assert bound == 2 * s * s - (4 * l - 2) * s
    # keys (i, position in J)
    cand = _intersect(_pairs(A, lambda p: (p.f_index, p.h_index)), _pairs(B, lambda p: (p.h_index, p.f_index)))
    return case, cand, bound, counts, mapping


def find_simul_contracting(spaces: Sequence[ActionSpace], seedF: Sequence[GroupElement] | None = None,
                           seedT: Sequence[GroupElement] | None = None, D=None, s: int | None = None,
                           seed: int = 0, calibration_budget: int = 200) -> SCCertificate:
    spaces = list(spaces)
    l = len(spaces)
    if l == 0:
        raise ValueError("need at least one space")
    if l == 1:
        for r in range(1, 12):
            for g in enumerate_ball(spaces[0].group, r):
                if _hyp(spaces[0], g):
                    cert = SCCertificate(g, "base", Fraction(D or 0), 0, spaces, [translation_length(spaces[0], g)])
                    return cert
        raise ConstructionError(f"no contracting element found on {spaces[0]}")
    s = s or 2 * l + 2
    if not s > 2 * l + 1:
        raise ValueError(f"s={s} must exceed 2l+1={2 * l + 1}")
    ident = pigeonhole_identities(s, l)
    ident["actual f<g< count 4s^2-4sl"] = 4 * s * s - 4 * s * l
    seedF = list(seedF) if seedF is not None else seed_family(spaces[:-1], 4 * s)
    seedT = list(seedT) if seedT is not None else seed_family(spaces[1:], 4 * s)
    if len(seedF) < 4 * s or len(seedT) < 4 * s:
        raise ValueError(f"seed families need {4 * s} elements")
    seedF, seedT = seedF[: 4 * s], seedT[: 4 * s]
    for fam, sub in ((seedF, spaces[:-1]), (seedT, spaces[1:])):
        for i, x in enumerate(fam):
            if not all(_independent_fast(sub, x, y) for y in fam[i + 1:]):
                raise ContractingError(f"seed {x} is not independent from the rest of its family")
    if D is None:
        D = Fraction(1)
        for k, sp in enumerate(spaces):
            pool = seedF if k < l - 1 else seedT
            D = max(D, calibrate_extension_constant([sp], pool[:6], calibration_budget, seed + k).D)
    D = Fraction(D)
    last_err = None
    for _ in range(MAX_DOUBLINGS):
        try:
            F = power_up(spaces[:-1], seedF, D)
            f1 = F[0]
            floor = {k - 1: 2 * _dist(spaces[k], f1) + 2 * D for k in range(1, l - 1)}
            T = power_up(spaces[1:], seedT, D, floor)
            case, cand, bound, counts, mapping = _run_cases(spaces, F, T, D, s)
            g, tried = _first_verified(spaces, cand, bound, case)
            counts["candidates"] = len(cand)
            counts["bound"] = bound
            cert = SCCertificate(g, case, D, s, spaces, [translation_length(x, g) for x in spaces], counts,
                                 mapping, {"F": F.exponents, "T": T.exponents}, ident, tried)
            if not cert.recheck():
                raise AssertionError("certificate failed its recheck")
            return cert
        except ExtensionFailure as e:
            last_err = e
            D *= 2
    raise ConstructionError(f"construction failed after doubling D: {last_err}")


def independent_sc_family(spaces: Sequence[ActionSpace], count: int, max_radius: int = 6,
                          base: GroupElement | None = None) -> list[GroupElement]:
    """``count`` pairwise weakly independent elements, each contracting on every space.

    One space: the conjugate family of a contracting element with the smallest
    working exponent. Several spaces: conjugates x f x^-1 of a simultaneously
    contracting f by short x, kept greedily.
    """
    spaces = list(spaces)
    f = base if base is not None else find_simul_contracting(spaces).element
    if count == 1:
        return [f]
    group = spaces[0].group
    if len(spaces) == 1:
        partner = next(h for r in range(1, max_radius + 1) for h in enumerate_ball(group, r)
                       if _independent_fast(spaces, f, h))
        for n in range(1, 9):
            try:
                return conjugate_family(spaces, f, partner, n, count)
            except ContractingError:
                continue
        raise ConstructionError("conjugate family did not verify for n <= 8")
    chosen = [f]
    for r in range(1, max_radius + 1):
        for x in enumerate_ball(group, r):
            y = G.conjugate(x, f)
            if y in chosen:
                continue
            if all(_independent_fast(spaces, y, z) for z in chosen):
                chosen.append(y)
                if len(chosen) == count:
                    for i in range(count):
                        for j in range(i + 1, count):
                            for sp in spaces:
                                if not weakly_independent(sp, chosen[i], chosen[j]).verdict:
                                    raise AssertionError("greedy family failed pairwise certification")
                    return chosen
    raise ConstructionError(f"only {len(chosen)} independent conjugates within radius {max_radius}")


# ---------------------------------------------------------------------------
# Extension sets


@dataclass
class ExtensionSet:
    F: list
    ladder: list
    base: list
    M: int
    target: str
    D: Fraction
    spaces: list
    qms: list = field(default_factory=list)
    L: list = field(default_factory=list)
    inequalities: list = field(default_factory=list)
    verify_radius: int = 0
    checked: int = 0
    claim_checked: int = 0
    passed: bool = False
    power_window: int = 1

    def contains_target(self, g: GroupElement) -> bool:
        return is_sc(self.spaces, g) and all(evaluate(q, g) != 0 for q in self.qms)

    def recheck_ladder(self) -> bool:
        j = self.ladder
        f1 = self.base[0]
        return all(_dist(sp, G.power(f1, j[r])) > 2 * self.D + j[r - 1] * Lk
                   for sp, Lk in zip(self.spaces, self.L) for r in range(1, len(j)))

    def to_text(self) -> str:
        return to_kv("extension-set", {
            "target": self.target, "size": len(self.F), "M": self.M, "D": fraction_text(self.D),
            "ladder": self.ladder, "L": [fraction_text(x) for x in self.L],
            "power_window": self.power_window,
            "inequalities": self.inequalities, "verify_radius": self.verify_radius,
            "checked": self.checked, "claim_checked": self.claim_checked, "pass": self.passed,
            "F": [str(f) for f in self.F],
        })


def _ladder(spaces, f1: GroupElement, rungs: int, D: Fraction):
    L = [_dist(sp, f1) for sp in spaces]
    j = [0]
    lines = []
    for r in range(1, rungs + 1):
        x = j[-1] + 1
        while not all(_power_dist(sp, f1, x) > 2 * D + j[-1] * Lk for sp, Lk in zip(spaces, L)):
            x += 1
        for sp, Lk in zip(spaces, L):
            d = _dist(sp, G.power(f1, x))
            if not d > 2 * D + j[-1] * Lk:
                raise AssertionError("ladder gap fails on exact recheck")
            lines.append(f"r={r} {sp}: d={fraction_text(d)} > 2D+j{r - 1}*L={fraction_text(2 * D + j[-1] * Lk)}")
        j.append(x)
    return j, L, lines


def _to_2D(spaces, fam: Sequence[GroupElement], D: Fraction, qms=(), delta=Fraction(0)) -> list:
    out = []
    for h in fam:
        n = 1
        while not (all(_power_dist(sp, h, n) >= 2 * D for sp in spaces)
                   and all(abs(n * evaluate(q, h)) > 2 * delta for q in qms)):
            n += 1
        out.append(G.power(h, n))
    return out


def _verify_extension(ext: ExtensionSet, radius: int, claim_window: Callable | None, threads: int = 1):
    group = ext.spaces[0].group
    f1 = ext.base[0]
    rungs = [G.power(f1, j) for j in ext.ladder]
    ball = list(enumerate_ball(group, radius))

    def check(g):
        if not any(all(_dist(sp, G.multiply(g, x)) > ext.D for sp in ext.spaces) for x in rungs):
            return ("claim", g)
        if claim_window is not None:
            w = claim_window(g)
            if w is not None:
                return ("window", g)
        for f in ext.F:
            if ext.contains_target(G.multiply(g, f)):
                return None
        return ("extension", g)

    for res in _pmap(check, ball, threads):
        if res is not None:
            return res, len(ball)
    return None, len(ball)


def sc_extension_set(spaces: Sequence[ActionSpace], verify_radius: int, s: int | None = None, D=None,
                     seed: int = 0, threads: int = 1) -> ExtensionSet:
    """F = union over r of f_1^{j_r} F', with F' an independent family powered to distance >= 2D."""
    spaces = list(spaces)
    l = len(spaces)
    s = s or 2 * l + 1
    fam = independent_sc_family(spaces, s)
    if D is None:
        D = Fraction(1)
        for k, sp in enumerate(spaces):
            D = max(D, calibrate_extension_constant([sp], fam, 200, seed + k).D)
    D = Fraction(D)
    witness = None
    for _ in range(MAX_DOUBLINGS):
        base = _to_2D(spaces, fam, D)
        j, L, lines = _ladder(spaces, base[0], l, D)
        F = [G.multiply(G.power(base[0], jr), f) for jr in j for f in base]
        ext = ExtensionSet(F, j, base, max(G.word_length(f) for f in F), "SC", D, spaces, [], L, lines,
                           verify_radius)
        witness, checked = _verify_extension(ext, verify_radius, None, threads)
        ext.checked = ext.claim_checked = checked
        if witness is None:
            ext.passed = ext.recheck_ladder()
            return ext
        D *= 2
    raise ExtensionFailure(spaces, witness[1], [], f"extension property fails ({witness[0]}) at g={witness[1]}")


# ---------------------------------------------------------------------------
# Mixed actions


def split_actions(spaces: Sequence[ActionSpace], qms: Sequence[QmEvaluator] = ()):
    """(general-type tree spaces, evaluators) with lineal actions turned into homomorphisms."""
    general, evals = [], list(qms)
    for sp in spaces:
        t = action_type(sp)
        if t.declared == "elliptic":
            raise ActionError(f"{sp} is elliptic")
        if t.declared == "lineal" and not t.orientable:
            raise ActionError(f"{sp} is non-orientable lineal; pass to an index-2 subgroup first")
        if t.declared == "general":
            general.append(sp)
        elif isinstance(sp, Line):
            evals.append(busemann(sp))
        elif isinstance(sp, CayleyTree):
            # rank-1 tree: hyperbolic exactly when the exponent sum of the factor is nonzero
            weights = [0] * G.num_generators(sp.group)
            weights[G.generator_names(sp.group).index(_first_name(sp))] = 1
            evals.append(homomorphism(sp.group, weights))
        else:
            raise ActionError(f"unsupported lineal action {sp}")
    return general, evals


def _first_name(sp: CayleyTree) -> str:
    if sp.factor is None:
        return G.generator_names(sp.group)[0]
    offset = sum(G.num_generators(f) for f in sp.group.factors[: sp.factor])
    return G.generator_names(sp.group)[offset]


@dataclass
class SHCertificate:
    element: GroupElement
    method: str
    spaces: list
    qms: list
    translation_lengths: list
    values: list
    notes: dict = field(default_factory=dict)

    def recheck(self) -> bool:
        return (self.translation_lengths == [translation_length(s, self.element) for s in self.spaces]
                and all(t > 0 for t in self.translation_lengths)
                and self.values == [evaluate(q, self.element) for q in self.qms]
                and all(v != 0 for v in self.values))

    def to_text(self) -> str:
        return to_kv("simul-hyperbolic", {
            "element": self.element, "method": self.method,
            "tau": [f"{s}:{fraction_text(t)}" for s, t in zip(self.spaces, self.translation_lengths)] or "none",
            "values": [f"{q}:{fraction_text(v)}" for q, v in zip(self.qms, self.values)] or "none",
            "notes": self.notes or "none", "verified": self.recheck(),
        })


def _sh_cert(g, method, spaces, qms, notes) -> SHCertificate:
    cert = SHCertificate(g, method, list(spaces), list(qms), [translation_length(s, g) for s in spaces],
                         [evaluate(q, g) for q in qms], notes)
    if not cert.recheck():
        raise ConstructionError(f"{method}: {g} fails direct verification")
    return cert


def find_simul_hyperbolic(spaces: Sequence[ActionSpace], qms: Sequence[QmEvaluator] = (), budget: int = 6,
                          verify_radius: int = 2, seed: int = 0) -> SHCertificate:
    """Hyperbolic on every space and nonzero on every evaluator.

    ``budget`` bounds the ball radius searched for evaluator-nonvanishing
    elements.
    """
    spaces = list(spaces)
    general, evals = split_actions(spaces, qms)
    if not general:
        g = combine_nonvanishing(evals, budget)
        return _sh_cert(g, "lineal-focal", spaces, qms, {"evaluators": len(evals)})
    ext = sc_extension_set(general, verify_radius, seed=seed)
    if not evals:
        h = G.identity(general[0].group)
        f = next(f for f in ext.F if is_sc(general, f))
        return _sh_cert(f, "extension-set", spaces, qms, {"M": ext.M, "D": fraction_text(ext.D)})
    h0 = combine_nonvanishing(evals, budget)
    h = avoid_cosets(evals, h0, [G.inverse(f) for f in ext.F])
    for f in ext.F:
        g = G.multiply(h, f)
        if is_sc(general, g) and all(evaluate(q, g) != 0 for q in evals):
            return _sh_cert(g, "coset-avoidance", spaces, qms,
                            {"h": str(h), "f": str(f), "M": ext.M, "D": fraction_text(ext.D)})
    raise ConstructionError(f"no f in the extension set makes {h} f simultaneously hyperbolic")


def sh_extension_set(spaces: Sequence[ActionSpace], qms: Sequence[QmEvaluator], verify_radius: int,
                     s: int | None = None, D=None, seed: int = 0, threads: int = 1) -> ExtensionSet:
    """Extension set for SH(G): powers f_i^p (1 <= p <= number of evaluators + 1) of an SH family, laddered."""
    spaces = list(spaces)
    general, evals = split_actions(spaces, qms)
    if not evals:
        ext = sc_extension_set(general, verify_radius, s=s, D=D, seed=seed, threads=threads)
        ext.target = "SH"
        return ext
    if not general:
        F = lineal_focal_extension_set(evals, 6)
        ext = ExtensionSet(F, [0], F, max(G.word_length(f) for f in F), "SH", Fraction(0), [], evals,
                           verify_radius=verify_radius, power_window=len(F))
        bad, checked = _verify_extension(ext, verify_radius, None, threads)
        ext.checked = checked
        ext.passed = bad is None
        if bad:
            raise ExtensionFailure(None, bad[1], [], f"extension property fails at g={bad[1]}")
        return ext
    m = len(general)
    window = len(evals) + 1
    s = s or 2 * m + 1
    h0 = find_simul_hyperbolic(spaces, qms, seed=seed).element
    fam = independent_sc_family(general, s, base=h0)
    delta = suite_delta(evals)
    D = Fraction(D or 1)
    witness = None
    for _ in range(MAX_DOUBLINGS):
        base = _to_2D(general, fam, D, evals, delta)
        Fp = [G.power(f, p) for p in range(1, window + 1) for f in base]
        j, L, lines = _ladder(general, base[0], m, D)
        F = [G.multiply(G.power(base[0], jr), f) for jr in j for f in Fp]
        ext = ExtensionSet(F, j, base, max(G.word_length(f) for f in F), "SH", D, general, evals, L, lines,
                           verify_radius, power_window=window)

        def window_claim(g, base=base):
            for f in base:
                if not any(all(evaluate(q, G.multiply(g, G.power(f, p))) != 0 for q in evals)
                           for p in range(1, window + 1)):
                    return f
            return None

        witness, checked = _verify_extension(ext, verify_radius, window_claim, threads)
        ext.checked = ext.claim_checked = checked
        if witness is None:
            ext.passed = ext.recheck_ladder()
            return ext
        D *= 2
    raise ExtensionFailure(general, witness[1], [], f"extension property fails ({witness[0]}) at g={witness[1]}")
