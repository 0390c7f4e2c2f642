"""Exact word algebra for free groups, direct products and free products of cyclic groups.

Elements are stored in normal form:

* free group: a reduced tuple of signed generator codes (``i + 1`` for the
  i-th generator, ``-(i + 1)`` for its inverse);
* direct product: a tuple of factor elements;
* free product: a tuple of ``(factor, exponent)`` syllables, adjacent
  syllables in distinct factors, exponents reduced modulo the cyclic order.

Equality and hashing are syntactic on normal forms.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence, Union


class SpecMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# Group specifications


@dataclass(frozen=True)
class Free:
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"free group rank must be >= 1, got {self.rank}")

    def __str__(self) -> str:
        return f"free({self.rank})"


@dataclass(frozen=True)
class DirectProduct:
    factors: tuple

    def __post_init__(self):
        if len(self.factors) < 2:
            raise ValueError("a direct product needs at least 2 factors")

    def __str__(self) -> str:
        return "product(" + ",".join(str(f) for f in self.factors) + ")"


@dataclass(frozen=True)
class FreeProduct:
    """Free product of cyclic groups; an order of 0 stands for Z."""

    orders: tuple

    def __post_init__(self):
        if len(self.orders) < 2:
            raise ValueError("a free product needs at least 2 factors")
        for k in self.orders:
            if k != 0 and k < 2:
                raise ValueError(f"cyclic order must be 0 (for Z) or >= 2, got {k}")

    def __str__(self) -> str:
        parts = ["z" if k == 0 else f"z/{k}" for k in self.orders]
        return "freeprod(" + ",".join(parts) + ")"


GroupSpec = Union[Free, DirectProduct, FreeProduct]


def num_generators(spec: GroupSpec) -> int:
    if isinstance(spec, Free):
        return spec.rank
    if isinstance(spec, FreeProduct):
        return len(spec.orders)
    return sum(num_generators(f) for f in spec.factors)


_BLOCKS = ("abcdefgh", "xyzuvw", "pqrstm", "ijklno")


def generator_names(spec: GroupSpec) -> list[str]:
    """Names of the standard generators, flattened in factor order.

    A free group or free product gets ``a, b, c, ...``; inside a direct
    product the top-level factors use the blocks ``abc..``, ``xyz..``,
    ``pqr..`` so that names never collide.
    """
    if not isinstance(spec, DirectProduct):
        n = num_generators(spec)
        return list(_BLOCKS[0][:n]) if n <= len(_BLOCKS[0]) else [f"g{i + 1}" for i in range(n)]
    names: list[str] = []
    for p, f in enumerate(spec.factors):
        n = num_generators(f)
        if p < len(_BLOCKS) and not isinstance(f, DirectProduct) and n <= len(_BLOCKS[p]):
            names.extend(_BLOCKS[p][:n])
        else:
            names.extend(f"g{len(names) + i + 1}" for i in range(n))
    return names


def generator_orders(spec: GroupSpec) -> list[int]:
    """Order of each flattened generator (0 for infinite order)."""
    if isinstance(spec, Free):
        return [0] * spec.rank
    if isinstance(spec, FreeProduct):
        return list(spec.orders)
    out: list[int] = []
    for f in spec.factors:
        out.extend(generator_orders(f))
    return out


# ---------------------------------------------------------------------------
# Words


@dataclass(frozen=True)
class Word:
    """A reduced word; ``syms`` holds signed generator codes."""

    syms: tuple = ()

    @property
    def letters(self) -> tuple:
        return tuple((abs(s) - 1, 1 if s > 0 else -1) for s in self.syms)

    def __len__(self) -> int:
        return len(self.syms)

    def is_identity(self) -> bool:
        return not self.syms


def reduce(letters: Iterable, alphabet_size: int | None = None) -> Word:
    """Freely reduce a letter sequence.

    Letters may be signed codes or ``(index, sign)`` pairs.
    """
    stack: list[int] = []
    for let in letters:
        if isinstance(let, tuple):
            idx, sgn = let
            if sgn not in (1, -1):
                raise ValueError(f"letter sign must be +1 or -1, got {sgn}")
            s = (idx + 1) * sgn
        else:
            s = int(let)
        if s == 0:
            raise ValueError("0 is not a letter code")
        if alphabet_size is not None and abs(s) > alphabet_size:
            raise ValueError(f"letter index {abs(s) - 1} outside alphabet of size {alphabet_size}")
        if stack and stack[-1] == -s:
            stack.pop()
        else:
            stack.append(s)
    return Word(tuple(stack))


def _free_mul(u: tuple, v: tuple) -> tuple:
    k = 0
    m = min(len(u), len(v))
    nu = len(u)
    while k < m and u[nu - 1 - k] == -v[k]:
        k += 1
    if k == 0:
        return u + v
    return u[: nu - k] + v[k:]


def _free_inv(u: tuple) -> tuple:
    return tuple(-s for s in reversed(u))


def _norm_exp(e: int, k: int) -> int:
    return e % k if k else e


def _fp_mul(spec: FreeProduct, u: tuple, v: tuple) -> tuple:
    # merging only happens at the junction, and can cascade once a syllable dies
    i = len(u)
    j = 0
    while i > 0 and j < len(v) and u[i - 1][0] == v[j][0]:
        fac = v[j][0]
        ne = _norm_exp(u[i - 1][1] + v[j][1], spec.orders[fac])
        if ne != 0:
            return u[: i - 1] + ((fac, ne),) + v[j + 1 :]
        i -= 1
        j += 1
    return u[:i] + v[j:]


def _fp_inv(spec: FreeProduct, u: tuple) -> tuple:
    return tuple((f, _norm_exp(-e, spec.orders[f])) for f, e in reversed(u))


# ---------------------------------------------------------------------------
# Elements


@dataclass(frozen=True)
class GroupElement:
    spec: GroupSpec
    payload: tuple

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def __invert__(self) -> "GroupElement":
        return inverse(self)

    def __pow__(self, n: int) -> "GroupElement":
        return power(self, n)

    def is_identity(self) -> bool:
        return is_identity(self)

    def __str__(self) -> str:
        return format_element(self)

    def __repr__(self) -> str:
        return f"GroupElement({self.spec}, {format_element(self)!r})"


def identity(spec: GroupSpec) -> GroupElement:
    if isinstance(spec, DirectProduct):
        return GroupElement(spec, tuple(identity(f) for f in spec.factors))
    return GroupElement(spec, ())


def is_identity(g: GroupElement) -> bool:
    if isinstance(g.spec, DirectProduct):
        return all(is_identity(c) for c in g.payload)
    return not g.payload


def _check_same(g: GroupElement, h: GroupElement) -> None:
    if g.spec is not h.spec and g.spec != h.spec:
        raise SpecMismatch(f"elements of {g.spec} and {h.spec} cannot be combined")


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    _check_same(g, h)
    spec = g.spec
    if isinstance(spec, Free):
        return GroupElement(spec, _free_mul(g.payload, h.payload))
    if isinstance(spec, FreeProduct):
        return GroupElement(spec, _fp_mul(spec, g.payload, h.payload))
    return GroupElement(spec, tuple(multiply(a, b) for a, b in zip(g.payload, h.payload)))


def inverse(g: GroupElement) -> GroupElement:
    spec = g.spec
    if isinstance(spec, Free):
        return GroupElement(spec, _free_inv(g.payload))
    if isinstance(spec, FreeProduct):
        return GroupElement(spec, _fp_inv(spec, g.payload))
    return GroupElement(spec, tuple(inverse(c) for c in g.payload))


def power(g: GroupElement, n: int) -> GroupElement:
    if n < 0:
        return power(inverse(g), -n)
    result = identity(g.spec)
    base = g
    while n:
        if n & 1:
            result = multiply(result, base)
        n >>= 1
        if n:
            base = multiply(base, base)
    return result


def product(elements: Sequence[GroupElement], spec: GroupSpec | None = None) -> GroupElement:
    if not elements:
        if spec is None:
            raise ValueError("empty product needs an explicit spec")
        return identity(spec)
    out = elements[0]
    for e in elements[1:]:
        out = multiply(out, e)
    return out


def conjugate(x: GroupElement, g: GroupElement) -> GroupElement:
    """Return x g x^-1."""
    return multiply(multiply(x, g), inverse(x))


def commutes(g: GroupElement, h: GroupElement) -> bool:
    _check_same(g, h)
    return multiply(g, h) == multiply(h, g)


def _syllable_length(spec: FreeProduct, syl: tuple) -> int:
    fac, e = syl
    k = spec.orders[fac]
    return min(e, k - e) if k else abs(e)


def word_length(g: GroupElement) -> int:
    spec = g.spec
    if isinstance(spec, Free):
        return len(g.payload)
    if isinstance(spec, FreeProduct):
        return sum(_syllable_length(spec, s) for s in g.payload)
    return sum(word_length(c) for c in g.payload)


def generators(spec: GroupSpec) -> list[GroupElement]:
    """The standard generators, flattened in factor order."""
    if isinstance(spec, Free):
        return [GroupElement(spec, (i + 1,)) for i in range(spec.rank)]
    if isinstance(spec, FreeProduct):
        return [GroupElement(spec, ((i, 1),)) for i in range(len(spec.orders))]
    out = []
    for p, f in enumerate(spec.factors):
        for gen in generators(f):
            coords = [identity(ff) for ff in spec.factors]
            coords[p] = gen
            out.append(GroupElement(spec, tuple(coords)))
    return out


def generating_set(spec: GroupSpec) -> list[GroupElement]:
    """S = generators and their inverses, without repeats (an order-2 generator is its own inverse)."""
    out: list[GroupElement] = []
    seen = set()
    for gen in generators(spec):
        for x in (gen, inverse(gen)):
            if x not in seen:
                seen.add(x)
                out.append(x)
    return out


def exponent_sums(g: GroupElement) -> list[int]:
    """Exponent sum of each flattened generator (torsion exponents are the stored residues)."""
    spec = g.spec
    if isinstance(spec, Free):
        sums = [0] * spec.rank
        for s in g.payload:
            sums[abs(s) - 1] += 1 if s > 0 else -1
        return sums
    if isinstance(spec, FreeProduct):
        sums = [0] * len(spec.orders)
        for fac, e in g.payload:
            sums[fac] += e
        return sums
    out: list[int] = []
    for c in g.payload:
        out.extend(exponent_sums(c))
    return out


def from_letters(spec: GroupSpec, letters: Iterable[tuple[int, int]]) -> GroupElement:
    """Build an element from (flattened generator index, exponent) pairs."""
    gens = generators(spec)
    out = identity(spec)
    for idx, e in letters:
        if not 0 <= idx < len(gens):
            raise ValueError(f"generator index {idx} out of range for {spec}")
        out = multiply(out, power(gens[idx], e))
    return out


def free_element(rank: int, letters: Iterable) -> GroupElement:
    return GroupElement(Free(rank), reduce(letters, rank).syms)


# ---------------------------------------------------------------------------
# Cyclic reduction


@dataclass(frozen=True)
class CyclicForm:
    conjugator: GroupElement
    core: GroupElement


def cyclic_reduce(g: GroupElement) -> CyclicForm:
    """Write g = u c u^-1 with c cyclically reduced."""
    spec = g.spec
    if isinstance(spec, Free):
        w = g.payload
        n = len(w)
        i = 0
        while n - 2 * i >= 2 and w[i] == -w[n - 1 - i]:
            i += 1
        return CyclicForm(GroupElement(spec, w[:i]), GroupElement(spec, w[i : n - i]))
    if isinstance(spec, FreeProduct):
        s = g.payload
        u: tuple = ()
        while len(s) >= 2 and s[0][0] == s[-1][0]:
            x = s[0]
            u = u + (x,)
            fac = x[0]
            ne = _norm_exp(s[-1][1] + x[1], spec.orders[fac])
            s = s[1:-1] + (((fac, ne),) if ne else ())
        return CyclicForm(GroupElement(spec, u), GroupElement(spec, s))
    forms = [cyclic_reduce(c) for c in g.payload]
    return CyclicForm(
        GroupElement(spec, tuple(f.conjugator for f in forms)),
        GroupElement(spec, tuple(f.core for f in forms)),
    )


def is_cyclically_reduced(g: GroupElement) -> bool:
    spec = g.spec
    if isinstance(spec, Free):
        w = g.payload
        return len(w) < 2 or w[0] != -w[-1]
    if isinstance(spec, FreeProduct):
        s = g.payload
        return len(s) < 2 or s[0][0] != s[-1][0]
    return all(is_cyclically_reduced(c) for c in g.payload)


# ---------------------------------------------------------------------------
# Random elements and ordering


def random_word_element(spec: GroupSpec, length: int, rng: random.Random) -> GroupElement:
    """Product of ``length`` random elements of S (the result may be shorter)."""
    S = _cached_gen_set(spec)
    out = identity(spec)
    for _ in range(length):
        out = multiply(out, rng.choice(S))
    return out


def random_element(spec: GroupSpec, max_len: int, rng: random.Random) -> GroupElement:
    return random_word_element(spec, rng.randint(0, max_len), rng)


_GEN_CACHE: dict = {}


def _cached_gen_set(spec: GroupSpec) -> list[GroupElement]:
    try:
        return _GEN_CACHE[spec]
    except KeyError:
        _GEN_CACHE[spec] = generating_set(spec)
        return _GEN_CACHE[spec]


def sort_key(g: GroupElement) -> tuple:
    """Length first, then a lexicographic key on the normal form."""
    return (word_length(g), _lex_key(g))


def _lex_key(g: GroupElement) -> tuple:
    spec = g.spec
    if isinstance(spec, Free):
        # a < A < b < B < ...
        return tuple(2 * (abs(s) - 1) + (s < 0) for s in g.payload)
    if isinstance(spec, FreeProduct):
        return g.payload
    return tuple((word_length(c), _lex_key(c)) for c in g.payload)


# ---------------------------------------------------------------------------
# Geodesic words (for the word metric of the standard generating set)


def geodesic_letters(g: GroupElement) -> list[GroupElement]:
    """A geodesic spelling of g as a list of elements of S (coordinates in factor order)."""
    spec = g.spec
    if isinstance(spec, Free):
        return [GroupElement(spec, (s,)) for s in g.payload]
    if isinstance(spec, FreeProduct):
        out = []
        for fac, e in g.payload:
            k = spec.orders[fac]
            if k and e > k - e:
                step, count = k - 1, k - e
            elif k:
                step, count = 1, e
            else:
                step, count = (1 if e > 0 else -1), abs(e)
            unit = GroupElement(spec, ((fac, _norm_exp(step, k)),))
            out.extend([unit] * count)
        return out
    out = []
    for p, c in enumerate(g.payload):
        for letter in geodesic_letters(c):
            coords = [identity(f) for f in spec.factors]
            coords[p] = letter
            out.append(GroupElement(spec, tuple(coords)))
    return out


def word_distance(g: GroupElement, h: GroupElement) -> int:
    return word_length(multiply(inverse(g), h))


# ---------------------------------------------------------------------------
# Formatting


def format_element(g: GroupElement) -> str:
    if not isinstance(g.spec, DirectProduct):
        return _format_flat(g, generator_names(g.spec))
    names = generator_names(g.spec)
    parts = []
    offset = 0
    for c, f in zip(g.payload, g.spec.factors):
        n = num_generators(f)
        parts.append(format_element(c) if isinstance(f, DirectProduct) else _format_flat(c, names[offset : offset + n]))
        offset += n
    return "(" + ", ".join(parts) + ")"


def _format_flat(g: GroupElement, names: list[str]) -> str:
    if is_identity(g):
        return "1"
    if isinstance(g.spec, Free):
        runs: list[list[int]] = []
        for s in g.payload:
            if runs and runs[-1][0] == abs(s) - 1 and (runs[-1][1] > 0) == (s > 0):
                runs[-1][1] += 1 if s > 0 else -1
            else:
                runs.append([abs(s) - 1, 1 if s > 0 else -1])
        toks = [(names[i], e) for i, e in runs]
    else:
        toks = [(names[f], e) for f, e in g.payload]
    return " ".join(n if e == 1 else f"{n}^{e}" for n, e in toks)
