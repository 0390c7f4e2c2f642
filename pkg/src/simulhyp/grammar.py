"""Text grammar for groups, elements, actions and quasimorphism evaluators.

    group   := free(k) | product(group, group, ...) | freeprod(z, z/k, ...)
    action  := cayley | cayley(factor=i) | bass-serre | bass-serre(factor=i)
             | line(a=1, b=0, ...)
    qm      := hom(a=1, b=-1, ...) | count(w=ab) | busemann(line(...)) | busemann(i)

Keywords are case-insensitive. Elements are written as words in the
generator names (``a b^-1 a^2``; an upper-case letter is the inverse of the
lower-case generator; ``1`` is the identity) or, in a direct product, as a
tuple of coordinate words ``(a^2, y)``. ``busemann(i)`` refers to the i-th
action (1-based) of the surrounding configuration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import groups as G
from .groups import DirectProduct, Free, FreeProduct, GroupElement, GroupSpec


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0, line: int | None = None):
        line = text.count("\n", 0, pos) + 1 if line is None else line
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.column = line, col
        super().__init__(f"{message} at line {line}, column {col}")


_TOKEN = re.compile(r"\s*(?:(?P<num>-?\d+(?:/\d+|\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_\-]*)|(?P<punct>[(),=^*/;#]))")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", text, pos)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def error(self, msg: str):
        tok = self.peek()
        raise ParseError(msg, self.text, tok.pos if tok else len(self.text))

    def take(self, kind: str | None = None, text: str | None = None) -> _Tok:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        if kind and tok.kind != kind:
            self.error(f"expected {text or kind}, found {tok.text!r}")
        if text and tok.text.lower() != text:
            self.error(f"expected {text!r}, found {tok.text!r}")
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text.lower() == text:
            self.i += 1
            return True
        return False

    def done(self):
        if self.peek() is not None:
            self.error(f"unexpected trailing input {self.peek().text!r}")

    # -- groups
    def group(self) -> GroupSpec:
        kw = self.take("name").text.lower()
        self.take(text="(")
        if kw == "free":
            rank = int(self.take("num").text)
            self.take(text=")")
            if rank < 1:
                self.error("free group rank must be >= 1")
            return Free(rank)
        if kw == "product":
            factors = [self.group()]
            while self.accept(","):
                factors.append(self.group())
            self.take(text=")")
            if len(factors) < 2:
                self.error("product needs at least 2 factors")
            return DirectProduct(tuple(factors))
        if kw == "freeprod":
            orders = [self.cyclic()]
            while self.accept(","):
                orders.append(self.cyclic())
            self.take(text=")")
            if len(orders) < 2:
                self.error("freeprod needs at least 2 factors")
            return FreeProduct(tuple(orders))
        self.i -= 2
        self.error(f"unknown group constructor {kw!r}")

    def cyclic(self) -> int:
        tok = self.take("name")
        if tok.text.lower() != "z":
            self.i -= 1
            self.error(f"expected 'z' or 'z/k', found {tok.text!r}")
        if self.accept("/"):
            k = int(self.take("num").text)
            if k < 2:
                self.error("cyclic order must be >= 2")
            return k
        return 0

    def assignments(self) -> list[tuple[str, str, int]]:
        out = []
        if self.peek() is not None and self.peek().text == ")":
            return out
        while True:
            name = self.take("name")
            self.take(text="=")
            tok = self.peek()
            if tok is None:
                self.error("missing value")
            self.i += 1
            out.append((name.text, tok.text, tok.pos))
            if not self.accept(","):
                return out


def parse_group(text: str) -> GroupSpec:
    p = _Parser(text)
    spec = p.group()
    p.done()
    return spec


# ---------------------------------------------------------------------------
# Elements


def _split_word(text: str, names: list[str], offset: int, full: str) -> list[tuple[int, int]]:
    """Tokenize a word into (generator index, exponent) pairs."""
    index = {n: i for i, n in enumerate(names)}
    by_len = sorted(names, key=len, reverse=True)
    out = []
    pos = 0
    s = text
    while pos < len(s):
        ch = s[pos]
        if ch.isspace() or ch == "*":
            pos += 1
            continue
        if ch == "1" and (pos + 1 == len(s) or not s[pos + 1].isalnum()):
            pos += 1
            continue
        name = next((n for n in by_len if s.startswith(n, pos)), None)
        sign = 1
        if name is None and ch.isupper() and ch.lower() in index:
            name, sign = ch.lower(), -1
            length = 1
        elif name is None:
            raise ParseError(f"unknown generator starting at {s[pos:pos + 4]!r}", full, offset + pos)
        else:
            length = len(name)
        pos += length
        exp = 1
        m = re.match(r"\s*\^\s*(-?\d+)", s[pos:])
        if m:
            exp = int(m.group(1))
            pos += m.end()
        out.append((index[name], sign * exp))
    return out


def parse_element(spec: GroupSpec, text: str) -> GroupElement:
    names = G.generator_names(spec)
    stripped = text.strip()
    if isinstance(spec, DirectProduct) and stripped.startswith("(") and stripped.endswith(")"):
        inner = stripped[1:-1]
        parts = _split_top(inner)
        if len(parts) != len(spec.factors):
            raise ParseError(f"expected {len(spec.factors)} coordinates, got {len(parts)}", text, 0)
        coords = []
        offset = 0
        base = text.index("(") + 1
        for (part, ppos), f in zip(parts, spec.factors):
            n = G.num_generators(f)
            sub_names = names[offset : offset + n]
            letters = _split_word(part, sub_names, base + ppos, text)
            if isinstance(f, DirectProduct):
                coords.append(parse_element(f, part))
            else:
                coords.append(G.from_letters(f, letters))
            offset += n
        return GroupElement(spec, tuple(coords))
    return G.from_letters(spec, _split_word(text, names, 0, text))


def _split_top(text: str) -> list[tuple[str, int]]:
    parts = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in ",;" and depth == 0:
            parts.append((text[start:i], start))
            start = i + 1
    parts.append((text[start:], start))
    return parts


def split_list(text: str) -> list[str]:
    """Split a comma/semicolon separated list at parenthesis depth 0."""
    return [p.strip() for p, _ in _split_top(text) if p.strip()]


# ---------------------------------------------------------------------------
# Actions and evaluators


def parse_action(group: GroupSpec, text: str):
    from .actions import ActionError, BassSerreTree, CayleyTree, Line

    p = _Parser(text)
    kw = p.take("name").text.lower()
    try:
        if kw in ("cayley", "bass-serre", "bassserre"):
            factor = None
            if p.accept("("):
                for name, val, pos in p.assignments():
                    if name.lower() != "factor":
                        raise ParseError(f"unknown option {name!r}", text, pos)
                    factor = int(val) - 1
                p.take(text=")")
            p.done()
            cls = CayleyTree if kw == "cayley" else BassSerreTree
            return cls(group, factor)
        if kw == "line":
            p.take(text="(")
            names = G.generator_names(group)
            weights = [Fraction(0)] * len(names)
            for name, val, pos in p.assignments():
                if name not in names:
                    raise ParseError(f"unknown generator {name!r}", text, pos)
                weights[names.index(name)] = Fraction(val)
            p.take(text=")")
            p.done()
            return Line(group, tuple(weights))
    except ActionError as exc:
        raise ParseError(str(exc), text, 0) from None
    p.i -= 1
    p.error(f"unknown action {kw!r}")


def parse_qm(group: GroupSpec, text: str, actions: list | None = None):
    from .quasimorphisms import busemann, counting, homomorphism

    p = _Parser(text)
    kw = p.take("name").text.lower()
    p.take(text="(")
    if not text.rstrip().endswith(")"):
        raise ParseError("evaluator must end with ')'", text, len(text.rstrip()))
    if kw == "hom":
        names = G.generator_names(group)
        weights = [Fraction(0)] * len(names)
        for name, val, pos in p.assignments():
            if name not in names:
                raise ParseError(f"unknown generator {name!r}", text, pos)
            weights[names.index(name)] = Fraction(val)
        p.take(text=")")
        p.done()
        try:
            return homomorphism(group, weights)
        except ValueError as exc:
            raise ParseError(str(exc), text, 0) from None
    if kw == "count":
        start = p.peek()
        p.take("name", "w")
        p.take(text="=")
        close = text.rindex(")")
        word_text = text[p.peek().pos if p.peek() else close : close]
        try:
            return counting(group, word_text.strip())
        except ValueError as exc:
            raise ParseError(str(exc), text, start.pos) from None
    if kw == "busemann":
        close = text.rindex(")")
        inner = text[text.index("(") + 1 : close].strip()
        if inner.lstrip("#").isdigit():
            k = int(inner.lstrip("#")) - 1
            if not actions or not 0 <= k < len(actions):
                raise ParseError(f"busemann reference {inner} does not name an action", text, 0)
            space = actions[k]
        else:
            space = parse_action(group, inner)
        try:
            return busemann(space)
        except ValueError as exc:
            raise ParseError(str(exc), text, 0) from None
    p.i -= 2
    p.error(f"unknown evaluator {kw!r}")
