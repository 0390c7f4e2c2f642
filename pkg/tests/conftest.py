import random

import pytest

from simulhyp import groups as G
from simulhyp.actions import BassSerreTree, CayleyTree, Line
from simulhyp.groups import DirectProduct, Free, FreeProduct


@pytest.fixture
def f2():
    return Free(2)


@pytest.fixture
def f2xf3():
    return DirectProduct((Free(2), Free(3)))


@pytest.fixture
def two_trees(f2xf3):
    return [CayleyTree(f2xf3, 0), CayleyTree(f2xf3, 1)]


@pytest.fixture
def zz2():
    return FreeProduct((0, 2))


def naive_reduce(letters):
    """Stack-based free reduction, the textbook way."""
    out = []
    for s in letters:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def random_letters(rank, n, rng):
    return [rng.choice([1, -1]) * rng.randint(1, rank) for _ in range(n)]


def rand_elt(spec, rng, max_len=8):
    return G.random_element(spec, max_len, rng)


ACCEPTANCE_LINES: list[str] = []


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            ACCEPTANCE_LINES.append(f"criterion {self.number} PASS  {self.title}  {self.detail}".rstrip())
        else:
            msg = str(exc).splitlines()[0] if str(exc) else exc_type.__name__
            ACCEPTANCE_LINES.append(f"criterion {self.number} FAIL  {self.title}  {msg}")
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
