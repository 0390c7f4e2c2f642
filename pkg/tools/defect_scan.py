"""Exhaustive defect scan for homogenized counting functions on a free group.

Standalone on purpose (no package imports), so the frozen table in
quasimorphisms.py can be regenerated independently:

    python3 tools/defect_scan.py 2 1,2 5 6
    rank 2, pattern (1, 2): prints radius, ball size, max defect, seconds
"""

import argparse
import time


def mul(u, v):
    k = 0
    n = min(len(u), len(v))
    while k < n and u[len(u) - 1 - k] == -v[k]:
        k += 1
    return u[: len(u) - k] + v[k:]


def core(w):
    n = len(w)
    i = 0
    while n - 2 * i >= 2 and w[i] == -w[n - 1 - i]:
        i += 1
    return w[i : n - i]


def cyclic_count(c, w):
    n, m = len(c), len(w)
    if not n:
        return 0
    return sum(1 for i in range(n) if all(c[(i + j) % n] == w[j] for j in range(m)))


def phi(g, w, wi):
    c = core(g)
    return cyclic_count(c, w) - cyclic_count(c, wi)


def ball(rank, radius):
    out, front = [()], [()]
    letters = [s for i in range(1, rank + 1) for s in (i, -i)]
    for _ in range(radius):
        nxt = [u + (s,) for u in front for s in letters if not u or u[-1] != -s]
        out += nxt
        front = nxt
    return out


def scan(rank, w, radius):
    wi = tuple(-x for x in reversed(w))
    B = ball(rank, radius)
    val = {g: phi(g, w, wi) for g in B}
    best = 0
    for g in B:
        pg = val[g]
        for h in B:
            d = abs(phi(mul(g, h), w, wi) - pg - val[h])
            if d > best:
                best = d
    return len(B), best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("rank", type=int)
    ap.add_argument("pattern", help="comma separated signed generator indices, e.g. 1,-2")
    ap.add_argument("radii", type=int, nargs="+")
    args = ap.parse_args()
    w = tuple(int(x) for x in args.pattern.split(","))
    for r in args.radii:
        t = time.time()
        size, best = scan(args.rank, w, r)
        print(r, size, best, round(time.time() - t, 1))


if __name__ == "__main__":
    main()
