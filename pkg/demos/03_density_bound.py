# A finite extension set turns into a lower bound on density.
#
# If every g has some f in F with g f in the target class, then the map
# g -> g f hits the class from at most |F| preimages, and ball growth does the rest.

import time

from simulhyp import census as C
from simulhyp import construct as K
from simulhyp.actions import CayleyTree

g = C.F2xF3
trees = [CayleyTree(g, 0), CayleyTree(g, 1)]

t = time.perf_counter()
ext = K.sc_extension_set(trees, verify_radius=4)
print(f"|F| = {len(ext.F)}, ladder {ext.ladder}, D = {ext.D}, checked {ext.checked} elements, pass = {ext.passed}")
print(f"built and verified in {time.perf_counter() - t:.1f}s")

bound = C.density_bound_from_extension_set(ext, g)
print(f"M = {bound.M}; c = 1/#S^(<={2 * bound.M}) has {len(str(bound.c.denominator))} digits in its denominator")

pred = C.SimulHyperbolic(trees)
for n in (2 * bound.M + 1, 2 * bound.M + 50):
    rep = C.density(g, pred, n, "fast-series")
    print(f"n={n}: density {float(rep.ratio):.6f} >= c: {rep.ratio >= bound.c}")
