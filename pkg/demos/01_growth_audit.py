# Ball growth in F2 x F3 and how often an element fails to be hyperbolic on both factor trees.
#
# An element (x, y) is hyperbolic on both Cayley trees exactly when x and y are
# both nontrivial, so the misses are the two coordinate axes of the ball.

from simulhyp import census as C

audit = C.example_4_9_report(n_max=12, bfs_limit=5)
print(audit.table())

# the miss fraction tends to a positive constant, so hyperbolic-on-both is not generic here
for n in (10, 20, 30):
    print(f"n={n:>2}  fraction missing = {float(C.exact_nonsh_fraction(n)):.8f}")
