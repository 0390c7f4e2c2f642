# Homogenized counting quasimorphisms and the nonvanishing combination.

from simulhyp.grammar import parse_element as P
from simulhyp.groups import Free
from simulhyp.quasimorphisms import combine_nonvanishing, counting, evaluate, homomorphism, lineal_focal_extension_set

f2 = Free(2)
q = counting(f2, "ab")
print(f"{q}: declared defect {q.delta}")
for w in ("a b", "a b a^-1 b^-1", "a b a b^-1", "b a"):
    print(f"  {w:>16} -> {evaluate(q, P(f2, w))}")

suite = [homomorphism(f2, [1, -1]), q, counting(f2, "a a b")]
g = combine_nonvanishing(suite, 4)
print(f"element nonzero on the whole suite: {g}  values {[str(evaluate(x, g)) for x in suite]}")

F = lineal_focal_extension_set(suite, 4)
print(f"extension set of {len(F)} powers; longest has length {max(len(f.payload) for f in F)}")
