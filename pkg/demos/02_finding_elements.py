# Searching for one element that is hyperbolic for several actions at once.

from simulhyp import construct as K
from simulhyp.actions import BassSerreTree, CayleyTree, Line, translation_length
from simulhyp.groups import DirectProduct, Free, FreeProduct

g = DirectProduct((Free(2), Free(3)))
trees = [CayleyTree(g, 0), CayleyTree(g, 1)]

# contracting on both factor trees: the certificate records which pigeonhole case fired
cert = K.find_simul_contracting(trees)
print(cert.to_text())

# add a line action: the search now also has to keep a homomorphism away from zero
line = Line(g, (1, 0, 0, 0, 0))
sh = K.find_simul_hyperbolic(trees + [line])
print(sh.to_text())
for X in trees + [line]:
    print(f"  tau on {X}: {translation_length(X, sh.element)}")

# the same search on the Bass-Serre tree of Z * Z/2
zz2 = FreeProduct((0, 2))
print(K.find_simul_hyperbolic([BassSerreTree(zz2), Line(zz2, (1, 0))]).to_text())
