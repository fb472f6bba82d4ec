"""Mean oscillation of rough fields, and what a multiplier does to bounded input.

Prints the oscillation norm of a few test fields at two scales, then a
corpus estimate of the bounded-to-oscillation norm of each builtin
multiplier on two mesh sizes.
"""
import numpy as np

from multlab import builtin_symbols, eigendecompose, laplacian
from multlab.bmo import BmoConfig, bmo_norm, default_corpus, linf_to_bmo_norm
from multlab.eigen import apply_function

es = eigendecompose(laplacian(1, np.pi, 401))
corpus = default_corpus(es.mesh, n_smooth=2)
print("field               eps=0.35 heat   eps=0.49 heat   eps=0.49 average")
for name, f in corpus.items():
    a = bmo_norm(es, f, BmoConfig(0.35))
    b = bmo_norm(es, f, BmoConfig(0.49))
    c = bmo_norm(es, f, BmoConfig(0.49, "average"))
    print(f"{name:<18}{a:14.4f}{b:16.4f}{c:18.4f}")

coarse = eigendecompose(laplacian(1, np.pi, 201))
print("\nsymbol                 N=201     N=401")
for sym in builtin_symbols():
    vals = [linf_to_bmo_norm(e, apply_function(e, sym), BmoConfig(0.5)).value for e in (coarse, es)]
    print(f"{sym.name:<20}{vals[0]:9.4f}{vals[1]:10.4f}")
