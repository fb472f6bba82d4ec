"""Splitting a spectral multiplier into a short-range and a smooth part.

The short-range part is assembled from the wave group, and again from
Bessel functions.  Its kernel vanishes beyond the cutoff distance.  Adding
the smooth remainder gives back the multiplier.
"""
import numpy as np

from multlab import CutoffSpec, eigendecompose, get_symbol, laplacian, operator_norm
from multlab.eigen import apply_function
from multlab.multiplier import build_flat, build_sharp_bessel, build_sharp_wave, support_check
from multlab.symbols import symbol_tables

es = eigendecompose(laplacian(1, np.pi, 201))
for name in ("rational", "log-oscillation-1"):
    tab = symbol_tables(get_symbol(name), CutoffSpec(1.0))
    sharp = build_sharp_wave(es, tab)
    flat = build_flat(es, tab)
    print(name)
    for k in (1, 2, 3):
        b = build_sharp_bessel(es, tab, k, reference=sharp)
        print(f"  Bessel route k={k}: differs from the wave route by {b.meta['route_difference']:.2e}")
    whole = apply_function(es, get_symbol(name))
    print(f"  short + smooth vs whole: {operator_norm(sharp + flat - whole, 2):.2e}")
    supp = support_check(sharp)
    print(f"  kernel mass beyond distance {supp.radius:.3f}: {supp.ratio:.2e} of the total")
