"""Waves on an interval travel at unit speed.

A bump is released from rest in the middle of [0, pi].  Leapfrog and the
eigenvector expansion are run side by side, and the energy outside the
light cone is printed for both.
"""
import numpy as np

from multlab import eigendecompose, laplacian
from multlab.discretize import raised_cosine
from multlab.propagation import convergence_order, cosine_leapfrog, lightcone_check

op = laplacian(1, np.pi, 401)
es = eigendecompose(op)
bump = raised_cosine(op.domain, [np.pi / 2], np.pi / 10)

print("   t   leapfrog outside   spectral outside / total")
for t in (0.2, 0.5, 1.0):
    lf = lightcone_check(op, bump, t)
    sp = lightcone_check(op, bump, t, method="spectral", es=es)
    print(f"{t:5.2f}   {lf.outside_mass:16.3g}   {sp.ratio:14.3e}")

h = op.domain.spacing
res = convergence_order(op, es, 0.5, bump, [h / 2, h / 4, h / 8])
print("\nleapfrog error against the eigen expansion:")
for dt, err in zip(res["dts"], res["errors"]):
    print(f"  dt = {dt:.3e}   error = {err:.3e}")
print(f"fitted order {res['order']:.3f}")

state = cosine_leapfrog(op, 3.0, bump, track_energy=True)
print(f"discrete energy drift over {state.steps} steps: {state.energy_drift:.2e}")
