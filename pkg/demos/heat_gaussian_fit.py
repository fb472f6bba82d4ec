"""How Gaussian is the discrete heat kernel?

Fits log|p(t, x, y)| against d(x, y)^2 / t on the interval and on the
unit square, and prints the decay rate and the power of t in front.
"""
import numpy as np

from multlab import eigendecompose, laplacian
from multlab.semigroups import fit_gaussian_bound, gradient_energy_fit

cases = {
    "interval, N = 401": eigendecompose(laplacian(1, np.pi, 401)),
    "square, 41 x 41": eigendecompose(laplacian(2, 1.0, 41)),
}
for label, es in cases.items():
    h = es.mesh.spacing
    if es.mesh.dim == 1:
        t_grid = np.geomspace((10 * h) ** 2, 0.1, 8)
    else:
        t_grid = np.geomspace((2 * h) ** 2, (4 * h) ** 2, 8)
    print(label)
    for grad in (False, True):
        fit = fit_gaussian_bound(es, t_grid, use_gradient=grad)
        kind = "gradient" if grad else "kernel  "
        print(f"  {kind} kappa {fit.kappa_hat:.3f}  r2 {fit.r2:.4f}  "
              f"t-power {fit.prefactor_exponent:+.3f} (expect {fit.target_exponent:+.2f})")
    ge = gradient_energy_fit(es, t_grid)
    print(f"  gradient energy slope {ge.slope:+.3f} (expect {ge.target:+.2f})")
