"""Heat and Poisson semigroups from the eigen oracle, Gaussian-bound fits and
norm-scaling exponent fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .eigen import (EigenSystem, KernelMatrix, kernel_from_multiplier, multiplier_norm,
                    operator_norm)
from .errors import ConfigurationError, NumericFailure
from .symbols import bessel_J

SUBORDINATION_CONST = 2.0 * math.sqrt(math.pi)


def heat_multiplier(es: EigenSystem, t: float) -> np.ndarray:
    return np.exp(-t * es.mu)


def heat_kernel(es: EigenSystem, t: float) -> KernelMatrix:
    """Kernel of ``e^{tL}``; ``meta['negative_mass']`` is the weighted L^1 mass
    of its negative entries (relative to the total)."""
    if not t > 0:
        raise ConfigurationError(f"heat time must be positive, got {t}")
    K = kernel_from_multiplier(es, heat_multiplier(es, t), t=t)
    w = es.weights
    mass = np.abs(K.K) * w[:, None] * w[None, :]
    neg = np.sum(mass[K.K < 0]) / max(mass.sum(), 1e-300)
    K.meta["negative_mass"] = float(neg)
    return K


def heat_row(es: EigenSystem, t: float, i: int) -> np.ndarray:
    """``p(t, x_i, .)`` without forming the full kernel."""
    return es.vecs @ (np.exp(-t * es.mu) * es.vecs[i])


def poisson_direct(es: EigenSystem, t: float) -> KernelMatrix:
    if not t > 0:
        raise ConfigurationError(f"Poisson time must be positive, got {t}")
    return kernel_from_multiplier(es, np.exp(-t * es.sqrt_mu), t=t, route="direct")


def _subordination_sum(t: float, mu: np.ndarray, x: np.ndarray, dx: float) -> np.ndarray:
    s = np.exp(x)
    wgt = (t / SUBORDINATION_CONST) * np.exp(-t * t / (4 * s)) / np.sqrt(s) * dx
    out = np.zeros(mu.shape)
    for lo in range(0, len(s), 512):
        out += np.exp(-np.outer(mu, s[lo:lo + 512])) @ wgt[lo:lo + 512]
    return out


def subordinated_multiplier(t: float, mu, tol: float = 1e-12, dx0: float = 0.5,
                            max_halvings: int = 12):
    """``e^{-t sqrt(mu)}`` from the subordination integral over heat factors.

    ``(t / (2 sqrt(pi))) int_0^inf exp(-t^2/4s) s^{-3/2} exp(-s mu) ds`` by the
    trapezoid rule in ``log s``, halving the step until the change is below
    ``tol``.  Returns ``(values, info)``.
    """
    mu = np.clip(np.asarray(mu, dtype=float), 0.0, None)
    x_lo = math.log(t * t / (4 * 45.0))
    pos = mu[mu > 1e-12]
    x_hi = math.log(45.0 / pos.min()) if pos.size == mu.size else 85.0
    x_hi = max(x_hi, x_lo + 10.0)
    dx = dx0
    prev = None
    for it in range(max_halvings + 1):
        n = int(math.ceil((x_hi - x_lo) / dx))
        x = x_lo + dx * np.arange(n + 1)
        cur = _subordination_sum(t, mu, x, dx)
        if prev is not None:
            change = float(np.max(np.abs(cur - prev)))
            if change <= tol:
                return cur, {"dx": dx, "nodes": n + 1, "halvings": it, "change": change}
        prev = cur
        dx /= 2
    raise NumericFailure(
        f"subordination quadrature not converged after {max_halvings} halvings "
        f"(last change {change:.3e}, step {2 * dx:.3e})")


def poisson_subordinated(es: EigenSystem, t: float, tol: float = 1e-12) -> KernelMatrix:
    """Poisson kernel assembled as a weighted sum of heat kernels ``e^{sL}``."""
    if not t > 0:
        raise ConfigurationError(f"Poisson time must be positive, got {t}")
    m, info = subordinated_multiplier(t, es.mu, tol)
    return kernel_from_multiplier(es, m, t=t, route="subordinated", **info)


def subordination_scalar(t: float, mu: float) -> float:
    """``int_0^inf t exp(-t^2/4s) s^{-3/2} exp(-s mu) ds`` by adaptive quadrature
    (equals ``2 sqrt(pi) exp(-t sqrt(mu))``)."""
    f = lambda x: t * math.exp(-t * t / (4 * math.exp(x)) - 0.5 * x - math.exp(x) * mu)
    lo = math.log(t * t / 200.0)
    hi = math.log(60.0 / mu) if mu > 0 else 90.0
    pts = np.linspace(lo, hi, 12)
    return float(sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
                     for a, b in zip(pts[:-1], pts[1:])))


# ---------------------------------------------------------------- B_k

def bk_kernel(es: EigenSystem, s: float, k: int) -> KernelMatrix:
    """Kernel of ``J_{k-1/2}(s sqrt(-L))`` (normalized Bessel function)."""
    if not 0 <= s:
        raise ConfigurationError(f"s must be nonnegative, got {s}")
    return kernel_from_multiplier(es, bessel_J(k, s * es.sqrt_mu), s=s, k=k)


def bk_quadrature_multiplier(lam, k: int, nodes: int = 400) -> np.ndarray:
    """``J_{k-1/2}(lam)`` from ``int_{-1}^1 (1 - r^2)^{k-1} cos(r lam) dr``.

    Gauss-Jacobi quadrature with weight ``(1 - r^2)^{k-1}`` divided by the
    constant ``2^{k-1/2} Gamma(k) sqrt(pi)``.
    """
    r, w = special.roots_jacobi(nodes, k - 1, k - 1)
    lam = np.asarray(lam, dtype=float)
    vals = np.cos(np.outer(lam.ravel(), r)) @ w
    c = 2 ** (k - 0.5) * math.gamma(k) * math.sqrt(math.pi)
    return (vals / c).reshape(lam.shape)


# ---------------------------------------------------------------- Gaussian fit

@dataclass
class GaussianFit:
    kappa_hat: float
    prefactor_exponent: float
    r2: float
    window: tuple
    intercept: float
    n_samples: int
    target_exponent: float
    use_gradient: bool = False
    samples: Optional[np.ndarray] = field(default=None, repr=False)


def _linfit(x, y):
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(res**2) / ss if ss > 0 else float("nan")
    return float(coef[0]), float(coef[1]), float(r2), res


def fit_gaussian_bound(es: EigenSystem, t_grid, use_gradient: bool = False,
                       x_index: Optional[int] = None, d_min_h: float = 4.0,
                       ratio_max: float = 40.0, ratio_min: Optional[float] = None,
                       min_samples: int = 50) -> GaussianFit:
    """Fit ``|p(t,x,y)| ~ t^{-n/2} exp(-kappa d^2/t)`` (or the x-gradient version).

    The pole ``x`` is the node nearest the domain center.  Samples ``(t, y)``
    with ``d(x,y) >= d_min_h * h`` and ``d^2/t`` in ``[ratio_min, ratio_max]``
    enter the regression of ``log|p| + (n/2) log t`` (gradient: ``+ (n+1)/2``)
    against ``d^2/t``; the gradient is the forward-difference gradient in x.
    The power of t is fitted separately from
    ``sup_y |p(t,x,y)|`` (resp. ``sup_y |grad_x p|``).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0) or np.any(t_grid > 1):
        raise ConfigurationError("t_grid must lie in (0, 1]")
    mesh = es.mesh
    n, h = mesh.dim, mesh.spacing
    i = mesh.center_index() if x_index is None else int(x_index)
    if ratio_min is None:
        ratio_min = 4.0 if use_gradient else 0.0
    power = n / 2 + (0.5 if use_gradient else 0.0)
    if use_gradient:
        e = mesh.edges
        fwd = []
        for ax in range(n):
            nb = e[(e[:, 0] == i) & (mesh.edge_axis == ax), 1]
            if nb.size == 0:
                raise ConfigurationError(f"pole has no forward neighbour along axis {ax}")
            fwd.append(int(nb[0]))
    d = mesh.dist[i]
    X, Y, sups = [], [], []
    for t in t_grid:
        p = heat_row(es, t, i)
        if use_gradient:
            p = np.sqrt(sum((heat_row(es, t, j) - p) ** 2 for j in fwd)) / h
        sups.append(np.max(np.abs(p)))
        ratio = d**2 / t
        ok = (d >= d_min_h * h) & (ratio <= ratio_max) & (ratio >= ratio_min) & (np.abs(p) > 0)
        X.append(ratio[ok])
        Y.append(np.log(np.abs(p[ok])) + power * math.log(t))
    X, Y = np.concatenate(X), np.concatenate(Y)
    if X.size < min_samples:
        raise ConfigurationError(
            f"only {X.size} admissible samples (need {min_samples}); widen the t window")
    slope, icpt, r2, _ = _linfit(X, Y)
    pexp, *_ = _linfit(np.log(t_grid), np.log(np.asarray(sups)))
    return GaussianFit(kappa_hat=-slope, prefactor_exponent=pexp, r2=r2,
                       window=(float(t_grid.min()), float(t_grid.max()), d_min_h * h,
                               ratio_min, ratio_max),
                       intercept=icpt, n_samples=int(X.size), target_exponent=-power,
                       use_gradient=use_gradient, samples=np.stack([X, Y], axis=1))


# ---------------------------------------------------------------- exponent fits

@dataclass
class ExponentFit:
    family: str
    norm_type: str
    slope: float
    target: Optional[float]
    tolerance: float
    residual: float
    s_grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        ok = self.residual <= 0.05
        if self.target is not None:
            ok = ok and abs(self.slope - self.target) <= self.tolerance
        return bool(ok)


@dataclass(frozen=True, eq=False)
class SpectralFamily:
    """``s -> m(s, sqrt(mu))`` realized as kernels ``sum_k m_k v_k v_k^T``."""

    es: EigenSystem
    fn: Callable[[float, np.ndarray], np.ndarray]
    label: str = ""

    def multiplier(self, s: float) -> np.ndarray:
        return self.fn(s, self.es.sqrt_mu)

    def __call__(self, s: float) -> KernelMatrix:
        return kernel_from_multiplier(self.es, self.multiplier(s), s=s)


def fit_norm_exponent(family, norm_type, s_grid, target: Optional[float] = None,
                      tol: float = 0.15, label: Optional[str] = None) -> ExponentFit:
    """Slope of ``log ||F(s)||`` against ``log s`` over a geometric ``s_grid``."""
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.size < 5:
        raise ConfigurationError("need at least 5 s values")
    if np.any(s_grid <= 0) or np.any(s_grid > 1):
        raise ConfigurationError("s_grid must lie in (0, 1]")
    if isinstance(family, SpectralFamily) and str(norm_type) not in ("1", "inf"):
        vals = np.array([multiplier_norm(family.es, family.multiplier(s), norm_type)
                         for s in s_grid])
    else:
        vals = np.array([operator_norm(family(s), norm_type) for s in s_grid])
    if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
        raise NumericFailure(f"non-positive or non-finite norms: {vals}")
    x, y = np.log(s_grid), np.log(vals)
    if np.ptp(x) == 0 or np.ptp(y) == 0 and target is None:
        raise NumericFailure("degenerate exponent fit (zero variance)")
    slope, _, _, res = _linfit(x, y)
    name = label or getattr(family, "label", "") or "family"
    return ExponentFit(family=name, norm_type=str(norm_type), slope=slope, target=target,
                       tolerance=tol, residual=float(np.sqrt(np.mean(res**2))),
                       s_grid=s_grid, values=vals)


def smallest_k(excess: float) -> int:
    """Smallest integer k with ``2k > excess``."""
    return int(math.floor(excess / 2)) + 1


def builtin_families(es: EigenSystem) -> list:
    """``(family, norm_type, target)`` for every scaling law under test."""
    n = es.mesh.dim
    sigma = n / 4 + 1
    kb = smallest_k(n)
    klb = smallest_k(n + 4)
    fams = [
        ("heat", lambda s, lam: np.exp(-s * lam**2), "2,inf", -n / 4),
        ("heat", lambda s, lam: np.exp(-s * lam**2), "2,lip", -n / 4 - 0.5),
        ("poisson", lambda s, lam: np.exp(-s * lam), "2,inf", -n / 2),
        ("poisson", lambda s, lam: np.exp(-s * lam), "2,lip", -n / 2 - 1),
        ("resolvent-power", lambda s, lam: (1 + s**2 * lam**2) ** (-sigma), "2,inf", -n / 2),
        ("L-poisson", lambda s, lam: lam**2 * np.exp(-s * lam), "2,inf", -n / 2 - 2),
        (f"bessel-k{kb}", lambda s, lam: bessel_J(kb, s * lam), "1,2", -n / 2),
        (f"L-bessel-k{klb}", lambda s, lam: lam**2 * bessel_J(klb, s * lam), "1,2", -n / 2 - 2),
    ]
    return [(SpectralFamily(es, fn, label), norm, target) for label, fn, norm, target in fams]


def gradient_energy_fit(es: EigenSystem, t_grid, tol: float = 0.15) -> ExponentFit:
    """Slope of ``sup_x sum_y w_y |grad_x p(t,x,y)|^2`` in t (target -n/2 - 1)."""
    n = es.mesh.dim
    fam = SpectralFamily(es, lambda s, lam: np.exp(-s * lam**2), "heat")
    t_grid = np.asarray(t_grid, dtype=float)
    vals = np.array([multiplier_norm(es, fam.multiplier(t), "2,lip") ** 2 for t in t_grid])
    slope, _, _, res = _linfit(np.log(t_grid), np.log(vals))
    return ExponentFit(family="heat-gradient-energy", norm_type="2,lip^2", slope=slope,
                       target=-n / 2 - 1, tolerance=tol,
                       residual=float(np.sqrt(np.mean(res**2))), s_grid=t_grid, values=vals)
