"""phi(sqrt(-L)) = phi_sharp(sqrt(-L)) + phi_flat(sqrt(-L)), assembled through the
wave group and through normalized Bessel functions.

Both sharp routes regularize at ``t = 0`` in the same way, so that transforms
with a ``1/t`` singularity are handled:

    m_wave(mu)  = phi_sharp(0) + sqrt(2/pi) int_0^a sharp(t) (cos(t sqrt mu) - 1) dt
    m_bessel(mu) = phi_sharp(0) + int_0^a psi_k(t) (J_k(t sqrt mu) - J_k(0)) dt

with ``phi_sharp(0) = phi(0) - phi_flat(0)``.  The integrals use the trapezoid
rule in ``u = log t`` on the graded grid of the symbol tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .eigen import EigenSystem, KernelMatrix, kernel_from_multiplier, operator_norm
from .errors import ConfigurationError, NumericFailure
from .semigroups import heat_kernel
from .symbols import SQ2_PI, CutoffSpec, Symbol, SymbolTables, bessel_J

_CHUNK = 96


def _log_quadrature(tables: SymbolTables, values: np.ndarray, lam: np.ndarray,
                    kernel, stride: int = 1) -> np.ndarray:
    """``sum_u t * values(t) * kernel(t, lam) * du`` over nodes in ``(0, a]``."""
    t = tables.tlog
    live = (t <= tables.cut.a) & np.isfinite(values) & (values != 0)
    idx = np.flatnonzero(live)
    # keep nodes on the sub-lattice that contains t = a
    last = len(t) - 1
    idx = idx[(last - idx) % stride == 0]
    tw = t[idx] * values[idx] * tables.du * stride
    tt = t[idx]
    out = np.empty(lam.size)
    for s in range(0, lam.size, _CHUNK):
        out[s:s + _CHUNK] = kernel(np.outer(lam[s:s + _CHUNK], tt)) @ tw
    return out


def sharp_multiplier_wave(tables: SymbolTables, lam, stride: int = 1) -> np.ndarray:
    """Values of ``phi_sharp`` at ``lam`` from the cosine (wave) route."""
    lam = np.asarray(lam, dtype=float).ravel()
    integral = _log_quadrature(tables, tables.sharp_log, lam,
                               lambda x: np.cos(x) - 1.0, stride)
    return tables.sharp_at_zero + SQ2_PI * integral


def sharp_multiplier_bessel(tables: SymbolTables, lam, k: int, stride: int = 1) -> np.ndarray:
    """Values of ``phi_sharp`` at ``lam`` from the Bessel route with ladder index k."""
    if k not in tables.psi:
        raise ConfigurationError(f"psi_{k} not tabulated (have {sorted(tables.psi)})")
    if k < 1:
        raise ConfigurationError("Bessel route needs k >= 1")
    lam = np.asarray(lam, dtype=float).ravel()
    J0 = bessel_J(k, np.array([0.0]))[0]
    integral = _log_quadrature(tables, tables.psi[k], lam,
                               lambda x: bessel_J(k, x) - J0, stride)
    return tables.sharp_at_zero + integral


def _check_tables(tables: SymbolTables):
    if tables.sharp_log is None or tables.cut is None:
        raise ConfigurationError("symbol tables must be split with a finite cutoff")


def _max_kernel_change(es: EigenSystem, dm: np.ndarray) -> float:
    return float(np.max(np.abs((es.vecs * dm) @ es.vecs.T)))


def build_sharp_wave(es: EigenSystem, tables: SymbolTables, tol: float = 1e-7) -> KernelMatrix:
    """Kernel ``k_sharp`` from the wave route; the quadrature is repeated with
    twice the step and a kernel change above ``tol`` (max norm) raises."""
    _check_tables(tables)
    lam = es.sqrt_mu
    m = sharp_multiplier_wave(tables, lam)
    m2 = sharp_multiplier_wave(tables, lam, stride=2)
    change = _max_kernel_change(es, m - m2)
    if change > tol:
        raise NumericFailure(
            f"wave-route quadrature for {tables.symbol.name!r} not converged: "
            f"doubling the step changed the kernel by {change:.3e} > {tol:.0e}")
    return kernel_from_multiplier(es, m, route="wave", symbol=tables.symbol.name,
                                  step_change=change, multiplier=m)


def build_sharp_bessel(es: EigenSystem, tables: SymbolTables, k: int,
                       reference: Optional[KernelMatrix] = None,
                       fail_tol: float = 1e-4) -> KernelMatrix:
    """Kernel ``k_sharp`` from the Bessel route with ladder index k.

    With a wave-route ``reference`` the (2 -> 2) difference is recorded and a
    difference above ``fail_tol`` raises NumericFailure.
    """
    _check_tables(tables)
    if k not in (1, 2, 3):
        raise ConfigurationError(f"Bessel route supports k in 1..3, got {k}")
    m = sharp_multiplier_bessel(tables, es.sqrt_mu, k)
    K = kernel_from_multiplier(es, m, route="bessel", k=k, symbol=tables.symbol.name,
                               multiplier=m)
    if reference is not None:
        diff = operator_norm(K - reference, 2)
        K.meta["route_difference"] = diff
        if diff > fail_tol:
            raise NumericFailure(
                f"Bessel route (k={k}) differs from the wave route by {diff:.3e} "
                f"> {fail_tol:.0e}; the psi_{k} grid is too coarse")
    return K


def factorized_flat(es: EigenSystem, flat_values: np.ndarray, s: float) -> KernelMatrix:
    """``(I - L)^{-s/2} psi_flat(sqrt(-L))`` with ``psi_flat = (1 + lam^2)^{s/2} phi_flat``.

    Integer powers of the resolvent come from a dense linear solve; a leftover
    half power is applied spectrally.
    """
    op = es.op
    lam = es.sqrt_mu
    psi = (1 + lam**2) ** (s / 2) * flat_values
    Kpsi = kernel_from_multiplier(es, psi)
    A = np.eye(op.n) - op.matrix
    M = Kpsi.operator_matrix()
    for _ in range(int(math.floor(s / 2))):
        M = np.linalg.solve(A, M)
    if (s / 2) % 1:
        half = kernel_from_multiplier(es, (1 + lam**2) ** (-((s / 2) % 1)))
        M = half.operator_matrix() @ M
    return KernelMatrix(M / es.weights[None, :], es.mesh, {"route": "factorized", "s": s})


def build_flat(es: EigenSystem, tables: SymbolTables, tol: float = 1e-7) -> KernelMatrix:
    """Kernel of ``phi_flat(sqrt(-L))`` by direct quadrature per eigenvalue,
    cross-checked against the factorized form with ``s = n + 2``."""
    if tables.fhat_flat is None:
        raise ConfigurationError("tables have not been split")
    vals = tables.flat_values(es.sqrt_mu)
    K = kernel_from_multiplier(es, vals, route="direct", multiplier=vals)
    s = es.mesh.dim + 2
    Kf = factorized_flat(es, vals, s)
    diff = operator_norm(K - Kf, 2)
    K.meta["factorized_difference"] = diff
    if diff > tol:
        raise NumericFailure(f"flat part: direct and factorized paths differ by {diff:.3e}")
    return K


@dataclass
class MultiplierBuild:
    sharp: KernelMatrix
    flat: KernelMatrix
    total: KernelMatrix
    symbol: Symbol
    cut: CutoffSpec
    route: str
    diagnostics: dict = field(default_factory=dict)


def build_multiplier(es: EigenSystem, tables: SymbolTables, route: str = "wave",
                     k: int = 1) -> MultiplierBuild:
    """Sharp part (wave or Bessel route) plus flat part."""
    if route == "wave":
        sharp = build_sharp_wave(es, tables)
    elif route == "bessel":
        sharp = build_sharp_bessel(es, tables, k)
    else:
        raise ConfigurationError(f"unknown route {route!r}")
    flat = build_flat(es, tables)
    total = KernelMatrix(sharp.K + flat.K, es.mesh, {"route": route})
    oracle = tables.symbol(es.sqrt_mu)
    recon = float(np.max(np.abs(sharp.meta["multiplier"] + flat.meta["multiplier"] - oracle)))
    return MultiplierBuild(sharp=sharp, flat=flat, total=total, symbol=tables.symbol,
                           cut=tables.cut, route=route,
                           diagnostics={"reconstruction": recon,
                                        "factorized_difference": flat.meta["factorized_difference"]})


# ---------------------------------------------------------------- support

@dataclass
class SupportReport:
    radius: float
    outside_mass: float
    total_mass: float
    tol: float

    @property
    def ratio(self) -> float:
        return self.outside_mass / self.total_mass if self.total_mass > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.ratio <= self.tol


def support_check(sharp: KernelMatrix, speed: float = 1.0, a: float = 1.0,
                  margin: Optional[float] = None, tol: float = 1e-6) -> SupportReport:
    """Weighted L^1 mass of ``k_sharp`` beyond ``d(x, y) > speed * a + margin``."""
    mesh = sharp.mesh
    margin = 5 * mesh.spacing if margin is None else margin
    radius = speed * a + margin
    w = mesh.weights
    mass = np.abs(sharp.K) * w[:, None] * w[None, :]
    return SupportReport(radius=radius, outside_mass=float(mass[mesh.dist > radius].sum()),
                         total_mass=float(mass.sum()), tol=tol)


# ---------------------------------------------------------------- Key Lemma

@dataclass
class KeyLemmaProfile:
    t_grid: np.ndarray
    values: np.ndarray
    admissible: np.ndarray
    epsilon: float

    @property
    def admissible_values(self) -> np.ndarray:
        return self.values[self.admissible]


def key_lemma_profile(es: EigenSystem, sharp: KernelMatrix, epsilon: float = 0.05,
                      levels: int = 8) -> KeyLemmaProfile:
    """``I(t) = sup_y sum_{d(x,y) > sqrt t} w_x |k_sharp(x,y) - k_t(x,y)|`` with
    ``k_t = e^{tL}`` applied to ``k_sharp`` in x, for ``t = epsilon / 2^j``.

    Levels with ``t < h^2`` are computed but flagged inadmissible.
    """
    if not 0 < epsilon <= 0.1:
        raise ConfigurationError(f"epsilon must be in (0, 0.1], got {epsilon}")
    if not 0 <= levels <= 8:
        raise ConfigurationError(f"levels must be in 0..8, got {levels}")
    mesh = es.mesh
    w = mesh.weights
    ts = epsilon / 2.0 ** np.arange(levels + 1)
    vals = np.empty(ts.size)
    for j, t in enumerate(ts):
        kt = heat_kernel(es, t).compose(sharp)
        far = mesh.dist > math.sqrt(t)
        diff = np.abs(sharp.K - kt.K) * far
        vals[j] = float(np.max(w @ diff))
    if not np.all(np.isfinite(vals)):
        raise NumericFailure("Key Lemma integral is not finite")
    return KeyLemmaProfile(t_grid=ts, values=vals, admissible=ts >= mesh.spacing**2,
                           epsilon=epsilon)
