"""cos(t sqrt(-L)) two ways, light cones, Davies-Gaffney and related checks.

The spectral and leapfrog cosine routines share no code beyond the operator
itself, so each serves as an oracle for the other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import erf

from .discretize import DiscreteOperator, raised_cosine
from .eigen import EigenSystem, eigendecompose
from .errors import ConfigurationError

DEFAULT_CFL = 0.9


# ---------------------------------------------------------------- cosine

def cosine_spectral(es: EigenSystem, t: float, f: np.ndarray) -> np.ndarray:
    """``sum_k cos(t sqrt(mu_k)) <f, v_k>_w v_k``."""
    return es.vecs @ (np.cos(t * es.sqrt_mu) * es.coefficients(f))


@dataclass
class WaveState:
    u: np.ndarray
    u_prev: np.ndarray
    t: float
    dt: float
    steps: int
    energy: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def energy_drift(self) -> float:
        """Max relative deviation of the discrete energy from its initial value."""
        if self.energy is None or len(self.energy) == 0:
            return 0.0
        return float(np.max(np.abs(self.energy - self.energy[0])) / abs(self.energy[0]))


def cfl_limit(op: DiscreteOperator, cfl: float = DEFAULT_CFL) -> float:
    """Largest admissible step ``cfl * h / (max(a) sqrt(n))``."""
    return cfl * op.domain.spacing / (op.speed * math.sqrt(op.domain.dim))


def _energy(op, u_next, u, dt):
    w = op.weights
    vel = (u_next - u) / dt
    return float(np.sum(w * vel * vel) - np.sum(w * op.apply(u_next) * u))


def cosine_leapfrog(op: DiscreteOperator, t: float, f: np.ndarray,
                    dt: Optional[float] = None, cfl: float = DEFAULT_CFL,
                    track_energy: bool = False) -> WaveState:
    """Leapfrog for ``u_tt = L u``, ``u(0) = f``, ``u_t(0) = 0``.

    Without ``dt`` the step is the largest one below the CFL limit that divides
    ``t`` evenly.  With ``track_energy`` the conserved discrete energy
    ``||(u^{m+1} - u^m)/dt||^2 + <-L u^{m+1}, u^m>`` is recorded per step.
    """
    limit = cfl_limit(op, cfl)
    f = np.asarray(f, dtype=float)
    if t == 0:
        return WaveState(u=f.copy(), u_prev=f.copy(), t=0.0, dt=dt or limit, steps=0)
    if dt is None:
        m = int(math.ceil(t / limit - 1e-12))
        dt = t / m
    if dt > limit * (1 + 1e-12):
        raise ConfigurationError(f"dt = {dt:.4g} violates the CFL limit {limit:.4g}")
    m = int(round(t / dt))
    if abs(m * dt - t) > 1e-9 * max(t, 1.0):
        raise ConfigurationError(f"t = {t} is not an integer multiple of dt = {dt}")
    prev = f.copy()
    cur = f + 0.5 * dt * dt * op.apply(f)
    energy = [_energy(op, cur, prev, dt)] if track_energy else None
    for _ in range(m - 1):
        prev, cur = cur, 2 * cur - prev + dt * dt * op.apply(cur)
        if track_energy:
            energy.append(_energy(op, cur, prev, dt))
    return WaveState(u=cur, u_prev=prev, t=t, dt=dt, steps=m,
                     energy=None if energy is None else np.array(energy))


def convergence_order(op: DiscreteOperator, es: EigenSystem, t: float, f: np.ndarray,
                      dts: Sequence[float]) -> dict:
    """L^2 error of leapfrog against the spectral cosine and its fitted order in dt.

    Each requested step is shrunk to the nearest ``t / m`` so that it divides t.
    """
    ref = cosine_spectral(es, t, f)
    dts = np.array([t / math.ceil(t / d - 1e-12) for d in dts])
    errs = np.array([op.domain.norm(cosine_leapfrog(op, t, f, dt=d).u - ref)
                     for d in dts])
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    return {"dts": np.asarray(dts), "errors": errs, "order": float(slope)}


# ---------------------------------------------------------------- light cone

@dataclass
class ConeReport:
    method: str
    t: float
    radius: float
    outside_mass: float
    total_mass: float
    threshold: float

    @property
    def ratio(self) -> float:
        return self.outside_mass / self.total_mass if self.total_mass > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.ratio <= self.threshold


def distance_to_support(mesh, f: np.ndarray) -> np.ndarray:
    supp = np.flatnonzero(f != 0)
    if supp.size == 0:
        raise ConfigurationError("field has empty support")
    return mesh.dist[:, supp].min(axis=1)


def lightcone_check(op: DiscreteOperator, f: np.ndarray, t: float,
                    dt: Optional[float] = None, margin: Optional[float] = None,
                    method: str = "leapfrog", es: Optional[EigenSystem] = None,
                    threshold: Optional[float] = None) -> ConeReport:
    """Weighted L^2 mass of ``cos(t sqrt(-L)) f`` outside the cone of radius
    ``speed * t + margin`` around ``supp f``.

    The leapfrog default step is the largest stable one (CFL 0.999), so that
    the discrete support, which grows one stencil layer per step, stays
    within ``t + h`` in one dimension.
    """
    mesh = op.domain
    h = mesh.spacing
    if method == "leapfrog":
        margin = 2 * h if margin is None else margin
        threshold = 0.0 if threshold is None else threshold
        u = cosine_leapfrog(op, t, f, dt=dt, cfl=0.999).u if t > 0 else f
    elif method == "spectral":
        margin = 5 * h if margin is None else margin
        threshold = 1e-6 if threshold is None else threshold
        es = es or eigendecompose(op)
        u = cosine_spectral(es, t, f)
    else:
        raise ConfigurationError(f"unknown cone method {method!r}")
    radius = op.speed * t + margin
    outside = distance_to_support(mesh, f) > radius
    w = mesh.weights
    return ConeReport(method=method, t=t, radius=radius,
                      outside_mass=float(np.sum(w[outside] * u[outside] ** 2)),
                      total_mass=float(np.sum(w * u**2)), threshold=threshold)


# ---------------------------------------------------------------- Davies-Gaffney

@dataclass
class DGReport:
    entries: list
    slack: float
    skipped: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e["ratio"] <= self.slack for e in self.entries)

    @property
    def max_ratio(self) -> float:
        return max((e["ratio"] for e in self.entries), default=0.0)


def davies_gaffney_check(es: EigenSystem, U_center, V_center, radii, t_grid,
                         slack: float = 1.05) -> DGReport:
    """``(e^{tL} u, v) <= exp(-r^2/4t) ||u|| ||v||`` for raised-cosine bumps.

    For each bump radius ``rho`` the bumps sit on balls around the two centers
    and ``r = |c_U - c_V| - 2 rho`` is the distance between their supports.
    Entries with ``r < 4h`` or ``t < h^2`` are skipped (listed in ``skipped``).
    """
    mesh = es.mesh
    h = mesh.spacing
    cu = np.atleast_1d(np.asarray(U_center, float))
    cv = np.atleast_1d(np.asarray(V_center, float))
    sep = float(np.linalg.norm(cu - cv))
    entries, skipped = [], []
    cu_w = es.vecs.T * es.weights
    for rho in np.atleast_1d(radii):
        r = sep - 2 * rho
        if r <= 0:
            raise ConfigurationError(f"balls of radius {rho} around the centers overlap")
        u = raised_cosine(mesh, cu, rho)
        v = raised_cosine(mesh, cv, rho)
        cu_k, cv_k = cu_w @ u, cu_w @ v
        nu, nv = mesh.norm(u), mesh.norm(v)
        if nu == 0 or nv == 0:
            raise ConfigurationError("bump has no mesh points")
        for t in np.atleast_1d(t_grid):
            if r < 4 * h or t < h * h:
                skipped.append({"t": float(t), "r": float(r)})
                continue
            lhs = float(np.sum(np.exp(-t * es.mu) * cu_k * cv_k))
            rhs = math.exp(-r * r / (4 * t)) * nu * nv
            entries.append({"t": float(t), "r": float(r), "rho": float(rho),
                            "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs})
    return DGReport(entries=entries, slack=slack, skipped=skipped)


# ---------------------------------------------------------------- commutator

@dataclass
class CommutatorReport:
    ratio: float
    bound: float
    speed: float
    rho: float

    @property
    def passed(self) -> bool:
        return self.ratio <= self.bound


def commutator_condition_check(op: DiscreteOperator, U_center, U_radius: float,
                               r: float, t: float, speed: float = 1.0,
                               C: float = 2.0) -> CommutatorReport:
    """Pointwise size of ``e^{-phi/2} [D, e^phi] e^{-phi/2}`` with ``phi = (r/t) d(., U)``.

    For the edge difference operator the commutator acts on edge ``(i, j)`` by
    ``a_e (e^{phi_j} - e^{phi_i}) / h``; conjugated, this is
    ``a_e 2 sinh((phi_j - phi_i)/2) / h``.  The ratio to ``r/t`` passes if it
    is at most ``speed * (1 + C h r/t)``.
    """
    mesh = op.mesh
    h = mesh.spacing
    rho = r / t
    bound = speed * (1 + C * h * rho)
    if rho == 0:
        return CommutatorReport(ratio=0.0, bound=bound, speed=speed, rho=0.0)
    c = np.atleast_1d(np.asarray(U_center, float))
    dU = np.clip(np.sqrt(np.sum((mesh.points - c) ** 2, axis=1)) - U_radius, 0.0, None)
    phi = rho * dU
    e = mesh.edges
    mid = 0.5 * (mesh.points[e[:, 0]] + mesh.points[e[:, 1]])
    from .discretize import _resolve
    a = _resolve(op.spec.a, mid, len(e), "a")
    mult = a * 2 * np.sinh(np.abs(phi[e[:, 1]] - phi[e[:, 0]]) / 2) / h
    return CommutatorReport(ratio=float(mult.max() / rho), bound=bound, speed=speed, rho=rho)


def gronwall_check(es: EigenSystem, u: np.ndarray, U_center, U_radius: float,
                   rho: float, t_grid, slack: float = 0.05) -> dict:
    """``E(t) = sum w e^{phi} |e^{tL} u|^2 <= e^{rho^2 t / 2} E(0) (1 + slack)``."""
    mesh = es.mesh
    c = np.atleast_1d(np.asarray(U_center, float))
    dU = np.clip(np.sqrt(np.sum((mesh.points - c) ** 2, axis=1)) - U_radius, 0.0, None)
    wphi = mesh.weights * np.exp(rho * dU)
    coef = es.coefficients(u)
    E0 = float(np.sum(wphi * u * u))
    rows = []
    for t in np.atleast_1d(t_grid):
        ut = es.vecs @ (np.exp(-t * es.mu) * coef)
        E = float(np.sum(wphi * ut * ut))
        bound = math.exp(rho * rho * t / 2) * E0
        rows.append({"t": float(t), "E": E, "bound": bound, "ratio": E / bound})
    return {"rows": rows, "max_ratio": max(r["ratio"] for r in rows),
            "passed": all(r["ratio"] <= 1 + slack for r in rows)}


# ---------------------------------------------------------------- resolvent limit

def mollified_step_family(mesh, x_jump: float, height: float, levels: int = 6,
                          width0: float = 0.5):
    """Step potential ``height * 1[x > x_jump]`` (half height at the jump) and
    erf-mollified approximants of width ``width0 * 2^{-n}``, n = 1..levels."""
    x = mesh.points[:, 0]
    H = np.where(x > x_jump, height, 0.0)
    H[np.isclose(x, x_jump)] = height / 2
    approx = [height * 0.5 * (1 + erf((x - x_jump) / (width0 * 2.0**-n)))
              for n in range(1, levels + 1)]
    return H, approx


@dataclass
class ResolventReport:
    heat_errors: np.ndarray
    cos_errors: np.ndarray
    potential_errors: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(self.heat_errors[-1] <= 0.1 * self.heat_errors[0]
                    and self.cos_errors[-1] <= 0.1 * self.cos_errors[0])


def resolvent_limit_check(op_builder: Callable[[np.ndarray], DiscreteOperator],
                          H_rough: np.ndarray, H_n: Sequence[np.ndarray], t: float,
                          f: np.ndarray) -> ResolventReport:
    """Errors of ``e^{tL_n} f`` and ``cos(t sqrt(-L_n)) f`` against the rough-H limit.

    ``op_builder`` maps a potential sampled on the full mesh to an operator.
    """
    op = op_builder(H_rough)
    es = eigendecompose(op)
    ref_heat = es.vecs @ (np.exp(-t * es.mu) * es.coefficients(f))
    ref_cos = cosine_spectral(es, t, f)
    dom = op.domain
    full_w = op.mesh.weights
    he, ce, pe = [], [], []
    for Hn in H_n:
        esn = eigendecompose(op_builder(Hn))
        he.append(dom.norm(esn.vecs @ (np.exp(-t * esn.mu) * esn.coefficients(f)) - ref_heat))
        ce.append(dom.norm(cosine_spectral(esn, t, f) - ref_cos))
        pe.append(float(np.sqrt(np.sum(full_w * (Hn - H_rough) ** 2))))
    return ResolventReport(np.array(he), np.array(ce), np.array(pe))
