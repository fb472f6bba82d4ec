"""BMO-type seminorms adapted to L, and L^p operator norms of kernels.

Both BMO variants measure, over closed balls ``B = B_r(y)`` with radii on the
mesh lattice ``2h, 3h, ..., epsilon``, the mean of ``|f - A_r f|`` over B.
``A_r`` is ``e^{r^2 L}`` (heat variant) or the ball average
``(A_r f)(x) = mean of f over B_r(x)`` (average variant).

Corpora of test fields are defined in physical coordinates with fixed seeds
so that they are the same functions on every mesh.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .discretize import Mesh, raised_cosine
from .eigen import EigenSystem, KernelMatrix, operator_norm
from .errors import ConfigurationError


@dataclass(frozen=True)
class BmoConfig:
    epsilon: float
    variant: str = "heat"
    radii: Optional[tuple] = None

    def radius_grid(self, mesh: Mesh) -> np.ndarray:
        h = mesh.spacing
        if self.epsilon < 2 * h * (1 - 1e-12):
            raise ConfigurationError(f"epsilon = {self.epsilon} is below 2h = {2 * h}")
        if self.variant not in ("heat", "average"):
            raise ConfigurationError(f"unknown BMO variant {self.variant!r}")
        if self.radii is not None:
            return np.asarray(self.radii, dtype=float)
        m = int(math.floor(self.epsilon / h + 1e-9))
        return h * np.arange(2, m + 1)


def _preserves_constants(es: EigenSystem) -> bool:
    op = es.op
    return op.spec.bc.lower() == "neumann" and not np.any(op.potential)


def _smooth(es: EigenSystem, F: np.ndarray, r: float, variant: str, ball) -> np.ndarray:
    if variant == "heat":
        return es.vecs @ (np.exp(-r * r * es.mu)[:, None] * (es.vecs.T @ (es.weights[:, None] * F)))
    wb = ball * es.weights[None, :]
    return (wb @ F) / wb.sum(axis=1)[:, None]


def _ball_oscillations(es: EigenSystem, F: np.ndarray, cfg: BmoConfig):
    """Yield ``(radius, means)`` with ``means[center, field]`` the mean oscillation."""
    mesh = es.mesh
    if cfg.variant == "average" or _preserves_constants(es):
        # A 1 = 1 here; removing a constant keeps constants exactly at 0
        F = F - F[0:1, :]
    w = mesh.weights
    for r in cfg.radius_grid(mesh):
        ball = (mesh.dist <= r + 1e-12 * mesh.spacing).astype(float)
        G = np.abs(F - _smooth(es, F, r, cfg.variant, ball))
        wb = ball * w[None, :]
        yield r, (wb @ G) / wb.sum(axis=1)[:, None]


def bmo_profile(es: EigenSystem, F: np.ndarray, cfg: BmoConfig) -> np.ndarray:
    """Array ``[radius, field] -> sup over centers of the ball mean oscillation``."""
    F = np.asarray(F, dtype=float)
    F = F[:, None] if F.ndim == 1 else F
    return np.array([means.max(axis=0) for _, means in _ball_oscillations(es, F, cfg)])


def ball_report(es: EigenSystem, f: np.ndarray, cfg: BmoConfig, every_center: bool = False) -> list:
    """Rows ``{center, radius, oscillation}`` for one field.

    By default one row per radius, at the center with the largest oscillation;
    ``every_center`` lists every ball.
    """
    mesh = es.mesh
    F = np.asarray(f, dtype=float)[:, None]
    axes = ["x", "y"][:mesh.dim]
    rows = []
    for r, means in _ball_oscillations(es, F, cfg):
        centers = range(mesh.n_nodes) if every_center else [int(np.argmax(means[:, 0]))]
        for i in centers:
            rows.append({"center": i, **dict(zip(axes, mesh.points[i])), "radius": r,
                         "oscillation": means[i, 0]})
    return rows


def bmo_norm(es: EigenSystem, f: np.ndarray, cfg: BmoConfig) -> float | np.ndarray:
    """``sup_{B, radius <= epsilon}`` of the mean of ``|f - A f|`` over B.

    ``f`` may be a single field or a matrix of fields (one per column).
    """
    prof = bmo_profile(es, f, cfg)
    vals = prof.max(axis=0)
    return float(vals[0]) if np.ndim(f) == 1 else vals


def _ratio(num, den):
    num, den = np.asarray(num, float), np.asarray(den, float)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.where(num > 0, np.inf, 1.0))
    return r


# ---------------------------------------------------------------- corpora

def _cells(mesh: Mesh, size: float, rng) -> np.ndarray:
    """Random +-1 on a fixed lattice of physical cells of the given size."""
    L = np.asarray(mesh.lengths)
    counts = np.maximum(1, np.ceil(L / size).astype(int))
    signs = rng.choice([-1.0, 1.0], size=tuple(counts))
    idx = tuple(np.minimum((mesh.points[:, a] / size).astype(int), counts[a] - 1)
                for a in range(mesh.dim))
    return signs[idx]


def smooth_field(mesh: Mesh, rng, modes: int = 6) -> np.ndarray:
    """Random trigonometric polynomial in physical coordinates."""
    L = np.asarray(mesh.lengths)
    f = np.zeros(mesh.n_nodes)
    for _ in range(modes):
        k = rng.integers(1, 7, size=mesh.dim)
        ph = rng.uniform(0, 2 * np.pi, size=mesh.dim)
        c = rng.standard_normal() / k.sum()
        term = np.ones(mesh.n_nodes)
        for a in range(mesh.dim):
            term = term * np.cos(np.pi * k[a] * mesh.points[:, a] / L[a] + ph[a])
        f += c * term
    return f


def default_corpus(mesh: Mesh, n_smooth: int = 20, n_rough: int = 5, seed: int = 0) -> dict:
    """Named test fields: random smooth ones plus rough ones (cells, steps, log)."""
    rng = np.random.default_rng(seed)
    L = np.asarray(mesh.lengths)
    fields = {f"smooth-{i}": smooth_field(mesh, rng) for i in range(n_smooth)}
    center = 0.5 * L
    d = np.sqrt(np.sum((mesh.points - center) ** 2, axis=1))
    rough = [
        ("cells-coarse", _cells(mesh, 0.1 * L.max(), rng)),
        ("cells-fine", _cells(mesh, 0.04 * L.max(), rng)),
        ("step", np.where(mesh.points[:, 0] > 0.37 * L[0], 1.0, 0.0)),
        ("log", np.log(np.maximum(d, mesh.spacing / 2) / L.max())),
        ("sign-oscillation", np.sign(np.sin(7.3 * np.pi * mesh.points[:, 0] / L[0]))),
    ]
    for name, f in rough[:n_rough]:
        fields[name] = f
    return fields


def linf_corpus(mesh: Mesh, es: Optional[EigenSystem] = None, trials: int = 64,
                seed: int = 0) -> dict:
    """Bounded test fields grouped by kind: random +-1 cells, bumps, eigenvectors."""
    if trials < 64:
        raise ConfigurationError(f"need at least 64 trials, got {trials}")
    rng = np.random.default_rng(seed)
    L = np.asarray(mesh.lengths)
    out = {}
    n_cells = trials // 2
    sizes = np.array([0.02, 0.05, 0.1, 0.2]) * L.max()
    for i in range(n_cells):
        out[f"cells-{i}"] = ("cells", _cells(mesh, sizes[i % len(sizes)], rng))
    n_bumps = trials - n_cells - 8
    for i in range(n_bumps):
        c = rng.uniform(0.1, 0.9, size=mesh.dim) * L
        rad = rng.uniform(0.02, 0.3) * L.max()
        f = raised_cosine(mesh, c, rad)
        if not f.any():
            f = raised_cosine(mesh, c, rad + 2 * mesh.spacing)
        out[f"bump-{i}"] = ("bump", f * rng.choice([-1.0, 1.0]))
    for k in range(8):
        if es is not None:
            v = es.vecs[:, k]
            out[f"eigvec-{k}"] = ("eigvec", v / np.max(np.abs(v)))
        else:
            out[f"cosine-{k}"] = ("eigvec", np.cos(np.pi * (k + 1) * mesh.points[:, 0] / L[0]))
    return out


# ---------------------------------------------------------------- reports

@dataclass
class IndependenceReport:
    ratios: dict
    R: float
    C_check: float

    @property
    def max_ratio(self) -> float:
        return max(self.ratios.values())

    @property
    def min_ratio(self) -> float:
        return min(self.ratios.values())

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.C_check and self.min_ratio >= 1 - 1e-12


def epsilon_independence_check(es: EigenSystem, corpus: dict, R: float,
                               variant: str = "heat", C_check: float = 10.0) -> IndependenceReport:
    """Ratio of the BMO seminorms with caps ``sqrt(2R)`` and ``sqrt(R)`` per field."""
    mesh = es.mesh
    big = math.sqrt(2 * R)
    if big > mesh.diameter / 2:
        raise ConfigurationError(f"sqrt(2R) = {big:.3g} exceeds half the diameter")
    names = list(corpus)
    F = np.stack([corpus[k] for k in names], axis=1)
    prof = bmo_profile(es, F, BmoConfig(big, variant))
    radii = BmoConfig(big, variant).radius_grid(mesh)
    small = radii <= math.sqrt(R) + 1e-12
    if not small.any():
        raise ConfigurationError("sqrt(R) is below the smallest admissible radius 2h")
    num, den = prof.max(axis=0), prof[small].max(axis=0)
    ratios = dict(zip(names, _ratio(num, den).tolist()))
    return IndependenceReport(ratios=ratios, R=R, C_check=C_check)


@dataclass
class LinfBmoEstimate:
    value: float
    by_kind: dict
    argmax: str


def linf_to_bmo_norm(es: EigenSystem, K: KernelMatrix, cfg: BmoConfig, trials: int = 64,
                     seed: int = 0) -> LinfBmoEstimate:
    """Corpus lower bound of ``||K||_{L^inf -> BMO}``: max of bmo(K f) / ||f||_inf."""
    corpus = linf_corpus(es.mesh, es, trials, seed)
    names = list(corpus)
    F = np.stack([corpus[n][1] for n in names], axis=1)
    KF = K.K @ (es.weights[:, None] * F)
    vals = bmo_norm(es, KF, cfg) / np.max(np.abs(F), axis=0)
    by_kind: dict = {}
    for n, v in zip(names, vals):
        kind = corpus[n][0]
        by_kind[kind] = max(by_kind.get(kind, 0.0), float(v))
    j = int(np.argmax(vals))
    return LinfBmoEstimate(value=float(vals[j]), by_kind=by_kind, argmax=names[j])


# ---------------------------------------------------------------- L^p

def _boyd(A: np.ndarray, p: float, x0: np.ndarray, iters: int = 60) -> float:
    """Boyd's power iteration for ``max ||A x||_p / ||x||_p`` (a lower bound)."""
    q = p / (p - 1)

    def dual(v, r):
        n = np.sum(np.abs(v) ** r) ** (1 / r)
        if n == 0:
            return v
        return np.sign(v) * (np.abs(v) / n) ** (r - 1)

    x = x0 / np.sum(np.abs(x0) ** p) ** (1 / p)
    best = 0.0
    for _ in range(iters):
        y = A @ x
        val = np.sum(np.abs(y) ** p) ** (1 / p)
        best = max(best, val)
        z = A.T @ dual(y, p)
        xn = dual(z, q)
        if np.allclose(xn, x, rtol=0, atol=1e-13):
            break
        x = xn
    return float(best)


def interpolation_upper_bound(n1: float, n2: float, ninf: float, p: float) -> float:
    """Riesz-Thorin bound from the exact endpoint norms (best of three pairs)."""
    if p == 1:
        return n1
    if p == 2:
        return n2
    if np.isinf(p):
        return ninf
    bounds = [n1 ** (1 / p) * ninf ** (1 - 1 / p)]
    if p < 2:
        th = 2 * (1 - 1 / p)
        bounds.append(n1 ** (1 - th) * n2**th)
    else:
        th = 2 / p
        bounds.append(n2**th * ninf ** (1 - th))
    return float(min(bounds))


ALLOWED_P = (1, 1.5, 2, 3, 4, 6, np.inf)


def lp_norms(K: KernelMatrix, p_list: Sequence = ALLOWED_P, corpus: Optional[dict] = None,
             seed: int = 0) -> list:
    """Rows ``{p, kind, lower, upper}``: exact for p in {1, 2, inf}, otherwise a
    corpus + power-iteration lower bound and an interpolation upper bound."""
    mesh = K.mesh
    w = K.weights
    n1, n2, ninf = (operator_norm(K, "1"), operator_norm(K, "2"), operator_norm(K, "inf"))
    rows = []
    if corpus is None:
        corpus = {k: v for k, (_, v) in linf_corpus(mesh, None, 64, seed).items()}
    F = np.stack(list(corpus.values()), axis=1)
    KF = K.K @ (w[:, None] * F)
    for p in p_list:
        p = float(p)
        if p not in [float(a) for a in ALLOWED_P]:
            raise ConfigurationError(f"p = {p} not in {ALLOWED_P}")
        if p in (1.0, 2.0) or np.isinf(p):
            v = {1.0: n1, 2.0: n2}.get(p, ninf)
            rows.append({"p": p, "kind": "exact", "lower": v, "upper": v})
            continue
        num = np.sum(w[:, None] * np.abs(KF) ** p, axis=0) ** (1 / p)
        den = np.sum(w[:, None] * np.abs(F) ** p, axis=0) ** (1 / p)
        ratios = num / den
        lower = float(ratios.max())
        A = (w ** (1 / p))[:, None] * K.K * (w ** (1 - 1 / p))[None, :]
        for j in np.argsort(ratios)[-3:]:
            x0 = w ** (1 / p) * F[:, j]
            lower = max(lower, _boyd(A, p, x0))
        rows.append({"p": p, "kind": "bounds", "lower": lower,
                     "upper": interpolation_upper_bound(n1, n2, ninf, p)})
    return rows
