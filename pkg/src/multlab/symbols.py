"""Even symbols, their cosine transforms, the cutoff split and the psi ladder.

Fourier convention (even functions, cosine transform)::

    fhat(t) = sqrt(2/pi) * int_0^inf phi(lam) cos(t lam) dlam
    phi(lam) = (1/sqrt(2 pi)) * int_{-inf}^{inf} fhat(t) cos(t lam) dt

A symbol is ``phi = const + phi_dec``.  The constant contributes
``const * sqrt(2 pi) * delta`` to the transform; the delta is never sampled,
only ``phi_dec`` is tabulated.

Two grids are used.  ``tgrid`` is a symmetric uniform midpoint grid on
``[-T, T]`` (no node at 0, where some transforms are singular); it carries
``fhat`` and the split into sharp/flat parts.  The psi ladder needs many
derivatives near ``t = 0`` where ``fhat`` may blow up like ``1/t``, so it
lives on a geometric grid ``t = exp(u)`` with uniform ``u`` spacing, on which
``-t d/dt = -d/du``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .errors import ConfigurationError, NumericFailure

SQ2PI = math.sqrt(2 * math.pi)
SQ2_PI = math.sqrt(2 / math.pi)


# ---------------------------------------------------------------- cutoff

def _g(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth even bump: 1 on ``|t| <= a/2``, 0 on ``|t| >= a``.

    The transition is ``g(x) / (g(x) + g(1 - x))`` with ``x = (a - |t|)/(a/2)``
    and ``g(x) = exp(-1/x)``.  ``a = inf`` gives the constant bump 1.
    """

    a: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError(f"cutoff width must be positive, got {self.a}")

    def theta(self, t) -> np.ndarray:
        t = np.abs(np.asarray(t, dtype=float))
        if np.isinf(self.a):
            return np.ones_like(t)
        x = (self.a - t) / (self.a / 2)
        gx, gy = _g(x), _g(1.0 - x)
        den = gx + gy
        out = np.where(den > 0, gx / np.where(den > 0, den, 1.0), 0.0)
        out = np.where(t <= self.a / 2, 1.0, out)
        return np.where(t >= self.a, 0.0, out)

    __call__ = theta


# ---------------------------------------------------------------- symbols

@dataclass(frozen=True, eq=False)
class Symbol:
    """An even symbol ``phi = const_part + decaying part``.

    ``fhat_closed`` is the cosine transform of the decaying part when known in
    closed form.  ``decay_order`` is the power ``m`` with
    ``|phi_dec(lam)| <~ (1 + lam)^-m``.
    """

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    const_part: float = 0.0
    fhat_closed: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    decay_order: float = 0.0
    fast_decay: bool = False

    def __call__(self, lam):
        return np.asarray(self.evaluate(np.abs(np.asarray(lam, dtype=float))), dtype=float)

    def decaying(self, lam):
        return self(lam) - self.const_part


def _phi3_fhat(gamma: float) -> Callable[[np.ndarray], np.ndarray]:
    """Cosine transform of ``cos(gamma log(1 + lam^2))`` for ``t != 0``.

    Continuation of the Fourier pair of ``(1 + lam^2)^{-s}`` to ``s = i gamma``;
    the modified Bessel function of complex order comes from the integral
    ``K_nu(t) = int_0^inf exp(-t cosh u) cosh(nu u) du``.
    """
    nu = 0.5 + 1j * gamma
    coef = math.sqrt(math.pi) / special.gamma(-1j * gamma)

    def fhat(t):
        t = np.abs(np.asarray(t, dtype=float))
        out = np.full(t.shape, np.nan)
        ok = t > 0
        tt = t[ok]
        if tt.size:
            umax = np.arccosh(max(1.0, 45.0 / tt.min()) + 1.0) + 1.0
            u = np.arange(0.0, umax, 0.02)
            cu, ch = np.cosh(u), np.cosh(nu * u)
            K = np.empty(tt.shape, dtype=complex)
            for s in range(0, tt.size, 2048):
                blk = tt[s:s + 2048]
                E = np.exp(-np.outer(blk, cu)) * ch[None, :]
                K[s:s + 2048] = 0.02 * (E.sum(axis=1) - 0.5 * E[:, 0])
            val = coef * (tt / 2) ** (-1j * gamma - 0.5) * K
            out[ok] = SQ2_PI * val.real
        return out

    return fhat


def builtin_symbols() -> list:
    """The reference symbol set used by the suites."""
    syms = [
        Symbol("constant", lambda lam: np.ones_like(lam), const_part=1.0,
               fhat_closed=lambda t: np.zeros_like(np.asarray(t, float)),
               decay_order=np.inf, fast_decay=True),
        Symbol("rational", lambda lam: lam**2 / (1 + lam**2), const_part=1.0,
               fhat_closed=lambda t: -math.sqrt(math.pi / 2) * np.exp(-np.abs(t)),
               decay_order=2.0),
    ]
    for gamma in (0.5, 1.0):
        syms.append(Symbol(
            f"log-oscillation-{gamma:g}",
            (lambda g: lambda lam: np.cos(g * np.log1p(lam**2)))(gamma),
            fhat_closed=_phi3_fhat(gamma), decay_order=0.0))
    syms.append(Symbol("gaussian", lambda lam: np.exp(-lam**2),
                       fhat_closed=lambda t: np.exp(-np.asarray(t, float) ** 2 / 4) / math.sqrt(2),
                       decay_order=np.inf, fast_decay=True))
    syms.append(Symbol("inverse-sqrt", lambda lam: 1 / np.sqrt(1 + lam**2),
                       fhat_closed=lambda t: SQ2_PI * special.k0(np.abs(t)),
                       decay_order=1.0))
    return syms


def get_symbol(name: str) -> Symbol:
    for s in builtin_symbols():
        if s.name == name:
            return s
    names = ", ".join(s.name for s in builtin_symbols())
    raise ConfigurationError(f"unknown symbol {name!r}; available: {names}")


def s01_certificate(sym: Symbol, lam_max: float = 200.0, n: int = 200001) -> dict:
    """Sampled ``max (1 + lam)^k |phi^(k)(lam)|`` for k = 0, 1, 2."""
    lam = np.linspace(0.0, lam_max, n)
    d = lam[1] - lam[0]
    f = sym(lam)
    out = {0: float(np.max(np.abs(f)))}
    for k in (1, 2):
        f = np.gradient(f, d, edge_order=2)
        out[k] = float(np.max((1 + lam) ** k * np.abs(f)))
    return out


# ---------------------------------------------------------------- transforms

def numeric_cosine_transform(sym: Symbol, t, steps: int = 60000,
                             lam_max: Optional[float] = None) -> np.ndarray:
    """``sqrt(2/pi) int_0^inf phi_dec(lam) cos(t lam) dlam`` by quadrature.

    Trapezoid on ``[0, lam_max]`` with ``steps`` intervals; for slowly decaying
    symbols the tail ``[lam_max, inf)`` is added with QUADPACK's oscillatory
    Fourier integrator.
    """
    if not sym.fast_decay and not sym.decay_order > 1:
        raise ConfigurationError(
            f"symbol {sym.name!r}: decaying part is not absolutely integrable "
            f"(decay order {sym.decay_order}); supply a closed-form transform or "
            "a larger decay order")
    t = np.abs(np.asarray(t, dtype=float))
    if lam_max is None:
        lam_max = 14.0 if sym.fast_decay else 60.0
    lam = np.linspace(0.0, lam_max, steps + 1)
    tw = np.full(lam.size, lam_max / steps)
    tw[[0, -1]] *= 0.5
    f = sym.decaying(lam) * tw
    out = np.empty(t.shape)
    flat_t = t.ravel()
    res = np.empty(flat_t.shape)
    for s in range(0, flat_t.size, 256):
        res[s:s + 256] = np.cos(np.outer(flat_t[s:s + 256], lam)) @ f
    if not sym.fast_decay:
        g = sym.decaying
        for i, tv in enumerate(flat_t):
            if tv == 0:
                tail = integrate.quad(lambda x: float(g(np.array(x))), lam_max, np.inf,
                                      limit=200)[0]
            else:
                tail = integrate.quad(lambda x: float(g(np.array(x))), lam_max, np.inf,
                                      weight="cos", wvar=tv, limlst=200)[0]
            res[i] += tail
    out[...] = res.reshape(t.shape)
    return SQ2_PI * out


def fhat_function(sym: Symbol, method: str = "auto", steps: int = 60000):
    """Callable ``t -> fhat_dec(t)``: closed form if known, else quadrature."""
    if method not in ("auto", "closed", "numeric"):
        raise ConfigurationError(f"unknown transform method {method!r}")
    if method != "numeric" and sym.fhat_closed is not None:
        return sym.fhat_closed
    if method == "closed":
        raise ConfigurationError(f"symbol {sym.name!r} has no closed-form transform")
    return lambda t: numeric_cosine_transform(sym, t, steps)


@dataclass(frozen=True, eq=False)
class SymbolTables:
    """Sampled transform data of one symbol.

    Uniform part: ``tgrid`` (midpoints on ``[-T, T]``), ``fhat``,
    ``fhat_sharp``, ``fhat_flat``.  Graded part (after :func:`split` and
    :func:`psi_ladder`): ``tlog`` geometric nodes on ``(0, a]`` with log step
    ``du``, ``sharp_log = theta * fhat`` there, and ``psi[k]`` on the same
    nodes.  ``sharp_at_zero`` is ``phi_sharp(0) = phi(0) - phi_flat(0)``.
    """

    symbol: Symbol = field(repr=False)
    tgrid: np.ndarray = field(repr=False)
    dt: float
    fhat: np.ndarray = field(repr=False)
    fhat_fn: Callable = field(repr=False)
    method: str = "closed"
    refinement_delta: float = 0.0
    cut: Optional[CutoffSpec] = None
    fhat_sharp: Optional[np.ndarray] = field(default=None, repr=False)
    fhat_flat: Optional[np.ndarray] = field(default=None, repr=False)
    sharp_at_zero: Optional[float] = None
    tlog: Optional[np.ndarray] = field(default=None, repr=False)
    du: Optional[float] = None
    sharp_log: Optional[np.ndarray] = field(default=None, repr=False)
    psi: dict = field(default_factory=dict, repr=False)
    psi_refinement: dict = field(default_factory=dict)

    @property
    def const_part(self) -> float:
        return self.symbol.const_part

    def flat_values(self, lam, chunk: int = 64) -> np.ndarray:
        """``phi_flat(lam) = (1/sqrt(2 pi)) int fhat_flat(t) cos(t lam) dt``."""
        if self.fhat_flat is None:
            raise ConfigurationError("tables have not been split")
        lam = np.asarray(lam, dtype=float)
        pos = self.tgrid > 0
        t, f = self.tgrid[pos], self.fhat_flat[pos] * self.dt
        keep = f != 0
        t, f = t[keep], f[keep]
        out = np.empty(lam.size)
        flat = lam.ravel()
        for s in range(0, flat.size, chunk):
            out[s:s + chunk] = np.cos(np.outer(flat[s:s + chunk], t)) @ f
        return SQ2_PI * out.reshape(lam.shape)


def fourier_transform(sym: Symbol, T: float = 36.0, steps: int = 60000,
                      dt: float = 1e-3, method: str = "auto",
                      tol: float = 1e-7) -> SymbolTables:
    """Tabulate ``fhat`` of the decaying part on a midpoint grid over ``[-T, T]``.

    Numeric transforms are recomputed with ``steps // 2`` intervals on a
    subsample of the grid; a change above ``tol`` raises NumericFailure.
    """
    if T < 8:
        raise ConfigurationError(f"transform window T must be >= 8, got {T}")
    n_half = int(round(T / dt))
    pos = (np.arange(n_half) + 0.5) * dt
    tgrid = np.concatenate([-pos[::-1], pos])
    fn = fhat_function(sym, method, steps)
    used = "closed" if (method != "numeric" and sym.fhat_closed is not None) else "numeric"
    half = np.asarray(fn(pos), dtype=float)
    delta = 0.0
    if used == "numeric":
        probe = pos[:: max(1, n_half // 400)]
        coarse = numeric_cosine_transform(sym, probe, steps // 2)
        delta = float(np.max(np.abs(coarse - fn(probe))))
        if delta > tol:
            raise NumericFailure(
                f"cosine transform of {sym.name!r} not converged: halving steps "
                f"changed it by {delta:.3e} > {tol:.1e}")
    fhat = np.concatenate([half[::-1], half])
    return SymbolTables(symbol=sym, tgrid=tgrid, dt=dt, fhat=fhat, fhat_fn=fn,
                        method=used, refinement_delta=delta)


def _split_exact(f: np.ndarray, th: np.ndarray):
    """``sharp + flat == f`` bit-exactly: the larger piece is computed, the
    smaller one is the (exact, by Sterbenz) difference."""
    sharp = np.empty_like(f)
    flat = np.empty_like(f)
    big = th >= 0.5
    sharp[big] = th[big] * f[big]
    flat[big] = f[big] - sharp[big]
    flat[~big] = (1.0 - th[~big]) * f[~big]
    sharp[~big] = f[~big] - flat[~big]
    return sharp, flat


LOG_T_MIN = 1e-7
LOG_DU = 4e-4


def split(tables: SymbolTables, cut: CutoffSpec = CutoffSpec(),
          t_min: float = LOG_T_MIN, du: float = LOG_DU) -> SymbolTables:
    """Split ``fhat = theta fhat + (1 - theta) fhat`` and set up the graded grid."""
    if np.isfinite(cut.a) and tables.tgrid[-1] < cut.a:
        raise ConfigurationError("tgrid does not cover [-a, a]")
    th = cut.theta(tables.tgrid)
    sharp, flat = _split_exact(tables.fhat, th)
    sym = tables.symbol
    out = replace(tables, cut=cut, fhat_sharp=sharp, fhat_flat=flat)
    sharp0 = float(sym(np.array([0.0]))[0] - out.flat_values(np.array([0.0]))[0])
    tlog = sharp_log = None
    if np.isfinite(cut.a):
        pad = 16
        n = int(math.ceil(math.log(cut.a / t_min) / du))
        j = np.arange(-pad, n + 1 + pad)
        tlog = cut.a * np.exp(-du * j[::-1].astype(float))
        th_log = cut.theta(tlog)
        fl = np.zeros_like(tlog)
        live = th_log > 0
        fl[live] = th_log[live] * np.asarray(tables.fhat_fn(tlog[live]), dtype=float)
        sharp_log = fl
    return replace(out, sharp_at_zero=sharp0, tlog=tlog, du=du, sharp_log=sharp_log)


def _ladder(f: np.ndarray, du: float, k_max: int) -> list:
    """``psi_j = (-d/du + 2j - 2) psi_{j-1}``, 4th-order central differences.

    Each level loses two nodes at both ends; results are NaN there.
    """
    out = [f.copy()]
    cur = f
    for j in range(1, k_max + 1):
        d = np.full_like(cur, np.nan)
        d[2:-2] = (cur[:-4] - 8 * cur[1:-3] + 8 * cur[3:-1] - cur[4:]) / (12 * du)
        cur = -d + (2 * j - 2) * cur
        out.append(cur)
    return out


def psi_ladder(tables: SymbolTables, k_max: int = 3, tol: float = 1e-5) -> SymbolTables:
    """``psi_k = prod_{j=1..k} (-t d/dt + 2j - 2) fhat_sharp`` on the graded grid.

    The ladder is recomputed on the grid with every other node (log step
    ``2 du``); a change above ``tol * sup |t psi_k|`` raises NumericFailure.
    """
    if tables.sharp_log is None:
        raise ConfigurationError("tables must be split with a finite cutoff first")
    if k_max < 0 or k_max > 6:
        raise ConfigurationError(f"k_max must be in 0..6, got {k_max}")
    t, du = tables.tlog, tables.du
    fine = _ladder(tables.sharp_log, du, k_max)
    # align the coarse grid so that it contains the node t = a (last node)
    off = (len(t) - 1) % 2
    coarse = _ladder(tables.sharp_log[off::2], 2 * du, k_max)
    psi, report = {}, {}
    inner = (t >= LOG_T_MIN * (1 - 1e-12)) & (t <= tables.cut.a)
    sub = np.zeros(len(t), dtype=bool)
    sub[off::2] = True
    for k in range(k_max + 1):
        f = fine[k].copy()
        f[t > tables.cut.a] = 0.0
        psi[k] = f
        scale = np.nanmax(np.abs(t[inner] * f[inner]))
        diff = np.abs(t[sub & inner] * (f[sub & inner] - coarse[k][inner[off::2]]))
        rel = float(np.nanmax(diff) / scale) if scale > 0 else 0.0
        report[k] = rel
        if rel > tol:
            raise NumericFailure(
                f"psi_{k} for {tables.symbol.name!r}: grid refinement changed "
                f"t*psi by {rel:.2e} (relative) > {tol:.0e}; refine the log grid")
    return replace(tables, psi=psi, psi_refinement=report)


def symbol_tables(sym: Symbol, cut: CutoffSpec = CutoffSpec(), k_max: int = 3,
                  **kw) -> SymbolTables:
    """Transform, split and psi ladder in one call."""
    tab = split(fourier_transform(sym, **kw), cut)
    if tab.sharp_log is None:
        return tab
    return psi_ladder(tab, k_max)


def psi_certificate(tables: SymbolTables, t_lo: float = 1e-3) -> dict:
    """``sup_{t in [t_lo, a]} |t psi_k(t)|`` on the fine grid and on the 2x coarser one."""
    t = tables.tlog
    win = (t >= t_lo) & (t <= tables.cut.a)
    off = (len(t) - 1) % 2
    coarse = _ladder(tables.sharp_log[off::2], 2 * tables.du, max(tables.psi))
    tc = t[off::2]
    winc = (tc >= t_lo) & (tc <= tables.cut.a)
    out = {}
    for k, f in tables.psi.items():
        fine_sup = float(np.nanmax(np.abs(t[win] * f[win])))
        coarse_sup = float(np.nanmax(np.abs(tc[winc] * coarse[k][winc])))
        out[k] = {"sup": fine_sup, "sup_coarse": coarse_sup,
                  "rel_change": abs(fine_sup - coarse_sup) / max(fine_sup, 1e-300)}
    return out


# ---------------------------------------------------------------- Bessel

_J_SERIES_TERMS = 40


def bessel_J(k: int, x) -> np.ndarray:
    """Normalized Bessel function ``x^{-nu} J_nu(x)`` with ``nu = k - 1/2``.

    Closed forms in ``sin``/``cos`` for ``|x| >= 4``, power series below.
    """
    if k not in (1, 2, 3, 4):
        raise ConfigurationError(f"bessel_J order k must be in 1..4, got {k}")
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < 4.0
    xs = x[small]
    nu = k - 0.5
    # sum_m (-1)^m (x/2)^{2m} / (2^nu m! Gamma(m + nu + 1))
    term = np.full(xs.shape, 1.0 / (2**nu * math.gamma(nu + 1)))
    acc = term.copy()
    q = -(xs / 2) ** 2
    for m in range(1, _J_SERIES_TERMS):
        term = term * q / (m * (m + nu))
        acc += term
    out[small] = acc
    xl = x[~small]
    s, c = np.sin(xl), np.cos(xl)
    if k == 1:
        v = s / xl
    elif k == 2:
        v = (s - xl * c) / xl**3
    elif k == 3:
        v = ((3 - xl**2) * s - 3 * xl * c) / xl**5
    else:
        v = ((15 - 6 * xl**2) * s - (15 * xl - xl**3) * c) / xl**7
    out[~small] = SQ2_PI * v
    return out


def bessel_J0(k: int) -> float:
    """``bessel_J(k, 0) = sqrt(2/pi) / (2k - 1)!!``."""
    return float(bessel_J(k, np.array([0.0]))[0])
