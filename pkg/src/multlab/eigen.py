"""Weighted eigendecomposition of -L and functions of sqrt(-L) as kernels.

Kernel convention: an operator T on mesh functions is stored through its
integral kernel K, with ``(T f)_i = sum_j w_j K_ij f_j``.  The matrix of T is
therefore ``K W`` and the identity operator has kernel ``W^{-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .discretize import DiscreteOperator, Mesh
from .errors import ConfigurationError, NumericFailure

DENSE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenpairs of -L: ``-L v_k = mu_k v_k`` with ``<v_j, v_k>_w = delta_jk``."""

    mu: np.ndarray
    vecs: np.ndarray = field(repr=False)
    mesh: Mesh = field(repr=False)
    op: DiscreteOperator = field(repr=False)

    @property
    def weights(self) -> np.ndarray:
        return self.mesh.weights

    @property
    def rho(self) -> float:
        """Bottom of the spectrum of -L."""
        return float(self.mu[0])

    @property
    def sqrt_mu(self) -> np.ndarray:
        return np.sqrt(np.clip(self.mu, 0.0, None))

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        return self.vecs.T @ (self.weights * f)

    def synthesize(self, c: np.ndarray) -> np.ndarray:
        return self.vecs @ c

    def orthonormality_residual(self) -> float:
        G = self.vecs.T @ (self.weights[:, None] * self.vecs)
        return float(np.max(np.abs(G - np.eye(len(self.mu)))))

    def reconstruction_residual(self) -> float:
        R = self.op.matrix + (self.vecs * self.mu) @ (self.vecs.T * self.weights)
        return float(np.max(np.abs(R)) / max(np.max(np.abs(self.mu)), 1e-300))


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Integral kernel on the nodes of ``mesh``; ``meta`` carries diagnostics."""

    K: np.ndarray = field(repr=False)
    mesh: Mesh = field(repr=False)
    meta: dict = field(default_factory=dict)

    @property
    def weights(self) -> np.ndarray:
        return self.mesh.weights

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.K @ (self.weights * f)

    def operator_matrix(self) -> np.ndarray:
        return self.K * self.weights[None, :]

    def compose(self, other: "KernelMatrix") -> "KernelMatrix":
        """Kernel of ``self o other``."""
        return KernelMatrix(self.K @ (self.weights[:, None] * other.K), self.mesh)

    def __add__(self, other: "KernelMatrix") -> "KernelMatrix":
        return KernelMatrix(self.K + other.K, self.mesh)

    def __sub__(self, other: "KernelMatrix") -> "KernelMatrix":
        return KernelMatrix(self.K - other.K, self.mesh)

    def scaled(self, c: float) -> "KernelMatrix":
        return KernelMatrix(c * self.K, self.mesh)

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.K - self.K.T)) / max(np.max(np.abs(self.K)), 1e-300))


def identity_kernel(mesh: Mesh) -> KernelMatrix:
    return KernelMatrix(np.diag(1.0 / mesh.weights), mesh)


def jacobi_eigh(S: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi rotations for a dense symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` unsorted.  Intended for small
    matrices; the row/column updates are vectorized but the sweep is O(N^2)
    Python-level rotations.
    """
    A = np.array(S, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.linalg.norm(A), 1e-300)
    for sweep in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            return np.diag(A).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau == 0:
                    t = 1.0
                elif abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    raise NumericFailure(
        f"Jacobi iteration did not converge in {max_sweeps} sweeps "
        f"(off-diagonal norm {off:.3e}, target {tol * scale:.3e})")


def eigendecompose(op: DiscreteOperator, method: str = "lapack") -> EigenSystem:
    """Eigenpairs of -L in the weighted inner product.

    The symmetrized matrix ``W^{1/2}(-L)W^{-1/2}`` is diagonalized and the
    eigenvectors are mapped back with ``W^{-1/2}``.  Signs are fixed so that
    the largest-magnitude entry of each eigenvector is positive.
    """
    if op.n > DENSE_LIMIT:
        raise ConfigurationError(f"{op.n} nodes exceeds the dense limit {DENSE_LIMIT}")
    S = op.symmetric_form()
    if method == "lapack":
        mu, Q = np.linalg.eigh(S)
    elif method == "jacobi":
        mu, Q = jacobi_eigh(S)
        order = np.argsort(mu)
        mu, Q = mu[order], Q[:, order]
    else:
        raise ConfigurationError(f"unknown eigen method {method!r}")
    if not np.all(np.isfinite(mu)):
        raise NumericFailure("eigenvalues are not finite")
    V = Q / np.sqrt(op.weights)[:, None]
    pivot = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[pivot, np.arange(V.shape[1])])[None, :]
    return EigenSystem(mu=mu, vecs=V, mesh=op.domain, op=op)


def kernel_from_multiplier(es: EigenSystem, m: np.ndarray, **meta) -> KernelMatrix:
    """Kernel ``sum_k m_k v_k v_k^T`` for multiplier values ``m_k``."""
    m = np.asarray(m, dtype=float)
    return KernelMatrix((es.vecs * m) @ es.vecs.T, es.mesh, dict(meta))


def apply_function(es: EigenSystem, f: Callable[[np.ndarray], np.ndarray]) -> KernelMatrix:
    """Kernel of ``f(sqrt(-L))``."""
    lam = es.sqrt_mu
    vals = np.asarray(f(lam), dtype=float) * np.ones_like(lam)
    bad = ~np.isfinite(vals)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise NumericFailure(f"function is not finite at mu_{k} = {es.mu[k]!r}")
    return kernel_from_multiplier(es, vals)


def multiplier_values(es: EigenSystem, K: KernelMatrix) -> np.ndarray:
    """Diagonal of ``V^T W K W V``: the multiplier of a spectrally diagonal kernel."""
    WV = es.weights[:, None] * es.vecs
    return np.einsum("ik,ij,jk->k", WV, K.K, WV)


NORM_TYPES = ("1", "2", "inf", "2,inf", "1,2", "2,lip")


def _norm_key(p) -> str:
    if isinstance(p, tuple):
        p = ",".join(str(x) for x in p)
    key = str(p).lower().replace(" ", "").replace("(", "").replace(")", "")
    key = key.replace("infinity", "inf").replace("∞", "inf")
    if key in ("1.0", "1"):
        return "1"
    if key in ("2.0", "2"):
        return "2"
    return key


def operator_norm(K: KernelMatrix, p="2") -> float:
    """Weighted operator norms of the operator with kernel K.

    Supported: ``1``, ``2``, ``inf`` (= L^p -> L^p), ``(2, inf)``, ``(1, 2)`` and
    ``(2, lip)`` where the Lipschitz seminorm is taken over stencil edges.
    """
    key = _norm_key(p)
    w = K.weights
    A = K.K
    if key == "1":
        return float(np.max(np.sum(w[:, None] * np.abs(A), axis=0)))
    if key == "inf":
        return float(np.max(np.sum(np.abs(A) * w[None, :], axis=1)))
    if key == "2":
        sw = np.sqrt(w)
        return float(np.linalg.norm(sw[:, None] * A * sw[None, :], 2))
    if key == "2,inf":
        return float(np.sqrt(np.max(np.sum(A**2 * w[None, :], axis=1))))
    if key == "1,2":
        return float(np.sqrt(np.max(np.sum(w[:, None] * A**2, axis=0))))
    if key == "2,lip":
        e = K.mesh.edges
        if len(e) == 0:
            raise ConfigurationError("mesh has no edges")
        d = K.mesh.dist[e[:, 0], e[:, 1]]
        diff = A[e[:, 0]] - A[e[:, 1]]
        return float(np.max(np.sqrt(np.sum(diff**2 * w[None, :], axis=1)) / d))
    raise ConfigurationError(f"unsupported norm type {p!r}; expected one of {NORM_TYPES}")


def multiplier_norm(es: EigenSystem, m: np.ndarray, p="2") -> float:
    """L^2-based norms of ``sum_k m_k v_k v_k^T`` without forming the kernel.

    Uses weighted orthonormality: the squared weighted L^2 norm of row i is
    ``sum_k m_k^2 v_k(i)^2``.  Supports ``2``, ``(2, inf)``, ``(1, 2)`` and
    ``(2, lip)``; agrees with :func:`operator_norm` on the assembled kernel.
    """
    key = _norm_key(p)
    m2 = np.asarray(m, dtype=float) ** 2
    if key == "2":
        return float(np.sqrt(m2.max()))
    if key in ("2,inf", "1,2"):
        return float(np.sqrt(np.max((es.vecs**2) @ m2)))
    if key == "2,lip":
        e = es.mesh.edges
        d = es.mesh.dist[e[:, 0], e[:, 1]]
        dv = es.vecs[e[:, 0]] - es.vecs[e[:, 1]]
        return float(np.max(np.sqrt((dv**2) @ m2) / d))
    raise ConfigurationError(f"norm {p!r} needs the assembled kernel")
