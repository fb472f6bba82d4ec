"""Uniform meshes of intervals/rectangles and the operator -L = D*D + H on them.

Functions on a mesh are plain 1-D numpy arrays indexed by node.  Integrals are
taken against the per-node quadrature weights (tensor trapezoid rule), so the
discrete L^2 pairing is ``<f, g>_w = sum(w * f * g)``.

The first-order operator D acts on edges: ``(Du)_e = a_e (u_j - u_i) / h``.
With edge dual measures ``m_e`` the quadratic form is ``sum_e m_e |(Du)_e|^2``,
which gives ``-L = W^{-1} G + diag(H)`` with ``G = D^T diag(m) D``.  Dirichlet
conditions drop the boundary nodes; Neumann conditions keep them, and the
half-cell weights at the boundary reproduce the mirror-ghost closure.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .errors import ConfigurationError

FieldSpec = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray]]

A_BOUNDS = (1e-3, 1e3)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Nodes of a uniform grid together with weights, distances and edges.

    ``edges`` holds index pairs of stencil neighbours, ``edge_axis`` the axis
    each edge is aligned with and ``edge_measure`` its dual volume.  A mesh
    obtained from :meth:`restrict` keeps only the listed nodes and the edges
    between them; ``grid_index`` still refers to the parent grid.
    """

    dim: int
    lengths: tuple
    shape: tuple
    spacing: float
    points: np.ndarray
    weights: np.ndarray
    boundary_mask: np.ndarray
    grid_index: np.ndarray
    edges: np.ndarray
    edge_axis: np.ndarray
    edge_measure: np.ndarray
    dist: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.weights)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def diameter(self) -> float:
        return float(np.hypot.reduce(np.asarray(self.lengths, dtype=float)))

    def inner(self, f, g) -> float:
        return float(np.sum(self.weights * f * g))

    def norm(self, f, p=2) -> float:
        f = np.abs(np.asarray(f))
        if p == np.inf:
            return float(f.max())
        return float(np.sum(self.weights * f**p) ** (1.0 / p))

    def center_index(self) -> int:
        """Node closest to the geometric center of the domain."""
        c = 0.5 * (self.points.min(axis=0) + self.points.max(axis=0))
        return int(np.argmin(np.sum((self.points - c) ** 2, axis=1)))

    def nearest(self, x) -> int:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return int(np.argmin(np.sum((self.points - x) ** 2, axis=1)))

    def restrict(self, nodes) -> "Mesh":
        nodes = np.asarray(nodes)
        if nodes.dtype == bool:
            nodes = np.flatnonzero(nodes)
        local = -np.ones(self.n_nodes, dtype=int)
        local[nodes] = np.arange(len(nodes))
        keep = (local[self.edges[:, 0]] >= 0) & (local[self.edges[:, 1]] >= 0)
        return replace(
            self,
            points=self.points[nodes],
            weights=self.weights[nodes],
            boundary_mask=self.boundary_mask[nodes],
            grid_index=self.grid_index[nodes],
            edges=local[self.edges[keep]],
            edge_axis=self.edge_axis[keep],
            edge_measure=self.edge_measure[keep],
            dist=self.dist[np.ix_(nodes, nodes)],
        )

    def scaled(self, r: float) -> "Mesh":
        n = self.dim
        return replace(
            self,
            lengths=tuple(r * L for L in self.lengths),
            spacing=self.spacing * r,
            points=self.points * r,
            weights=self.weights * r**n,
            edge_measure=self.edge_measure * r**n,
            dist=self.dist * r,
        )


def build_mesh(dim: int, length, N) -> Mesh:
    """Uniform grid on ``[0, L_1] x ... x [0, L_dim]`` with N points per axis.

    Boundary nodes are included; the weights are the tensor trapezoid weights
    (``h^n`` in the interior, halved once per boundary axis), so they sum to the
    domain volume.  ``dist`` is the Euclidean distance, which is the geodesic
    distance of the (convex) domain.
    """
    if dim not in (1, 2):
        raise ConfigurationError(f"dim must be 1 or 2, got {dim}")
    lengths = tuple(float(x) for x in np.broadcast_to(np.asarray(length, float), (dim,)))
    counts = tuple(int(x) for x in np.broadcast_to(np.asarray(N), (dim,)))
    if any(L <= 0 or not np.isfinite(L) for L in lengths):
        raise ConfigurationError(f"lengths must be positive, got {lengths}")
    if any(c < 8 for c in counts):
        raise ConfigurationError(f"need at least 8 points per axis, got {counts}")
    hs = [L / (c - 1) for L, c in zip(lengths, counts)]
    if max(hs) - min(hs) > 1e-12 * max(hs):
        raise ConfigurationError(f"grid spacing must be isotropic, got {hs}")
    h = hs[0]

    axes = [np.arange(c) for c in counts]
    idx = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    points = idx * h
    axis_w = []
    for c in counts:
        w = np.full(c, h)
        w[0] = w[-1] = h / 2
        axis_w.append(w)
    weights = np.ones(len(idx))
    boundary = np.zeros(len(idx), dtype=bool)
    for a, c in enumerate(counts):
        weights = weights * axis_w[a][idx[:, a]]
        boundary |= (idx[:, a] == 0) | (idx[:, a] == c - 1)
    # restore exact endpoint coordinates (avoid i*h drift at the far end)
    for a, L in enumerate(lengths):
        points[idx[:, a] == counts[a] - 1, a] = L

    flat = np.arange(len(idx)).reshape(counts)
    edges, edge_axis, edge_measure = [], [], []
    for a in range(dim):
        lo = np.take(flat, np.arange(counts[a] - 1), axis=a).ravel()
        hi = np.take(flat, np.arange(1, counts[a]), axis=a).ravel()
        cross = np.ones(len(lo))
        for b in range(dim):
            if b != a:
                cross = cross * axis_w[b][idx[lo, b]]
        edges.append(np.stack([lo, hi], axis=1))
        edge_axis.append(np.full(len(lo), a))
        edge_measure.append(h * cross)
    return Mesh(
        dim=dim,
        lengths=lengths,
        shape=counts,
        spacing=h,
        points=points,
        weights=weights,
        boundary_mask=boundary,
        grid_index=idx,
        edges=np.concatenate(edges),
        edge_axis=np.concatenate(edge_axis),
        edge_measure=np.concatenate(edge_measure),
        dist=cdist(points, points),
    )


@dataclass(frozen=True)
class OperatorSpec:
    """Coefficients of ``-L = D*D + H``.

    ``a`` is the edge coefficient of D (wave speed), ``H`` the nonnegative
    potential; each may be a constant, an array (per edge / per mesh node) or
    a callable evaluated at edge midpoints / node coordinates.
    """

    bc: str = "dirichlet"
    a: FieldSpec = 1.0
    H: FieldSpec = 0.0
    scale: float = 1.0


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """The matrix of L on the active nodes (all nodes for Neumann).

    ``domain`` is the mesh restricted to the active nodes; every field and
    kernel built from this operator lives on ``domain``.
    """

    matrix: np.ndarray
    mesh: Mesh
    spec: OperatorSpec
    nodes: np.ndarray
    domain: Mesh
    stiffness: np.ndarray = field(repr=False)
    potential: np.ndarray = field(repr=False)
    edge_a: np.ndarray = field(repr=False)
    sparse: sp.csr_matrix = field(repr=False)

    @property
    def weights(self) -> np.ndarray:
        return self.domain.weights

    @property
    def speed(self) -> float:
        return float(np.max(self.edge_a))

    @property
    def n(self) -> int:
        return len(self.nodes)

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.sparse @ u

    def symmetric_form(self) -> np.ndarray:
        """``W^{1/2} (-L) W^{-1/2}``, symmetric by construction.

        Weights are normalized by their maximum first, so a rescaling by a power
        of two changes the result by an exact power of two.
        """
        wmax = float(np.max(self.weights))
        s = 1.0 / np.sqrt(self.weights / wmax)
        S = (self.stiffness / wmax) * s[:, None] * s[None, :]
        S = 0.5 * (S + S.T)
        S[np.diag_indices_from(S)] += self.potential
        return S

    def shifted(self, c: float) -> "DiscreteOperator":
        """Operator with ``H`` replaced by ``H + c``."""
        H = self.potential + c
        return _finish(self.mesh, replace(self.spec), self.nodes, self.domain,
                       self.stiffness, H, self.edge_a)


def _resolve(spec_value: FieldSpec, at: np.ndarray, n: int, what: str) -> np.ndarray:
    if callable(spec_value):
        out = np.asarray(spec_value(at), dtype=float)
    else:
        out = np.asarray(spec_value, dtype=float)
    out = np.broadcast_to(out, (n,)).astype(float)
    if not np.all(np.isfinite(out)):
        raise ConfigurationError(f"{what} has non-finite values")
    return out


def _finish(mesh, spec, nodes, domain, G, H, edge_a) -> DiscreteOperator:
    w = domain.weights
    Lmat = -(G / w[:, None]) - np.diag(H)
    return DiscreteOperator(
        matrix=Lmat, mesh=mesh, spec=spec, nodes=nodes, domain=domain,
        stiffness=G, potential=H, edge_a=edge_a, sparse=sp.csr_matrix(Lmat),
    )


def assemble_operator(mesh: Mesh, spec: OperatorSpec) -> DiscreteOperator:
    """Assemble L for ``-L = D*D + H`` with Dirichlet or Neumann closure."""
    bc = spec.bc.lower()
    if bc not in ("dirichlet", "neumann"):
        raise ConfigurationError(f"unknown boundary condition {spec.bc!r}")
    mid = 0.5 * (mesh.points[mesh.edges[:, 0]] + mesh.points[mesh.edges[:, 1]])
    a = _resolve(spec.a, mid, len(mesh.edges), "a")
    if a.min() < A_BOUNDS[0] or a.max() > A_BOUNDS[1]:
        raise ConfigurationError(
            f"edge coefficient outside ellipticity bounds {A_BOUNDS}: "
            f"[{a.min():g}, {a.max():g}]")
    H_full = _resolve(spec.H, mesh.points, mesh.n_nodes, "H")
    if H_full.min() < 0:
        raise ConfigurationError("potential H must be nonnegative")
    if spec.scale <= 0:
        raise ConfigurationError("scale must be positive")

    h = mesh.spacing
    e0, e1 = mesh.edges[:, 0], mesh.edges[:, 1]
    c = a**2 * mesh.edge_measure / h**2
    N = mesh.n_nodes
    G = sp.coo_matrix((np.concatenate([c, c, -c, -c]),
                       (np.concatenate([e0, e1, e0, e1]),
                        np.concatenate([e0, e1, e1, e0]))), shape=(N, N)).toarray()
    if bc == "dirichlet":
        nodes = np.flatnonzero(~mesh.boundary_mask)
    else:
        nodes = np.arange(N)
    domain = mesh.restrict(nodes)
    G = G[np.ix_(nodes, nodes)]
    touching = np.isin(e0, nodes) | np.isin(e1, nodes)
    op = _finish(mesh, replace(spec, scale=1.0), nodes, domain, G, H_full[nodes],
                 a[touching])
    if spec.scale != 1.0:
        op = rescale_operator(op, spec.scale)
    return op


def rescale_operator(op: DiscreteOperator, r: float) -> DiscreteOperator:
    """Operator on the metric scaled by ``r``: L -> L / r^2, w -> r^n w, d -> r d."""
    if not r > 0:
        raise ConfigurationError(f"scale factor must be positive, got {r}")
    n = op.mesh.dim
    mesh = op.mesh.scaled(r)
    domain = op.domain.scaled(r)
    G = op.stiffness * r ** (n - 2)
    H = op.potential / r**2
    spec = replace(op.spec, scale=op.spec.scale * r)
    return _finish(mesh, spec, op.nodes, domain, G, H, op.edge_a)


def laplacian(dim=1, length=np.pi, N=201, bc="dirichlet", **kw) -> DiscreteOperator:
    """Convenience wrapper: mesh plus operator in one call."""
    return assemble_operator(build_mesh(dim, length, N), OperatorSpec(bc=bc, **kw))


def dirichlet_stencil_eigenvalues(n_interior: int, h: float) -> np.ndarray:
    """Exact spectrum of the 3-point Dirichlet stencil: (4/h^2) sin^2(k h' / 2)."""
    k = np.arange(1, n_interior + 1)
    return 4.0 / h**2 * np.sin(k * np.pi / (2 * (n_interior + 1))) ** 2


def check_operator(op: DiscreteOperator, n_random: int = 100, seed: int = 0) -> dict:
    """Residuals of weighted self-adjointness and semidefiniteness."""
    w = op.weights
    WL = w[:, None] * op.matrix
    sym = float(np.max(np.abs(WL - WL.T)) / max(np.max(np.abs(WL)), 1e-300))
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((op.n, n_random))
    forms = np.sum(w[:, None] * F * (-op.matrix @ F), axis=0)
    return {"symmetry_residual": sym, "min_form": float(forms.min())}


def raised_cosine(mesh: Mesh, center, radius: float) -> np.ndarray:
    """Bump ``(1 + cos(pi d / R)) / 2`` supported in the closed ball of radius R."""
    c = np.atleast_1d(np.asarray(center, float))
    d = np.sqrt(np.sum((mesh.points - c) ** 2, axis=1))
    return np.where(d < radius, 0.5 * (1 + np.cos(np.pi * d / radius)), 0.0)
