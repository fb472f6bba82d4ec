import numpy as np
import pytest
from hypothesis import given, strategies as st

from multlab import ConfigurationError, NumericFailure, eigendecompose, laplacian, operator_norm
from multlab.discretize import dirichlet_stencil_eigenvalues
from multlab.eigen import (KernelMatrix, apply_function, identity_kernel, jacobi_eigh,
                           kernel_from_multiplier, multiplier_norm, multiplier_values)


def test_jacobi_matches_analytic_spectrum():
    op = laplacian(1, np.pi, 32)
    es = eigendecompose(op, method="jacobi")
    exact = dirichlet_stencil_eigenvalues(30, op.mesh.spacing)
    assert np.max(np.abs(es.mu - exact) / exact) < 1e-10
    assert es.orthonormality_residual() < 1e-12


def test_jacobi_agrees_with_lapack_on_2d():
    op = laplacian(2, 1.0, 8, bc="neumann", H=lambda x: 1 + x[:, 0] + 0.3 * x[:, 1] ** 2)
    a, b = eigendecompose(op, "jacobi"), eigendecompose(op)
    assert np.max(np.abs(a.mu - b.mu)) < 1e-10 * b.mu.max()
    # deterministic sign convention makes eigenvectors comparable
    assert np.max(np.abs(a.vecs - b.vecs)) < 1e-8


def test_jacobi_on_random_symmetric():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((12, 12))
    A = A + A.T
    mu, Q = jacobi_eigh(A)
    assert np.allclose(np.sort(mu), np.linalg.eigvalsh(A), atol=1e-12)
    assert np.allclose(Q @ np.diag(mu) @ Q.T, A, atol=1e-12)


def test_unknown_method():
    with pytest.raises(ConfigurationError):
        eigendecompose(laplacian(1, 1.0, 11), method="qr")


def test_orthonormality_and_reconstruction(es1d):
    assert es1d.orthonormality_residual() < 1e-9
    assert es1d.reconstruction_residual() < 1e-12


def test_multiplicativity(es1d_small):
    f = apply_function(es1d_small, lambda lam: np.exp(-lam**2))
    ff = apply_function(es1d_small, lambda lam: np.exp(-2 * lam**2))
    assert np.max(np.abs(f.compose(f).K - ff.K)) < 1e-8


def test_apply_function_rejects_nonfinite(es1d_small):
    with pytest.raises(NumericFailure, match="mu_"):
        apply_function(es1d_small, lambda lam: 1 / (lam - es1d_small.sqrt_mu[3]))


@given(seed=st.integers(0, 10_000))
def test_spectral_norms_match_dense(es1d_small, seed):
    m = np.random.default_rng(seed).uniform(-1, 1, es1d_small.mu.size)
    K = kernel_from_multiplier(es1d_small, m)
    assert abs(operator_norm(K, 2) - np.max(np.abs(m))) < 1e-10
    for p in ("2,inf", "1,2", "2,lip"):
        assert abs(multiplier_norm(es1d_small, m, p) - operator_norm(K, p)) < 1e-9 * operator_norm(K, p)
    assert np.allclose(multiplier_values(es1d_small, K), m, atol=1e-10)


def test_operator_norms_on_explicit_kernel():
    op = laplacian(1, 1.0, 11)
    mesh = op.domain
    w = mesh.weights
    rng = np.random.default_rng(0)
    K = KernelMatrix(rng.standard_normal((op.n, op.n)), mesh)
    T = K.operator_matrix()
    assert np.isclose(operator_norm(K, 1), np.max(np.abs(T).T @ w / w))
    assert np.isclose(operator_norm(K, "inf"), np.max(np.abs(T).sum(axis=1)))
    # 2 -> inf: sup_x ||K(x, .)||_{L^2}
    assert np.isclose(operator_norm(K, "2,inf"), np.max(np.sqrt((K.K**2) @ w)))
    # 1 -> 2: sup_y ||K(., y)||_{L^2}
    assert np.isclose(operator_norm(K, "1,2"), np.max(np.sqrt(w @ (K.K**2))))


def test_identity_kernel(es1d_small):
    I = identity_kernel(es1d_small.mesh)
    for p in ("1", "2", "inf"):
        assert abs(operator_norm(I, p) - 1) < 1e-12
    f = np.sin(es1d_small.mesh.points[:, 0])
    assert np.allclose(I.apply(f), f)


def test_unknown_norm(es1d_small):
    with pytest.raises(ConfigurationError):
        operator_norm(identity_kernel(es1d_small.mesh), "3,7")
