import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multlab import ConfigurationError, OperatorSpec, assemble_operator, build_mesh, eigendecompose, laplacian
from multlab.discretize import (check_operator, dirichlet_stencil_eigenvalues, raised_cosine,
                                rescale_operator)


@pytest.mark.parametrize("dim,N", [(1, 21), (2, 11)])
def test_weights_sum_to_volume(dim, N):
    mesh = build_mesh(dim, 2.0, N)
    assert math.isclose(mesh.weights.sum(), 2.0**dim, rel_tol=1e-14)
    assert mesh.dist.shape == (mesh.n_nodes, mesh.n_nodes)


def test_mesh_rejects_bad_input():
    with pytest.raises(ConfigurationError):
        build_mesh(3, 1.0, 11)
    with pytest.raises(ConfigurationError):
        build_mesh(1, 1.0, 4)
    with pytest.raises(ConfigurationError):
        build_mesh(2, (1.0, 2.0), 11)
    with pytest.raises(ConfigurationError):
        build_mesh(1, -1.0, 11)


def test_operator_rejects_bad_coefficients():
    mesh = build_mesh(1, 1.0, 21)
    with pytest.raises(ConfigurationError):
        assemble_operator(mesh, OperatorSpec(bc="robin"))
    with pytest.raises(ConfigurationError):
        assemble_operator(mesh, OperatorSpec(a=1e-5))
    with pytest.raises(ConfigurationError):
        assemble_operator(mesh, OperatorSpec(H=-1.0))
    with pytest.raises(ConfigurationError):
        assemble_operator(mesh, OperatorSpec(a=lambda x: np.where(x[:, 0] > 0.5, np.nan, 1.0)))


def test_dirichlet_stencil_spectrum():
    op = laplacian(1, np.pi, 201)
    es = eigendecompose(op)
    exact = dirichlet_stencil_eigenvalues(199, op.mesh.spacing)
    assert np.max(np.abs(es.mu - exact) / exact) < 1e-10


def test_neumann_has_constants_in_kernel():
    op = laplacian(2, 1.0, 15, bc="neumann")
    assert np.max(np.abs(op.apply(np.ones(op.n)))) < 1e-12
    assert abs(eigendecompose(op).mu[0]) < 1e-10


def test_eigenvalues_converge_at_second_order():
    errs, hs = [], []
    for N in (51, 101, 201, 401):
        op = laplacian(1, np.pi, N)
        mu = eigendecompose(op).mu[:3]
        errs.append(np.max(np.abs(mu - np.array([1.0, 4.0, 9.0]))))
        hs.append(op.mesh.spacing)
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert 1.8 <= order <= 2.2


coef = st.floats(0.2, 3.0)


@given(a0=coef, a1=st.floats(-0.5, 0.5), H0=st.floats(0.0, 4.0),
       bc=st.sampled_from(["dirichlet", "neumann"]), dim=st.sampled_from([1, 2]))
def test_weighted_self_adjoint_and_semidefinite(a0, a1, H0, bc, dim):
    op = laplacian(dim, 1.0, 9 if dim == 2 else 25, bc=bc,
                   a=lambda x: a0 * (1 + a1 * np.sin(3 * x[:, 0])),
                   H=lambda x: H0 * np.cos(x[:, 0]) ** 2)
    rep = check_operator(op)
    assert rep["symmetry_residual"] < 1e-13
    assert rep["min_form"] >= -1e-9 * np.abs(op.matrix).max()


@given(r=st.sampled_from([0.5, 2.0, 4.0]), bc=st.sampled_from(["dirichlet", "neumann"]))
def test_scaling_law_is_exact_for_powers_of_two(r, bc):
    op = laplacian(1, np.pi, 41, bc=bc, H=lambda x: 1 + np.sin(3 * x[:, 0]) ** 2)
    mu = eigendecompose(op).mu
    mu_r = eigendecompose(rescale_operator(op, r)).mu
    assert np.max(np.abs(mu_r * r**2 - mu) / np.abs(mu)) <= 1e-12


def test_rescale_scales_geometry():
    op = laplacian(2, 1.0, 9)
    big = rescale_operator(op, 3.0)
    assert np.allclose(big.domain.weights, op.domain.weights * 9)
    assert np.allclose(big.domain.dist, op.domain.dist * 3)
    assert np.allclose(big.matrix * 9, op.matrix)
    with pytest.raises(ConfigurationError):
        rescale_operator(op, 0.0)


def test_raised_cosine_support():
    mesh = build_mesh(1, 1.0, 101)
    f = raised_cosine(mesh, [0.5], 0.1)
    d = np.abs(mesh.points[:, 0] - 0.5)
    assert np.all(f[d >= 0.1] == 0) and f.max() == 1.0


def test_endpoint_distance_is_the_length():
    mesh = build_mesh(1, 1.0, 9)
    assert mesh.dist[0, 8] == 1.0


def test_rescale_round_trip_and_identity():
    op = laplacian(2, 1.0, 9, H=lambda x: 1 + x[:, 0])
    back = rescale_operator(rescale_operator(op, 2.0), 0.5)
    assert np.max(np.abs(back.matrix - op.matrix)) <= 1e-12 * np.abs(op.matrix).max()
    assert np.array_equal(rescale_operator(op, 1.0).matrix, op.matrix)


def test_constant_potential_shifts_the_spectrum():
    mu0 = eigendecompose(laplacian(1, np.pi, 41)).mu
    mu1 = eigendecompose(laplacian(1, np.pi, 41, H=2.5)).mu
    assert np.max(np.abs(mu1 - mu0 - 2.5)) < 1e-10
