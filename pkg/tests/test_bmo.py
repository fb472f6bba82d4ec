import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multlab import ConfigurationError, eigendecompose, get_symbol, laplacian, operator_norm
from multlab.bmo import (ALLOWED_P, BmoConfig, ball_report, bmo_norm, bmo_profile, default_corpus,
                         epsilon_independence_check, interpolation_upper_bound, linf_corpus,
                         linf_to_bmo_norm, lp_norms)
from multlab.eigen import apply_function, identity_kernel
from multlab.semigroups import heat_kernel


@pytest.mark.parametrize("variant", ["heat", "average"])
def test_constants_have_zero_oscillation(es1d_neumann_small, variant):
    ones = np.full(es1d_neumann_small.mesh.n_nodes, 3.7)
    assert bmo_norm(es1d_neumann_small, ones, BmoConfig(0.5, variant)) == 0.0


def test_average_variant_kills_constants_under_dirichlet(es1d_small):
    ones = np.ones(es1d_small.mesh.n_nodes)
    assert bmo_norm(es1d_small, ones, BmoConfig(0.5, "average")) == 0.0


def test_radius_grid_and_bad_config(es1d_small):
    h = es1d_small.mesh.spacing
    r = BmoConfig(10 * h).radius_grid(es1d_small.mesh)
    assert np.allclose(r, h * np.arange(2, 11))
    with pytest.raises(ConfigurationError):
        BmoConfig(h).radius_grid(es1d_small.mesh)
    with pytest.raises(ConfigurationError):
        BmoConfig(0.5, "median").radius_grid(es1d_small.mesh)


@given(e1=st.floats(0.07, 1.0), e2=st.floats(0.07, 1.0), variant=st.sampled_from(["heat", "average"]))
def test_bmo_is_monotone_in_epsilon(es1d_small, e1, e2, variant):
    f = np.sign(np.sin(3 * es1d_small.mesh.points[:, 0]))
    lo, hi = sorted((e1, e2))
    assert bmo_norm(es1d_small, f, BmoConfig(lo, variant)) <= bmo_norm(es1d_small, f, BmoConfig(hi, variant))


@given(seed=st.integers(0, 1000))
def test_heat_bmo_is_bounded_by_sup_norm(es1d_small, seed):
    f = np.random.default_rng(seed).uniform(-1, 1, es1d_small.mesh.n_nodes)
    cfg = BmoConfig(0.3)
    radii = cfg.radius_grid(es1d_small.mesh)
    smoothing = max(operator_norm(heat_kernel(es1d_small, r * r), "inf") for r in radii)
    assert bmo_norm(es1d_small, f, cfg) <= (1 + smoothing) * np.max(np.abs(f)) + 1e-12


def test_profile_and_matrix_input(es1d_small):
    corpus = default_corpus(es1d_small.mesh, n_smooth=3, n_rough=5)
    assert len(corpus) == 8
    F = np.stack(list(corpus.values()), axis=1)
    cfg = BmoConfig(0.4)
    vals = bmo_norm(es1d_small, F, cfg)
    singles = [bmo_norm(es1d_small, F[:, j], cfg) for j in range(F.shape[1])]
    assert np.allclose(vals, singles, rtol=0, atol=1e-14)
    assert bmo_profile(es1d_small, F, cfg).shape == (len(cfg.radius_grid(es1d_small.mesh)), 8)


def test_corpora_are_reproducible(es1d_small):
    a = default_corpus(es1d_small.mesh, seed=4)
    b = default_corpus(es1d_small.mesh, seed=4)
    assert all(np.array_equal(a[k], b[k]) for k in a)
    lc = linf_corpus(es1d_small.mesh, es1d_small, 64)
    assert len(lc) >= 64 and {kind for kind, _ in lc.values()} >= {"cells", "bump", "eigvec"}
    with pytest.raises(ConfigurationError):
        linf_corpus(es1d_small.mesh, trials=10)


def test_epsilon_independence(es1d_small):
    corpus = default_corpus(es1d_small.mesh, n_smooth=5)
    rep = epsilon_independence_check(es1d_small, corpus, 0.35**2)
    assert rep.min_ratio >= 1 - 1e-12 and rep.passed
    with pytest.raises(ConfigurationError):
        epsilon_independence_check(es1d_small, corpus, 4.0)


def test_linf_to_bmo_of_identity(es1d_small):
    est = linf_to_bmo_norm(es1d_small, identity_kernel(es1d_small.mesh), BmoConfig(0.5))
    assert 0 < est.value <= 2 + 1e-12
    assert est.argmax in linf_corpus(es1d_small.mesh, es1d_small)


def test_lp_norms_of_identity(es1d_small):
    rows = lp_norms(identity_kernel(es1d_small.mesh))
    assert [r["p"] for r in rows] == [float(p) for p in ALLOWED_P]
    for r in rows:
        assert r["lower"] == pytest.approx(1.0, abs=1e-12)
        assert r["upper"] == pytest.approx(1.0, abs=1e-12)


def test_lp_norms_of_a_multiplier(es1d_small):
    sym = get_symbol("rational")
    K = apply_function(es1d_small, sym)
    rows = {r["p"]: r for r in lp_norms(K)}
    assert abs(rows[2.0]["lower"] - np.max(np.abs(sym(es1d_small.sqrt_mu)))) < 1e-10
    assert rows[1.0]["lower"] == operator_norm(K, "1")
    for p in (1.5, 3.0, 4.0, 6.0):
        assert rows[p]["lower"] <= rows[p]["upper"] * (1 + 1e-12)
    with pytest.raises(ConfigurationError):
        lp_norms(K, [2.5])


@given(n1=st.floats(0.1, 10), n2=st.floats(0.1, 10), ninf=st.floats(0.1, 10),
       p=st.sampled_from([1.5, 3.0, 4.0, 6.0]))
def test_interpolation_bound_is_between_endpoints(n1, n2, ninf, p):
    b = interpolation_upper_bound(n1, n2, ninf, p)
    assert b <= max(n1, n2, ninf) * (1 + 1e-12)
    assert b <= n1 ** (1 / p) * ninf ** (1 - 1 / p) * (1 + 1e-12)
    assert interpolation_upper_bound(n1, n2, ninf, math.inf) == ninf


def test_neumann_2d_constants():
    es = eigendecompose(laplacian(2, 1.0, 15, bc="neumann"))
    assert bmo_norm(es, np.ones(es.mesh.n_nodes), BmoConfig(0.3)) == 0.0


def test_first_eigenvector_closed_form(es1d_small):
    # e^{r^2 L} v = e^{-r^2 mu} v, so the oscillation is |v| (1 - e^{-r^2 mu}) ball by ball
    es = es1d_small
    v = es.vecs[:, 0]
    cfg = BmoConfig(0.4)
    x, w, h = es.mesh.points[:, 0], es.weights, es.mesh.spacing
    best = 0.0
    for r in cfg.radius_grid(es.mesh):
        g = np.abs(v) * (1 - np.exp(-r * r * es.mu[0]))
        for c in x:
            b = np.abs(x - c) <= r + 1e-12 * h
            best = max(best, np.sum(w[b] * g[b]) / np.sum(w[b]))
    assert abs(bmo_norm(es, v, cfg) - best) < 1e-12 * best


def test_heat_smoothing_lowers_the_estimate(es1d_small):
    vals = [linf_to_bmo_norm(es1d_small, heat_kernel(es1d_small, t), BmoConfig(0.5)).value
            for t in (0.05, 0.1, 0.4)]
    assert np.all(np.isfinite(vals)) and vals[0] > vals[1] > vals[2]


def test_ball_report(es1d_small):
    f = np.sign(np.sin(3 * es1d_small.mesh.points[:, 0]))
    cfg = BmoConfig(0.3, "average")
    rows = ball_report(es1d_small, f, cfg)
    assert len(rows) == len(cfg.radius_grid(es1d_small.mesh))
    assert max(r["oscillation"] for r in rows) == bmo_norm(es1d_small, f, cfg)
    full = ball_report(es1d_small, f, cfg, every_center=True)
    assert len(full) == len(rows) * es1d_small.mesh.n_nodes
