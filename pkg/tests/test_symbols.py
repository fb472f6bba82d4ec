import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from multlab import ConfigurationError, CutoffSpec, builtin_symbols, get_symbol, symbol_tables
from multlab.symbols import (SQ2_PI, bessel_J, bessel_J0, fhat_function, fourier_transform,
                             numeric_cosine_transform, psi_certificate, s01_certificate, split)


def _log_oscillation_fhat_mp(gamma, t):
    """Cosine transform of cos(gamma log(1 + lam^2)) in extended precision."""
    mpmath.mp.dps = 30
    g = mpmath.mpf(gamma)
    nu = mpmath.mpf(1) / 2 + 1j * g
    val = (mpmath.sqrt(mpmath.pi) / mpmath.gamma(-1j * g)) * (mpmath.mpf(t) / 2) ** (-1j * g - mpmath.mpf(1) / 2) \
        * mpmath.besselk(nu, t)
    return float(mpmath.sqrt(2 / mpmath.pi) * mpmath.re(val))


def _fhat_by_parts(gamma, t):
    """sqrt(2/pi) int phi cos(t lam), integrated by parts twice: -(1/t^2) int phi'' cos."""

    def d2(lam):
        ell = math.log1p(lam * lam)
        d1 = 2 * lam / (1 + lam * lam)
        dd = 2 * (1 - lam * lam) / (1 + lam * lam) ** 2
        return -gamma**2 * math.cos(gamma * ell) * d1**2 - gamma * math.sin(gamma * ell) * dd

    head = integrate.quad(lambda x: d2(x) * math.cos(t * x), 0, 40, limit=400, epsabs=1e-13)[0]
    tail = integrate.quad(d2, 40, np.inf, weight="cos", wvar=t, limlst=400)[0]
    return -SQ2_PI * (head + tail) / t**2


@pytest.mark.parametrize("gamma", [0.5, 1.0])
def test_log_oscillation_transform_against_mpmath(gamma):
    sym = get_symbol(f"log-oscillation-{gamma:g}")
    t = np.array([1e-3, 0.05, 0.3, 1.0, 2.5, 7.0])
    ours = sym.fhat_closed(t)
    ref = np.array([_log_oscillation_fhat_mp(gamma, x) for x in t])
    assert np.max(np.abs(ours - ref) / np.maximum(np.abs(ref), 1e-3)) < 1e-12


@pytest.mark.parametrize("gamma", [0.5, 1.0])
def test_log_oscillation_transform_by_parts(gamma):
    sym = get_symbol(f"log-oscillation-{gamma:g}")
    for t in (0.4, 1.0, 3.0):
        assert abs(sym.fhat_closed(np.array([t]))[0] - _fhat_by_parts(gamma, t)) < 1e-9


@pytest.mark.parametrize("name", ["rational", "gaussian"])
def test_closed_form_matches_numeric_transform(name):
    sym = get_symbol(name)
    t = np.array([0.0, 0.1, 0.7, 2.0, 5.0])
    assert np.max(np.abs(sym.fhat_closed(t) - numeric_cosine_transform(sym, t))) < 1e-8


def test_inverse_sqrt_against_scipy():
    sym = get_symbol("inverse-sqrt")
    t = np.array([0.01, 0.5, 3.0])
    # K_0(t) = int_0^inf cos(t s) / sqrt(1 + s^2) ds
    ref = [SQ2_PI * integrate.quad(lambda s: 1 / math.sqrt(1 + s * s), 0, np.inf,
                                   weight="cos", wvar=x)[0] for x in t]
    assert np.allclose(sym.fhat_closed(t), ref, atol=1e-9)


def test_slow_symbols_need_closed_forms():
    with pytest.raises(ConfigurationError):
        numeric_cosine_transform(get_symbol("inverse-sqrt"), [1.0])
    with pytest.raises(ConfigurationError):
        fhat_function(get_symbol("inverse-sqrt"), method="bogus")
    with pytest.raises(ConfigurationError):
        get_symbol("no-such-symbol")


def test_gaussian_inversion():
    tab = fourier_transform(get_symbol("gaussian"))
    lam = np.linspace(0, 6, 25)
    pos = tab.tgrid > 0
    back = SQ2_PI * np.cos(np.outer(lam, tab.tgrid[pos])) @ (tab.fhat[pos] * tab.dt)
    assert np.max(np.abs(back - np.exp(-lam**2))) < 1e-7


@given(a=st.floats(0.2, 5.0), t=st.floats(-10, 10))
def test_cutoff_shape(a, t):
    cut = CutoffSpec(a)
    v = float(cut(t))
    assert 0.0 <= v <= 1.0
    assert v == float(cut(-t))
    if abs(t) <= a / 2:
        assert v == 1.0
    if abs(t) >= a:
        assert v == 0.0


def test_cutoff_monotone_and_infinite():
    cut = CutoffSpec(1.0)
    t = np.linspace(0.5, 1.0, 1001)
    assert np.all(np.diff(cut(t)) <= 0)
    assert np.all(CutoffSpec(np.inf)(np.array([0.0, 100.0])) == 1.0)
    with pytest.raises(ConfigurationError):
        CutoffSpec(0.0)


@pytest.fixture(scope="module")
def rational_tables():
    return symbol_tables(get_symbol("rational"))


def test_split_is_exact(rational_tables):
    tab = rational_tables
    assert np.array_equal(tab.fhat_sharp + tab.fhat_flat, tab.fhat)
    assert np.all(tab.fhat_sharp[np.abs(tab.tgrid) >= 1.0] == 0)


def test_psi_vanishes_outside_cutoff(rational_tables):
    tab = rational_tables
    for k, f in tab.psi.items():
        assert np.all(f[tab.tlog > tab.cut.a] == 0.0)


def test_psi_certificate_grid_stable(rational_tables):
    cert = psi_certificate(rational_tables)
    for k in (1, 2, 3):
        assert np.isfinite(cert[k]["sup"]) and cert[k]["rel_change"] <= 0.05


def test_split_requires_window():
    tab = fourier_transform(get_symbol("gaussian"), T=8.0)
    with pytest.raises(ConfigurationError):
        split(tab, CutoffSpec(9.0))


@pytest.mark.parametrize("sym", builtin_symbols(), ids=lambda s: s.name)
def test_symbols_are_in_s01(sym):
    cert = s01_certificate(sym)
    assert all(np.isfinite(v) and v < 10 for v in cert.values())


def _bessel_by_quadrature(k, x):
    # x^{-nu} J_nu(x) = int_0^1 (1 - s^2)^{nu - 1/2} cos(x s) ds * 2 / (2^nu Gamma(nu + 1/2) sqrt(pi))
    nu = k - 0.5
    val = integrate.quad(lambda s: (1 - s * s) ** (k - 1), 0, 1, weight="cos", wvar=x)[0]
    return 2 * val / (2**nu * math.gamma(k) * math.sqrt(math.pi))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_normalized_bessel_against_quadrature(k):
    x = np.linspace(0, 50, 201)
    ref = np.array([_bessel_by_quadrature(k, v) for v in x])
    assert np.max(np.abs(bessel_J(k, x) - ref)) < 1e-8
    xs = x[x > 0]
    sph = SQ2_PI * special.spherical_jn(k - 1, xs) / xs ** (k - 1)
    assert np.max(np.abs(bessel_J(k, xs) - sph)) < 1e-12
    assert math.isclose(bessel_J0(k), SQ2_PI / special.factorial2(2 * k - 1), rel_tol=1e-14)


def test_bessel_order_range():
    with pytest.raises(ConfigurationError):
        bessel_J(5, [1.0])
