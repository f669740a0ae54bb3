import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as npcheb
from scipy.integrate import quad

from piegalerkin import chebyshev as cb
from piegalerkin.errors import InputError

series = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=12).map(np.array)
points = np.linspace(-1, 1, 17)


def assert_series_close(a, b, atol):
    """Compare series up to trailing zeros (numpy trims them)."""
    n = max(len(a), len(b))
    np.testing.assert_allclose(cb.pad(a, n), cb.pad(b, n), atol=atol)


@given(series)
def test_eval_matches_numpy(c):
    np.testing.assert_allclose(cb.cheb_eval(c, points), npcheb.chebval(points, c), atol=1e-11)


@given(series, series)
def test_product_matches_numpy(a, b):
    assert_series_close(cb.cheb_product(a, b), npcheb.chebmul(a, b), 1e-10)


@given(series)
def test_mul_x_matches_numpy(c):
    assert_series_close(cb.cheb_mul_x(c), npcheb.chebmulx(c), 1e-12)


@given(series)
def test_indefinite_integral_vanishes_at_left_end(c):
    F = cb.cheb_integrate_indefinite(c)
    assert len(F) == len(c) + 1
    assert_series_close(F, npcheb.chebint(c, lbnd=-1), 1e-11)
    assert abs(cb.cheb_eval(F, -1.0)) < 1e-11


@given(series)
def test_differentiate_undoes_integrate(c):
    back = cb.cheb_differentiate(cb.cheb_integrate_indefinite(c))
    assert_series_close(back, c, 1e-11)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_differentiate_matches_numpy(m):
    c = np.random.default_rng(m).standard_normal(10)
    np.testing.assert_allclose(cb.cheb_differentiate(c, m), npcheb.chebder(c, m), atol=1e-10)


def test_definite_integral_against_quad():
    c = np.array([0.3, -1.0, 2.0, 0.5, -0.25])
    ref = quad(lambda x: npcheb.chebval(x, c), -1, 1)[0]
    assert cb.cheb_integrate_definite(c) == pytest.approx(ref, abs=1e-14)


def test_transform_reproduces_polynomials():
    c = np.array([1.0, -2.0, 0.5, 0.25, 3.0])
    got = cb.cheb_transform(lambda x: npcheb.chebval(x, c), 8)
    np.testing.assert_allclose(got[:5], c, atol=1e-14)
    np.testing.assert_allclose(got[5:], 0.0, atol=1e-14)


def test_transform_converges_spectrally():
    c = cb.cheb_transform(np.exp, 20)
    x = np.linspace(-1, 1, 101)
    assert np.max(np.abs(cb.cheb_eval(c, x) - np.exp(x))) < 1e-14


def test_lobatto_points_are_symmetric():
    x = cb.lobatto_points(9)
    assert x[0] == 1.0 and x[-1] == -1.0
    np.testing.assert_array_equal(x, -x[::-1])


def test_inner_product_weights_against_quad():
    w = cb.cheb_inner_product_weights(4)
    for k in range(5):
        ref = quad(lambda t: np.cos(k * t) ** 2, 0, np.pi)[0]  # x = cos t
        assert w[k] == pytest.approx(ref, rel=1e-12)


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=8))
@settings(max_examples=50)
def test_monomial_to_cheb_matches_numpy(p):
    assert_series_close(cb.monomial_to_cheb(p), npcheb.poly2cheb(p), 1e-10)


def test_negative_degree_rejected():
    with pytest.raises(InputError):
        cb.cheb_transform(np.sin, -1)
    with pytest.raises(InputError):
        cb.cheb_inner_product_weights(-1)


def test_nonfinite_samples_rejected():
    with pytest.raises(InputError):
        cb.cheb_transform(lambda x: np.full_like(x, np.nan), 4)
