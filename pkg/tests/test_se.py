import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapgp.params import ParameterError
from gapgp.se import se, se_d1, se_d2, se_d4, se_gram

coord = st.floats(-2, 2)
theta = st.floats(0.05, 3)


def richardson(f, z, h, order):
    """Fourth-order stencils at h and h/2 combined by Richardson extrapolation."""

    def stencil(h):
        if order == 1:
            return (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h)
        return (-f(z + 2 * h) + 16 * f(z + h) - 30 * f(z) + 16 * f(z - h) - f(z - 2 * h)) / (12 * h * h)

    return (16 * stencil(h / 2) - stencil(h)) / 15


def test_value_convention():
    # exp(-d^2 / theta^2): no factor two in the denominator
    assert se(0.3, 0.0, 0.3) == pytest.approx(np.exp(-1.0))
    assert se(1.0, 1.0, 0.5) == 1.0


@given(coord, coord, theta)
def test_symmetry_and_bounds(a, b, th):
    v = se(a, b, th)
    assert v == se(b, a, th)
    assert 0.0 <= v <= 1.0


@given(coord, coord, theta)
def test_derivatives_against_finite_differences(z, z2, th):
    h = 0.05 * th
    assert se_d1(z, z2, th) == pytest.approx(richardson(lambda q: se(q, z2, th), z, h, 1), abs=1e-7)
    assert se_d2(z, z2, th) == pytest.approx(richardson(lambda q: se(q, z2, th), z, h, 2), abs=1e-6 / th**2)
    d4_fd = richardson(lambda q: se_d2(q, z2, th), z, h, 2)
    assert se_d4(z, z2, th) == pytest.approx(d4_fd, abs=1e-5 / th**4)


def test_derivative_values_at_coincident_points():
    th = 0.4
    assert se_d1(0.2, 0.2, th) == 0.0
    assert se_d2(0.2, 0.2, th) == pytest.approx(-2 / th**2)
    assert se_d4(0.2, 0.2, th) == pytest.approx(12 / th**4)


def test_broadcasting():
    a = np.linspace(0, 1, 4)[:, None]
    b = np.linspace(0, 1, 3)[None, :]
    assert se(a, b, 0.3).shape == (4, 3)
    assert se_d4(a, b, 0.3).shape == (4, 3)


@pytest.mark.parametrize("th", [0.0, -1.0])
def test_invalid_lengthscale(th):
    with pytest.raises(ParameterError):
        se(0.0, 1.0, th)


def test_gram_is_psd(rng):
    P = rng.random((60, 2))
    K = se_gram(P[:, 0], P[:, 1], P[:, 0], P[:, 1], 0.3, 0.3, sigma2=2.0)
    assert np.allclose(K, K.T)
    assert np.allclose(np.diag(K), 2.0)
    assert np.linalg.eigvalsh(K).min() > -1e-10
