import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import loggamma

from schwarzian.specfun import (
    PoleError,
    arccosh_sq,
    gamma_abs_sq_closed,
    gamma_quad,
    log_gamma_complex,
    log_gamma_quad,
)


def test_log_gamma_matches_scipy_on_strip():
    rng = np.random.default_rng(11)
    z = rng.uniform(0.05, 6.0, 500) + 1j * rng.uniform(-40.0, 40.0, 500)
    ours = log_gamma_complex(z)
    ref = loggamma(z)
    assert np.max(np.abs(ours.real - ref.real) / np.maximum(1.0, np.abs(ref.real))) < 1e-13
    # imaginary parts agree modulo 2 pi
    d = np.angle(np.exp(1j * (ours.imag - ref.imag)))
    assert np.max(np.abs(d)) < 1e-12


def test_log_gamma_left_half_plane():
    z = np.array([-0.3 + 0.7j, -2.5 + 0.1j, -4.2 - 3.0j, 0.2 + 0.0j])
    ref = loggamma(z)
    assert np.allclose(np.exp(log_gamma_complex(z)), np.exp(ref), rtol=1e-12)


def test_one_plus_i_closed_form():
    # |Gamma(1 + i)|^2 = pi / sinh(pi)
    val = math.exp(2.0 * log_gamma_complex(1.0 + 1.0j).real)
    assert val == pytest.approx(math.pi / math.sinh(math.pi), rel=1e-14)


def test_integer_values():
    for n in range(1, 12):
        assert log_gamma_complex(float(n)).real == pytest.approx(math.lgamma(n), abs=1e-13)


@pytest.mark.parametrize("z", [0.0, -1.0, -3.0])
def test_poles_rejected(z):
    with pytest.raises(PoleError):
        log_gamma_complex(z)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 8.0), st.floats(-30.0, 30.0))
def test_recurrence(x, y):
    z = complex(x, y)
    lhs = np.exp(log_gamma_complex(z + 1) - log_gamma_complex(z))
    assert abs(lhs - z) <= 1e-11 * abs(z)


def test_closed_form_integer_n2():
    assert float(gamma_abs_sq_closed(2, 1.0)) == pytest.approx(10.0 * math.pi / math.sinh(math.pi), rel=1e-14)


def test_closed_form_half_integer_zero():
    assert float(gamma_abs_sq_closed(0, 0.0, half=True)) == pytest.approx(math.pi, rel=1e-15)


def test_quad_l1_closed_form():
    k, w = 0.3, 0.7
    a, b = math.pi * (k + w), math.pi * (k - w)
    expected = (a / math.sinh(a)) * (b / math.sinh(b))
    assert float(gamma_quad(1.0, k, w)) == pytest.approx(expected, rel=1e-13)


def test_quad_symmetries():
    k, w = 1.7, -0.4
    base = log_gamma_quad(1.5, k, w)
    for kk, ww in ((w, k), (-k, w), (k, -w)):
        assert log_gamma_quad(1.5, kk, ww) == pytest.approx(base, abs=1e-12)


def test_quad_rejects_nonpositive_l():
    with pytest.raises(ValueError):
        log_gamma_quad(0.0, 1.0, 1.0)


def test_arccosh_sq_branches():
    x = np.linspace(1.0, 30.0, 50)
    assert np.allclose(arccosh_sq(x), np.arccosh(x) ** 2, rtol=1e-13)
    y = np.linspace(-0.999, 0.999, 50)
    assert np.allclose(arccosh_sq(y), -np.arccos(y) ** 2, rtol=1e-12)
    assert float(arccosh_sq(-1.0)) == pytest.approx(-math.pi**2, rel=1e-12)
    assert np.isrealobj(arccosh_sq(y))


def test_arccosh_sq_domain():
    with pytest.raises(ValueError):
        arccosh_sq(-1.5)


def test_arccosh_sq_complex_continuity():
    z0 = 0.3
    vals = [complex(arccosh_sq(z0 + 1j * e)) for e in (1e-7, -1e-7)]
    assert abs(vals[0] - vals[1]) < 1e-5
    assert abs(vals[0] - complex(arccosh_sq(z0))) < 1e-5
