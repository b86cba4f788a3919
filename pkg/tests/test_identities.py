import math

import pytest

from schwarzian.identities import (
    check_sampled_bounds,
    check_arccosh_expansion,
    check_gamma_closed_forms,
    check_gamma_fourier_2d,
    check_sinh_ratio_fourier,
    run_identity_suite,
)


def test_arccosh_expansion_trivial_z():
    r = check_arccosh_expansion(0.0, 0.4, 0.3)
    assert r.lhs == pytest.approx(math.cos(0.12)) and r.passed


@pytest.mark.parametrize("beta", [0.0, 0.3])
def test_arccosh_expansion(beta):
    r = check_arccosh_expansion(0.5, 0.4, beta, L=30)
    assert r.rel_diff <= 1e-6


def test_arccosh_expansion_negative_z():
    # here cosh(beta/2) - z > 1 and the square root is real
    assert check_arccosh_expansion(-1.2, 0.3, 0.8).rel_diff <= 1e-6


def test_arccosh_expansion_truncation_robust():
    a = check_arccosh_expansion(0.5, 0.4, 0.3, L=30)
    b = check_arccosh_expansion(0.5, 0.4, 0.3, L=45)
    assert abs(a.rhs - b.rhs) < 0.1 * 1e-6 * abs(a.lhs)


def test_arccosh_expansion_domain():
    with pytest.raises(ValueError):
        check_arccosh_expansion(2.0, 0.4, 0.3)


def test_gamma_fourier_trivial():
    r = check_gamma_fourier_2d(1.0, 0.0, 0.0)
    assert r.lhs == pytest.approx(1.0, rel=1e-13) and r.passed


def test_gamma_fourier_generic():
    r = check_gamma_fourier_2d(1.0, 0.3, 0.7)
    assert r.rel_diff <= 1e-6
    imag = float(r.detail.split("imag=")[1])
    assert abs(imag) < 1e-12


def test_gamma_fourier_swap_symmetry():
    assert check_gamma_fourier_2d(1.0, 0.3, 0.7).rhs == pytest.approx(check_gamma_fourier_2d(1.0, 0.7, 0.3).rhs, rel=1e-12)


def test_gamma_fourier_box_robust():
    a = check_gamma_fourier_2d(1.0, 0.3, 0.7)
    b = check_gamma_fourier_2d(1.0, 0.3, 0.7, box=70.0)
    assert abs(a.rhs - b.rhs) < 1e-7 * abs(a.lhs)


def test_sinh_ratio_equal_p_q():
    r = check_sinh_ratio_fourier(0.8, 0.8, 1.5)
    assert r.lhs == 0.0 and r.abs_diff == 0.0 and r.passed


def test_sinh_ratio_generic():
    assert check_sinh_ratio_fourier(1.0, 0.5, 2.0).rel_diff <= 1e-8


def test_sinh_ratio_small_omega():
    r = check_sinh_ratio_fourier(1.0, 0.5, 1e-4)
    # (cos p w - cos q w)/sinh(pi w) ~ -(p^2 - q^2) w / (2 pi)
    assert r.lhs == pytest.approx(-(1 - 0.25) * 1e-4 / (2 * math.pi), rel=1e-6)
    assert r.rel_diff <= 1e-8


def test_sampled_bounds():
    for r in check_sampled_bounds(10000):
        assert r.passed, r.detail


def test_closed_forms():
    assert check_gamma_closed_forms(1000).rel_diff <= 1e-10


def test_default_suite_passes():
    reports = run_identity_suite()
    assert all(r.passed for r in reports), [r.name for r in reports if not r.passed]
