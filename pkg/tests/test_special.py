import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, special

from foukit.errors import DomainError
from foukit.special import (
    check_hurst,
    damped_integral,
    f_h,
    f_h_array,
    f_h_d1,
    f_h_d2,
    f_h_with_derivatives,
    upper_gamma_scaled,
)


def reference_f_h(h, x):
    a = 2.0 * h
    lower, _ = integrate.quad(lambda s: math.exp(s), 0.0, x, weight="alg", wvar=(a - 1.0, 0.0))
    upper = special.gammaincc(a, x) * special.gamma(a)
    return math.exp(-x) * (special.gamma(a) - lower) + math.exp(x) * upper


@pytest.mark.parametrize("x", [0.0, 0.1, 1.0, 3.5, 20.0, 200.0])
def test_half_hurst_closed_form(x):
    assert_allclose(f_h(0.5, x), 2.0 * math.exp(-x), rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("x", [0.0, 0.5, 2.0, 10.0])
def test_half_hurst_derivatives(x):
    if x > 0:
        assert_allclose(f_h_d1(0.5, x), -2.0 * math.exp(-x), rtol=1e-9)
        assert_allclose(f_h_d2(0.5, x), 2.0 * math.exp(-x), rtol=1e-9)
    else:
        assert_allclose(f_h_d1(0.5, x), -2.0, rtol=1e-12)


@pytest.mark.parametrize("h", [0.1, 0.3, 0.7, 0.95])
def test_value_at_origin(h):
    assert_allclose(f_h(h, 0.0), 2.0 * special.gamma(2.0 * h), rtol=1e-12)


@pytest.mark.parametrize("h", [0.2, 0.35, 0.6, 0.85])
@pytest.mark.parametrize("x", [0.05, 0.7, 2.0, 6.0])
def test_matches_direct_quadrature(h, x):
    assert_allclose(f_h(h, x), reference_f_h(h, x), rtol=1e-8)


@pytest.mark.parametrize("h", [0.3, 0.7])
def test_large_argument_stays_bounded(h):
    xs = np.array([50.0, 300.0, 700.0])
    values = f_h_array(h, xs)
    assert np.all(np.isfinite(values))
    assert np.all(np.sign(values) == np.sign(2.0 * h - 1.0))
    # leading term 2(2H−1)x^{2H−2}
    assert_allclose(values[1:], 2.0 * (2.0 * h - 1.0) * xs[1:] ** (2.0 * h - 2.0), rtol=0.05)


@pytest.mark.parametrize("h", [0.25, 0.75])
@pytest.mark.parametrize("x", [0.8, 3.0])
def test_derivatives_match_finite_differences(h, x):
    step = 1e-5
    d1 = (f_h(h, x + step) - f_h(h, x - step)) / (2 * step)
    d2 = (f_h_d1(h, x + step) - f_h_d1(h, x - step)) / (2 * step)
    assert_allclose(f_h_d1(h, x), d1, rtol=1e-6)
    assert_allclose(f_h_d2(h, x), d2, rtol=1e-5)


def test_with_derivatives_agrees_with_single_evaluations():
    values = f_h_with_derivatives(0.4, 1.3, order=2)
    assert len(values) == 3
    assert_allclose(values, [f_h(0.4, 1.3), f_h_d1(0.4, 1.3), f_h_d2(0.4, 1.3)], rtol=1e-12)


@pytest.mark.parametrize("a", [0.3, 1.0, 1.6])
@pytest.mark.parametrize("x", [0.0, 0.4, 1.5, 12.0, 80.0])
def test_upper_gamma_scaled(a, x):
    expected = special.gamma(a) * special.gammaincc(a, x) * math.exp(x)
    assert_allclose(upper_gamma_scaled(a, x), expected, rtol=1e-10)


def test_damped_integral_unit_exponent():
    # a = 1: ∫₀ˣ e^{−(x−s)} ds = 1 − e^{−x}
    assert_allclose(damped_integral(1.0, 2.5), 1.0 - math.exp(-2.5), rtol=1e-12)
    assert damped_integral(0.6, 0.0) == 0.0


@pytest.mark.parametrize("h", [0.0, 1.0, -0.2, 1.5, float("nan")])
def test_hurst_outside_domain(h):
    with pytest.raises(DomainError):
        check_hurst(h)
    with pytest.raises(DomainError):
        f_h(h, 1.0)


def test_negative_argument_rejected():
    with pytest.raises(DomainError):
        f_h(0.3, -1.0)


def test_first_derivative_singular_at_origin_for_rough_paths():
    with pytest.raises(DomainError):
        f_h_d1(0.3, 0.0)
    with pytest.raises(DomainError):
        f_h_d2(0.7, 0.0)
