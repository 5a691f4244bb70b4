import math

import numpy as np
import pytest
from scipy import integrate

from linstat.errors import DivergenceError, DomainError, SizeError
from linstat.fluctuations import (b_identity_check_q1, fredholm_sine_det, gaussian_bump, intermediate_variance,
                                  laplace_exact, polynomial, scaled, sine_kernel_variance, variance_exact)
from linstat.fluctuations.testfunctions import TestFunction

from conftest import kernel

RHO0 = 1 / math.pi                       # semicircle density at 0, g = 1


def fourier_oracle(phi, rho0):
    """Structure-factor form int |phihat(k)|^2 min(|k|, 2 pi rho0) dk, by scipy quad."""
    f = lambda k: abs(complex(phi.fourier(k))) ** 2 * min(abs(k), 2 * math.pi * rho0)
    cut = 2 * math.pi * rho0
    return 2 * sum(integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
                   for a, b in ((0, cut), (cut, 60.0)))


def slow_tail(x):
    return 1.0 / (1.0 + np.asarray(x, dtype=float) ** 2) ** 0.25


# --- sine-kernel variance ---------------------------------------------------------

def test_sine_zero():
    assert abs(sine_kernel_variance(gaussian_bump(0.0, 0.0, 1.0), RHO0)) <= 1e-15


def test_sine_shift_invariant():
    a = sine_kernel_variance(gaussian_bump(1.0, 0.0, 0.7), RHO0)
    b = sine_kernel_variance(gaussian_bump(1.0, 3.3, 0.7), RHO0)
    assert a == pytest.approx(b, abs=1e-10)


@pytest.mark.parametrize("rho0", [RHO0, 1.0, 2.5])
def test_sine_against_structure_factor(rho0):
    phi = gaussian_bump(1.0, 0.2, 0.6)
    assert sine_kernel_variance(phi, rho0) == pytest.approx(fourier_oracle(phi, rho0), abs=1e-9)


def test_sine_tail_reported():
    res = sine_kernel_variance(gaussian_bump(1.0, 0.0, 0.5), 1.0, details=True)
    # the analytic tail is a genuine share of the value; its error bound is negligible
    assert 0 < res.tail < res.value
    assert 0 <= res.tail_bound <= 1e-12


def test_sine_non_decaying():
    with pytest.raises(DivergenceError):
        sine_kernel_variance(TestFunction("slow", slow_tail, None, None, features=((0.0, 1.0),)), 1.0)


def test_sine_domain():
    with pytest.raises(DomainError):
        sine_kernel_variance(gaussian_bump(), 0.0)


# --- intermediate regime ------------------------------------------------------------

def test_intermediate_dual_route():
    d = intermediate_variance(gaussian_bump(1.3, 0.4, 0.8), details=True)
    assert abs(d["direct"] - d["fourier"]) <= 1e-6


def test_intermediate_equals_averaged_sine():
    phi = gaussian_bump(1.0, -0.5, 0.5)
    assert intermediate_variance(phi) == pytest.approx(sine_kernel_variance(phi, 1.0, averaged=True), abs=1e-8)


def test_intermediate_gaussian_closed_form():
    # phihat = A w exp(-k^2 w^2 / 2) / sqrt(2 pi) gives int |k| |phihat|^2 = A^2 / (2 pi)
    assert intermediate_variance(gaussian_bump(1.7, 0.0, 0.3)) == pytest.approx(1.7 ** 2 / (2 * math.pi), rel=1e-9)


def test_intermediate_scale_free():
    assert intermediate_variance(gaussian_bump(1.0, 0.0, 0.1)) == pytest.approx(
        intermediate_variance(gaussian_bump(1.0, 0.0, 2.0)), rel=1e-9)


def test_intermediate_zero():
    assert abs(intermediate_variance(gaussian_bump(0.0, 0.0, 1.0))) <= 1e-15


def test_sine_below_intermediate_bound():
    # min(|k|, 2 pi rho) <= |k|
    phi = gaussian_bump(1.0, 0.0, 0.4)
    assert sine_kernel_variance(phi, RHO0) <= intermediate_variance(phi)


# --- Fredholm determinant ---------------------------------------------------------

def test_fredholm_zero():
    assert fredholm_sine_det(gaussian_bump(0.0, 0.0, 1.0), RHO0) == pytest.approx(0.0, abs=1e-14)


def test_fredholm_order_doubling():
    phi = gaussian_bump(1.2, 0.0, 0.7)
    d = fredholm_sine_det(phi, RHO0, details=True)
    assert abs(fredholm_sine_det(phi, RHO0, order=2 * d["order"]) - d["value"]) < 1e-8


def test_fredholm_small_amplitude_is_half_variance():
    eps = 1e-3
    phi = gaussian_bump(1.0, 0.0, 0.8)
    val = fredholm_sine_det(phi.times(eps), RHO0) / eps ** 2
    assert val == pytest.approx(sine_kernel_variance(phi, RHO0) / 2, rel=5e-3)


def test_fredholm_not_gaussian():
    # an order-one amplitude leaves the quadratic regime
    phi = gaussian_bump(3.0, 0.0, 0.8)
    assert abs(fredholm_sine_det(phi, RHO0) - sine_kernel_variance(phi, RHO0) / 2) > 1e-2


def test_fredholm_size_error():
    with pytest.raises(SizeError):
        fredholm_sine_det(gaussian_bump(1.0, 0.0, 0.7), RHO0, max_size=10)


# --- microscopic bump at finite n ------------------------------------------------

@pytest.fixture(scope="module")
def gue200():
    return kernel("gue", 200)


def test_micro_variance_near_sine_limit(gue200):
    phi = gaussian_bump(1.0, 0.0, 1.0)
    v = variance_exact(gue200, scaled(phi, 0.0, 1.0, 200))
    assert abs(v / sine_kernel_variance(phi, RHO0) - 1) <= 0.05


def test_micro_laplace_near_fredholm(gue200):
    phi = gaussian_bump(1.0, 0.0, 1.0)
    z = laplace_exact(gue200, scaled(phi, 0.0, 1.0, 200))
    assert abs(z / fredholm_sine_det(phi, RHO0) - 1) <= 0.05


# --- B identity ------------------------------------------------------------------

@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_b_identity(r):
    assert b_identity_check_q1(r, [0.0]) <= 1e-10
    assert b_identity_check_q1(r, [-1.9 * r, 1.9 * r]) <= 1e-8
    assert b_identity_check_q1(r, np.linspace(-1.99 * r, 1.99 * r, 41)) <= 1e-8


def test_b_identity_sensitivity():
    assert b_identity_check_q1(1.0, [0.0, 1.0], d_scale=1.01) == pytest.approx(0.0201, abs=1e-12)


def test_b_identity_edge():
    with pytest.raises(DomainError):
        b_identity_check_q1(1.0, [2.0])
