import math

import numpy as np
import pytest
from scipy import integrate

from linstat.errors import DomainError
from linstat.fluctuations import limit_law_q2, two_band_r2
from linstat.specfun import complete_E, complete_K

A, B = 1.0, math.sqrt(5)


@pytest.fixture(scope="module")
def law():
    return limit_law_q2(A, B)


def test_parity_values():
    assert two_band_r2(np.array([0.0, 0.5]), A, B) == pytest.approx([((B - A) / 2) ** 2, ((B + A) / 2) ** 2],
                                                                    rel=1e-14)


def test_r2_positive_and_periodic():
    x = np.linspace(-2, 2, 4001)
    r2 = two_band_r2(x, A, B)
    assert r2.min() > 0
    assert np.max(np.abs(two_band_r2(x + 1, A, B) - r2)) < 1e-13


def test_c0_closed_form(law):
    k = A / B
    assert law.c0 == pytest.approx((A * A + B * B) / 4 - B * B / 2 * (1 - complete_E(k) / complete_K(k)),
                                   abs=1e-12)
    assert law.c0 == pytest.approx(1.2430312803193821, abs=1e-12)


def test_c0_literal(law):
    # known red: the literal target (a^2 + b^2)/4 = 1.5 is not the mean of R^2
    assert abs(law.c0 - (A * A + B * B) / 4) <= 1e-10


def test_omega(law):
    assert law.omega == pytest.approx(-B / (4 * complete_K(A / B)), rel=1e-15)
    assert law.omega == pytest.approx(-0.3368336018, abs=1e-10)


def test_A_periodic(law):
    x = np.linspace(0, 1, 37)
    assert np.max(np.abs(law.A_series(x + 1) - law.A_series(x))) <= 1e-10


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("x", [0.0, 0.5])
def test_series_vs_quadrature(law, t, x):
    assert float(law.F(t, x)) == pytest.approx(law.F_quadrature(t, x), abs=1e-8)


def test_series_vs_scipy_quad(law):
    # independent oracle for the inner integral
    t, x = 1.3, 0.21
    q = integrate.quad(lambda s: (t - s) * float(law.R2(np.array([x + s * law.omega]))[0]), 0, t,
                       epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    assert float(law.F(t, x)) == pytest.approx(q, abs=1e-10)


def test_quadratic_for_small_t(law):
    t = 1e-3
    assert float(law.F(t, 0.0)) == pytest.approx(0.5 * t * t * float(law.R2(np.array([0.0]))[0]), rel=1e-3)


def test_non_quadratic(law):
    val = law.non_quadraticity(1.0, 0.0)
    err = abs(float(law.F(2.0)) - law.F_quadrature(2.0)) + 4 * abs(float(law.F(1.0)) - law.F_quadrature(1.0))
    assert abs(val) > 10 * max(err, 1e-15)


def test_defect_values(law):
    assert law.clt_defect(2.0, 0.0) == pytest.approx(1.39417579, abs=1e-6)
    assert law.clt_defect(2.0, 0.5) == pytest.approx(-2.37788, abs=1e-4)


def test_domain():
    with pytest.raises(DomainError):
        limit_law_q2(2.0, 1.0)
