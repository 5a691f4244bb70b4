import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from linstat.equilibrium import (Potential, SupportBands, beta_dot, counting_function, dos_from_support,
                                 equilibrium_measure, euler_lagrange_residual, minimize_energy,
                                 nu_as_g_derivative, quartic_two_well_measure, robin_measure_two_sym,
                                 semicircle_measure, vbp_measure)
from linstat.errors import (DomainError, InvalidPotentialError, MergedSupportError, StepSizeError,
                            UnsupportedError)
from linstat.fluctuations import gaussian_bump, linear, polynomial

SQ5 = math.sqrt(5)
QUART = Potential.quartic(3.0, 1.0)
CUBIC_V = (0.0, -4.0, 0.0, 1.0)        # v = l^3 - 4l, q = 3


@lru_cache(maxsize=None)
def minimized(kind):
    V = Potential.gaussian(1.0) if kind == "gue" else QUART
    return minimize_energy(V)


def quad_mass(measure):
    return sum(integrate.quad(measure, a, b, epsabs=1e-13, limit=200)[0] for a, b in measure.support.bands)


# --- potentials and supports -----------------------------------------------

def test_generic_needs_even_positive_leading():
    with pytest.raises(InvalidPotentialError):
        Potential.generic((0.0, 0.0, 0.0, 1.0))
    with pytest.raises(InvalidPotentialError):
        Potential.generic((0.0, 0.0, -1.0))


def test_vbp_rejects_complex_roots():
    # (l^2 - 1)^2 = 4 has roots l^2 = -1
    with pytest.raises(InvalidPotentialError):
        Potential.vbp((-1.0, 0.0, 1.0), 1.0)


def test_support_bands_ordering():
    with pytest.raises(DomainError):
        SupportBands(((0.0, 1.0), (0.5, 2.0)))
    with pytest.raises(DomainError):
        SupportBands(((0.0, float("inf")),))


def test_quartic_is_vbp_of_shifted_square():
    lam = np.linspace(-3, 3, 13)
    assert np.allclose(QUART(lam), (lam ** 2 - 3) ** 2 / 4)


# --- closed forms ----------------------------------------------------------

def test_semicircle_center_density():
    assert semicircle_measure(1.0)(0.0) == pytest.approx(1 / math.pi, rel=1e-15)


@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_semicircle_normalized(g):
    m = semicircle_measure(g)
    assert m.support.bands == ((-2 * math.sqrt(g), 2 * math.sqrt(g)),)
    assert quad_mass(m) == pytest.approx(1.0, abs=1e-10)
    assert m.charges == ()


def test_semicircle_half_mass():
    assert counting_function(semicircle_measure(1.0), 0.0) == pytest.approx(0.5, abs=1e-12)


def test_semicircle_domain():
    with pytest.raises(DomainError):
        semicircle_measure(0.0)


def test_vbp_linear_is_semicircle():
    a, b = vbp_measure((0.0, 1.0), 1.0), semicircle_measure(1.0)
    lam = np.linspace(-2.5, 2.5, 101)
    assert np.max(np.abs(a(lam) - b(lam))) <= 1e-12


def test_vbp_quadratic_bands():
    m = vbp_measure((-3.0, 0.0, 1.0), 1.0)
    assert np.allclose(m.support.endpoints, [-SQ5, -1, 1, SQ5], atol=1e-14)
    assert m.charges[0] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("v, q", [((0.0, 1.0), 1), ((-3.0, 0.0, 1.0), 2), (CUBIC_V, 3)])
def test_vbp_charges(v, q):
    m = vbp_measure(v, 1.0)
    assert m.support.q == q
    assert m.mass() == pytest.approx(1.0, abs=1e-8)
    for l, beta in enumerate(m.charges, start=1):
        assert beta == pytest.approx((q - l) / q, abs=1e-8)
        assert counting_function(m, m.support.bands[l][0]) == pytest.approx(beta, abs=1e-8)


def test_charges_strictly_decreasing():
    b = vbp_measure(CUBIC_V, 1.0).charges
    assert all(0 < x < 1 for x in b) and all(x > y for x, y in zip(b, b[1:]))


def test_quartic_two_well():
    m = quartic_two_well_measure(3.0, 1.0)
    assert np.allclose(m.support.endpoints, [-SQ5, -1, 1, SQ5], atol=1e-14)
    assert quad_mass(m) == pytest.approx(1.0, abs=1e-8)
    assert counting_function(m, 1.0) == pytest.approx(0.5, abs=1e-8)
    assert m.closed_form_tag == "quartic-sym"


def test_quartic_merged():
    with pytest.raises(MergedSupportError):
        quartic_two_well_measure(2.0, 1.0)


@pytest.mark.parametrize("m", [semicircle_measure(1.0), quartic_two_well_measure(3.0, 1.0),
                               vbp_measure(CUBIC_V, 1.0)])
def test_square_root_edges(m):
    for a, b in m.support.bands:
        for end, sgn in ((a, 1.0), (b, -1.0)):
            ratios = [m(end + sgn * eps) / math.sqrt(eps) for eps in (1e-2, 1e-4, 1e-6)]
            assert all(0.01 < r < 100 for r in ratios)
            assert ratios[2] == pytest.approx(ratios[1], rel=2e-2)


def test_dos_from_support_gue():
    V = Potential.gaussian(1.0)
    d = dos_from_support(V, semicircle_measure(1.0).support)
    lam = np.linspace(-1.9, 1.9, 39)
    assert np.max(np.abs(d(lam) - np.sqrt(4 - lam ** 2) / (2 * math.pi))) < 1e-12


def test_dos_from_support_quartic_matches_closed_form():
    m = quartic_two_well_measure(3.0, 1.0)
    d = dos_from_support(QUART, m.support)
    lam = np.linspace(-2.4, 2.4, 97)
    assert np.max(np.abs(d(lam) - m(lam))) < 1e-8
    assert d.mass() == pytest.approx(1.0, abs=1e-8)


def test_counting_function_limits_and_monotonicity():
    m = quartic_two_well_measure(3.0, 1.0)
    assert counting_function(m, -10.0) == pytest.approx(1.0, abs=1e-10)
    assert counting_function(m, 10.0) == 0.0
    vals = counting_function(m, np.linspace(-3, 3, 121))
    assert np.all(np.diff(vals) <= 1e-14)


# --- Euler-Lagrange and the minimizer ----------------------------------------

def test_el_residual_closed_forms():
    assert euler_lagrange_residual(Potential.gaussian(1.0), semicircle_measure(1.0)) <= 1e-6
    assert euler_lagrange_residual(QUART, quartic_two_well_measure(3.0, 1.0)) <= 1e-5


def test_el_residual_detects_wrong_support():
    wrong = semicircle_measure(0.25)             # support [-1, 1]
    assert euler_lagrange_residual(Potential.gaussian(1.0), wrong) >= 0.1


def test_minimizer_gue():
    m = minimized("gue")
    (lo, hi), = m.support.bands
    assert abs(lo + 2) <= 1e-2 and abs(hi - 2) <= 1e-2
    lam = np.linspace(-1.95, 1.95, 79)
    assert np.max(np.abs(m(lam) - semicircle_measure(1.0)(lam))) <= 1e-2
    assert euler_lagrange_residual(Potential.gaussian(1.0), m) <= 1e-3


def test_minimizer_quartic():
    m = minimized("quartic")
    assert np.max(np.abs(np.asarray(m.support.endpoints) - [-SQ5, -1, 1, SQ5])) <= 1e-2
    assert euler_lagrange_residual(QUART, m) <= 1e-3
    assert m.charges[0] == pytest.approx(0.5, abs=1e-3)


def test_minimizer_polish_reaches_closed_form():
    m = minimize_energy(QUART, polish=True)
    assert np.max(np.abs(np.asarray(m.support.endpoints) - [-SQ5, -1, 1, SQ5])) <= 1e-10


def test_minimizer_generic_asymmetric():
    # V = l^4/4 - l^2 + 0.3 l is outside every closed-form family
    V = Potential.generic((0.0, 0.3, -1.0, 0.0, 0.25))
    m = equilibrium_measure(V)
    assert m.mass() == pytest.approx(1.0, abs=1e-8)
    assert euler_lagrange_residual(V, m) <= 1e-6


# --- Robin measure, nu = d(gN)/dg ---------------------------------------------

def test_robin_two_sym():
    nu = robin_measure_two_sym(1.0, SQ5)
    mass = sum(integrate.quad(nu.density, a, b, limit=200)[0] for a, b in nu.support.bands)
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert nu.mass() == pytest.approx(1.0, abs=1e-12)
    assert nu.frequencies == (0.5,)
    assert float(nu.counting(1.0)) == pytest.approx(0.5, abs=1e-14)
    scaled = [nu.density(1.0 + e) * math.sqrt(e) for e in (1e-3, 1e-6, 1e-9)]
    assert max(scaled) < 1.0 and scaled[2] == pytest.approx(scaled[1], rel=1e-3)


@pytest.mark.parametrize("a, b", [(0.0, 1.0), (2.0, 1.0), (-1.0, 1.0)])
def test_robin_domain(a, b):
    with pytest.raises(DomainError):
        robin_measure_two_sym(a, b)


def test_nu_as_g_derivative_quartic():
    rep = nu_as_g_derivative(QUART, step=1e-4)
    assert rep.max_discrepancy <= 1e-5
    gap = nu_as_g_derivative(QUART, probes=[-0.5, 0.0, 0.7])
    assert gap.max_discrepancy <= 1e-6
    below = nu_as_g_derivative(QUART, probes=[-5.0])
    assert below.finite_difference[0] == pytest.approx(1.0, abs=1e-10)
    assert below.max_discrepancy <= 1e-10


def test_nu_as_g_derivative_step_and_kind():
    with pytest.raises(StepSizeError):
        nu_as_g_derivative(QUART, step=0.0)
    with pytest.raises(UnsupportedError):
        nu_as_g_derivative(Potential.generic((0.0, 0.3, -1.0, 0.0, 0.25)))


# --- beta_dot ---------------------------------------------------------------

SUP = quartic_two_well_measure(3.0, 1.0).support


def test_beta_dot_even_vanishes():
    for phi in (polynomial([0.3, 0.0, 1.0]), gaussian_bump(1.0, 0.0, 0.7)):
        assert abs(beta_dot(phi, SUP)) <= 1e-12


def test_beta_dot_linear_closed_form():
    from linstat.specfun import complete_K
    t = 1.7
    assert beta_dot(linear(t), SUP) == pytest.approx(-t * SQ5 / (4 * complete_K(1 / SQ5)), rel=1e-12)


def test_beta_dot_against_exact_endpoint_perturbation():
    # independent oracle: solve the endpoint conditions for V + eps*l^3 exactly, integrate the density
    from linstat.equilibrium import solve_endpoints
    eps = 1e-5
    out = []
    for e in (eps, -eps):
        Ve = QUART.perturbed([0.0, 0.0, 0.0, 1.0], e)
        m = dos_from_support(Ve, solve_endpoints(Ve, SUP))
        out.append(counting_function(m, m.support.bands[1][0]))
    fd = (out[0] - out[1]) / (2 * eps)
    assert beta_dot(polynomial([0, 0, 0, 1.0]), SUP) == pytest.approx(fd, rel=1e-6)


@settings(max_examples=20, deadline=None)
@given(c1=st.floats(-3, 3), c2=st.floats(-3, 3), t=st.floats(-2, 2))
def test_beta_dot_linearity(c1, c2, t):
    p1, p2 = linear(t), polynomial([0.2, 0.0, 0.0, 1.0])
    combo = p1.times(c1).plus(p2.times(c2))
    assert beta_dot(combo, SUP) == pytest.approx(c1 * beta_dot(p1, SUP) + c2 * beta_dot(p2, SUP),
                                                 abs=1e-10)


def test_beta_dot_needs_two_bands():
    with pytest.raises(UnsupportedError):
        beta_dot(linear(1.0), semicircle_measure(1.0).support)
