import math
from functools import lru_cache

import numpy as np
import pytest
from scipy import special

from linstat.equilibrium import Potential
from linstat.errors import ConstructionError, DivergenceError, DomainError, RangeError
from linstat.fluctuations import gaussian_bump, polynomial
from linstat.orthopoly import (cd_kernel, evaluate_psi, gram_matrix, kernel_for, recurrence_limit_profile,
                               stieltjes_recurrence)

from conftest import kernel

QUART = Potential.quartic(3.0, 1.0)
GOLD = ((math.sqrt(5) - 1) / 2, (math.sqrt(5) + 1) / 2)


@lru_cache(maxsize=None)
def table(kind, n, L, g=1.0):
    V = Potential.gaussian(g) if kind == "gue" else QUART
    return stieltjes_recurrence(V, n, L)


def hermite_psi(l, lam, n, g=1.0):
    """Independent oracle: orthonormal functions of exp(-n l^2/(2g)) from scipy's He_l."""
    x = np.asarray(lam) * math.sqrt(n / g)
    log_norm = 0.25 * math.log(n / g) - 0.25 * math.log(2 * math.pi) - 0.5 * special.gammaln(l + 1)
    return special.eval_hermitenorm(l, x) * np.exp(-x * x / 4 + log_norm)


# --- recurrence coefficients -------------------------------------------------

@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_gue_recurrence_closed_form(g):
    t = table("gue", 50, 70, g)
    l = np.arange(1, t.L + 1)
    assert np.max(np.abs(t.r - np.sqrt(g * l / 50))) <= 1e-10
    assert t.r[49] == pytest.approx(math.sqrt(g), abs=1e-10)
    assert np.max(np.abs(t.s)) <= 1e-10


def test_even_potential_has_zero_s():
    t = table("quartic", 40, 42)
    assert np.max(np.abs(t.s)) <= 1e-10 * np.max(t.r)
    assert np.all(t.r > 0)


def test_asymmetric_potential_nonzero_s():
    V = Potential.generic((0.0, 0.3, -1.0, 0.0, 0.25))
    t = stieltjes_recurrence(V, 30, 31)
    assert np.max(np.abs(t.s)) > 1e-3
    assert t.precision_loss_estimate < 25


def test_loss_estimate_reported():
    t = table("gue", 50, 70)
    assert 0.0 <= t.precision_loss_estimate < 25


def test_degree_limit():
    with pytest.raises(DomainError):
        stieltjes_recurrence(QUART, 10, 36)
    with pytest.raises(DomainError):
        stieltjes_recurrence(QUART, 0, 3)


def test_jacobi_matrix_eigenvalues_inside_window():
    t = table("quartic", 40, 42)
    J = t.jacobi_matrix(40)
    ev = np.linalg.eigvalsh(J)
    # zeros of P_40 follow the equilibrium measure: nothing in the gap centre, all within the support hull
    assert ev.min() > -math.sqrt(5) - 0.05 and ev.max() < math.sqrt(5) + 0.05
    assert np.min(np.abs(ev)) > 0.5


def test_uniform_boundedness_quartic():
    tops = [np.max(stieltjes_recurrence(QUART, n, n + 2).r) for n in (20, 40, 60, 80, 100)]
    assert (max(tops) - min(tops)) / min(tops) < 0.05


# --- wave functions --------------------------------------------------------------

def test_gue_orthonormality_small_n():
    t = stieltjes_recurrence(Potential.gaussian(1.0), 10, 12)
    wf = t.wavefunctions()
    assert wf.orthonormality_residual(12) <= 1e-8


@pytest.mark.parametrize("kind, n, L", [("gue", 50, 70), ("quartic", 60, 62)])
def test_orthonormality_and_edge_decay(kind, n, L):
    t = table(kind, n, L)
    wf = t.wavefunctions()
    assert wf.orthonormality_residual() <= 1e-8
    edges = [0, -1]
    assert np.max(np.abs(wf.psi[:, edges])) <= 1e-12


def test_psi_matches_hermite_functions():
    t = table("gue", 50, 70)
    x = np.linspace(-2.4, 2.4, 41)
    wf = evaluate_psi(t, t.potential, x)
    for l in (0, 1, 7, 30, 50, 70):
        ref = hermite_psi(l, x, 50)
        assert np.max(np.abs(wf.psi[l] - ref)) <= 1e-10 * max(1.0, np.max(np.abs(ref)))


def test_jacobi_operator_consistency():
    t = table("quartic", 60, 62)
    x = np.linspace(-2.5, 2.5, 301)
    P = evaluate_psi(t, t.potential, x).psi
    r, s = t.r, t.s
    for l in range(1, t.L):
        lhs = x * P[l]
        rhs = r[l] * P[l + 1] + s[l] * P[l] + r[l - 1] * P[l - 1]
        assert np.max(np.abs(lhs - rhs)) <= 1e-8


def test_derivative_matches_finite_difference():
    t = table("quartic", 60, 62)
    x = np.linspace(-2.3, 2.3, 23)
    h = 1e-5
    d = evaluate_psi(t, t.potential, x, derivative=True).dpsi
    fd = (evaluate_psi(t, t.potential, x + h).psi - evaluate_psi(t, t.potential, x - h).psi) / (2 * h)
    assert np.max(np.abs(d - fd)) <= 1e-5 * np.max(np.abs(d))


def test_plancherel_rotach_amplitude():
    # centre of the bulk: |psi_n(0)| ~ (pi sqrt(g) sin(theta))^{-1/2} at theta = pi/2
    n = 100
    t = stieltjes_recurrence(Potential.gaussian(1.0), n, n + 1)
    v = abs(evaluate_psi(t, t.potential, [0.0]).psi[n, 0])
    assert v == pytest.approx(abs(hermite_psi(n, 0.0, n)), rel=1e-10)           # exact 0.563485...
    assert v == pytest.approx(1 / math.sqrt(math.pi), rel=0.10)


def test_plancherel_rotach_printed_amplitude_is_off_by_sqrt2():
    n = 100
    t = stieltjes_recurrence(Potential.gaussian(1.0), n, n + 1)
    v = abs(evaluate_psi(t, t.potential, [0.0]).psi[n, 0])
    assert v / (2 * math.pi) ** -0.5 == pytest.approx(math.sqrt(2), rel=2e-3)


def test_exterior_decay_at_twice_edge():
    t = table("gue", 50, 70)
    assert abs(evaluate_psi(t, t.potential, [4.0]).psi[50, 0]) <= 1e-8


@pytest.mark.parametrize("V, lam", [(Potential.gaussian(1.0), 2.8), (QUART, 2.8)])
def test_exterior_decay_linear_in_n(V, lam):
    ns = np.array([20, 30, 40, 50, 60])
    logs = []
    for n in ns:
        t = stieltjes_recurrence(V, n, n + 1)
        logs.append(math.log(abs(evaluate_psi(t, V, [lam]).psi[n, 0])))
    slope, icpt = np.polyfit(ns, logs, 1)
    assert slope < 0
    assert np.max(np.abs(np.polyval([slope, icpt], ns) - logs)) < 0.05 * abs(slope) * (ns[-1] - ns[0])


def test_evaluate_psi_range_error():
    t = table("gue", 50, 70)
    lo, hi = t.window
    with pytest.raises(RangeError):
        evaluate_psi(t, t.potential, [hi + 2 * (hi - lo)])
    with pytest.raises(DomainError):
        evaluate_psi(t, t.potential, [0.0], degree=t.L + 1)


# --- Christoffel-Darboux kernel ---------------------------------------------------

def test_cd_symmetry_and_trace():
    K = kernel("gue", 20)
    x = np.linspace(-2.2, 2.2, 17)
    X, Y = np.meshgrid(x, x)
    KM = K(X.ravel(), Y.ravel()).reshape(X.shape)
    assert np.max(np.abs(KM - KM.T)) <= 1e-12
    assert K.trace() == pytest.approx(20.0, abs=1e-6)


def test_cd_matches_sum_of_squares():
    K = kernel("quartic", 60)
    wf = K.wf
    x = np.linspace(-2.4, 2.4, 13)
    y = x[::-1] + 0.013
    P = evaluate_psi(wf.table, wf.table.potential, np.concatenate([x, y]), degree=60).psi
    direct = np.sum(P[:60, :13] * P[:60, 13:], axis=0)
    diag = np.sum(P[:60, :13] ** 2, axis=0)
    assert np.max(np.abs(K(x, y) - direct)) <= 1e-10
    assert np.max(np.abs(K.diagonal(x) - diag)) <= 1e-10


def test_cd_reproducing():
    K = kernel("gue", 20)
    rule = K.table.rule
    probes = np.array([-1.3, -0.2, 0.4, 1.7])
    for lam in probes:
        for mu in probes:
            val = rule.weights @ (K(np.full(rule.nodes.size, lam), rule.nodes)
                                  * K(rule.nodes, np.full(rule.nodes.size, mu)))
            assert val == pytest.approx(float(K(np.array([lam]), np.array([mu]))[0]), abs=1e-6)


def test_gue_density_approaches_semicircle():
    K = kernel("gue", 200)
    x = np.array([-1.0, 0.0, 0.5, 1.5])
    assert np.max(np.abs(K.diagonal(x) / 200 - np.sqrt(4 - x * x) / (2 * math.pi))) < 5e-3


def test_cd_kernel_needs_top_degrees():
    t = table("gue", 50, 70)
    wf = evaluate_psi(t, t.potential, t.rule.nodes, degree=30)
    with pytest.raises(ConstructionError):
        cd_kernel(wf)


# --- limiting profiles --------------------------------------------------------

def test_recurrence_profile_quartic():
    rep = recurrence_limit_profile(QUART, [40, 41, 60], range(-2, 3))
    assert rep.max_deviation[60] <= 0.02
    assert all(rep.alternates.values())
    # the elliptic form reduces to the same 2-periodic values at half-integers
    assert np.max(np.abs(rep.limit_elliptic[60] - rep.limit_periodic[60])) < 1e-12
    assert set(np.round(rep.limit_periodic[60], 12)) == set(np.round(GOLD, 12))


def test_recurrence_profile_gue_exact_values():
    rep = recurrence_limit_profile(Potential.gaussian(1.0), [60], range(-2, 3))
    assert np.allclose(rep.values[60], np.sqrt((60 + np.arange(-2, 3)) / 60), atol=1e-10)


def test_recurrence_profile_gue_literal():
    # known red: r_{n+k-1} = sqrt(1 + k/n) exactly, so |k| = 2 sits 0.0165 from the limit at n = 60
    rep = recurrence_limit_profile(Potential.gaussian(1.0), [60], range(-2, 3))
    assert rep.max_deviation[60] <= 1e-3


def test_recurrence_profile_gue_within_1e3_for_k0():
    rep = recurrence_limit_profile(Potential.gaussian(1.0), [60], [0])
    assert rep.max_deviation[60] <= 1e-3


# --- Gram matrices ---------------------------------------------------------------

def test_gram_zero_and_constant():
    K = kernel("quartic", 60)
    wf = K.wf
    G0 = gram_matrix(wf, polynomial([0.0]))
    assert np.max(np.abs(G0 - np.eye(60))) <= 1e-8
    G = gram_matrix(wf, polynomial([0.7]))
    assert np.max(np.abs(G - math.exp(-0.7) * np.eye(60))) <= 1e-8


def test_gram_spd_for_bump():
    G = gram_matrix(kernel("quartic", 60).wf, gaussian_bump(1.5, 0.8, 0.4))
    assert np.max(np.abs(G - G.T)) < 1e-14
    assert np.linalg.eigvalsh(G).min() > 0


def test_gram_unbounded_below():
    with pytest.raises(DivergenceError):
        gram_matrix(kernel("gue", 20).wf, polynomial([0.0, 0.0, -30.0]))
