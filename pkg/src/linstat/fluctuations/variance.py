"""Variance and covariance of linear statistics, exact at finite n and in the limit.

Finite n:  Cov{N[phi1], N[phi2]} = (1/2) int int dphi1 dphi2 K_n^2,
and with K_n = r (psi_n(x) psi_{n-1}(y) - psi_{n-1}(x) psi_n(y)) / (x - y)
the C^1 case becomes a smooth tensor integral of divided differences.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, RangeError
from ..specfun import gauss_legendre
from ._grid import adapted_rule, effective_window

DIAG_TOL = 1e-8
BLOCK = 256
THETA_ORDER = 160


def _divided(phi, x, y, dphi_x):
    """(phi(x) - phi(y)) / (x - y), with phi'(x) when |x - y| < DIAG_TOL."""
    d = x[:, None] - y[None, :]
    near = np.abs(d) < DIAG_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        D = (phi(x)[:, None] - phi(y)[None, :]) / np.where(near, 1.0, d)
    if np.any(near):
        D = np.where(near, np.broadcast_to(dphi_x[:, None], D.shape), D)
    return D


def _features(*phis):
    out = []
    for p in phis:
        out.extend(p.features)
    return tuple(out)


def _check_jumps(kernel, *phis):
    lo, hi, _ = effective_window(kernel.table, kernel.n)
    for p in phis:
        if not p.is_c1:
            for c, h in p.features:
                if h == 0 and not lo < c < hi:
                    raise RangeError(f"indicator endpoint {c} outside the kernel window ({lo:.4g}, {hi:.4g})")


def covariance_exact(kernel, phi1, phi2):
    """(1/2) int int (phi1(x)-phi1(y)) (phi2(x)-phi2(y)) K_n(x,y)^2 dx dy."""
    _check_jumps(kernel, phi1, phi2)
    x, w = adapted_rule(kernel.table, kernel.n, _features(phi1, phi2))
    a, b, da, db = kernel.pair(x, derivative=True)
    r = kernel.r_top
    smooth = phi1.is_c1 and phi2.is_c1
    if smooth:
        d1, d2 = phi1.d(x), phi2.d(x)
    else:
        f1, f2 = phi1(x), phi2(x)
    total = 0.0
    for i0 in range(0, x.size, BLOCK):
        sl = slice(i0, i0 + BLOCK)
        if smooth:
            num = a[sl, None] * b[None, :] - b[sl, None] * a[None, :]
            D1 = _divided(phi1, x[sl], x, d1[sl])
            D2 = D1 if phi2 is phi1 else _divided(phi2, x[sl], x, d2[sl])
            integrand = (r * r) * D1 * D2 * num * num
        else:
            K = kernel.from_values(x[sl, None], x[None, :], a[sl, None], b[sl, None],
                                   a[None, :], b[None, :], da[sl, None], db[sl, None])
            integrand = (f1[sl, None] - f1[None, :]) * (f2[sl, None] - f2[None, :]) * K * K
        total += float(w[sl] @ integrand @ w)
    return 0.5 * total


def variance_exact(kernel, phi):
    """Var{N_n[phi]} for a C^1 phi or an indicator."""
    if phi.kind == "indicator":
        from .counting import interval_variance
        a, b = phi.params["a"], phi.params["b"]
        _check_jumps(kernel, phi)
        return interval_variance(kernel, a, b)
    return covariance_exact(kernel, phi, phi)


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------

def _band_theta(c, h, order):
    r = gauss_legendre(order, 0.0, math.pi)
    return c + h * np.cos(r.nodes), r.weights, r.nodes


def _limit_quadratic(phi, lam, wts, V):
    """int int |dphi/dlambda|^2 V(l1, l2) over a product rule (lam, wts)."""
    D = _divided(phi, lam, lam, phi.d(lam))
    return float(wts @ (D * D * V) @ wts)


def variance_limit_q1(phi, r, s=0.0, order=THETA_ORDER):
    """int int |dphi/dl|^2 (4r^2 - l1 l2) / (4 pi^2 sqrt(4r^2 - l1^2) sqrt(4r^2 - l2^2)),

    on [s - 2r, s + 2r], with l = s + 2r cos(theta) absorbing both square roots.
    """
    r, s = float(r), float(s)
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    if not phi.is_c1:
        raise DomainError("variance_limit_q1 needs a C^1 test function")
    lam, wts, th = _band_theta(s, 2.0 * r, order)
    ct = np.cos(th)
    V = (1.0 - np.outer(ct, ct)) / np.pi ** 2 * r * r
    return _limit_quadratic(phi, lam, wts, V)


def variance_limit_q2_sym(phi, a, b, parity, order=THETA_ORDER):
    """Two-band limit on [-b,-a] U [a,b] for even (x = 0) or odd (x = 1/2) n.

    V2 = -eps1 eps2 ((a^2 - l1 l2)(b^2 - l1 l2) - (-1)^{2x} a b (l1 - l2)^2)
         / (4 pi^2 sqrt|R2(l1)| sqrt|R2(l2)|),   eps = +1 on (-b,-a), -1 on (a,b).
    """
    a, b = float(a), float(b)
    if not 0 < a < b:
        raise DomainError(f"need 0 < a < b, got a = {a}, b = {b}")
    if parity not in ("even", "odd"):
        raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")
    if not phi.is_c1:
        raise DomainError("variance_limit_q2_sym needs a C^1 test function")
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    lams, ws, eps = [], [], []
    for sgn in (-1.0, 1.0):
        lam, wt, th = _band_theta(sgn * c, h, order)
        # dl / sqrt|R2| = dtheta / sqrt(|l + sgn a| |l + sgn b|) on this band
        other = np.sqrt(np.abs((lam + sgn * a) * (lam + sgn * b)))
        lams.append(lam)
        ws.append(wt / other)
        eps.append(np.full(lam.size, -sgn))
    lam, wts, e = np.concatenate(lams), np.concatenate(ws), np.concatenate(eps)
    P = np.outer(lam, lam)
    dl2 = (lam[:, None] - lam[None, :]) ** 2
    sign = 1.0 if parity == "even" else -1.0
    V = np.outer(e, e) * ((a * a - P) * (b * b - P) - sign * a * b * dl2) / (-4.0 * np.pi ** 2)
    return _limit_quadratic(phi, lam, wts, V)


def variance_bound(kernel, phi, lo=None, hi=None):
    """(r_{n-1})^2 (sup |phi'|)^2 with the sup taken over a window."""
    if lo is None:
        lo, hi, _ = effective_window(kernel.table, kernel.n)
    return kernel.r_top ** 2 * phi.sup_derivative(lo, hi) ** 2
