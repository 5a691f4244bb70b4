"""Counting-measure statistics N_n(Delta): variance and covariance of interval counts.

Both reduce to integrals of K_n^2 over rectangles that avoid the diagonal:

    Cov{N(D1), N(D2)} = (1/2) int int (chi1(x)-chi1(y)) (chi2(x)-chi2(y)) K_n^2,

so the line is cut at the interval endpoints into cells I, and only pairs of
distinct cells with a nonzero coefficient contribute.  For a single interval
the pairs are (Delta, left) and (Delta, right), i.e. the four integrals
I1 + I2 and I3 + I4 around the two endpoints.
"""

from __future__ import annotations

import math

import numpy as np

from ..equilibrium import equilibrium_measure
from ..errors import DomainError, EdgeRegimeError
from ..specfun import gauss_legendre
from ._grid import effective_window, panel_rule
from .report import FluctuationReport

CORNER_A = 10.0      # inner breakpoint at A/n from each endpoint
CORNER_EPS = 0.1     # outer breakpoint at eps from each endpoint
BLOCK = 512
INTERIOR_TOL = 1e-12


def _cell_rule(table_edges, lo, hi, n):
    """Rule on [lo, hi]: table panels plus breakpoints at A/n and eps from both ends."""
    inner = table_edges[(table_edges > lo) & (table_edges < hi)]
    grade = []
    for d in (CORNER_A / n, CORNER_EPS):
        grade += [lo + d, hi - d]
    grade = [g for g in grade if lo < g < hi]
    edges = np.unique(np.concatenate([[lo, hi], inner, grade]))
    return panel_rule(edges)


def _pair_integral(kernel, P, Q):
    """int_P int_Q K_n^2 for two rules P = (x, w), Q = (y, v) on disjoint cells."""
    (x, w), (y, v) = P, Q
    if x.size == 0 or y.size == 0:
        return 0.0
    ax, bx = kernel.pair(x)
    ay, by = kernel.pair(y)
    r = kernel.r_top
    total = 0.0
    for i0 in range(0, x.size, BLOCK):
        sl = slice(i0, i0 + BLOCK)
        num = bx[sl, None] * ay[None, :] - ax[sl, None] * by[None, :]
        K = r * num / (x[sl, None] - y[None, :])
        total += float(w[sl] @ (K * K) @ v)
    return total


def _cells(kernel, points):
    lo, hi, edges = effective_window(kernel.table, kernel.n)
    pts = np.unique(np.concatenate([[lo, hi], np.asarray(points, dtype=float)]))
    if pts[0] < lo or pts[-1] > hi:
        raise DomainError(f"interval endpoints must lie inside the kernel window ({lo:.4g}, {hi:.4g})")
    cells = [(pts[j], pts[j + 1]) for j in range(pts.size - 1) if pts[j + 1] > pts[j]]
    return cells, edges


def _chi(interval, cell):
    a, b = interval
    m = 0.5 * (cell[0] + cell[1])
    return 1.0 if a < m < b else 0.0


def _cell_covariance(kernel, D1, D2):
    """Exact covariance and a dict of the contributing cell-pair pieces."""
    cells, edges = _cells(kernel, [*D1, *D2])
    rules = [_cell_rule(edges, c0, c1, kernel.n) for c0, c1 in cells]
    total, pieces = 0.0, {}
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            coef = ((_chi(D1, cells[i]) - _chi(D1, cells[j]))
                    * (_chi(D2, cells[i]) - _chi(D2, cells[j])))
            if coef == 0.0:
                continue
            val = _pair_integral(kernel, rules[i], rules[j])
            pieces[(cells[i], cells[j])] = coef * val
            total += coef * val
    return total, pieces


def interval_variance(kernel, a, b):
    """Var{N_n((a, b))} = int_(a,b) int_{R minus (a,b)} K_n^2."""
    a, b = float(a), float(b)
    if b < a:
        raise DomainError(f"interval needs a <= b, got ({a}, {b})")
    if b == a:
        return 0.0
    return _cell_covariance(kernel, (a, b), (a, b))[0]


def gram_trace_variance(kernel, a, b, order=None):
    """Oracle: tr G - tr G^2 with G_jk = int_a^b psi_j psi_k, j, k < n."""
    G = _interval_gram(kernel, a, b, order)
    return float(np.trace(G) - np.sum(G * G))


def gram_trace_covariance(kernel, D1, D2, order=None):
    """Oracle: tr G(D1 cap D2) - tr G(D1) G(D2)."""
    lo, hi = max(D1[0], D2[0]), min(D1[1], D2[1])
    Gc = _interval_gram(kernel, lo, hi, order) if hi > lo else np.zeros((kernel.n, kernel.n))
    G1 = _interval_gram(kernel, *D1, order=order)
    G2 = _interval_gram(kernel, *D2, order=order)
    return float(np.trace(Gc) - np.sum(G1 * G2.T))


def _interval_gram(kernel, a, b, order=None):
    from ..orthopoly import evaluate_psi
    n = kernel.n
    _, _, edges = effective_window(kernel.table, n)
    x, w = _cell_rule(edges, a, b, n)
    Y = evaluate_psi(kernel.table, kernel.potential, x, degree=n - 1).psi
    return (Y * w) @ Y.T


def _bulk(kernel):
    meas = equilibrium_measure(kernel.potential)
    return meas.support


def _check_bulk(support, *intervals):
    for a, b in intervals:
        inside = any(lo + INTERIOR_TOL < a and b < hi - INTERIOR_TOL for lo, hi in support.bands)
        if not inside and b > a:
            raise EdgeRegimeError(f"interval ({a}, {b}) touches or leaves the bulk {support.bands}")


def gue_counting_variance(kernel, interval):
    """Var{N_n(Delta)} with the leading asymptote log(n)/pi^2 attached."""
    a, b = map(float, interval)
    if b < a:
        raise DomainError(f"interval needs a <= b, got ({a}, {b})")
    support = _bulk(kernel)
    _check_bulk(support, (a, b))
    if b == a:
        val, pieces = 0.0, {}
    else:
        val, pieces = _cell_covariance(kernel, (a, b), (a, b))
    n = kernel.n
    lim = math.log(n) / math.pi ** 2
    right = sum(v for (c1, c2), v in pieces.items() if c2[0] >= b)
    left = val - right
    return FluctuationReport(quantity="variance", finite_n_value=val, limit_value=lim,
                             discrepancy=abs(val - lim), n=n, case_tag="variance",
                             info={"right_pieces": right, "left_pieces": left})


# ---------------------------------------------------------------------------
# covariance cases
# ---------------------------------------------------------------------------

CASES = ("identical", "disjoint", "touching-outside", "touching-inside", "embedded", "intersecting")


def classify(D1, D2, tol=1e-12):
    """Order the pair as in the case list and return (tag, D1, D2).

    Ordering: the shorter interval first when one contains the other, else the left one first.
    """
    (a1, b1), (a2, b2) = D1, D2
    if not (a1 < b1 and a2 < b2):
        raise DomainError(f"intervals must satisfy a < b, got {D1}, {D2}")
    eq = lambda u, v: abs(u - v) <= tol
    if eq(a1, a2) and eq(b1, b2):
        return "identical", D1, D2
    if a2 < a1 or (eq(a1, a2) and b2 < b1):
        (a1, b1), (a2, b2) = (a2, b2), (a1, b1)
    # now a1 <= a2
    if eq(b1, a2):
        return "touching-outside", (a1, b1), (a2, b2)
    if b1 < a2:
        return "disjoint", (a1, b1), (a2, b2)
    if eq(a1, a2) or eq(b1, b2):
        inner, outer = ((a1, b1), (a2, b2)) if (b1 - a1) <= (b2 - a2) else ((a2, b2), (a1, b1))
        return "touching-inside", inner, outer
    if b2 < b1:
        return "embedded", (a2, b2), (a1, b1)
    return "intersecting", (a1, b1), (a2, b2)


def _theta_rule(s, r, lo, hi, order):
    """Rule for int_{lo}^{hi} f(l) dl / sqrt(4r^2 - (l-s)^2) in theta, l = s + 2r cos(theta)."""
    lo, hi = max(lo, s - 2 * r), min(hi, s + 2 * r)
    if hi <= lo:
        return np.zeros(0), np.zeros(0)
    t0 = math.acos(min(1.0, (hi - s) / (2 * r)))
    t1 = math.acos(max(-1.0, (lo - s) / (2 * r)))
    g = gauss_legendre(order, t0, t1)
    return g.nodes, g.weights


def limit_block(s, r, A, B, order=160):
    """(1/(2 pi^2)) int_A int_B (4r^2 - l m) / ((l - m)^2 sqrt(4r^2 - l^2) sqrt(4r^2 - m^2)).

    Centered at s; in theta variables the integrand is (1 - cos t cos u)/(cos t - cos u)^2,
    independent of r.  A and B must be separated.
    """
    total = 0.0
    for a0, a1 in A:
        ta, wa = _theta_rule(s, r, a0, a1, order)
        for b0, b1 in B:
            tb, wb = _theta_rule(s, r, b0, b1, order)
            if ta.size == 0 or tb.size == 0:
                continue
            ct, cu = np.cos(ta)[:, None], np.cos(tb)[None, :]
            total += float(wa @ ((1.0 - ct * cu) / (ct - cu) ** 2) @ wb)
    return total / (2.0 * math.pi ** 2)


def _band_geometry(support):
    lo, hi = support.lower, support.upper
    return 0.5 * (lo + hi), 0.25 * (hi - lo)


def covariance_limit(tag, D1, D2, n, support):
    """Leading asymptote for an ordered pair; None when no q = 1 formula applies."""
    if support.q != 1:
        return None
    s, r = _band_geometry(support)
    lo, hi = support.lower, support.upper
    (a1, b1), (a2, b2) = D1, D2
    if tag == "identical":
        return math.log(n) / math.pi ** 2
    if tag == "disjoint":
        return -limit_block(s, r, [D1], [D2])
    if tag == "touching-outside":
        return -math.log(n) / (2 * math.pi ** 2)
    if tag == "touching-inside":
        return math.log(n) / (2 * math.pi ** 2)
    if tag == "embedded":
        # D1 inside D2: int_{D1} int_{sigma minus D2}
        return limit_block(s, r, [D1], [(lo, a2), (b2, hi)])
    if tag == "intersecting":
        # a1 < a2 < b1 < b2: (a2,b1) x (R minus (a1,b2))  -  (a1,a2) x (b1,b2)
        return (limit_block(s, r, [(a2, b1)], [(lo, a1), (b2, hi)])
                - limit_block(s, r, [(a1, a2)], [(b1, b2)]))
    raise DomainError(f"unknown case {tag!r}")


def counting_covariance(kernel, D1, D2):
    """Cov{N_n(D1), N_n(D2)} with its case tag and leading asymptote."""
    D1 = tuple(map(float, D1))
    D2 = tuple(map(float, D2))
    tag, E1, E2 = classify(D1, D2)
    support = _bulk(kernel)
    _check_bulk(support, E1, E2)
    val, pieces = _cell_covariance(kernel, E1, E2)
    lim = covariance_limit(tag, E1, E2, kernel.n, support)
    disc = None if lim is None else abs(val - lim)
    return FluctuationReport(quantity="covariance", finite_n_value=val, limit_value=lim,
                             discrepancy=disc, n=kernel.n, case_tag=tag,
                             info={"ordered": (E1, E2), "pieces": len(pieces)})
