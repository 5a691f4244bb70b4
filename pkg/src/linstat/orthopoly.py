"""Orthonormal polynomials for the varying weight exp(-n V).

psi_l(x) = exp(-n V(x)/2) P_l(x) satisfy

    r_l psi_{l+1} + s_l psi_l + r_{l-1} psi_{l-1} = x psi_l,

and K_n(x, y) = sum_{l<n} psi_l(x) psi_l(y) is the Christoffel-Darboux
kernel, equal to r_{n-1} (psi_n(x) psi_{n-1}(y) - psi_{n-1}(x) psi_n(y))/(x - y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equilibrium import Potential, equilibrium_measure
from .errors import (ConstructionError, DivergenceError, DomainError, PrecisionError,
                     RangeError, TruncationError, UnsupportedError)
from .specfun import QuadratureRule, composite_gauss_legendre
from .specfun.extended import dd_add, dd_div, dd_mul, dd_mul_d, dd_sqrt, dd_sub, dd_sum

PANEL_ORDER = 80
MIN_PANELS = 24
EDGE_DECAY = 1e-20       # |psi_L(edge)| / max|psi_L|, i.e. weight ratio 1e-40
MAX_LOSS_DIGITS = 25.0


@dataclass(frozen=True)
class RecurrenceTable:
    """Jacobi coefficients r_0..r_{L-1}, s_0..s_L of the weight exp(-n V)."""

    n: int
    r: np.ndarray
    s: np.ndarray
    L: int
    precision_loss_estimate: float
    potential: Potential
    log_mu0: float
    rule: QuadratureRule
    window: tuple
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("r", "s"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def jacobi_matrix(self, size=None):
        m = self.L + 1 if size is None else int(size)
        J = np.diag(self.s[:m]) + np.diag(self.r[:m - 1], 1) + np.diag(self.r[:m - 1], -1)
        return J

    def wavefunctions(self, degree=None, derivative=False):
        """psi_0..psi_degree on the table's own quadrature rule."""
        return evaluate_psi(self, self.potential, self.rule.nodes, weights=self.rule.weights,
                            degree=degree, derivative=derivative)


@dataclass(frozen=True)
class WaveFunctionGrid:
    """psi[l, j] = psi_l(lambda_grid[j]) for l = 0..degree."""

    lambda_grid: np.ndarray
    psi: np.ndarray
    n: int
    weights: Optional[np.ndarray] = None
    dpsi: Optional[np.ndarray] = None
    table: Optional[RecurrenceTable] = None

    @property
    def degree(self):
        return self.psi.shape[0] - 1

    def orthonormality_residual(self, degree=None):
        if self.weights is None:
            raise ConstructionError("grid carries no quadrature weights")
        m = self.degree if degree is None else int(degree)
        Y = self.psi[:m + 1]
        G = (Y * self.weights) @ Y.T
        return float(np.max(np.abs(G - np.eye(m + 1))))


# ---------------------------------------------------------------------------
# window selection and the Stieltjes procedure
# ---------------------------------------------------------------------------

def _argmin_V(V):
    roots = np.roots(V.dpoly[::-1]) if V.dpoly.size > 1 else np.array([0.0])
    real = roots[np.abs(roots.imag) < 1e-9].real
    cand = np.concatenate([real, [0.0]])
    x = cand[np.argmin(V(cand))]
    return float(x), float(V(x))


def _initial_window(V, n, L):
    """Largest root of n V(x)/2 - (L+1) log|x| = 92 on each side of the minimum."""
    x0, _ = _argmin_V(V)

    def f(x):
        return n * V(x) / 2.0 - (L + 1) * math.log(max(abs(x), 1e-300)) - 92.0

    ends = []
    for sgn in (-1.0, 1.0):
        R = max(abs(x0), 1.0)
        while not (f(x0 + sgn * R) > 0 and f(x0 + sgn * 2 * R) > f(x0 + sgn * R)):
            R *= 2.0
            if R > 1e6:
                raise TruncationError("could not bracket the truncation window")
        xs = x0 + sgn * np.linspace(0.0, 2 * R, 4001)
        neg = np.nonzero(np.array([f(x) for x in xs]) < 0)[0]
        if neg.size == 0:
            ends.append(float(x0 + sgn * min(R, 1.0)))
            continue
        lo, hi = xs[neg[-1]], xs[neg[-1] + 1]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
        ends.append(float(0.5 * (lo + hi)))
    return min(ends), max(ends)


def _weights(V, n, rule):
    # square roots of the discrete weights: W itself underflows long before
    # psi_L has decayed when n is large
    logW = -n * V(rule.nodes)
    m = logW.max()
    sw = np.sqrt(rule.weights) * np.exp(0.5 * (logW - m))
    return sw, m


def _stieltjes_double(x, sw, L):
    q_prev = np.zeros_like(x)
    q = sw / np.linalg.norm(sw)
    r = np.zeros(L)
    s = np.zeros(L + 1)
    rprev = 0.0
    for l in range(L + 1):
        u = x * q
        s[l] = np.dot(q, u)
        u = u - s[l] * q - rprev * q_prev
        u = u - np.dot(u, q) * q - np.dot(u, q_prev) * q_prev
        if l == L:
            break
        r[l] = math.sqrt(np.dot(u, u))
        q_prev, q, rprev = q, u / r[l], r[l]
    return r, s, q


def _stieltjes_dd(x, sw, L):
    """Discretized Stieltjes (Lanczos) in double-double on the measure sum sw_i^2 delta_{x_i}."""
    zero = np.zeros_like(x)
    sh, sl = dd_sum(*dd_mul(sw, zero, sw, zero))
    nh, nl = dd_sqrt(np.float64(sh), np.float64(sl))
    qh, ql = dd_div(sw, zero, np.full_like(x, nh), np.full_like(x, nl))
    ph, pl = zero.copy(), zero.copy()
    r = np.zeros(L)
    s = np.zeros(L + 1)
    loss = 0.0
    rh_prev, rl_prev = 0.0, 0.0
    for l in range(L + 1):
        uh, ul = dd_mul_d(qh, ql, x)
        unorm = math.sqrt(float(np.dot(uh, uh)))
        ah, al = dd_sum(*dd_mul(qh, ql, uh, ul))
        s[l] = ah + al
        th, tl = dd_mul(qh, ql, np.full_like(x, ah), np.full_like(x, al))
        uh, ul = dd_sub(uh, ul, th, tl)
        th, tl = dd_mul(ph, pl, np.full_like(x, rh_prev), np.full_like(x, rl_prev))
        uh, ul = dd_sub(uh, ul, th, tl)
        # one re-orthogonalization pass against the two previous vectors
        for vh, vl in ((qh, ql), (ph, pl)):
            ch, cl = dd_sum(*dd_mul(vh, vl, uh, ul))
            th, tl = dd_mul(vh, vl, np.full_like(x, ch), np.full_like(x, cl))
            uh, ul = dd_sub(uh, ul, th, tl)
        if l == L:
            break
        nh2, nl2 = dd_sum(*dd_mul(uh, ul, uh, ul))
        rh, rl = dd_sqrt(np.float64(nh2), np.float64(nl2))
        rh, rl = float(rh), float(rl)
        if not rh > 0:
            raise PrecisionError("Stieltjes procedure broke down (zero norm)", l + 1)
        r[l] = rh + rl
        loss = max(loss, math.log10(max(unorm, 1e-300) / r[l]))
        if loss > MAX_LOSS_DIGITS:
            raise PrecisionError(f"precision loss {loss:.1f} digits exceeds {MAX_LOSS_DIGITS}", l + 1)
        ph, pl = qh, ql
        qh, ql = dd_div(uh, ul, np.full_like(x, rh), np.full_like(x, rl))
        rh_prev, rl_prev = rh, rl
    return r, s, loss, qh + ql


def _log_envelope(x, V, n, r, s, log_mu0):
    """log of psi_L^2 + psi_{L-1}^2 at ``x`` via the log-scaled forward recurrence."""
    x = np.asarray(x, dtype=float)
    S = np.zeros_like(x)
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    for l in range(r.size):
        rp = r[l - 1] if l > 0 else 0.0
        p_prev, p = p, ((x - s[l]) * p - rp * p_prev) / r[l]
        sc = np.maximum(np.abs(p), 1.0)
        p, p_prev = p / sc, p_prev / sc
        S = S + np.log(sc)
    with np.errstate(divide="ignore"):
        return np.log(p * p + p_prev * p_prev) + 2.0 * S - n * V(x) - log_mu0


def _edge_ratio(V, n, r, s, sw, m, rule):
    """Envelope of psi_L at the window edges relative to its peak on the nodes."""
    log_mu0 = math.log(float(np.dot(sw, sw))) + m
    inner = _log_envelope(rule.nodes, V, n, r, s, log_mu0)
    edges = _log_envelope(np.array([rule.a, rule.b]), V, n, r, s, log_mu0)
    return math.exp(0.5 * (edges.max() - inner.max()))


def _window_rule(lo, hi, panels, order=PANEL_ORDER):
    return composite_gauss_legendre(np.linspace(lo, hi, panels + 1), order)


def stieltjes_recurrence(V, n, L, *, max_refinements=3, stability=1e-12):
    """Recurrence coefficients of exp(-n V) up to degree L.

    The truncation window starts from the root of n V/2 - (L+1) log|x| = 92
    and is widened until psi_L has decayed by ``EDGE_DECAY`` at both edges.
    The composite Gauss-Legendre rule is doubled until r stabilizes.
    """
    n, L = int(n), int(L)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if L < 1 or L > 1.5 * n + 20:
        raise DomainError(f"need 1 <= L <= 1.5 n + 20, got L = {L} for n = {n}")
    lo, hi = _initial_window(V, n, L)
    panels = max(MIN_PANELS, int(math.ceil((L + 1) / 10)))
    expansions = 0
    for expansions in range(60):
        rule = _window_rule(lo, hi, panels)
        sw, m = _weights(V, n, rule)
        r, s, _ = _stieltjes_double(rule.nodes, sw, L)
        ratio = _edge_ratio(V, n, r, s, sw, m, rule)
        if ratio <= EDGE_DECAY:
            break
        c, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        lo, hi = c - 1.15 * half, c + 1.15 * half
    else:
        raise TruncationError("psi_L does not decay within any tried window")

    prev = None
    for refinement in range(max_refinements + 1):
        rule = _window_rule(lo, hi, panels)
        sw, m = _weights(V, n, rule)
        r, s, loss, qL = _stieltjes_dd(rule.nodes, sw, L)
        if prev is not None and np.max(np.abs(r - prev) / r) <= stability:
            break
        prev = r
        panels *= 2
    else:
        raise TruncationError(f"recurrence coefficients did not stabilize to {stability} "
                              f"after {max_refinements} refinements")
    log_mu0 = math.log(float(np.dot(sw, sw))) + m
    return RecurrenceTable(n=n, r=r, s=s, L=L, precision_loss_estimate=loss, potential=V,
                           log_mu0=log_mu0, rule=rule, window=(lo, hi),
                           info={"panels": panels, "expansions": expansions, "refinements": refinement})


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

_RESCALE = 1e150


def evaluate_psi(table, V, grid, *, weights=None, degree=None, derivative=False):
    """psi_0..psi_degree on ``grid`` by the scaled forward recurrence.

    Values are carried as mantissa times exp(log-scale) per point so that the
    recurrence neither overflows nor underflows far outside the bulk.
    """
    x = np.asarray(grid, dtype=float).ravel()
    deg = table.L if degree is None else int(degree)
    if deg > table.L or deg < 0:
        raise DomainError(f"degree {deg} outside table range 0..{table.L}")
    lo, hi = table.window
    c, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    if x.size and (x.min() < c - 2.0 * half or x.max() > c + 2.0 * half):
        raise RangeError(f"grid extends beyond twice the truncation window {table.window}")
    n = table.n
    E = -0.5 * n * V(x) - 0.5 * table.log_mu0
    S = np.zeros_like(x)
    psi = np.empty((deg + 1, x.size))
    dpsi = np.empty((deg + 1, x.size)) if derivative else None
    half_dV = 0.5 * n * V.derivative(x) if derivative else None
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    d_prev, d = np.zeros_like(x), np.zeros_like(x)
    r, s = table.r, table.s

    def store(l):
        f = np.exp(E + S)
        psi[l] = p * f
        if derivative:
            dpsi[l] = (d - half_dV * p) * f

    store(0)
    for l in range(deg):
        rp = r[l - 1] if l > 0 else 0.0
        p_new = ((x - s[l]) * p - rp * p_prev) / r[l]
        if derivative:
            d_new = ((x - s[l]) * d + p - rp * d_prev) / r[l]
            d_prev, d = d, d_new
        p_prev, p = p, p_new
        big = np.abs(p) > _RESCALE
        if np.any(big):
            sc = np.where(big, np.abs(p), 1.0)
            p, p_prev = p / sc, p_prev / sc
            if derivative:
                d, d_prev = d / sc, d_prev / sc
            S = S + np.log(sc)
        store(l + 1)
    w = None if weights is None else np.asarray(weights, dtype=float).ravel()
    return WaveFunctionGrid(lambda_grid=x, psi=psi, n=n, weights=w, dpsi=dpsi, table=table)


@dataclass(frozen=True)
class CDKernel:
    """Christoffel-Darboux kernel K_n built from psi_{n-1}, psi_n."""

    wf: WaveFunctionGrid
    r_top: float

    @property
    def n(self):
        return self.wf.n

    @property
    def table(self):
        return self.wf.table

    @property
    def potential(self):
        return self.wf.table.potential

    def pair(self, x, derivative=False):
        """(psi_{n-1}, psi_n[, psi'_{n-1}, psi'_n]) at arbitrary points."""
        x = np.asarray(x, dtype=float)
        w = evaluate_psi(self.table, self.potential, x.ravel(), degree=self.n, derivative=derivative)
        out = [w.psi[self.n - 1].reshape(x.shape), w.psi[self.n].reshape(x.shape)]
        if derivative:
            out += [w.dpsi[self.n - 1].reshape(x.shape), w.dpsi[self.n].reshape(x.shape)]
        return tuple(out)

    def diagonal(self, x):
        """K_n(x, x) by the confluent form r (psi_n' psi_{n-1} - psi_{n-1}' psi_n)."""
        a, b, da, db = self.pair(x, derivative=True)
        return self.r_top * (db * a - da * b)

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        ax, bx, dax, dbx = self.pair(x, derivative=True)
        ay, by = self.pair(y)
        return self.from_values(x, y, ax, bx, ay, by, dax, dbx)

    def from_values(self, x, y, ax, bx, ay, by, dax=None, dbx=None):
        """Kernel from precomputed psi_{n-1} (a) and psi_n (b) values; broadcasts."""
        num = bx * ay - ax * by
        d = x - y
        diag = np.abs(d) < 1e-12 * np.maximum(1.0, np.abs(x))
        with np.errstate(divide="ignore", invalid="ignore"):
            K = self.r_top * num / np.where(diag, 1.0, d)
        if np.any(diag):
            if dax is None:
                raise ConstructionError("diagonal kernel values need derivatives")
            conf = self.r_top * (dbx * ax - dax * bx)
            K = np.where(diag, np.broadcast_to(conf, K.shape), K)
        return K

    def trace(self):
        rule = self.table.rule
        return float(np.dot(rule.weights, self.diagonal(rule.nodes)))


def cd_kernel(wf):
    """Christoffel-Darboux kernel for the weight index ``wf.n``."""
    if wf.table is None:
        raise ConstructionError("wave-function grid has no recurrence table")
    n = wf.n
    if wf.degree < n or n < 1:
        raise ConstructionError(f"grid must hold degrees n-1 = {n - 1} and n = {n}")
    return CDKernel(wf=wf, r_top=float(wf.table.r[n - 1]))


def kernel_for(V, n, L=None):
    """Convenience: table, wave functions on its rule, and the CD kernel."""
    table = stieltjes_recurrence(V, n, n + 2 if L is None else L)
    wf = table.wavefunctions(degree=n, derivative=True)
    return cd_kernel(wf)


# ---------------------------------------------------------------------------
# comparison with limiting profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecurrenceProfileReport:
    n_list: tuple
    k_range: tuple
    values: dict            # n -> r_{n+k-1} for k in k_range
    limit_periodic: dict    # n -> (b - (-1)^{n+k} a)/2
    limit_elliptic: dict    # n -> R((n+k)/2) from the elliptic form
    max_deviation: dict
    alternates: dict


def recurrence_limit_profile(V, n_list, k_range):
    """Compare r_{n+k-1} with the two-periodic (or constant) limiting values."""
    from .fluctuations.limitlaw import two_band_r2

    n_list = tuple(int(n) for n in n_list)
    k_range = tuple(int(k) for k in k_range)
    meas = equilibrium_measure(V)
    if V.is_quartic_sym:
        (_, _), (a, b) = meas.support.bands
    elif meas.support.q == 1:
        a = b = None
        r_lim = 0.25 * (meas.support.upper - meas.support.lower)
    else:
        raise UnsupportedError("limiting profile is available for one band or the symmetric two-well")
    values, lp, le, dev, alt = {}, {}, {}, {}, {}
    for n in n_list:
        Lneed = n + max(k_range)
        table = stieltjes_recurrence(V, n, max(Lneed, n) + 1)
        vals = np.array([table.r[n + k - 1] for k in k_range])
        if a is None:
            per = np.full(vals.shape, r_lim)
            ell = per
        else:
            per = np.array([(b - (-1.0) ** (n + k) * a) / 2.0 for k in k_range])
            ell = np.sqrt(two_band_r2(np.array([(n + k) / 2.0 for k in k_range]), a, b))
        values[n], lp[n], le[n] = vals, per, ell
        dev[n] = float(np.max(np.abs(vals - per)))
        diffs = np.diff(vals)
        alt[n] = bool(np.all(np.sign(diffs[1:]) == -np.sign(diffs[:-1]))) if diffs.size > 1 else True
    return RecurrenceProfileReport(n_list, k_range, values, lp, le, dev, alt)


# ---------------------------------------------------------------------------
# Gram matrices
# ---------------------------------------------------------------------------

def _phi_values(phi, x):
    f = phi.value if hasattr(phi, "value") else phi
    return np.asarray(f(x), dtype=float) * np.ones_like(x)


def gram_matrix(wf, phi):
    """G_jk = int exp(-phi) psi_j psi_k, j, k < n.

    Assembled as delta_jk - int (1 - exp(-phi)) psi_j psi_k, which equals the
    direct form by orthonormality and only needs the grid to cover the region
    where phi differs from zero.
    """
    if wf.weights is None:
        raise ConstructionError("wave-function grid carries no quadrature weights")
    n = wf.n
    if wf.degree < n - 1:
        raise ConstructionError(f"grid must hold degrees 0..{n - 1}")
    x = wf.lambda_grid
    ph = _phi_values(phi, x)
    if np.any(~np.isfinite(ph)) or np.any(-ph > 700.0):
        raise DivergenceError("exp(-phi) overflows on the grid")
    Y = wf.psi[:n]
    dens = np.sum(Y * Y, axis=0)
    ew = np.exp(-ph)
    edge = np.array([0, -1])
    if np.max(ew[edge] * dens[edge] * wf.weights[edge]) > 1e-10 * max(1.0, np.max(ew * dens * wf.weights)):
        raise DivergenceError("exp(-phi) psi^2 is not negligible at the grid edges: phi unbounded below")
    M = (Y * (wf.weights * (-np.expm1(-ph)))) @ Y.T
    G = np.eye(n) - M
    return 0.5 * (G + G.T)
