"""Potentials, supports and equilibrium measures of the log-gas energy.

The energy of a unit measure m in the external field V is

    E_V[m] = -int int log|l - u| m(dl) m(du) + int V dm,

and its minimizer N (the density of states) is characterised by
V_eff = V - 2 int log|l - u| N(du) being equal to a constant F on the
support and at least F off it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (ConvergenceError, DomainError, InconsistentSupportError,
                     InvalidPotentialError, MergedSupportError, StepSizeError,
                     UnsupportedError)
from .specfun import complete_K, gauss_legendre

KINDS = ("gaussian", "vbp", "generic")


# ---------------------------------------------------------------------------
# potentials and supports
# ---------------------------------------------------------------------------

def _real_simple_roots(coeffs, tol=1e-9):
    """Roots of an ascending-coefficient polynomial, or None if not all real and simple."""
    roots = np.roots(np.asarray(coeffs, dtype=float)[::-1])
    scale = max(1.0, float(np.max(np.abs(roots)))) if roots.size else 1.0
    if np.any(np.abs(roots.imag) > tol * scale):
        return None
    r = np.sort(roots.real)
    if r.size > 1 and np.min(np.diff(r)) <= 1e-7 * scale:
        return None
    return r


@dataclass(frozen=True)
class Potential:
    """A polynomial external field.

    kind == "gaussian": V = l^2 / (2g).
    kind == "vbp":      V = v(l)^2 / (2 g q) with v monic of degree q;
                        ``coefficients`` are those of v (ascending).
    kind == "generic":  V = p(l) / g with ``coefficients`` those of p (ascending).
    """

    kind: str
    coefficients: tuple = ()
    g: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "g", float(self.g))
        if self.kind not in KINDS:
            raise InvalidPotentialError(f"unknown potential kind {self.kind!r}")
        if not self.g > 0 or not math.isfinite(self.g):
            raise InvalidPotentialError(f"amplitude g must be positive, got {self.g}")
        c = self.coefficients
        if self.kind == "vbp":
            if len(c) < 2 or c[-1] != 1.0:
                raise InvalidPotentialError("vbp polynomial v must be monic of degree >= 1")
            s = 2.0 * math.sqrt(self.g)
            for shift in (-s, s):
                cc = list(c)
                cc[0] += shift
                if _real_simple_roots(cc) is None:
                    raise InvalidPotentialError("v^2 - 4g must have only real simple zeros")
            if _real_simple_roots(P.polysub(P.polymul(c, c), [4.0 * self.g])) is None:
                raise InvalidPotentialError("v^2 - 4g must have only real simple zeros")
        elif self.kind == "generic":
            c = np.trim_zeros(np.asarray(c), "b")
            if c.size < 3 or (c.size - 1) % 2 or c[-1] <= 0:
                raise InvalidPotentialError("generic V needs even degree >= 2 and positive leading coefficient")
            object.__setattr__(self, "coefficients", tuple(float(x) for x in c))

    # constructors -----------------------------------------------------------
    @classmethod
    def gaussian(cls, g=1.0):
        return cls("gaussian", (), g)

    @classmethod
    def vbp(cls, v, g=1.0):
        return cls("vbp", tuple(v), g)

    @classmethod
    def quartic(cls, m2, g=1.0):
        """The symmetric two-well potential (l^2 - m2)^2 / (4g)."""
        return cls("vbp", (-float(m2), 0.0, 1.0), g)

    @classmethod
    def generic(cls, coefficients, g=1.0):
        return cls("generic", tuple(coefficients), g)

    # structure ----------------------------------------------------------------
    @property
    def q(self):
        """Number of bands for vbp kinds (degree of v); None otherwise."""
        if self.kind == "gaussian":
            return 1
        if self.kind == "vbp":
            return len(self.coefficients) - 1
        return None

    @property
    def v(self):
        return np.array([0.0, 1.0]) if self.kind == "gaussian" else np.array(self.coefficients)

    @property
    def poly(self):
        """Ascending coefficients of V itself."""
        if self.kind == "gaussian":
            return np.array([0.0, 0.0, 0.5 / self.g])
        if self.kind == "vbp":
            v = np.array(self.coefficients)
            return P.polymul(v, v) / (2.0 * self.g * self.q)
        return np.array(self.coefficients) / self.g

    @property
    def dpoly(self):
        return P.polyder(self.poly)

    @property
    def is_quartic_sym(self):
        c = self.coefficients
        return self.kind == "vbp" and len(c) == 3 and c[1] == 0.0 and c[0] < 0.0

    @property
    def is_even(self):
        return bool(np.all(self.poly[1::2] == 0.0))

    def __call__(self, lam):
        return P.polyval(np.asarray(lam, dtype=float), self.poly)

    def derivative(self, lam):
        return P.polyval(np.asarray(lam, dtype=float), self.dpoly)

    def with_g(self, g):
        return Potential(self.kind, self.coefficients, g)

    def perturbed(self, coefficients, eps):
        """Generic potential V + eps * p for an ascending-coefficient polynomial p."""
        return Potential.generic(P.polyadd(self.poly, eps * np.asarray(coefficients, dtype=float)), 1.0)

    def to_dict(self):
        return {"kind": self.kind, "coefficients": list(self.coefficients), "g": self.g}


@dataclass(frozen=True)
class SupportBands:
    bands: tuple

    def __post_init__(self):
        bands = tuple((float(a), float(b)) for a, b in self.bands)
        if not bands:
            raise DomainError("a support needs at least one band")
        flat = [x for ab in bands for x in ab]
        if not all(math.isfinite(x) for x in flat):
            raise DomainError("band endpoints must be finite")
        if any(y <= x for x, y in zip(flat, flat[1:])):
            raise DomainError(f"bands must be ordered and disjoint: {bands}")
        object.__setattr__(self, "bands", bands)

    @property
    def q(self):
        return len(self.bands)

    @property
    def endpoints(self):
        return np.array([x for ab in self.bands for x in ab])

    @property
    def lower(self):
        return self.bands[0][0]

    @property
    def upper(self):
        return self.bands[-1][1]

    def contains(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.zeros(lam.shape, dtype=bool)
        for a, b in self.bands:
            out |= (lam >= a) & (lam <= b)
        return out

    def band_index(self, lam):
        """Index of the band containing each point, -1 outside."""
        lam = np.asarray(lam, dtype=float)
        idx = np.full(lam.shape, -1)
        for j, (a, b) in enumerate(self.bands):
            idx[(lam >= a) & (lam <= b)] = j
        return idx

    def abs_R(self, lam):
        """|R_q(l)| = prod |l - a_j||l - b_j|."""
        lam = np.asarray(lam, dtype=float)
        out = np.ones(lam.shape)
        for e in self.endpoints:
            out = out * np.abs(lam - e)
        return out

    def band_signs(self):
        """eps_l with sqrt(R_q(l + i0)) = i eps_l |R_q(l)|^{1/2} on band l."""
        q = self.q
        return np.array([(-1.0) ** (q - 1 - j) for j in range(q)])


def _theta_rule(order=64):
    """Gauss-Legendre nodes/weights on [0, pi]."""
    r = gauss_legendre(order, 0.0, math.pi)
    return r.nodes, r.weights


def band_integral(support, j, f, weight="sqrt", order=64, lo=None, hi=None):
    """Integrate f over band j (or its subinterval [lo, hi]) after l = c + h cos(theta).

    weight="sqrt":    int f(l) dl where f carries a factor vanishing like a
                      square root at both band ends; the substitution makes the
                      integrand smooth when f = smooth * sqrt((l-a)(b-l)).
    weight="invsqrt": int f(l) / sqrt((l-a)(b-l)) dl.
    weight="plain":   int f(l) dl.
    """
    a, b = support.bands[j]
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    t_hi = math.pi if lo is None else math.acos(np.clip((lo - c) / h, -1.0, 1.0))
    t_lo = 0.0 if hi is None else math.acos(np.clip((hi - c) / h, -1.0, 1.0))
    if t_hi <= t_lo:
        return 0.0
    r = gauss_legendre(order, t_lo, t_hi)
    lam = c + h * np.cos(r.nodes)
    if weight == "invsqrt":
        vals = f(lam)
    else:
        vals = f(lam) * h * np.sin(r.nodes)
    return float(np.dot(r.weights, vals))


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquilibriumMeasure:
    """Equilibrium measure: support, density, charges and a provenance tag.

    Numeric measures produced by the discrete minimizer also carry the cell
    ``edges`` and ``masses`` of their piecewise-constant density.
    """

    support: SupportBands
    density: Callable
    charges: tuple
    closed_form_tag: str
    potential: Optional[Potential] = None
    edges: Optional[np.ndarray] = None
    masses: Optional[np.ndarray] = None
    P_coefficients: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    @property
    def q(self):
        return self.support.q

    def __call__(self, lam):
        return self.density(lam)

    @property
    def is_cellwise(self):
        return self.masses is not None

    def mass(self):
        if self.is_cellwise:
            return float(np.sum(self.masses))
        return sum(band_integral(self.support, j, self.density) for j in range(self.q))

    def log_potential(self, lam):
        """U(l) = int log|l - u| N(du)."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if self.is_cellwise:
            return _cell_log_potential(self.edges, self.masses, lam)
        return _band_log_potential(self.support, self.density, lam)


def _xlogx(u):
    u = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)


def _cell_log_potential(edges, masses, lam):
    # int_alpha^beta log|l - u| du = G(l - alpha) - G(l - beta), G(u) = u log|u| - u
    h = np.diff(edges)
    dens = masses / h
    out = np.empty(lam.shape)
    for s in range(0, lam.size, 256):
        x = lam[s:s + 256, None]
        ua, ub = x - edges[None, :-1], x - edges[None, 1:]
        G = (np.sign(ua) * _xlogx(ua) - ua) - (np.sign(ub) * _xlogx(ub) - ub)
        out[s:s + 256] = G @ dens
    return out


def _graded_nodes(t0, t1, toward, levels=34, order=12):
    """Gauss nodes on [t0, t1] geometrically graded toward one endpoint."""
    if t1 - t0 <= 0:
        return np.empty(0), np.empty(0)
    L = t1 - t0
    cuts = [L * 2.0 ** (-k) for k in range(levels)] + [0.0]
    xs, ws = [], []
    x, w = gauss_legendre(order).nodes, gauss_legendre(order).weights
    for hi_, lo_ in zip(cuts[:-1], cuts[1:]):
        mid, half = 0.5 * (hi_ + lo_), 0.5 * (hi_ - lo_)
        d = mid + half * x
        if toward == "lo":
            xs.append(t0 + d)
        else:
            xs.append(t1 - d)
        ws.append(half * w)
    return np.concatenate(xs), np.concatenate(ws)


def _band_log_potential(support, density, lam):
    out = np.zeros(lam.shape)
    for j, (a, b) in enumerate(support.bands):
        c, h = 0.5 * (a + b), 0.5 * (b - a)
        for i, x in enumerate(lam):
            ts = math.acos(float(np.clip((x - c) / h, -1.0, 1.0)))
            tot = 0.0
            for t0, t1, tw in ((0.0, ts, "hi"), (ts, math.pi, "lo")):
                th, w = _graded_nodes(t0, t1, tw)
                if th.size == 0:
                    continue
                mu = c + h * np.cos(th)
                with np.errstate(divide="ignore"):
                    lg = np.log(np.abs(x - mu))
                lg[~np.isfinite(lg)] = 0.0
                tot += np.dot(w, lg * density(mu) * h * np.sin(th))
            out[i] += tot
    return out


def _charges_from_counting(measure_like, support):
    return tuple(counting_function(measure_like, support.bands[l + 1][0]) for l in range(support.q - 1))


def _assemble(support, density, tag, potential, charges=None, **kw):
    m = EquilibriumMeasure(support=support, density=density, charges=(), closed_form_tag=tag,
                           potential=potential, **kw)
    ch = _charges_from_counting(m, support) if charges is None else tuple(charges)
    return EquilibriumMeasure(support=support, density=density, charges=ch, closed_form_tag=tag,
                              potential=potential, **kw)


def semicircle_measure(g):
    """Wigner semicircle on [-2 sqrt g, 2 sqrt g] with density sqrt(4g - l^2)/(2 pi g)."""
    g = float(g)
    if not g > 0:
        raise DomainError(f"g must be positive, got {g}")
    s = 2.0 * math.sqrt(g)

    def density(lam):
        lam = np.asarray(lam, dtype=float)
        return np.sqrt(np.clip(4.0 * g - lam * lam, 0.0, None)) / (2.0 * math.pi * g)

    return _assemble(SupportBands(((-s, s),)), density, "semicircle", Potential.gaussian(g), charges=())


def vbp_measure(v, g):
    """Density |v'| |v^2 - 4g|^{1/2} / (2 pi g q) on {v^2 <= 4g}."""
    pot = Potential.vbp(v, g)   # validates real simple zeros
    v = np.asarray(pot.coefficients)
    q = pot.q
    roots = _real_simple_roots(P.polysub(P.polymul(v, v), [4.0 * g]))
    if roots is None or roots.size != 2 * q:
        raise InvalidPotentialError("v^2 - 4g must have 2q real simple zeros")
    support = SupportBands(tuple((roots[2 * j], roots[2 * j + 1]) for j in range(q)))
    dv = P.polyder(v)

    def density(lam):
        lam = np.asarray(lam, dtype=float)
        vv = P.polyval(lam, v)
        inside = support.contains(lam)
        val = np.abs(P.polyval(lam, dv)) * np.sqrt(np.abs(vv * vv - 4.0 * g)) / (2.0 * math.pi * g * q)
        return np.where(inside, val, 0.0)

    tag = "quartic-sym" if pot.is_quartic_sym else ("semicircle" if q == 1 and v[0] == 0.0 else "vbp")
    return _assemble(support, density, tag, pot, charges=tuple((q - l) / q for l in range(1, q)))


def quartic_two_well_measure(m2, g):
    """Two-band measure of (l^2 - m2)^2/(4g): |l| sqrt((b^2-l^2)(l^2-a^2))/(2 pi g)."""
    m2, g = float(m2), float(g)
    if not g > 0:
        raise DomainError(f"g must be positive, got {g}")
    if not m2 > 2.0 * math.sqrt(g):
        raise MergedSupportError(f"m2 = {m2} <= 2 sqrt(g) = {2 * math.sqrt(g)}: support is not two bands")
    a, b = math_ab(m2, g)
    support = SupportBands(((-b, -a), (a, b)))

    def density(lam):
        lam = np.asarray(lam, dtype=float)
        l2 = lam * lam
        val = np.abs(lam) * np.sqrt(np.clip((b * b - l2) * (l2 - a * a), 0.0, None)) / (2.0 * math.pi * g)
        return np.where(support.contains(lam), val, 0.0)

    return _assemble(support, density, "quartic-sym", Potential.quartic(m2, g), charges=(0.5,))


def math_ab(m2, g):
    """Inner and outer band edges a, b of the symmetric two-well measure."""
    s = 2.0 * math.sqrt(g)
    return math.sqrt(m2 - s), math.sqrt(m2 + s)


def equilibrium_measure(V, **kw):
    """Closed form when one is known, otherwise the polished numerical minimizer."""
    if V.kind == "gaussian":
        return semicircle_measure(V.g)
    if V.kind == "vbp":
        if V.is_quartic_sym:
            return quartic_two_well_measure(-V.coefficients[0], V.g)
        return vbp_measure(V.coefficients, V.g)
    return minimize_energy(V, polish=True, **kw)


# ---------------------------------------------------------------------------
# density from a candidate support
# ---------------------------------------------------------------------------

def _P_polynomial(V, support, order=96):
    """Ascending coefficients of P, where rho = eps(l) |R|^{1/2} P(l) on sigma.

    P(l) = (1/2pi^2) sum_bands eps int Q(u, l) |R(u)|^{-1/2} du, with
    Q(u, l) = (V'(u) - V'(l))/(u - l) = sum_{i,j} d_{i+j+1} u^j l^i.
    """
    d = np.asarray(V.dpoly, dtype=float)
    deg = d.size - 1
    if deg < 1:
        return np.zeros(1)
    signs = support.band_signs()
    moments = np.zeros(deg)
    for jb, (a, b) in enumerate(support.bands):
        others = SupportBands(tuple(bb for kk, bb in enumerate(support.bands) if kk != jb)) if support.q > 1 else None
        for j in range(deg):
            def f(u, j=j):
                base = u ** j
                if others is not None:
                    base = base / np.sqrt(others.abs_R(u))
                return base
            moments[j] += signs[jb] * band_integral(support, jb, f, weight="invsqrt", order=order)
    p = np.zeros(deg)
    for i in range(deg):
        p[i] = sum(d[i + j + 1] * moments[j] for j in range(deg - i))
    return p / (2.0 * math.pi ** 2)


def dos_from_support(V, support):
    """Density P(l) sqrt(R_q(l)) for a candidate support."""
    pc = _P_polynomial(V, support)
    signs = support.band_signs()

    def density(lam):
        lam = np.asarray(lam, dtype=float)
        idx = support.band_index(lam)
        eps = np.where(idx >= 0, signs[np.clip(idx, 0, None)], 0.0)
        return eps * np.sqrt(support.abs_R(lam)) * P.polyval(lam, pc)

    probes = []
    for a, b in support.bands:
        t = np.linspace(0.0, math.pi, 203)[1:-1]
        probes.append(0.5 * (a + b) + 0.5 * (b - a) * np.cos(t))
    probes = np.concatenate(probes)
    vals = density(probes)
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    if np.min(vals) < -1e-10 * scale:
        raise InconsistentSupportError(
            f"density is negative on the candidate support (min {np.min(vals):.3e})")
    return _assemble(support, density, "numeric", V, P_coefficients=pc)


# ---------------------------------------------------------------------------
# endpoint equations (used to polish the discrete minimizer)
# ---------------------------------------------------------------------------

def _sqrtR_laurent(endpoints, nterms):
    """Coefficients s_k with sqrt(R(z)) = sum_k s_k z^{q-k}, R = prod(z - e)."""
    S = np.array([1.0])
    for e in endpoints:
        S = P.polymul(S, [1.0, -e])
    S = np.concatenate([S, np.zeros(max(0, nterms + 1 - S.size))])
    s = np.zeros(nterms + 1)
    s[0] = 1.0
    for k in range(1, nterms + 1):
        s[k] = 0.5 * (S[k] - np.dot(s[1:k], s[k - 1:0:-1]))
    return s


def _endpoint_system(V, q):
    dV = np.asarray(V.dpoly, dtype=float)
    d = dV.size - 1
    nh = d - q + 1
    if nh < 1:
        raise UnsupportedError(f"degree of V' ({d}) too small for {q} bands")

    def unpack(x):
        return x[:2 * q], x[2 * q:]

    def laurent_residual(e, h):
        s = _sqrtR_laurent(e, d + q + 1)
        # coefficient of z^p in h(z) sqrt(R(z)): sum_i h_i s_{i+q-p}
        res = []
        for p in range(d, -2, -1):
            c = sum(h[i] * s[i + q - p] for i in range(nh) if 0 <= i + q - p < s.size)
            target = 0.5 * dV[p] if p >= 0 else -1.0
            res.append(c - target)
        return res

    def gap_residual(e, h):
        out = []
        sup = None
        for l in range(q - 1):
            lo, hi = e[2 * l + 1], e[2 * l + 2]
            c, w = 0.5 * (lo + hi), 0.5 * (hi - lo)
            r = gauss_legendre(64, 0.0, math.pi)
            lam = c + w * np.cos(r.nodes)
            other = np.ones_like(lam)
            for k, ek in enumerate(e):
                if k not in (2 * l + 1, 2 * l + 2):
                    other = other * np.abs(lam - ek)
            val = P.polyval(lam, h) * np.sqrt(other) * (w * np.sin(r.nodes)) ** 2
            out.append(float(np.dot(r.weights, val)))
        return out

    def F(x):
        e, h = unpack(x)
        return np.array(laurent_residual(e, h) + gap_residual(e, h))

    def initial_h(e):
        s = _sqrtR_laurent(e, d + q + 1)
        h = np.zeros(nh)
        for i in range(nh - 1, -1, -1):
            p = i + q
            acc = 0.5 * dV[p] - sum(h[k] * s[k + q - p] for k in range(i + 1, nh))
            h[i] = acc
        return h

    return F, initial_h


def solve_endpoints(V, support_guess):
    """Newton-type solve of the endpoint equations from a guessed support."""
    from scipy.optimize import fsolve

    q = support_guess.q
    F, initial_h = _endpoint_system(V, q)
    e0 = support_guess.endpoints
    x0 = np.concatenate([e0, initial_h(e0)])
    x, info, ier, msg = fsolve(F, x0, full_output=True, xtol=1e-14)
    res = float(np.max(np.abs(F(x))))
    if res > 1e-9:
        raise ConvergenceError("endpoint equations did not converge", res)
    e = np.sort(x[:2 * q])
    return SupportBands(tuple((e[2 * j], e[2 * j + 1]) for j in range(q)))


# ---------------------------------------------------------------------------
# discrete minimizer
# ---------------------------------------------------------------------------

def _project_simplex(y):
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, y.size + 1)
    cond = u - css / k > 0
    r = k[cond][-1]
    tau = css[r - 1] / r
    return np.maximum(y - tau, 0.0)


def _log_kernel_matrix(N, h):
    # exact double cell average of log|x - y|: [Phi(d+h) - 2Phi(d) + Phi(d-h)]/h^2,
    # Phi(u) = u^2 log|u|/2 - 3u^2/4
    d = np.arange(N) * h

    def Phi(u):
        u = np.abs(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u > 0, 0.5 * u * u * np.log(np.where(u > 0, u, 1.0)), 0.0) - 0.75 * u * u

    col = (Phi(d + h) - 2.0 * Phi(d) + Phi(d - h)) / (h * h)
    from scipy.linalg import toeplitz
    return toeplitz(col)


def _kkt_residual(w, grad, thresh):
    on = w > thresh
    F = float(np.dot(w, grad))
    r_on = float(np.max(np.abs(grad[on] - F))) if np.any(on) else np.inf
    r_off = float(np.max(np.clip(F - grad[~on], 0.0, None))) if np.any(~on) else 0.0
    return r_on + r_off, F


def _active_set_finish(A, Vbar, w, max_rounds=60):
    """Solve the equality-constrained KKT system on the current support, adjusting it."""
    N = w.size
    S = w > 1e-14 * w.max()
    for _ in range(max_rounds):
        idx = np.flatnonzero(S)
        m = idx.size
        M = np.zeros((m + 1, m + 1))
        M[:m, :m] = 2.0 * A[np.ix_(idx, idx)]
        M[:m, m] = -1.0
        M[m, :m] = 1.0
        rhs = np.concatenate([-Vbar[idx], [1.0]])
        try:
            sol = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            return None
        ws, F = sol[:m], sol[m]
        if np.any(ws < 0):
            neg = idx[ws < 0]
            S[neg[np.argmin(ws[ws < 0])]] = False
            # drop all clearly negative entries at once
            S[idx[ws < -1e-3 * ws.max()]] = False
            continue
        wn = np.zeros(N)
        wn[idx] = ws
        grad = 2.0 * (A @ wn) + Vbar
        viol = (~S) & (grad < F - 1e-13 * max(1.0, abs(F)))
        if np.any(viol):
            S[np.flatnonzero(viol)[np.argsort(grad[viol])[:max(1, viol.sum() // 4)]]] = True
            continue
        return wn
    return None


def minimize_energy(V, grid=None, resolution=2000, *, max_iter=20000, tol=1e-9,
                    polish=False, threshold=1e-6, min_gap_cells=3):
    """Minimize the discretized log-gas energy over unit-mass cell weights.

    ``grid`` is an interval (lo, hi), optionally given as (lo, hi, resolution).
    The density is piecewise constant on ``resolution`` cells; the interaction
    is the exact cell-averaged log kernel, so the discrete functional is convex
    on the simplex. Accelerated projected gradient with restarts is followed by
    an exact active-set solve of the discrete optimality conditions.

    With ``polish=True`` the detected bands seed the endpoint equations and the
    returned measure carries the analytic density on the refined support.
    """
    if grid is None:
        grid = _default_interval(V)
    if len(grid) == 3:
        lo, hi, resolution = grid
    else:
        lo, hi = grid
    lo, hi, N = float(lo), float(hi), int(resolution)
    if not hi > lo or N < 16:
        raise DomainError("minimize_energy needs lo < hi and at least 16 cells")
    edges = np.linspace(lo, hi, N + 1)
    h = (hi - lo) / N
    x5 = gauss_legendre(5)
    cellpts = 0.5 * (edges[:-1, None] + edges[1:, None]) + 0.5 * h * x5.nodes[None, :]
    Vbar = (V(cellpts) @ x5.weights) / 2.0
    Vbar = Vbar - Vbar.min()
    A = -_log_kernel_matrix(N, h)          # energy = w.A.w + Vbar.w

    # Lipschitz constant of the gradient on the zero-sum subspace
    rng = np.random.default_rng(0)
    z = rng.standard_normal(N)
    lam = 1.0
    for _ in range(60):
        z = z - z.mean()
        y = A @ z
        y = y - y.mean()
        lam = float(np.linalg.norm(y) / np.linalg.norm(z))
        z = y / np.linalg.norm(y)
    step = 1.0 / (2.0 * lam * 1.05)

    w = np.full(N, 1.0 / N)
    yk, t = w.copy(), 1.0
    res = np.inf
    for it in range(max_iter):
        grad_y = 2.0 * (A @ yk) + Vbar
        w_new = _project_simplex(yk - step * grad_y)
        if np.dot(grad_y, w_new - w) > 0:      # adaptive restart
            t = 1.0
            yk = w.copy()
            continue
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        yk = w_new + ((t - 1.0) / t_new) * (w_new - w)
        w, t = w_new, t_new
        if it % 50 == 0:
            res, _ = _kkt_residual(w, 2.0 * (A @ w) + Vbar, 1e-12)
            if res < 1e-5:
                break
    wf = _active_set_finish(A, Vbar, w)
    if wf is not None:
        w = wf
    res, F = _kkt_residual(w, 2.0 * (A @ w) + Vbar, 0.0)
    if res > max(tol, 1e-5) and wf is None:
        raise ConvergenceError("discrete energy minimization did not converge", res)

    support = _detect_bands(edges, w, threshold, min_gap_cells)
    dens_vals = w / h

    def density(lam):
        lam = np.asarray(lam, dtype=float)
        k = np.clip(np.floor((lam - lo) / h).astype(int), 0, N - 1)
        inside = (lam >= lo) & (lam <= hi)
        return np.where(inside, dens_vals[k], 0.0)

    raw = EquilibriumMeasure(support=support, density=density, charges=(), closed_form_tag="numeric",
                             potential=V, edges=edges, masses=w.copy(),
                             info={"kkt_residual": res, "iterations": it + 1, "cell_width": h})
    charges = tuple(_cell_counting(edges, w, support.bands[l + 1][0]) for l in range(support.q - 1))
    raw = EquilibriumMeasure(support=support, density=density, charges=charges, closed_form_tag="numeric",
                             potential=V, edges=edges, masses=w.copy(), info=raw.info)
    if not polish:
        return raw
    refined = solve_endpoints(V, support)
    m = dos_from_support(V, refined)
    return EquilibriumMeasure(support=m.support, density=m.density, charges=m.charges,
                              closed_form_tag="numeric", potential=V, P_coefficients=m.P_coefficients,
                              info=dict(raw.info, polished=True))


def _default_interval(V):
    # a crude box: where V is below its minimum plus a margin of 8
    x = np.linspace(-20, 20, 40001)
    vals = V(x)
    ok = x[vals <= vals.min() + 8.0]
    w = ok.max() - ok.min()
    return ok.min() - 0.1 * w, ok.max() + 0.1 * w


def _detect_bands(edges, w, threshold, min_gap_cells):
    on = w > threshold * w.max()
    idx = np.flatnonzero(on)
    runs = []
    start = prev = idx[0]
    for i in idx[1:]:
        if i - prev - 1 >= min_gap_cells:
            runs.append((start, prev))
            start = i
        prev = i
    runs.append((start, prev))
    return SupportBands(tuple((edges[s], edges[e + 1]) for s, e in runs))


def _cell_counting(edges, masses, lam):
    # mass of [lam, inf) for a piecewise-constant density
    frac = np.clip((edges[1:] - lam) / np.diff(edges), 0.0, 1.0)
    return float(np.dot(frac, masses))


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def _probe_points(support, n_on=512, n_off=256):
    lengths = np.array([b - a for a, b in support.bands])
    counts = np.maximum(1, np.round(n_on * lengths / lengths.sum()).astype(int))
    on = []
    for (a, b), k in zip(support.bands, counts):
        on.append(a + (b - a) * (np.arange(k) + 0.5) / k)
    on = np.concatenate(on)
    span = support.upper - support.lower
    lo, hi = support.lower - 0.5 * span, support.upper + 0.5 * span
    cand = np.linspace(lo, hi, 8 * n_off)
    cand = cand[~support.contains(cand)]
    off = cand[np.linspace(0, cand.size - 1, min(n_off, cand.size)).astype(int)]
    return on, off


def effective_potential(V, measure, lam):
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return V(lam) - 2.0 * measure.log_potential(lam)


def euler_lagrange_residual(V, measure, *, return_details=False):
    """max_sigma |V_eff - F| + max_off (F - V_eff)_+, F = median of V_eff on sigma."""
    on, off = _probe_points(measure.support)
    ve_on = effective_potential(V, measure, on)
    ve_off = effective_potential(V, measure, off)
    F = float(np.median(ve_on))
    r = float(np.max(np.abs(ve_on - F))) + float(np.max(np.clip(F - ve_off, 0.0, None)) if off.size else 0.0)
    if return_details:
        return r, {"F": F, "on": on, "off": off, "veff_on": ve_on, "veff_off": ve_off}
    return r


def counting_function(measure, lam):
    """N(l) = N([l, inf))."""
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.empty(lam.shape)
    for i, x in enumerate(lam):
        if measure.edges is not None and measure.masses is not None:
            out[i] = _cell_counting(measure.edges, measure.masses, x)
            continue
        tot = 0.0
        for j, (a, b) in enumerate(measure.support.bands):
            if x <= a:
                tot += band_integral(measure.support, j, measure.density)
            elif x < b:
                tot += band_integral(measure.support, j, measure.density, lo=x)
        out[i] = tot
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Robin measure and charge derivatives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RobinMeasure:
    support: SupportBands
    density: Callable
    frequencies: tuple
    counting: Callable = None

    def mass(self):
        return float(self.counting(self.support.lower - 1.0))


def robin_measure_two_sym(a, b):
    """nu with density |l| / (pi |(b^2 - l^2)(l^2 - a^2)|^{1/2}) on [-b,-a] U [a,b]."""
    a, b = float(a), float(b)
    if not (0.0 < a < b):
        raise DomainError(f"need 0 < a < b, got a={a}, b={b}")
    support = SupportBands(((-b, -a), (a, b)))

    def density(lam):
        lam = np.asarray(lam, dtype=float)
        l2 = lam * lam
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.abs(lam) / (math.pi * np.sqrt(np.abs((b * b - l2) * (l2 - a * a))))
        return np.where(support.contains(lam), val, 0.0)

    def counting(lam):
        # with u = l^2 each band carries the arcsine law on [a^2, b^2] with mass 1/2
        lam = np.asarray(lam, dtype=float)
        l2 = np.clip(lam * lam, a * a, b * b)
        F = np.arccos(np.clip((2.0 * l2 - a * a - b * b) / (b * b - a * a), -1.0, 1.0)) / (2.0 * math.pi)
        # F = mass of {u > l2} on one band, in [0, 1/2]
        return np.where(lam >= 0, F, 1.0 - F)

    return RobinMeasure(support=support, density=density, frequencies=(0.5,), counting=counting)


def robin_measure_one_band(a, b):
    """Arcsine law on [a, b]."""
    a, b = float(a), float(b)
    if not a < b:
        raise DomainError("need a < b")
    support = SupportBands(((a, b),))

    def density(lam):
        lam = np.asarray(lam, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 1.0 / (math.pi * np.sqrt((lam - a) * (b - lam)))
        return np.where(support.contains(lam), val, 0.0)

    def counting(lam):
        lam = np.clip(np.asarray(lam, dtype=float), a, b)
        return np.arccos(np.clip((2.0 * lam - a - b) / (b - a), -1.0, 1.0)) / math.pi

    return RobinMeasure(support=support, density=density, frequencies=(), counting=counting)


@dataclass(frozen=True)
class NuConsistencyReport:
    max_discrepancy: float
    probes: np.ndarray
    finite_difference: np.ndarray
    robin: np.ndarray
    step: float


def nu_as_g_derivative(V, step=1e-4, probes=None):
    """Compare d/dg (g N(l, g)) by central differences with the Robin counting function."""
    if V.kind == "gaussian" or (V.kind == "vbp" and V.q == 1):
        def measure_at(g):
            return equilibrium_measure(V.with_g(g))
    elif V.is_quartic_sym:
        def measure_at(g):
            return quartic_two_well_measure(-V.coefficients[0], g)
    else:
        raise UnsupportedError("closed-form measures in g are available only for one-band vbp and quartic-sym")
    g = V.g
    if not step > 0 or step < 1e-12 * g or g - step <= 0 or g + step == g:
        raise StepSizeError(f"finite-difference step {step} unusable at g = {g}")
    m0 = measure_at(g)
    sup = m0.support
    if sup.q == 1:
        nu = robin_measure_one_band(*sup.bands[0])
    else:
        nu = robin_measure_two_sym(sup.bands[1][0], sup.bands[1][1])
    if probes is None:
        span = sup.upper - sup.lower
        probes = np.linspace(sup.lower - 0.2 * span, sup.upper + 0.2 * span, 241)
        dist = np.min(np.abs(probes[:, None] - sup.endpoints[None, :]), axis=1)
        probes = probes[dist > 0.02 * span]
    probes = np.asarray(probes, dtype=float)
    gp, gm = g + step, g - step
    fd = (gp * counting_function(measure_at(gp), probes) - gm * counting_function(measure_at(gm), probes)) / (2 * step)
    rb = nu.counting(probes)
    return NuConsistencyReport(float(np.max(np.abs(fd - rb))), probes, fd, rb, step)


def _value_fn(phi):
    return phi.value if hasattr(phi, "value") else phi


def beta_dot(phi, support):
    """Variational derivative of the charge beta_1 along V -> V + eps phi (two bands).

    beta1_dot = -(1/(2 pi I)) [int_{a2}^{b2} phi/|R|^{1/2} - int_{a1}^{b1} phi/|R|^{1/2}],
    I = int_{b1}^{a2} |R|^{-1/2} = 2 K(kappa) / ((b2-b1)(a2-a1))^{1/2}.
    """
    if support.q != 2:
        raise UnsupportedError(f"beta_dot needs a two-band support, got q = {support.q}")
    f = _value_fn(phi)
    (a1, b1), (a2, b2) = support.bands
    kappa = math.sqrt((a2 - b1) * (b2 - a1) / ((b2 - b1) * (a2 - a1)))
    I = 2.0 * complete_K(kappa) / math.sqrt((b2 - b1) * (a2 - a1))
    parts = []
    for j, (a, b) in enumerate(support.bands):
        oa, ob = support.bands[1 - j]
        parts.append(band_integral(support, j,
                                   lambda u: np.asarray(f(u), dtype=float) / np.sqrt(np.abs((u - oa) * (u - ob))),
                                   weight="invsqrt", order=96))
    return -(parts[1] - parts[0]) / (2.0 * math.pi * I)
