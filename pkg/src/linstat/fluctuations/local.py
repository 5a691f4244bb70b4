"""Local and intermediate regimes: sine-kernel variance, the H^{1/2} norm, Fredholm determinants.

With u = t1 - t2 and g(u) = int (phi(t + u) - phi(t))^2 dt every double integral
of the form int int (dphi)^2 k(t1 - t2) collapses to int g(u) k(u) du.  For a
decaying phi, g(u) -> 2 int phi^2 so the tail past |u| = U is analytic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from ..errors import DivergenceError, DomainError, SizeError
from ..specfun import composite_gauss_legendre, gauss_legendre

DECAY_TOL = 1e-14
FREDHOLM_TOL = 1e-10
MAX_NYSTROM = 4000


@dataclass(frozen=True)
class PairIntegral:
    value: float
    tail: float
    tail_bound: float
    window: tuple


def _scale(phi):
    hs = [h for _, h in phi.features if h > 0]
    return min(hs) if hs else 1.0


def _center(phi):
    cs = [c for c, _ in phi.features]
    return float(np.mean(cs)) if cs else 0.0


def support_window(phi, tol, max_steps=100000):
    """Smallest [lo, hi] around the features outside which |f(phi)| < tol, sampled at scale/8."""
    c, h = _center(phi), _scale(phi)
    step = h / 8.0
    out = []
    for sgn in (-1.0, 1.0):
        x = c + sgn * step * np.arange(max_steps)
        bad = np.nonzero(np.abs(tol[1](phi(x))) >= tol[0])[0]
        if bad.size and bad[-1] >= max_steps - 64:
            raise DivergenceError("test function does not decay")
        last = bad[-1] + 1 if bad.size else 1
        out.append(c + sgn * step * last)
    return float(out[0]), float(out[1])


def _gram(phi, lo, hi, order):
    panels = max(4, int(math.ceil((hi - lo) / _scale(phi))))
    return composite_gauss_legendre(np.linspace(lo, hi, panels + 1), order)


def _autocorrelation_gap(phi, u, rule):
    """g(u) = int (phi(t+u) - phi(t))^2 dt on a rule covering both supports."""
    t, w = rule.nodes, rule.weights
    p = phi(t)
    e0 = float(w @ (p * p))
    # int phi(t) phi(t+u): shift the evaluation, phi(t+u) vanishes where t+u leaves the support
    C = np.array([float(w @ (p * phi(t + uu))) for uu in np.atleast_1d(u)])
    return 2.0 * e0 - 2.0 * C, 2.0 * e0


def _pair_integral(phi, kernel_u, tail_u, decay_tol=DECAY_TOL, order=24):
    """int_R g(u) kernel_u(u) du with the analytic tail for |u| > U."""
    lo, hi = support_window(phi, (decay_tol, lambda v: v))
    width = hi - lo
    rule = _gram(phi, lo, hi, order)
    U = max(width, 8.0 * _scale(phi))
    h = min(_scale(phi), 0.5) / 2.0
    panels = int(math.ceil(U / h))
    urule = composite_gauss_legendre(np.linspace(0.0, U, panels + 1), order)
    g, g_inf = _autocorrelation_gap(phi, urule.nodes, rule)
    body = 2.0 * float(urule.weights @ (g * kernel_u(urule.nodes)))
    tail = 2.0 * g_inf * tail_u(U)
    # g(u) equals g_inf exactly once u > width (no overlap), so the tail is exact up to decay_tol
    bound = 2.0 * decay_tol * width * tail_u(U)
    return PairIntegral(value=body + tail, tail=tail, tail_bound=bound, window=(lo, hi))


def _sin2_tail(c):
    # int_U^inf sin^2(c u)/u^2 du = sin^2(cU)/U + c (pi/2 - Si(2cU))
    return lambda U: math.sin(c * U) ** 2 / U + c * (math.pi / 2.0 - float(sici(2.0 * c * U)[0]))


def sine_kernel_variance(phi, rho0, *, averaged=False, details=False):
    """int int (phi(t1) - phi(t2))^2 sin^2(pi rho0 (t1 - t2)) / (2 pi^2 (t1 - t2)^2).

    ``averaged`` replaces sin^2 by its mean 1/2.
    """
    rho0 = float(rho0)
    if not rho0 > 0:
        raise DomainError(f"rho0 must be positive, got {rho0}")
    c = math.pi * rho0
    if averaged:
        kern = lambda u: 0.25 / (math.pi ** 2 * u * u)
        tail = lambda U: 0.25 / (math.pi ** 2 * U)
    else:
        # Gauss nodes never hit u = 0
        kern = lambda u: np.sin(c * u) ** 2 / (2 * math.pi ** 2 * u * u)
        s2 = _sin2_tail(c)
        tail = lambda U: s2(U) / (2 * math.pi ** 2)
    res = _pair_integral(phi, kern, tail)
    return res if details else res.value


def intermediate_variance(phi, *, details=False, check=1e-6):
    """int |k| |phihat(k)|^2 dk, cross-checked against int int (dphi)^2 / (4 pi^2 dt^2)."""
    if phi.fourier is None:
        raise DomainError("intermediate_variance needs the Fourier transform of phi")
    h = _scale(phi)
    kmax = 80.0 / h
    # heavy tails show up as non-negligible |k| |phihat|^2 at the cutoff
    edge = abs(kmax) * abs(complex(phi.fourier(kmax))) ** 2
    peak = max(abs(complex(phi.fourier(k))) ** 2 * abs(k) for k in np.linspace(0.1 / h, 5.0 / h, 64))
    if not edge < 1e-14 * max(peak, 1e-300):
        raise DivergenceError("phihat decays too slowly for int |k| |phihat|^2 to converge")
    rule = composite_gauss_legendre(np.linspace(0.0, kmax, 801), 24)
    k = rule.nodes
    f = np.abs(phi.fourier(k)) ** 2 + np.abs(phi.fourier(-k)) ** 2
    fourier_val = float(rule.weights @ (k * f))
    direct = sine_kernel_variance(phi, 1.0, averaged=True)
    if abs(direct - fourier_val) > check * max(1.0, abs(fourier_val)):
        raise DivergenceError(f"direct ({direct:.12g}) and Fourier ({fourier_val:.12g}) routes disagree")
    if details:
        return {"fourier": fourier_val, "direct": direct}
    return fourier_val


def fredholm_sine_det(phi, rho0, *, order=None, max_size=MAX_NYSTROM, details=False):
    """2 pi rho0 phihat(0) + log det(1 - S_phi), S_phi with kernel sin(pi rho0 (t-u))/(pi (t-u)) (1 - e^{-phi(u)})."""
    rho0 = float(rho0)
    if not rho0 > 0:
        raise DomainError(f"rho0 must be positive, got {rho0}")
    lo, hi = support_window(phi, (FREDHOLM_TOL, lambda v: -np.expm1(-v)))
    width = hi - lo
    if order is None:
        order = int(max(48, math.ceil(2.0 * rho0 * width + 4.0 * width / _scale(phi))))
    if order > max_size:
        raise SizeError(f"Nystrom size {order} exceeds limit {max_size}")
    gl = gauss_legendre(order, lo, hi)
    t, w = gl.nodes, gl.weights
    f = -np.expm1(-phi(t))
    d = t[:, None] - t[None, :]
    S = rho0 * np.sinc(rho0 * d)
    sw = np.sqrt(w)
    A = np.eye(order) - sw[:, None] * S * (f * sw)[None, :]
    sign, logdet = np.linalg.slogdet(A)
    if sign <= 0:
        raise DivergenceError("det(1 - S_phi) is not positive")
    mean = rho0 * float(w @ phi(t))
    val = mean + logdet
    if details:
        return {"value": val, "mean_term": mean, "logdet": logdet, "order": order, "window": (lo, hi)}
    return val


def b_identity_check_q1(r, probes, d_scale=1.0):
    """max |B - 1| for B(l) = 4 pi^2 r^2 D(l)^2 sin^2(pi nu(l)), one band [-2r, 2r].

    D = -nu' = 1/(pi sqrt(4r^2 - l^2)) and l = 2r cos(pi nu).  ``d_scale``
    multiplies D, for sensitivity checks.
    """
    r = float(r)
    lam = np.atleast_1d(np.asarray(probes, dtype=float))
    if np.any(np.abs(lam) >= 2.0 * r):
        raise DomainError(f"probes must lie strictly inside (-{2 * r}, {2 * r})")
    nu = np.arccos(lam / (2.0 * r)) / math.pi
    D = d_scale / (math.pi * np.sqrt(4.0 * r * r - lam * lam))
    B = 4.0 * math.pi ** 2 * r * r * D * D * np.sin(math.pi * nu) ** 2
    return float(np.max(np.abs(B - 1.0)))
