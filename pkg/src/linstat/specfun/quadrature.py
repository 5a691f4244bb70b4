"""Gauss-Legendre rules, with nodes refined in double-double."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import DomainError
from .extended import dd_add, dd_div, dd_mul, dd_mul_d, dd_sub


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on ``[a, b]``.

    ``order`` is the per-panel Gauss order; ``edges`` lists panel
    boundaries for composite rules (a single panel otherwise).
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    a: float
    b: float
    edges: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("nodes", "weights"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        edges = np.array([self.a, self.b] if self.edges is None else self.edges, dtype=float)
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    def integrate(self, f):
        return float(np.dot(self.weights, f(self.nodes)))

    def __len__(self):
        return self.nodes.size


def _legendre_dd(n, xh, xl):
    """P_n and P_n' at x in double-double via the three-term recurrence."""
    p0h, p0l = np.ones_like(xh), np.zeros_like(xh)
    p1h, p1l = xh.copy(), xl.copy()
    for j in range(1, n):
        # P_{j+1} = ((2j+1) x P_j - j P_{j-1}) / (j+1)
        th, tl = dd_mul(xh, xl, p1h, p1l)
        th, tl = dd_mul_d(th, tl, 2.0 * j + 1.0)
        uh, ul = dd_mul_d(p0h, p0l, float(j))
        th, tl = dd_sub(th, tl, uh, ul)
        th, tl = dd_div(th, tl, np.full_like(th, j + 1.0), np.zeros_like(th))
        p0h, p0l, p1h, p1l = p1h, p1l, th, tl
    # P_n' = n (x P_n - P_{n-1}) / (x^2 - 1)
    ah, al = dd_mul(xh, xl, p1h, p1l)
    ah, al = dd_sub(ah, al, p0h, p0l)
    ah, al = dd_mul_d(ah, al, float(n))
    sh, sl = dd_mul(xh, xl, xh, xl)
    sh, sl = dd_add(sh, sl, -np.ones_like(sh), np.zeros_like(sh))
    dh, dl = dd_div(ah, al, sh, sl)
    return (p1h, p1l), (dh, dl)


@lru_cache(maxsize=256)
def _reference_rule(order):
    n = order
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    # Newton in double first, then polish in double-double
    for _ in range(100):
        p0, p1 = np.ones_like(x), x.copy()
        for j in range(1, n):
            p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    xh, xl = x, np.zeros_like(x)
    for _ in range(2):
        (ph, pl), (dh, dl) = _legendre_dd(n, xh, xl)
        qh, ql = dd_div(ph, pl, dh, dl)
        xh, xl = dd_sub(xh, xl, qh, ql)
    (_, _), (dh, dl) = _legendre_dd(n, xh, xl)
    # w = 2 / ((1 - x^2) P_n'^2)
    sh, sl = dd_mul(xh, xl, xh, xl)
    sh, sl = dd_sub(np.ones_like(sh), np.zeros_like(sh), sh, sl)
    qh, ql = dd_mul(dh, dl, dh, dl)
    qh, ql = dd_mul(sh, sl, qh, ql)
    wh, wl = dd_div(np.full_like(qh, 2.0), np.zeros_like(qh), qh, ql)
    order_idx = np.argsort(xh)
    xh, xl, wh, wl = xh[order_idx], xl[order_idx], wh[order_idx], wl[order_idx]
    # enforce exact symmetry
    xh = 0.5 * (xh - xh[::-1])
    if n % 2:
        xh[n // 2] = 0.0
    wh = 0.5 * (wh + wh[::-1])
    for arr in (xh, wh):
        arr.setflags(write=False)
    return xh, wh


def gauss_legendre(order, a=-1.0, b=1.0):
    """Gauss-Legendre rule of the given order mapped onto ``[a, b]``."""
    if int(order) != order or order <= 0:
        raise DomainError(f"quadrature order must be a positive integer, got {order!r}")
    a, b = float(a), float(b)
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    x, w = _reference_rule(int(order))
    h = 0.5 * (b - a)
    return QuadratureRule(nodes=0.5 * (a + b) + h * x, weights=h * w, order=int(order), a=a, b=b)


def composite_gauss_legendre(edges, order):
    """Gauss-Legendre rule of ``order`` on every panel between consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("panel edges must be strictly increasing with at least two entries")
    x, w = _reference_rule(int(order))
    lo, hi = edges[:-1, None], edges[1:, None]
    h = 0.5 * (hi - lo)
    nodes = (0.5 * (lo + hi) + h * x).ravel()
    weights = (h * w).ravel()
    return QuadratureRule(nodes=nodes, weights=weights, order=int(order),
                          a=float(edges[0]), b=float(edges[-1]), edges=edges)


def merge_rules(*rules):
    """Concatenate rules on abutting intervals into one."""
    rules = sorted(rules, key=lambda r: r.a)
    for r0, r1 in zip(rules, rules[1:]):
        if r1.a < r0.b - 1e-14 * max(1.0, abs(r0.b)):
            raise DomainError("rules to merge overlap")
    edges = np.unique(np.concatenate([r.edges for r in rules]))
    return QuadratureRule(nodes=np.concatenate([r.nodes for r in rules]),
                          weights=np.concatenate([r.weights for r in rules]),
                          order=max(r.order for r in rules), a=rules[0].a, b=rules[-1].b,
                          edges=edges)
