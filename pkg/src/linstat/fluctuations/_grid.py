"""Quadrature grids adapted to the kernel's effective support and to test-function features."""

from __future__ import annotations

import numpy as np

from ..errors import RangeError
from ..orthopoly import PANEL_ORDER, evaluate_psi
from ..specfun import gauss_legendre

TRIM = 1e-32           # envelope psi_{n-1}^2 + psi_n^2 relative to its peak
FEATURE_SPAN = 12      # feature refinement covers center +- 12 scales at unit spacing
FEATURE_ORDER = 24


def effective_window(table, n):
    """Smallest run of table panels outside which psi_{n-1}^2 + psi_n^2 < TRIM * max."""
    rule = table.rule
    wf = evaluate_psi(table, table.potential, rule.nodes, degree=n)
    env = wf.psi[n - 1] ** 2 + wf.psi[n] ** 2
    keep = np.nonzero(env > TRIM * env.max())[0]
    edges = np.asarray(rule.edges, dtype=float)
    lo = edges[max(np.searchsorted(edges, rule.nodes[keep[0]]) - 1, 0)]
    hi = edges[min(np.searchsorted(edges, rule.nodes[keep[-1]]), edges.size - 1)]
    return float(lo), float(hi), edges[(edges >= lo) & (edges <= hi)]


def panel_rule(edges, order=PANEL_ORDER, base=None, min_order=FEATURE_ORDER):
    """Composite rule on ``edges``.

    With ``base`` (a reference panel width) each panel gets an order scaled by
    its length relative to ``base``, never below ``min_order``.
    """
    nodes, weights = [], []
    for j in range(edges.size - 1):
        a, b = edges[j], edges[j + 1]
        if b <= a:
            continue
        m = order if base is None else max(min_order, min(order, int(np.ceil(order * (b - a) / base))))
        r = gauss_legendre(m, a, b)
        nodes.append(r.nodes)
        weights.append(r.weights)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def refine_edges(edges, features, lo, hi, span=FEATURE_SPAN):
    """Add breakpoints at features: a unit-spaced ladder for smooth ones, the point for jumps."""
    extra = []
    for c, h in features:
        if h > 0:
            extra.extend(c + h * np.arange(-span, span + 1))
        else:
            if not lo < c < hi:
                raise RangeError(f"breakpoint {c} lies outside the kernel window ({lo}, {hi})")
            extra.append(c)
    out = np.concatenate([np.asarray(edges, dtype=float), np.asarray(extra, dtype=float)])
    out = np.unique(np.clip(out, lo, hi))
    # drop slivers left by near-coincident breakpoints
    keep = np.concatenate([[True], np.diff(out) > 1e-12 * max(1.0, hi - lo)])
    return out[keep]


def adapted_rule(table, n, features=(), interval=None):
    """Nodes and weights over the effective window, refined at ``features``.

    ``interval`` restricts the rule to a sub-interval (its ends become breakpoints).
    """
    lo, hi, edges = effective_window(table, n)
    if interval is not None:
        a, b = interval
        a, b = max(a, lo), min(b, hi)
        if b <= a:
            return np.zeros(0), np.zeros(0)
        edges = np.concatenate([[a], edges[(edges > a) & (edges < b)], [b]])
        lo, hi = a, b
    base = float(np.median(np.diff(edges))) if edges.size > 1 else hi - lo
    feats = [(c, h) for c, h in features if h > 0 or lo < c < hi]
    edges = refine_edges(edges, feats, lo, hi)
    return panel_rule(edges, base=base)
