"""Laplace transform of the centered statistic: log Z_n[phi] = log E exp(-(N_n[phi] - E N_n[phi])).

By the Heine formula E exp(-N_n[phi]) = det G, G_jk = int exp(-phi) psi_j psi_k, so

    log Z_n[phi] = log det G + E N_n[phi],   E N_n[phi] = int phi K_n(l, l) dl.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConditioningError
from ..orthopoly import WaveFunctionGrid, evaluate_psi, gram_matrix
from ..specfun import gauss_legendre
from ..specfun.extended import dd_div, dd_mul, dd_sub
from ._grid import adapted_rule

PIVOT_TOL = 1e-14


def logdet_dd(G):
    """log det of a matrix with positive determinant by LU with partial pivoting in double-double."""
    hi = np.array(G, dtype=float)
    lo = np.zeros_like(hi)
    m = hi.shape[0]
    logdet, sign = 0.0, 1.0
    pivots = np.empty(m)
    for k in range(m):
        p = k + int(np.argmax(np.abs(hi[k:, k])))
        if p != k:
            hi[[k, p]] = hi[[p, k]]
            lo[[k, p]] = lo[[p, k]]
            sign = -sign
        ph, pl = hi[k, k], lo[k, k]
        piv = ph + pl
        pivots[k] = abs(piv)
        if piv == 0.0 or pivots[k] < PIVOT_TOL * pivots[:k + 1].max():
            raise ConditioningError(f"Gram matrix numerically singular at pivot {k}")
        if piv < 0:
            sign = -sign
        logdet += math.log(abs(piv))
        if k + 1 < m:
            lh, ll = dd_div(hi[k + 1:, k], lo[k + 1:, k], np.full(m - k - 1, ph), np.full(m - k - 1, pl))
            th, tl = dd_mul(lh[:, None], ll[:, None], hi[k, None, k + 1:], lo[k, None, k + 1:])
            hi[k + 1:, k + 1:], lo[k + 1:, k + 1:] = dd_sub(hi[k + 1:, k + 1:], lo[k + 1:, k + 1:], th, tl)
    if sign < 0:
        raise ConditioningError("Gram matrix has a negative determinant")
    return logdet


def _grid_for(source, phi):
    """Wave functions 0..n-1 on a rule adapted to phi; ``source`` is a kernel, table-backed grid or a grid."""
    if isinstance(source, WaveFunctionGrid) and source.table is None:
        return source
    table = source.table
    n = source.n
    x, w = adapted_rule(table, n, phi.features)
    return evaluate_psi(table, table.potential, x, weights=w, degree=n)


def expected_statistic(wf, phi):
    """E N_n[phi] = sum_{l<n} int phi psi_l^2."""
    Y = wf.psi[:wf.n]
    return float(np.dot(wf.weights * phi(wf.lambda_grid), np.sum(Y * Y, axis=0)))


def laplace_exact(source, phi, *, details=False):
    """log Z_n[phi] = log det G + E N_n[phi] with the determinant in double-double."""
    wf = _grid_for(source, phi)
    G = gram_matrix(wf, phi)
    ld = logdet_dd(G)
    mean = expected_statistic(wf, phi)
    if details:
        return {"value": ld + mean, "logdet": ld, "mean": mean, "nodes": int(wf.lambda_grid.size)}
    return ld + mean


def laplace_cumulant(source, phi, order=24):
    """Oracle: int_0^1 (1 - s) Var_s{N[phi]} ds, Var_s under the tilted weight exp(-nV - s phi)."""
    wf = _grid_for(source, phi)
    n = wf.n
    Y = wf.psi[:n]
    x, w = wf.lambda_grid, wf.weights
    p = phi(x)
    gl = gauss_legendre(order, 0.0, 1.0)
    total = 0.0
    for s, ws in zip(gl.nodes, gl.weights):
        e = np.exp(-s * p) * w
        G = (Y * e) @ Y.T
        A1 = (Y * (e * p)) @ Y.T
        A2 = (Y * (e * p * p)) @ Y.T
        L = np.linalg.cholesky(0.5 * (G + G.T))
        B1 = np.linalg.solve(L, np.linalg.solve(L, A1).T).T  # L^-1 A1 L^-T
        B2 = np.linalg.solve(L, np.linalg.solve(L, A2).T).T
        var = float(np.trace(B2) - np.sum(B1 * B1.T))
        total += ws * (1.0 - s) * var
    return total


def clt_defect(finite, varhalf):
    """log Z_n[phi] - Var/2; tends to zero exactly when the generalized CLT holds."""
    return float(finite) - float(varhalf)


def cumulant_derivatives(source, phi, h=1e-3):
    """F_n(0) and F_n'(0) of F_n(t) = log Z_n[t phi] by central differences."""
    f0 = laplace_exact(source, phi.times(0.0))
    fp = laplace_exact(source, phi.times(h))
    fm = laplace_exact(source, phi.times(-h))
    return f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)
