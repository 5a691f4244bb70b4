"""Complete elliptic integrals and the Jacobi function cn.

All routines use the modulus ``k`` (not the parameter ``m = k**2``).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError

_AGM_TOL = 1e-16


def _check_modulus(k, allow_one=False):
    k = float(k)
    if not np.isfinite(k) or k < 0.0 or k > 1.0 or (k == 1.0 and not allow_one):
        raise DomainError(f"elliptic modulus must lie in [0, 1{']' if allow_one else ')'}, got {k!r}")
    return k


def _agm_chain(k):
    """Return the lists a_n, b_n, c_n of the arithmetic-geometric mean of 1 and k'."""
    a, b, c = 1.0, math.sqrt((1.0 - k) * (1.0 + k)), k
    A, B, C = [a], [b], [c]
    for _ in range(64):
        if abs(c) <= _AGM_TOL * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        A.append(a)
        B.append(b)
        C.append(c)
    return A, B, C


def complete_K(k):
    """K(k) = int_0^{pi/2} (1 - k^2 sin^2 t)^{-1/2} dt by the AGM."""
    k = _check_modulus(k)
    A, _, _ = _agm_chain(k)
    return math.pi / (2.0 * A[-1])


def complete_E(k):
    """E(k) = int_0^{pi/2} (1 - k^2 sin^2 t)^{1/2} dt via the AGM with the c_n sum."""
    k = _check_modulus(k, allow_one=True)
    if k == 1.0:
        return 1.0
    A, _, C = _agm_chain(k)
    s = 0.0
    for n, c in enumerate(C):
        s += 2.0 ** (n - 1) * c * c
    return math.pi / (2.0 * A[-1]) * (1.0 - s)


def jacobi_sn_cn_dn(u, k):
    """sn, cn, dn of ``u`` by the descending Landen (AGM) chain.

    Works elementwise on arrays. The amplitude phi_0 is recovered exactly,
    so ``sn = sin(phi_0)`` and ``cn = cos(phi_0)``.
    """
    k = _check_modulus(k)
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    A, _, C = _agm_chain(k)
    N = len(A) - 1
    phi = (2.0 ** N) * A[-1] * u
    for n in range(N, 0, -1):
        phi = 0.5 * (phi + np.arcsin(np.clip(C[n] / A[n] * np.sin(phi), -1.0, 1.0)))
    sn, cn = np.sin(phi), np.cos(phi)
    dn = np.sqrt(1.0 - (k * sn) ** 2)
    return sn, cn, dn


def jacobi_cn(u, k):
    """cn(u | k) with modulus ``k`` in [0, 1)."""
    _, cn, _ = jacobi_sn_cn_dn(u, k)
    return cn if cn.ndim else float(cn)
