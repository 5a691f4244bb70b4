"""Limiting log-Laplace exponent for the symmetric two-band model.

For the two-well quartic the recurrence coefficient obeys r_{n+k-1} ~ R(n/2 + k/2)
with R^2 1-periodic, and for phi = t lambda

    log Z_n[t lambda] -> F(t, x) = int_0^t (t - s) R^2(x + s omega) ds,  x = n/2 mod 1.

Expanding R^2 = sum c_m e^{2 pi i m x} and A(x) = sum_{m != 0} c_m e^{2 pi i m x}/(2 pi i m omega)^2
gives F = c_0 t^2/2 - t omega A'(x) - A(x) + A(x + omega t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..specfun import FourierSeries, complete_K, composite_gauss_legendre, fourier_analyze, jacobi_cn

FFT_SIZE = 1024
A_TERMS = 64


def two_band_r2(x, a, b):
    """R^2(x) = (b-a)^2/4 + a b cn^2(2 K(k)(x + 1/2) | k),  k^2 = 4ab/(a+b)^2.

    1-periodic, with R^2(0) = ((b-a)/2)^2 and R^2(1/2) = ((b+a)/2)^2.
    """
    a, b = float(a), float(b)
    if not 0 < a < b:
        raise DomainError(f"need 0 < a < b, got a = {a}, b = {b}")
    k = 2.0 * math.sqrt(a * b) / (a + b)
    K = complete_K(k)
    cn = jacobi_cn(2.0 * K * (np.asarray(x, dtype=float) + 0.5), k)
    return (b - a) ** 2 / 4.0 + a * b * np.asarray(cn) ** 2


@dataclass(frozen=True)
class LimitLawQ2:
    a: float
    b: float
    omega: float
    c: FourierSeries
    M: int = A_TERMS

    @property
    def c0(self):
        return float(self.c[0].real)

    def R2(self, x):
        return two_band_r2(x, self.a, self.b)

    def A_series(self, x, derivative=0):
        """A(x) (or its derivative) from the first ``M`` harmonics."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for m in range(1, self.M + 1):
            for mm in (m, -m):
                den = (2j * math.pi * mm * self.omega) ** 2
                out = out + self.c[mm] / den * (2j * math.pi * mm) ** derivative * np.exp(2j * math.pi * mm * x)
        return out.real

    def F(self, t, x=0.0):
        t = np.asarray(t, dtype=float)
        return (self.c0 * t * t / 2.0 - t * self.omega * self.A_series(x, 1)
                - self.A_series(x) + self.A_series(x + self.omega * t))

    def F_quadrature(self, t, x=0.0, panels=64, order=32):
        """Direct int_0^t (t - s) R^2(x + s omega) ds."""
        t = float(t)
        if t == 0.0:
            return 0.0
        rule = composite_gauss_legendre(np.linspace(0.0, t, panels + 1), order)
        s = rule.nodes
        return float(np.dot(rule.weights, (t - s) * self.R2(x + s * self.omega)))

    def clt_defect(self, t, x=0.0):
        """Predicted log Z - Var/2 for phi = t lambda: F(t, x) - t^2 R^2(x)/2."""
        return float(self.F(t, x) - 0.5 * t * t * self.R2(x))

    def non_quadraticity(self, t, x=0.0):
        """F(2t) - 4 F(t); zero iff F is quadratic along this ray."""
        return float(self.F(2.0 * t, x) - 4.0 * self.F(t, x))


def limit_law_q2(a, b, fft_size=FFT_SIZE, terms=A_TERMS):
    """Limit law for the support [-b, -a] U [a, b]; omega = -b / (4 K(a/b))."""
    a, b = float(a), float(b)
    if not 0 < a < b:
        raise DomainError(f"need 0 < a < b, got a = {a}, b = {b}")
    x = np.arange(fft_size) / fft_size
    c = fourier_analyze(two_band_r2(x, a, b))
    omega = -b / (4.0 * complete_K(a / b))
    return LimitLawQ2(a=a, b=b, omega=omega, c=c, M=int(terms))
