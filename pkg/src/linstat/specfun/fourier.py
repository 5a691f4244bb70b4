"""Fourier analysis of real 1-periodic samples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class FourierSeries:
    """Coefficients c_m, m = -M..M, of a 1-periodic function.

    ``coefficients[m + M]`` holds c_m. For even sample counts the Nyquist
    term is split evenly between m = +-M so that real input reconstructs
    exactly on its sample grid.
    """

    coefficients: np.ndarray
    real: bool = True

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def M(self):
        return (self.coefficients.size - 1) // 2

    @property
    def period(self):
        return 1.0

    def __getitem__(self, m):
        m = int(m)
        if abs(m) > self.M:
            return 0j
        return self.coefficients[m + self.M]

    def as_dict(self):
        return {m: self[m] for m in range(-self.M, self.M + 1)}

    def __call__(self, x, derivative=0):
        x = np.asarray(x, dtype=float)
        m = np.arange(-self.M, self.M + 1)
        fac = (2j * np.pi * m) ** derivative
        val = np.exp(2j * np.pi * np.multiply.outer(x, m)) @ (self.coefficients * fac)
        return val.real if self.real else val


def fourier_analyze(samples, grid=None):
    """Discrete Fourier coefficients of samples on the grid x_j = x_0 + j/N.

    ``grid`` is optional; when given it must be uniform with spacing 1/N,
    and the coefficients are referred to x = 0.
    """
    y = np.asarray(samples)
    if y.ndim != 1:
        raise DomainError("samples must be one-dimensional")
    N = y.size
    if N < 64 or N & (N - 1):
        raise DomainError(f"sample count must be a power of two >= 64, got {N}")
    x0 = 0.0
    if grid is not None:
        g = np.asarray(grid, dtype=float)
        if g.shape != y.shape or not np.allclose(np.diff(g), 1.0 / N, rtol=0, atol=1e-12):
            raise DomainError("grid must be uniform with spacing 1/N over one period")
        x0 = float(g[0])
    real = not np.iscomplexobj(y)
    c = np.fft.fft(y) / N
    M = N // 2
    m = np.arange(-M, M + 1)
    out = np.empty(2 * M + 1, dtype=complex)
    out[M:] = c[: M + 1]
    out[:M] = c[M:]
    out[0] *= 0.5
    out[-1] = out[0]
    if x0:
        out *= np.exp(-2j * np.pi * m * x0)
    return FourierSeries(coefficients=out, real=real)
