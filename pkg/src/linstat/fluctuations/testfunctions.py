"""Test functions phi for linear statistics N_n[phi] = sum_j phi(lambda_j)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import DomainError, UnsupportedError

KINDS = ("linear", "polynomial", "gaussian-bump", "indicator", "scaled")


@dataclass(frozen=True)
class TestFunction:
    """A test function with its derivative and, where known, its Fourier transform.

    ``fourier(k)`` is (1/2 pi) int exp(i k t) phi(t) dt.  ``features`` lists
    (center, scale) pairs where quadrature should be refined; a zero scale
    marks a jump.
    """

    __test__ = False

    kind: str
    value: Callable
    derivative: Optional[Callable] = None
    fourier: Optional[Callable] = None
    params: dict = field(default_factory=dict)
    features: tuple = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.value(x), dtype=float) * np.ones_like(x)

    def d(self, x):
        if self.derivative is None:
            raise UnsupportedError(f"{self.kind} test function has no derivative")
        x = np.asarray(x, dtype=float)
        return np.asarray(self.derivative(x), dtype=float) * np.ones_like(x)

    @property
    def is_c1(self):
        return self.derivative is not None

    def sup_derivative(self, lo, hi, points=20001):
        """sup |phi'| on [lo, hi], sampled (plus feature centers)."""
        x = np.linspace(lo, hi, points)
        extra = [c for c, h in self.features if lo <= c <= hi]
        for c, h in self.features:
            if h > 0:
                extra.extend(np.clip(c + h * np.linspace(-4, 4, 801), lo, hi))
        x = np.concatenate([x, np.asarray(extra, dtype=float)])
        return float(np.max(np.abs(self.d(x))))

    def shifted(self, c):
        """t -> phi(t + c)."""
        c = float(c)
        v, d, f = self.value, self.derivative, self.fourier
        return TestFunction(
            kind=self.kind,
            value=lambda x: v(np.asarray(x) + c),
            derivative=None if d is None else (lambda x: d(np.asarray(x) + c)),
            fourier=None if f is None else (lambda k: np.exp(-1j * np.asarray(k) * c) * f(k)),
            params={**self.params, "shift": self.params.get("shift", 0.0) + c},
            features=tuple((x0 - c, h) for x0, h in self.features),
        )

    def times(self, t):
        """t * phi."""
        t = float(t)
        v, d, f = self.value, self.derivative, self.fourier
        return TestFunction(
            kind=self.kind,
            value=lambda x: t * v(x),
            derivative=None if d is None else (lambda x: t * d(x)),
            fourier=None if f is None else (lambda k: t * f(k)),
            params={**self.params, "t": self.params.get("t", 1.0) * t},
            features=self.features,
        )

    def plus(self, other):
        v1, v2 = self.value, other.value
        d = None
        if self.is_c1 and other.is_c1:
            d1, d2 = self.derivative, other.derivative
            d = lambda x: d1(x) + d2(x)
        f = None
        if self.fourier is not None and other.fourier is not None:
            f1, f2 = self.fourier, other.fourier
            f = lambda k: f1(k) + f2(k)
        return TestFunction(kind="polynomial" if self.kind == other.kind == "polynomial" else "sum",
                            value=lambda x: v1(x) + v2(x), derivative=d, fourier=f,
                            params={"terms": [self.params, other.params]},
                            features=self.features + other.features)

    def to_dict(self):
        return {"kind": self.kind, **{k: v for k, v in self.params.items() if k != "base"}}


def linear(t=1.0):
    """phi(lambda) = t lambda."""
    t = float(t)
    return TestFunction("linear", lambda x: t * np.asarray(x, dtype=float),
                        lambda x: np.full_like(np.asarray(x, dtype=float), t),
                        params={"t": t})


def polynomial(coefficients):
    """phi(lambda) = sum_k coefficients[k] lambda^k."""
    c = np.array(coefficients, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise DomainError("polynomial test function needs a nonempty coefficient list")
    dc = np.polynomial.polynomial.polyder(c) if c.size > 1 else np.zeros(1)
    return TestFunction("polynomial",
                        lambda x: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), c),
                        lambda x: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), dc),
                        params={"coefficients": c.tolist()})


def gaussian_bump(amplitude=1.0, center=0.0, width=1.0):
    """phi(t) = amplitude * exp(-(t - center)^2 / (2 width^2))."""
    A, c, w = float(amplitude), float(center), float(width)
    if not w > 0:
        raise DomainError(f"width must be positive, got {w}")

    def value(x):
        u = (np.asarray(x, dtype=float) - c) / w
        return A * np.exp(-0.5 * u * u)

    def derivative(x):
        u = (np.asarray(x, dtype=float) - c) / w
        return -A * u / w * np.exp(-0.5 * u * u)

    def fourier(k):
        k = np.asarray(k, dtype=float)
        return A * w / math.sqrt(2.0 * math.pi) * np.exp(1j * k * c - 0.5 * (k * w) ** 2)

    return TestFunction("gaussian-bump", value, derivative, fourier,
                        params={"amplitude": A, "center": c, "width": w},
                        features=((c, w),))


def indicator(a, b):
    """Characteristic function of (a, b)."""
    a, b = float(a), float(b)
    if not a <= b:
        raise DomainError(f"indicator needs a <= b, got ({a}, {b})")

    def value(x):
        x = np.asarray(x, dtype=float)
        return ((x > a) & (x < b)).astype(float)

    return TestFunction("indicator", value, None, lambda k: _indicator_fourier(a, b, k),
                        params={"a": a, "b": b}, features=((a, 0.0), (b, 0.0)))


def _indicator_fourier(a, b, k):
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (np.exp(1j * k * b) - np.exp(1j * k * a)) / (2j * math.pi * k)
    return np.where(k == 0, (b - a) / (2 * math.pi), f)


def scaled(base, lam0=0.0, alpha=1.0, n=1, scale=None):
    """phi_n(lambda) = base((lambda - lam0) * s) with s = n^alpha (or ``scale``)."""
    s = float(n) ** float(alpha) if scale is None else float(scale)
    lam0 = float(lam0)
    v, d = base.value, base.derivative

    def value(x):
        return v((np.asarray(x, dtype=float) - lam0) * s)

    deriv = None if d is None else (lambda x: s * d((np.asarray(x, dtype=float) - lam0) * s))
    return TestFunction("scaled", value, deriv, None,
                        params={"base": base, "base_kind": base.kind, "lam0": lam0,
                                "alpha": float(alpha), "n": int(n), "scale": s},
                        features=tuple((lam0 + c / s, h / s) for c, h in base.features))


def from_spec(spec):
    """Build a test function from a plain dict such as {"kind": "linear", "t": 2}."""
    kind = spec.get("kind")
    if kind == "linear":
        return linear(spec.get("t", 1.0))
    if kind == "polynomial":
        return polynomial(spec["coefficients"])
    if kind == "gaussian-bump":
        return gaussian_bump(spec.get("amplitude", 1.0), spec.get("center", 0.0), spec.get("width", 1.0))
    if kind == "indicator":
        return indicator(spec["a"], spec["b"])
    if kind == "scaled":
        return scaled(from_spec(spec["base"]), spec.get("lam0", 0.0), spec.get("alpha", 1.0),
                      spec.get("n", 1), spec.get("scale"))
    raise DomainError(f"unknown test-function kind {kind!r}")
