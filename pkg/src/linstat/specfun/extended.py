"""Double-double arithmetic.

A value is carried as an unevaluated sum ``hi + lo`` of two floats with
``|lo| <= ulp(hi)/2``, giving roughly 31 significant digits. The free
functions operate elementwise on numpy arrays (or scalars) and return
``(hi, lo)`` pairs; :class:`ExtendedScalar` wraps a single value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def dd_neg(ah, al):
    return -ah, -al


def dd_sub(ah, al, bh, bl):
    return dd_add(ah, al, -bh, -bl)


def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e = e + al * b
    return quick_two_sum(p, e)


def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    rh, rl = dd_sub(ah, al, *dd_mul_d(bh, bl, q1))
    q2 = rh / bh
    rh, rl = dd_sub(rh, rl, *dd_mul_d(bh, bl, q2))
    q3 = rh / bh
    qh, ql = quick_two_sum(q1, q2)
    return dd_add(qh, ql, q3, 0.0 * q3)


def dd_sqrt(ah, al):
    x = np.sqrt(ah)
    with np.errstate(divide="ignore", invalid="ignore"):
        sh, sl = two_prod(x, x)
        rh, rl = dd_sub(ah, al, sh, sl)
        corr = np.where(x > 0, rh / (2.0 * np.where(x > 0, x, 1.0)), 0.0)
    return quick_two_sum(x, corr)


def dd_sum(hi, lo=None, axis=-1):
    """Pairwise-tree double-double sum along ``axis``.

    The reduction order depends only on the array length, so the result is
    bit-reproducible.
    """
    hi = np.moveaxis(np.asarray(hi, dtype=float), axis, -1)
    lo = np.zeros_like(hi) if lo is None else np.moveaxis(np.asarray(lo, dtype=float), axis, -1)
    while hi.shape[-1] > 1:
        m = hi.shape[-1]
        if m % 2:
            pad = [(0, 0)] * (hi.ndim - 1) + [(0, 1)]
            hi = np.pad(hi, pad)
            lo = np.pad(lo, pad)
        hi, lo = dd_add(hi[..., 0::2], lo[..., 0::2], hi[..., 1::2], lo[..., 1::2])
    if hi.shape[-1] == 0:
        return np.zeros(hi.shape[:-1]), np.zeros(hi.shape[:-1])
    return hi[..., 0], lo[..., 0]


def dd_dot(ah, al, bh, bl, axis=-1):
    ph, pl = dd_mul(ah, al, bh, bl)
    return dd_sum(ph, pl, axis=axis)


@dataclass(frozen=True)
class ExtendedScalar:
    """A double-double number ``hi + lo``."""

    hi: float
    lo: float = 0.0

    def __post_init__(self):
        h, l = quick_two_sum(float(self.hi), float(self.lo))
        object.__setattr__(self, "hi", float(h))
        object.__setattr__(self, "lo", float(l))

    @staticmethod
    def _coerce(x):
        if isinstance(x, ExtendedScalar):
            return x
        return ExtendedScalar(float(x), 0.0)

    def __add__(self, other):
        o = self._coerce(other)
        return ExtendedScalar(*dd_add(self.hi, self.lo, o.hi, o.lo))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return ExtendedScalar(*dd_sub(self.hi, self.lo, o.hi, o.lo))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return ExtendedScalar(*dd_mul(self.hi, self.lo, o.hi, o.lo))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.hi == 0.0:
            raise ZeroDivisionError("extended division by zero")
        return ExtendedScalar(*dd_div(self.hi, self.lo, o.hi, o.lo))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return ExtendedScalar(-self.hi, -self.lo)

    def __abs__(self):
        return -self if self.hi < 0 else self

    def __float__(self):
        return self.hi + self.lo

    def __eq__(self, other):
        o = self._coerce(other)
        return self.hi == o.hi and self.lo == o.lo

    def __lt__(self, other):
        o = self._coerce(other)
        return (self.hi, self.lo) < (o.hi, o.lo)

    def __hash__(self):
        return hash((self.hi, self.lo))

    def sqrt(self):
        if self.hi < 0:
            raise ValueError("square root of a negative extended value")
        h, l = dd_sqrt(np.float64(self.hi), np.float64(self.lo))
        return ExtendedScalar(float(h), float(l))
