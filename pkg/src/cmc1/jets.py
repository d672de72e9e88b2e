"""Truncated complex Taylor series ("jets") and the elementary functions on them.

A jet of order N at base point z0 stores the coefficients c_0..c_N of
f(z0 + h) = sum c_k h^k.  All arithmetic is exact truncated-series
arithmetic.  The module-level functions (``exp``, ``sin``, ...) accept
either a :class:`Jet` or a plain number, so the same code evaluates a
formula pointwise or as a Taylor expansion.
"""

from __future__ import annotations

import cmath
import math
from numbers import Number

import numpy as np

from .errors import PoleSignal

__all__ = [
    "Jet", "exp", "log", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "tanh",
    "power", "schwarzian_jet",
]


class Jet:
    """Truncated Taylor expansion with complex coefficients."""

    __slots__ = ("c", "base")
    __array_priority__ = 100

    def __init__(self, coeffs, base=0j):
        self.c = np.asarray(coeffs, dtype=complex)
        self.base = complex(base)

    @classmethod
    def variable(cls, base, order):
        """The identity map z as a jet at ``base``."""
        c = np.zeros(order + 1, dtype=complex)
        c[0] = base
        if order >= 1:
            c[1] = 1.0
        return cls(c, base)

    @classmethod
    def constant(cls, value, base, order):
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(c, base)

    @property
    def order(self):
        return len(self.c) - 1

    @property
    def value(self):
        return complex(self.c[0])

    def deriv(self, k):
        """k-th derivative at the base point."""
        return complex(self.c[k]) * math.factorial(k)

    def truncate(self, order):
        return Jet(self.c[: order + 1], self.base)

    def derivative(self, k=1):
        c = self.c
        for _ in range(k):
            if len(c) <= 1:
                c = np.zeros(1, dtype=complex)
            else:
                c = c[1:] * np.arange(1, len(c))
        return Jet(c, self.base)

    def reflect(self):
        """Jet of z -> conj(f(conj z)) at conj(base)."""
        return Jet(np.conj(self.c), self.base.conjugate())

    def __call__(self, h):
        """Evaluate the truncated polynomial at offset h from the base."""
        out = 0j
        for ck in self.c[::-1]:
            out = out * h + ck
        return out

    def __repr__(self):
        return f"Jet(base={self.base}, coeffs={self.c.tolist()})"

    # -- arithmetic -----------------------------------------------------

    def _pair(self, other):
        if isinstance(other, Jet):
            n = min(len(self.c), len(other.c))
            return self.c[:n], other.c[:n]
        if isinstance(other, Number) or np.isscalar(other):
            o = np.zeros(len(self.c), dtype=complex)
            o[0] = other
            return self.c, o
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Jet):
            n = min(len(self.c), len(other.c))
            return Jet(self.c[:n] + other.c[:n], self.base)
        if isinstance(other, Number) or np.isscalar(other):
            c = self.c.copy()
            c[0] += other
            return Jet(c, self.base)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.base)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Jet):
            n = min(len(self.c), len(other.c))
            return Jet(self.c[:n] - other.c[:n], self.base)
        if isinstance(other, Number) or np.isscalar(other):
            c = self.c.copy()
            c[0] -= other
            return Jet(c, self.base)
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, Jet):
            n = min(len(self.c), len(other.c))
            return Jet(np.convolve(self.c[:n], other.c[:n])[:n], self.base)
        if isinstance(other, Number) or np.isscalar(other):
            return Jet(self.c * other, self.base)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            a, b = self._pair(other)
            return Jet(_divide(a, b), self.base)
        if isinstance(other, Number) or np.isscalar(other):
            if other == 0:
                raise PoleSignal("division of a jet by zero")
            return Jet(self.c / other, self.base)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Number) or np.isscalar(other):
            a = np.zeros(len(self.c), dtype=complex)
            a[0] = other
            return Jet(_divide(a, self.c), self.base)
        return NotImplemented

    def __pow__(self, p):
        return power(self, p)

    def __rpow__(self, x):
        if x == 0:
            raise PoleSignal("0 raised to a jet power")
        return exp(self * cmath.log(x))


def _divide(a, b):
    b0 = b[0]
    if b0 == 0:
        raise PoleSignal("jet division by a series with vanishing leading coefficient")
    n = len(a)
    q = np.empty(n, dtype=complex)
    for k in range(n):
        q[k] = (a[k] - np.dot(b[1 : k + 1], q[:k][::-1])) / b0
    return q


def _exp_coeffs(f):
    n = len(f)
    e = np.empty(n, dtype=complex)
    e[0] = cmath.exp(f[0])
    jf = f * np.arange(n)
    for k in range(1, n):
        e[k] = np.dot(jf[1 : k + 1], e[:k][::-1]) / k
    return e


def _sincos_coeffs(f, hyperbolic=False):
    n = len(f)
    s = np.empty(n, dtype=complex)
    c = np.empty(n, dtype=complex)
    if hyperbolic:
        s[0], c[0], sign = cmath.sinh(f[0]), cmath.cosh(f[0]), 1.0
    else:
        s[0], c[0], sign = cmath.sin(f[0]), cmath.cos(f[0]), -1.0
    jf = f * np.arange(n)
    for k in range(1, n):
        w = jf[1 : k + 1]
        s[k] = np.dot(w, c[:k][::-1]) / k
        c[k] = sign * np.dot(w, s[:k][::-1]) / k
    return s, c


def exp(x):
    if isinstance(x, Jet):
        return Jet(_exp_coeffs(x.c), x.base)
    return cmath.exp(x)


def log(x):
    if isinstance(x, Jet):
        f = x.c
        if f[0] == 0:
            raise PoleSignal("log of a jet with vanishing leading coefficient")
        n = len(f)
        out = np.empty(n, dtype=complex)
        out[0] = cmath.log(f[0])
        jl = np.zeros(n, dtype=complex)
        for k in range(1, n):
            out[k] = (f[k] - np.dot(jl[1:k], f[1:k][::-1]) / k) / f[0]
            jl[k] = k * out[k]
        return Jet(out, x.base)
    if x == 0:
        raise PoleSignal("log(0)")
    return cmath.log(x)


def sqrt(x):
    if isinstance(x, Jet):
        f = x.c
        if f[0] == 0:
            raise PoleSignal("sqrt of a jet with vanishing leading coefficient")
        n = len(f)
        r = np.empty(n, dtype=complex)
        r[0] = cmath.sqrt(f[0])
        for k in range(1, n):
            r[k] = (f[k] - np.dot(r[1:k], r[1:k][::-1])) / (2 * r[0])
        return Jet(r, x.base)
    return cmath.sqrt(x)


def sin(x):
    if isinstance(x, Jet):
        return Jet(_sincos_coeffs(x.c)[0], x.base)
    return cmath.sin(x)


def cos(x):
    if isinstance(x, Jet):
        return Jet(_sincos_coeffs(x.c)[1], x.base)
    return cmath.cos(x)


def tan(x):
    if isinstance(x, Jet):
        s, c = _sincos_coeffs(x.c)
        return Jet(_divide(s, c), x.base)
    c = cmath.cos(x)
    if c == 0:
        raise PoleSignal("tan at a pole")
    return cmath.sin(x) / c


def sinh(x):
    if isinstance(x, Jet):
        return Jet(_sincos_coeffs(x.c, True)[0], x.base)
    return cmath.sinh(x)


def cosh(x):
    if isinstance(x, Jet):
        return Jet(_sincos_coeffs(x.c, True)[1], x.base)
    return cmath.cosh(x)


def tanh(x):
    if isinstance(x, Jet):
        s, c = _sincos_coeffs(x.c, True)
        return Jet(_divide(s, c), x.base)
    c = cmath.cosh(x)
    if c == 0:
        raise PoleSignal("tanh at a pole")
    return cmath.sinh(x) / c


def power(x, p):
    """x**p for jets or numbers; integer exponents use repeated products."""
    if isinstance(p, Jet):
        if isinstance(x, Jet):
            return exp(p * log(x))
        if x == 0:
            raise PoleSignal("0 raised to a jet power")
        return exp(p * cmath.log(x))
    if not isinstance(x, Jet):
        if x == 0 and (p.real < 0 if isinstance(p, complex) else p < 0):
            raise PoleSignal("0 raised to a negative power")
        if isinstance(p, (int, float)) and float(p).is_integer() and abs(p) <= 64:
            return complex(x) ** int(p)
        return complex(x) ** p
    if isinstance(p, (int, np.integer)) or (
        isinstance(p, float) and p.is_integer() and abs(p) <= 64
    ):
        k = int(p)
        if k < 0:
            return 1.0 / _ipow(x, -k)
        return _ipow(x, k)
    f = x.c
    if f[0] == 0:
        raise PoleSignal("non-integer power of a jet with vanishing leading coefficient")
    n = len(f)
    r = np.empty(n, dtype=complex)
    r[0] = f[0] ** p
    for k in range(1, n):
        j = np.arange(1, k + 1)
        r[k] = np.dot((p * j - (k - j)) * f[1 : k + 1], r[:k][::-1]) / (k * f[0])
    return Jet(r, x.base)


def _ipow(x, k):
    result = Jet.constant(1.0, x.base, x.order)
    base = x
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def schwarzian_jet(f):
    """Jet of {f, z} = (f''/f')' - (f''/f')^2 / 2; loses three orders."""
    d1 = f.derivative()
    r = d1.derivative() / d1
    return r.derivative() - 0.5 * r * r
