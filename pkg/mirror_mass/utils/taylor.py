# mirror_mass/utils/taylor.py

"""
Truncated Taylor arithmetic ("jets") on numpy arrays.

A Jet stores normalized coefficients c[k] = f^(k)(t) / k! with shape
(order + 1, *points). Every operation propagates all coefficients, so the
k-th derivative of any composition is exact up to rounding.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

Number = Union[float, int]


class JetDomainError(ValueError):
    """Raised when an elementary function is applied outside its domain."""


class Jet:
    __slots__ = ("c",)

    def __init__(self, coefficients: np.ndarray):
        self.c = np.asarray(coefficients, dtype=float)

    # ----------------------------
    # Construction
    # ----------------------------
    @classmethod
    def variable(cls, t: np.ndarray, order: int) -> "Jet":
        t = np.asarray(t, dtype=float)
        c = np.zeros((order + 1,) + t.shape)
        c[0] = t
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value: Number, order: int, shape: tuple = ()) -> "Jet":
        c = np.zeros((order + 1,) + tuple(shape))
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivatives(self) -> np.ndarray:
        """Returns f, f', ..., f^(order) stacked along the first axis."""
        fact = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * fact.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def _lift(self, other: Union["Jet", Number]) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(float(other), self.order, self.c.shape[1:])

    def is_constant(self) -> bool:
        return not np.any(self.c[1:])

    # ----------------------------
    # Arithmetic
    # ----------------------------
    def __add__(self, other: Union["Jet", Number]) -> "Jet":
        return Jet(self.c + self._lift(other).c)

    __radd__ = __add__

    def __sub__(self, other: Union["Jet", Number]) -> "Jet":
        return Jet(self.c - self._lift(other).c)

    def __rsub__(self, other: Number) -> "Jet":
        return Jet(self._lift(other).c - self.c)

    def __neg__(self) -> "Jet":
        return Jet(-self.c)

    def __mul__(self, other: Union["Jet", Number]) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.c * float(other))
        a, b = self.c, other.c
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for k in range(self.order + 1):
            for j in range(k + 1):
                out[k] = out[k] + a[j] * b[k - j]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["Jet", Number]) -> "Jet":
        if not isinstance(other, Jet):
            if float(other) == 0.0:
                raise JetDomainError("division by zero")
            return Jet(self.c / float(other))
        a, b = self.c, other.c
        if np.any(b[0] == 0.0):
            raise JetDomainError("division by zero")
        q = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for k in range(self.order + 1):
            acc = np.array(a[k], dtype=float)
            for j in range(1, k + 1):
                acc = acc - b[j] * q[k - j]
            q[k] = acc / b[0]
        return Jet(q)

    def __rtruediv__(self, other: Number) -> "Jet":
        return self._lift(other) / self

    def __pow__(self, other: Union["Jet", Number]) -> "Jet":
        return power(self, other)

    def __rpow__(self, other: Number) -> "Jet":
        return power(self._lift(other), self)


# ----------------------------
# Elementary functions
# ----------------------------
def exp(x: Jet) -> Jet:
    a = x.c
    e = np.zeros_like(a)
    e[0] = np.exp(a[0])
    for k in range(1, x.order + 1):
        acc = np.zeros_like(a[0])
        for j in range(1, k + 1):
            acc = acc + j * a[j] * e[k - j]
        e[k] = acc / k
    return Jet(e)


def log(x: Jet) -> Jet:
    a = x.c
    if np.any(a[0] <= 0.0):
        raise JetDomainError("ln of a non-positive value")
    out = np.zeros_like(a)
    out[0] = np.log(a[0])
    for k in range(1, x.order + 1):
        acc = np.zeros_like(a[0])
        for j in range(1, k):
            acc = acc + j * out[j] * a[k - j]
        out[k] = (a[k] - acc / k) / a[0]
    return Jet(out)


def sin_cos(x: Jet) -> tuple:
    a = x.c
    s = np.zeros_like(a)
    c = np.zeros_like(a)
    s[0] = np.sin(a[0])
    c[0] = np.cos(a[0])
    for k in range(1, x.order + 1):
        acc_s = np.zeros_like(a[0])
        acc_c = np.zeros_like(a[0])
        for j in range(1, k + 1):
            acc_s = acc_s + j * a[j] * c[k - j]
            acc_c = acc_c + j * a[j] * s[k - j]
        s[k] = acc_s / k
        c[k] = -acc_c / k
    return Jet(s), Jet(c)


def sin(x: Jet) -> Jet:
    return sin_cos(x)[0]


def cos(x: Jet) -> Jet:
    return sin_cos(x)[1]


def tanh(x: Jet) -> Jet:
    # t' = (1 - t^2) x'
    a = x.c
    t = np.zeros_like(a)
    u = np.zeros_like(a)
    t[0] = np.tanh(a[0])
    u[0] = 1.0 - t[0] * t[0]
    for k in range(1, x.order + 1):
        acc = np.zeros_like(a[0])
        for j in range(1, k + 1):
            acc = acc + j * a[j] * u[k - j]
        t[k] = acc / k
        sq = np.zeros_like(a[0])
        for i in range(k + 1):
            sq = sq + t[i] * t[k - i]
        u[k] = -sq
    return Jet(t)


def sqrt(x: Jet) -> Jet:
    a = x.c
    if np.any(a[0] < 0.0):
        raise JetDomainError("sqrt of a negative value")
    if x.order >= 1 and np.any(a[0] == 0.0):
        raise JetDomainError("sqrt is not differentiable at 0")
    r = np.zeros_like(a)
    r[0] = np.sqrt(a[0])
    for k in range(1, x.order + 1):
        acc = np.array(a[k], dtype=float)
        for j in range(1, k):
            acc = acc - r[j] * r[k - j]
        r[k] = acc / (2.0 * r[0])
    return Jet(r)


def absolute(x: Jet) -> Jet:
    # derivatives are one-sided (zero slope) exactly at a kink
    return Jet(x.c * np.sign(x.c[0]))


def power(base: Jet, exponent: Union[Jet, Number]) -> Jet:
    """
    base ** exponent. Non-negative integer constants use repeated multiplication,
    so polynomials stay exact; negative integers go through one division.
    """
    if isinstance(exponent, Jet):
        values = np.unique(exponent.c[0])
        if not exponent.is_constant() or values.size != 1:
            return exp(exponent * log(base))
        exponent = float(values[0])
    p = float(exponent)
    if p.is_integer() and abs(p) <= 64:
        n = int(abs(p))
        result = Jet.constant(1.0, base.order, base.c.shape[1:])
        factor = base
        while n:
            if n & 1:
                result = result * factor
            n >>= 1
            if n:
                factor = factor * factor
        return result if p >= 0 else 1.0 / result
    if p == 0.5:
        return sqrt(base)
    return exp(log(base) * p)
