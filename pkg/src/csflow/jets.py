"""Truncated multivariate Taylor expansions ("jets") in three variables.

A :class:`Jet` of order ``r`` stores the Taylor coefficients
``c[alpha] = d^alpha f / alpha!`` for every multi-index ``|alpha| <= r``.
Coefficients carry an arbitrary trailing batch shape so that a whole grid of
points is processed with one set of numpy operations.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

DIM = 3
MAX_ORDER = 3


@lru_cache(maxsize=None)
def monomials(order: int) -> tuple[tuple[int, int, int], ...]:
    """Exponent tuples with total degree <= order, sorted by degree."""
    mons = [a for a in product(range(order + 1), repeat=DIM) if sum(a) <= order]
    return tuple(sorted(mons, key=lambda a: (sum(a), tuple(-x for x in a))))


@lru_cache(maxsize=None)
def _index(order: int) -> dict[tuple[int, int, int], int]:
    return {m: i for i, m in enumerate(monomials(order))}


@lru_cache(maxsize=None)
def _product_table(order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mons = monomials(order)
    idx = _index(order)
    left, right, out = [], [], []
    for i, a in enumerate(mons):
        for j, b in enumerate(mons):
            s = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
            if sum(s) <= order:
                left.append(i)
                right.append(j)
                out.append(idx[s])
    left, right, out = map(np.asarray, (left, right, out))
    scatter = np.zeros((len(mons), len(out)))
    scatter[out, np.arange(len(out))] = 1.0
    return left, right, scatter


@lru_cache(maxsize=None)
def _diff_table(order: int, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Source indices and weights so that d/dx_axis maps order -> order-1."""
    src_idx = _index(order)
    src, weight = [], []
    for m in monomials(order - 1):
        up = list(m)
        up[axis] += 1
        src.append(src_idx[tuple(up)])
        weight.append(float(up[axis]))
    return np.asarray(src), np.asarray(weight)


def _as_coeffs(c: np.ndarray, order: int) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape[0] != len(monomials(order)):
        raise ValueError(f"expected {len(monomials(order))} coefficients for order {order}")
    return c


class Jet:
    """Truncated Taylor polynomial of a scalar function around a point."""

    __array_priority__ = 100

    def __init__(self, coeffs: np.ndarray, order: int):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must lie in 0..{MAX_ORDER}, got {order}")
        self.order = order
        self.coeffs = _as_coeffs(coeffs, order)

    # -- construction ------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int = MAX_ORDER) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((len(monomials(order)),) + value.shape)
        c[0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, axis: int, value, order: int = MAX_ORDER) -> "Jet":
        """The coordinate function x_axis expanded around ``value``."""
        jet = cls.constant(value, order)
        if order >= 1:
            e = [0, 0, 0]
            e[axis] = 1
            jet.coeffs[_index(order)[tuple(e)]] = 1.0
        return jet

    @classmethod
    def from_derivatives(cls, value, gradient=None, hessian=None, third=None) -> "Jet":
        """Build a jet from ordinary partial derivatives.

        ``gradient`` has shape ``(3, ...)``, ``hessian`` ``(3, 3, ...)`` and
        ``third`` ``(3, 3, 3, ...)``; the order is set by the highest supplied
        derivative. Only the symmetric part of each tensor is used.
        """
        tensors = [t for t in (gradient, hessian, third) if t is not None]
        order = len(tensors)
        value = np.asarray(value, dtype=float)
        c = np.zeros((len(monomials(order)),) + value.shape)
        for i, m in enumerate(monomials(order)):
            deg = sum(m)
            if deg == 0:
                c[i] = value
                continue
            axes = [a for a in range(DIM) for _ in range(m[a])]
            t = np.asarray(tensors[deg - 1], dtype=float)
            c[i] = t[tuple(axes)] / math.prod(math.factorial(k) for k in m)
        return cls(c, order)

    # -- accessors ---------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    def derivative(self, alpha: Sequence[int]) -> np.ndarray:
        """The partial derivative d^alpha f at the expansion point."""
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValueError(f"derivative of order {sum(alpha)} exceeds jet order {self.order}")
        scale = math.prod(math.factorial(k) for k in alpha)
        return scale * self.coeffs[_index(self.order)[alpha]]

    def derivative_tensor(self, k: int) -> np.ndarray:
        """All k-th partials as a symmetric tensor of shape ``(3,)*k + batch``."""
        out = np.empty((DIM,) * k + self.batch_shape)
        for axes in product(range(DIM), repeat=k):
            alpha = [0, 0, 0]
            for a in axes:
                alpha[a] += 1
            out[axes] = self.derivative(alpha)
        return out

    @property
    def gradient(self) -> np.ndarray:
        return self.derivative_tensor(1)

    @property
    def hessian(self) -> np.ndarray:
        return self.derivative_tensor(2)

    @property
    def third(self) -> np.ndarray:
        return self.derivative_tensor(3)

    # -- calculus ----------------------------------------------------------
    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.coeffs[: len(monomials(order))], order)

    def diff(self, axis: int) -> "Jet":
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, weight = _diff_table(self.order, axis)
        w = weight.reshape((-1,) + (1,) * len(self.batch_shape))
        return Jet(self.coeffs[src] * w, self.order - 1)

    def compose(self, derivs: Sequence[np.ndarray]) -> "Jet":
        """Apply a scalar function phi given phi^(k)(value) for k = 0..order."""
        h = Jet(self.coeffs.copy(), self.order)
        h.coeffs[0] = 0.0
        out = Jet.constant(derivs[0], self.order)
        power = Jet.constant(np.ones(self.batch_shape), self.order)
        for k in range(1, self.order + 1):
            power = power * h
            out = out + power * (np.asarray(derivs[k]) / math.factorial(k))
        return out

    def reciprocal(self) -> "Jet":
        v = self.value
        if np.any(v == 0):
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        return self.compose([(-1.0) ** k * math.factorial(k) / v ** (k + 1) for k in range(self.order + 1)])

    def sin(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose([s, c, -s, -c][: self.order + 1])

    def cos(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose([c, -s, -c, s][: self.order + 1])

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "Jet | None":
        if isinstance(other, Jet):
            return other
        if isinstance(other, (int, float, np.floating, np.ndarray)):
            return Jet.constant(other, self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        n = len(monomials(order))
        return Jet(self.coeffs[:n] + o.coeffs[:n], order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.order)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Jet(self.coeffs * other, self.order)
        if isinstance(other, np.ndarray) and other.ndim == 0:
            return Jet(self.coeffs * float(other), self.order)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        a, b = self.coeffs[: len(monomials(order))], o.coeffs[: len(monomials(order))]
        if order == 0:
            return Jet(a * b, 0)
        left, right, scatter = _product_table(order)
        pairs = a[left] * b[right]
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = scatter @ pairs.reshape(len(left), -1)
        return Jet(out.reshape((scatter.shape[0],) + shape), order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Jet(self.coeffs / other, self.order)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Jet.constant(np.ones(self.batch_shape), self.order)
        for _ in range(k):
            out = out * self
        return out

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, batch_shape={self.batch_shape})"
