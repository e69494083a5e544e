"""Truncated multivariate Taylor polynomials ("jets").

A :class:`Jet` of order ``K`` in ``n`` variables stores the Taylor
coefficients of a function around a base point, up to total degree ``K``.
Arithmetic on jets is arithmetic on the underlying functions modulo terms of
degree ``> K``, which makes a jet a multivariate dual number with nilpotency
order ``K + 1``.  Pushing jets through an ordinary numpy expression yields all
mixed partial derivatives up to order ``K`` at once.

Coefficients are kept in graded order (all degree-0 monomials, then degree 1,
...), so truncating to a lower order is a prefix slice.  Every jet carries an
arbitrary trailing batch shape; a batch of base points is differentiated in a
single pass.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


def _monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exp = [0] * nvars
        for v in combo:
            exp[v] += 1
        out.append(tuple(exp))
    return out


class JetBasis:
    """Monomial bookkeeping for jets in ``nvars`` variables up to ``order``."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        exps: list[tuple[int, ...]] = []
        self.degree_offsets = [0]
        for d in range(order + 1):
            exps.extend(_monomials(nvars, d))
            self.degree_offsets.append(len(exps))
        self.exponents = np.array(exps, dtype=int).reshape(len(exps), nvars)
        self.index = {e: i for i, e in enumerate(exps)}
        self.size = len(exps)
        self.degrees = self.exponents.sum(axis=1)
        self.factorials = np.array(
            [math.prod(math.factorial(a) for a in e) for e in exps], dtype=float
        )

        # product table, sorted by target so that reduceat can sum it
        left, right, target = [], [], []
        for i, ei in enumerate(exps):
            for j, ej in enumerate(exps):
                if self.degrees[i] + self.degrees[j] > order:
                    continue
                left.append(i)
                right.append(j)
                target.append(self.index[tuple(a + b for a, b in zip(ei, ej))])
        perm = np.argsort(target, kind="stable")
        self.mul_left = np.array(left)[perm]
        self.mul_right = np.array(right)[perm]
        tgt = np.array(target)[perm]
        self.mul_starts = np.flatnonzero(np.r_[True, tgt[1:] != tgt[:-1]])

    def size_of(self, order: int) -> int:
        return self.degree_offsets[order + 1]

    def derivative_map(self, var: int) -> tuple[np.ndarray, np.ndarray]:
        """Source indices and multipliers for d/d(var), landing in order-1."""
        if self.order == 0:
            return np.zeros(0, dtype=int), np.zeros(0)
        n_low = self.degree_offsets[self.order]
        src = np.empty(n_low, dtype=int)
        mult = np.empty(n_low)
        for k in range(n_low):
            e = list(self.exponents[k])
            e[var] += 1
            src[k] = self.index[tuple(e)]
            mult[k] = e[var]
        return src, mult


@lru_cache(maxsize=None)
def basis(nvars: int, order: int) -> JetBasis:
    return JetBasis(nvars, order)


@lru_cache(maxsize=None)
def _dmap(nvars: int, order: int, var: int):
    return basis(nvars, order).derivative_map(var)


def _batch_lift(c: np.ndarray, batch: tuple[int, ...]) -> np.ndarray:
    extra = len(batch) - (c.ndim - 1)
    if extra > 0:
        c = c.reshape(c.shape[:1] + (1,) * extra + c.shape[1:])
    return np.broadcast_to(c, c.shape[:1] + batch)


def _taylor_pow(a0, p, order):
    out = [np.power(a0, p)]
    coef = 1.0
    for k in range(1, order + 1):
        coef *= (p - k + 1) / k
        out.append(coef * np.power(a0, p - k))
    return out


def _taylor_exp(a0, order):
    e = np.exp(a0)
    return [e / math.factorial(k) for k in range(order + 1)]


def _taylor_log(a0, order):
    out = [np.log(a0)]
    for k in range(1, order + 1):
        out.append((-1.0) ** (k + 1) / (k * np.power(a0, k)))
    return out


def _taylor_sin(a0, order, phase=0):
    s, c = np.sin(a0), np.cos(a0)
    cyc = [s, c, -s, -c]
    return [cyc[(k + phase) % 4] / math.factorial(k) for k in range(order + 1)]


def _taylor_atan(a0, order):
    # derivatives of atan via the series of 1/(1+x^2) about a0
    out = [np.arctan(a0)]
    if order == 0:
        return out
    t = Jet.variable(0, basis(1, order - 1), a0)
    inv = (1.0 + t * t).reciprocal()
    for k in range(1, order + 1):
        out.append(inv.c[k - 1] / k)
    return out


class Jet:
    """Truncated Taylor polynomial with batched coefficients.

    ``c[m, ...]`` is the coefficient of monomial ``m`` (see
    :class:`JetBasis`); partial derivatives are ``c[m] * m!``.
    """

    __slots__ = ("c", "nvars", "order")
    __array_priority__ = 100

    def __init__(self, c, nvars: int, order: int):
        self.c = np.asarray(c, dtype=float)
        self.nvars = nvars
        self.order = order

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((basis(nvars, order).size,) + value.shape)
        c[0] = value
        return cls(c, nvars, order)

    @classmethod
    def variable(cls, var: int, b: JetBasis, value) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((b.size,) + value.shape)
        c[0] = value
        if b.order >= 1:
            c[1 + var] = 1.0
        return cls(c, b.nvars, b.order)

    @classmethod
    def variables(cls, values, order: int) -> list["Jet"]:
        """Independent jet variables seeded at ``values`` (one per variable)."""
        n = len(values)
        b = basis(n, order)
        vals = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in values])
        return [cls.variable(i, b, v) for i, v in enumerate(vals)]

    # inspection -------------------------------------------------------
    @property
    def basis(self) -> JetBasis:
        return basis(self.nvars, self.order)

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.c.shape[1:]

    def partial(self, *alpha: int) -> np.ndarray:
        """Mixed partial derivative with multi-index ``alpha`` at the base point."""
        b = self.basis
        idx = b.index[tuple(alpha)]
        return self.c[idx] * b.factorials[idx]

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.c[: basis(self.nvars, order).size], self.nvars, order)

    def d(self, var: int) -> "Jet":
        """Derivative with respect to variable ``var``; the order drops by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, mult = _dmap(self.nvars, self.order, var)
        mult = mult.reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[src] * mult, self.nvars, self.order - 1)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, nvars={self.nvars}, value={self.value!r})"

    # arithmetic -------------------------------------------------------
    def _pair(self, other: "Jet"):
        if other.nvars != self.nvars:
            raise ValueError("jets over different variable sets")
        a, b = self, other
        if a.order != b.order:
            k = min(a.order, b.order)
            a, b = a.truncate(k), b.truncate(k)
        ac, bc = a.c, b.c
        if ac.shape != bc.shape:
            batch = np.broadcast_shapes(ac.shape[1:], bc.shape[1:])
            ac, bc = _batch_lift(ac, batch), _batch_lift(bc, batch)
        return ac, bc, a.order

    def __add__(self, other):
        if isinstance(other, Jet):
            ac, bc, k = self._pair(other)
            return Jet(ac + bc, self.nvars, k)
        other = np.asarray(other, dtype=float)
        c = self.c
        if other.ndim > c.ndim - 1 or other.shape != c.shape[1 : 1 + other.ndim]:
            c = _batch_lift(c, np.broadcast_shapes(c.shape[1:], other.shape))
        c = c.copy()
        c[0] += other
        return Jet(c, self.nvars, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.nvars, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            ac, bc, k = self._pair(other)
            bs = basis(self.nvars, k)
            prod = ac[bs.mul_left] * bc[bs.mul_right]
            return Jet(np.add.reduceat(prod, bs.mul_starts, axis=0), self.nvars, k)
        other = np.asarray(other, dtype=float)
        if other.ndim == 0:
            return Jet(self.c * other, self.nvars, self.order)
        batch = np.broadcast_shapes(self.c.shape[1:], other.shape)
        return Jet(_batch_lift(self.c, batch) * other, self.nvars, self.order)

    __rmul__ = __mul__

    def _series(self, coeffs) -> "Jet":
        """Compose a power series sum_k coeffs[k] * h**k with h = self - value."""
        if self.order == 0:
            return Jet(np.asarray(coeffs[0], dtype=float)[None, ...], self.nvars, 0)
        h = Jet(self.c.copy(), self.nvars, self.order)
        h.c[0] = 0.0
        out = h * coeffs[self.order] + coeffs[self.order - 1]
        for k in range(self.order - 2, -1, -1):
            out = out * h + coeffs[k]
        return out

    def reciprocal(self) -> "Jet":
        return self._series(_taylor_pow(self.value, -1.0, self.order))

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return np.exp(p * np.log(self))
        if float(p) == int(p) and 0 <= int(p) <= 4:
            out = Jet.constant(np.ones(self.batch_shape), self.nvars, self.order)
            for _ in range(int(p)):
                out = out * self
            return out
        return self._series(_taylor_pow(self.value, float(p), self.order))

    def __rpow__(self, base):
        return np.exp(self * np.log(base))

    def sqrt(self) -> "Jet":
        return self._series(_taylor_pow(self.value, 0.5, self.order))

    # numpy interop ----------------------------------------------------
    _UNARY = {
        np.sqrt: lambda j: j.sqrt(),
        np.exp: lambda j: j._series(_taylor_exp(j.value, j.order)),
        np.log: lambda j: j._series(_taylor_log(j.value, j.order)),
        np.sin: lambda j: j._series(_taylor_sin(j.value, j.order)),
        np.cos: lambda j: j._series(_taylor_sin(j.value, j.order, phase=1)),
        np.arctan: lambda j: j._series(_taylor_atan(j.value, j.order)),
        np.negative: lambda j: -j,
        np.positive: lambda j: j,
        np.square: lambda j: j * j,
        np.reciprocal: lambda j: j.reciprocal(),
        np.absolute: lambda j: j * np.sign(j.value),
    }
    _BINARY = {
        np.add: lambda a, b: a + b,
        np.subtract: lambda a, b: a - b,
        np.multiply: lambda a, b: a * b,
        np.true_divide: lambda a, b: a / b,
        np.power: lambda a, b: a**b,
    }

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs:
            return NotImplemented
        if len(inputs) == 1 and ufunc in self._UNARY:
            return self._UNARY[ufunc](inputs[0])
        if len(inputs) == 2 and ufunc in self._BINARY:
            a, b = inputs
            if not isinstance(a, Jet):
                # scalar op jet
                if ufunc is np.subtract:
                    return -b + a
                if ufunc is np.true_divide:
                    return b.reciprocal() * a
                if ufunc is np.power:
                    return b.__rpow__(a)
                a, b = b, a
            return self._BINARY[ufunc](a, b)
        return NotImplemented


def jet_value(x):
    """Base-point value of a jet, or ``x`` itself for plain numbers/arrays."""
    return x.value if isinstance(x, Jet) else x
