"""Partial-integral (3-PI) operators with polynomial multiplier and kernels.

An operator acts on a vector function ``u`` as::

    (P u)(x) = N0(x) u(x) + int_{-1}^{x} N1(x, s) u(s) ds + int_{-1}^{1} N2(x, s) u(s) ds

on the computational interval [-1, 1].  Coefficients are held in the monomial
basis: ``N0[m, n, p]`` multiplies ``x**p`` and ``N1[m, n, p, q]`` (likewise
``N2``) multiplies ``x**p * s**q``.  Operators may be rectangular
(``m`` outputs, ``n`` inputs); the square case is the usual one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import chebyshev as cb
from .errors import InputError


def _as_grid(a, ndim: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != ndim:
        raise InputError(f"expected a {ndim}-d coefficient array, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class PiOperator:
    N0: np.ndarray
    N1: np.ndarray
    N2: np.ndarray

    def __post_init__(self):
        N0 = _as_grid(self.N0, 3)
        N1 = _as_grid(self.N1, 4)
        N2 = _as_grid(self.N2, 4)
        if not (N0.shape[:2] == N1.shape[:2] == N2.shape[:2]):
            raise InputError("N0, N1, N2 must share the matrix shape")
        for name, arr in (("N0", N0), ("N1", N1), ("N2", N2)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, m: int, n: int | None = None) -> "PiOperator":
        n = m if n is None else n
        return cls(np.zeros((m, n, 1)), np.zeros((m, n, 1, 1)), np.zeros((m, n, 1, 1)))

    @classmethod
    def build(cls, shape, N0=None, N1=None, N2=None) -> "PiOperator":
        """Convenience constructor; omitted parts are zero.

        ``N0`` may be given as an ``(m, n)`` constant matrix or an
        ``(m, n, P+1)`` array, ``N1``/``N2`` as ``(m, n)`` constants or
        ``(m, n, P+1, Q+1)`` grids.
        """
        m, n = shape

        def lift(a, ndim):
            if a is None:
                return np.zeros((m, n) + (1,) * (ndim - 2))
            a = np.asarray(a, dtype=float)
            if a.ndim == 2:
                a = a.reshape((m, n) + (1,) * (ndim - 2))
            return a

        return cls(lift(N0, 3), lift(N1, 4), lift(N2, 4))

    @property
    def shape(self) -> tuple[int, int]:
        return self.N0.shape[:2]

    def N0_at(self, x) -> np.ndarray:
        """Multiplier matrix at a scalar point ``x``."""
        return poly_matrix_at(self.N0, x)

    def N1_at(self, x, s) -> np.ndarray:
        return _kernel_at(self.N1, x, s)

    def N2_at(self, x, s) -> np.ndarray:
        return _kernel_at(self.N2, x, s)


def _kernel_at(K: np.ndarray, x: float, s: float) -> np.ndarray:
    px = x ** np.arange(K.shape[2])
    qs = s ** np.arange(K.shape[3])
    return np.einsum("mnpq,p,q->mn", K, px, qs)


def _powers(c: np.ndarray, count: int) -> list[np.ndarray]:
    out = [cb.as_series(c)]
    for _ in range(count - 1):
        out.append(cb.cheb_mul_x(out[-1]))
    return out


def _horner_x(terms: list[np.ndarray]) -> np.ndarray:
    """``sum_p x**p * terms[p]`` for Chebyshev series ``terms``."""
    acc = np.zeros(1)
    for t in terms[::-1]:
        acc = cb.cheb_add(cb.cheb_mul_x(acc), t)
    return acc


def apply_column(op: PiOperator, j: int, c) -> list[np.ndarray]:
    """Image of a series placed in input slot ``j`` (all other inputs zero)."""
    m_out = op.shape[0]
    c = cb.as_series(c)
    P0 = op.N0.shape[2]
    P1, Q1 = op.N1.shape[2:]
    P2, Q2 = op.N2.shape[2:]
    xu = _powers(c, max(P0, Q1, Q2))
    J = [cb.cheb_integrate_indefinite(v) for v in xu[: max(Q1, Q2)]]
    whole = np.array([float(np.sum(v)) for v in J])  # antiderivative at x=1

    out = []
    for m in range(m_out):
        acc = np.zeros(1)
        for p in range(P0):
            a = op.N0[m, j, p]
            if a != 0.0:
                acc = cb.cheb_add(acc, a * xu[p])
        k1 = op.N1[m, j]
        if np.any(k1):
            inner = []
            for p in range(P1):
                s = np.zeros(1)
                for q in range(Q1):
                    if k1[p, q] != 0.0:
                        s = cb.cheb_add(s, k1[p, q] * J[q])
                inner.append(s)
            acc = cb.cheb_add(acc, _horner_x(inner))
        k2 = op.N2[m, j]
        if np.any(k2):
            acc = cb.cheb_add(acc, cb.monomial_to_cheb(k2[:, :Q2] @ whole[:Q2]))
        out.append(acc)
    return out


def pi_apply(op: PiOperator, u) -> list[np.ndarray]:
    """Apply ``op`` exactly to a vector of Chebyshev series ``u``."""
    if len(u) != op.shape[1]:
        raise InputError(f"operator expects {op.shape[1]} components, got {len(u)}")
    out = [np.zeros(1) for _ in range(op.shape[0])]
    for j, c in enumerate(u):
        c = cb.as_series(c)
        if not np.any(c):
            continue
        for m, v in enumerate(apply_column(op, j, c)):
            out[m] = cb.cheb_add(out[m], v)
    return out


def _pad_axes(a: np.ndarray, shape) -> np.ndarray:
    out = np.zeros(a.shape[:2] + tuple(shape))
    out[(slice(None), slice(None)) + tuple(slice(0, s) for s in a.shape[2:])] = a
    return out


def _sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    shape = np.maximum(a.shape[2:], b.shape[2:])
    return _pad_axes(a, shape) + _pad_axes(b, shape)


def pi_add(a: PiOperator, b: PiOperator) -> PiOperator:
    if a.shape != b.shape:
        raise InputError(f"operator shapes differ: {a.shape} vs {b.shape}")
    return PiOperator(_sum(a.N0, b.N0), _sum(a.N1, b.N1), _sum(a.N2, b.N2))


def pi_scale(a: PiOperator, c: float) -> PiOperator:
    return PiOperator(c * a.N0, c * a.N1, c * a.N2)


def _mult_x(mult: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Matrix product ``mult(x) @ K(x, ...)`` with polynomial convolution in x."""
    d = mult.shape[2]
    out = np.zeros((mult.shape[0], K.shape[1], d + K.shape[2] - 1) + K.shape[3:])
    for i in range(d):
        out[:, :, i : i + K.shape[2]] += np.einsum("rk,kn...->rn...", mult[:, :, i], K)
    return out


def pi_compose_multiplier(mult, b: PiOperator) -> PiOperator:
    """``P{mult,0,0} o b``: left-multiply every part of ``b`` by ``mult(x)``.

    ``mult`` is an ``(r, m)`` constant matrix or an ``(r, m, d+1)`` monomial array.
    """
    mult = np.asarray(mult, dtype=float)
    if mult.ndim == 2:
        mult = mult[:, :, None]
    if mult.ndim != 3 or mult.shape[1] != b.shape[0]:
        raise InputError(f"multiplier of shape {mult.shape[:2]} cannot act on operator output {b.shape[0]}")
    return PiOperator(_mult_x(mult, b.N0), _mult_x(mult, b.N1), _mult_x(mult, b.N2))


def poly_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two matrices of univariate monomial polynomials."""
    return _mult_x(np.asarray(a, float), np.asarray(b, float))


def poly_matrix_at(a: np.ndarray, x) -> np.ndarray:
    """Evaluate an ``(r, c, d+1)`` monomial polynomial matrix at scalar ``x``."""
    return npoly.polyval(x, np.moveaxis(a, 2, 0))
