"""Chebyshev series algebra on [-1, 1].

A series is a 1-D float array ``c`` representing ``sum_k c[k] T_k(x)``.
Matrix-valued series are arrays of shape ``(rows, cols, degree + 1)``.
All routines are exact on the coefficient level (no quadrature) except
:func:`cheb_transform`, which interpolates at Gauss-Lobatto points.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.fft import dct

from .errors import InputError

ChebSeries = np.ndarray

_DOMAIN_SLACK = 1e-12


def as_series(c) -> ChebSeries:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.ndim != 1:
        raise InputError(f"a Chebyshev series must be 1-D, got shape {c.shape}")
    return c


def pad(c: ChebSeries, length: int) -> ChebSeries:
    """Zero-pad (never truncate) ``c`` to ``length`` coefficients."""
    c = as_series(c)
    if len(c) >= length:
        return c
    return np.concatenate([c, np.zeros(length - len(c))])


def cheb_add(a: ChebSeries, b: ChebSeries) -> ChebSeries:
    n = max(len(a), len(b))
    return pad(a, n) + pad(b, n)


def trim(c: ChebSeries, tol: float = 0.0) -> ChebSeries:
    """Drop trailing coefficients with magnitude ``<= tol`` (keeps at least one)."""
    c = as_series(c)
    nz = np.nonzero(np.abs(c) > tol)[0]
    return c[: nz[-1] + 1].copy() if len(nz) else c[:1] * 0.0


def cheb_eval(c: ChebSeries, x):
    """Evaluate a series with the Clenshaw recurrence.

    ``x`` may be a scalar or an array; every point must lie in [-1, 1].
    """
    c = as_series(c)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > 1.0 + _DOMAIN_SLACK):
        raise InputError("Chebyshev evaluation point outside [-1, 1]")
    if len(c) == 0:
        return np.zeros_like(x)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for ck in c[:0:-1]:
        b1, b2 = 2.0 * x * b1 - b2 + ck, b1
    return x * b1 - b2 + c[0]


def cheb_mul_x(c: ChebSeries) -> ChebSeries:
    """Multiply by ``x``: ``x T_0 = T_1`` and ``x T_k = (T_{k-1} + T_{k+1})/2``."""
    c = as_series(c)
    out = np.zeros(len(c) + 1)
    if len(c) == 0:
        return out
    out[1] += c[0]
    out[:-2] += 0.5 * c[1:]
    out[2:] += 0.5 * c[1:]
    return out


def cheb_product(a: ChebSeries, b: ChebSeries) -> ChebSeries:
    """Product via ``T_m T_k = (T_{m+k} + T_{|m-k|}) / 2``."""
    a, b = as_series(a), as_series(b)
    if len(a) == 0 or len(b) == 0:
        return np.zeros(max(len(a) + len(b) - 1, 1))
    out = np.zeros(len(a) + len(b) - 1)
    for m, am in enumerate(a):
        if am == 0.0:
            continue
        k = np.arange(len(b))
        np.add.at(out, m + k, 0.5 * am * b)
        np.add.at(out, np.abs(m - k), 0.5 * am * b)
    return out


def cheb_integrate_indefinite(c: ChebSeries) -> ChebSeries:
    """Antiderivative that vanishes at ``x = -1``.

    Uses the term-wise rules
    ``int T_0 = T_1``, ``int T_1 = (T_0 + T_2)/4`` and
    ``int T_k = (T_{k+1}/(k+1) - T_{k-1}/(k-1))/2`` for ``k >= 2``;
    the output has exactly one more coefficient than the input.
    """
    c = as_series(c)
    n = len(c)
    out = np.zeros(n + 1)
    if n == 0:
        return out
    out[1] += c[0]
    if n > 1:
        out[0] += 0.25 * c[1]
        out[2] += 0.25 * c[1]
    if n > 2:
        k = np.arange(2, n)
        out[k + 1] += 0.5 * c[k] / (k + 1)
        out[k - 1] -= 0.5 * c[k] / (k - 1)
    # T_k(-1) = (-1)^k
    out[0] -= np.sum(out * (-1.0) ** np.arange(n + 1))
    return out


def cheb_integrate_definite(c: ChebSeries) -> float:
    """Integral over [-1, 1], read off the antiderivative at ``x = 1``."""
    return float(np.sum(cheb_integrate_indefinite(c)))


def cheb_differentiate(c: ChebSeries, m: int = 1) -> ChebSeries:
    """``m``-th derivative; each differentiation removes one coefficient."""
    c = as_series(c)
    for _ in range(m):
        n = len(c)
        if n <= 1:
            c = np.zeros(1)
            continue
        d = np.zeros(n + 1)
        for k in range(n - 1, 0, -1):
            d[k - 1] = d[k + 1] + 2.0 * k * c[k]
        d[0] *= 0.5
        c = d[: n - 1]
    return c


def lobatto_points(N: int) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto points ``cos(pi j / N)``, j = 0..N (descending)."""
    if N == 0:
        return np.array([1.0])
    # sin form keeps the set symmetric to roundoff
    return np.sin(np.pi * (N - 2 * np.arange(N + 1)) / (2 * N))


def cheb_transform(f: Callable, N: int) -> ChebSeries:
    """Interpolate ``f`` at the N+1 Gauss-Lobatto points; returns N+1 coefficients."""
    if N < 0:
        raise InputError("transform degree must be non-negative")
    x = lobatto_points(N)
    v = np.asarray(f(x), dtype=float) * np.ones_like(x)
    if not np.all(np.isfinite(v)):
        raise InputError("non-finite sample in Chebyshev transform")
    if N == 0:
        return v.copy()
    # samples at cos(pi j / N) map to coefficients by a type-I DCT
    c = dct(v, type=1) / N
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def cheb_inner_product_weights(N: int) -> np.ndarray:
    """Norms ``(T_k, T_k)_w`` for k = 0..N with ``w = 1/sqrt(1 - x^2)``."""
    if N < 0:
        raise InputError("N must be non-negative")
    w = np.full(N + 1, np.pi / 2)
    w[0] = np.pi
    return w


def monomial_to_cheb(p: Sequence[float]) -> ChebSeries:
    """Convert power-series coefficients ``sum p[j] x^j`` with Horner + :func:`cheb_mul_x`."""
    p = as_series(p)
    out = np.zeros(1)
    for coef in p[::-1]:
        out = cheb_mul_x(out)
        out[0] += coef
    return out[: max(len(p), 1)]
