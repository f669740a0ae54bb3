"""Chebyshev-Galerkin discretization of a PIE.

Fundamental component ``i`` with smoothness ``p(i)`` is expanded in
``T_0 .. T_{N-p(i)}``.  The coefficient vector stacks the components one
after another, so the block of component ``i`` has ``N + 1 - p(i)`` entries.
Testing against the same basis and dividing by the Chebyshev norms turns the
weighted residual into ``M da/dt = A a + b(t)``, where column ``j`` of ``M``
(``A``) holds the truncated coefficients of ``T`` (``A``) applied to the
``j``-th basis function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import chebyshev as cb
from .errors import InputError
from .pi_operator import PiOperator, apply_column
from .pie_conversion import PieSystem


@dataclass(frozen=True)
class Layout:
    """Index layout of the coefficient vector for truncation order ``N``."""

    N: int
    p: np.ndarray

    @property
    def sizes(self) -> np.ndarray:
        return self.N + 1 - self.p

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)])

    @property
    def Nd(self) -> int:
        return int(np.sum(self.sizes))

    def block(self, i: int) -> slice:
        o = self.offsets
        return slice(int(o[i]), int(o[i + 1]))

    def pack(self, series: Sequence) -> np.ndarray:
        """Stack series into one vector, truncating or zero-padding each block."""
        if len(series) != len(self.p):
            raise InputError(f"expected {len(self.p)} series, got {len(series)}")
        out = np.zeros(self.Nd)
        for i, c in enumerate(series):
            n = int(self.sizes[i])
            c = cb.as_series(c)[:n]
            out[self.block(i)][: len(c)] = c
        return out

    def unpack(self, a) -> list[np.ndarray]:
        a = np.asarray(a, dtype=float)
        if a.shape != (self.Nd,):
            raise InputError(f"coefficient vector must have length {self.Nd}, got {a.shape}")
        return [a[self.block(i)].copy() for i in range(len(self.p))]


@dataclass(frozen=True)
class GalerkinSystem:
    N: int
    layout: Layout
    M: np.ndarray
    A: np.ndarray
    alphas: tuple
    signals: tuple
    Mstar: np.ndarray
    recon: np.ndarray
    h_signals: tuple
    pie: PieSystem

    @property
    def Nd(self) -> int:
        return self.layout.Nd

    @property
    def ns(self) -> int:
        return len(self.layout.p)

    @property
    def b_terms(self) -> list[tuple[np.ndarray, object]]:
        return list(zip(self.alphas, self.signals))

    def h_values(self, t: float) -> np.ndarray:
        return np.array([float(s(t)) for s in self.h_signals])


def _operator_matrix(op: PiOperator, layout: Layout, full: bool = False) -> np.ndarray:
    """Coefficient matrix of ``op`` on the trial basis.

    Rows follow ``layout`` (block ``m`` truncated at degree ``N - p(m)``), or
    when ``full`` is set every output block keeps degrees ``0..N``.
    """
    N, ns = layout.N, len(layout.p)
    rows = ns * (N + 1) if full else layout.Nd
    out = np.zeros((rows, layout.Nd))
    for i in range(ns):
        for k in range(int(layout.sizes[i])):
            e = np.zeros(k + 1)
            e[k] = 1.0
            col = layout.offsets[i] + k
            for m, img in enumerate(apply_column(op, i, e)):
                if full:
                    n = N + 1
                    start = m * (N + 1)
                else:
                    n = int(layout.sizes[m])
                    start = int(layout.offsets[m])
                img = img[:n]
                out[start : start + len(img), col] = img
    return out


def assemble(sys: PieSystem, N: int) -> GalerkinSystem:
    """Build ``M``, ``A``, the forcing terms and the recovery matrices at order ``N``."""
    if int(N) != N or N < 2:
        raise InputError(f"truncation order must be an integer >= 2, got {N}")
    N = int(N)
    layout = Layout(N, sys.smoothness)
    M = _operator_matrix(sys.T_op, layout)
    A = _operator_matrix(sys.A_op, layout)
    Mstar = _operator_matrix(sys.T_op, layout, full=True)

    alphas = tuple(layout.pack(prof) for prof in sys.g.profiles)

    ns, nb = sys.model.ns, sys.model.nb
    recon = np.zeros((ns * (N + 1), nb))
    if nb:
        # K(x) B_T^{-1} is affine in x: constant part on T_0, slope on T_1
        KB = sys.KBinv
        for m in range(ns):
            recon[m * (N + 1)] = KB[m, :, 0]
            recon[m * (N + 1) + 1] = KB[m, :, 1]
    return GalerkinSystem(
        N=N,
        layout=layout,
        M=M,
        A=A,
        alphas=alphas,
        signals=tuple(sys.g.signals),
        Mstar=Mstar,
        recon=recon,
        h_signals=tuple(sys.model.h),
        pie=sys,
    )


def assemble_b(gs: GalerkinSystem, t: float) -> np.ndarray:
    """``b(t) = sum_l alpha_l * signal_l(t)``."""
    if t < 0:
        raise InputError("time must be non-negative")
    b = np.zeros(gs.Nd)
    for alpha, sig in zip(gs.alphas, gs.signals):
        b += alpha * float(sig(t))
    return b


def recover_primary_coeffs(gs: GalerkinSystem, a, h_values) -> np.ndarray:
    """Primary coefficients ``(R1 K1 + R2 K2) B_T^{-1} h + M* a``, stacked per component."""
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != gs.Nd:
        raise InputError(f"coefficient vector must have length {gs.Nd}, got {a.shape[-1]}")
    h_values = np.asarray(h_values, dtype=float)
    if h_values.shape[-1] != gs.recon.shape[1]:
        raise InputError(f"expected {gs.recon.shape[1]} boundary values, got {h_values.shape[-1]}")
    return a @ gs.Mstar.T + h_values @ gs.recon.T


def split_primary(gs: GalerkinSystem, ah) -> list[np.ndarray]:
    """Split a stacked primary coefficient vector into per-component series."""
    ah = np.asarray(ah, dtype=float)
    n = gs.N + 1
    return [ah[m * n : (m + 1) * n] for m in range(gs.ns)]


def sparsity_pattern(layout: Layout) -> np.ndarray:
    """Boolean mask of entries of ``M`` allowed to be nonzero.

    Identity on ``p = 0`` blocks; for ``p = 1`` diagonals ``n -+ 1`` and for
    ``p = 2`` diagonals ``n - 2, n, n + 2``; the top two rows of every block
    may be full across all columns.
    """
    Nd = layout.Nd
    mask = np.zeros((Nd, Nd), dtype=bool)
    for m, pm in enumerate(layout.p):
        r0 = int(layout.offsets[m])
        mask[r0 : r0 + min(2, int(layout.sizes[m]))] = True
        c0 = r0
        for n in range(int(layout.sizes[m])):
            offs = {0: (0,), 1: (-1, 1), 2: (-2, 0, 2)}[int(pm)]
            for d in offs:
                k = n + d
                if 0 <= k < int(layout.sizes[m]):
                    mask[r0 + n, c0 + k] = True
    return mask


def stencil_coefficients(p: int, n: int) -> dict[int, float]:
    """Closed-form band entries of row ``n >= 2`` of a ``p``-block of ``M``."""
    if p == 1:
        return {n - 1: 1.0 / (2 * n), n + 1: -1.0 / (2 * n)}
    if p == 2:
        plus = 0.25 if n == 2 else 1.0 / (4 * n * (n - 1))
        return {n - 2: plus, n: -1.0 / (2 * (n * n - 1)), n + 2: 1.0 / (4 * n * (n + 1))}
    if p == 0:
        return {n: 1.0}
    raise InputError("p must be 0, 1 or 2")


IC_MODES = ("galerkin", "interpolate")


def initial_coefficients(gs: GalerkinSystem, mode: str = "galerkin", degree: int | None = None) -> np.ndarray:
    """Initial coefficient vector ``a(0)``.

    ``"galerkin"`` projects the identity ``T uf = u - K B_T^{-1} h`` onto the
    test space, i.e. solves ``M a0 = P(u0 - K B_T^{-1} h(0))`` with ``u0``
    resolved at ``degree`` (default ``max(64, 2N)``).  ``"interpolate"``
    uses :func:`fundamental_ic` directly.  Without primary data the
    Galerkin mode falls back to interpolation.
    """
    from .pie_conversion import fundamental_ic

    if mode not in IC_MODES:
        raise InputError(f"unknown initial-condition mode {mode!r}")
    model = gs.pie.model
    if mode == "interpolate" or model.primary_ic is None:
        return gs.layout.pack(fundamental_ic(model, gs.N))
    degree = max(64, 2 * gs.N) if degree is None else degree
    u0 = [cb.cheb_transform(f, degree) for f in model.primary_ic]
    lift = gs.recon @ gs.h_values(0.0)
    n = gs.N + 1
    rhs = [cb.cheb_add(u, -lift[m * n : (m + 1) * n]) for m, u in enumerate(u0)]
    try:
        return np.linalg.solve(gs.M, gs.layout.pack(rhs))
    except np.linalg.LinAlgError:
        raise InputError("mass matrix is singular; cannot project the initial condition") from None


def discrete_energy_form(gs: GalerkinSystem, a) -> float:
    """``(R A u, R T u)`` in the Chebyshev-weighted inner product.

    ``R`` is the projection onto the test space (block ``m`` truncated at
    degree ``N - p(m)``), so the value is ``(A a)^T W (M a)`` with ``W`` the
    diagonal of Chebyshev norms.  Non-positive values are what the stability
    estimate of the semi-discrete scheme needs.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (gs.Nd,):
        raise InputError(f"coefficient vector must have length {gs.Nd}, got {a.shape}")
    w = np.concatenate([cb.cheb_inner_product_weights(int(n) - 1) for n in gs.layout.sizes])
    return float((gs.A @ a) @ (w * (gs.M @ a)))
