"""Standardized PDE models and their conversion to PIE form.

A model is the state-space system::

    d/dt [u0; u1; u2] = A0(x) [u0; u1; u2] + A1(x) [u1; u2]_x + A2(x) u2_xx + f(x, t)
    B [u1(a); u1(b); u2(a); u2(b); u2x(a); u2x(b)] = h(t)

with ``u0``, ``u1``, ``u2`` of sizes ``n0``, ``n1``, ``n2``.  Conversion
produces the operators ``T`` and ``A`` of the boundary-free equation
``T d/dt uf = A uf + g`` for the fundamental state
``uf = (u0, u1_x, u2_xx)`` together with the maps needed to go back.

Coefficient matrices are polynomial in x and are stored as monomial arrays of
shape ``(rows, cols, degree + 1)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import chebyshev as cb
from .errors import ConversionError, InputError
from .pi_operator import PiOperator, pi_add, pi_apply, pi_compose_multiplier, poly_matmul, poly_matrix_at
from .signals import CallableSignal, Signal, TimeSignal

BT_RCOND_THRESHOLD = 1e-12
IC_TOLERANCE = 1e-8


def _poly_array(a, rows: int, cols: int, name: str) -> np.ndarray:
    if a is None:
        return np.zeros((rows, cols, 1))
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = np.full((rows, cols, 1), float(a))
    elif a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3 or a.shape[:2] != (rows, cols):
        raise InputError(f"{name} must have shape ({rows}, {cols}[, degree+1]), got {a.shape}")
    return a


@dataclass(frozen=True)
class ForcingTerm:
    """One separable piece ``profile(x) * signal(t)``.

    ``profile`` maps an array of points to an ``(ns, len(x))`` array.
    """

    profile: Callable
    signal: Signal


@dataclass(frozen=True)
class PdeModel:
    n0: int
    n1: int
    n2: int
    A0: np.ndarray = None
    A1: np.ndarray = None
    A2: np.ndarray = None
    B: np.ndarray = None
    h: tuple = None
    forcing: tuple[ForcingTerm, ...] = ()
    primary_ic: tuple | None = None
    fundamental_ic: tuple | None = None
    domain: tuple[float, float] = (-1.0, 1.0)
    physical_domain: tuple[float, float] | None = None
    name: str = ""

    def __post_init__(self):
        n0, n1, n2 = self.n0, self.n1, self.n2
        if min(n0, n1, n2) < 0 or n0 + n1 + n2 == 0:
            raise InputError("state sizes must be non-negative and not all zero")
        ns, nb = self.ns, self.nb
        a, b = map(float, self.domain)
        if not b > a:
            raise InputError(f"degenerate domain [{a}, {b}]")
        object.__setattr__(self, "domain", (a, b))
        object.__setattr__(self, "A0", _poly_array(self.A0, ns, ns, "A0"))
        object.__setattr__(self, "A1", _poly_array(self.A1, ns, n1 + n2, "A1"))
        object.__setattr__(self, "A2", _poly_array(self.A2, ns, n2, "A2"))
        B = np.zeros((nb, 2 * nb)) if self.B is None else np.atleast_2d(np.asarray(self.B, dtype=float))
        if nb == 0:
            B = np.zeros((0, 0))
        if B.shape != (nb, 2 * nb):
            raise InputError(f"B must have shape ({nb}, {2 * nb}), got {B.shape}")
        object.__setattr__(self, "B", B)
        h = tuple(self.h) if self.h is not None else tuple(TimeSignal() for _ in range(nb))
        if len(h) != nb:
            raise InputError(f"h must have {nb} components, got {len(h)}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "forcing", tuple(self.forcing))
        for ic_name in ("primary_ic", "fundamental_ic"):
            ic = getattr(self, ic_name)
            if ic is not None:
                ic = tuple(ic)
                if len(ic) != ns:
                    raise InputError(f"{ic_name} must have {ns} components")
                object.__setattr__(self, ic_name, ic)

    @property
    def ns(self) -> int:
        return self.n0 + self.n1 + self.n2

    @property
    def nb(self) -> int:
        return self.n1 + 2 * self.n2

    @property
    def smoothness(self) -> np.ndarray:
        """Derivative order p(i) linking fundamental component i to the primary one."""
        return np.array([0] * self.n0 + [1] * self.n1 + [2] * self.n2)

    def h_values(self, t: float) -> np.ndarray:
        return np.array([float(s(t)) for s in self.h])

    def boundary_vector(self, values: Callable, derivs: Callable) -> np.ndarray:
        """Assemble ``u_bf`` from callables giving state values / x-derivatives at a point."""
        a, b = self.domain
        n0, n1 = self.n0, self.n1
        ua, ub = values(a), values(b)
        dua, dub = derivs(a), derivs(b)
        s1 = slice(n0, n0 + n1)
        s2 = slice(n0 + n1, self.ns)
        return np.concatenate([ua[s1], ub[s1], ua[s2], ub[s2], dua[s2], dub[s2]])

    def ic_boundary_residual(self, degree: int = 64) -> float:
        """``max |B u_bf(0) - h(0)|`` for the primary initial condition."""
        if self.primary_ic is None or self.nb == 0:
            return 0.0
        a, b = self.domain
        half = 0.5 * (b - a)
        coeffs = [cb.cheb_transform(lambda xc, f=f: f(half * xc + 0.5 * (a + b)), degree) for f in self.primary_ic]
        dcoeffs = [cb.cheb_differentiate(c) / half for c in coeffs]

        def at(cs):
            return lambda x: np.array([cb.cheb_eval(c, (2 * x - a - b) / (b - a)) for c in cs])

        ubf = self.boundary_vector(at(coeffs), at(dcoeffs))
        return float(np.max(np.abs(self.B @ ubf - self.h_values(0.0))))


def _compose_affine(c: np.ndarray, scale: float, shift: float) -> np.ndarray:
    """Coefficients of ``P(scale * y + shift)`` for monomial ``P`` along the last axis."""
    deg = c.shape[-1]
    out = np.zeros_like(c)
    lin = np.array([shift, scale])
    power = np.array([1.0])
    for j in range(deg):
        out[..., : len(power)] += c[..., j : j + 1] * power
        power = npoly.polymul(power, lin)
    return out


def map_to_computational(model: PdeModel) -> PdeModel:
    """Re-express ``model`` on [-1, 1] through ``x = (b-a)/2 * xc + (b+a)/2``.

    First-derivative coefficients scale by ``2/(b-a)``, second by
    ``4/(b-a)**2``.  Boundary columns holding ``u2_x`` are rescaled too, so
    ``h`` keeps its physical meaning; value columns are untouched.
    Fundamental initial data is converted to computational derivatives.
    """
    a, b = model.domain
    if (a, b) == (-1.0, 1.0):
        return model if model.physical_domain is not None else replace(model, physical_domain=(a, b))
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    n1, n2 = model.n1, model.n2
    B = model.B.copy()
    B[:, 2 * n1 + 2 * n2 :] /= half

    def compose(f):
        return lambda xc: f(half * np.asarray(xc) + mid)

    forcing = tuple(
        ForcingTerm(compose(term.profile), term.signal) for term in model.forcing
    )
    primary = None if model.primary_ic is None else tuple(compose(f) for f in model.primary_ic)
    fundamental = None
    if model.fundamental_ic is not None:
        p = model.smoothness
        fundamental = tuple(
            (lambda xc, f=f, s=half ** int(pi): s * f(half * np.asarray(xc) + mid))
            for f, pi in zip(model.fundamental_ic, p)
        )
    return replace(
        model,
        A0=_compose_affine(model.A0, half, mid),
        A1=_compose_affine(model.A1, half, mid) / half,
        A2=_compose_affine(model.A2, half, mid) / half**2,
        B=B,
        forcing=forcing,
        primary_ic=primary,
        fundamental_ic=fundamental,
        domain=(-1.0, 1.0),
        physical_domain=(a, b),
    )


@dataclass(frozen=True)
class Structural:
    """Constant structural blocks; polynomial ones are monomial arrays.

    ``K`` is ``(ns, nb, 2)`` in x, ``Q`` is ``(2 nb, ns, 2)`` in s and
    ``G1`` is an ``(ns, ns, 2, 2)`` grid in (x, s).
    """

    T: np.ndarray
    Q: np.ndarray
    K: np.ndarray
    V: np.ndarray
    G0: np.ndarray
    G1: np.ndarray
    G3: np.ndarray
    G4: np.ndarray


def build_structural(n0: int, n1: int, n2: int, a: float = -1.0, b: float = 1.0) -> Structural:
    ns, nb = n0 + n1 + n2, n1 + 2 * n2
    if ns == 0:
        raise InputError("at least one state is required")
    I1, I2 = np.eye(n1), np.eye(n2)
    r1, r2 = slice(n0, n0 + n1), slice(n0 + n1, ns)  # state blocks
    c1, c2, c3 = slice(0, n1), slice(n1, n1 + n2), slice(n1 + n2, nb)  # u_bc blocks

    T = np.zeros((2 * nb, nb))
    rows = np.cumsum([0, n1, n1, n2, n2, n2, n2])
    blk = [slice(rows[i], rows[i + 1]) for i in range(6)]
    T[blk[0], c1] = I1
    T[blk[1], c1] = I1
    T[blk[2], c2] = I2
    T[blk[3], c2] = I2
    T[blk[3], c3] = (b - a) * I2
    T[blk[4], c3] = I2
    T[blk[5], c3] = I2

    Q = np.zeros((2 * nb, ns, 2))
    Q[blk[1], r1, 0] = I1
    Q[blk[3], r2, 0] = b * I2
    Q[blk[3], r2, 1] = -I2
    Q[blk[5], r2, 0] = I2

    K = np.zeros((ns, nb, 2))
    K[r1, c1, 0] = I1
    K[r2, c2, 0] = I2
    K[r2, c3, 0] = -a * I2
    K[r2, c3, 1] = I2

    V = np.zeros((n1 + n2, nb))
    V[n1:, c3] = I2

    G0 = np.zeros((ns, ns))
    G0[:n0, :n0] = np.eye(n0)
    G1 = np.zeros((ns, ns, 2, 2))
    G1[r1, r1, 0, 0] = I1
    G1[r2, r2, 1, 0] = I2
    G1[r2, r2, 0, 1] = -I2

    G3 = np.zeros((n1 + n2, ns))
    G3[:n1, r1] = I1
    G4 = np.zeros((n1 + n2, ns))
    G4[n1:, r2] = I2
    return Structural(T, Q, K, V, G0, G1, G3, G4)


@dataclass(frozen=True)
class BTCheck:
    invertible: bool
    condition: float
    BT: np.ndarray

    @property
    def rcond(self) -> float:
        return 0.0 if not np.isfinite(self.condition) else 1.0 / self.condition


def check_bt(B: np.ndarray, T: np.ndarray, threshold: float = BT_RCOND_THRESHOLD) -> BTCheck:
    """Form ``B_T = B T`` and decide invertibility from its 2-norm condition number."""
    B, T = np.atleast_2d(B), np.atleast_2d(T)
    if B.shape[1] != T.shape[0]:
        raise InputError(f"B {B.shape} and T {T.shape} are not compatible")
    BT = B @ T
    if BT.size == 0:
        return BTCheck(True, 1.0, BT)
    with np.errstate(divide="ignore"):
        cond = float(np.linalg.cond(BT))
    if not np.isfinite(cond):
        cond = np.inf
    return BTCheck(bool(np.isfinite(cond) and 1.0 / cond > threshold), cond, BT)


@dataclass(frozen=True)
class SeparableForcing:
    """``g(x, t) = sum_l profiles[l](x) * signals[l](t)``; profiles are lists of series."""

    profiles: tuple = ()
    signals: tuple = ()

    def __len__(self):
        return len(self.signals)

    def evaluate(self, x, t) -> np.ndarray:
        ns = len(self.profiles[0]) if self.profiles else 0
        out = np.zeros((ns,) + np.shape(x))
        for prof, sig in zip(self.profiles, self.signals):
            out += np.array([cb.cheb_eval(c, x) for c in prof]) * sig(t)
        return out

    @property
    def closed_form(self) -> bool:
        return all(isinstance(s, TimeSignal) for s in self.signals)


@dataclass(frozen=True)
class PieSystem:
    model: PdeModel
    T_op: PiOperator
    A_op: PiOperator
    K: np.ndarray
    BT: np.ndarray
    BT_inv: np.ndarray
    V: np.ndarray
    g: SeparableForcing
    structural: Structural
    condition: float

    @property
    def smoothness(self) -> np.ndarray:
        return self.model.smoothness

    @property
    def KBinv(self) -> np.ndarray:
        """``K(x) B_T^{-1}`` as an ``(ns, nb, 2)`` monomial array."""
        return np.einsum("mkp,kj->mjp", self.K, self.BT_inv)

    @property
    def G2(self) -> np.ndarray:
        return self.T_op.N2


def convert(model: PdeModel, profile_degree: int = 64) -> PieSystem:
    """Convert a model to PIE form (mapping it to [-1, 1] first if needed).

    ``profile_degree`` is the interpolation degree used for non-polynomial
    forcing profiles.
    """
    if model.domain != (-1.0, 1.0) or model.physical_domain is None:
        model = map_to_computational(model)
    n0, n1, n2, ns, nb = model.n0, model.n1, model.n2, model.ns, model.nb
    st = build_structural(n0, n1, n2, -1.0, 1.0)

    chk = check_bt(model.B, st.T)
    if not chk.invertible:
        raise ConversionError(
            f"B_T = B T is singular (condition number {chk.condition:.3e}); "
            "these boundary conditions have no PIE representation",
            condition=chk.condition,
        )
    BT_inv = np.linalg.inv(chk.BT) if nb else np.zeros((0, 0))
    WQ = np.einsum("kj,jnq->knq", BT_inv @ model.B, st.Q) if nb else np.zeros((0, ns, 2))

    # G2 = -K(x) B_T^{-1} B Q(s);  G5 = -V B_T^{-1} B Q(s)
    G2 = -np.einsum("mkp,knq->mnpq", st.K, WQ)
    G5 = -np.einsum("mk,knq->mnq", st.V, WQ)[:, :, None, :]
    T_op = PiOperator.build((ns, ns), N0=st.G0, N1=st.G1, N2=G2)
    D1T = PiOperator.build((n1 + n2, ns), N0=st.G3, N1=st.G4, N2=G5)

    A20 = np.zeros((ns, ns, model.A2.shape[2]))
    A20[:, n0 + n1 :, :] = model.A2
    A_op = pi_add(
        pi_add(pi_compose_multiplier(model.A0, T_op), pi_compose_multiplier(model.A1, D1T)),
        PiOperator.build((ns, ns), N0=A20),
    )

    g = _lumped_forcing(model, st, BT_inv, profile_degree)
    return PieSystem(model, T_op, A_op, st.K, chk.BT, BT_inv, st.V, g, st, chk.condition)


def _poly_columns_to_cheb(P: np.ndarray, j: int) -> list[np.ndarray]:
    return [cb.monomial_to_cheb(P[m, j]) for m in range(P.shape[0])]


def _lumped_forcing(model: PdeModel, st: Structural, BT_inv: np.ndarray, degree: int) -> SeparableForcing:
    profiles, signals = [], []
    if model.nb:
        KB = np.einsum("mkp,kj->mjp", st.K, BT_inv)
        # A0 K B_T^{-1} + A1 V B_T^{-1} multiplies h; -K B_T^{-1} multiplies dh/dt
        H = poly_matmul(model.A0, KB)
        VB = (st.V @ BT_inv)[:, :, None]
        H_other = poly_matmul(model.A1, VB)
        width = max(H.shape[2], H_other.shape[2])
        Hs = np.zeros(H.shape[:2] + (width,))
        Hs[:, :, : H.shape[2]] += H
        Hs[:, :, : H_other.shape[2]] += H_other
        for j, hj in enumerate(model.h):
            if hj.is_zero():
                continue
            if np.any(Hs[:, j]):
                profiles.append(_poly_columns_to_cheb(Hs, j))
                signals.append(hj)
            if np.any(KB[:, j]):
                profiles.append(_poly_columns_to_cheb(-KB, j))
                signals.append(hj.derivative())
    for term in model.forcing:
        ns = model.ns
        prof = [
            cb.cheb_transform(lambda x, term=term, m=m: np.asarray(term.profile(x))[m], degree)
            for m in range(ns)
        ]
        if any(np.any(c) for c in prof) and not term.signal.is_zero():
            profiles.append(prof)
            signals.append(term.signal)
    return SeparableForcing(tuple(profiles), tuple(signals))


def fundamental_ic(model: PdeModel, N: int) -> list[np.ndarray]:
    """Chebyshev coefficients of ``uf(x, 0)``, component i truncated at degree ``N - p(i)``.

    Uses the fundamental initial data when the model supplies it, otherwise
    interpolates the primary data at degree ``N`` and differentiates.
    """
    if model.domain != (-1.0, 1.0):
        model = map_to_computational(model)
    p = model.smoothness
    if model.fundamental_ic is not None:
        return [cb.cheb_transform(f, N - int(pi)) for f, pi in zip(model.fundamental_ic, p)]
    if model.primary_ic is None:
        raise InputError("model has neither primary nor fundamental initial conditions")
    return [cb.cheb_differentiate(cb.cheb_transform(f, N), int(pi)) if pi else cb.cheb_transform(f, N)
            for f, pi in zip(model.primary_ic, p)]


def reconstruct_primary(sys: PieSystem, uf: Sequence, h_values) -> list[np.ndarray]:
    """Primary state ``K(x) B_T^{-1} h + T uf`` as Chebyshev series."""
    ns = sys.model.ns
    if len(uf) != ns:
        raise InputError(f"expected {ns} fundamental components, got {len(uf)}")
    h_values = np.asarray(h_values, dtype=float).reshape(-1)
    if len(h_values) != sys.model.nb:
        raise InputError(f"expected {sys.model.nb} boundary values, got {len(h_values)}")
    out = pi_apply(sys.T_op, uf)
    if sys.model.nb:
        lift = np.einsum("mjp,j->mp", sys.KBinv, h_values)
        out = [cb.cheb_add(o, cb.monomial_to_cheb(lift[m])) for m, o in enumerate(out)]
    return out


def boundary_vector_of(model: PdeModel, series: Sequence) -> np.ndarray:
    """``u_bf`` of a primary state given as series on the computational domain."""
    derivs = [cb.cheb_differentiate(c) for c in series]

    def vals(cs):
        return lambda x: np.array([cb.cheb_eval(c, x) for c in cs])

    if model.domain != (-1.0, 1.0):
        raise InputError("boundary_vector_of expects a computational-domain model")
    return model.boundary_vector(vals(series), vals(derivs))


def reconstruct_from_derivatives(order: int, deriv, boundary_values, a: float = -1.0, b: float = 1.0) -> np.ndarray:
    """Recover ``u`` from its ``order``-th derivative and data at the left end.

    ``deriv`` is a Chebyshev series in the computational variable of the
    physical interval ``[a, b]``; ``boundary_values`` is ``(u(a),)`` for
    order 1 and ``(u(a), u_x(a))`` for order 2 (physical derivatives).
    """
    if order not in (1, 2):
        raise InputError("order must be 1 or 2")
    bv = np.asarray(boundary_values, dtype=float).reshape(-1)
    if len(bv) != order:
        raise InputError(f"order {order} needs {order} boundary values")
    half = 0.5 * (b - a)
    once = cb.cheb_integrate_indefinite(deriv)
    if order == 1:
        out = half * once
        out[0] += bv[0]
        return out
    out = half**2 * cb.cheb_integrate_indefinite(once)
    # u(a) + u_x(a) (x - a) with x - a = half * (xc + 1)
    out = cb.cheb_add(out, np.array([bv[0] + bv[1] * half, bv[1] * half]))
    return out


def warn_if_incompatible(model: PdeModel, tol: float = IC_TOLERANCE) -> float:
    res = model.ic_boundary_residual()
    if res > tol:
        warnings.warn(
            f"initial condition violates the boundary conditions by {res:.2e}", RuntimeWarning, stacklevel=2
        )
    return res
