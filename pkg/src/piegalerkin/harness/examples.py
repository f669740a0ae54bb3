"""Built-in test problems with exact solutions.

Each builder returns an :class:`ExampleProblem` holding the model in
physical coordinates, the exact state, and (for the beam and the wave) the
rule recovering the original variable ``u`` from a state component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..errors import InputError
from ..pie_conversion import ForcingTerm, PdeModel
from ..signals import CallableSignal, SignalTerm, TimeSignal

EXAMPLE_IDS = ("heat_dn", "heat_varvisc", "parabolic_forced", "euler_bernoulli", "transport", "wave")


@dataclass(frozen=True)
class Recovery:
    """Recover ``u`` by integrating state ``component`` (its ``order``-th x-derivative)."""

    component: int
    order: int
    boundary: Callable  # t -> (u(a, t),) or (u(a, t), u_x(a, t))


@dataclass
class ExampleProblem:
    id: str
    model: PdeModel
    exact: Callable  # (x, t) -> (ns, len(x)) exact states
    params: dict
    t_final: float = 0.1
    exact_u: Callable | None = None  # (x, t) -> u for recovered variables
    recovery: Recovery | None = None
    solver: dict = field(default_factory=dict)
    exact_dx: Callable | None = None  # (x, t) -> x-derivative of the exact states

    def ic_boundary_residual(self) -> float:
        """``max |B u_bf(0) - h(0)|`` from the exact states and their analytic x-derivatives."""
        model = self.model
        if self.exact_dx is None:
            return model.ic_boundary_residual()
        if model.nb == 0:
            return 0.0

        def values(x):
            return np.asarray(self.exact(np.array([x]), 0.0), dtype=float)[:, 0]

        def derivs(x):
            return np.asarray(self.exact_dx(np.array([x]), 0.0), dtype=float)[:, 0]

        ubf = model.boundary_vector(values, derivs)
        return float(np.max(np.abs(model.B @ ubf - model.h_values(0.0))))


def _exp_signal(coef: float, rate: float) -> TimeSignal:
    return TimeSignal((SignalTerm(coef, 0, rate),))


def heat_dn(nu: float = 0.5) -> ExampleProblem:
    """``u_t = nu u_xx`` on [-1, 1] with Dirichlet-Neumann data.

    The exact solution ``sin(k x + pi/8) exp(-nu k^2 t)`` with ``k = 5 pi/4``.
    """
    k, ph = 5 * np.pi / 4, np.pi / 8
    rate = -nu * k * k
    h = (_exp_signal(np.sin(-k + ph), rate), _exp_signal(k * np.cos(k + ph), rate))
    model = PdeModel(
        0, 0, 1,
        A2=[[nu]],
        B=[[1, 0, 0, 0], [0, 0, 0, 1]],
        h=h,
        primary_ic=(lambda x: np.sin(k * x + ph),),
        fundamental_ic=(lambda x: -k * k * np.sin(k * x + ph),),
        name="heat_dn",
    )

    def exact(x, t):
        return np.sin(k * np.asarray(x) + ph)[None] * np.exp(rate * t)

    def exact_dx(x, t):
        return k * np.cos(k * np.asarray(x) + ph)[None] * np.exp(rate * t)

    return ExampleProblem("heat_dn", model, exact, {"nu": nu}, exact_dx=exact_dx)


def heat_varvisc() -> ExampleProblem:
    """``u_t = x u_xx`` on [0, 2], Dirichlet at both ends; ``u = -2 x t - x^2``."""
    h = (TimeSignal(), TimeSignal((SignalTerm(-4.0, 1), SignalTerm(-4.0))))
    model = PdeModel(
        0, 0, 1,
        A2=np.array([[[0.0, 1.0]]]),
        B=[[1, 0, 0, 0], [0, 1, 0, 0]],
        h=h,
        primary_ic=(lambda x: -np.asarray(x) ** 2,),
        fundamental_ic=(lambda x: -2.0 + 0 * np.asarray(x),),
        domain=(0.0, 2.0),
        name="heat_varvisc",
    )

    def exact(x, t):
        x = np.asarray(x)
        return (-2 * x * t - x**2)[None]

    def exact_dx(x, t):
        return (-2 * t - 2 * np.asarray(x))[None]

    return ExampleProblem("heat_varvisc", model, exact, {}, exact_dx=exact_dx)


def parabolic_forced(alpha=4.0, beta=2.0, gamma=0.5, a=1.25, b=2.5) -> ExampleProblem:
    """``u_t = alpha u + beta u_x + gamma u_xx + f`` with ``u = sqrt(t+1) sin(pi x)``.

    Neumann data on the left, Dirichlet on the right.  The time dependence
    is not of exponential-polynomial type, so the data are callables.
    """
    pi = np.pi

    def root(t):
        return np.sqrt(np.asarray(t) + 1.0)

    def droot(t):
        return 0.5 / np.sqrt(np.asarray(t) + 1.0)

    h = (
        CallableSignal(lambda t: pi * np.cos(pi * a) * root(t), lambda t: pi * np.cos(pi * a) * droot(t), "u_x(a)"),
        CallableSignal(lambda t: np.sin(pi * b) * root(t), lambda t: np.sin(pi * b) * droot(t), "u(b)"),
    )
    forcing = (
        ForcingTerm(
            lambda x: np.sin(pi * np.asarray(x))[None],
            CallableSignal(lambda t: droot(t) + (gamma * pi**2 - alpha) * root(t), name="sin-part"),
        ),
        ForcingTerm(
            lambda x: np.cos(pi * np.asarray(x))[None],
            CallableSignal(lambda t: -beta * pi * root(t), name="cos-part"),
        ),
    )
    model = PdeModel(
        0, 0, 1,
        A0=[[alpha]], A1=[[beta]], A2=[[gamma]],
        B=[[0, 0, 1, 0], [0, 1, 0, 0]],
        h=h,
        forcing=forcing,
        primary_ic=(lambda x: np.sin(pi * np.asarray(x)),),
        fundamental_ic=(lambda x: -pi**2 * np.sin(pi * np.asarray(x)),),
        domain=(a, b),
        name="parabolic_forced",
    )

    def exact(x, t):
        return (root(t) * np.sin(pi * np.asarray(x)))[None]

    def exact_dx(x, t):
        return (pi * root(t) * np.cos(pi * np.asarray(x)))[None]

    return ExampleProblem(
        "parabolic_forced", model, exact,
        {"alpha": alpha, "beta": beta, "gamma": gamma, "a": a, "b": b},
        solver={"integrator": "gauss"},
        exact_dx=exact_dx,
    )


def beam_eigen(n: int, L: float = 1.0, tol: float = 1e-16, c: float = 1.0) -> dict:
    """Root ``beta_n`` of ``cosh(beta L) cos(beta L) + 1 = 0`` and ``omega_n = beta_n^2 sqrt(c)``.

    Works with ``g(z) = cos z + sech z`` (the equation divided by ``cosh z``),
    bracketed on ``[(n-1) pi, n pi]`` and polished by Newton steps.  The
    returned ``residual`` is ``|g|``, i.e. the residual relative to ``cosh``.
    """
    if int(n) != n or n < 1:
        raise InputError("mode index must be a positive integer")
    if not (tol > 0 and L > 0):
        raise InputError("tolerance and length must be positive")

    def g(z):
        return math.cos(z) + 1.0 / math.cosh(z)

    def dg(z):
        return -math.sin(z) - math.tanh(z) / math.cosh(z)

    lo, hi = (n - 1) * math.pi, n * math.pi
    if g(lo) * g(hi) > 0:
        raise InputError(f"no sign change for mode {n}")
    z = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    for _ in range(5):
        if abs(g(z)) <= tol:
            break
        step = g(z) / dg(z)
        z_new = z - step
        if not lo <= z_new <= hi:
            break
        z = z_new
    beta = z / L
    return {"beta": beta, "betaL": z, "omega": beta**2 * math.sqrt(c), "residual": abs(g(z))}


def euler_bernoulli(mode: int = 2, c: float = 2.0, L: float = 2.0) -> ExampleProblem:
    """Cantilever ``u_tt = -c u_xxxx`` in states ``v = (u_t, u_xx)``, started on mode ``mode``.

    ``u = Re[phi(x) exp(-i omega t)] = phi(x) cos(omega t)`` with ``u_t(x, 0) = 0``.
    """
    eig = beam_eigen(mode, L, c=c)
    bt, om = eig["beta"], eig["omega"]
    zl = eig["betaL"]
    sig = (math.cos(zl) + math.cosh(zl)) / (math.sin(zl) + math.sinh(zl))
    # q = 1 - sig without cancellation, so cosh y - sig sinh y = (q e^y + (2 - q) e^-y) / 2 stays O(1)
    q = (math.sin(zl) - math.cos(zl) - math.exp(-zl)) / (math.sin(zl) + math.sinh(zl))

    def hyp(x, k):
        """k-th derivative (over beta^k) of cosh y - sig sinh y at y = beta x."""
        y = bt * np.asarray(x)
        return 0.5 * (q * np.exp(y) + (-1) ** k * (2 - q) * np.exp(-y))

    def phi(x):
        y = bt * np.asarray(x)
        return hyp(x, 0) - np.cos(y) + sig * np.sin(y)

    def phi1(x):
        y = bt * np.asarray(x)
        return bt * (hyp(x, 1) + np.sin(y) + sig * np.cos(y))

    def phi2(x):
        y = bt * np.asarray(x)
        return bt**2 * (hyp(x, 0) + np.cos(y) - sig * np.sin(y))

    def phi3(x):
        y = bt * np.asarray(x)
        return bt**3 * (hyp(x, 1) - np.sin(y) - sig * np.cos(y))

    B = np.zeros((4, 8))
    for row, col in enumerate((0, 3, 4, 7)):
        B[row, col] = 1.0
    model = PdeModel(
        0, 0, 2,
        A2=[[0.0, -c], [1.0, 0.0]],
        B=B,
        primary_ic=(lambda x: 0 * np.asarray(x), phi2),
        fundamental_ic=(lambda x: 0 * np.asarray(x), lambda x: bt**4 * phi(x)),
        domain=(0.0, L),
        name="euler_bernoulli",
    )

    def exact(x, t):
        return np.array([-om * phi(x) * np.sin(om * t), phi2(x) * np.cos(om * t)])

    def exact_u(x, t):
        return phi(x) * np.cos(om * t)

    def exact_dx(x, t):
        return np.array([-om * phi1(x) * np.sin(om * t), phi3(x) * np.cos(om * t)])

    return ExampleProblem(
        "euler_bernoulli", model, exact,
        {"mode": mode, "c": c, "L": L, "beta": bt, "omega": om, "residual": eig["residual"]},
        exact_u=exact_u,
        recovery=Recovery(1, 2, lambda t: (0.0, 0.0)),
        exact_dx=exact_dx,
    )


def _gauss(sigma, mu):
    norm = 1.0 / (sigma * math.sqrt(2 * math.pi))

    def G(z):
        return norm * np.exp(-0.5 * ((np.asarray(z) - mu) / sigma) ** 2)

    def dG(z):
        return -(np.asarray(z) - mu) / sigma**2 * G(z)

    def d2G(z):
        z = np.asarray(z)
        return ((z - mu) ** 2 / sigma**4 - 1 / sigma**2) * G(z)

    return G, dG, d2G


def transport(variant: str = "gaussian", c: float | None = None, sigma: float = 0.2, mu: float = 0.0) -> ExampleProblem:
    """``u_t + c u_x = 0`` on [-1, 1] with inflow data at ``x = -1``.

    ``gaussian`` (default ``c = 4``) moves a Gaussian bump; ``sine`` (default
    ``c = 2``) is ``sin(x - c t)``.
    """
    if variant == "gaussian":
        c = 4.0 if c is None else c
        G, dG, d2G = _gauss(sigma, mu)
        h = (CallableSignal(lambda t: G(-1 - c * t), lambda t: -c * dG(-1 - c * t), "G(-1-ct)"),)
        ic = (G,)
        fic = (dG,)

        def exact(x, t):
            return G(np.asarray(x) - c * t)[None]

        def exact_dx(x, t):
            return dG(np.asarray(x) - c * t)[None]

        solver = {"integrator": "gauss", "ng": 100, "nint": 1}
    elif variant == "sine":
        c = 2.0 if c is None else c
        # sin(-1 - c t) = -sin(1) cos(c t) - cos(1) sin(c t)
        h = (TimeSignal((
            SignalTerm(-math.sin(1.0), 0, 0.0, c, "cos"),
            SignalTerm(-math.cos(1.0), 0, 0.0, c, "sin"),
        )),)
        ic = (np.sin,)
        fic = (np.cos,)

        def exact(x, t):
            return np.sin(np.asarray(x) - c * t)[None]

        def exact_dx(x, t):
            return np.cos(np.asarray(x) - c * t)[None]

        solver = {"integrator": "gauss", "ng": 100, "nint": 100}
    else:
        raise InputError(f"unknown transport variant {variant!r}")
    model = PdeModel(
        0, 1, 0, A1=[[-c]], B=[[1, 0]], h=h, primary_ic=ic, fundamental_ic=fic, name=f"transport-{variant}"
    )
    return ExampleProblem(
        "transport", model, exact, {"variant": variant, "c": c, "sigma": sigma, "mu": mu},
        solver=solver, exact_dx=exact_dx,
    )


WAVE_VARIANTS = ("split", "right", "sine", "characteristic")


def wave(variant: str = "split", c: float = 4.0, sigma: float = 0.2, mu: float = 0.0) -> ExampleProblem:
    """``u_tt = c^2 u_xx`` in states ``v = (u_t, u_x)`` on [-1, 1].

    ``split`` and ``right`` use a Gaussian with ``u_t(x, 0) = 0`` or the
    right-moving initial velocity, with Dirichlet data on ``v1`` at the left
    and on ``v2`` at the right.  ``sine`` is ``sin(x - c t)`` under the same
    boundary types; ``characteristic`` replaces the right condition by the
    outflow relation ``v1 + c v2 = 0``.
    """
    if variant not in WAVE_VARIANTS:
        raise InputError(f"unknown wave variant {variant!r}; choose from {WAVE_VARIANTS}")
    B_dn = [[1, 0, 0, 0], [0, 0, 0, 1]]
    if variant in ("split", "right"):
        G, dG, d2G = _gauss(sigma, mu)
        if variant == "split":
            def u(x, t):
                return 0.5 * (G(x - c * t) + G(x + c * t))

            def ut(x, t):
                return 0.5 * c * (-dG(x - c * t) + dG(x + c * t))

            def ux(x, t):
                return 0.5 * (dG(x - c * t) + dG(x + c * t))

            def utt(x, t):
                return 0.5 * c * c * (d2G(x - c * t) + d2G(x + c * t))

            def uxt(x, t):
                return 0.5 * c * (-d2G(x - c * t) + d2G(x + c * t))

            def uxx(x, t):
                return 0.5 * (d2G(x - c * t) + d2G(x + c * t))
        else:
            def u(x, t):
                return G(x - c * t)

            def ut(x, t):
                return -c * dG(x - c * t)

            def ux(x, t):
                return dG(x - c * t)

            def utt(x, t):
                return c * c * d2G(x - c * t)

            def uxt(x, t):
                return -c * d2G(x - c * t)

            def uxx(x, t):
                return d2G(x - c * t)

        h = (
            CallableSignal(lambda t: ut(-1.0, t), lambda t: utt(-1.0, t), "u_t(-1)"),
            CallableSignal(lambda t: ux(1.0, t), lambda t: uxt(1.0, t), "u_x(1)"),
        )
        B = B_dn
        solver = {"integrator": "gauss", "ng": 100, "nint": 1}
    else:
        def u(x, t):
            return np.sin(np.asarray(x) - c * t)

        def ut(x, t):
            return -c * np.cos(np.asarray(x) - c * t)

        def ux(x, t):
            return np.cos(np.asarray(x) - c * t)

        def uxt(x, t):
            return c * np.sin(np.asarray(x) - c * t)

        def uxx(x, t):
            return -np.sin(np.asarray(x) - c * t)

        # -c cos(-1 - c t) = -c cos(1) cos(c t) + c sin(1) sin(c t)
        h1 = TimeSignal((
            SignalTerm(-c * math.cos(1.0), 0, 0.0, c, "cos"),
            SignalTerm(c * math.sin(1.0), 0, 0.0, c, "sin"),
        ))
        if variant == "sine":
            # cos(1 - c t) = cos(1) cos(c t) + sin(1) sin(c t)
            h2 = TimeSignal((
                SignalTerm(math.cos(1.0), 0, 0.0, c, "cos"),
                SignalTerm(math.sin(1.0), 0, 0.0, c, "sin"),
            ))
            B = B_dn
        else:
            h2 = TimeSignal()
            B = [[1, 0, 0, 0], [0, 0, 1, c]]
        h = (h1, h2)
        solver = {"integrator": "gauss", "ng": 100, "nint": 100}

    model = PdeModel(
        0, 2, 0,
        A1=[[0.0, c * c], [1.0, 0.0]],
        B=B,
        h=h,
        primary_ic=(lambda x: ut(x, 0.0), lambda x: ux(x, 0.0)),
        name=f"wave-{variant}",
    )

    def exact(x, t):
        x = np.asarray(x)
        return np.array([ut(x, t), ux(x, t)])

    def exact_dx(x, t):
        x = np.asarray(x)
        return np.array([uxt(x, t), uxx(x, t)])

    return ExampleProblem(
        "wave", model, exact, {"variant": variant, "c": c, "sigma": sigma, "mu": mu},
        exact_u=lambda x, t: u(np.asarray(x), t),
        recovery=Recovery(1, 1, lambda t: (float(u(-1.0, t)),)),
        solver=solver,
        exact_dx=exact_dx,
    )


_BUILDERS = {
    "heat_dn": heat_dn,
    "heat_varvisc": heat_varvisc,
    "parabolic_forced": parabolic_forced,
    "euler_bernoulli": euler_bernoulli,
    "transport": transport,
    "wave": wave,
}


def build_example(example_id: str, **params) -> ExampleProblem:
    if example_id not in _BUILDERS:
        raise InputError(f"unknown example {example_id!r}; choose from {', '.join(EXAMPLE_IDS)}")
    try:
        return _BUILDERS[example_id](**params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {example_id}: {exc}") from None


def exact_solutions(example_id: str, params: dict | None = None) -> Callable:
    """``(x, t) -> u(x, t)`` for a built-in example (the original scalar variable)."""
    prob = build_example(example_id, **(params or {}))
    if prob.exact_u is not None:
        return prob.exact_u
    return lambda x, t: prob.exact(x, t)[0]
