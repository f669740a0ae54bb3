"""Time integrators for ``M da/dt = A a + sum_l alpha_l b_l(t)``.

* ``exact``: diagonalize ``M^{-1} A`` and integrate the forcing in closed form.
* ``exact-alt``: diagonalize ``M`` first, then the inner matrix
  ``Lambda^{-1} S^{-1} A S``, which is already diagonal for
  constant-coefficient diffusion.
* ``gauss``: variation of constants with composite Gauss-Lobatto quadrature
  on geometrically graded intervals (clustered toward the final time when
  ``ratio < 1``).
* ``bdf3`` / ``bdf4``: fixed-step backward differentiation.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.special import eval_legendre, roots_jacobi

from .errors import InputError, IntegrationError
from .galerkin import GalerkinSystem, assemble_b, recover_primary_coeffs
from .signals import TimeSignal, convolve_signal

METHODS = ("exact", "exact-alt", "gauss", "bdf3", "bdf4")
DIAG_TOL = 1e-8
_EXPM_BATCH = 256

BDF_COEFFS = {
    1: (1.0, -1.0),
    2: (1.5, -2.0, 0.5),
    3: (11 / 6, -3.0, 1.5, -1 / 3),
    4: (25 / 12, -4.0, 3.0, -4 / 3, 0.25),
}


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "exact"
    output_times: tuple = (0.1,)
    dt: float = 1e-3
    ng: int = 10
    nint: int = 10
    ratio: float = 0.25

    def __post_init__(self):
        method = self.method.replace("_", "-").lower()
        if method not in METHODS:
            raise InputError(f"unknown integrator {self.method!r}; choose from {', '.join(METHODS)}")
        object.__setattr__(self, "method", method)
        times = tuple(float(t) for t in np.atleast_1d(self.output_times))
        if not times or any(t < 0 or not np.isfinite(t) for t in times):
            raise InputError("output times must be finite and non-negative")
        object.__setattr__(self, "output_times", times)
        if method.startswith("bdf") and not self.dt > 0:
            raise InputError("BDF time step must be positive")
        if method == "gauss":
            if self.ng < 2 or self.nint < 1 or not self.ratio > 0:
                raise InputError("Gauss integration needs ng >= 2, nint >= 1 and ratio > 0")

    @property
    def bdf_order(self) -> int | None:
        return int(self.method[3]) if self.method.startswith("bdf") else None


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    S: np.ndarray
    S_inv: np.ndarray
    residual: float

    @property
    def diagonalizable(self) -> bool:
        return self.residual <= DIAG_TOL


def decompose(X: np.ndarray) -> SpectralDecomposition:
    """Eigendecomposition with the relative reconstruction residual."""
    lam, S = np.linalg.eig(X)
    try:
        S_inv = np.linalg.inv(S)
    except np.linalg.LinAlgError:
        return SpectralDecomposition(lam, S, np.full_like(S, np.nan), np.inf)
    scale = max(np.linalg.norm(X), np.finfo(float).tiny)
    res = np.linalg.norm((S * lam) @ S_inv - X) / scale
    if not np.isfinite(res):
        res = np.inf
    return SpectralDecomposition(lam, S, S_inv, float(res))


@dataclass
class TrajectorySolution:
    times: np.ndarray
    coeffs: np.ndarray  # (n_times, Nd)
    primary: np.ndarray  # (n_times, ns (N+1))
    method: str
    elapsed: float = 0.0
    info: dict = field(default_factory=dict)


def _solve_M(gs: GalerkinSystem) -> tuple[np.ndarray, list[np.ndarray]]:
    """``M^{-1} A`` and ``M^{-1} alpha_l``; fails on a singular ``M``."""
    try:
        with warnings.catch_warnings():
            # singularity is diagnosed below with a clearer message
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(gs.M, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise IntegrationError(f"mass matrix factorization failed: {exc}") from None
    if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * np.max(np.abs(gs.M)):
        raise IntegrationError("mass matrix M is singular; the semi-discrete system is not an ODE")
    At = sla.lu_solve(lu, gs.A)
    betas = [sla.lu_solve(lu, al) for al in gs.alphas]
    return At, betas


def _require_closed_form(gs: GalerkinSystem, method: str):
    if not all(isinstance(s, TimeSignal) for s in gs.signals):
        raise IntegrationError(
            f"the {method} integrator needs closed-form signals; use gauss or bdf for callable inputs"
        )


def _finish(gs, cfg, coeffs, t0, info=None) -> TrajectorySolution:
    times = np.array(cfg.output_times)
    coeffs = np.asarray(coeffs, dtype=float).reshape(len(times), gs.Nd)
    H = np.array([gs.h_values(t) for t in times]).reshape(len(times), -1)
    primary = recover_primary_coeffs(gs, coeffs, H)
    return TrajectorySolution(times, coeffs, primary, cfg.method, time.perf_counter() - t0, info or {})


def _modal_forcing(lam: np.ndarray, signals, betas_modal, t: float) -> np.ndarray:
    """``sum_l I_l(t) * beta_l`` with ``I_l[k] = int_0^t exp(lam_k (t-s)) b_l(s) ds``."""
    out = np.zeros(len(lam), dtype=complex)
    for sig, beta in zip(signals, betas_modal):
        conv = np.array([convolve_signal(lk, sig, t) for lk in lam])
        out += conv * beta
    return out


def solve_exact_eig(gs: GalerkinSystem, a0, cfg: IntegratorConfig) -> TrajectorySolution:
    t0 = time.perf_counter()
    _require_closed_form(gs, "exact")
    a0 = np.asarray(a0, dtype=float)
    At, betas = _solve_M(gs)
    dec = decompose(At)
    if not dec.diagonalizable:
        raise IntegrationError(
            f"M^-1 A is not diagonalizable (residual {dec.residual:.2e}); use the gauss or bdf integrator"
        )
    c0 = dec.S_inv @ a0
    bm = [dec.S_inv @ b for b in betas]
    out = []
    for t in cfg.output_times:
        z = np.exp(dec.eigenvalues * t) * c0 + _modal_forcing(dec.eigenvalues, gs.signals, bm, t)
        out.append((dec.S @ z).real)
    return _finish(gs, cfg, out, t0, {"residual": dec.residual, "eigenvalues": dec.eigenvalues})


def solve_exact_alt(gs: GalerkinSystem, a0, cfg: IntegratorConfig) -> TrajectorySolution:
    t0 = time.perf_counter()
    _require_closed_form(gs, "exact-alt")
    a0 = np.asarray(a0, dtype=float)
    mdec = decompose(gs.M)
    if not mdec.diagonalizable:
        raise IntegrationError(f"M is not diagonalizable (residual {mdec.residual:.2e})")
    lam = mdec.eigenvalues
    if np.min(np.abs(lam)) <= 1e-14 * np.max(np.abs(lam)):
        raise IntegrationError("M has a zero eigenvalue")
    C = (mdec.S_inv @ gs.A @ mdec.S) / lam[:, None]
    off = C - np.diag(np.diag(C))
    if np.max(np.abs(off), initial=0.0) <= 1e-12 * max(np.max(np.abs(C)), 1e-300):
        omega, W, W_inv, res = np.diag(C).copy(), None, None, 0.0
    else:
        cdec = decompose(C)
        if not cdec.diagonalizable:
            raise IntegrationError(
                f"inner matrix is not diagonalizable (residual {cdec.residual:.2e}); use gauss or bdf"
            )
        omega, W, W_inv, res = cdec.eigenvalues, cdec.S, cdec.S_inv, cdec.residual
    scale = max(np.max(np.abs(omega)), 1.0)
    if np.any(omega.real > 1e-10 * scale):
        warnings.warn(
            "inner matrix has eigenvalues with positive real part "
            f"(max {omega.real.max():.3e}); the closed-form integral may be inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )

    z0 = mdec.S_inv @ a0
    if W_inv is not None:
        z0 = W_inv @ z0
    # forcing enters as Lambda^{-1} S^{-1} alpha
    bm = [mdec.S_inv @ al / lam for al in gs.alphas]
    if W_inv is not None:
        bm = [W_inv @ b for b in bm]
    out = []
    for t in cfg.output_times:
        z = np.exp(omega * t) * z0 + _modal_forcing(omega, gs.signals, bm, t)
        v = z if W is None else W @ z
        out.append((mdec.S @ v).real)
    return _finish(gs, cfg, out, t0, {"residual": max(mdec.residual, res), "eigenvalues": omega})


def lobatto_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n``-point Gauss-Lobatto nodes and weights on [-1, 1] (exact to degree 2n - 3)."""
    if n < 2:
        raise InputError("Gauss-Lobatto needs at least 2 nodes")
    interior = roots_jacobi(n - 2, 1.0, 1.0)[0] if n > 2 else np.zeros(0)
    x = np.concatenate([[-1.0], np.sort(interior), [1.0]])
    w = 2.0 / (n * (n - 1) * eval_legendre(n - 1, x) ** 2)
    return x, w


def graded_intervals(t_final: float, nint: int, ratio: float) -> np.ndarray:
    """Breakpoints of ``nint`` intervals with lengths in geometric ratio ``ratio``."""
    if t_final == 0.0:
        return np.zeros(nint + 1)
    lengths = ratio ** np.arange(nint)
    lengths = lengths / lengths.sum() * t_final
    # clip so rounding in the cumulative sum cannot overshoot t_final
    edges = np.minimum(np.concatenate([[0.0], np.cumsum(lengths)]), t_final)
    edges[-1] = t_final
    return edges


def solve_gauss(gs: GalerkinSystem, a0, cfg: IntegratorConfig) -> TrajectorySolution:
    t0 = time.perf_counter()
    a0 = np.asarray(a0, dtype=float)
    At, betas = _solve_M(gs)
    dec = decompose(At)
    xg, wg = lobatto_rule(cfg.ng)
    out = []
    if dec.diagonalizable:
        lam = dec.eigenvalues
        c0 = dec.S_inv @ a0
        bm = [dec.S_inv @ b for b in betas]
    for t in cfg.output_times:
        edges = graded_intervals(t, cfg.nint, cfg.ratio)
        nodes, weights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            nodes.append(0.5 * (hi - lo) * xg + 0.5 * (hi + lo))
            weights.append(0.5 * (hi - lo) * wg)
        s = np.concatenate(nodes) if nodes else np.zeros(0)
        w = np.concatenate(weights) if weights else np.zeros(0)
        sig_vals = [np.asarray(sig(s), dtype=float) * np.ones_like(s) for sig in gs.signals]
        if dec.diagonalizable:
            z = np.exp(lam * t) * c0
            if gs.signals and t > 0:
                kern = np.exp(np.outer(lam, t - s)) * w  # (Nd, nodes)
                for beta, vals in zip(bm, sig_vals):
                    z = z + beta * (kern @ vals)
            out.append((dec.S @ z).real)
        else:
            a = sla.expm(At * t) @ a0
            if gs.signals and t > 0:
                bvals = sum(np.outer(vals, beta) for beta, vals in zip(betas, sig_vals))  # (nodes, Nd)
                for lo in range(0, len(s), _EXPM_BATCH):
                    hi = lo + _EXPM_BATCH
                    props = sla.expm(At[None] * (t - s[lo:hi])[:, None, None])
                    a = a + np.einsum("j,jmn,jn->m", w[lo:hi], props, bvals[lo:hi])
            out.append(a)
    return _finish(gs, cfg, out, t0, {"diagonalizable": dec.diagonalizable})


class _Stepper:
    """One implicit BDF step of size ``h``.

    Since the BDF coefficients sum to zero the step is solved for the
    increment ``d = a_n - a_{n-1}``::

        (beta0 M - h A) d = h (A a_{n-1} + b_n) - M sum_{p>=2} beta_p (a_{n-p} - a_{n-1})

    which keeps rounding errors proportional to the (small) increments
    rather than to ``a`` itself.
    """

    def __init__(self, gs: GalerkinSystem, h: float, order: int):
        self.gs, self.h, self.coef = gs, h, BDF_COEFFS[order]
        mat = self.coef[0] * gs.M - h * gs.A
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                self.lu = sla.lu_factor(mat)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise IntegrationError(f"BDF step matrix factorization failed: {exc}") from None
        if np.min(np.abs(np.diag(self.lu[0]))) <= 1e-14 * np.max(np.abs(mat)):
            raise IntegrationError("BDF step matrix is singular")

    def step(self, history: list[np.ndarray], t_new: float) -> np.ndarray:
        """``history`` holds ``a_{n-1}, a_{n-2}, ...`` (most recent first)."""
        gs, h = self.gs, self.h
        last = history[0]
        rhs = h * (gs.A @ last)
        if gs.alphas:
            rhs += h * assemble_b(gs, t_new)
        if len(self.coef) > 2:
            back = sum(bp * (ap - last) for bp, ap in zip(self.coef[2:], history[1:]))
            rhs -= gs.M @ back
        return last + sla.lu_solve(self.lu, rhs)


def _bdf_startup(gs, a0, dt, k, floor, cache) -> list[np.ndarray]:
    """Values at ``dt, 2 dt, ..., (k-1) dt``.

    Runs BDFk on the halved step, itself started recursively, until the step
    drops below ``floor``; there a BDF1..BDF(k-1) ramp is accurate enough.
    Each level keeps the order of the outer scheme, so the startup error
    stays below the global ``O(dt**k)`` error.
    """
    def stepper(h, order):
        key = (h, order)
        if key not in cache:
            cache[key] = _Stepper(gs, h, order)
        return cache[key]

    if dt <= floor or k <= 1:
        hist = [a0]
        for n in range(1, k):
            a = stepper(dt, min(n, k - 1) if k > 1 else 1).step(hist, n * dt)
            hist.insert(0, a)
        return hist[::-1][1:]
    h = 0.5 * dt
    vals = [a0] + _bdf_startup(gs, a0, h, k, floor, cache)
    st = stepper(h, k)
    while len(vals) < 2 * (k - 1) + 1:
        n = len(vals)
        vals.append(st.step(vals[::-1][:k], n * h))
    return vals[2::2]


def solve_bdf(gs: GalerkinSystem, a0, cfg: IntegratorConfig) -> TrajectorySolution:
    t0 = time.perf_counter()
    k, dt = cfg.bdf_order, float(cfg.dt)
    a0 = np.asarray(a0, dtype=float)
    targets = {}
    for t in cfg.output_times:
        n = round(t / dt)
        if abs(n * dt - t) > 1e-9 * max(t, dt):
            raise InputError(f"output time {t} is not a multiple of dt={dt}")
        targets[t] = n
    n_final = max(targets.values())
    cache: dict = {}
    # the BDF1 step at the base of the startup recursion errs by ~floor**2; keep it far below dt**(k+1)
    floor = 1e-2 * math.sqrt(dt ** (k + 1))
    traj = [a0] + (_bdf_startup(gs, a0, dt, k, floor, cache) if n_final >= 1 else [])
    main = _Stepper(gs, dt, k)
    while len(traj) <= n_final:
        n = len(traj)
        traj.append(main.step(traj[::-1][:k], n * dt))
    out = [traj[targets[t]] for t in cfg.output_times]
    return _finish(gs, cfg, out, t0, {"steps": n_final})


def integrate(gs: GalerkinSystem, a0, cfg: IntegratorConfig) -> TrajectorySolution:
    """Dispatch on ``cfg.method``."""
    a0 = np.asarray(a0, dtype=float)
    if a0.shape != (gs.Nd,):
        raise InputError(f"initial coefficient vector must have length {gs.Nd}")
    return {
        "exact": solve_exact_eig,
        "exact-alt": solve_exact_alt,
        "gauss": solve_gauss,
        "bdf3": solve_bdf,
        "bdf4": solve_bdf,
    }[cfg.method](gs, a0, cfg)
