"""Run pipeline: convert, assemble, integrate, reconstruct, measure, write."""

from __future__ import annotations

import csv
import logging
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .. import chebyshev as cb
from ..errors import InputError
from ..galerkin import assemble, initial_coefficients, split_primary
from ..pie_conversion import PdeModel, convert, reconstruct_from_derivatives, warn_if_incompatible
from ..time_integration import IntegratorConfig, integrate
from .examples import ExampleProblem, Recovery

log = logging.getLogger(__name__)

GRID_POINTS = 512


def l2_error(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    """Unweighted L2 norm of ``u - v`` by the trapezoid rule."""
    return float(np.sqrt(np.trapezoid((np.asarray(u) - np.asarray(v)) ** 2, x)))


@dataclass
class Problem:
    """Anything the pipeline can run: a model plus optional exact data."""

    model: PdeModel
    exact: Callable | None = None
    exact_u: Callable | None = None
    recovery: Recovery | None = None
    name: str = ""

    @classmethod
    def from_example(cls, ex: ExampleProblem) -> "Problem":
        return cls(ex.model, ex.exact, ex.exact_u, ex.recovery, ex.id)


@dataclass
class RunReport:
    N: int
    integrator: str
    times: np.ndarray
    x: np.ndarray
    states: np.ndarray  # (n_times, ns, grid)
    errors: np.ndarray | None  # (n_times, ns)
    u: np.ndarray | None = None  # (n_times, grid) recovered variable
    u_errors: np.ndarray | None = None  # (n_times,)
    elapsed: float = 0.0
    coeffs: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    @property
    def error(self) -> float | None:
        """Headline error at the last output time: recovered ``u`` if any, else the state norm."""
        if self.u_errors is not None:
            return float(self.u_errors[-1])
        if self.errors is None:
            return None
        return float(np.sqrt(np.sum(self.errors[-1] ** 2)))

    @property
    def error_history(self) -> np.ndarray | None:
        if self.u_errors is not None:
            return self.u_errors
        if self.errors is None:
            return None
        return np.sqrt(np.sum(self.errors**2, axis=1))


def run(
    problem: Problem | ExampleProblem,
    N: int,
    cfg: IntegratorConfig,
    out: str | Path | None = None,
    ic_mode: str = "galerkin",
    check_ic: bool = True,
) -> RunReport:
    if isinstance(problem, ExampleProblem):
        problem = Problem.from_example(problem)
    t0 = time.perf_counter()
    model = problem.model
    if check_ic:
        warn_if_incompatible(model)
    sys = convert(model)
    gs = assemble(sys, N)
    a0 = initial_coefficients(gs, ic_mode)
    sol = integrate(gs, a0, cfg)

    a, b = model.domain
    x = np.linspace(a, b, GRID_POINTS)
    xc = np.clip((2 * x - (a + b)) / (b - a), -1.0, 1.0)
    ns = model.ns
    states = np.zeros((len(sol.times), ns, GRID_POINTS))
    u = np.zeros((len(sol.times), GRID_POINTS)) if problem.recovery else None
    for j, (t, ah) in enumerate(zip(sol.times, sol.primary)):
        series = split_primary(gs, ah)
        for m, c in enumerate(series):
            states[j, m] = cb.cheb_eval(c, xc)
        if problem.recovery is not None:
            rec = problem.recovery
            us = reconstruct_from_derivatives(rec.order, series[rec.component], rec.boundary(t), a, b)
            u[j] = cb.cheb_eval(us, xc)

    errors = u_errors = None
    if problem.exact is not None:
        errors = np.array([
            [l2_error(x, states[j, m], np.asarray(problem.exact(x, t))[m]) for m in range(ns)]
            for j, t in enumerate(sol.times)
        ])
    if u is not None and problem.exact_u is not None:
        u_errors = np.array([l2_error(x, u[j], problem.exact_u(x, t)) for j, t in enumerate(sol.times)])
    report = RunReport(
        N=N,
        integrator=cfg.method,
        times=sol.times,
        x=x,
        states=states,
        errors=errors,
        u=u,
        u_errors=u_errors,
        elapsed=time.perf_counter() - t0,
        coeffs=sol.coeffs,
        info=dict(sol.info, condition=sys.condition),
    )
    log.info("N=%d %s error=%s (%.3fs)", N, cfg.method, report.error, report.elapsed)
    if out is not None:
        write_solution_csv(report, out, problem.name)
    return report


def write_solution_csv(report: RunReport, out: str | Path, name: str = "") -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    ns = report.states.shape[1]
    stem = f"{name}_" if name else ""
    for j, t in enumerate(report.times):
        path = out / f"{stem}solution_N{report.N}_t{t:g}.csv"
        header = ["x"] + [f"u_{m + 1}" for m in range(ns)]
        cols = [report.x] + [report.states[j, m] for m in range(ns)]
        if report.u is not None:
            header.append("u")
            cols.append(report.u[j])
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(np.column_stack(cols).tolist())
        paths.append(path)
    return paths


@dataclass
class SweepResult:
    reports: list
    rate: float | None
    fit_range: tuple | None

    @property
    def Ns(self) -> list[int]:
        return [r.N for r in self.reports]

    @property
    def errors(self) -> list[float]:
        return [r.error for r in self.reports]


def decay_rate(Ns: Sequence[int], errors: Sequence[float]) -> tuple[float | None, tuple | None]:
    """Fit ``log(error) ~ c - rate * N`` over the pre-plateau part of a sweep.

    The fit stops before the first refinement that fails to reduce the error
    by at least a factor of two.
    """
    Ns = np.asarray(Ns, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(Ns) < 2 or np.any(~np.isfinite(e)) or np.any(e <= 0):
        return None, None
    stop = 1
    while stop < len(e) and e[stop] < 0.5 * e[stop - 1]:
        stop += 1
    if stop < 2:
        return None, None
    slope = np.polyfit(Ns[:stop], np.log(e[:stop]), 1)[0]
    return float(-slope), (int(Ns[0]), int(Ns[stop - 1]))


def sweep(
    problem: Problem | ExampleProblem,
    Ns: Sequence[int],
    cfg: IntegratorConfig,
    out: str | Path | None = None,
    ic_mode: str = "galerkin",
) -> SweepResult:
    if isinstance(problem, ExampleProblem):
        problem = Problem.from_example(problem)
    Ns = [int(n) for n in Ns]
    if not Ns:
        raise InputError("sweep needs at least one N")
    if min(Ns) < 2:
        raise InputError("every N in a sweep must be at least 2")
    reports = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        warn_if_incompatible(problem.model)
    for n in Ns:
        reports.append(run(problem, n, cfg, out, ic_mode, check_ic=False))
    errs = [r.error for r in reports]
    rate, rng = decay_rate(Ns, errs) if all(e is not None for e in errs) else (None, None)
    if out is not None:
        write_convergence_csv(reports, out, problem.name)
    return SweepResult(reports, rate, rng)


def write_convergence_csv(reports: Sequence[RunReport], out: str | Path, name: str = "") -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / (f"{name}_convergence.csv" if name else "convergence.csv")
    first = reports[0]
    ns = first.states.shape[1]
    header = ["N", "error"]
    if first.errors is not None:
        header += [f"error_{m + 1}" for m in range(ns)]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in reports:
            row = [r.N, r.error]
            if r.errors is not None:
                row += list(r.errors[-1])
            w.writerow(row)
    return path


PLOT_SCRIPT = '''"""Plot CSV output of a run or sweep (needs matplotlib)."""
import csv
import glob
import os
import sys

import matplotlib.pyplot as plt

here = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))


def read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    head = rows[0]
    cols = list(zip(*[[float(v) for v in r] for r in rows[1:]]))
    return head, cols


for path in sorted(glob.glob(os.path.join(here, "*solution_*.csv"))):
    head, cols = read(path)
    fig, ax = plt.subplots()
    for name, col in zip(head[1:], cols[1:]):
        ax.plot(cols[0], col, label=name)
    ax.set_xlabel("x")
    ax.legend()
    ax.set_title(os.path.basename(path))
    fig.savefig(path[:-4] + ".png", dpi=120)
    plt.close(fig)

for path in sorted(glob.glob(os.path.join(here, "*convergence.csv"))):
    head, cols = read(path)
    fig, ax = plt.subplots()
    ax.semilogy(cols[0], cols[1], "o-")
    ax.set_xlabel("N")
    ax.set_ylabel("L2 error")
    fig.savefig(path[:-4] + ".png", dpi=120)
    plt.close(fig)
'''


def write_plot_script(out: str | Path) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "plot_results.py"
    path.write_text(PLOT_SCRIPT)
    return path
