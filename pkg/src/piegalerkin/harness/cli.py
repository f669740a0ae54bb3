"""Command line front end.

Examples::

    piegalerkin --example heat_dn --N 16
    piegalerkin --example euler_bernoulli --param mode=4 --sweep 8,12,16 --out results --plot-script
    piegalerkin --config model.yaml --integrator bdf4 --dt 1e-3

Exit status is 0 on success and the error category's code otherwise
(2 input, 3 config, 4 conversion, 5 integration).
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

import yaml

from ..errors import InputError, PieError
from ..time_integration import METHODS, IntegratorConfig
from .config import load_config
from .examples import EXAMPLE_IDS, build_example
from .run import Problem, run, sweep, write_plot_script

DEFAULT_N = 16


def _param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), yaml.safe_load(value)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="piegalerkin",
        description="Chebyshev-Galerkin solution of linear PDEs through their PIE form.",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--example", choices=EXAMPLE_IDS, help="built-in example")
    src.add_argument("--config", metavar="FILE", help="YAML model file")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                   help="example parameter, e.g. mode=4 or variant=sine (repeatable)")
    p.add_argument("--N", type=int, help=f"truncation order (default {DEFAULT_N})")
    p.add_argument("--sweep", type=_int_list, metavar="N1,N2,...", help="run a convergence sweep over N")
    p.add_argument("--integrator", choices=METHODS)
    p.add_argument("--dt", type=float, help="BDF time step")
    p.add_argument("--tfinal", type=float, help="final time")
    p.add_argument("--ng", type=int, help="Gauss-Lobatto points per interval")
    p.add_argument("--nint", type=int, help="number of Gauss intervals")
    p.add_argument("--ratio", type=float, help="geometric ratio of the Gauss intervals")
    p.add_argument("--ic-mode", choices=("galerkin", "interpolate"), default="galerkin",
                   help="how the initial coefficients are formed")
    p.add_argument("--out", metavar="DIR", help="directory for CSV output")
    p.add_argument("--plot-script", action="store_true", help="write plot_results.py next to the CSVs")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _setup(args) -> tuple[Problem, dict, float]:
    """Problem, solver defaults and default final time for the chosen source."""
    if args.example:
        ex = build_example(args.example, **dict(args.param))
        return Problem.from_example(ex), dict(ex.solver), ex.t_final
    if args.param:
        raise InputError("--param applies to built-in examples only")
    cfg = load_config(args.config)
    solver = cfg.solver
    return cfg.to_problem(), solver, float(solver.get("tfinal", 0.1))


def _integrator_config(args, solver: dict, t_final: float) -> IntegratorConfig:
    def pick(name, default):
        v = getattr(args, name)
        return v if v is not None else solver.get(name, default)

    t_final = args.tfinal if args.tfinal is not None else t_final
    times = solver.get("output_times") if args.tfinal is None else None
    return IntegratorConfig(
        method=pick("integrator", "exact"),
        output_times=tuple(times) if times else (float(t_final),),
        dt=float(pick("dt", 1e-3)),
        ng=int(pick("ng", 10)),
        nint=int(pick("nint", 10)),
        ratio=float(pick("ratio", 0.25)),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    warnings.simplefilter("default")
    try:
        problem, solver, t_final = _setup(args)
        cfg = _integrator_config(args, solver, t_final)
        if args.sweep:
            res = sweep(problem, args.sweep, cfg, args.out, args.ic_mode)
            print(f"{'N':>5} {'error':>12} {'time[s]':>9}")
            for r in res.reports:
                err = "n/a" if r.error is None else f"{r.error:.3e}"
                print(f"{r.N:>5} {err:>12} {r.elapsed:>9.3f}")
            if res.rate is not None:
                print(f"decay rate {res.rate:.3f} per unit N over N={res.fit_range[0]}..{res.fit_range[1]}")
        else:
            N = args.N if args.N is not None else int(solver.get("N", DEFAULT_N))
            r = run(problem, N, cfg, args.out, args.ic_mode)
            for t, e in zip(r.times, r.error_history if r.error_history is not None else [None] * len(r.times)):
                err = "n/a" if e is None else f"{e:.3e}"
                print(f"N={N} {cfg.method} t={t:g} error={err}")
            print(f"elapsed {r.elapsed:.3f}s")
        if args.plot_script:
            if not args.out:
                raise InputError("--plot-script needs --out")
            write_plot_script(args.out)
    except PieError as exc:
        print(f"piegalerkin: {exc.category} error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
