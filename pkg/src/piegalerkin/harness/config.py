"""Declarative model files (YAML).

A model file has the sections ``domain``, ``states``, ``coefficients``,
``boundary``, ``forcing``, ``ic``, ``exact`` and ``solver``.  Coefficient
entries are polynomials in ``x`` given either in the monomial or the
Chebyshev basis.  Profiles, initial data and exact solutions are numpy
expressions in ``x`` (and ``t``).  A boundary or forcing signal is a list of
exponential-polynomial terms ``{coef, power, rate, freq, kind}`` or a mapping
``{expr, dexpr}`` of expressions in ``t``.

Example::

    name: heat
    domain: [-1, 1]
    states: {n0: 0, n1: 0, n2: 1}
    coefficients:
      basis: monomial
      A2: [[[0.5]]]
    boundary:
      B: [[1, 0, 0, 0], [0, 0, 0, 1]]
      h: [[], [{coef: 0.0}]]
    ic:
      primary: ["sin(pi * x)"]
    solver: {integrator: exact, N: 16, tfinal: 0.1}
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml
from numpy.polynomial import chebyshev as npcheb

from ..errors import ConfigError, PieError
from ..pie_conversion import ForcingTerm, PdeModel
from ..signals import CallableSignal, TimeSignal
from ..time_integration import METHODS
from .run import Problem

SECTIONS = ("name", "domain", "states", "coefficients", "boundary", "forcing", "ic", "exact", "solver")
BASES = ("monomial", "chebyshev")
SOLVER_KEYS = ("integrator", "N", "sweep", "tfinal", "dt", "ng", "nint", "ratio", "output_times")

_NAMESPACE = {
    name: getattr(np, name)
    for name in (
        "sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh",
        "arcsin", "arccos", "arctan", "abs", "sign", "pi", "e", "where", "minimum", "maximum",
    )
}
_NAMESPACE["np"] = np


def compile_expression(expr, variables: tuple[str, ...]) -> callable:
    """Turn a numpy expression string into a vectorized function of ``variables``."""
    if isinstance(expr, (int, float)):
        expr = repr(float(expr))
    if not isinstance(expr, str) or not expr.strip():
        raise ConfigError(f"expected an expression string, got {expr!r}")
    if "__" in expr or "import" in expr or "lambda" in expr:
        raise ConfigError(f"expression {expr!r} uses a forbidden construct")
    try:
        code = compile(expr, "<config>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {expr!r}: {exc.msg}") from None
    # attribute names such as ``np.hypot`` also show up in co_names
    unknown = set(code.co_names) - set(_NAMESPACE) - set(variables) - set(dir(np))
    if unknown:
        raise ConfigError(f"expression {expr!r} uses unknown names {sorted(unknown)}")

    def f(*args):
        env = dict(_NAMESPACE)
        env.update(zip(variables, (np.asarray(a, dtype=float) for a in args)))
        try:
            val = eval(code, {"__builtins__": {}}, env)
        except Exception as exc:  # noqa: BLE001 - report any evaluation failure as a config error
            raise ConfigError(f"cannot evaluate {expr!r}: {exc}") from None
        shape = np.broadcast_shapes(*(np.shape(a) for a in args)) if args else ()
        return np.broadcast_to(np.asarray(val, dtype=float), shape) + 0.0

    f.expr = expr
    return f


def _float_list(v, what: str) -> list:
    try:
        return np.asarray(v, dtype=float).tolist()
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be numeric, got {v!r}") from None


def _normalize_signal(spec, what: str):
    if spec is None:
        return []
    if isinstance(spec, dict):
        if "expr" not in spec:
            raise ConfigError(f"{what}: expression signal needs an 'expr' key")
        out = {"expr": str(spec["expr"])}
        if spec.get("dexpr") is not None:
            out["dexpr"] = str(spec["dexpr"])
        return out
    if isinstance(spec, list):
        terms = []
        for item in spec:
            if not isinstance(item, dict):
                raise ConfigError(f"{what}: signal terms must be mappings")
            try:
                TimeSignal.from_dict([item])
            except PieError as exc:
                raise ConfigError(f"{what}: {exc}") from None
            term = {"coef": float(item.get("coef", 0.0))}
            for key, default, cast in (("power", 0, int), ("rate", 0.0, float), ("freq", 0.0, float), ("kind", "one", str)):
                term[key] = cast(item.get(key, default))
            terms.append(term)
        return terms
    raise ConfigError(f"{what}: signal must be a list of terms or an expression mapping")


def _build_signal(spec):
    if isinstance(spec, dict):
        f = compile_expression(spec["expr"], ("t",))
        df = compile_expression(spec["dexpr"], ("t",)) if "dexpr" in spec else None
        return CallableSignal(f, df, spec["expr"])
    return TimeSignal.from_dict(spec)


def _normalize(data) -> dict:
    if not isinstance(data, dict):
        raise ConfigError("model file must be a mapping")
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}; allowed: {', '.join(SECTIONS)}")
    out: dict = {"name": str(data.get("name", "model"))}

    dom = data.get("domain", [-1.0, 1.0])
    if not isinstance(dom, (list, tuple)) or len(dom) != 2:
        raise ConfigError("domain must be a pair [a, b]")
    out["domain"] = _float_list(dom, "domain")
    if not out["domain"][1] > out["domain"][0]:
        raise ConfigError("domain must satisfy a < b")

    st = data.get("states")
    if not isinstance(st, dict):
        raise ConfigError("states section must give n0, n1, n2")
    try:
        ns_ = {k: int(st.get(k, 0)) for k in ("n0", "n1", "n2")}
    except (TypeError, ValueError):
        raise ConfigError("state counts must be integers") from None
    if set(st) - {"n0", "n1", "n2"}:
        raise ConfigError(f"unknown state keys {sorted(set(st) - {'n0', 'n1', 'n2'})}")
    out["states"] = ns_
    ns = sum(ns_.values())
    nb = ns_["n1"] + 2 * ns_["n2"]
    if ns == 0 or min(ns_.values()) < 0:
        raise ConfigError("state counts must be non-negative and not all zero")

    co = dict(data.get("coefficients") or {})
    basis = co.pop("basis", "monomial")
    if basis not in BASES:
        raise ConfigError(f"coefficient basis must be one of {BASES}")
    coeffs = {"basis": basis}
    widths = {"A0": ns, "A1": ns_["n1"] + ns_["n2"], "A2": ns_["n2"]}
    for key, v in co.items():
        if key not in widths:
            raise ConfigError(f"unknown coefficient {key!r}")
        arr = np.asarray(_float_list(v, key))
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[:2] != (ns, widths[key]):
            raise ConfigError(f"{key} must have shape ({ns}, {widths[key]}[, degree+1]), got {arr.shape}")
        coeffs[key] = arr.tolist()
    out["coefficients"] = coeffs

    bd = data.get("boundary") or {}
    if nb:
        if "B" not in bd:
            raise ConfigError("boundary section needs a B matrix")
        B = np.atleast_2d(np.asarray(_float_list(bd["B"], "B")))
        if B.shape != (nb, 2 * nb):
            raise ConfigError(f"B must have shape ({nb}, {2 * nb}), got {B.shape}")
        h = bd.get("h") or [[] for _ in range(nb)]
        if len(h) != nb:
            raise ConfigError(f"boundary h needs {nb} components, got {len(h)}")
        out["boundary"] = {"B": B.tolist(), "h": [_normalize_signal(s, f"h[{i}]") for i, s in enumerate(h)]}
    else:
        out["boundary"] = {"B": [], "h": []}

    forcing = []
    for i, item in enumerate(data.get("forcing") or []):
        if not isinstance(item, dict) or "profile" not in item:
            raise ConfigError(f"forcing[{i}] needs a profile")
        prof = item["profile"]
        prof = [prof] if isinstance(prof, (str, int, float)) else list(prof)
        if len(prof) != ns:
            raise ConfigError(f"forcing[{i}] profile needs {ns} expressions")
        forcing.append({"profile": [str(p) for p in prof], "signal": _normalize_signal(item.get("signal"), f"forcing[{i}]")})
    out["forcing"] = forcing

    ic = data.get("ic") or {}
    if set(ic) - {"primary", "fundamental"}:
        raise ConfigError("ic section accepts 'primary' and 'fundamental'")
    ic_out = {}
    for key in ("primary", "fundamental"):
        if ic.get(key) is not None:
            v = [ic[key]] if isinstance(ic[key], (str, int, float)) else list(ic[key])
            if len(v) != ns:
                raise ConfigError(f"ic.{key} needs {ns} expressions")
            ic_out[key] = [str(e) for e in v]
    if not ic_out:
        raise ConfigError("ic section needs primary or fundamental initial data")
    out["ic"] = ic_out

    ex = data.get("exact")
    if ex is not None:
        ex = [ex] if isinstance(ex, (str, int, float)) else list(ex)
        if len(ex) != ns:
            raise ConfigError(f"exact needs {ns} expressions")
        out["exact"] = [str(e) for e in ex]

    so = dict(data.get("solver") or {})
    if set(so) - set(SOLVER_KEYS):
        raise ConfigError(f"unknown solver keys {sorted(set(so) - set(SOLVER_KEYS))}")
    if "integrator" in so and so["integrator"] not in METHODS:
        raise ConfigError(f"integrator must be one of {METHODS}")
    out["solver"] = so

    # compile every expression now so errors surface at load time
    ModelConfig(out).to_problem()
    return out


@dataclass
class ModelConfig:
    """Normalized contents of a model file."""

    data: dict

    @property
    def name(self) -> str:
        return self.data["name"]

    @property
    def solver(self) -> dict:
        return dict(self.data.get("solver") or {})

    def _coeff(self, key: str):
        co = self.data["coefficients"]
        if key not in co:
            return None
        arr = np.asarray(co[key], dtype=float)
        if co["basis"] == "chebyshev":
            arr = np.apply_along_axis(npcheb.cheb2poly, -1, arr)
        return arr

    def to_model(self) -> PdeModel:
        d = self.data

        def stack(exprs):
            return [compile_expression(e, ("x",)) for e in exprs]

        forcing = []
        for item in d["forcing"]:
            fs = stack(item["profile"])
            forcing.append(ForcingTerm(lambda x, fs=fs: np.array([f(x) for f in fs]), _build_signal(item["signal"])))
        ic = d["ic"]
        try:
            return PdeModel(
                d["states"]["n0"], d["states"]["n1"], d["states"]["n2"],
                A0=self._coeff("A0"), A1=self._coeff("A1"), A2=self._coeff("A2"),
                B=d["boundary"]["B"] if d["boundary"]["B"] else None,
                h=tuple(_build_signal(s) for s in d["boundary"]["h"]),
                forcing=tuple(forcing),
                primary_ic=tuple(stack(ic["primary"])) if "primary" in ic else None,
                fundamental_ic=tuple(stack(ic["fundamental"])) if "fundamental" in ic else None,
                domain=tuple(d["domain"]),
                name=d["name"],
            )
        except ConfigError:
            raise
        except PieError as exc:
            raise ConfigError(str(exc)) from None

    def to_problem(self) -> Problem:
        model = self.to_model()
        exact = None
        if "exact" in self.data:
            fs = [compile_expression(e, ("x", "t")) for e in self.data["exact"]]

            def exact(x, t):
                return np.array([f(np.asarray(x, dtype=float), t) for f in fs])

        return Problem(model, exact, name=self.name)


def loads_config(text: str) -> ModelConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse model file: {exc}") from None
    return ModelConfig(_normalize(data))


def load_config(path: str | Path) -> ModelConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return loads_config(text)


def dump_config(cfg: ModelConfig, path: str | Path | None = None) -> str:
    """Serialize ``cfg``; ``loads_config(dump_config(cfg))`` reproduces it."""
    text = yaml.safe_dump(copy.deepcopy(cfg.data), sort_keys=False, default_flow_style=None)
    if path is not None:
        Path(path).write_text(text)
    return text
