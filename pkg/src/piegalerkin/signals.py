"""Scalar time signals for boundary data and separable forcing.

:class:`TimeSignal` is a finite sum of ``coef * t**p * exp(rate*t) * {1, sin, cos}(freq*t)``
terms.  It is closed under differentiation and its convolution with
``exp(lambda*(t-s))`` has a closed form, which the exact integrators use.
:class:`CallableSignal` wraps arbitrary callables (for data such as
``sqrt(t+1)``) and is accepted only by the quadrature and BDF integrators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError

KINDS = ("one", "sin", "cos")


@dataclass(frozen=True)
class SignalTerm:
    coef: float
    power: int = 0
    rate: float = 0.0
    freq: float = 0.0
    kind: str = "one"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown signal term kind {self.kind!r}")
        if int(self.power) != self.power or self.power < 0:
            raise InputError("signal term power must be a non-negative integer")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        v = self.coef * t**self.power * np.exp(self.rate * t)
        if self.kind == "sin":
            v = v * np.sin(self.freq * t)
        elif self.kind == "cos":
            v = v * np.cos(self.freq * t)
        return v

    def derivative(self) -> list["SignalTerm"]:
        c, p, g, w, kind = self.coef, self.power, self.rate, self.freq, self.kind
        out = []
        if p > 0:
            out.append(SignalTerm(c * p, p - 1, g, w, kind))
        if g != 0.0:
            out.append(SignalTerm(c * g, p, g, w, kind))
        if kind == "sin" and w != 0.0:
            out.append(SignalTerm(c * w, p, g, w, "cos"))
        elif kind == "cos" and w != 0.0:
            out.append(SignalTerm(-c * w, p, g, w, "sin"))
        return out

    def exponentials(self) -> list[tuple[complex, int, complex]]:
        """Rewrite as ``sum coef_j * t**p * exp(mu_j t)`` with complex ``mu_j``."""
        c, p = self.coef, self.power
        mu = complex(self.rate, self.freq)
        if self.kind == "one" or self.freq == 0.0:
            if self.kind == "sin":
                return []
            return [(complex(c), p, complex(self.rate))]
        if self.kind == "cos":
            return [(c / 2, p, mu), (c / 2, p, mu.conjugate())]
        return [(c / 2j, p, mu), (-c / 2j, p, mu.conjugate())]


@dataclass(frozen=True)
class TimeSignal:
    terms: tuple[SignalTerm, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def constant(cls, value: float) -> "TimeSignal":
        return cls((SignalTerm(value),)) if value != 0.0 else cls()

    @classmethod
    def zero(cls) -> "TimeSignal":
        return cls()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term(t)
        return out if out.ndim else float(out)

    def derivative(self) -> "TimeSignal":
        return TimeSignal(tuple(d for term in self.terms for d in term.derivative()))

    def is_zero(self) -> bool:
        return all(term.coef == 0.0 for term in self.terms)

    def scaled(self, c: float) -> "TimeSignal":
        return TimeSignal(tuple(SignalTerm(c * t.coef, t.power, t.rate, t.freq, t.kind) for t in self.terms))

    def to_dict(self) -> list[dict]:
        return [
            {"coef": t.coef, "power": t.power, "rate": t.rate, "freq": t.freq, "kind": t.kind}
            for t in self.terms
        ]

    @classmethod
    def from_dict(cls, items) -> "TimeSignal":
        try:
            return cls(tuple(SignalTerm(**dict(item)) for item in (items or [])))
        except TypeError as exc:
            raise InputError(f"bad signal term: {exc}") from None


class CallableSignal:
    """Signal given by a Python callable; ``dfunc`` supplies the exact derivative."""

    def __init__(self, func: Callable, dfunc: Callable | None = None, name: str = ""):
        self.func = func
        self.dfunc = dfunc
        self.name = name

    def __call__(self, t):
        v = np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)
        return v if v.ndim else float(v)

    def derivative(self) -> "CallableSignal":
        if self.dfunc is None:
            raise InputError(f"signal {self.name or self.func!r} has no derivative")
        return CallableSignal(self.dfunc, None, name=f"d/dt {self.name}")

    def is_zero(self) -> bool:
        return False

    def scaled(self, c: float) -> "CallableSignal":
        f, df = self.func, self.dfunc
        return CallableSignal(
            lambda t: c * f(t), None if df is None else (lambda t: c * df(t)), name=f"{c}*{self.name}"
        )

    def __repr__(self):
        return f"CallableSignal({self.name or self.func!r})"


Signal = TimeSignal | CallableSignal


def _phi_series(z: complex, p: int) -> complex:
    """``int_0^1 u**p exp(z u) du`` by its power series (used for |z| <= 1)."""
    total = 0.0 + 0.0j
    term = 1.0 + 0.0j  # z**n / n!
    for n in range(60):
        inc = term / (n + p + 1)
        total += inc
        if abs(inc) < 1e-18 * abs(total):
            break
        term *= z / (n + 1)
    return total


def convolve_exponential(lam: complex, mu: complex, p: int, t: float) -> complex:
    """``int_0^t exp(lam (t - s)) s**p exp(mu s) ds`` in closed form.

    Near resonance (``|(mu - lam) t| <= 1``) a power series replaces the closed
    form so there is no cancellation; at exact resonance it reduces to
    ``t**(p+1) exp(lam t) / (p + 1)``.
    """
    if t == 0.0:
        return 0.0j
    z = (mu - lam) * t
    if abs(z) <= 1.0:
        return np.exp(lam * t) * t ** (p + 1) * _phi_series(z, p)
    # e^{lam t} t^{p+1} [e^z sum_j (-1)^j p!/(p-j)! z^{-(j+1)} - (-1)^p p! z^{-(p+1)}]
    s = sum((-1) ** j * math.perm(p, j) / z ** (j + 1) for j in range(p + 1))
    tail = (-1) ** p * math.factorial(p) / z ** (p + 1)
    return t ** (p + 1) * (np.exp(mu * t) * s - np.exp(lam * t) * tail)


def convolve_signal(lam: complex, signal: TimeSignal, t: float) -> complex:
    """``int_0^t exp(lam (t - s)) signal(s) ds`` for a :class:`TimeSignal`."""
    total = 0.0j
    for term in signal.terms:
        for c, p, mu in term.exponentials():
            total += c * convolve_exponential(lam, mu, p, t)
    return total
