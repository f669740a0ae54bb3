"""Chebyshev-Galerkin solution of linear 1-D PDEs through their partial-integral (PIE) form."""

from .errors import ConfigError, ConversionError, InputError, IntegrationError, PieError
from .galerkin import GalerkinSystem, assemble, assemble_b, initial_coefficients, recover_primary_coeffs
from .pi_operator import PiOperator, pi_add, pi_apply, pi_compose_multiplier, pi_scale
from .pie_conversion import (
    ForcingTerm,
    PdeModel,
    PieSystem,
    build_structural,
    check_bt,
    convert,
    fundamental_ic,
    map_to_computational,
    reconstruct_from_derivatives,
    reconstruct_primary,
)
from .signals import CallableSignal, SignalTerm, TimeSignal
from .time_integration import IntegratorConfig, TrajectorySolution, integrate

__version__ = "0.1.0"
