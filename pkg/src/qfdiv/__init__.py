"""Quantum f-divergences from hockey-stick integrals.

The core object is ``E_gamma(rho||sigma)``; every f-divergence here is an
integral of ``f''`` against it. Submodules add Renyi variants, contraction
coefficients, reverse Pinsker and continuity inequalities and differential
privacy checks.
"""

from .fdiv import (
    DivergenceValue,
    chi2_closed,
    classical_f_div,
    d_f_degroot,
    d_f_generalized,
    d_f_integral,
    d_f_single_integral,
    umegaki,
)
from .functions import ConvexFunction, parse_function
from .hockey import d_max, e_gamma, fidelity, trace_distance
from .renyi import d_alpha, h_alpha
from .states import QuantumChannel, random_channel, random_density, validate_density

__version__ = "0.1.0"

__all__ = [
    "ConvexFunction",
    "DivergenceValue",
    "QuantumChannel",
    "chi2_closed",
    "classical_f_div",
    "d_alpha",
    "d_f_degroot",
    "d_f_generalized",
    "d_f_integral",
    "d_f_single_integral",
    "d_max",
    "e_gamma",
    "fidelity",
    "h_alpha",
    "parse_function",
    "random_channel",
    "random_density",
    "trace_distance",
    "umegaki",
    "validate_density",
]
