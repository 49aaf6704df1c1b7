"""Generalized Riemann stencils, good-set elimination certificates and Peano derivative estimates."""

from .elimination import derive_geometric, replay_derivation, verify_derivation
from .exact_linalg import solve_vandermonde, vandermonde_residual
from .functions import builtin_functions, parse_function
from .numeric_lab import estimate_limit, evaluate_quotient, peano_profile
from .stencils import Stencil, dilate, eliminate, forward_riemann, mz_difference, shift, shift_family, symmetric_riemann

__version__ = "0.1.0"
