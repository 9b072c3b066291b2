"""Desk-scale experiments on prime power moments of the divisor-problem error term."""

__version__ = "0.1.0"

from .delta import delta_at, divisor_summatory, zeta
from .errors import BudgetError, CheckFailed, CheckpointMismatch, ConsistencyError
from .radicals import RadicalSum, SignPattern, is_zero, min_nonzero_alpha, radical_from, value_of
from .series import B_k, b_k, s_kl, theta
from .sieve import SieveSegment, build_segment
from .widereal import WideReal

__all__ = [
    "B_k", "BudgetError", "CheckFailed", "CheckpointMismatch", "ConsistencyError",
    "RadicalSum", "SieveSegment", "SignPattern", "WideReal", "b_k", "build_segment",
    "delta_at", "divisor_summatory", "is_zero", "min_nonzero_alpha", "radical_from",
    "s_kl", "theta", "value_of", "zeta",
]
