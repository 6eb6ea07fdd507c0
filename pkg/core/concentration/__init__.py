from .analytic import lemma_check, lemma_sweep, phi, psi, quadratic_majorant_check
from .bounds import (
    BoundParams,
    bounded_upper_tail_bound,
    lower_tail_bound,
    unit_lower_tail_bound,
    upper_tail_bound,
    variance_bound,
)
from .condition import ConditionRecord, condition_check
from .tails import TailReport, empirical_tails

__all__ = [
    "psi",
    "phi",
    "lemma_check",
    "quadratic_majorant_check",
    "lemma_sweep",
    "BoundParams",
    "upper_tail_bound",
    "lower_tail_bound",
    "bounded_upper_tail_bound",
    "unit_lower_tail_bound",
    "variance_bound",
    "ConditionRecord",
    "condition_check",
    "TailReport",
    "empirical_tails",
]
