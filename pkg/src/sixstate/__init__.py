"""Finite-key bounds for 6-state QKD and key recycling, with small-n oracles."""

from .bell import Params, SmoothingSet, Tally, lambda_g, smoothing_set, tally_of
from .errors import BracketError, CapacityError, DomainError, SixStateError
from .qkd import (
    BoundReport,
    RatePoint,
    asymptotic_rate,
    bound_no_smoothing,
    dbar_smoothed_analytic,
    dbar_smoothed_exact,
    default_alpha,
    key_length,
    rate_finite,
    rate_no_smoothing,
    rate_point,
)
from .qkr import qkr_report

__version__ = "0.1.0"
