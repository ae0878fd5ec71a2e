"""Brute-force ground truth at small ``n``."""

from .distance import exact_breakdown, exact_distance
from .jacobi import blocked_eigh, jacobi_eigh, trace_norms
from .montecarlo import bhc_empirical, make_rng, verify_projection_lemma
from .states import (
    CheckResult,
    EveStateIndex,
    build_A,
    build_A_and_check,
    eve_state,
    purification,
    rho_jx,
    sigma_ab,
    verify_purification,
    verify_sigma_average,
)
from .toeplitz import ToeplitzHash, all_seeds
