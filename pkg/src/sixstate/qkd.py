"""Trace-distance bounds and key rates for 6-state QKD.

All bounds are returned as base-2 logarithms.  Three routes are offered for
``D-bar`` (the distance of the smoothed state from ideal): no smoothing at
all, an exact enumeration over the smoothing set, and the closed form that
replaces the restricted mean by its maximum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bell import (
    Params,
    SmoothingSet,
    eigen_factors,
    full_set,
    geometric_tables,
    log_sum_tallies,
    smoothing_set,
)
from .errors import DomainError
from .numerics import (
    LN2,
    NEG_INF,
    LogScalar,
    bell_weights,
    binary_entropy,
    find_root,
    from_linear,
    h4,
    log_sum,
    to_linear,
)

#: Coefficient of the postselection penalty, in bits per ``log2(n + 1)``.
POSTSELECTION_COEFF = 30


class Method(str, enum.Enum):
    NO_SMOOTHING = "NoSmoothing"
    SMOOTHED_EXACT = "SmoothedExact"
    SMOOTHED_ANALYTIC = "SmoothedAnalytic"


@dataclass(frozen=True)
class BoundReport:
    d_bar: LogScalar
    smoothing_loss: LogScalar
    method: Method

    @property
    def d_total(self) -> LogScalar:
        """``log2(2 * smoothing_loss + d_bar)``."""
        return log_sum([1.0 + self.smoothing_loss, self.d_bar])


@dataclass(frozen=True)
class RatePoint:
    gamma: float
    n: int
    epsilon: float
    ell: float
    rate: float
    method: str

    @property
    def negative(self) -> bool:
        return self.rate < 0


def default_alpha(epsilon: float) -> float:
    """Smoothing radius ``2 sqrt(ln(4/eps))`` that makes ``4 exp(-alpha^2/4) = eps``."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    return 2.0 * math.sqrt(math.log(4.0 / epsilon))


def _require_noise(gamma: float) -> None:
    if gamma == 0:
        raise DomainError(
            "the smoothed bound diverges at gamma = 0; use the no-smoothing "
            "bound (method 'nosmooth') instead"
        )
    bell_weights(gamma)


def log_advantage(gamma: float) -> float:
    """``log2((2/gamma)(1 - 3 gamma/2))``, the cost per unit of smoothing radius."""
    _require_noise(gamma)
    return math.log2(2.0 / gamma * (1.0 - 1.5 * gamma))


def log_bracket(gamma: float) -> float:
    """``log2`` of ``sqrt(a) + sqrt(b) + 2 sqrt(c)`` for the eigenvalue factors."""
    a, b, c = eigen_factors(gamma)
    return math.log2(math.sqrt(a) + math.sqrt(b) + 2.0 * math.sqrt(c))


def _prefactor(p: Params) -> float:
    # log2 of (1/2) sqrt(2**(ell - n))
    return -1.0 + 0.5 * (p.ell - p.n)


# -- D-bar -------------------------------------------------------------------


def bound_no_smoothing(params: Params) -> BoundReport:
    d_bar = _prefactor(params) + params.n * log_bracket(params.gamma)
    return BoundReport(d_bar, NEG_INF, Method.NO_SMOOTHING)


def tail_mass_exact(
    params: Params, alpha: float, *, sset: SmoothingSet | None = None, **kw
) -> float:
    """``1 - S`` where ``S`` is the multinomial mass kept by the smoothing set."""
    sset = smoothing_set(params, alpha) if sset is None else sset
    lw = [from_linear(w) for w in bell_weights(params.gamma)]
    kept = log_sum_tallies(sset, geometric_tables(params.n, lw), **kw)
    return max(0.0, 1.0 - to_linear(kept))


def smoothing_loss_exact(params: Params, alpha: float, **kw) -> LogScalar:
    """``log2 sqrt(1 - S)``, the projection-lemma bound on ``||rho - rho_bar||_tr``."""
    return 0.5 * from_linear(tail_mass_exact(params, alpha, **kw))


def smoothing_loss_analytic(alpha: float) -> LogScalar:
    """``log2(4 exp(-alpha**2 / 4))``."""
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative, got {alpha!r}")
    return 2.0 - alpha * alpha / (4.0 * LN2)


def dbar_tables(params: Params) -> np.ndarray:
    a, b, c = eigen_factors(params.gamma)
    lw = [0.5 * from_linear(x) for x in (a, b, c, c)]
    return geometric_tables(params.n, lw)


def dbar_smoothed_exact(
    params: Params, alpha: float, *, sset: SmoothingSet | None = None, **kw
) -> LogScalar:
    """Exact sum of ``sqrt(lambda)`` over the smoothing set, times the prefactor."""
    sset = smoothing_set(params, alpha) if sset is None else sset
    total = log_sum_tallies(sset, dbar_tables(params), **kw)
    return _prefactor(params) + total


def dbar_full_enumeration(params: Params, **kw) -> LogScalar:
    """:func:`dbar_smoothed_exact` over every tally (no smoothing at all)."""
    return dbar_smoothed_exact(params, 0.0, sset=full_set(params.n), **kw)


def dbar_smoothed_analytic(params: Params, alpha: float) -> LogScalar:
    _require_noise(params.gamma)
    n, g = params.n, params.gamma
    # terms reach ~n/2 and cancel; fsum keeps the result to a few ulp of log2(eps)
    return math.fsum(
        [
            -1.0,
            0.5 * params.ell,
            -0.5 * n,
            0.5 * n * h4(g),
            -0.5 * n * binary_entropy(g),
            0.25 * alpha * math.sqrt(n) * log_advantage(g),
        ]
    )


def report_smoothed_exact(params: Params, alpha: float, **kw) -> BoundReport:
    return BoundReport(
        dbar_smoothed_exact(params, alpha, **kw),
        smoothing_loss_exact(params, alpha, **kw),
        Method.SMOOTHED_EXACT,
    )


def report_smoothed_analytic(params: Params, alpha: float) -> BoundReport:
    return BoundReport(
        dbar_smoothed_analytic(params, alpha),
        smoothing_loss_analytic(alpha),
        Method.SMOOTHED_ANALYTIC,
    )


# -- where the restricted mean is replaced by a maximum -----------------------


def ratio_tables(params: Params) -> np.ndarray:
    """Per-coordinate ``log2`` of the ratio maximized over the smoothing set.

    The ratio is ``[(1-g)/(1-3g/2)]**t0 * [(2/g)(1-g)]**t1 * 2**(t2+t3)``.
    """
    _require_noise(params.gamma)
    g = params.gamma
    k = np.arange(params.n + 1, dtype=np.float64)
    return np.array(
        [
            k * math.log2((1 - g) / (1 - 1.5 * g)),
            k * math.log2(2.0 / g * (1 - g)),
            k,
            k,
        ]
    )


def predicted_maximizer(params: Params, alpha: float) -> tuple[float, float, float, float]:
    """Real-valued tally ``(m0 - r/2, m1 + r/2, m2, m3)`` with ``r = alpha sqrt(n)``."""
    m = smoothing_set(params, alpha).center
    shift = 0.5 * alpha * math.sqrt(params.n)
    return (m[0] - shift, m[1] + shift, m[2], m[3])


# -- key length and rates ------------------------------------------------------


def key_length(n: int, gamma: float, epsilon: float) -> float:
    """Key length at which the closed-form ``D-bar`` bound equals ``epsilon``."""
    _require_noise(gamma)
    Params(n, gamma, epsilon)
    return math.fsum(
        [
            n,
            2.0,
            -n * h4(gamma),
            n * binary_entropy(gamma),
            -math.sqrt(n * math.log(4.0 / epsilon)) * log_advantage(gamma),
            -2.0 * math.log2(1.0 / epsilon),
        ]
    )


def rate_finite(n: int, gamma: float, epsilon: float) -> float:
    """Finite-size rate with the ``30 log(n) / n`` penalty, term for term."""
    _require_noise(gamma)
    Params(n, gamma, epsilon)
    return (
        1.0
        - h4(gamma)
        - math.sqrt(math.log(4.0 / epsilon) / n) * log_advantage(gamma)
        - POSTSELECTION_COEFF * math.log2(n) / n
        - 2.0 / n * math.log2(1.0 / epsilon)
    )


def key_length_no_smoothing(n: int, gamma: float, epsilon: float) -> float:
    """Largest ``ell`` with the no-smoothing ``D-bar`` at most ``epsilon``."""
    Params(n, gamma, epsilon)
    return n + 2.0 * math.log2(2.0 * epsilon) - 2.0 * n * log_bracket(gamma)


def rate_from_key_length(n: int, gamma: float, ell: float) -> float:
    """``(ell - n h(gamma) - 30 log(n + 1)) / n``."""
    penalty = POSTSELECTION_COEFF * math.log2(n + 1)
    return (ell - n * binary_entropy(gamma) - penalty) / n


def rate_no_smoothing(n: int, gamma: float, epsilon: float) -> float:
    return rate_from_key_length(n, gamma, key_length_no_smoothing(n, gamma, epsilon))


def asymptotic_rate(gamma: float) -> float:
    return 1.0 - h4(gamma)


def asymptotic_threshold(tol: float = 1e-12) -> float:
    """QBER at which :func:`asymptotic_rate` reaches zero."""
    return find_root(asymptotic_rate, 0.10, 0.14, tol)


def rate_point(n: int, gamma: float, epsilon: float, method: str) -> RatePoint:
    """Rate and key length for one of ``smoothed``, ``nosmooth``, ``asymptotic``."""
    if method == "smoothed":
        ell, rate = key_length(n, gamma, epsilon), rate_finite(n, gamma, epsilon)
    elif method == "nosmooth":
        ell = key_length_no_smoothing(n, gamma, epsilon)
        rate = rate_from_key_length(n, gamma, ell)
    elif method == "asymptotic":
        rate = asymptotic_rate(gamma)
        ell = n * (rate + binary_entropy(gamma))
    else:
        raise DomainError(f"unknown rate method {method!r}")
    return RatePoint(gamma, n, epsilon, ell, rate, method)
