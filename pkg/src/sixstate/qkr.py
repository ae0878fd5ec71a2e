"""Double-smoothing bounds for 6-state quantum key recycling.

Besides the tally smoothing shared with QKD, the noise strings ``r`` are
restricted to Hamming weights in a window ``W``.  The eigenvalues
``Lambda_g`` then depend on ``g`` only through its number of zeros ``t0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .bell import Params, geometric_tables, log_sum_tallies, smoothing_set
from .errors import DomainError
from .numerics import (
    LN2,
    NEG_INF,
    LogScalar,
    LogSumAccumulator,
    bell_weights,
    h4,
    log_sum,
)
from .qkd import _require_noise, default_alpha, log_advantage, rate_from_key_length


@dataclass(frozen=True)
class WeightWindow:
    w_min: int
    w_max: int

    def __post_init__(self):
        if not 0 <= self.w_min <= self.w_max:
            raise DomainError(f"invalid weight window [{self.w_min}, {self.w_max}]")

    @property
    def width(self) -> int:
        return self.w_max - self.w_min + 1


def weight_window(n: int, gamma: float, beta: float) -> WeightWindow:
    """Weights within ``(beta/2) sqrt(n g (1-g))`` of the mean ``n g``."""
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    half = 0.5 * beta * math.sqrt(n * gamma * (1.0 - gamma))
    # round away float noise so that e.g. 10 - 3 lands on 7, not 6.999...
    lo = math.ceil(round(n * gamma - half, 9)) if math.isfinite(half) else 0
    hi = math.floor(round(n * gamma + half, 9)) if math.isfinite(half) else n
    lo, hi = max(0, lo), min(n, hi)
    if lo > hi:
        raise DomainError(f"no integer weight within beta={beta} of n*gamma={n * gamma:.6g}")
    return WeightWindow(lo, hi)


def _log2_pow(base: float, k: float) -> float:
    if k == 0:
        return 0.0
    return k * math.log2(base) if base > 0 else NEG_INF


def lambda_qkr(t0: int, n: int, gamma: float, window: WeightWindow) -> LogScalar:
    """``log2 Lambda_g`` for strings with ``t0`` zeros, exact window sum."""
    if not 0 <= t0 <= n:
        raise DomainError(f"t0 must lie in [0, {n}], got {t0}")
    bell_weights(gamma)
    k = n - t0
    head = (
        -n
        + _log2_pow((1 - gamma) * (1 - 1.5 * gamma), t0)
        + _log2_pow(gamma / 6.0, k)
    )
    hi = min(window.w_max, k)
    if window.w_min > hi or head == NEG_INF:
        return NEG_INF
    w = np.arange(window.w_min, hi + 1)
    terms = (
        (special.gammaln(k + 1.0) - special.gammaln(w + 1.0) - special.gammaln(k - w + 1.0)) / LN2
        + np.array([_log2_pow(2 * gamma, x) for x in w.tolist()])
        + np.array([_log2_pow(1 - gamma, x) for x in (k - w).tolist()])
    )
    acc = LogSumAccumulator()
    acc.add_array(terms)
    return head + acc.value


def lambda_qkr_full(t0: int, n: int, gamma: float) -> LogScalar:
    """Closed form of :func:`lambda_qkr` when the window covers every weight."""
    return (
        -n
        + _log2_pow((1 - gamma) * (1 - 1.5 * gamma), t0)
        + _log2_pow(gamma / 6.0, n - t0)
        + (n - t0) * math.log2(1 + gamma)
    )


def _stirling_bracket(t0: float, n: int, window: WeightWindow) -> float:
    """``log2`` of ``|W| / sqrt(2 pi w) * 2^w (1/3)^(n-t0) ...`` at real ``t0``."""
    w = window.w_min
    rest = n - t0 - w
    if rest <= 0:
        return math.inf
    return (
        math.log2(window.width)
        - 0.5 * math.log2(2 * math.pi * w)
        + w
        - (n - t0) * math.log2(3)
        + (n - t0 + 0.5) * math.log2(1 - t0 / n)
        - w * math.log2(w / n)
        - (rest + 0.5) * math.log2(rest / n)
    )


def lambda_qkr_stirling_bound(t0: int, n: int, gamma: float, window: WeightWindow) -> LogScalar:
    """Upper bound on :func:`lambda_qkr` through the lowest window weight and Stirling.

    Infinite when ``t0 = n - w_min`` (Stirling's form does not cover ``0!``).
    """
    _require_noise(gamma)
    w = window.w_min
    if w < 1 or not 0 <= t0 <= n - w:
        raise DomainError(f"need w_min >= 1 and 0 <= t0 <= n - w_min (t0={t0}, w_min={w})")
    return (
        -n
        + t0 * math.log2(1 - 1.5 * gamma)
        + (n - t0) * math.log2(gamma / 2)
        + w * math.log2(gamma)
        + (n - w) * math.log2(1 - gamma)
        + _stirling_bracket(t0, n, window)
    )


def stirling_bound_applies(t0: int, n: int, gamma: float, window: WeightWindow) -> bool:
    """Whether bounding the window sum by ``|W|`` times its ``w_min`` term is sound.

    That step needs the summand ``C(k, w) (2g)^w (1-g)^(k-w)`` to be
    nonincreasing from ``w_min`` on, ``k = n - t0``.
    """
    w = window.w_min
    if gamma <= 0 or w < 1 or not 0 <= t0 <= n - w:
        return False
    return (n - t0 - w) * 2 * gamma <= (w + 1) * (1 - gamma)


def stirling_factorial_bounds(k: int) -> tuple[float, float]:
    """``log2`` of Robbins' lower and upper bounds on ``k!``."""
    if k < 1:
        raise DomainError("Stirling bounds need k >= 1")
    base = 0.5 * math.log2(2 * math.pi * k) + k * (math.log2(k) - 1 / LN2)
    return base + 1 / (12 * k + 1) / LN2, base + 1 / (12 * k) / LN2


# -- D-bar for key recycling --------------------------------------------------


def tau0_star(params: Params, alpha: float) -> float:
    return params.n * (1 - 1.5 * params.gamma) - 0.5 * alpha * math.sqrt(params.n)


def dbar_qkr_analytic(params: Params, alpha: float, window: WeightWindow) -> LogScalar:
    _require_noise(params.gamma)
    n, g = params.n, params.gamma
    w = window.w_min
    t0 = tau0_star(params, alpha)
    if w < 1 or not 0 <= t0 <= n - w:
        raise DomainError(
            f"need w_min >= 1 and 0 <= tau0* <= n - w_min (tau0*={t0:.6g}, w_min={w})"
        )
    inner = (
        n * h4(g)
        + w * math.log2(g)
        + (n - w) * math.log2(1 - g)
        + 0.5 * alpha * math.sqrt(n) * log_advantage(g)
    )
    return -1.0 + 0.5 * (params.ell - n) + 0.5 * inner + 0.5 * _stirling_bracket(t0, n, window)


def dbar_qkr_exact(params: Params, alpha: float, window: WeightWindow, **kw) -> LogScalar:
    """Smoothing-set sum of ``multinomial * sqrt(Lambda(t0))``, exact window sums."""
    n = params.n
    root_lambda = [0.5 * lambda_qkr(t0, n, params.gamma, window) for t0 in range(n + 1)]
    tables = np.zeros((4, n + 1))
    tables[0] = root_lambda
    total = log_sum_tallies(smoothing_set(params, alpha), tables, **kw)
    return -1.0 + 0.5 * params.ell + total


def truncation_loss(n: int, gamma: float, window: WeightWindow) -> LogScalar:
    """``log2 Pr[w(r) outside W]`` for ``r`` with i.i.d. ``Bernoulli(gamma)`` bits."""
    below = stats.binom.logcdf(window.w_min - 1, n, gamma) / LN2 if window.w_min > 0 else NEG_INF
    above = stats.binom.logsf(window.w_max, n, gamma) / LN2
    return log_sum([float(below), float(above)])


@dataclass(frozen=True)
class QKRReport:
    n: int
    gamma: float
    epsilon: float
    alpha: float
    beta: float
    window: WeightWindow
    ell: float
    rate: float
    d_bar: LogScalar
    truncation_loss: LogScalar


def key_length_qkr(n: int, gamma: float, epsilon: float, alpha: float, window: WeightWindow) -> float:
    """Message length at which :func:`dbar_qkr_analytic` equals ``epsilon``."""
    d0 = dbar_qkr_analytic(Params(n, gamma, epsilon, 0), alpha, window)
    return 2.0 * (math.log2(epsilon) - d0)


def qkr_report(n: int, gamma: float, epsilon: float, beta: float | None = None) -> QKRReport:
    alpha = default_alpha(epsilon)
    beta = alpha if beta is None else beta
    window = weight_window(n, gamma, beta)
    ell = key_length_qkr(n, gamma, epsilon, alpha, window)
    d_bar = dbar_qkr_analytic(Params(n, gamma, epsilon, max(ell, 0.0)), alpha, window)
    return QKRReport(
        n, gamma, epsilon, alpha, beta, window, ell,
        rate_from_key_length(n, gamma, ell), d_bar, truncation_loss(n, gamma, window),
    )
