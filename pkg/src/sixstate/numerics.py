"""Log-domain arithmetic, entropies and tail bounds.

Every probability or bound handled by the package is carried as a base-2
logarithm (a plain ``float``, ``-inf`` standing for zero) because quantities
such as ``2**(-n*h)`` underflow long before ``n = 10**5``.  Conversion to the
linear domain happens only when a number is reported.
"""

from __future__ import annotations

import functools
import math
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize, special

from .errors import BracketError, DomainError

LN2 = math.log(2.0)
NEG_INF = float("-inf")

#: Base-2 logarithm of a nonnegative real; ``-inf`` encodes 0.
LogScalar = float

PROB_TOL = 1e-12


def from_linear(x: float) -> LogScalar:
    """Return ``log2(x)`` with ``from_linear(0) == -inf``."""
    if x < 0:
        raise DomainError(f"cannot take the log of a negative value {x!r}")
    if x == 0:
        return NEG_INF
    return math.log2(x)


def to_linear(y: LogScalar) -> float:
    """Inverse of :func:`from_linear`; overflows to ``inf`` above 2**1024."""
    if y == NEG_INF:
        return 0.0
    try:
        return 2.0**y
    except OverflowError:
        return math.inf


def _xlog2x(p: float) -> float:
    return 0.0 if p == 0 else p * math.log2(p)


def binary_entropy(p: float) -> float:
    """Binary entropy ``h(p)`` in bits, with ``0 log 0 = 0``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p!r}")
    return -_xlog2x(p) - _xlog2x(1.0 - p)


def entropy_vec(p: Sequence[float]) -> float:
    """Shannon entropy in bits of a normalized probability vector."""
    p = [float(v) for v in p]
    if any(v < 0 for v in p):
        raise DomainError(f"negative probability in {p!r}")
    if abs(math.fsum(p) - 1.0) > PROB_TOL:
        raise DomainError(f"probabilities sum to {math.fsum(p)!r}, not 1")
    return -math.fsum(_xlog2x(v) for v in p)


def bell_weights(gamma: float) -> tuple[float, float, float, float]:
    """The four Bell-diagonal weights ``(1 - 3g/2, g/2, g/2, g/2)``."""
    if not 0.0 <= gamma < 2.0 / 3.0:
        raise DomainError(f"QBER must lie in [0, 2/3), got {gamma!r}")
    half = gamma / 2.0
    return (1.0 - 1.5 * gamma, half, half, half)


def h4(gamma: float) -> float:
    """Entropy of the Bell-diagonal weights at QBER ``gamma``."""
    return entropy_vec(bell_weights(gamma))


# -- combinatorics ---------------------------------------------------------


@functools.lru_cache(maxsize=8)
def log2_factorial_table(n: int) -> np.ndarray:
    """Array ``t`` with ``t[k] = log2(k!)`` for ``0 <= k <= n``.

    Entries below 20 are exact integer factorials; the rest come from
    ``gammaln``.
    """
    k = np.arange(n + 1, dtype=np.float64)
    table = special.gammaln(k + 1.0) / LN2
    small = min(n, 19)
    table[: small + 1] = [math.log2(math.factorial(i)) for i in range(small + 1)]
    table.flags.writeable = False
    return table


def log2_factorial(k: int) -> float:
    if k < 0:
        raise DomainError(f"factorial of negative integer {k}")
    if k < 20:
        return math.log2(math.factorial(k))
    return math.lgamma(k + 1.0) / LN2


def log_multinomial(n: int, tally: Sequence[int]) -> LogScalar:
    """``log2`` of the multinomial coefficient ``n! / prod(tally_i!)``."""
    if any(int(t) != t or t < 0 for t in tally):
        raise DomainError(f"tally components must be nonnegative integers: {tally!r}")
    if sum(tally) != n:
        raise DomainError(f"tally {tuple(tally)!r} does not sum to n={n}")
    return log2_factorial(n) - math.fsum(log2_factorial(int(t)) for t in tally)


def log_binomial(n: int, k: int) -> LogScalar:
    if not 0 <= k <= n:
        return NEG_INF
    return log2_factorial(n) - log2_factorial(k) - log2_factorial(n - k)


# -- log-domain summation --------------------------------------------------


class LogSumAccumulator:
    """Running ``log2(sum 2**x_i)`` with max rescaling.

    The scaled linear sum is kept with Neumaier compensation, so the result
    does not depend on the order in which values arrive (to ~1e-15).
    """

    __slots__ = ("_max", "_sum", "_comp")

    def __init__(self) -> None:
        self._max = NEG_INF
        self._sum = 0.0
        self._comp = 0.0

    def _add_scaled(self, v: float) -> None:
        t = self._sum + v
        if abs(self._sum) >= abs(v):
            self._comp += (self._sum - t) + v
        else:
            self._comp += (v - t) + self._sum
        self._sum = t

    def add_scaled(self, log_max: LogScalar, scaled_sum: float) -> None:
        """Add ``scaled_sum * 2**log_max`` (a precomputed block partial)."""
        if log_max == NEG_INF or scaled_sum == 0.0:
            return
        if log_max > self._max:
            factor = 2.0 ** (self._max - log_max) if self._max != NEG_INF else 0.0
            self._sum *= factor
            self._comp *= factor
            self._max = log_max
            self._add_scaled(scaled_sum)
        else:
            self._add_scaled(scaled_sum * 2.0 ** (log_max - self._max))

    def add(self, x: LogScalar) -> None:
        self.add_scaled(x, 1.0)

    def add_array(self, x: np.ndarray) -> None:
        """Fold a block of log values in; the block is summed pairwise."""
        if x.size == 0:
            return
        m = float(np.max(x))
        if m == NEG_INF:
            return
        self.add_scaled(m, float(np.sum(np.exp2(x - m))))

    @property
    def value(self) -> LogScalar:
        total = self._sum + self._comp
        if total <= 0.0:
            return NEG_INF
        return self._max + math.log2(total)


def log_sum(values: Iterable[LogScalar]) -> LogScalar:
    """``log2`` of the sum of ``2**v`` over ``values``; empty input gives -inf."""
    acc = LogSumAccumulator()
    for v in values:
        acc.add(float(v))
    return acc.value


# -- tail bounds and roots -------------------------------------------------


def bhc_tail(alpha: float, t: int = 4) -> float:
    """Bretagnolle-Huber-Carol bound ``2**t * exp(-alpha**2 / 2)``.

    Upper bound on ``Pr[sum_s |Z_s - n pi_s| >= alpha sqrt(n)]`` for a
    multinomial vector with ``t`` categories.
    """
    if alpha < 0 or t < 1:
        raise DomainError("need alpha >= 0 and t >= 1")
    return 2.0**t * math.exp(-0.5 * alpha * alpha)


def log2_bhc_tail(alpha: float, t: int = 4) -> LogScalar:
    """:func:`bhc_tail` in the log domain (no underflow for large alpha)."""
    if alpha < 0 or t < 1:
        raise DomainError("need alpha >= 0 and t >= 1")
    return t - 0.5 * alpha * alpha / LN2


def find_root(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Bisection root of a continuous monotone ``f`` on ``[lo, hi]``."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise BracketError(f"f({lo})={flo!r} and f({hi})={fhi!r} have the same sign")
    return optimize.bisect(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
