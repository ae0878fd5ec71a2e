"""Bell-basis structure: tallies, eigenvalues of ``A_j`` and smoothing sets.

A string ``g`` over ``{0,1,2,3}`` labels an eigenvector of Eve's
``sum_x p_x**2 (rho_jx)**2``.  Relative to a basis string ``j`` over
``{1,2,3}`` it is summarised by the tally ``(t0, t_eq, t_+1, t_+2)``.  The
eigenvalue depends on ``(g, j)`` only through that tally.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, DomainError
from .numerics import (
    NEG_INF,
    LogScalar,
    LogSumAccumulator,
    bell_weights,
    log2_factorial_table,
)

#: Default ceiling on the number of candidate tallies an exact sum may visit.
MAX_TALLIES = 200_000_000


@dataclass(frozen=True)
class Params:
    """The ``(n, gamma, epsilon, ell)`` tuple every bound is a function of."""

    n: int
    gamma: float
    epsilon: float = 2.0**-128
    ell: float = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 <= self.gamma < 2.0 / 3.0:
            raise DomainError(f"gamma must lie in [0, 2/3), got {self.gamma!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if self.ell < 0:
            raise DomainError(f"ell must be nonnegative, got {self.ell!r}")
        object.__setattr__(self, "n", int(self.n))


class Tally(NamedTuple):
    t0: int
    t1: int
    t2: int
    t3: int

    @property
    def n(self) -> int:
        return self.t0 + self.t1 + self.t2 + self.t3


def _cyc(j: int, k: int) -> int:
    """``j + k`` cycled back into ``{1, 2, 3}``."""
    return (j - 1 + k) % 3 + 1


def tally_of(g: Sequence[int], j: Sequence[int]) -> Tally:
    """Count zeros of ``g`` and positions where ``g_i`` equals ``j_i``, ``j_i+1``, ``j_i+2``."""
    if len(g) != len(j):
        raise DomainError(f"length mismatch: |g|={len(g)}, |j|={len(j)}")
    counts = [0, 0, 0, 0]
    for gi, ji in zip(g, j):
        if gi not in (0, 1, 2, 3):
            raise DomainError(f"Bell symbol out of range: {gi!r}")
        if ji not in (1, 2, 3):
            raise DomainError(f"basis symbol out of range: {ji!r}")
        if gi == 0:
            counts[0] += 1
        elif gi == ji:
            counts[1] += 1
        elif gi == _cyc(ji, 1):
            counts[2] += 1
        else:
            counts[3] += 1
    return Tally(*counts)


def eigen_factors(gamma: float) -> tuple[float, float, float]:
    """Per-position eigenvalue factors for ``g_i = 0``, ``g_i = j_i`` and the rest."""
    bell_weights(gamma)  # domain check
    return (
        (1.0 - gamma) * (1.0 - 1.5 * gamma),
        0.5 * gamma * (1.0 - gamma),
        0.5 * gamma * gamma,
    )


def _log2_pow(base: float, k: int) -> float:
    if k == 0:
        return 0.0
    return k * math.log2(base) if base > 0 else NEG_INF


def lambda_g(tally: Sequence[int], gamma: float) -> LogScalar:
    """``log2`` of the eigenvalue of ``A_j`` on ``|g>`` with the given tally."""
    t0, t1, t2, t3 = (int(t) for t in tally)
    if min(t0, t1, t2, t3) < 0:
        raise DomainError(f"negative tally component in {tuple(tally)!r}")
    a, b, c = eigen_factors(gamma)
    n = t0 + t1 + t2 + t3
    return -n + _log2_pow(a, t0) + _log2_pow(b, t1) + _log2_pow(c, t2 + t3)


# -- smoothing sets ----------------------------------------------------------


@dataclass(frozen=True)
class SmoothingSet:
    """Tallies strictly inside an L1 ball of radius ``alpha * sqrt(n)``."""

    n: int
    center: tuple[float, float, float, float]
    alpha: float

    @property
    def radius(self) -> float:
        return self.alpha * math.sqrt(self.n)

    def __contains__(self, tally) -> bool:
        if sum(tally) != self.n or min(tally) < 0:
            return False
        return _distance(*tally, self.center) < self.radius

    def windows(self) -> list[tuple[int, int]]:
        """Inclusive integer range each coordinate can take inside the ball."""
        r = self.radius
        return [
            (max(0, math.ceil(m - r)), min(self.n, math.floor(m + r)))
            for m in self.center
        ]

    def candidate_count(self) -> int:
        """Number of grid points the enumeration visits (upper bound on members)."""
        sizes = [max(0, hi - lo + 1) for lo, hi in self.windows()[1:]]
        return sizes[0] * sizes[1] * sizes[2]


def smoothing_set(params: Params, alpha: float) -> SmoothingSet:
    """Smoothing set centred on the expected tally ``n * bell_weights(gamma)``."""
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative, got {alpha!r}")
    center = tuple(params.n * w for w in bell_weights(params.gamma))
    return SmoothingSet(params.n, center, float(alpha))


def full_set(n: int) -> SmoothingSet:
    """A smoothing set that contains every tally of ``n``."""
    return SmoothingSet(n, (n / 4.0,) * 4, 2.0 * math.sqrt(n) + 1.0)


def _check_capacity(sset: SmoothingSet, max_tallies: int | None) -> None:
    limit = MAX_TALLIES if max_tallies is None else max_tallies
    count = sset.candidate_count()
    if count > limit:
        raise CapacityError(
            f"exact enumeration would visit {count} tallies (limit {limit}); "
            "use the analytic bound or raise --max-tallies"
        )


class _Block(NamedTuple):
    """Members of the set with a fixed ``t1``, as flat arrays in ``(t2, t3)`` order."""

    t1: int
    t0: np.ndarray
    t2: np.ndarray
    t3: np.ndarray


def _distance(t0, t1, t2, t3, center):
    m0, m1, m2, m3 = center
    return ((abs(t0 - m0) + abs(t1 - m1)) + abs(t2 - m2)) + abs(t3 - m3)


def _blocks(sset: SmoothingSet, t1_values=None) -> Iterator[_Block]:
    n, r = sset.n, sset.radius
    m0, m1, m2, m3 = sset.center
    _, (lo1, hi1), (lo2, hi2), (lo3, hi3) = sset.windows()
    if r <= 0 or lo1 > hi1 or lo2 > hi2 or lo3 > hi3:
        return
    covers_all = r > 2 * n  # L1 distance between tallies never exceeds 2n
    t2_all = np.arange(lo2, hi2 + 1)
    for t1 in range(lo1, hi1 + 1) if t1_values is None else t1_values:
        t2 = t2_all[t2_all <= n - t1]
        # remaining budget for |t0 - m0| + |t3 - m3| with t0 = s - t3
        s = n - t1 - t2
        budget = r - abs(t1 - m1) - np.abs(t2 - m2)
        p = np.minimum(s - m0, m3)
        q = np.maximum(s - m0, m3)
        lo = np.maximum(np.floor(0.5 * (p + q - budget)), lo3).astype(np.int64)
        hi = np.minimum(np.ceil(0.5 * (p + q + budget)), np.minimum(hi3, s)).astype(np.int64)
        keep = (budget > 0) & (hi >= lo)
        if not keep.any():
            continue
        t2, s, lo, hi = t2[keep], s[keep], lo[keep], hi[keep]
        lengths = hi - lo + 1
        starts = np.repeat(lo - np.cumsum(lengths) + lengths, lengths)
        t3 = starts + np.arange(int(lengths.sum()))
        t2 = np.repeat(t2, lengths)
        t0 = np.repeat(s, lengths) - t3
        if not covers_all:
            inside = _distance(t0, t1, t2, t3, sset.center) < r
            if not inside.all():
                t0, t2, t3 = t0[inside], t2[inside], t3[inside]
        if t0.size:
            yield _Block(t1, t0, t2, t3)


#: Sets with at most this many candidates keep their blocks cached.
_CACHE_CANDIDATES = 30_000_000


@functools.lru_cache(maxsize=1)
def _cached_blocks(sset: SmoothingSet) -> tuple[_Block, ...]:
    return tuple(_blocks(sset))


def _member_blocks(sset: SmoothingSet, t1_values=None):
    if t1_values is None and sset.candidate_count() <= _CACHE_CANDIDATES:
        return _cached_blocks(sset)
    return _blocks(sset, t1_values)


def enumerate_tallies(sset: SmoothingSet) -> Iterator[Tally]:
    """Yield every member of ``sset`` once, lexicographically in ``(t1, t2, t3)``."""
    for b in _member_blocks(sset):
        for a, c, d in zip(b.t0.tolist(), b.t2.tolist(), b.t3.tolist()):
            yield Tally(a, b.t1, c, d)


def count_tallies(sset: SmoothingSet) -> int:
    return sum(b.t0.size for b in _member_blocks(sset))


# -- enumerated multinomial sums ----------------------------------------------


def geometric_tables(n: int, log_weights: Sequence[float]) -> np.ndarray:
    """Per-coordinate tables ``k * log_weights[a]`` for ``k = 0..n``.

    A weight of zero (``-inf``) contributes ``0`` when ``k = 0``.
    """
    k = np.arange(n + 1, dtype=np.float64)
    rows = []
    for lw in log_weights:
        if lw == NEG_INF:
            row = np.full(n + 1, NEG_INF)
            row[0] = 0.0
        else:
            row = k * lw
        rows.append(row)
    return np.array(rows)


def _block_terms(b: _Block, n: int, tables: np.ndarray) -> np.ndarray:
    lf = log2_factorial_table(n)
    c = tables - lf[None, :]
    return (lf[n] + c[1][b.t1]) + c[0][b.t0] + c[2][b.t2] + c[3][b.t3]


def _partials(sset: SmoothingSet, tables: np.ndarray, t1_values) -> list[tuple[float, float]]:
    out = []
    for b in _member_blocks(sset, t1_values):
        terms = _block_terms(b, sset.n, tables)
        m = float(terms.max())
        out.append((m, float(np.sum(np.exp2(terms - m))) if m != NEG_INF else 0.0))
    return out


def log_sum_tallies(
    sset: SmoothingSet,
    tables: np.ndarray,
    *,
    workers: int = 1,
    max_tallies: int | None = None,
) -> LogScalar:
    """``log2 sum_{tau in sset} multinomial(n; tau) * 2**(sum_a tables[a][tau_a])``.

    Each ``t1`` slice is reduced to a ``(max, scaled sum)`` partial; partials
    are folded in ``t1`` order so the result is the same for any ``workers``.
    """
    _check_capacity(sset, max_tallies)
    tables = np.asarray(tables, dtype=np.float64)
    if tables.shape != (4, sset.n + 1):
        raise DomainError(f"tables must have shape (4, {sset.n + 1})")
    if workers <= 1:
        partials = _partials(sset, tables, None)
    else:
        lo1, hi1 = sset.windows()[1]
        chunks = [c.tolist() for c in np.array_split(np.arange(lo1, hi1 + 1), workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_partials, [sset] * len(chunks), [tables] * len(chunks), chunks)
            partials = [p for part in parts for p in part]
    acc = LogSumAccumulator()
    for m, s in partials:
        acc.add_scaled(m, s)
    return acc.value


def argmax_tally(sset: SmoothingSet, objective_tables: np.ndarray) -> tuple[Tally, float]:
    """Member maximizing ``sum_a objective_tables[a][tau_a]`` (first in order on ties)."""
    best, best_val = None, NEG_INF
    for b in _member_blocks(sset):
        vals = (
            objective_tables[1][b.t1]
            + objective_tables[0][b.t0]
            + objective_tables[2][b.t2]
            + objective_tables[3][b.t3]
        )
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best = Tally(int(b.t0[i]), b.t1, int(b.t2[i]), int(b.t3[i]))
    return best, best_val
