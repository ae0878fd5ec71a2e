"""Exact trace distance of the hashed key from uniform, by brute force.

Every basis string ``j``, every Toeplitz seed ``u`` and every key value ``z``
is enumerated; Eve's conditional states are built as explicit matrices and
their trace norms computed with the Jacobi solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..bell import SmoothingSet, tally_of
from ..errors import CapacityError, DomainError
from .jacobi import trace_norms
from .states import MAX_QUBITS, rho_jx
from .toeplitz import all_seeds


@dataclass(frozen=True)
class DistanceBreakdown:
    """``d`` for the raw state; the smoothed fields are set when a set was given."""

    d: float
    smoothing_distance: float | None = None
    d_bar: float | None = None
    kept_trace: float | None = None


def _projector_diag(j, sset: SmoothingSet) -> np.ndarray:
    n = len(j)
    return np.array(
        [tally_of(g, j) in sset for g in itertools.product(range(4), repeat=n)], dtype=float
    )


def _basis_strings(n: int, j_strings):
    if j_strings is None:
        return list(itertools.product((1, 2, 3), repeat=n))
    return [tuple(j) for j in j_strings]


def exact_breakdown(
    n: int, ell: int, gamma: float, sset: SmoothingSet | None = None, j_strings=None
) -> DistanceBreakdown:
    """Exact ``D``, and with ``sset`` also ``||rho - rho_bar||_tr`` and ``D-bar``.

    ``J`` is uniform over ``{1,2,3}**n`` unless ``j_strings`` restricts it.
    """
    if n > MAX_QUBITS:
        raise CapacityError(f"exact distance is limited to n <= {MAX_QUBITS}")
    if not 1 <= ell <= n:
        raise DomainError(f"need 1 <= ell <= n, got ell={ell}")
    xs = list(itertools.product((0, 1), repeat=n))
    seeds = list(all_seeds(n, ell))
    tables = np.array([h.table() for h in seeds])  # (U, 2**n)
    nz = 2**ell
    # onehot[u, z, x] = 1 if hash_u(x) = z
    onehot = (tables[:, None, :] == np.arange(nz)[None, :, None]).astype(float)
    js = _basis_strings(n, j_strings)
    d = dist = dbar = kept = 0.0
    for j in js:
        rhos = np.array([rho_jx(j, x, gamma) for x in xs]) / 2**n  # p_x rho_jx
        rho_z = np.einsum("uzx,xab->uzab", onehot, rhos)
        total = rho_z.sum(axis=1, keepdims=True)
        diff = (rho_z - total / nz).reshape(-1, 4**n, 4**n)
        d += 0.5 * trace_norms(diff).sum() / len(seeds)
        if sset is not None:
            p = _projector_diag(j, sset)
            bar = rho_z * p[None, None, :, None] * p[None, None, None, :]
            dist += 0.5 * trace_norms((rho_z - bar).reshape(diff.shape)).sum() / len(seeds)
            bar_total = bar.sum(axis=1, keepdims=True)
            dbar += 0.5 * trace_norms((bar - bar_total / nz).reshape(diff.shape)).sum() / len(seeds)
            kept += float(np.einsum("xaa->", rhos * p[None, :, None]).real)
    k = len(js)
    if sset is None:
        return DistanceBreakdown(d / k)
    return DistanceBreakdown(d / k, dist / k, dbar / k, kept / k)


def exact_distance(n: int, ell: int, gamma: float, j_strings=None) -> float:
    """``|| rho^ZUJE - mu^Z (x) rho^UJE ||_tr`` for the Toeplitz family."""
    return exact_breakdown(n, ell, gamma, j_strings=j_strings).d
