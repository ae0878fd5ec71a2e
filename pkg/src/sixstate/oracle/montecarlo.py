"""Seeded random checks of the projection lemma and the BHC inequality.

Randomness comes from a Philox (counter-based) generator; independent
streams are spawned from one seed so reports are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..numerics import PROB_TOL, bhc_tail
from .jacobi import blocked_eigh, reconstruction_error, trace_norms
from .states import CheckResult


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(seed).spawn(stream + 1)[stream]
    return np.random.Generator(np.random.Philox(ss))


def _random_psd(rng, trials: int, dim: int) -> np.ndarray:
    g = rng.normal(size=(trials, dim, dim)) + 1j * rng.normal(size=(trials, dim, dim))
    rho = g @ g.conj().transpose(0, 2, 1)
    tr = np.trace(rho, axis1=1, axis2=2).real
    # traces spread over (0, 1] so that sub-normalized states are covered
    return rho * (rng.uniform(0.05, 1.0, size=trials) / tr)[:, None, None]


def _random_projectors(rng, trials: int, dim: int) -> np.ndarray:
    g = rng.normal(size=(trials, dim, dim)) + 1j * rng.normal(size=(trials, dim, dim))
    q, _ = np.linalg.qr(g)
    ranks = rng.integers(0, dim + 1, size=trials)
    keep = (np.arange(dim)[None, :] < ranks[:, None]).astype(float)
    return np.einsum("bij,bj,bkj->bik", q, keep, q.conj())


def verify_projection_lemma(trials: int, dim: int, rng_seed: int) -> CheckResult:
    """``||rho - P rho P||_1 <= 2 sqrt(tr rho * tr(rho - P rho P))`` on random inputs."""
    if dim > 32:
        raise DomainError("dimension limited to 32")
    rng = make_rng(rng_seed, 1)
    rho = _random_psd(rng, trials, dim)
    proj = _random_projectors(rng, trials, dim)
    bar = proj @ rho @ proj
    diff = rho - bar
    w, v = blocked_eigh(diff)
    recon = reconstruction_error(diff, w, v)
    lhs = np.abs(w).sum(axis=1)
    tr = np.trace(rho, axis1=1, axis2=2).real
    tr_gap = np.maximum(np.trace(diff, axis1=1, axis2=2).real, 0.0)
    rhs = 2.0 * np.sqrt(tr * tr_gap)
    slack = rhs - lhs
    violations = int((slack < -1e-10).sum())
    return CheckResult(
        f"projection lemma dim={dim} trials={trials}",
        violations == 0 and recon < 1e-10,
        float(slack.min()),
        f"{violations} violations, reconstruction {recon:.1e}",
    )


@dataclass(frozen=True)
class TailEstimate:
    frequency: float
    std_error: float
    bound: float
    passed: bool


def bhc_empirical(n: int, pi, alpha: float, trials: int, rng_seed: int) -> TailEstimate:
    """Monte Carlo frequency of ``sum_s |Z_s - n pi_s| >= alpha sqrt(n)``."""
    pi = np.asarray(pi, dtype=float)
    if trials < 1:
        raise DomainError("need at least one trial")
    if abs(pi.sum() - 1.0) > PROB_TOL or (pi < 0).any():
        raise DomainError(f"not a probability vector: {pi!r}")
    rng = make_rng(rng_seed, 2)
    z = rng.multinomial(n, pi, size=trials)
    dev = np.abs(z - n * pi).sum(axis=1)
    freq = float((dev >= alpha * math.sqrt(n)).mean())
    se = math.sqrt(max(freq * (1 - freq), 1.0 / trials) / trials)
    bound = bhc_tail(alpha, len(pi))
    return TailEstimate(freq, se, bound, freq <= bound + 3 * se)
