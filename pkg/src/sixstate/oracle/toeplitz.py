"""Toeplitz-matrix universal hashing over GF(2)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class ToeplitzHash:
    """``ell x n`` Toeplitz matrix ``T[i, k] = seed[i - k + n - 1]``."""

    n: int
    ell: int
    seed: tuple[int, ...]

    def __post_init__(self):
        if len(self.seed) != self.n + self.ell - 1:
            raise DomainError(f"seed must have {self.n + self.ell - 1} bits, got {len(self.seed)}")
        if any(b not in (0, 1) for b in self.seed):
            raise DomainError("seed must be a bit string")

    def matrix(self) -> np.ndarray:
        i = np.arange(self.ell)[:, None]
        k = np.arange(self.n)[None, :]
        return np.asarray(self.seed, dtype=np.uint8)[i - k + self.n - 1]

    def __call__(self, x) -> int:
        """Hash bit string ``x`` to an integer in ``[0, 2**ell)`` (bit 0 is row 0)."""
        bits = self.matrix().astype(np.int64) @ np.asarray(x, dtype=np.int64) % 2
        return int(bits @ (1 << np.arange(self.ell)))

    def table(self) -> np.ndarray:
        """Hash of every ``x`` in lexicographic order of ``{0,1}**n``."""
        xs = np.array(list(itertools.product((0, 1), repeat=self.n)), dtype=np.int64)
        bits = xs @ self.matrix().T.astype(np.int64) % 2
        return bits @ (1 << np.arange(self.ell))


def all_seeds(n: int, ell: int):
    """Every member of the Toeplitz family for ``n`` input and ``ell`` output bits."""
    for seed in itertools.product((0, 1), repeat=n + ell - 1):
        yield ToeplitzHash(n, ell, seed)
