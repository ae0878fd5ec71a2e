"""Explicit density matrices for Eve's side of the 6-state protocol."""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..bell import Tally, lambda_g, tally_of
from ..errors import CapacityError, DomainError
from ..numerics import bell_weights, to_linear
from .jacobi import jacobi_eigh

HERMITIAN_TOL = 1e-12
PSD_FLOOR = -1e-10

MAX_QUBITS = 3


class EveStateIndex(NamedTuple):
    j: int
    x: int
    y: int


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one numerical check; ``slack`` is the measured deviation or margin."""

    name: str
    passed: bool
    slack: float
    detail: str = ""


def _cyc(j: int, k: int) -> int:
    return (j - 1 + k) % 3 + 1


def eve_vector(idx: EveStateIndex, gamma: float) -> np.ndarray:
    j, x, y = idx
    if j not in (1, 2, 3) or x not in (0, 1) or y not in (0, 1):
        raise DomainError(f"invalid Eve state index {idx!r}")
    bell_weights(gamma)
    v = np.zeros(4, dtype=np.complex128)
    if x != y:
        if 1.0 - gamma <= 0:
            raise DomainError("Eve's x != y state is undefined at gamma = 1")
        v[0] = math.sqrt(1.0 - 1.5 * gamma)
        v[j] = (-1) ** x * math.sqrt(gamma / 2.0)
        v /= math.sqrt(1.0 - gamma)
    else:
        v[_cyc(j, 1)] = 1.0
        v[_cyc(j, 2)] = 1j * (-1) ** (x + 1)
        v /= math.sqrt(2.0)
    return v / np.linalg.norm(v)


def eve_state(idx: EveStateIndex, gamma: float) -> np.ndarray:
    """Rank-one projector ``|E^j_xy><E^j_xy|`` on Eve's 4-dimensional space."""
    v = eve_vector(EveStateIndex(*idx), gamma)
    return np.outer(v, v.conj())


def single_qubit_state(j: int, x: int, gamma: float) -> np.ndarray:
    """``(1 - g) sigma^j_{x, not x} + g sigma^j_{x x}``."""
    return (1 - gamma) * eve_state((j, x, 1 - x), gamma) + gamma * eve_state((j, x, x), gamma)


def _kron_all(mats) -> np.ndarray:
    return functools.reduce(np.kron, mats, np.ones((1, 1), dtype=np.complex128))


def rho_jx(j, x, gamma: float) -> np.ndarray:
    """Eve's ``4**n``-dimensional state given basis string ``j`` and bit string ``x``."""
    if len(j) > MAX_QUBITS:
        raise CapacityError(f"explicit states limited to n <= {MAX_QUBITS}")
    return _kron_all([single_qubit_state(ji, xi, gamma) for ji, xi in zip(j, x)])


def check_density_matrix(m: np.ndarray, name: str = "rho") -> CheckResult:
    herm = float(np.abs(m - m.conj().T).max())
    w, _ = jacobi_eigh(m)
    tr = float(np.trace(m).real)
    ok = herm < HERMITIAN_TOL and w.min() >= PSD_FLOOR and tr <= 1 + 1e-10
    return CheckResult(name, bool(ok), herm, f"min eig {w.min():.3e}, trace {tr:.12f}")


# -- lemma checks ----------------------------------------------------------------


def verify_sigma_average(j: int, gamma: float) -> CheckResult:
    """Average of ``sigma^j_{x, not x xor r}`` over ``x`` against its diagonal form."""
    worst = 0.0
    for r in (0, 1):
        avg = 0.5 * sum(eve_state((j, x, (1 - x) ^ r), gamma) for x in (0, 1))
        expect = np.zeros((4, 4))
        if r == 0:
            expect[0, 0] = (1 - 1.5 * gamma) / (1 - gamma)
            expect[j, j] = (gamma / 2) / (1 - gamma)
        else:
            expect[_cyc(j, 1), _cyc(j, 1)] = 0.5
            expect[_cyc(j, 2), _cyc(j, 2)] = 0.5
        worst = max(worst, float(np.abs(avg - expect).max()))
    return CheckResult(f"sigma-average j={j} gamma={gamma}", worst < 1e-12, worst)


def build_A(j, gamma: float) -> np.ndarray:
    """``sum_x p_x**2 (rho_jx)**2`` with ``p_x = 2**-n``."""
    n = len(j)
    dim = 4**n
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for x in itertools.product((0, 1), repeat=n):
        r = rho_jx(j, x, gamma)
        acc += r @ r
    return acc / 4.0**n


def build_A_and_check(n: int, j, gamma: float) -> CheckResult:
    """``A_j`` is diagonal in the ``|g>`` basis with the closed-form eigenvalues."""
    if n > MAX_QUBITS:
        raise CapacityError(f"A_j is only materialized for n <= {MAX_QUBITS}")
    j = tuple(j)
    if len(j) != n:
        raise DomainError("basis string length must equal n")
    a = build_A(j, gamma)
    off = float(np.abs(a - np.diag(np.diag(a))).max())
    diag = np.diag(a).real
    worst_rel = 0.0
    for idx, g in enumerate(itertools.product(range(4), repeat=n)):
        expect = to_linear(lambda_g(tally_of(g, j), gamma))
        got = diag[idx]
        if expect == 0:
            err = abs(got)
        else:
            err = abs(got - expect) / expect
        worst_rel = max(worst_rel, err)
    ok = off < 1e-12 and worst_rel < 1e-10
    return CheckResult(
        f"A_j diagonal n={n} j={''.join(map(str, j))} gamma={gamma}",
        ok,
        max(off, worst_rel),
        f"off-diag {off:.2e}, diag rel err {worst_rel:.2e}",
    )


# -- purification ------------------------------------------------------------------


def bell_states() -> dict[str, np.ndarray]:
    """Bell vectors in the ``|ab>`` computational basis."""
    r = 1 / math.sqrt(2)
    return {
        "psi-": np.array([0, r, -r, 0], dtype=np.complex128),
        "phi-": np.array([r, 0, 0, -r], dtype=np.complex128),
        "psi+": np.array([0, r, r, 0], dtype=np.complex128),
        "phi+": np.array([r, 0, 0, r], dtype=np.complex128),
    }


def sigma_ab(gamma: float) -> np.ndarray:
    w = bell_weights(gamma)
    b = bell_states()
    return sum(wi * np.outer(b[k], b[k].conj()) for wi, k in zip(w, ("psi-", "phi-", "psi+", "phi+")))


def purification(gamma: float) -> np.ndarray:
    """``|Psi^ABE>`` as a 16-vector, index ``4 * ab + e``."""
    b = bell_states()
    e = np.eye(4)
    w0, half = math.sqrt(1 - 1.5 * gamma), math.sqrt(gamma / 2)
    return w0 * np.kron(b["psi-"], e[0]) + half * (
        -np.kron(b["phi-"], e[1]) + 1j * np.kron(b["psi+"], e[2]) + np.kron(b["phi+"], e[3])
    )


def verify_purification(gamma: float) -> CheckResult:
    psi = purification(gamma).reshape(4, 4)
    reduced = psi @ psi.conj().T
    dev = float(np.abs(reduced - sigma_ab(gamma)).max())
    return CheckResult(f"purification gamma={gamma}", dev < 1e-12, dev)


def tally_classes(n: int, j) -> dict[Tally, int]:
    """How many strings ``g`` fall in each tally class relative to ``j``."""
    out: dict[Tally, int] = {}
    for g in itertools.product(range(4), repeat=n):
        t = tally_of(g, j)
        out[t] = out.get(t, 0) + 1
    return out
