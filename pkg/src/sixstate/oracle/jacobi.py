"""Cyclic Jacobi eigensolver for stacks of small Hermitian matrices.

The oracle only ever needs matrices up to 64 x 64, and most of them split
into independent blocks, so a batched Jacobi sweep over numpy arrays is both
simple and fast enough.
"""

from __future__ import annotations

import numpy as np

TOL = 1e-12
MAX_SWEEPS = 100


class NoConvergence(RuntimeError):
    pass


def _off(a: np.ndarray) -> np.ndarray:
    """Largest off-diagonal modulus of each matrix in the stack."""
    d = a.shape[-1]
    if d < 2:
        return np.zeros(a.shape[0])
    mask = ~np.eye(d, dtype=bool)
    return np.abs(a[:, mask]).max(axis=1)


def jacobi_eigh(mats, tol: float = TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decompose a stack ``(B, d, d)`` of Hermitian matrices.

    Returns ``(w, v)`` with ``mats[b] = v[b] @ diag(w[b]) @ v[b].conj().T``.
    Eigenvalues are not sorted.
    """
    a = np.array(mats, dtype=np.complex128, copy=True)
    if a.ndim == 2:
        a = a[None]
        squeeze = True
    else:
        squeeze = False
    nb, d, _ = a.shape
    a = 0.5 * (a + a.conj().transpose(0, 2, 1))
    v = np.broadcast_to(np.eye(d, dtype=np.complex128), a.shape).copy()
    scale = max(1.0, float(np.abs(a).max())) if a.size else 1.0
    for _ in range(max_sweeps):
        if nb == 0 or _off(a).max() <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[:, p, q]
                mod = np.abs(apq)
                # entries this small move eigenvalues by far less than tol
                active = mod > 1e-4 * tol * scale
                if not active.any():
                    continue
                phase = np.where(active, apq / np.where(active, mod, 1.0), 1.0)
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                theta = np.where(active, (aqq - app) / (2.0 * np.where(active, mod, 1.0)), 0.0)
                t = np.where(
                    active,
                    np.sign(theta + (theta == 0)) / (np.abs(theta) + np.sqrt(theta * theta + 1.0)),
                    0.0,
                )
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # U restricted to (p, q): [[c, s], [-s conj(phase), c conj(phase)]]
                upp = c
                upq = s
                uqp = -s * phase.conj()
                uqq = c * phase.conj()
                cp = a[:, :, p].copy()
                cq = a[:, :, q]
                a[:, :, p] = cp * upp[:, None] + cq * uqp[:, None]
                a[:, :, q] = cp * upq[:, None] + cq * uqq[:, None]
                rp = a[:, p, :].copy()
                rq = a[:, q, :]
                a[:, p, :] = rp * upp[:, None] + rq * np.conj(uqp)[:, None]
                a[:, q, :] = rp * upq[:, None] + rq * np.conj(uqq)[:, None]
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                a[:, p, p] = a[:, p, p].real
                a[:, q, q] = a[:, q, q].real
                vp = v[:, :, p].copy()
                vq = v[:, :, q]
                v[:, :, p] = vp * upp[:, None] + vq * uqp[:, None]
                v[:, :, q] = vp * upq[:, None] + vq * uqq[:, None]
    else:
        if _off(a).max() > tol * scale:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    return (w[0], v[0]) if squeeze else (w, v)


def block_components(pattern: np.ndarray) -> list[np.ndarray]:
    """Connected components of the graph whose adjacency is ``pattern``."""
    d = pattern.shape[0]
    seen = np.zeros(d, dtype=bool)
    comps = []
    for start in range(d):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for k in np.flatnonzero(pattern[i] & ~seen):
                seen[k] = True
                stack.append(int(k))
        comps.append(np.array(sorted(comp)))
    return comps


def blocked_eigh(mats, tol: float = TOL, drop: float = 1e-15):
    """:func:`jacobi_eigh` after splitting the stack into common diagonal blocks.

    Entries below ``drop`` times the largest modulus are treated as zero when
    finding the block pattern (they shift eigenvalues by at most that much).
    """
    a = np.asarray(mats, dtype=np.complex128)
    nb, d, _ = a.shape
    mag = np.abs(a).max(axis=0) if nb else np.zeros((d, d))
    pattern = mag > drop * max(mag.max(), 1e-300)
    pattern |= pattern.T
    w = np.zeros((nb, d))
    v = np.zeros((nb, d, d), dtype=np.complex128)
    for comp in block_components(pattern):
        sub = a[:, comp[:, None], comp[None, :]]
        wb, vb = jacobi_eigh(sub, tol)
        w[:, comp] = wb
        v[:, comp[:, None], comp[None, :]] = vb
    return w, v


def trace_norms(mats) -> np.ndarray:
    """``||M||_1`` (sum of absolute eigenvalues) for each Hermitian matrix."""
    w, _ = blocked_eigh(mats)
    return np.abs(w).sum(axis=1)


def reconstruction_error(mats, w, v) -> float:
    rec = np.einsum("bij,bj,bkj->bik", v, w, v.conj())
    return float(np.abs(rec - np.asarray(mats)).max()) if len(w) else 0.0
