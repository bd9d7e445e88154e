"""Gram-matrix construction and kernel property checks.

Used by the property-test suite to confirm that matching-based
similarities behave as positive-semidefinite kernels where theory says
they should. The eigenvalue routine is a self-contained cyclic Jacobi
iteration so the checks do not depend on the library they are probing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError

DEFAULT_PSD_TOL = 1e-8
STRONG_TOL = 1e-9
_JACOBI_OFF_EPS = 1e-12


@dataclass(frozen=True)
class GramMatrix:
    n: int
    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.shape != (self.n, self.n):
            raise ValueError(f"expected a {self.n}x{self.n} matrix, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)


def gram(items: Sequence, sim: Callable) -> GramMatrix:
    """Pairwise similarity matrix of a collection."""
    n = len(items)
    entries = np.zeros((n, n))
    for i, x in enumerate(items):
        for j, y in enumerate(items):
            entries[i, j] = float(sim(x, y))
    return GramMatrix(n, entries)


def jacobi_eigenvalues(matrix: np.ndarray, max_rotations: int | None = None) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps zero out off-diagonal entries pairwise until their Frobenius
    norm drops below 1e-12, capped at 100 * n^2 rotations.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if n <= 1:
        return np.diag(a).copy()
    cap = max_rotations if max_rotations is not None else 100 * n * n
    spent = 0
    while spent < cap:
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2)
        if off < _JACOBI_OFF_EPS:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < _JACOBI_OFF_EPS / (n * n):
                    continue
                # rotation angle that annihilates a[p, q]
                theta = 0.5 * np.arctan2(2.0 * a[p, q], a[q, q] - a[p, p])
                c, s = np.cos(theta), np.sin(theta)
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                col_p = c * a[:, p] - s * a[:, q]
                col_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = col_p, col_q
                spent += 1
                if spent >= cap:
                    break
            if spent >= cap:
                break
    return np.sort(np.diag(a))


def is_psd(g: GramMatrix, tol: float = DEFAULT_PSD_TOL) -> bool:
    """Whether the Gram matrix is positive semidefinite within tol.

    Requires symmetry within tol; asymmetric input is a usage error,
    not a negative answer.
    """
    a = g.entries
    if g.n == 0:
        return True
    if float(np.max(np.abs(a - a.T))) > tol:
        raise ConfigurationError("gram matrix is not symmetric within tolerance")
    sym = (a + a.T) / 2.0
    eigs = jacobi_eigenvalues(sym)
    return bool(eigs[0] >= -tol)


def is_strong(items: Sequence, sim: Callable, tol: float = STRONG_TOL) -> bool:
    """Whether sim(x, x) >= sim(x, y) holds over all sampled pairs."""
    selfs = [float(sim(x, x)) for x in items]
    for i, x in enumerate(items):
        for y in items:
            if float(sim(x, y)) > selfs[i] + tol:
                return False
    return True
