"""Effective blockade shift for registers with unequal pair shifts.

The symmetric doubly excited state of ``n0`` qubits is not an eigenstate of
the diagonal pair-shift operator when the shifts differ.  Repeatedly
applying the shifts and orthogonalising builds a chain of symmetrized
states ``d^(1), d^(2), ...`` over the pair index, in which the shift operator
is tridiagonal (a Lanczos tridiagonalisation started from the uniform
vector).  Adiabatically eliminating the chain from its far end gives one
effective shift for the whole ``n0`` subset.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .register import pair_values

__all__ = [
    "BREAKDOWN_TOL",
    "BlockadeChain",
    "SingularRecursionError",
    "build_chain",
    "effective_shift",
    "subset_effective_shift",
]

BREAKDOWN_TOL = 1e-12


class SingularRecursionError(ZeroDivisionError):
    """An intermediate effective shift vanished during the backward recursion."""

    def __init__(self, message, level):
        super().__init__(message)
        self.level = level


@dataclass(frozen=True)
class BlockadeChain:
    """Chain of symmetrized doubly excited states for one subset of qubits.

    Attributes
    ----------
    n0 : int
        Number of qubits in the subset.
    pair_shifts : ndarray
        Shifts of the ``n_ee`` pairs, in lexicographic pair order.
    vectors : ndarray, shape (K, n_ee)
        Orthonormal coefficient vectors ``d^(k)``.
    couplings : ndarray, shape (K,)
        ``couplings[k]`` couples chain states ``k-1`` and ``k``; entry 0 is
        unused and set to zero.
    shifts : ndarray, shape (K,)
        Diagonal shift of every chain state.
    """

    n0: int
    pair_shifts: np.ndarray
    vectors: np.ndarray
    couplings: np.ndarray
    shifts: np.ndarray

    @property
    def n_ee(self) -> int:
        return self.n0 * (self.n0 - 1) // 2

    @property
    def length(self) -> int:
        return int(self.shifts.size)

    def tridiagonal(self) -> np.ndarray:
        """Shift operator in the chain basis: ``shifts`` on the diagonal, ``couplings/2`` beside it."""
        t = np.diag(self.shifts.astype(float))
        off = 0.5 * self.couplings[1:]
        t += np.diag(off, 1) + np.diag(off, -1)
        return t

    def projected(self) -> np.ndarray:
        """Direct projection ``D diag(pair_shifts) D^T`` onto the chain vectors."""
        d = self.vectors
        return (d * self.pair_shifts) @ d.T

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "coupling", "shift"] + [f"d{j}" for j in range(self.n_ee)])
            for k in range(self.length):
                w.writerow([k + 1, repr(float(self.couplings[k])), repr(float(self.shifts[k]))]
                           + [repr(float(x)) for x in self.vectors[k]])


def build_chain(n0: int, shifts) -> BlockadeChain:
    """Build the chain for ``n0`` qubits.

    Parameters
    ----------
    n0 : int
        Subset size, at least 2.
    shifts : array_like
        Either the ``n0 x n0`` symmetric shift matrix restricted to the
        subset or the ``n0(n0-1)/2`` pair shifts in lexicographic order.

    Notes
    -----
    Every new vector is orthogonalised against all previous ones (twice, for
    numerical safety).  The chain stops when the residual norm drops below
    ``BREAKDOWN_TOL * max|shift|``; equal shifts therefore give one state.
    """
    if n0 < 2:
        raise ValueError("n0 must be >= 2: a single qubit has no doubly excited states")
    arr = np.asarray(shifts, dtype=float)
    n_ee = n0 * (n0 - 1) // 2
    w = pair_values(arr) if arr.ndim == 2 else arr.ravel()
    if arr.ndim == 2 and arr.shape != (n0, n0):
        raise ValueError(f"shift matrix must be {n0}x{n0}")
    if w.size != n_ee:
        raise ValueError(f"expected {n_ee} pair shifts, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise ValueError("pair shifts must be finite")
    tol = BREAKDOWN_TOL * float(np.max(np.abs(w)))
    vecs = [np.full(n_ee, 1.0 / np.sqrt(n_ee))]
    couplings = [0.0]
    # d^(1) is uniform, so its shift is the plain mean (exact for equal shifts)
    diag = [float(w[0]) if np.all(w == w[0]) else math.fsum(w) / n_ee]
    while len(vecs) < n_ee:
        r = vecs[-1] * w
        basis = np.array(vecs)
        for _ in range(2):
            r = r - basis.T @ (basis @ r)
        norm = float(np.linalg.norm(r))
        if norm < tol or norm == 0.0:
            break
        d = r / norm
        couplings.append(2.0 * float(np.dot(vecs[-1] * d, w)))
        diag.append(float(np.dot(d * d, w)))
        vecs.append(d)
    return BlockadeChain(n0, w.copy(), np.array(vecs), np.array(couplings), np.array(diag))


def effective_shift(chain: BlockadeChain) -> float:
    """Eliminate the chain from its far end and return the effective shift of ``d^(1)``."""
    eff = float(chain.shifts[-1])
    for k in range(chain.length - 2, -1, -1):
        if eff == 0.0:
            raise SingularRecursionError(f"effective shift of chain state {k + 2} is zero", k + 2)
        eff = float(chain.shifts[k]) - chain.couplings[k + 1] ** 2 / (4.0 * eff)
    return eff


def subset_effective_shift(shift_matrix, qubits) -> float:
    """Effective shift of the subset ``qubits`` of a register's shift matrix."""
    qubits = list(qubits)
    sub = np.asarray(shift_matrix, dtype=float)[np.ix_(qubits, qubits)]
    return effective_shift(build_chain(len(qubits), sub))
