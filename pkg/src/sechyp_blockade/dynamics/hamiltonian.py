"""Matrix-free register Hamiltonian for the two-frequency sechyp drive.

``H(t) = (Omega(t)/2) K + (Omega(t)*/2) K^dagger + S`` where ``K`` raises a
qubit from its bright combination of ``|0>, |1>`` to ``|e>`` and ``S`` is the
diagonal blockade shift of doubly excited configurations.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..gates import GateSpec
from ..pulse import SechypParams, second_pulse
from ..register import RegisterConfig
from .basis import Basis

__all__ = ["ConfigurationError", "RegisterHamiltonian", "build_hamiltonian", "choose_truncation", "pulse_sequence"]

_ZERO = 1e-15


class ConfigurationError(ValueError):
    pass


def choose_truncation(cfg: RegisterConfig) -> int:
    """One excitation for infinite shifts, two for finite ones."""
    ps = cfg.pair_shifts
    if ps.size == 0 or np.all(np.isinf(ps)):
        return 1
    if np.any(np.isinf(ps)):
        raise ConfigurationError("mixed finite and infinite shifts are not supported")
    return 2


def pulse_sequence(p: SechypParams, theta: float) -> tuple[SechypParams, SechypParams]:
    """Exciting pulse and de-exciting pulse (phase advanced by ``pi + theta``)."""
    return p, second_pulse(p, theta)


class RegisterHamiltonian:
    """Sparse pieces of ``H(t)``; apply with :meth:`apply` or materialise with :meth:`dense`."""

    def __init__(self, basis: Basis, raise_op: sp.csr_matrix, shift_diag: np.ndarray):
        self.basis = basis
        self.raise_op = raise_op
        self.lower_op = raise_op.conj().T.tocsr()
        self.shift_diag = shift_diag
        self.has_shifts = bool(np.any(shift_diag))

    @property
    def dim(self) -> int:
        return self.basis.dim

    def drive_part(self, omega: complex, psi: np.ndarray) -> np.ndarray:
        out = self.raise_op @ psi
        out *= 0.5 * omega
        low = self.lower_op @ psi
        low *= 0.5 * np.conj(omega)
        out += low
        return out

    def apply(self, omega: complex, psi: np.ndarray) -> np.ndarray:
        """``H psi`` for drive value ``omega``; ``psi`` may be a vector or a matrix."""
        out = self.drive_part(omega, psi)
        if not self.has_shifts:
            return out
        if psi.ndim == 1:
            out += self.shift_diag * psi
        else:
            out += self.shift_diag[:, None] * psi
        return out

    def dense(self, omega: complex) -> np.ndarray:
        h = 0.5 * omega * self.raise_op + 0.5 * np.conj(omega) * self.lower_op
        return h.toarray() + np.diag(self.shift_diag)


def _shift_diagonal(basis: Basis, shift_matrix: np.ndarray) -> np.ndarray:
    diag = np.zeros(basis.dim)
    if basis.truncation < 2:
        return diag
    doubles = np.flatnonzero(basis.excitation_count == 2)
    qp = np.nonzero(basis.excited[doubles])[1].reshape(-1, 2)
    diag[doubles] = shift_matrix[qp[:, 0], qp[:, 1]]
    return diag


def build_hamiltonian(cfg: RegisterConfig, spec: GateSpec, basis: Basis | None = None) -> RegisterHamiltonian:
    """Assemble the register Hamiltonian for ``cfg`` driven according to ``spec``.

    The pulse itself enters only at application time through ``Omega(t)``,
    so one object serves both pulses.
    """
    if spec.n != cfg.n:
        raise ConfigurationError("gate spec and register disagree on the qubit count")
    needed = choose_truncation(cfg)
    if basis is None:
        basis = Basis(cfg.n, needed)
    if basis.truncation < needed and cfg.n > 1:
        raise ConfigurationError("finite blockade shifts need two-excitation truncation")
    if basis.truncation >= 2 and needed < 2 and cfg.n > 1:
        raise ConfigurationError("infinite shifts cannot be placed on doubly excited states")
    c0, c1 = spec.couplings()
    rows, cols, vals = [], [], []
    for q in range(cfg.n):
        w = int(basis.weights[q])
        excited = np.flatnonzero(basis.excited[:, q])
        if excited.size == 0:
            continue
        for shift, coef in ((2 * w, c0[q]), (w, c1[q])):
            if abs(coef) < _ZERO:
                continue
            partners = basis.index(basis.codes[excited] - shift)
            rows.append(excited)
            cols.append(partners)
            vals.append(np.full(excited.size, coef, dtype=complex))
    if rows:
        raise_op = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(basis.dim, basis.dim))
    else:
        raise_op = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    return RegisterHamiltonian(basis, raise_op, _shift_diagonal(basis, cfg.shift_matrix))

