"""Pure and mixed register states over a truncated basis."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .basis import Basis

__all__ = ["QuantumState", "StateError"]


class StateError(ValueError):
    pass


@dataclass
class QuantumState:
    """State vector (``kind == "pure"``) or density matrix (``kind == "density"``)."""

    kind: str
    data: np.ndarray
    basis: Basis

    def __post_init__(self):
        if self.kind not in ("pure", "density"):
            raise StateError(f"unknown state kind {self.kind!r}")
        self.data = np.asarray(self.data, dtype=complex)
        shape = (self.basis.dim,) if self.kind == "pure" else (self.basis.dim, self.basis.dim)
        if self.data.shape != shape:
            raise StateError(f"expected shape {shape}, got {self.data.shape}")

    @property
    def truncation(self) -> int:
        return self.basis.truncation

    @classmethod
    def from_ground(cls, vec, basis: Basis) -> "QuantumState":
        vec = np.asarray(vec, dtype=complex)
        return cls("pure", basis.embed_ground(vec / np.linalg.norm(vec)), basis)

    @classmethod
    def uniform_superposition(cls, basis: Basis) -> "QuantumState":
        return cls.from_ground(np.ones(2 ** basis.n), basis)

    @classmethod
    def ghz(cls, basis: Basis) -> "QuantumState":
        vec = np.zeros(2 ** basis.n)
        vec[0] = vec[-1] = 1
        return cls.from_ground(vec, basis)

    def norm(self) -> float:
        if self.kind == "pure":
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)

    def to_density(self) -> "QuantumState":
        if self.kind == "density":
            return self
        return QuantumState("density", np.outer(self.data, self.data.conj()), self.basis)

    def check(self, tol: float = 1e-6, eig_tol: float = 1e-8) -> None:
        """Raise :class:`StateError` unless the state is normalised (and positive)."""
        if abs(self.norm() - 1) > tol:
            raise StateError(f"state norm/trace {self.norm()} differs from 1")
        if self.kind == "density":
            rho = self.data
            if not np.allclose(rho, rho.conj().T, atol=tol):
                raise StateError("density matrix is not Hermitian")
            if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -eig_tol:
                raise StateError("density matrix has negative eigenvalues")

    def populations(self) -> np.ndarray:
        if self.kind == "pure":
            return np.abs(self.data) ** 2
        return np.diag(self.data).real.copy()

    def dump_csv(self, path) -> None:
        """Write basis labels with complex amplitudes (pure) or diagonal populations."""
        labels = self.basis.labels()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            if self.kind == "pure":
                w.writerow(["label", "re", "im"])
                for lab, a in zip(labels, self.data):
                    w.writerow([lab, repr(float(a.real)), repr(float(a.imag))])
            else:
                w.writerow(["label", "population"])
                for lab, pop in zip(labels, self.populations()):
                    w.writerow([lab, repr(float(pop))])
