"""Excitation-truncated product basis over the local states ``0 < 1 < e``."""

from __future__ import annotations

from functools import cached_property
from itertools import combinations

import numpy as np

__all__ = ["Basis", "LOCAL_LABELS"]

LOCAL_LABELS = "01e"
_E = 2


class Basis:
    """All configurations in ``{0, 1, e}**n`` with at most ``truncation`` excitations.

    Configurations are ordered lexicographically with ``0 < 1 < e`` and qubit
    0 the most significant position, which is the numeric order of the
    base-3 code.  The ground (computational) states therefore appear in the
    usual binary order.
    """

    def __init__(self, n: int, truncation: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        if truncation not in (0, 1, 2):
            raise ValueError("truncation must be 0, 1 or 2")
        self.n = n
        self.truncation = min(truncation, n)
        self.weights = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
        blocks = []
        for k in range(self.truncation + 1):
            free = n - k
            ground = ((np.arange(2 ** free)[:, None] >> np.arange(free - 1, -1, -1)) & 1).astype(np.int8)
            for exc in combinations(range(n), k):
                rest = [q for q in range(n) if q not in exc]
                block = np.empty((ground.shape[0], n), dtype=np.int8)
                block[:, rest] = ground
                block[:, list(exc)] = _E
                blocks.append(block)
        digits = np.concatenate(blocks)
        codes = digits.astype(np.int64) @ self.weights
        order = np.argsort(codes, kind="stable")
        self.digits = digits[order]
        self.codes = codes[order]

    def __len__(self):
        return self.codes.size

    @property
    def dim(self) -> int:
        return self.codes.size

    def __eq__(self, other):
        return isinstance(other, Basis) and self.n == other.n and self.truncation == other.truncation

    def __hash__(self):
        return hash((self.n, self.truncation))

    def index(self, codes) -> np.ndarray:
        """Positions of the given base-3 codes; raises if any is absent."""
        codes = np.asarray(codes, dtype=np.int64)
        pos = np.searchsorted(self.codes, codes)
        pos_c = np.minimum(pos, self.dim - 1)
        if np.any(self.codes[pos_c] != codes):
            raise KeyError("configuration outside the truncated basis")
        return pos_c

    def index_of(self, label: str) -> int:
        code = sum(LOCAL_LABELS.index(ch) * int(w) for ch, w in zip(label, self.weights))
        return int(self.index([code])[0])

    @cached_property
    def excited(self) -> np.ndarray:
        """Boolean ``(dim, n)`` array: qubit excited in configuration."""
        return self.digits == _E

    @cached_property
    def excitation_count(self) -> np.ndarray:
        return self.excited.sum(axis=1)

    @cached_property
    def ground_indices(self) -> np.ndarray:
        """Positions of the ``2**n`` computational states, in binary order."""
        return np.flatnonzero(self.excitation_count == 0)

    @cached_property
    def excitation_masks(self) -> np.ndarray:
        """Bitmask of excited qubits per configuration (qubit 0 is the highest bit)."""
        bits = 1 << np.arange(self.n - 1, -1, -1, dtype=np.int64)
        return self.excited.astype(np.int64) @ bits

    def labels(self) -> list[str]:
        table = np.array(list(LOCAL_LABELS))
        return ["".join(row) for row in table[self.digits]]

    def embed_ground(self, vec) -> np.ndarray:
        """Place a ``2**n`` computational-basis vector into this basis."""
        vec = np.asarray(vec, dtype=complex)
        if vec.size != 2 ** self.n:
            raise ValueError("vector length must be 2**n")
        out = np.zeros(self.dim, dtype=complex)
        out[self.ground_indices] = vec
        return out
