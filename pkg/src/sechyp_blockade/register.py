"""Register configuration and random blockade-shift sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RNG_ALGORITHM",
    "RegisterConfig",
    "ShiftDistribution",
    "average_shift",
    "pair_values",
    "sample_shifts",
]

#: Bit generator used for every random draw; written into output metadata.
RNG_ALGORITHM = "numpy.random.PCG64"


def _as_shift_matrix(shifts, n: int) -> np.ndarray:
    arr = np.asarray(shifts, dtype=float)
    if arr.ndim == 0:
        mat = np.full((n, n), float(arr))
        np.fill_diagonal(mat, 0.0)
        return mat
    if arr.shape != (n, n):
        raise ValueError(f"shift matrix must be {n}x{n}, got {arr.shape}")
    off = ~np.eye(n, dtype=bool)
    a, b = arr[off], arr.T[off]
    same = (a == b) | (np.isinf(a) & np.isinf(b) & (np.sign(a) == np.sign(b)))
    if not np.all(same):
        raise ValueError("shift matrix must be symmetric")
    mat = arr.copy()
    np.fill_diagonal(mat, 0.0)
    return mat


def pair_values(matrix: np.ndarray, qubits=None) -> np.ndarray:
    """Upper-triangle entries ``matrix[q, p]`` for ``q < p`` (lexicographic pair order)."""
    if qubits is None:
        qubits = range(matrix.shape[0])
    idx = np.asarray(list(qubits), dtype=int)
    iu, ju = np.triu_indices(len(idx), k=1)
    return matrix[idx[iu], idx[ju]]


@dataclass(frozen=True)
class RegisterConfig:
    """Qubit count, blockade shifts, excited-state T2 and residence fraction.

    ``shifts`` may be a scalar (uniform shift for every pair, ``inf`` allowed)
    or a symmetric ``n x n`` matrix whose diagonal is ignored.
    """

    n: int
    shifts: object = math.inf
    t2: float = math.inf
    alpha: float = 1.0
    shift_matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.t2 > 0:
            raise ValueError("t2 must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        object.__setattr__(self, "shift_matrix", _as_shift_matrix(self.shifts, self.n))

    @property
    def pair_shifts(self) -> np.ndarray:
        return pair_values(self.shift_matrix)

    @property
    def uniform(self) -> bool:
        ps = self.pair_shifts
        return ps.size == 0 or bool(np.all(ps == ps[0]))

    @property
    def infinite_shifts(self) -> bool:
        ps = self.pair_shifts
        return bool(np.all(np.isinf(ps)))

    def blockade_margin(self, omega0: float, bandwidth: float) -> float:
        """Ratio of the smallest ``|shift|`` to the largest drive/bandwidth scale.

        Values well above one mean the register is in the blockade regime.
        """
        ps = np.abs(self.pair_shifts)
        if ps.size == 0:
            return math.inf
        drive = max(math.sqrt(2 * (self.n - 1)) * omega0, bandwidth)
        return float(ps.min() / drive)


@dataclass(frozen=True)
class ShiftDistribution:
    """Shifts with ``1/|shift|`` uniform on ``[1/max_abs, 1/min_abs]``."""

    min_abs: float
    max_abs: float
    signed: bool = False
    seed: int | None = None

    def __post_init__(self):
        if not 0 < self.min_abs < self.max_abs:
            raise ValueError("need 0 < min_abs < max_abs")

    @property
    def harmonic_mean(self) -> float:
        """Expected ``1 / <1/|shift|>`` of the distribution."""
        return 2.0 / (1.0 / self.min_abs + 1.0 / self.max_abs)


def sample_shifts(dist: ShiftDistribution, n: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw a symmetric ``n x n`` shift matrix (zero diagonal).

    Pairs are filled in lexicographic order; each pair draws ``u`` uniform on
    ``[1/max_abs, 1/min_abs]`` and then, in signed mode, a fair coin for the
    sign.  ``rng`` overrides the distribution's seed.
    """
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(dist.seed))
    iu, ju = np.triu_indices(n, k=1)
    m = iu.size
    u = rng.uniform(1.0 / dist.max_abs, 1.0 / dist.min_abs, size=m)
    vals = 1.0 / u
    if dist.signed:
        vals = np.where(rng.random(m) < 0.5, -vals, vals)
    mat = np.zeros((n, n))
    mat[iu, ju] = vals
    mat[ju, iu] = vals
    return mat


def average_shift(shifts) -> float:
    """Harmonic mean ``1 / <1/shift>`` over all pairs.

    Accepts a symmetric matrix or a flat array of pair shifts.
    """
    arr = np.asarray(shifts, dtype=float)
    vals = pair_values(arr) if arr.ndim == 2 else arr.ravel()
    if vals.size == 0:
        raise ValueError("no pairs")
    if np.any(vals == 0):
        raise ValueError("zero blockade shift")
    return float(1.0 / np.mean(1.0 / vals))
