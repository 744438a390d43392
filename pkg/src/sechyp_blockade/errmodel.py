"""Closed-form gate error estimates.

Each computational ground state with ``n0`` qubits coupled to the drive
returns to itself with an amplitude ``A(n0) = T(n0) exp(i phi)``: ``T`` is the
two-level transfer factor at Rabi frequency ``sqrt(n0) Omega`` and ``phi`` the
AC Stark phase picked up from the off-resonant doubly excited state.  The
functions here combine those amplitudes with a dephasing exponent into the
total gate error for a chosen initial state.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from . import __version__
from .blockade import SingularRecursionError, subset_effective_shift
from .dynamics.reduced import transfer_factors
from .integrator import IntegratorOptions
from .pulse import SechypParams, default_params, pulse_area_lambda
from .register import RegisterConfig, average_shift

__all__ = [
    "RATIO_RANGE",
    "TABLE_FORMAT_VERSION",
    "ErrorEstimate",
    "ExtrapolationError",
    "InitialStateSpec",
    "TransferTable",
    "amplitude_factor",
    "build_transfer_table",
    "dephasing_exponent",
    "estimate_with_arbitrary_shifts",
    "load_or_build_table",
    "sector_amplitudes",
    "total_error_general",
    "total_error_uniform",
]

RATIO_RANGE = (2.0, 10.0)
TABLE_FORMAT_VERSION = 1
MAX_SUBSET_QUBITS = 20


class ExtrapolationError(ValueError):
    """A transfer-table query fell outside the tabulated grid."""


# ---------------------------------------------------------------- transfer table

@dataclass(frozen=True)
class TransferTable:
    """Complex transfer factors on a grid of ``n0`` and ``t_g / t_fwhm``.

    ``values[i, j]`` belongs to ``n0s[i]`` and ``ratios[j]``.  Queries are
    interpolated bilinearly and refused outside the grid.
    """

    mu: float
    beta_ratio: float
    n0s: np.ndarray
    ratios: np.ndarray
    values: np.ndarray
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10

    def __post_init__(self):
        if self.values.shape != (self.n0s.size, self.ratios.size):
            raise ValueError("table shape does not match its grid")
        if np.any(np.diff(self.ratios) <= 0) or np.any(np.diff(self.n0s) <= 0):
            raise ValueError("grid axes must be strictly increasing")

    @property
    def n_max(self) -> int:
        return int(self.n0s[-1])

    def matches(self, mu: float, beta_ratio: float) -> bool:
        return math.isclose(self.mu, mu, rel_tol=1e-12) and math.isclose(self.beta_ratio, beta_ratio, rel_tol=1e-12)

    def __call__(self, n0, ratio):
        """Interpolated ``T`` at ``(n0, ratio)``; both may be arrays (broadcast)."""
        n0, ratio = np.broadcast_arrays(np.asarray(n0, dtype=float), np.asarray(ratio, dtype=float))
        out = _bilinear(self.n0s.astype(float), self.ratios, self.values, n0, ratio)
        return out[()] if out.ndim == 0 else out

    def transfer_error(self, n0, ratio):
        return 1.0 - np.abs(self(n0, ratio)) ** 2

    def save(self, path) -> None:
        """CSV with a ``#`` header block, rows ordered n0-major."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            for key, val in self._header().items():
                fh.write(f"# {key}: {val}\n")
            w = csv.writer(fh)
            w.writerow(["n0", "ratio", "re", "im"])
            for i, n0 in enumerate(self.n0s):
                for j, r in enumerate(self.ratios):
                    v = self.values[i, j]
                    w.writerow([int(n0), repr(float(r)), repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def load(cls, path) -> "TransferTable":
        header = {}
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, val = line[1:].partition(":")
                    header[key.strip()] = val.strip()
                else:
                    rows.append(line)
        if int(header.get("format_version", -1)) != TABLE_FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported table format")
        data = list(csv.DictReader(rows))
        n0s = np.array(sorted({int(r["n0"]) for r in data}))
        ratios = np.array(sorted({float(r["ratio"]) for r in data}))
        vals = np.array([complex(float(r["re"]), float(r["im"])) for r in data])
        return cls(float(header["mu"]), float(header["beta_ratio"]), n0s, ratios,
                   vals.reshape(n0s.size, ratios.size),
                   float(header.get("rel_tol", 1e-10)), float(header.get("abs_tol", 1e-10)))

    def _header(self) -> dict:
        return {
            "format_version": TABLE_FORMAT_VERSION,
            "toolkit_version": __version__,
            "mu": repr(float(self.mu)),
            "beta_ratio": repr(float(self.beta_ratio)),
            "n_max": self.n_max,
            "ratio_min": repr(float(self.ratios[0])),
            "ratio_max": repr(float(self.ratios[-1])),
            "ratio_points": self.ratios.size,
            "rel_tol": repr(float(self.rel_tol)),
            "abs_tol": repr(float(self.abs_tol)),
        }


_EDGE_SLACK = 1e-9


def _bilinear(xs, ys, vals, x, y):
    # Round-off in derived ratios must not count as extrapolation.
    x = _snap(x, xs)
    y = _snap(y, ys)
    if np.any(x < xs[0]) or np.any(x > xs[-1]) or np.any(y < ys[0]) or np.any(y > ys[-1]):
        raise ExtrapolationError(
            f"query outside table: n0 in [{xs[0]}, {xs[-1]}], ratio in [{ys[0]}, {ys[-1]}]")
    i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, max(xs.size - 2, 0))
    j = np.clip(np.searchsorted(ys, y, side="right") - 1, 0, max(ys.size - 2, 0))
    if xs.size == 1:
        u = np.zeros_like(x)
        i1 = i
    else:
        u = (x - xs[i]) / (xs[i + 1] - xs[i])
        i1 = i + 1
    if ys.size == 1:
        v = np.zeros_like(y)
        j1 = j
    else:
        v = (y - ys[j]) / (ys[j + 1] - ys[j])
        j1 = j + 1
    return ((1 - u) * (1 - v) * vals[i, j] + u * (1 - v) * vals[i1, j]
            + (1 - u) * v * vals[i, j1] + u * v * vals[i1, j1])


def _snap(x, axis):
    lo, hi = axis[0], axis[-1]
    slack = _EDGE_SLACK * max(1.0, abs(hi - lo))
    x = np.where((x < lo) & (x > lo - slack), lo, x)
    return np.where((x > hi) & (x < hi + slack), hi, x)


def _table_row(args):
    mu, beta_ratio, n_max, ratio, opts = args
    p = default_params(1.0, mu, beta_ratio, ratio)
    return transfer_factors(p, np.sqrt(np.arange(1, n_max + 1)), math.pi, opts)


def build_transfer_table(mu: float = 3.0, beta_ratio: float | None = None, n_max: int = 50,
                         grid=None, opts: IntegratorOptions | None = None, jobs: int = 1) -> TransferTable:
    """Simulate ``T(n0)`` for ``n0 = 1..n_max`` at every ratio of ``grid``.

    ``grid`` defaults to 100 equally spaced values of ``t_g / t_fwhm`` over
    ``[2, 10]``.  All ``n0`` for one ratio are integrated as a single batch;
    ``jobs > 1`` spreads ratios over worker processes.
    """
    beta_ratio = 1.0 / mu if beta_ratio is None else beta_ratio
    grid = np.linspace(*RATIO_RANGE, 100) if grid is None else np.asarray(grid, dtype=float)
    if not 1 <= n_max <= 50:
        raise ValueError("n_max must be in 1..50")
    if grid.min() < RATIO_RANGE[0] or grid.max() > RATIO_RANGE[1]:
        raise ValueError(f"grid must lie within {RATIO_RANGE}")
    opts = opts or IntegratorOptions()
    tasks = [(mu, beta_ratio, n_max, float(r), opts) for r in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            cols = list(ex.map(_table_row, tasks))
    else:
        cols = [_table_row(t) for t in tasks]
    return TransferTable(mu, beta_ratio, np.arange(1, n_max + 1), grid, np.array(cols).T,
                         opts.rel_tol, opts.abs_tol)


def default_cache_dir() -> Path:
    env = os.environ.get("SECHYP_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "sechyp_blockade"


def load_or_build_table(mu: float = 3.0, beta_ratio: float | None = None, n_max: int = 50,
                        grid=None, cache_dir=None, jobs: int = 1,
                        opts: IntegratorOptions | None = None) -> TransferTable:
    """Return a cached table for these parameters, building and storing it if needed."""
    beta_ratio = 1.0 / mu if beta_ratio is None else beta_ratio
    grid = np.linspace(*RATIO_RANGE, 100) if grid is None else np.asarray(grid, dtype=float)
    opts = opts or IntegratorOptions()
    key = repr((TABLE_FORMAT_VERSION, mu, beta_ratio, n_max, grid.tolist(), opts.rel_tol, opts.abs_tol))
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = cache / f"transfer_{digest}.csv"
    if path.exists():
        try:
            table = TransferTable.load(path)
            if table.matches(mu, beta_ratio) and table.n_max == n_max and np.allclose(table.ratios, grid):
                return table
        except (ValueError, KeyError):
            pass
    table = build_transfer_table(mu, beta_ratio, n_max, grid, opts, jobs)
    cache.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    table.save(tmp)
    tmp.replace(path)
    return table


# ---------------------------------------------------------------- amplitudes

def amplitude_factor(n0: int, T: complex, lam: float, delta_omega_eff: float) -> complex:
    """``A(n0) = T exp(i 2 (n0 - 1) Lambda / (4 delta_omega_eff))``; infinite shift gives ``T``."""
    if delta_omega_eff == 0:
        raise ValueError("effective shift must be nonzero")
    if math.isinf(delta_omega_eff):
        return complex(T)
    return complex(T) * complex(np.exp(1j * 2 * (n0 - 1) * lam / (4 * delta_omega_eff)))


def sector_amplitudes(n: int, p: SechypParams, delta_omega: float, transfer=None,
                      opts: IntegratorOptions | None = None) -> np.ndarray:
    """``A(n0)`` for ``n0 = 1..n`` with one shift for every pair.

    ``transfer`` is a :class:`TransferTable` (queried at ``p.tg_ratio``), an
    explicit array of ``T(1..n)``, or ``None`` to simulate the factors.
    """
    n0 = np.arange(1, n + 1)
    if transfer is None:
        T = transfer_factors(p, np.sqrt(n0), math.pi, opts)
    elif isinstance(transfer, TransferTable):
        if not transfer.matches(p.mu, p.beta / p.omega0):
            raise ValueError("transfer table was built for a different pulse family")
        T = transfer(n0, p.tg_ratio)
    else:
        T = np.asarray(transfer, dtype=complex)[:n]
    lam = pulse_area_lambda(p)
    if math.isinf(delta_omega):
        return np.asarray(T, dtype=complex)
    if delta_omega == 0:
        raise ValueError("delta_omega must be nonzero")
    return T * np.exp(1j * 2 * (n0 - 1) * lam / (4 * delta_omega))


def dephasing_exponent(p: SechypParams, t2: float, alpha: float = 1.0) -> float:
    """``gamma = alpha t_g / T2``; zero for infinite ``T2``."""
    if t2 <= 0:
        raise ValueError("T2 must be positive")
    return 0.0 if math.isinf(t2) else alpha * p.t_cutoff / t2


# ---------------------------------------------------------------- total errors

@dataclass(frozen=True)
class InitialStateSpec:
    """Probabilities ``P(n0)``, ``n0 = 0..n``, of finding ``n0`` drive-coupled qubits.

    ``P(0)`` belongs to the state with every qubit dark, which the gate
    should leave untouched apart from the target phase.
    """

    probabilities: np.ndarray
    kind: str = "explicit"

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("need probabilities for n0 = 0..n with n >= 1")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(math.fsum(p) - 1) > 1e-12:
            raise ValueError("probabilities must sum to 1")

    @property
    def n(self) -> int:
        return self.probabilities.size - 1

    @classmethod
    def uniform(cls, n: int) -> "InitialStateSpec":
        lb = _log_binom(int(n))
        return cls(np.exp(lb[n] - n * math.log(2)), "uniform")

    @classmethod
    def ghz(cls, n: int) -> "InitialStateSpec":
        p = np.zeros(n + 1)
        p[0] = p[n] = 0.5
        return cls(p, "ghz")

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "InitialStateSpec":
        """Aggregate ``|a|**2`` over ground states indexed by drive-coupled bit patterns."""
        a = np.asarray(amplitudes, dtype=complex)
        n = int(round(math.log2(a.size)))
        if 2 ** n != a.size:
            raise ValueError("amplitude vector length must be a power of two")
        w = np.abs(a) ** 2
        w /= w.sum()
        counts = np.array([bin(i).count("1") for i in range(a.size)])
        return cls(np.bincount(counts, weights=w, minlength=n + 1))


@dataclass(frozen=True)
class ErrorEstimate:
    epsilon_total: float
    gamma: float
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 0.0 <= self.epsilon_total <= 1.0:
            raise ValueError("epsilon_total must lie in [0, 1]")


@functools.lru_cache(maxsize=None)
def _log_binom(n: int) -> np.ndarray:
    """``table[m, k] = log C(m, k)`` for ``0 <= k <= m <= n``; ``-inf`` elsewhere."""
    m = np.arange(n + 1)[:, None]
    k = np.arange(n + 1)[None, :]
    with np.errstate(invalid="ignore"):
        table = gammaln(m + 1) - gammaln(k + 1) - gammaln(np.maximum(m - k, 0) + 1)
    table = np.where(k <= m, table, -np.inf)
    table.setflags(write=False)
    return table


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def total_error_uniform(n: int, A, gamma: float = 0.0) -> float:
    """Gate error for the even superposition of all ``2**n`` computational states.

    ``A[n0 - 1]`` is the return amplitude of a state with ``n0`` coupled
    qubits.  Coherences between two such states decay with ``e^{-2 gamma}``
    except for the share carried by qubits excited in both, which counts
    fully.  Binomials are handled in log space and the sums are compensated.
    """
    A = np.asarray(A, dtype=complex)
    if A.size != n:
        raise ValueError(f"need {n} amplitudes, got {A.size}")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    lb = _log_binom(int(n))
    ln2n = 2 * n * math.log(2)
    d1 = math.exp(-gamma)
    d2 = math.exp(-2 * gamma)
    n0 = np.arange(1, n + 1)
    terms = [math.exp(-ln2n)]
    terms.extend(np.exp(lb[n, n0] - ln2n) * 2 * d1 * A.real)
    # k = |S n S'| runs over the overlap of two coupled sets of sizes n0 and m0.
    N0, M0, K = np.meshgrid(n0, n0, np.arange(n + 1), indexing="ij")
    valid = (K >= np.maximum(N0 + M0 - n, 0)) & (K <= np.minimum(N0, M0))
    N0, M0, K = N0[valid], M0[valid], K[valid]
    logw = lb[n, N0] + lb[N0, K] + lb[n - N0, M0 - K] - ln2n
    nm = N0 * M0
    weight = (K + (nm - K) * d2) / nm
    re_aa = (A[N0 - 1] * np.conj(A[M0 - 1])).real
    terms.extend(np.exp(logw) * weight * re_aa)
    return _clamp(1.0 - math.fsum(terms))


def total_error_general(spec: InitialStateSpec, A, gamma: float = 0.0) -> float:
    """Gate error from sector probabilities; coherences between sectors decay with ``e^{-2 gamma}``."""
    P = spec.probabilities
    A = np.asarray(A, dtype=complex)
    if A.size != spec.n:
        raise ValueError(f"need {spec.n} amplitudes, got {A.size}")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    p0 = P[0]
    pa = P[1:] * A
    cross = np.outer(pa, np.conj(pa)).real
    terms = [p0 * p0]
    terms.extend(p0 * 2 * math.exp(-gamma) * pa.real)
    terms.extend(cross.ravel() * math.exp(-2 * gamma))
    return _clamp(1.0 - math.fsum(terms))


def estimate_uniform(n: int, p: SechypParams, delta_omega: float, t2: float = math.inf,
                     alpha: float = 1.0, transfer=None, initial: InitialStateSpec | None = None,
                     opts: IntegratorOptions | None = None) -> ErrorEstimate:
    """Estimate for equal shifts: even superposition by default, else ``initial``."""
    A = sector_amplitudes(n, p, delta_omega, transfer, opts)
    gamma = dephasing_exponent(p, t2, alpha)
    if initial is None or initial.kind == "uniform":
        eps = total_error_uniform(n, A, gamma)
    else:
        eps = total_error_general(initial, A, gamma)
    return ErrorEstimate(eps, gamma, A)


def estimate_with_arbitrary_shifts(cfg: RegisterConfig, p: SechypParams, transfer=None,
                                   weights=None, shortcut: bool = False,
                                   opts: IntegratorOptions | None = None) -> ErrorEstimate:
    """Estimate for a register with individual pair shifts.

    Every computational state ``S`` (the set of drive-coupled qubits) gets
    its own effective shift and amplitude ``A_S``; the states are combined
    with weights ``w_S`` (``weights[i]`` for bit pattern ``i``, qubit 0 the
    most significant bit; uniform by default).  With ``shortcut=True`` and
    positive shifts every subset uses the register's harmonic-mean shift.

    Returns
    -------
    ErrorEstimate
        ``amplitudes`` holds ``A_S`` for all ``2**n`` patterns
        (entry 0, the all-dark state, is 1).
    """
    n = cfg.n
    gamma = dephasing_exponent(p, cfg.t2, cfg.alpha)
    ps = cfg.pair_shifts
    if shortcut:
        if not np.all(ps > 0):
            raise ValueError("the average-shift shortcut needs positive shifts")
        dw = average_shift(ps) if np.all(np.isfinite(ps)) else math.inf
        A = sector_amplitudes(n, p, dw, transfer, opts)
        if weights is None:
            return ErrorEstimate(total_error_uniform(n, A, gamma), gamma, A)
        amps = _expand_by_popcount(n, A)
    else:
        if n > MAX_SUBSET_QUBITS:
            raise ValueError(f"per-subset estimate limited to n <= {MAX_SUBSET_QUBITS}")
        T = sector_amplitudes(n, p, math.inf, transfer, opts)
        lam = pulse_area_lambda(p)
        amps = np.ones(2 ** n, dtype=complex)
        for idx in range(1, 2 ** n):
            qubits = [q for q in range(n) if idx >> (n - 1 - q) & 1]
            n0 = len(qubits)
            if n0 == 1:
                amps[idx] = T[0]
                continue
            sub = cfg.shift_matrix[np.ix_(qubits, qubits)]
            if np.all(np.isinf(sub[np.triu_indices(n0, 1)])):
                amps[idx] = T[n0 - 1]
                continue
            try:
                dw = subset_effective_shift(cfg.shift_matrix, qubits)
                amps[idx] = amplitude_factor(n0, T[n0 - 1], lam, dw)
            except (SingularRecursionError, ValueError) as exc:
                raise SingularRecursionError(f"subset {qubits}: {exc}", getattr(exc, "level", 0)) from exc
    w = np.full(2 ** n, 2.0 ** -n) if weights is None else np.asarray(weights, dtype=float)
    if w.size != 2 ** n or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ValueError("weights must be 2**n non-negative numbers summing to 1")
    return ErrorEstimate(_pattern_error(n, amps, w, gamma), gamma, amps)


def _expand_by_popcount(n, A):
    counts = np.array([bin(i).count("1") for i in range(2 ** n)])
    full = np.ones(2 ** n, dtype=complex)
    full[counts > 0] = np.asarray(A)[counts[counts > 0] - 1]
    return full


def _pattern_error(n, amps, w, gamma):
    # Pair weight (k + (n0 m0 - k) e^{-2g}) / (n0 m0) splits into e^{-2g} plus
    # (1 - e^{-2g}) k / (n0 m0), and sum_{S,S'} x_S x_S'^* k / (n0 m0)
    # equals sum_q |sum_{S containing q} x_S / |S||^2.
    idx = np.arange(2 ** n)
    counts = np.array([bin(i).count("1") for i in idx])
    x = w * amps
    x[0] = 0.0
    w0 = w[0]
    d1 = math.exp(-gamma)
    d2 = math.exp(-2 * gamma)
    total = x.sum()
    per_qubit = []
    safe = np.where(counts > 0, counts, 1)
    for q in range(n):
        mask = (idx >> (n - 1 - q)) & 1 == 1
        per_qubit.append(abs(np.sum(x[mask] / safe[mask])) ** 2)
    fid = math.fsum([w0 * w0, 2 * w0 * d1 * total.real, d2 * abs(total) ** 2,
                     (1 - d2) * math.fsum(per_qubit)])
    return _clamp(1.0 - fid)

