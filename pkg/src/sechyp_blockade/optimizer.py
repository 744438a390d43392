"""Choose the drive strength and pulse cutoff that minimise the estimated gate error.

Small ``Omega0`` keeps the AC Stark phase low but lengthens the gate and
with it the dephasing; large ``Omega0`` does the opposite.  The optimum is
found with a multi-start Nelder-Mead search over ``(log Omega0, t_g/t_fwhm)``
in units where the blockade shift is 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errmodel import RATIO_RANGE, TransferTable, sector_amplitudes, total_error_uniform
from .pulse import default_params

__all__ = [
    "MAX_OMEGA0",
    "NelderMeadOptions",
    "NelderMeadResult",
    "OptimizeResult",
    "gate_error_objective",
    "nelder_mead",
    "optimize_gate_params",
]


@dataclass(frozen=True)
class NelderMeadOptions:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    xtol: float = 1e-6
    max_evals: int = 2000
    initial_step: float = 0.1


@dataclass(frozen=True)
class NelderMeadResult:
    x: np.ndarray
    fun: float
    evaluations: int
    converged: bool
    message: str


def nelder_mead(f: Callable[[np.ndarray], float], x0, options: NelderMeadOptions | None = None) -> NelderMeadResult:
    """Minimise ``f`` with the downhill simplex method.

    The initial simplex offsets each coordinate of ``x0`` by
    ``initial_step`` (relative for nonzero coordinates).  Stops when every
    vertex lies within ``xtol`` (relative to ``max(1, |x_best|)``) of the
    best vertex, or after ``max_evals`` evaluations.  A NaN objective value
    stops the search and returns the best point seen so far.
    """
    opt = options or NelderMeadOptions()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    k = x0.size
    evals = 0
    best = [x0.copy(), math.inf]

    class _Abort(Exception):
        pass

    def fx(x):
        nonlocal evals
        evals += 1
        v = float(f(x))
        if math.isnan(v):
            raise _Abort
        if v < best[1]:
            best[0], best[1] = x.copy(), v
        return v

    try:
        f0 = fx(x0)
    except _Abort:
        raise ValueError("objective is NaN at the starting point") from None
    simplex = [x0]
    values = [f0]
    for i in range(k):
        x = x0.copy()
        x[i] = x[i] * (1 + opt.initial_step) if x[i] != 0 else opt.initial_step
        simplex.append(x)
    try:
        values += [fx(x) for x in simplex[1:]]
        simplex = np.array(simplex)
        values = np.array(values)
        while True:
            order = np.argsort(values, kind="stable")
            simplex, values = simplex[order], values[order]
            size = np.max(np.abs(simplex[1:] - simplex[0]))
            if size <= opt.xtol * max(1.0, np.max(np.abs(simplex[0]))):
                return NelderMeadResult(simplex[0].copy(), float(values[0]), evals, True, "simplex converged")
            if evals >= opt.max_evals:
                return NelderMeadResult(simplex[0].copy(), float(values[0]), evals, False, "evaluation budget exhausted")
            centroid = simplex[:-1].mean(axis=0)
            worst = simplex[-1]
            xr = centroid + opt.reflection * (centroid - worst)
            fr = fx(xr)
            if fr < values[0]:
                xe = centroid + opt.expansion * (xr - centroid)
                fe = fx(xe)
                if fe < fr:
                    simplex[-1], values[-1] = xe, fe
                else:
                    simplex[-1], values[-1] = xr, fr
                continue
            if fr < values[-2]:
                simplex[-1], values[-1] = xr, fr
                continue
            if fr < values[-1]:
                xc = centroid + opt.contraction * (xr - centroid)
                fc = fx(xc)
                if fc <= fr:
                    simplex[-1], values[-1] = xc, fc
                    continue
            else:
                xc = centroid + opt.contraction * (worst - centroid)
                fc = fx(xc)
                if fc < values[-1]:
                    simplex[-1], values[-1] = xc, fc
                    continue
            for i in range(1, k + 1):
                simplex[i] = simplex[0] + opt.shrink * (simplex[i] - simplex[0])
                values[i] = fx(simplex[i])
    except _Abort:
        return NelderMeadResult(best[0], best[1], evals, False, "objective returned NaN")


@dataclass(frozen=True)
class OptimizeResult:
    """Optimal drive for one register size and ``delta_omega * T2``.

    ``omega0_opt`` is in units of the blockade shift.
    """

    n: int
    delta_omega_t2: float
    omega0_opt: float
    tg_ratio_opt: float
    epsilon_min: float
    evaluations: int
    start_values: tuple = ()


_PENALTY = 10.0
# Above this drive strength (in shift units) the AC phase is no longer a
# small perturbation and the closed-form estimate develops spurious minima
# from phase wrap-around.
MAX_OMEGA0 = 0.25


def gate_error_objective(n: int, delta_omega_t2: float, table: TransferTable, alpha: float = 1.0,
                         max_omega0: float = MAX_OMEGA0):
    """Objective over ``(log Omega0, ratio)`` in units where the blockade shift is 1.

    Points outside ``ratio in table domain`` or ``Omega0 <= max_omega0``
    return a large finite penalty growing with the distance to the boundary.
    """
    lo, hi = float(table.ratios[0]), float(table.ratios[-1])
    t2 = float(delta_omega_t2)
    log_max = math.log(max_omega0)

    def objective(x) -> float:
        log_om, ratio = float(x[0]), float(x[1])
        if not lo <= ratio <= hi:
            return _PENALTY + abs(ratio - min(max(ratio, lo), hi))
        if not -30 < log_om <= log_max:
            return _PENALTY + abs(log_om - min(max(log_om, -30), log_max))
        p = default_params(math.exp(log_om), table.mu, table.beta_ratio, ratio)
        A = sector_amplitudes(n, p, 1.0, table)
        return total_error_uniform(n, A, alpha * p.t_cutoff / t2)

    return objective


def _default_starts(delta_omega_t2: float) -> list[tuple[float, float]]:
    # Balance of AC phase (~Omega0/dw) and dephasing (~1/(Omega0 T2)) in shift units.
    guess = min((1.0 / delta_omega_t2) ** (1.0 / 3.0), 0.5 * MAX_OMEGA0)
    return [(math.log(guess * s), r) for s in (0.5, 2.0) for r in (4.0, 7.0)]


def _run_start(args):
    n, dwt2, table, alpha, start, options, max_omega0 = args
    obj = gate_error_objective(n, dwt2, table, alpha, max_omega0)
    return obj(np.array(start)), nelder_mead(obj, start, options)


def optimize_gate_params(n: int, delta_omega_t2: float, table: TransferTable, *, alpha: float = 1.0,
                         starts: Sequence[tuple[float, float]] | None = None,
                         options: NelderMeadOptions | None = None, jobs: int = 1,
                         max_omega0: float = MAX_OMEGA0) -> OptimizeResult:
    """Minimise the estimated error of an ``n``-qubit gate over ``Omega0`` and ``t_g/t_fwhm``.

    Parameters
    ----------
    n : int
        Register size; must be covered by ``table``.
    delta_omega_t2 : float
        Product of blockade shift and excited-state coherence time.
    table : TransferTable
        Transfer factors for the pulse family in use.
    starts : sequence of (log Omega0, ratio), optional
        Starting points; by default four points around the analytic balance
        of AC and dephasing errors.
    """
    if n < 1 or n > table.n_max:
        raise ValueError(f"table covers n0 up to {table.n_max}, got n={n}")
    if delta_omega_t2 <= 0:
        raise ValueError("delta_omega_t2 must be positive")
    if table.ratios[0] < RATIO_RANGE[0] or table.ratios[-1] > RATIO_RANGE[1]:
        raise ValueError("transfer table lies outside the supported ratio domain")
    starts = list(starts) if starts is not None else _default_starts(delta_omega_t2)
    if len(starts) < 1:
        raise ValueError("need at least one starting point")
    tasks = [(n, delta_omega_t2, table, alpha, tuple(s), options, max_omega0) for s in starts]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            runs = list(ex.map(_run_start, tasks))
    else:
        runs = [_run_start(t) for t in tasks]
    start_vals = tuple(float(v) for v, _ in runs)
    best = min((r for _, r in runs), key=lambda r: r.fun)
    evals = sum(r.evaluations for _, r in runs)
    return OptimizeResult(n, float(delta_omega_t2), math.exp(best.x[0]), float(best.x[1]),
                          float(best.fun), evals, start_vals)
