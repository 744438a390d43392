"""Row generators for the sweeps driven by the command line.

Every function returns plain dictionaries (one per output row) so that the
CLI only has to validate configuration, dispatch work and write CSV.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    Basis,
    QuantumState,
    build_hamiltonian,
    evolve_lindblad,
    evolve_schrodinger,
    gate_error,
    reduced_return_amplitudes,
    transfer_factors,
)
from .errmodel import (
    InitialStateSpec,
    estimate_with_arbitrary_shifts,
    sector_amplitudes,
    total_error_general,
    total_error_uniform,
)
from .gates import GateSpec
from .integrator import IntegratorOptions
from .optimizer import optimize_gate_params
from .pulse import SechypParams, default_params
from .register import RegisterConfig, ShiftDistribution, average_shift, sample_shifts

__all__ = [
    "SHIFT_RANGES",
    "ShiftSample",
    "initial_spec",
    "lindblad_error",
    "parallel_map",
    "random_shift_sample",
    "summarize_samples",
    "sweep_mode_a",
    "sweep_mode_b",
    "sweep_mode_c",
    "transfer_error_rows",
    "uniform_reference",
]

# Shift ranges in units of Omega0; harmonic means ~30 and ~60.
SHIFT_RANGES = {"15-1500": (15.0, 1500.0), "30-3000": (30.0, 3000.0)}
SIGNS = ("positive", "mixed")


def parallel_map(fn, tasks, jobs: int = 1):
    """Ordered map that returns ``(result, None)`` or ``(None, error)`` per task."""
    tasks = list(tasks)
    if jobs <= 1:
        return [_guarded(fn, t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_guarded, [fn] * len(tasks), tasks))


def _guarded(fn, task):
    try:
        return fn(task), None
    except Exception as exc:  # reported per point by the caller
        return None, f"{type(exc).__name__}: {exc}"


def initial_spec(kind: str, n: int) -> InitialStateSpec:
    if kind == "uniform":
        return InitialStateSpec.uniform(n)
    if kind == "ghz":
        return InitialStateSpec.ghz(n)
    raise ValueError(f"unknown initial state {kind!r}")


# ---------------------------------------------------------------- transfer error

def transfer_error_rows(p: SechypParams, ratios, tg_ratios, opts: IntegratorOptions | None = None):
    """``1 - |T|**2`` on a grid of peak-amplitude ratios and cutoff ratios.

    ``ratios`` scale the drive amplitude relative to ``p.omega0``; the pulse
    width (``beta``) stays that of ``p``.
    """
    ratios = np.asarray(ratios, dtype=float)
    rows = []
    for tg in tg_ratios:
        q = SechypParams(p.omega0, p.mu, p.beta, tg * p.t_fwhm, p.phase_offset)
        T = transfer_factors(q, ratios, math.pi, opts)
        for r, t in zip(ratios, T):
            rows.append({"ratio": float(r), "tg_ratio": float(tg), "transfer_error": float(1 - abs(t) ** 2)})
    return rows


# ---------------------------------------------------------------- sweeps over n

def _full_mode_a(n, p, delta_omega, initial, opts):
    cfg = RegisterConfig(n, delta_omega)
    spec = GateSpec.uniform(n)
    basis = Basis(n, 2 if math.isfinite(delta_omega) else 1)
    psi = _initial_state(initial, basis)
    final = evolve_schrodinger(cfg, spec, p, None, psi, opts)
    return gate_error(final, psi, spec)


def _initial_state(kind, basis):
    if kind == "uniform":
        return QuantumState.uniform_superposition(basis)
    if kind == "ghz":
        return QuantumState.ghz(basis)
    raise ValueError(f"unknown initial state {kind!r}")


def sweep_mode_a(ns, delta_omegas, p: SechypParams, initial: str = "uniform", full_max: int = 4,
                 opts: IntegratorOptions | None = None):
    """Transfer and AC Stark errors with equal shifts (no dephasing).

    ``eps_sim`` combines simulated ladder amplitudes; ``eps_est`` uses the
    two-level transfer factor with the perturbative AC phase.  For
    ``n <= full_max`` the full register is also simulated.
    """
    ns = sorted(int(n) for n in ns)
    n_max = ns[-1]
    n0 = np.arange(1, n_max + 1)
    T = transfer_factors(p, np.sqrt(n0), math.pi, opts)
    rows = []
    for dw in delta_omegas:
        a_sim = reduced_return_amplitudes(n0, p, dw, math.pi, opts)
        a_est = sector_amplitudes(n_max, p, dw, T)
        for n in ns:
            spec = initial_spec(initial, n)
            row = {
                "n": n,
                "delta_omega": float(dw),
                "initial": initial,
                "eps_sim": total_error_general(spec, a_sim[:n]),
                "eps_est": total_error_general(spec, a_est[:n]),
            }
            if n <= full_max:
                full = _full_mode_a(n, p, dw, initial, opts)
                row["eps_full"] = full
                row["full_minus_reduced"] = full - row["eps_sim"]
            else:
                row["eps_full"] = ""
                row["full_minus_reduced"] = ""
            rows.append(row)
    return rows


def lindblad_error(n: int, p: SechypParams, t2: float, opts: IntegratorOptions | None = None) -> float:
    """Simulated uniform-superposition gate error with infinite shifts and finite ``T2``."""
    cfg = RegisterConfig(n, math.inf, t2=t2)
    spec = GateSpec.uniform(n)
    basis = Basis(n, 1)
    psi = QuantumState.uniform_superposition(basis)
    final = evolve_lindblad(cfg, spec, p, None, psi, opts)
    return gate_error(final, psi, spec)


def _lindblad_task(args):
    n, p, t2, opts = args
    return lindblad_error(n, p, t2, opts)


def sweep_mode_b(ns, omega0_t2s, p: SechypParams, lindblad_max: int = 8, alphas=(0.9, 1.0, 1.1),
                 opts: IntegratorOptions | None = None, jobs: int = 1, saturation_tol: float = 0.05):
    """Transfer and dephasing errors with infinite shifts.

    Returns ``(rows, failures)``.  Simulation runs only for
    ``n <= lindblad_max``; the estimate band uses ``alphas``.  Rows with
    ``n >= 10`` whose central estimate changed by less than
    ``saturation_tol`` (relative) from ``n - 1`` are flagged as saturating.
    """
    ns = sorted(int(n) for n in ns)
    n0 = np.arange(1, ns[-1] + 1)
    T = transfer_factors(p, np.sqrt(n0), math.pi, opts)
    tasks = [(n, p, x / p.omega0, opts) for x in omega0_t2s for n in ns if n <= lindblad_max]
    sims = dict(zip([(t[0], t[2]) for t in tasks], parallel_map(_lindblad_task, tasks, jobs)))
    rows, failures = [], []
    lo_a, mid_a, hi_a = min(alphas), sorted(alphas)[len(alphas) // 2], max(alphas)
    for x in omega0_t2s:
        t2 = x / p.omega0
        prev = None
        for n in ns:
            A = T[:n]
            est = {a: total_error_uniform(n, A, a * p.t_cutoff / t2) for a in (lo_a, mid_a, hi_a)}
            sim = ""
            if (n, t2) in sims:
                val, err = sims[(n, t2)]
                if err:
                    failures.append(f"mode b n={n} omega0_t2={x}: {err}")
                else:
                    sim = val
            sat = int(n >= 10 and prev is not None and abs(est[mid_a] - prev) <= saturation_tol * est[mid_a])
            rows.append({
                "n": n, "omega0_t2": float(x), "eps_sim": sim,
                "eps_est": est[mid_a], "eps_est_lo": est[lo_a], "eps_est_hi": est[hi_a],
                "in_band": "" if sim == "" else int(est[lo_a] <= sim <= est[hi_a]),
                "saturating": sat,
            })
            prev = est[mid_a]
    return rows, failures


def sweep_mode_c(ns, delta_omega_t2s, table, alphas=(0.9, 1.1), jobs: int = 1):
    """Optimised ``Omega0`` and cutoff for every ``n`` and ``delta_omega * T2`` (estimate only)."""
    rows = []
    for x in delta_omega_t2s:
        for n in ns:
            res = optimize_gate_params(int(n), float(x), table, jobs=jobs)
            p = default_params(res.omega0_opt, table.mu, table.beta_ratio, res.tg_ratio_opt)
            A = sector_amplitudes(int(n), p, 1.0, table)
            band = [total_error_uniform(int(n), A, a * p.t_cutoff / x) for a in alphas]
            rows.append({
                "n": int(n), "delta_omega_t2": float(x),
                "omega0_opt": res.omega0_opt, "tg_ratio_opt": res.tg_ratio_opt,
                "eps_min": res.epsilon_min, "eps_lo": min(band), "eps_hi": max(band),
                "evaluations": res.evaluations,
            })
    return rows


# ---------------------------------------------------------------- random shifts

@dataclass(frozen=True)
class ShiftSample:
    n: int
    sample: int
    shift_range: str
    sign: str
    eps_sim: float
    eps_est: float
    delta_omega_avg: float

    @property
    def relative_deviation(self) -> float:
        return (self.eps_est - self.eps_sim) / self.eps_sim if self.eps_sim > 0 else math.nan


def sample_rng(seed: int, n: int, sample: int, shift_range: str, sign: str) -> np.random.Generator:
    """Independent stream per ``(seed, n, sample, range, sign)``; order-independent."""
    key = [int(seed), int(n), int(sample), list(SHIFT_RANGES).index(shift_range), SIGNS.index(sign)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def random_shift_sample(args) -> ShiftSample:
    """Simulate and estimate one random shift configuration.

    ``args = (n, sample, seed, shift_range, sign, p, engine, steps, opts)``.
    """
    n, sample, seed, shift_range, sign, p, engine, steps, opts = args
    lo, hi = SHIFT_RANGES[shift_range]
    dist = ShiftDistribution(lo * p.omega0, hi * p.omega0, signed=(sign == "mixed"))
    shifts = sample_shifts(dist, n, sample_rng(seed, n, sample, shift_range, sign))
    cfg = RegisterConfig(n, shifts)
    spec = GateSpec.uniform(n)
    basis = Basis(n, 2)
    psi = QuantumState.uniform_superposition(basis)
    ham = build_hamiltonian(cfg, spec, basis)
    final = evolve_schrodinger(cfg, spec, p, None, psi, opts, engine=engine,
                               steps_per_pulse=steps, hamiltonian=ham)
    eps_sim = gate_error(final, psi, spec)
    eps_est = estimate_with_arbitrary_shifts(cfg, p, opts=opts).epsilon_total
    return ShiftSample(n, sample, shift_range, sign, eps_sim, eps_est, average_shift(shifts))


def summarize_samples(samples):
    """Per ``(n, range, sign)`` means and standard deviations; zero-error samples skip the relative statistics."""
    groups = {}
    for s in samples:
        groups.setdefault((s.n, s.shift_range, s.sign), []).append(s)
    rows = []
    for (n, rng_name, sign), ss in sorted(groups.items(), key=lambda kv: (SIGNS.index(kv[0][2]), kv[0][1], kv[0][0])):
        es = np.array([s.eps_sim for s in ss])
        et = np.array([s.eps_est for s in ss])
        rel = np.array([s.relative_deviation for s in ss if s.eps_sim > 0])
        rows.append({
            "n": n, "range": rng_name, "sign": sign, "samples": len(ss),
            "eps_sim_mean": float(es.mean()), "eps_sim_std": float(es.std(ddof=1)) if len(ss) > 1 else 0.0,
            "eps_est_mean": float(et.mean()), "eps_est_std": float(et.std(ddof=1)) if len(ss) > 1 else 0.0,
            "rel_dev_mean": float(rel.mean()) if rel.size else math.nan,
            "abs_rel_dev_mean": float(np.abs(rel).mean()) if rel.size else math.nan,
        })
    return rows


def uniform_reference(n: int, p: SechypParams, delta_omega_avg: float, opts: IntegratorOptions | None = None) -> float:
    """Equal-shift estimate at the average shift (the positive-shift shortcut)."""
    return total_error_uniform(n, sector_amplitudes(n, p, delta_omega_avg, None, opts))

