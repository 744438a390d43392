"""Command-line driver: ``sechyp-blockade <subcommand> [options]``.

Subcommands write CSV (``gates`` writes JSON) to ``--out`` or stdout.  Each
CSV starts with ``#`` comment lines holding the toolkit version, seed,
tolerances, pulse parameters and the resolved configuration.  Exit status
is 0 when every requested point was computed, 1 when some points failed
(listed on stderr) and 2 for invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any

import numpy as np
import yaml

from . import __version__
from .errmodel import RATIO_RANGE, load_or_build_table
from .experiments import (
    SHIFT_RANGES,
    SIGNS,
    parallel_map,
    random_shift_sample,
    summarize_samples,
    sweep_mode_a,
    sweep_mode_b,
    sweep_mode_c,
    transfer_error_rows,
)
from .gates import (
    GateSpec,
    SingleQubitGate,
    absorb_single_qubit_gates,
    controlled_phase_spec,
    controlled_rotation_plan,
    phase_gate_label,
    toffoli_spec,
)
from .integrator import IntegratorOptions
from .pulse import default_params

__all__ = ["ConfigError", "main", "resolve_config"]


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, dict[str, Any]] = {
    "pulse": {"omega0": 1.0, "mu": 3.0, "beta_ratio": None, "tg_ratio": 6.0},
    "transfer-error": {
        "ratios": {"start": 1.0, "stop": 5.0, "num": 81},
        "tg_ratios": [2.0, 4.0, 6.0, 8.0, 10.0],
        "rel_tol": 1e-10, "abs_tol": 1e-10,
    },
    "sweep-n": {
        "mode": "a", "n": {"start": 2, "stop": 50},
        "delta_omega": [30.0, 60.0, 120.0],
        "omega0_t2": [1e3, 1e4],
        "delta_omega_t2": [1e3, 1e4, 1e5, 1e6],
        "initial": "uniform", "full_max": 4, "lindblad_max": 8,
        "alpha": [0.9, 1.1],
        "rel_tol": 1e-10, "abs_tol": 1e-10,
    },
    "random-shifts": {
        "n": {"start": 3, "stop": 13}, "samples": 100, "seed": 0,
        "ranges": ["15-1500", "30-3000"], "sign": "positive",
        "engine": "exponential", "steps_per_pulse": 2000,
        "rel_tol": 1e-8, "abs_tol": 1e-8,
    },
    "theory-deviation": {
        "n": {"start": 3, "stop": 13}, "samples": 100, "seed": 0,
        "ranges": ["15-1500"], "sign": "positive",
        "engine": "exponential", "steps_per_pulse": 2000,
        "rel_tol": 1e-8, "abs_tol": 1e-8,
    },
    "gates": {
        "kind": "toffoli", "n": 3, "theta_pi": 1.0, "target_gamma_pi": 0.0,
        "axis": [0.0, 0.0, 1.0], "angle_pi": 1.0, "alpha_pi": 0.5,
        "spec": None, "layer": None,
    },
}


# ---------------------------------------------------------------- configuration

def _int_list(value, key) -> list[int]:
    if isinstance(value, dict):
        if set(value) - {"start", "stop", "step"}:
            raise ConfigError(f"{key}: range needs start/stop[/step]")
        return list(range(int(value["start"]), int(value["stop"]) + 1, int(value.get("step", 1))))
    if isinstance(value, (int, float)):
        return [int(value)]
    return [int(v) for v in value]


def _float_list(value, key) -> list[float]:
    if isinstance(value, dict):
        if set(value) != {"start", "stop", "num"}:
            raise ConfigError(f"{key}: grid needs start/stop/num")
        return [float(v) for v in np.linspace(float(value["start"]), float(value["stop"]), int(value["num"]))]
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in value]


def _parse_n(text: str):
    """``"5"``, ``"2,3,8"`` or ``"5:40"`` (inclusive) on the command line."""
    out = []
    for part in text.split(","):
        if ":" in part:
            a, b = part.split(":")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def resolve_config(command: str, file_cfg: dict | None, overrides: dict) -> dict:
    """Merge defaults, the config file section and command-line overrides, then validate."""
    file_cfg = file_cfg or {}
    unknown = set(file_cfg) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg = {"pulse": dict(DEFAULTS["pulse"]), **dict(DEFAULTS[command])}
    for section, target in (("pulse", cfg["pulse"]), (command, cfg)):
        given = file_cfg.get(section) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"section {section!r} must be a mapping")
        allowed = set(DEFAULTS[section])
        bad = set(given) - allowed
        if bad:
            raise ConfigError(f"unknown keys in {section!r}: {sorted(bad)}")
        target.update(given)
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    _validate(command, cfg)
    return cfg


def _validate(command: str, cfg: dict) -> None:
    pulse = cfg["pulse"]
    for key in ("omega0", "mu", "tg_ratio"):
        if not float(pulse[key]) > 0:
            raise ConfigError(f"pulse.{key} must be positive")
    if pulse["beta_ratio"] is not None and not float(pulse["beta_ratio"]) > 0:
        raise ConfigError("pulse.beta_ratio must be positive")
    if "rel_tol" in cfg and not (float(cfg["rel_tol"]) > 0 and float(cfg["abs_tol"]) > 0):
        raise ConfigError("tolerances must be positive")
    if command == "transfer-error":
        ratios = _float_list(cfg["ratios"], "ratios")
        if not ratios or min(ratios) <= 0:
            raise ConfigError("ratios must be positive (a zero drive never transfers)")
        tgs = _float_list(cfg["tg_ratios"], "tg_ratios")
        if not tgs or min(tgs) <= 0:
            raise ConfigError("tg_ratios must be positive")
    elif command == "sweep-n":
        if cfg["mode"] not in ("a", "b", "c"):
            raise ConfigError("mode must be a, b or c")
        ns = _int_list(cfg["n"], "n")
        if not ns or min(ns) < 1:
            raise ConfigError("n values must be >= 1")
        if cfg["mode"] == "a":
            if max(ns) > 50:
                raise ConfigError("mode a supports n <= 50")
            if cfg["initial"] not in ("uniform", "ghz"):
                raise ConfigError("initial must be uniform or ghz")
            if any(v == 0 for v in _float_list(cfg["delta_omega"], "delta_omega")):
                raise ConfigError("delta_omega must be nonzero")
        if cfg["mode"] == "b" and min(_float_list(cfg["omega0_t2"], "omega0_t2")) <= 0:
            raise ConfigError("omega0_t2 must be positive")
        if cfg["mode"] == "c":
            if max(ns) > 50:
                raise ConfigError("mode c supports n <= 50 (transfer table limit)")
            if min(_float_list(cfg["delta_omega_t2"], "delta_omega_t2")) <= 0:
                raise ConfigError("delta_omega_t2 must be positive")
        if len(_float_list(cfg["alpha"], "alpha")) < 1:
            raise ConfigError("alpha band needs at least one value")
    elif command in ("random-shifts", "theory-deviation"):
        ns = _int_list(cfg["n"], "n")
        if not ns or min(ns) < 2:
            raise ConfigError("n values must be >= 2")
        if command == "theory-deviation" and max(ns) > 13:
            raise ConfigError("theory-deviation supports n <= 13")
        if int(cfg["samples"]) < 1:
            raise ConfigError("samples must be >= 1")
        ranges = [cfg["ranges"]] if isinstance(cfg["ranges"], str) else list(cfg["ranges"])
        bad = [r for r in ranges if r not in SHIFT_RANGES]
        if bad:
            raise ConfigError(f"unknown shift ranges {bad}; choose from {list(SHIFT_RANGES)}")
        cfg["ranges"] = ranges
        if cfg["sign"] not in SIGNS + ("both",):
            raise ConfigError("sign must be positive, mixed or both")
        if cfg["engine"] not in ("exponential", "dopri"):
            raise ConfigError("engine must be exponential or dopri")
        if int(cfg["steps_per_pulse"]) < 1:
            raise ConfigError("steps_per_pulse must be >= 1")
    elif command == "gates":
        if cfg["kind"] not in ("toffoli", "cphase", "crotation", "absorb"):
            raise ConfigError("kind must be toffoli, cphase, crotation or absorb")
        if cfg["kind"] == "absorb" and (cfg["spec"] is None or cfg["layer"] is None):
            raise ConfigError("absorb needs 'spec' and 'layer' in the config file")
        if int(cfg["n"]) < 2 and cfg["kind"] != "absorb":
            raise ConfigError("n must be >= 2")


def _pulse(cfg):
    p = cfg["pulse"]
    return default_params(float(p["omega0"]), float(p["mu"]),
                          None if p["beta_ratio"] is None else float(p["beta_ratio"]), float(p["tg_ratio"]))


def _opts(cfg):
    return IntegratorOptions(rel_tol=float(cfg["rel_tol"]), abs_tol=float(cfg["abs_tol"]))


# ---------------------------------------------------------------- output

def _metadata(command: str, cfg: dict, seed) -> list[str]:
    p = _pulse(cfg)
    lines = [
        f"toolkit: sechyp_blockade {__version__}",
        f"command: {command}",
        f"seed: {seed}",
        "rng: numpy.random.PCG64 via SeedSequence([seed, n, sample, range, sign])",
        f"rel_tol: {cfg.get('rel_tol', '')}",
        f"abs_tol: {cfg.get('abs_tol', '')}",
        f"pulse: omega0={p.omega0!r} mu={p.mu!r} beta={p.beta!r} tg_ratio={p.tg_ratio!r} theta=pi",
        "config: " + json.dumps(cfg, sort_keys=True, default=str),
    ]
    return lines


def write_csv(stream, meta: list[str], rows: list[dict], columns: list[str] | None = None) -> None:
    for line in meta:
        stream.write(f"# {line}\n")
    columns = columns or (list(rows[0]) if rows else [])
    w = csv.DictWriter(stream, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(v) for k, v in row.items()})


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


# ---------------------------------------------------------------- commands

def cmd_transfer_error(cfg, jobs):
    p = _pulse(cfg)
    rows = transfer_error_rows(p, _float_list(cfg["ratios"], "ratios"),
                               _float_list(cfg["tg_ratios"], "tg_ratios"), _opts(cfg))
    advisory = p.mu * p.beta / p.omega0
    notes = []
    if min(_float_list(cfg["ratios"], "ratios")) < advisory:
        notes.append(f"note: ratios below mu*beta/Omega0 = {advisory:g} lie outside the adiabatic regime")
    return rows, ["ratio", "tg_ratio", "transfer_error"], [], notes


def cmd_sweep_n(cfg, jobs):
    p = _pulse(cfg)
    ns = _int_list(cfg["n"], "n")
    opts = _opts(cfg)
    alphas = _float_list(cfg["alpha"], "alpha")
    mode = cfg["mode"]
    if mode == "a":
        rows = sweep_mode_a(ns, _float_list(cfg["delta_omega"], "delta_omega"), p, cfg["initial"],
                            int(cfg["full_max"]), opts)
        return rows, None, [], []
    if mode == "b":
        band = (min(alphas), 1.0, max(alphas))
        rows, failures = sweep_mode_b(ns, _float_list(cfg["omega0_t2"], "omega0_t2"), p,
                                      int(cfg["lindblad_max"]), band, opts, jobs)
        notes = [f"note: estimate saturating for n={r['n']} at omega0_t2={r['omega0_t2']:g}"
                 for r in rows if r["saturating"]]
        return rows, None, failures, notes
    table = load_or_build_table(float(cfg["pulse"]["mu"]),
                                None if cfg["pulse"]["beta_ratio"] is None else float(cfg["pulse"]["beta_ratio"]),
                                50, np.linspace(*RATIO_RANGE, 100), jobs=jobs, opts=opts)
    rows = sweep_mode_c(ns, _float_list(cfg["delta_omega_t2"], "delta_omega_t2"), table, alphas)
    return rows, None, [], []


def _sample_tasks(cfg, seed):
    p = _pulse(cfg)
    signs = SIGNS if cfg["sign"] == "both" else (cfg["sign"],)
    tasks = []
    for sign in signs:
        for rng_name in cfg["ranges"]:
            for n in _int_list(cfg["n"], "n"):
                for s in range(int(cfg["samples"])):
                    tasks.append((n, s, seed, rng_name, sign, p, cfg["engine"], int(cfg["steps_per_pulse"]), _opts(cfg)))
    return tasks


def _run_samples(cfg, seed, jobs):
    tasks = _sample_tasks(cfg, seed)
    results = parallel_map(random_shift_sample, tasks, jobs)
    samples, failures = [], []
    for t, (res, err) in zip(tasks, results):
        if err:
            failures.append(f"n={t[0]} sample={t[1]} range={t[3]} sign={t[4]}: {err}")
        else:
            samples.append(res)
    return samples, failures


def cmd_random_shifts(cfg, jobs, seed):
    samples, failures = _run_samples(cfg, seed, jobs)
    rows = summarize_samples(samples)
    cols = ["n", "range", "sign", "samples", "eps_sim_mean", "eps_sim_std", "eps_est_mean", "eps_est_std"]
    return rows, cols, failures, []


def cmd_theory_deviation(cfg, jobs, seed):
    samples, failures = _run_samples(cfg, seed, jobs)
    rows = []
    for s in samples:
        rows.append({"kind": "sample", "n": s.n, "range": s.shift_range, "sign": s.sign, "sample": s.sample,
                     "eps_sim": s.eps_sim, "eps_est": s.eps_est,
                     "rel_dev": "" if s.eps_sim <= 0 else s.relative_deviation})
    for r in summarize_samples(samples):
        rows.append({"kind": "mean", "n": r["n"], "range": r["range"], "sign": r["sign"], "sample": r["samples"],
                     "eps_sim": r["eps_sim_mean"], "eps_est": r["eps_est_mean"], "rel_dev": r["rel_dev_mean"],
                     "abs_rel_dev": r["abs_rel_dev_mean"]})
    cols = ["kind", "n", "range", "sign", "sample", "eps_sim", "eps_est", "rel_dev", "abs_rel_dev"]
    notes = []
    if int(cfg["samples"]) < 100:
        notes.append(f"note: {cfg['samples']} samples per n (reference study used 100)")
    return rows, cols, failures, notes


def _gate_from_entry(entry) -> SingleQubitGate:
    if "matrix" in entry:
        m = np.array([[complex(*z) if isinstance(z, (list, tuple)) else complex(z) for z in row]
                      for row in entry["matrix"]])
        return SingleQubitGate.from_matrix(m)
    return SingleQubitGate.from_rotation(entry["axis"], float(entry["angle_pi"]) * math.pi,
                                         float(entry.get("alpha_pi", 0.0)) * math.pi)


def cmd_gates(cfg) -> dict:
    kind = cfg["kind"]
    n = int(cfg["n"])
    if kind == "toffoli":
        spec = toffoli_spec(n, float(cfg["target_gamma_pi"]) * math.pi)
        return {"kind": kind, "label": f"C^{n - 1}-X", "spec": spec.to_dict(), "alpha_prime_pi": 0.0,
                "single_operation": True}
    if kind == "cphase":
        theta = float(cfg["theta_pi"]) * math.pi
        spec = controlled_phase_spec(n, theta)
        return {"kind": kind, "label": phase_gate_label(n, theta), "spec": spec.to_dict(),
                "alpha_prime_pi": 0.0, "single_operation": True}
    if kind == "crotation":
        axis = np.asarray(cfg["axis"], dtype=float)
        axis = axis / np.linalg.norm(axis)
        plan = controlled_rotation_plan(axis, float(cfg["angle_pi"]) * math.pi, float(cfg["alpha_pi"]) * math.pi, n)
        return {"kind": kind, "spec": plan.spec.to_dict(), "alpha_prime_pi": plan.residual_phase / math.pi,
                "single_operation": plan.single_operation}
    spec = GateSpec.from_dict(cfg["spec"])
    layer = [_gate_from_entry(e) for e in cfg["layer"]]
    new = absorb_single_qubit_gates(layer, spec)
    return {"kind": kind, "spec_in": spec.to_dict(), "spec": new.to_dict(), "single_operation": True}


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sechyp-blockade", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, seeded=False):
        sp.add_argument("--config", help="YAML configuration file")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        sp.add_argument("--tol", type=float, help="relative and absolute integrator tolerance")
        if seeded:
            sp.add_argument("--seed", type=int, help="base seed for shift sampling")

    sp = sub.add_parser("transfer-error", help="two-level transfer error grid")
    common(sp)
    sp = sub.add_parser("sweep-n", help="gate error versus register size")
    common(sp)
    sp.add_argument("--mode", choices=["a", "b", "c"])
    sp.add_argument("--n", type=_parse_n, help="register sizes, e.g. 2:8 or 2,4,8")
    sp.add_argument("--initial", choices=["uniform", "ghz"])
    for name in ("random-shifts", "theory-deviation"):
        sp = sub.add_parser(name, help="random blockade shifts: simulation versus estimate")
        common(sp, seeded=True)
        sp.add_argument("--sign", choices=["positive", "mixed", "both"])
        sp.add_argument("--samples", type=int)
        sp.add_argument("--n", type=_parse_n)
        sp.add_argument("--engine", choices=["exponential", "dopri"])
    sp = sub.add_parser("gates", help="gate parameters as JSON")
    common(sp)
    sp.add_argument("kind", nargs="?", choices=["toffoli", "cphase", "crotation", "absorb"])
    sp.add_argument("--n", type=int)
    sp.add_argument("--theta-pi", type=float, dest="theta_pi")
    sp.add_argument("--target-gamma-pi", type=float, dest="target_gamma_pi")
    sp.add_argument("--axis", type=float, nargs=3)
    sp.add_argument("--angle-pi", type=float, dest="angle_pi")
    sp.add_argument("--alpha-pi", type=float, dest="alpha_pi")
    return parser


_OVERRIDES = ("mode", "n", "initial", "sign", "samples", "engine", "seed", "kind", "theta_pi",
              "target_gamma_pi", "axis", "angle_pi", "alpha_pi")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        file_cfg = None
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = yaml.safe_load(fh) or {}
            if not isinstance(file_cfg, dict):
                raise ConfigError("config file must be a mapping")
        overrides = {k: getattr(args, k) for k in _OVERRIDES if hasattr(args, k)}
        if args.tol is not None:
            overrides["rel_tol"] = overrides["abs_tol"] = args.tol
        cfg = resolve_config(command, file_cfg, overrides)
    except (ConfigError, OSError, yaml.YAMLError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    seed = cfg.get("seed")
    if command == "gates":
        try:
            result = cmd_gates(cfg)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        result["toolkit"] = f"sechyp_blockade {__version__}"
        text = json.dumps(result, indent=2) + "\n"
        _emit(args.out, text)
        return 0

    jobs = max(1, args.jobs)
    if command == "transfer-error":
        rows, cols, failures, notes = cmd_transfer_error(cfg, jobs)
    elif command == "sweep-n":
        rows, cols, failures, notes = cmd_sweep_n(cfg, jobs)
    elif command == "random-shifts":
        rows, cols, failures, notes = cmd_random_shifts(cfg, jobs, int(seed))
    else:
        rows, cols, failures, notes = cmd_theory_deviation(cfg, jobs, int(seed))
    buf = io.StringIO()
    write_csv(buf, _metadata(command, cfg, seed) + notes, rows, cols)
    _emit(args.out, buf.getvalue())
    for f in failures:
        print(f"failed: {f}", file=sys.stderr)
    return 1 if failures else 0


def _emit(path, text):
    if path:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
