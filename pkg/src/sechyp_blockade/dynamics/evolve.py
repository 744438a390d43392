"""Full-register evolution (Schrodinger and Lindblad) and the gate error."""

from __future__ import annotations

import math

import numpy as np

from ..gates import GateSpec
from ..integrator import IntegratorOptions, integrate, integrate_exponential
from ..pulse import SechypParams, envelope
from ..register import RegisterConfig
from .basis import Basis
from .hamiltonian import RegisterHamiltonian, build_hamiltonian, pulse_sequence
from .state import QuantumState, StateError

__all__ = [
    "dephasing_rates",
    "evolve_lindblad",
    "evolve_schrodinger",
    "gate_error",
    "target_state",
]

ENGINES = ("dopri", "exponential")


def _hamiltonian_for(cfg, spec, state: QuantumState) -> RegisterHamiltonian:
    return build_hamiltonian(cfg, spec, state.basis)


def evolve_schrodinger(cfg: RegisterConfig, spec: GateSpec, p: SechypParams, theta: float | None,
                       psi0: QuantumState, opts: IntegratorOptions | None = None, *,
                       engine: str = "dopri", steps_per_pulse: int = 2000,
                       amplitude_scale: float = 1.0,
                       hamiltonian: RegisterHamiltonian | None = None) -> QuantumState:
    """Propagate a pure state through both pulses.

    ``engine="exponential"`` treats the diagonal blockade shifts exactly with
    a fixed-step exponential integrator (``steps_per_pulse`` steps per
    pulse); use it when shifts are much larger than the Rabi frequency.
    """
    if psi0.kind != "pure":
        raise StateError("evolve_schrodinger needs a pure state")
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    theta = spec.theta if theta is None else theta
    ham = hamiltonian or _hamiltonian_for(cfg, spec, psi0)
    y = psi0.data.copy()
    lin = -1j * ham.shift_diag
    for pulse in pulse_sequence(p, theta):
        if engine == "dopri":
            def rhs(t, v, pulse=pulse):
                return -1j * ham.apply(amplitude_scale * complex(envelope(pulse, t)), v)
            y = integrate(rhs, y, 0.0, pulse.t_cutoff, opts)
        else:
            def drive(t, v, pulse=pulse):
                return -1j * ham.drive_part(amplitude_scale * complex(envelope(pulse, t)), v)
            y = integrate_exponential(drive, lin, y, 0.0, pulse.t_cutoff, steps_per_pulse)
    return QuantumState("pure", y, psi0.basis)


_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.int64)
    out = np.zeros_like(x)
    while np.any(x):
        out += _POPCOUNT8[x & 0xFF]
        x = x >> 8
    return out


def dephasing_rates(basis: Basis, t2: float) -> np.ndarray:
    """Decay rate of every coherence ``rho[a, b]`` under independent excited-state dephasing.

    Each qubit excited in exactly one of ``a`` and ``b`` contributes ``1/T2``.
    """
    masks = basis.excitation_masks
    diff = _popcount(np.bitwise_xor.outer(masks, masks))
    return diff / t2


def evolve_lindblad(cfg: RegisterConfig, spec: GateSpec, p: SechypParams, theta: float | None,
                    rho0: QuantumState, opts: IntegratorOptions | None = None, *,
                    amplitude_scale: float = 1.0,
                    hamiltonian: RegisterHamiltonian | None = None) -> QuantumState:
    """Propagate a density matrix with per-qubit excited-state dephasing.

    The dissipator uses ``C = (|e><e| - |0><0| - |1><1|) / sqrt(2 T2)`` on
    every qubit; since ``C`` is diagonal this reduces to an elementwise decay
    of coherences (see :func:`dephasing_rates`).
    """
    rho0 = rho0.to_density()
    rho0.check()
    if not math.isfinite(cfg.t2):
        raise ValueError("evolve_lindblad needs a finite T2; use evolve_schrodinger otherwise")
    theta = spec.theta if theta is None else theta
    ham = hamiltonian or _hamiltonian_for(cfg, spec, rho0)
    dim = ham.dim
    rates = dephasing_rates(rho0.basis, cfg.t2)
    y = rho0.data.ravel().copy()
    buf = np.empty((dim, dim), dtype=complex)
    for pulse in pulse_sequence(p, theta):
        def rhs(t, v, pulse=pulse):
            rho = v.reshape(dim, dim)
            x = ham.apply(amplitude_scale * complex(envelope(pulse, t)), rho)
            x *= -1j
            out = np.add(x, x.conj().T)
            np.multiply(rates, rho, out=buf)
            out -= buf
            return out.ravel()
        y = integrate(rhs, y, 0.0, pulse.t_cutoff, opts)
    rho = y.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return QuantumState("density", rho, rho0.basis)


def target_state(psi0: QuantumState, spec: GateSpec, theta: float | None = None) -> np.ndarray:
    """``psi0`` with ``exp(i theta)`` applied to its ``|D_1 ... D_n>`` component."""
    if psi0.kind != "pure":
        raise StateError("target state needs a pure initial state")
    theta = spec.theta if theta is None else theta
    dark = psi0.basis.embed_ground(spec.dark_product())
    overlap = np.vdot(dark, psi0.data)
    return psi0.data + (np.exp(1j * theta) - 1) * overlap * dark


def gate_error(final: QuantumState, psi0: QuantumState, spec: GateSpec, theta: float | None = None) -> float:
    """``1 - <Psi_t| rho_f |Psi_t>`` with any global phase of a pure final state discounted."""
    if final.basis != psi0.basis:
        raise StateError("final and initial states live in different bases")
    tgt = target_state(psi0, spec, theta)
    if final.kind == "pure":
        fid = abs(np.vdot(tgt, final.data)) ** 2
    else:
        fid = np.vdot(tgt, final.data @ tgt).real
    return float(min(1.0, max(0.0, 1.0 - fid)))
