"""Symmetric-subspace models: the isolated two-level transfer and the three-level ladder.

For equal blockade shifts a computational state with ``n0`` qubits in
``|0>`` only couples to its symmetric singly excited state ``B_e`` (Rabi
frequency ``sqrt(n0) Omega``) and, off-resonantly, to the symmetric doubly
excited state ``B_ee`` (``sqrt(2 (n0 - 1)) Omega``, detuned by the shift).
All routines here integrate many independent ladders in one batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..integrator import IntegratorOptions, integrate
from ..pulse import SechypParams, envelope
from .hamiltonian import pulse_sequence

__all__ = [
    "ReducedLadderState",
    "evolve_ladders",
    "evolve_reduced",
    "reduced_return_amplitudes",
    "transfer_factors",
    "two_level_transfer",
]


@dataclass(frozen=True)
class ReducedLadderState:
    """Final amplitudes on ``|Psi(n0)>``, ``|B_e(n0)>`` and ``|B_ee(n0)>``."""

    psi: complex
    b_e: complex
    b_ee: complex
    n0: int

    @property
    def norm(self) -> float:
        return abs(self.psi) ** 2 + abs(self.b_e) ** 2 + abs(self.b_ee) ** 2


def evolve_ladders(p: SechypParams, theta: float, g1, g2, shifts,
                   opts: IntegratorOptions | None = None, amplitude_scale: float = 1.0) -> np.ndarray:
    """Run both pulses on a batch of ladders starting in ``|Psi>``.

    ``g1`` and ``g2`` are the couplings in units of ``Omega(t)/2``; entries
    of ``shifts`` that are infinite switch the upper level off.  Returns a
    ``(m, 3)`` array of final amplitudes.
    """
    g1 = np.atleast_1d(np.asarray(g1, dtype=float))
    g2 = np.atleast_1d(np.asarray(g2, dtype=float)) * np.ones_like(g1)
    shifts = np.atleast_1d(np.asarray(shifts, dtype=float)) * np.ones_like(g1)
    off = np.isinf(shifts)
    g2 = np.where(off, 0.0, g2) * 0.5
    det = np.where(off, 0.0, shifts)
    g1 = g1 * 0.5
    m = g1.size
    y = np.zeros((m, 3), dtype=complex)
    y[:, 0] = 1.0
    y = y.ravel()
    for pulse in pulse_sequence(p, theta):
        def rhs(t, v, pulse=pulse):
            om = amplitude_scale * complex(envelope(pulse, t))
            oc = om.conjugate()
            v = v.reshape(m, 3)
            out = np.empty_like(v)
            out[:, 0] = -1j * oc * g1 * v[:, 1]
            out[:, 1] = -1j * (om * g1 * v[:, 0] + oc * g2 * v[:, 2])
            out[:, 2] = -1j * (om * g2 * v[:, 1] + det * v[:, 2])
            return out.ravel()
        y = integrate(rhs, y, 0.0, pulse.t_cutoff, opts)
    return y.reshape(m, 3)


def transfer_factors(p: SechypParams, scales, theta: float = math.pi,
                     opts: IntegratorOptions | None = None) -> np.ndarray:
    """Complex transfer factors for two-level systems driven at ``scale * Omega(t)``.

    Each factor is the final ground amplitude times ``exp(i theta)``; the
    transfer error is ``1 - |T|**2``.
    """
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    if np.any(scales < 0):
        raise ValueError("scales must be non-negative")
    y = evolve_ladders(p, theta, scales, 0.0, math.inf, opts)
    return y[:, 0] * np.exp(1j * theta)


def two_level_transfer(p: SechypParams, scale: float = 1.0, theta: float = math.pi,
                       opts: IntegratorOptions | None = None) -> complex:
    """Transfer factor of one two-level system; ``scale`` is usually ``sqrt(n0)``."""
    return complex(transfer_factors(p, [scale], theta, opts)[0])


def _ladder_couplings(n0):
    n0 = np.atleast_1d(np.asarray(n0, dtype=float))
    if np.any(n0 < 1):
        raise ValueError("n0 must be >= 1")
    return np.sqrt(n0), np.sqrt(2 * (n0 - 1))


def evolve_reduced(n0: int, p: SechypParams, delta_omega: float, theta: float = math.pi,
                   opts: IntegratorOptions | None = None) -> ReducedLadderState:
    """Evolve one ``n0`` sector through both pulses in the three-level ladder."""
    g1, g2 = _ladder_couplings(n0)
    y = evolve_ladders(p, theta, g1, g2, delta_omega, opts)[0]
    return ReducedLadderState(complex(y[0]), complex(y[1]), complex(y[2]), int(n0))


def reduced_return_amplitudes(n0s, p: SechypParams, delta_omega: float, theta: float = math.pi,
                              opts: IntegratorOptions | None = None) -> np.ndarray:
    """Final ``|Psi(n0)>`` amplitudes times ``exp(i theta)`` for every ``n0`` in ``n0s``.

    With equal shifts these play the role of the simulated ``A(n0)``.
    """
    g1, g2 = _ladder_couplings(n0s)
    y = evolve_ladders(p, theta, g1, g2, delta_omega, opts)
    return y[:, 0] * np.exp(1j * theta)
