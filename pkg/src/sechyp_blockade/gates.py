"""Gate-parameter synthesis for the conditional-phase operation.

A :class:`GateSpec` picks, for every qubit, the bright/dark pair driven by
the two-frequency field and the phase ``theta`` applied to the product of
dark states.  Angles are radians throughout; serialised forms use units of
pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

__all__ = [
    "GateSpec",
    "RotationPlan",
    "SingleQubitGate",
    "absorb_single_qubit_gates",
    "bright_dark",
    "controlled_phase_spec",
    "controlled_rotation_plan",
    "dark_parameters",
    "drive_fields",
    "ideal_unitary",
    "phase_gate_label",
    "target_unitary",
    "toffoli_spec",
]

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _wrap(angle: float) -> float:
    """Map an angle into ``(-pi, pi]``."""
    a = math.remainder(angle, 2 * math.pi)
    return math.pi if a == -math.pi else a


@dataclass(frozen=True)
class GateSpec:
    """Per-qubit drive angles ``eta``, drive phases ``gamma`` and the conditional phase."""

    eta: tuple
    gamma: tuple
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(x) for x in self.eta))
        object.__setattr__(self, "gamma", tuple(float(x) for x in self.gamma))
        if len(self.eta) != len(self.gamma):
            raise ValueError("eta and gamma must have one entry per qubit")
        if not self.eta:
            raise ValueError("empty gate spec")

    @property
    def n(self) -> int:
        return len(self.eta)

    @classmethod
    def uniform(cls, n: int, theta: float = math.pi) -> "GateSpec":
        """Drive only ``|0> <-> |e>`` on every qubit: phase on ``|11...1>``."""
        return cls((math.pi,) * n, (0.0,) * n, theta)

    def couplings(self) -> tuple[np.ndarray, np.ndarray]:
        """Relative drive amplitudes on ``0<->e`` and ``1<->e`` for every qubit."""
        eta = np.asarray(self.eta)
        gam = np.asarray(self.gamma)
        return np.sin(eta / 2).astype(complex), np.cos(eta / 2) * np.exp(1j * gam)

    def dark_states(self) -> list[np.ndarray]:
        return [bright_dark(e, g)[1] for e, g in zip(self.eta, self.gamma)]

    def dark_product(self) -> np.ndarray:
        """``|D_1 D_2 ... D_n>`` over the ``2**n`` computational states (qubit 0 most significant)."""
        return reduce(np.kron, self.dark_states())

    def to_dict(self) -> dict:
        return {
            "eta_pi": [e / math.pi + 0.0 for e in self.eta],
            "gamma_pi": [g / math.pi + 0.0 for g in self.gamma],
            "theta_pi": self.theta / math.pi + 0.0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GateSpec":
        return cls(tuple(x * math.pi for x in d["eta_pi"]),
                   tuple(x * math.pi for x in d["gamma_pi"]),
                   d["theta_pi"] * math.pi)


@dataclass(frozen=True)
class SingleQubitGate:
    """A 2x2 unitary with its ``exp(i alpha) R_axis(angle)`` decomposition."""

    matrix: np.ndarray
    alpha: float = 0.0
    axis: tuple = (0.0, 0.0, 1.0)
    angle: float = 0.0

    @classmethod
    def from_matrix(cls, u) -> "SingleQubitGate":
        u = np.asarray(u, dtype=complex)
        if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12):
            raise ValueError("not a 2x2 unitary")
        det = np.linalg.det(u)
        alpha = 0.5 * np.angle(det)
        su = u * np.exp(-1j * alpha)
        # su = cos(a/2) I - i sin(a/2) r.sigma
        c = 0.5 * np.trace(su).real
        s_vec = np.array([(0.5j * np.trace(su @ _PAULI[k])).real for k in "XYZ"])
        s = np.linalg.norm(s_vec)
        angle = 2 * math.atan2(s, c)
        axis = tuple(s_vec / s) if s > 1e-15 else (0.0, 0.0, 1.0)
        return cls(u, float(alpha), axis, float(angle))

    @classmethod
    def from_rotation(cls, axis, angle: float, alpha: float = 0.0) -> "SingleQubitGate":
        r = np.asarray(axis, dtype=float)
        if abs(np.linalg.norm(r) - 1) > 1e-12:
            raise ValueError("rotation axis must be a unit vector")
        rs = r[0] * _PAULI["X"] + r[1] * _PAULI["Y"] + r[2] * _PAULI["Z"]
        mat = np.exp(1j * alpha) * (math.cos(angle / 2) * _PAULI["I"] - 1j * math.sin(angle / 2) * rs)
        return cls(mat, alpha, tuple(r), angle)


def drive_fields(eta: float, gamma_drive: float, omega):
    """Split a drive ``omega`` onto the ``0<->e`` and ``1<->e`` transitions."""
    return omega * math.sin(eta / 2), omega * math.cos(eta / 2) * np.exp(1j * gamma_drive)


def bright_dark(eta: float, gamma_drive: float) -> tuple[np.ndarray, np.ndarray]:
    """Bright (driven) and dark (undriven) ground-state superpositions."""
    s, c = math.sin(eta / 2), math.cos(eta / 2)
    ph = np.exp(-1j * gamma_drive)
    return np.array([s, c * ph]), np.array([c, -s * ph])


def dark_parameters(dark) -> tuple[float, float]:
    """Recover ``(eta, gamma)`` from a dark state, up to its global phase.

    Gauge: the ``|0>`` coefficient is made real and non-negative, so ``eta``
    lies in ``[0, pi]``.
    """
    d = np.asarray(dark, dtype=complex)
    d = d / np.linalg.norm(d)
    if abs(d[0]) > 1e-15:
        d = d * np.exp(-1j * np.angle(d[0]))
    eta = 2 * math.acos(min(1.0, abs(d[0])))
    if math.sin(eta / 2) < 1e-15:
        return eta, 0.0
    # d[1] = -sin(eta/2) exp(-i gamma)
    gamma = -np.angle(-d[1])
    return eta, _wrap(float(gamma))


def toffoli_spec(n: int, target_gamma: float = 0.0) -> GateSpec:
    """``n``-bit Toffoli: controls are qubits ``0..n-2``, target is the last qubit.

    The target dark state is ``(|0> - exp(-i target_gamma)|1>)/sqrt(2)``; the
    default ``target_gamma = 0`` makes it ``|->`` so the ideal operation is
    exactly C^{n-1}X.  ``target_gamma = pi`` gives ``|+>`` and C^{n-1}(-X).
    """
    if n < 2:
        raise ValueError("Toffoli needs n >= 2")
    eta = (math.pi,) * (n - 1) + (math.pi / 2,)
    gamma = (0.0,) * (n - 1) + (target_gamma,)
    return GateSpec(eta, gamma, math.pi)


def controlled_phase_spec(n: int, theta: float) -> GateSpec:
    """C^{n-1}-P(theta): phase on ``|11...1>`` (pi: Z, pi/2: S, pi/4: T)."""
    if n < 2:
        raise ValueError("controlled phase needs n >= 2")
    return GateSpec.uniform(n, theta)


def phase_gate_label(n: int, theta: float) -> str:
    names = {1.0: "Z", 0.5: "S", 0.25: "T"}
    key = round(_wrap(theta) / math.pi, 12)
    name = names.get(key, f"P({theta / math.pi:g}pi)")
    return f"C^{n - 1}-{name}" if n > 1 else name


def ideal_unitary(spec: GateSpec) -> np.ndarray:
    """``I + (exp(i theta) - 1) |D><D|`` in the computational basis."""
    d = spec.dark_product()
    dim = d.size
    return np.eye(dim, dtype=complex) + (np.exp(1j * spec.theta) - 1) * np.outer(d, d.conj())


def target_unitary(spec: GateSpec, target_index: int = -1) -> SingleQubitGate:
    """Operation on the target when every other qubit is in its dark state."""
    eta = spec.eta[target_index]
    gam = spec.gamma[target_index]
    b, d = bright_dark(eta, gam)
    mat = np.exp(1j * spec.theta) * np.outer(d, d.conj()) + np.outer(b, b.conj())
    s, c = math.sin(eta / 2), math.cos(eta / 2)
    axis = (2 * s * c * math.cos(gam), -2 * s * c * math.sin(gam), 2 * s * s - 1)
    return SingleQubitGate(mat, spec.theta / 2, axis, spec.theta)


@dataclass(frozen=True)
class RotationPlan:
    spec: GateSpec
    residual_phase: float
    single_operation: bool


def controlled_rotation_plan(r_hat, theta: float, alpha: float, n: int = 2) -> RotationPlan:
    """Parameters for C^{n-1}-[exp(i alpha) R_r(theta)].

    The phase operation itself supplies ``exp(i theta/2)``; the remainder
    ``alpha' = alpha - theta/2`` (wrapped to ``(-pi, pi]``) must be applied to
    the control dark product by a second, control-only operation unless it
    vanishes.
    """
    r = np.asarray(r_hat, dtype=float)
    if r.shape != (3,) or abs(np.linalg.norm(r) - 1) > 1e-9:
        raise ValueError("rotation axis must be a unit 3-vector")
    # r_z = -cos(eta), |r_xy| = sin(eta)
    eta = math.atan2(math.hypot(r[0], r[1]), -r[2])
    gam = -math.atan2(r[1], r[0]) if math.hypot(r[0], r[1]) > 1e-15 else 0.0
    spec = GateSpec((math.pi,) * (n - 1) + (eta,), (0.0,) * (n - 1) + (gam,), theta)
    residual = _wrap(alpha - theta / 2)
    return RotationPlan(spec, residual, abs(residual) < 1e-12)


def absorb_single_qubit_gates(pre_gates, spec: GateSpec) -> GateSpec:
    """Fold the layer ``{A_q}`` preceding the gate into its dark states.

    Returns ``spec'`` with ``|D_q'> = A_q^{-1} |D_q>`` so that
    ``U(spec) (A_1 x ... x A_n) = (A_1 x ... x A_n) U(spec')``.
    """
    gates = [g.matrix if isinstance(g, SingleQubitGate) else np.asarray(g, dtype=complex) for g in pre_gates]
    if len(gates) != spec.n:
        raise ValueError("need one single-qubit gate per qubit")
    eta, gam = [], []
    for a, d in zip(gates, spec.dark_states()):
        if a.shape != (2, 2) or not np.allclose(a.conj().T @ a, np.eye(2), atol=1e-10):
            raise ValueError("single-qubit gates must be unitary")
        e, g = dark_parameters(a.conj().T @ d)
        eta.append(e)
        gam.append(g)
    return GateSpec(tuple(eta), tuple(gam), spec.theta)
