"""Complex hyperbolic secant (sechyp) pulses.

All quantities are in angular-frequency units with the peak Rabi frequency
``omega0`` setting the scale (``omega0 = 1`` by default).  The chirp lives
entirely in the complex phase of the drive; there is no separate detuning
term in any Hamiltonian built from these pulses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "FWHM_FACTOR",
    "PulseDomainError",
    "SechypParams",
    "default_params",
    "derived_widths",
    "envelope",
    "instantaneous_detuning",
    "log_sech",
    "pulse_area_lambda",
    "second_pulse",
]

#: ``t_fwhm * beta`` for the intensity profile ``sech(beta t)**2``.
FWHM_FACTOR = 2.0 * math.log(1.0 + math.sqrt(2.0))

# Stage times of an RK step may land an ulp or so outside [0, t_g].
_EDGE_SLACK = 1e-10


class PulseDomainError(ValueError):
    """Raised when a pulse is evaluated outside ``[0, t_cutoff]``."""


@dataclass(frozen=True)
class SechypParams:
    """Parameters of one sechyp pulse.

    Attributes
    ----------
    omega0 : float
        Peak Rabi frequency.
    mu : float
        Dimensionless sweep parameter.
    beta : float
        Rate parameter (angular frequency).
    t_cutoff : float
        Pulse duration ``t_g``; the pulse is centred at ``t_g / 2``.
    phase_offset : float
        Constant phase added to the drive, radians.
    """

    omega0: float
    mu: float
    beta: float
    t_cutoff: float
    phase_offset: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.t_cutoff > 0:
            raise ValueError(f"t_cutoff must be positive, got {self.t_cutoff}")

    @property
    def robust(self) -> bool:
        """True inside the regime where the transfer is insensitive to the Rabi frequency."""
        return self.omega0 >= self.mu * self.beta * (1 - 1e-12) and self.mu >= 2

    @property
    def t_fwhm(self) -> float:
        return FWHM_FACTOR / self.beta

    @property
    def tg_ratio(self) -> float:
        return self.t_cutoff / self.t_fwhm

    def scaled(self, factor: float) -> "SechypParams":
        """Same pulse shape with the amplitude multiplied by ``factor``."""
        return replace(self, omega0=self.omega0 * factor)


def default_params(omega0: float = 1.0, mu: float = 3.0, beta_ratio: float | None = None,
                   tg_ratio: float = 6.0, phase_offset: float = 0.0) -> SechypParams:
    """Build a pulse from dimensionless ratios.

    ``beta_ratio`` is ``beta / omega0`` and defaults to ``1 / mu``;
    ``tg_ratio`` is ``t_cutoff / t_fwhm``.
    """
    if beta_ratio is None:
        beta_ratio = 1.0 / mu
    beta = beta_ratio * omega0
    return SechypParams(omega0=omega0, mu=mu, beta=beta,
                        t_cutoff=tg_ratio * FWHM_FACTOR / beta, phase_offset=phase_offset)


def log_sech(x):
    """``log(sech(x))`` without overflow for large ``|x|``."""
    ax = np.abs(x)
    return math.log(2.0) - ax - np.log1p(np.exp(-2.0 * ax))


def _check_domain(p: SechypParams, t):
    t = np.asarray(t, dtype=float)
    slack = _EDGE_SLACK * p.t_cutoff
    if np.any(t < -slack) or np.any(t > p.t_cutoff + slack):
        raise PulseDomainError(f"t outside [0, {p.t_cutoff}]")
    return t


def envelope(p: SechypParams, t):
    """Complex Rabi frequency ``omega0 * sech(beta (t - t_g/2))**(1 + i mu)``.

    The power is taken on the real branch: ``sech(x)**(1+i mu) =
    sech(x) * exp(i mu log sech(x))``.  Accepts scalars or arrays.
    """
    t = _check_domain(p, t)
    ls = log_sech(p.beta * (t - 0.5 * p.t_cutoff))
    out = p.omega0 * np.exp(ls + 1j * (p.mu * ls + p.phase_offset))
    return out[()] if out.ndim == 0 else out


def instantaneous_detuning(p: SechypParams, t):
    """Time derivative of the drive phase, ``-mu beta tanh(beta (t - t_g/2))``."""
    t = _check_domain(p, t)
    out = -p.mu * p.beta * np.tanh(p.beta * (t - 0.5 * p.t_cutoff))
    return out[()] if out.ndim == 0 else out


def pulse_area_lambda(p: SechypParams) -> float:
    """Integrated intensity over one pulse, ``(2 omega0**2 / beta) tanh(beta t_g / 2)``."""
    return 2.0 * p.omega0 ** 2 / p.beta * math.tanh(0.5 * p.beta * p.t_cutoff)


def derived_widths(p: SechypParams) -> tuple[float, float]:
    """Return ``(t_fwhm, f_width)``; ``f_width`` is an ordinary frequency."""
    return FWHM_FACTOR / p.beta, p.mu * p.beta / math.pi


def second_pulse(p: SechypParams, theta: float) -> SechypParams:
    """The de-exciting pulse: same shape, phase advanced by ``pi + theta``."""
    return replace(p, phase_offset=p.phase_offset + math.pi + theta)
