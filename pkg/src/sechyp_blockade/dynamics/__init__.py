"""Register dynamics under the two-pulse protocol."""

from .basis import Basis
from .evolve import dephasing_rates, evolve_lindblad, evolve_schrodinger, gate_error, target_state
from .hamiltonian import ConfigurationError, RegisterHamiltonian, build_hamiltonian, choose_truncation
from .reduced import (
    ReducedLadderState,
    evolve_ladders,
    evolve_reduced,
    reduced_return_amplitudes,
    transfer_factors,
    two_level_transfer,
)
from .state import QuantumState, StateError

__all__ = [
    "Basis",
    "ConfigurationError",
    "QuantumState",
    "ReducedLadderState",
    "RegisterHamiltonian",
    "StateError",
    "build_hamiltonian",
    "choose_truncation",
    "dephasing_rates",
    "evolve_ladders",
    "evolve_lindblad",
    "evolve_reduced",
    "evolve_schrodinger",
    "gate_error",
    "reduced_return_amplitudes",
    "target_state",
    "transfer_factors",
    "two_level_transfer",
]
