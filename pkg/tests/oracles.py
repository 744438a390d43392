"""Independent reference implementations used only by the tests.

Nothing here imports the package's Hamiltonian, basis or integrators: the
register Hamiltonian is assembled from Kronecker products over the full
``3**n`` space and propagated with a fixed-step fourth-order
commutator-free Magnus scheme using dense matrix exponentials.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.linalg import expm

# Single-qubit levels in the order |0>, |1>, |e>.
_KET = np.eye(3)


def sech_drive(omega0, mu, beta, tg, phase):
    def drive(t):
        x = beta * (t - tg / 2)
        s = 1 / math.cosh(x)
        return omega0 * s * np.exp(1j * (mu * math.log(s) + phase))
    return drive


def labels(n, max_exc):
    out = []
    for digits in itertools.product("01e", repeat=n):
        if digits.count("e") <= max_exc:
            out.append("".join(digits))
    return out


def register_operators(n, eta, gamma, shift_matrix, max_exc):
    """Raising operator and shift diagonal restricted to states with ``<= max_exc`` excitations."""
    dim = 3 ** n
    k_full = np.zeros((dim, dim), dtype=complex)
    for q in range(n):
        local = (math.sin(eta[q] / 2) * np.outer(_KET[2], _KET[0])
                 + math.cos(eta[q] / 2) * np.exp(1j * gamma[q]) * np.outer(_KET[2], _KET[1]))
        ops = [np.eye(3)] * n
        ops[q] = local
        term = ops[0]
        for o in ops[1:]:
            term = np.kron(term, o)
        k_full += term
    all_labels = ["".join(d) for d in itertools.product("01e", repeat=n)]
    keep = [i for i, lab in enumerate(all_labels) if lab.count("e") <= max_exc]
    shifts = np.zeros(len(keep))
    for j, i in enumerate(keep):
        exc = [q for q, c in enumerate(all_labels[i]) if c == "e"]
        if len(exc) == 2:
            shifts[j] = shift_matrix[exc[0]][exc[1]]
    return k_full[np.ix_(keep, keep)], shifts, [all_labels[i] for i in keep]


_C1 = 0.5 - math.sqrt(3) / 6
_C2 = 0.5 + math.sqrt(3) / 6
_A1 = (3 - 2 * math.sqrt(3)) / 12
_A2 = (3 + 2 * math.sqrt(3)) / 12


def cfm4_propagate(hamiltonian, psi, t0, t1, steps):
    """Fourth-order commutator-free Magnus propagation of ``i psi' = H(t) psi``."""
    h = (t1 - t0) / steps
    psi = np.array(psi, dtype=complex)
    for k in range(steps):
        t = t0 + k * h
        h1 = hamiltonian(t + _C1 * h)
        h2 = hamiltonian(t + _C2 * h)
        psi = expm(-1j * h * (_A2 * h1 + _A1 * h2)) @ psi
        psi = expm(-1j * h * (_A1 * h1 + _A2 * h2)) @ psi
    return psi


def gate_sequence_oracle(n, eta, gamma, shift_matrix, max_exc, omega0, mu, beta, tg, theta, psi0, steps):
    """Final state after both pulses (second phase advanced by ``pi + theta``)."""
    kop, shifts, labs = register_operators(n, eta, gamma, shift_matrix, max_exc)
    diag = np.diag(shifts)
    psi = psi0
    for phase in (0.0, math.pi + theta):
        drive = sech_drive(omega0, mu, beta, tg, phase)

        def ham(t, drive=drive):
            om = drive(t)
            return 0.5 * om * kop + 0.5 * np.conj(om) * kop.conj().T + diag

        psi = cfm4_propagate(ham, psi, 0.0, tg, steps)
    return psi, labs


def eq3_exact(n, A, gamma=0.0):
    """Closed-form total error with exact rational binomial weights (small ``n``)."""
    d1 = math.exp(-gamma)
    d2 = math.exp(-2 * gamma)
    total = Fraction(1)
    extra = 0.0
    for n0 in range(1, n + 1):
        extra += math.comb(n, n0) * 2 * d1 * complex(A[n0 - 1]).real
    for n0 in range(1, n + 1):
        for m0 in range(1, n + 1):
            for k in range(max(n0 + m0 - n, 0), min(n0, m0) + 1):
                w = math.comb(n, n0) * math.comb(n0, k) * math.comb(n - n0, m0 - k)
                re = (complex(A[n0 - 1]) * complex(A[m0 - 1]).conjugate()).real
                extra += w * re * (k + (n0 * m0 - k) * d2) / (n0 * m0)
    return 1 - (float(total) + extra) / 4 ** n


def eq3_by_states(n, amps, gamma=0.0):
    """Direct double sum over all pairs of computational states (``amps`` indexed by bit pattern)."""
    d1 = math.exp(-gamma)
    d2 = math.exp(-2 * gamma)
    fid = 0.0
    for a in range(2 ** n):
        for b in range(2 ** n):
            na, nb = bin(a).count("1"), bin(b).count("1")
            if na == 0 and nb == 0:
                w = 1.0
            elif na == 0 or nb == 0:
                w = d1
            else:
                k = bin(a & b).count("1")
                w = (k + (na * nb - k) * d2) / (na * nb)
            fid += (amps[a] * np.conj(amps[b])).real * w
    return 1 - fid / 4 ** n
