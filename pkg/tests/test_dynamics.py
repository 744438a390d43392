import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cfm4_propagate, labels, register_operators, sech_drive
from sechyp_blockade.dynamics import (
    Basis,
    ConfigurationError,
    QuantumState,
    StateError,
    build_hamiltonian,
    choose_truncation,
    dephasing_rates,
    evolve_lindblad,
    evolve_reduced,
    evolve_schrodinger,
    gate_error,
    reduced_return_amplitudes,
    target_state,
    two_level_transfer,
)
from sechyp_blockade.gates import GateSpec
from sechyp_blockade.pulse import default_params
from sechyp_blockade.register import RegisterConfig


@pytest.mark.parametrize("n", [1, 2, 3, 5])
@pytest.mark.parametrize("trunc", [1, 2])
def test_basis_matches_enumeration(n, trunc):
    basis = Basis(n, trunc)
    assert basis.labels() == labels(n, trunc)
    expected = sum(math.comb(n, k) * 2 ** (n - k) for k in range(min(trunc, n) + 1))
    assert basis.dim == expected
    assert [basis.labels()[i] for i in basis.ground_indices] == [format(i, f"0{n}b") for i in range(2 ** n)]


def test_basis_lookup():
    basis = Basis(3, 2)
    assert basis.labels()[basis.index_of("e1e")] == "e1e"
    with pytest.raises(KeyError):
        basis.index_of("eee")
    with pytest.raises(ValueError):
        Basis(0, 1)
    with pytest.raises(ValueError):
        basis.embed_ground(np.ones(3))


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10_000))
def test_hamiltonian_matches_dense_oracle(n, seed):
    rng = np.random.default_rng(seed)
    eta = rng.uniform(0, math.pi, n)
    gam = rng.uniform(-math.pi, math.pi, n)
    s = rng.uniform(10, 100, (n, n))
    s = s + s.T
    cfg = RegisterConfig(n, s)
    spec = GateSpec(eta, gam, math.pi)
    ham = build_hamiltonian(cfg, spec)
    kop, shifts, _ = register_operators(n, eta, gam, cfg.shift_matrix, ham.basis.truncation)
    omega = complex(rng.normal(), rng.normal())
    ref = 0.5 * omega * kop + 0.5 * np.conj(omega) * kop.conj().T + np.diag(shifts)
    assert np.max(np.abs(ham.dense(omega) - ref)) < 1e-14
    psi = rng.normal(size=ham.dim) + 1j * rng.normal(size=ham.dim)
    assert np.allclose(ham.apply(omega, psi), ref @ psi, atol=1e-13)


def test_truncation_choice():
    assert choose_truncation(RegisterConfig(3)) == 1
    assert choose_truncation(RegisterConfig(3, 30.0)) == 2
    mixed = np.full((3, 3), math.inf)
    mixed[0, 1] = mixed[1, 0] = 30.0
    with pytest.raises(ConfigurationError):
        choose_truncation(RegisterConfig(3, mixed))
    with pytest.raises(ConfigurationError):
        build_hamiltonian(RegisterConfig(3, 30.0), GateSpec.uniform(2))
    with pytest.raises(ConfigurationError):
        build_hamiltonian(RegisterConfig(3, 30.0), GateSpec.uniform(3), Basis(3, 1))


def test_transfer_examples():
    p = default_params()
    T = two_level_transfer(p)
    assert 1 - 1e-3 <= abs(T) ** 2 <= 1
    assert 1 - abs(two_level_transfer(p, 0.5)) ** 2 > 0.5
    zero = two_level_transfer(p, 0.0, theta=0.7)
    assert zero == pytest.approx(np.exp(0.7j), abs=1e-14)
    # frozen regression value of the default pulse (computed at rel/abs tol 1e-10)
    assert T.real == pytest.approx(0.9998594403357803, abs=1e-8)
    assert abs(T.imag) < 1e-8


def test_transfer_against_fixed_step_oracle():
    p = default_params()
    drive1 = sech_drive(p.omega0, p.mu, p.beta, p.t_cutoff, 0.0)
    drive2 = sech_drive(p.omega0, p.mu, p.beta, p.t_cutoff, 2 * math.pi)
    psi = np.array([1, 0], dtype=complex)
    for drive in (drive1, drive2):
        def ham(t, drive=drive):
            om = drive(t)
            return np.array([[0, 0.5 * np.conj(om)], [0.5 * om, 0]])
        psi = cfm4_propagate(ham, psi, 0.0, p.t_cutoff, 4000)
    assert abs(psi[0] * np.exp(1j * math.pi) - two_level_transfer(p)) < 1e-7


def test_reduced_ladder_norm_and_limits():
    p = default_params()
    st_ = evolve_reduced(5, p, 30.0)
    assert st_.norm == pytest.approx(1.0, abs=1e-8)
    inf = evolve_reduced(5, p, math.inf)
    assert inf.b_ee == 0
    assert inf.psi * np.exp(1j * math.pi) == pytest.approx(two_level_transfer(p, math.sqrt(5)), abs=1e-9)
    one = reduced_return_amplitudes([1], p, 30.0)[0]
    assert one == pytest.approx(two_level_transfer(p), abs=1e-9)
    with pytest.raises(ValueError):
        evolve_reduced(0, p, 30.0)


def test_schrodinger_conserves_norm_and_engines_agree():
    p = default_params()
    cfg = RegisterConfig(3, 30.0)
    spec = GateSpec.uniform(3)
    psi0 = QuantumState.uniform_superposition(Basis(3, 2))
    a = evolve_schrodinger(cfg, spec, p, None, psi0)
    b = evolve_schrodinger(cfg, spec, p, None, psi0, engine="exponential", steps_per_pulse=2000)
    assert a.norm() == pytest.approx(1.0, abs=1e-8)
    a.check()
    assert np.max(np.abs(a.data - b.data)) < 1e-6
    with pytest.raises(ValueError):
        evolve_schrodinger(cfg, spec, p, None, psi0, engine="magic")
    with pytest.raises(StateError):
        evolve_schrodinger(cfg, spec, p, None, psi0.to_density())


def test_lindblad_reduces_to_schrodinger_for_long_t2():
    p = default_params()
    spec = GateSpec.uniform(2)
    basis = Basis(2, 1)
    psi0 = QuantumState.uniform_superposition(basis)
    pure = evolve_schrodinger(RegisterConfig(2), spec, p, None, psi0)
    rho = evolve_lindblad(RegisterConfig(2, t2=1e12), spec, p, None, psi0)
    rho.check()
    assert np.max(np.abs(rho.data - np.outer(pure.data, pure.data.conj()))) < 1e-8
    with pytest.raises(ValueError):
        evolve_lindblad(RegisterConfig(2), spec, p, None, psi0)


def test_lindblad_trace_and_positivity_with_dephasing():
    p = default_params()
    spec = GateSpec.uniform(3)
    psi0 = QuantumState.ghz(Basis(3, 1))
    rho = evolve_lindblad(RegisterConfig(3, t2=50.0), spec, p, None, psi0)
    rho.check()
    err = gate_error(rho, psi0, spec)
    pure = evolve_schrodinger(RegisterConfig(3), spec, p, None, psi0)
    assert err > gate_error(pure, psi0, spec)


def test_dephasing_rates_by_hand():
    basis = Basis(2, 2)
    r = dephasing_rates(basis, 4.0)
    i = basis.index_of
    assert r[i("e1"), i("11")] == 0.25
    assert r[i("e0"), i("0e")] == 0.5
    assert r[i("e0"), i("e1")] == 0.0
    assert r[i("ee"), i("00")] == 0.5
    assert np.array_equal(r, r.T)


def test_target_state_and_gate_error():
    basis = Basis(2, 1)
    psi0 = QuantumState.uniform_superposition(basis)
    spec = GateSpec.uniform(2)
    tgt = target_state(psi0, spec)
    assert np.allclose(tgt[basis.ground_indices], [0.5, 0.5, 0.5, -0.5])
    final = QuantumState("pure", np.exp(0.3j) * tgt, basis)
    assert gate_error(final, psi0, spec) == pytest.approx(0.0, abs=1e-15)
    assert gate_error(psi0, psi0, spec) == pytest.approx(0.75)
    assert gate_error(final.to_density(), psi0, spec) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(StateError):
        gate_error(QuantumState.uniform_superposition(Basis(2, 2)), psi0, spec)


def test_state_validation_and_dump(tmp_path):
    basis = Basis(2, 1)
    with pytest.raises(StateError):
        QuantumState("pure", np.ones(3), basis)
    with pytest.raises(StateError):
        QuantumState("mixed", np.ones(basis.dim), basis)
    with pytest.raises(StateError):
        QuantumState("pure", np.ones(basis.dim), basis).check()
    bad = np.diag([1.2, -0.2] + [0.0] * (basis.dim - 2))
    with pytest.raises(StateError):
        QuantumState("density", bad, basis).check()
    ghz = QuantumState.ghz(basis)
    path = tmp_path / "state.csv"
    ghz.dump_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["label", "re", "im"]
    assert len(rows) == basis.dim + 1
    amp = {r[0]: complex(float(r[1]), float(r[2])) for r in rows[1:]}
    assert amp["00"] == pytest.approx(1 / math.sqrt(2)) and amp["11"] == pytest.approx(1 / math.sqrt(2))
    ghz.to_density().dump_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["label", "population"]
