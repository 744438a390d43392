import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from sechyp_blockade.integrator import (
    IntegrationError,
    IntegratorOptions,
    NumericalError,
    integrate,
    integrate_exponential,
    phi_functions,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def rabi_rhs(omega):
    h = 0.5 * omega * SX
    return lambda t, y: -1j * (h @ y)


def rk4_fixed(rhs, y0, t0, t1, steps):
    h = (t1 - t0) / steps
    y = np.array(y0, dtype=complex)
    for i in range(steps):
        t = t0 + i * h
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def test_exponential_decay():
    y = integrate(lambda t, y: -y, np.array([1.0]), 0.0, 1.0)
    assert abs(y[0] - math.exp(-1)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5), st.floats(0.1, 2))
def test_rotation_preserves_modulus(omega, t1):
    y = integrate(lambda t, y: 1j * omega * y, np.array([0.6 + 0.8j]), 0.0, t1)
    assert abs(abs(y[0]) - 1.0) < 1e-9


def test_pi_pulse_inversion():
    omega = 1.3
    y = integrate(rabi_rhs(omega), np.array([1, 0]), 0.0, math.pi / omega)
    assert abs(y[1]) ** 2 == pytest.approx(1.0, abs=1e-8)
    oracle = rk4_fixed(rabi_rhs(omega), [1, 0], 0.0, math.pi / omega, 100_000)
    exact = expm(-1j * math.pi / 2 * SX) @ np.array([1, 0])
    assert np.max(np.abs(oracle - exact)) < 1e-12
    assert np.max(np.abs(y - oracle)) < 1e-8


def test_halving_tolerance_never_hurts():
    omega = 1.3
    rhs = rabi_rhs(omega)
    oracle = rk4_fixed(rhs, [1, 0], 0.0, math.pi / omega, 100_000)
    errors = []
    for tol in (1e-5, 5e-6, 2.5e-6, 1.25e-6, 6.25e-7, 3.125e-7):
        y = integrate(rhs, np.array([1, 0]), 0.0, math.pi / omega, IntegratorOptions(tol, tol))
        errors.append(np.max(np.abs(y - oracle)))
    assert all(b <= a for a, b in zip(errors, errors[1:]))


def test_forward_then_backward():
    tol = 1e-9
    opts = IntegratorOptions(tol, tol)

    def rhs(t, y):
        return -1j * (0.5 * math.cos(t) * SX + 0.3 * t * np.diag([0, 1])) @ y

    y0 = np.array([0.6, 0.8j])
    y1 = integrate(rhs, y0, 0.0, 4.0, opts)
    back = integrate(rhs, y1, 4.0, 0.0, opts)
    assert np.max(np.abs(back - y0)) < 100 * tol


def test_zero_span_returns_copy():
    y0 = np.array([1.0 + 0j])
    y = integrate(lambda t, y: y, y0, 2.0, 2.0)
    assert y is not y0 and y[0] == 1.0


def test_nan_rhs_raises_numerical_error():
    with pytest.raises(NumericalError):
        integrate(lambda t, y: y * np.nan, np.array([1.0]), 0.0, 1.0)


def test_step_budget_carries_last_state():
    with pytest.raises(IntegrationError) as info:
        integrate(lambda t, y: -1j * 50 * y, np.array([1.0]), 0.0, 10.0, IntegratorOptions(max_steps=5))
    assert not isinstance(info.value, NumericalError)
    assert 0.0 <= info.value.t < 10.0
    assert abs(abs(info.value.y[0]) - 1) < 1e-6


def test_stats_are_reported():
    stats = {}
    integrate(lambda t, y: -y, np.array([1.0]), 0.0, 1.0, stats=stats)
    assert stats["accepted"] > 0 and stats["nfev"] >= 6 * stats["accepted"]


def test_option_validation():
    with pytest.raises(ValueError):
        IntegratorOptions(rel_tol=0)
    with pytest.raises(ValueError):
        IntegratorOptions(max_steps=0)


def test_phi_functions_continuous_across_branch():
    for z0 in (0.4999, 0.5001, -0.5001j, 1e-9):
        e, p1, p2, p3 = phi_functions(np.array([z0]))
        z = complex(z0)
        assert e[0] == pytest.approx(np.exp(z))
        if abs(z) > 1e-3:
            assert p1[0] == pytest.approx((np.exp(z) - 1) / z, rel=1e-12)
            assert p2[0] == pytest.approx((np.exp(z) - 1 - z) / z ** 2, rel=1e-10)
            assert p3[0] == pytest.approx((np.exp(z) - 1 - z - z * z / 2) / z ** 3, rel=1e-8)
    _, p1, p2, p3 = phi_functions(np.array([0.0]))
    assert (p1[0], p2[0], p3[0]) == pytest.approx((1.0, 0.5, 1 / 6))


def test_etdrk4_stiff_problem_is_fourth_order():
    lam = np.array([-1j * 500.0, -2.0 + 0j])

    def nonlinear(t, y):
        return 0.5 * np.cos(t) * y[::-1]

    ref = integrate(lambda t, y: lam * y + nonlinear(t, y), np.array([1.0, 0.5]), 0.0, 2.0,
                    IntegratorOptions(1e-12, 1e-12))
    errs = [np.max(np.abs(integrate_exponential(nonlinear, lam, [1.0, 0.5], 0.0, 2.0, s) - ref))
            for s in (400, 800, 1600)]
    assert errs[0] < 1e-4
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(rates) > 3.5


def test_etdrk4_exact_for_pure_linear():
    lam = np.array([-1j * 3.0, -0.5])
    y = integrate_exponential(lambda t, y: np.zeros_like(y), lam, [1.0, 1.0], 0.0, 2.0, 3)
    assert np.allclose(y, np.exp(2 * lam), atol=1e-14)
    with pytest.raises(ValueError):
        integrate_exponential(lambda t, y: y, lam, [1.0, 1.0], 0.0, 1.0, 0)
