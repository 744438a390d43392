import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import kstest

from sechyp_blockade.register import (
    RegisterConfig,
    ShiftDistribution,
    average_shift,
    pair_values,
    sample_shifts,
)


def test_scalar_shift_expands_to_matrix():
    cfg = RegisterConfig(3, 30.0, t2=100.0)
    assert cfg.shift_matrix.shape == (3, 3)
    assert np.all(np.diag(cfg.shift_matrix) == 0)
    assert np.all(cfg.pair_shifts == 30.0)
    assert cfg.uniform and not cfg.infinite_shifts
    assert RegisterConfig(4).infinite_shifts


def test_config_validation():
    with pytest.raises(ValueError):
        RegisterConfig(0)
    with pytest.raises(ValueError):
        RegisterConfig(2, t2=0.0)
    with pytest.raises(ValueError):
        RegisterConfig(2, alpha=-1.0)
    with pytest.raises(ValueError):
        RegisterConfig(3, [[0, 1, 2], [1, 0, 3], [2, 4, 0]])
    with pytest.raises(ValueError):
        RegisterConfig(3, np.zeros((2, 2)))


def test_blockade_margin():
    cfg = RegisterConfig(3, [[0, 30, 60], [30, 0, 90], [60, 90, 0]])
    assert cfg.blockade_margin(1.0, 1.0) == pytest.approx(15.0)
    assert not cfg.uniform


def test_two_qubits_single_pair():
    dist = ShiftDistribution(15.0, 1500.0, seed=3)
    mat = sample_shifts(dist, 2)
    vals = pair_values(mat)
    assert vals.shape == (1,)
    assert 15.0 <= vals[0] <= 1500.0


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**32 - 1), st.booleans())
def test_samples_in_range_symmetric_and_deterministic(n, seed, signed):
    dist = ShiftDistribution(15.0, 1500.0, signed, seed)
    a = sample_shifts(dist, n)
    b = sample_shifts(dist, n)
    assert np.array_equal(a, b)
    assert np.array_equal(a, a.T)
    vals = np.abs(pair_values(a))
    assert np.all((vals >= 15.0) & (vals <= 1500.0))
    if not signed:
        assert 15.0 <= average_shift(a) <= 1500.0


def test_inverse_shifts_are_uniform():
    dist = ShiftDistribution(15.0, 1500.0, seed=11)
    vals = pair_values(sample_shifts(dist, 60))
    u = 1 / vals
    lo, hi = 1 / 1500.0, 1 / 15.0
    res = kstest(u, "uniform", args=(lo, hi - lo))
    assert res.pvalue > 0.01


def test_signed_mode_draws_both_signs_fairly():
    vals = pair_values(sample_shifts(ShiftDistribution(30.0, 3000.0, True, 5), 60))
    frac = np.mean(vals > 0)
    assert 0.45 < frac < 0.55


def test_average_shift_examples():
    assert average_shift([30.0, 60.0]) == pytest.approx(40.0)
    assert average_shift(RegisterConfig(4, 25.0).shift_matrix) == pytest.approx(25.0)
    with pytest.raises(ValueError):
        average_shift([30.0, 0.0])
    with pytest.raises(ValueError):
        average_shift([])


def test_distribution_harmonic_mean():
    assert ShiftDistribution(15.0, 1500.0).harmonic_mean == pytest.approx(2 / (1 / 15 + 1 / 1500))
    with pytest.raises(ValueError):
        ShiftDistribution(10.0, 5.0)
    with pytest.raises(ValueError):
        ShiftDistribution(0.0, 5.0)
