import math

import numpy as np
import pytest

from sechyp_blockade.experiments import (
    ShiftSample,
    initial_spec,
    parallel_map,
    random_shift_sample,
    sample_rng,
    summarize_samples,
    sweep_mode_b,
    transfer_error_rows,
)
from sechyp_blockade.integrator import IntegratorOptions
from sechyp_blockade.pulse import default_params


def _square(x):
    if x == 3:
        raise ValueError("three")
    return x * x


def test_parallel_map_keeps_order_and_captures_errors():
    for jobs in (1, 2):
        out = parallel_map(_square, range(5), jobs)
        assert [r for r, _ in out] == [0, 1, 4, None, 16]
        assert out[3][1] == "ValueError: three"


def test_sample_streams_are_independent_of_order():
    a = sample_rng(0, 5, 3, "15-1500", "positive").random(4)
    sample_rng(0, 5, 2, "15-1500", "positive").random(10)
    b = sample_rng(0, 5, 3, "15-1500", "positive").random(4)
    c = sample_rng(0, 5, 3, "15-1500", "mixed").random(4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_random_sample_engines_agree():
    p = default_params()
    opts = IntegratorOptions(1e-9, 1e-9)
    a = random_shift_sample((3, 0, 1, "30-3000", "positive", p, "exponential", 2000, opts))
    b = random_shift_sample((3, 0, 1, "30-3000", "positive", p, "dopri", 0, opts))
    assert a.eps_sim == pytest.approx(b.eps_sim, rel=2e-4)
    assert a.eps_est == b.eps_est
    assert abs(a.relative_deviation) < 0.1
    assert 30 <= a.delta_omega_avg <= 3000


def test_summary_statistics():
    ss = [ShiftSample(3, i, "15-1500", "positive", e, 1.1 * e, 30.0) for i, e in enumerate([0.01, 0.03])]
    ss.append(ShiftSample(3, 2, "15-1500", "positive", 0.0, 0.0, 30.0))
    (row,) = summarize_samples(ss)
    assert row["samples"] == 3
    assert row["eps_sim_mean"] == pytest.approx(0.04 / 3)
    assert row["rel_dev_mean"] == pytest.approx(0.1)
    assert math.isnan(ss[2].relative_deviation)


def test_mode_b_small_registers_in_band():
    rows, failures = sweep_mode_b([2, 3], [1e3], default_params())
    assert not failures
    assert all(r["in_band"] == 1 for r in rows)
    assert all(r["eps_est_lo"] < r["eps_est"] < r["eps_est_hi"] for r in rows)


def test_transfer_rows_and_initial_spec():
    rows = transfer_error_rows(default_params(), [1.0, 2.0], [6.0])
    assert [r["ratio"] for r in rows] == [1.0, 2.0]
    assert all(0 <= r["transfer_error"] <= 1 for r in rows)
    assert initial_spec("ghz", 3).probabilities[0] == 0.5
    with pytest.raises(ValueError):
        initial_spec("w", 3)
