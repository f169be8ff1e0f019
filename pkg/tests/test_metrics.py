import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gapgp.metrics import MetricError, coverage, q2, smse, summary

vec = arrays(np.float64, 12, elements=st.floats(-10, 10))


def test_anchors():
    truth = np.array([1.0, 3.0, -2.0, 0.5])
    assert smse(truth, truth) == 0.0
    assert smse(truth, np.full(4, truth.mean())) == 1.0
    assert q2(truth, truth) == 1.0
    assert q2(truth, np.full(4, truth.mean())) == 0.0


def test_hand_computation():
    truth = np.array([0.0, 1.0, 2.0, 3.0])
    mean = np.array([0.5, 1.0, 1.0, 3.5])
    # mse = (0.25 + 0 + 1 + 0.25) / 4, var = 1.25
    assert smse(truth, mean) == pytest.approx(0.375 / 1.25)


def test_zero_variance_truth():
    with pytest.raises(MetricError):
        smse(np.ones(5), np.zeros(5))


def test_length_mismatch():
    with pytest.raises(MetricError):
        q2([1.0, 2.0], [1.0])


@given(vec, vec, st.floats(-100, 100))
def test_q2_shift_invariance(truth, mean, c):
    if np.var(truth) < 1e-3:
        return
    assert q2(truth + c, mean + c) == pytest.approx(q2(truth, mean), rel=1e-6, abs=1e-6)


@given(vec, vec, st.floats(0.1, 10), st.floats(-10, 10))
def test_smse_affine_invariance(truth, mean, a, b):
    if np.var(truth) < 1e-3:
        return
    assert smse(a * truth + b, a * mean + b) == pytest.approx(smse(truth, mean), rel=1e-6, abs=1e-9)


def test_coverage_cases():
    truth = np.array([0.0, 1.0, 2.0])
    assert coverage(truth, truth, np.ones(3)) == 1.0
    assert coverage(truth, truth + 1, np.zeros(3)) == 0.0
    # boundary |r| = sd counts as covered
    assert coverage(np.array([1.0]), np.array([0.0]), np.array([1.0])) == 1.0


def test_coverage_monte_carlo():
    rng = np.random.default_rng(0)
    r = rng.standard_normal(100_000)
    assert coverage(r, np.zeros_like(r), np.ones_like(r)) == pytest.approx(0.6827, abs=0.01)


@given(vec, vec, st.floats(0.1, 3), st.floats(0.1, 3))
def test_coverage_monotone_in_k(truth, mean, k1, k2):
    var = np.ones_like(truth)
    lo, hi = sorted((k1, k2))
    assert coverage(truth, mean, var, lo) <= coverage(truth, mean, var, hi)


def test_negative_variance_rejected():
    with pytest.raises(MetricError):
        coverage([1.0], [1.0], [-1.0])


def test_summary_keys():
    assert set(summary([0.0, 1.0], [0.0, 1.0], [0.1, 0.1])) == {"q2", "smse", "ca"}
