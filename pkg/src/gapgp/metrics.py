"""Prediction scores: SMSE, Q2 = 1 - SMSE and one-sigma coverage accuracy."""
from __future__ import annotations

import numpy as np

__all__ = ["MetricError", "smse", "q2", "coverage", "summary"]


class MetricError(ValueError):
    pass


def _pair(truth, mean):
    truth = np.asarray(truth, dtype=float).ravel()
    mean = np.asarray(mean, dtype=float).ravel()
    if truth.shape != mean.shape:
        raise MetricError(f"length mismatch: {truth.size} vs {mean.size}")
    if truth.size == 0:
        raise MetricError("empty input")
    return truth, mean


def smse(truth, mean):
    """Mean squared error over the (1/n) variance of ``truth``."""
    truth, mean = _pair(truth, mean)
    var = np.mean((truth - truth.mean()) ** 2)
    if var <= 0:
        raise MetricError("truth has zero variance")
    return float(np.mean((truth - mean) ** 2) / var)


def q2(truth, mean):
    return 1.0 - smse(truth, mean)


def coverage(truth, mean, variance, k_sigma=1.0):
    """Fraction of points with ``|truth - mean| <= k_sigma * sd`` (boundary counts as covered)."""
    truth, mean = _pair(truth, mean)
    variance = np.asarray(variance, dtype=float).ravel()
    if variance.shape != truth.shape:
        raise MetricError(f"length mismatch: {truth.size} vs {variance.size} variances")
    if np.any(variance < 0):
        raise MetricError("negative variance")
    return float(np.mean(np.abs(truth - mean) <= k_sigma * np.sqrt(variance)))


def summary(truth, mean, variance):
    return {"q2": q2(truth, mean), "smse": smse(truth, mean), "ca": coverage(truth, mean, variance)}
