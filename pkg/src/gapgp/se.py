"""Squared-exponential kernel ``exp(-(z - z')**2 / theta**2)`` and its derivatives.

Derivatives are taken with respect to the *first* argument ``z``.  All
functions broadcast over ``z`` and ``z2``.
"""
from __future__ import annotations

import numpy as np

from .params import ParameterError

__all__ = ["se", "se_d1", "se_d2", "se_d4", "se_gram"]


def _theta(theta):
    theta = float(theta)
    if not theta > 0:
        raise ParameterError(f"length-scale must be > 0, got {theta!r}")
    return theta


def _out(v):
    return v.item() if np.ndim(v) == 0 else v


def se(z, z2, theta):
    theta = _theta(theta)
    d = np.subtract(z, z2, dtype=float)
    return _out(np.exp(-(d * d) / theta**2))


def se_d1(z, z2, theta):
    theta = _theta(theta)
    d = np.subtract(z, z2, dtype=float)
    return _out(-2.0 * d / theta**2 * np.exp(-(d * d) / theta**2))


def se_d2(z, z2, theta):
    theta = _theta(theta)
    d = np.subtract(z, z2, dtype=float)
    th2 = theta**2
    return _out((-2.0 / th2 + 4.0 * d * d / th2**2) * np.exp(-(d * d) / th2))


def se_d4(z, z2, theta):
    theta = _theta(theta)
    d = np.subtract(z, z2, dtype=float)
    th2 = theta**2
    d2 = d * d
    poly = 12.0 / th2**2 - 48.0 * d2 / th2**3 + 16.0 * d2 * d2 / th2**4
    return _out(poly * np.exp(-d2 / th2))


def se_gram(x1, t1, x2, t2, theta_x, theta_t, sigma2=1.0):
    """Separable space-time SE Gram matrix between two point sets."""
    x1, t1, x2, t2 = (np.asarray(a, dtype=float) for a in (x1, t1, x2, t2))
    return sigma2 * se(x1[:, None], x2[None, :], theta_x) * se(t1[:, None], t2[None, :], theta_t)
