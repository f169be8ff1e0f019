"""Real error functions and the complex Faddeeva function.

Thin, validated wrappers around :mod:`scipy.special`.  The kernels only ever
need ``exp(c) * erfc(a)`` style products, so :func:`exp_erfc` is provided to
evaluate them without forming ``exp(c)`` on its own (``c`` can be several
hundred for high Green's-function modes).
"""
from __future__ import annotations

import numpy as np
from scipy import special

__all__ = ["erf", "erfc", "erfcx", "faddeeva", "exp_erfc"]


def _check_finite(x, name):
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name}: non-finite argument {x!r}")


def erf(x):
    """Error function. Raises ``ValueError`` on non-finite input."""
    x = np.asarray(x, dtype=float)
    _check_finite(x, "erf")
    out = special.erf(x)
    return out.item() if out.ndim == 0 else out


def erfc(x):
    """Complementary error function, accurate in the far right tail."""
    x = np.asarray(x, dtype=float)
    _check_finite(x, "erfc")
    out = special.erfc(x)
    return out.item() if out.ndim == 0 else out


def erfcx(x):
    """Scaled complementary error function ``exp(x**2) * erfc(x)``."""
    x = np.asarray(x, dtype=float)
    _check_finite(x, "erfcx")
    out = special.erfcx(x)
    return out.item() if out.ndim == 0 else out


def faddeeva(z):
    """Faddeeva function ``w(z) = exp(-z**2) * erfc(-1j * z)``.

    Accepts scalars or arrays.  ``OverflowError`` is raised (naming the
    first offending argument) when the result is not representable, which
    can only happen deep in the lower half plane.
    """
    z = np.asarray(z, dtype=complex)
    if not (np.all(np.isfinite(z.real)) and np.all(np.isfinite(z.imag))):
        raise ValueError(f"faddeeva: non-finite argument {z!r}")
    out = special.wofz(z)
    bad = ~(np.isfinite(out.real) & np.isfinite(out.imag))
    if np.any(bad):
        raise OverflowError(f"faddeeva overflow at z={z[bad].flat[0]!r}" if z.ndim else
                            f"faddeeva overflow at z={complex(z)!r}")
    return out.item() if out.ndim == 0 else out


def exp_erfc(c, a):
    """Evaluate ``exp(c) * erfc(a)`` elementwise without intermediate overflow.

    For ``a >= 0`` the identity ``erfc(a) = exp(-a**2) erfcx(a)`` folds the
    Gaussian tail into the exponent.  For ``a < 0``, ``erfc(a)`` lies in
    ``(1, 2)`` so the naive product is used.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    pos = a >= 0.0
    a_pos = np.where(pos, a, 0.0)
    with np.errstate(over="ignore"):
        right = np.exp(c - a_pos * a_pos) * special.erfcx(a_pos)
        left = np.exp(np.where(pos, 0.0, c)) * special.erfc(np.where(pos, 0.0, a))
    return np.where(pos, right, left)
