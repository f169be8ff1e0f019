"""Brute-force reference computations used to check the production kernels.

Nothing here imports the production kernel or special-function code: the
error functions are summed from their series / continued fractions in
multiprecision, the GP-mRNA covariances are integrated by the trapezoid
rule, GP-Protein covariances are checked by finite differences, and the PDE
is solved directly by Crank-Nicolson.  Everything is slow on purpose.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.linalg import solve_banded

__all__ = [
    "erf_taylor",
    "erfc_cf",
    "faddeeva_ref",
    "QuadResult",
    "quad_kyu",
    "quad_kyy",
    "fd_operator_apply",
    "pde_solve",
]

_DPS = 50


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def _erf_series(s):
    """Maclaurin series of erf at an mpmath (complex) argument, summed to convergence."""
    s2 = s * s
    term = s
    total = s
    k = 0
    eps = mpmath.mpf(10) ** (-(_DPS - 5))
    while True:
        k += 1
        term = -term * s2 / k
        add = term / (2 * k + 1)
        total += add
        if abs(add) < eps * max(abs(total), eps) and k > abs(s2):
            break
    return 2 / mpmath.sqrt(mpmath.pi) * total


def erf_taylor(x):
    with mpmath.workdps(_DPS):
        return float(_erf_series(mpmath.mpf(float(x))))


def _erfc_cf(x, terms=400):
    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tail = mpmath.mpf(0)
    for k in range(terms, 0, -1):
        tail = (mpmath.mpf(k) / 2) / (x + tail)
    return mpmath.exp(-x * x) / mpmath.sqrt(mpmath.pi) / (x + tail)


def erfc_cf(x):
    """erfc from the Laplace continued fraction (``x >= 2``) or ``1 - erf`` series."""
    x = float(x)
    with mpmath.workdps(_DPS):
        xm = mpmath.mpf(x)
        if x >= 2.0:
            return float(_erfc_cf(xm))
        if x <= -2.0:
            return float(2 - _erfc_cf(-xm))
        return float(1 - _erf_series(xm))


def _w_cf(z, terms=300):
    # w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...)))),  Im z > 0
    tail = mpmath.mpc(0)
    for k in range(terms, 0, -1):
        tail = (mpmath.mpf(k) / 2) / (z - tail)
    return 1j / mpmath.sqrt(mpmath.pi) / (z - tail)


def faddeeva_ref(z):
    """Faddeeva function from Maclaurin series (small ``|z|``) or continued fraction.

    The lower half plane is handled by reflection, ``w(z) = 2 exp(-z^2) - w(-z)``.
    """
    z = complex(z)
    with mpmath.workdps(_DPS):
        zm = mpmath.mpc(z.real, z.imag)
        if z.imag < 0:
            val = 2 * mpmath.exp(-zm * zm) - _w_upper(-zm)
        else:
            val = _w_upper(zm)
        return complex(val)


def _w_upper(z):
    if abs(z) >= 6:
        return _w_cf(z)
    return mpmath.exp(-z * z) * (1 - _erf_series(-1j * z))


# ---------------------------------------------------------------------------
# quadrature of the GP-mRNA covariance integrals
# ---------------------------------------------------------------------------

@dataclass
class QuadResult:
    value: float
    change: float  # |T(r) - T(r/2)| at the final resolution
    resolution: int

    def __float__(self):
        return self.value


def _trap_weights(a, b, r):
    nodes = np.linspace(a, b, r + 1)
    w = np.full(r + 1, (b - a) / r)
    w[[0, -1]] *= 0.5
    return nodes, w


def _modes(l, lam, diff, n_terms):
    w = np.arange(1, n_terms + 1) * np.pi / l
    return w, lam + diff * w**2


def _kyu_trap(py, pu, sigma2, thx, tht, S, lam, D, l, n_terms, r):
    x, t = py
    xp, tp = pu
    if t <= 0:
        return 0.0
    w, beta = _modes(l, lam, D, n_terms)
    xi, wx = _trap_weights(0.0, l, r)
    tau, wt = _trap_weights(0.0, t, r)
    # G(x, xi, t - tau) on the (xi, tau) grid, summed over modes.
    G = np.einsum(
        "n,in,jn->ij", 2.0 / l * np.sin(w * x), np.sin(np.outer(xi, w)), np.exp(-np.outer(t - tau, beta))
    )
    kx = np.exp(-((xi - xp) ** 2) / thx**2)
    kt = np.exp(-((tau - tp) ** 2) / tht**2)
    return sigma2 * S * float((wx * kx) @ G @ (wt * kt))


def _kyy_trap(p1, p2, sigma2, thx, tht, S, lam, D, l, n_terms, r):
    (x, t), (xp, tp) = p1, p2
    if t <= 0 or tp <= 0:
        return 0.0
    w, beta = _modes(l, lam, D, n_terms)
    xi, wx = _trap_weights(0.0, l, r)
    A = np.sin(np.outer(xi, w)) * wx[:, None]
    Kxi = np.exp(-((xi[:, None] - xi[None, :]) ** 2) / thx**2)
    space = A.T @ Kxi @ A  # (n, m)
    tau, wt = _trap_weights(0.0, t, r)
    tau2, wt2 = _trap_weights(0.0, tp, r)
    E1 = np.exp(-np.outer(t - tau, beta)) * wt[:, None]
    E2 = np.exp(-np.outer(tp - tau2, beta)) * wt2[:, None]
    Ktau = np.exp(-((tau[:, None] - tau2[None, :]) ** 2) / tht**2)
    time = E1.T @ Ktau @ E2  # (n, m)
    s1 = 2.0 / l * np.sin(w * x)
    s2 = 2.0 / l * np.sin(w * xp)
    return sigma2 * S**2 * float(s1 @ (space * time) @ s2)


def _refine(fn, r0, rtol, r_max):
    r = r0
    prev = fn(r)
    while True:
        r *= 2
        cur = fn(r)
        change = abs(cur - prev)
        if change <= rtol * max(abs(cur), 1e-300) or r >= r_max:
            return QuadResult(cur, change, r)
        prev = cur


def quad_kyu(py, pu, kp, mech, cfg, grid=64, rtol=1e-5, r_max=4096):
    """Trapezoid value of ``sigma2 S int_0^t int_0^l G(x, xi, t - tau) k(xi, x') k(tau, t')``.

    The resolution (points per axis) starts at ``grid`` and doubles until two
    successive values agree to ``rtol``.
    """
    if grid < 32:
        raise ValueError("quadrature resolution must be >= 32")
    args = (kp.sigma2, kp.theta_x, kp.theta_t, mech.s_rate, mech.lam, mech.diff, cfg.domain_len, cfg.n_terms)
    return _refine(lambda r: _kyu_trap(py, pu, *args, r), grid, rtol, r_max)


def quad_kyy(p1, p2, kp, mech, cfg, grid=64, rtol=1e-5, r_max=4096):
    """Trapezoid value of the four-fold protein covariance integral.

    The integrand separates across space and time for each pair of Green's
    modes, so the 4-D rule is applied as products of 2-D rules.
    """
    if grid < 32:
        raise ValueError("quadrature resolution must be >= 32")
    args = (kp.sigma2, kp.theta_x, kp.theta_t, mech.s_rate, mech.lam, mech.diff, cfg.domain_len, cfg.n_terms)
    return _refine(lambda r: _kyy_trap(p1, p2, *args, r), grid, rtol, r_max)


# ---------------------------------------------------------------------------
# finite-difference application of u = (1/S)(d/dt + lambda - D d2/dx2) y
# ---------------------------------------------------------------------------

def _d1(f, h):
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def _d2(f, h):
    return (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h)


def _apply_operator(f, slot, mech, hx, ht):
    """Return ``g(x, t, x2, t2)`` = the operator applied in argument pair ``slot`` (0 or 1)."""
    S, lam, D = mech.s_rate, mech.lam, mech.diff
    ix, it = (0, 1) if slot == 0 else (2, 3)

    def g(*p):
        def shifted(i):
            def at(h):
                q = list(p)
                q[i] += h
                return f(*q)
            return at

        val = _d1(shifted(it), ht) + lam * f(*p)
        if D:
            val -= D * _d2(shifted(ix), hx)
        return val / S

    return g


def fd_operator_apply(kernel, p1, p2, mech, which="both", step=(1e-3, 1e-3), richardson=True):
    """Apply the mRNA-from-protein operator to ``kernel(x, t, x2, t2)`` numerically.

    ``which`` selects the argument pair: ``"first"``, ``"second"`` or
    ``"both"``.  Fourth-order central stencils with steps ``step = (hx, ht)``;
    with ``richardson`` the results at ``h`` and ``h/2`` are combined to cancel
    the leading error term.
    """
    slots = {"first": (0,), "second": (1,), "both": (0, 1)}[which]

    def evaluate(hx, ht):
        g = kernel
        for slot in slots:
            g = _apply_operator(g, slot, mech, hx, ht)
        return g(p1[0], p1[1], p2[0], p2[1])

    hx, ht = step
    coarse = evaluate(hx, ht)
    if not richardson:
        return coarse
    fine = evaluate(hx / 2, ht / 2)
    return (16 * fine - coarse) / 15


# ---------------------------------------------------------------------------
# Crank-Nicolson solver for the reaction-diffusion PDE
# ---------------------------------------------------------------------------

def pde_solve(u_field, mech, x, t, y0=None):
    """Solve ``y_t = S u - lambda y + D y_xx`` with ``y = 0`` on the boundary.

    Parameters
    ----------
    u_field : array (len(t), len(x))
        Driving force sampled on the grid.
    x, t : uniform 1-D grids, ``x`` spanning ``[0, l]``.
    y0 : optional initial interior profile (defaults to zero).

    Returns
    -------
    y : array (len(t), len(x))
    """
    u = np.asarray(u_field, dtype=float)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    nt, nx = len(t), len(x)
    if u.shape != (nt, nx):
        raise ValueError(f"u_field shape {u.shape} does not match grid ({nt}, {nx})")
    S, lam, D = mech.s_rate, mech.lam, mech.diff
    dx = x[1] - x[0]
    m = nx - 2
    y = np.zeros((nt, nx))
    if y0 is not None:
        y[0, 1:-1] = np.asarray(y0, dtype=float)[1:-1]
    if m <= 0:
        return y
    r = D / dx**2
    for k in range(nt - 1):
        dt = t[k + 1] - t[k]
        # (I - dt/2 A) y+ = (I + dt/2 A) y + dt S (u + u+)/2 with A = D*lap - lam
        diag = 1.0 + 0.5 * dt * (2 * r + lam)
        off = -0.5 * dt * r
        ab = np.zeros((3, m))
        ab[0, 1:] = off
        ab[1, :] = diag
        ab[2, :-1] = off
        yi = y[k, 1:-1]
        lap = -2 * yi
        lap[1:] += yi[:-1]
        lap[:-1] += yi[1:]
        rhs = yi + 0.5 * dt * (r * lap - lam * yi) + 0.5 * dt * S * (u[k, 1:-1] + u[k + 1, 1:-1])
        if not np.all(np.isfinite(ab)) or np.any(ab[1] == 0):
            raise np.linalg.LinAlgError("singular Crank-Nicolson system")
        y[k + 1, 1:-1] = solve_banded((1, 1), ab, rhs)
    return y
