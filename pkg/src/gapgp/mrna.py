"""Covariances of the model with the GP prior on the mRNA (latent force model).

The protein solves ``dy/dt = S u - lambda y + D y_xx`` on ``[0, l]`` with zero
initial and Dirichlet boundary values, so ``y = S * int int G u``, with the
Green's function truncated to ``N`` sine modes.  Pushing the SE prior on
``u`` through that integral gives the closed forms implemented here.

Every ``exp((beta theta_t / 2)**2) * erf(...)`` product is evaluated through
:func:`gapgp.specfun.exp_erfc` and every Faddeeva factor is taken in the upper
half plane, so no intermediate quantity overflows even when
``beta_n = lambda + D (n pi / l)**2`` is large.
"""
from __future__ import annotations

import numpy as np

from . import specfun
from .params import GreensConfig, KernelParams, MechanisticParams, ParameterError
from .se import se_gram
from .types import CovarianceBlocks, DomainError, as_design

__all__ = [
    "KernelOverflowError",
    "MrnaKernel",
    "greens",
    "kyy_mrna",
    "kyu_mrna",
    "kuu_mrna",
    "assemble_joint_mrna",
]

_SQRT_PI = np.sqrt(np.pi)
# Upper bound on entries of the gathered (rows, cols, N, N) temporal tensor per chunk.
_CHUNK_ELEMS = 2_000_000


class KernelOverflowError(ArithmeticError):
    """A series term could not be represented in double precision."""


def greens(x, xi, t, cfg: GreensConfig, mech: MechanisticParams):
    """Truncated Green's function ``G(x, xi, t)`` of the reaction-diffusion operator.

    ``(2/l) exp(-lambda t) sum_n sin(w_n x) sin(w_n xi) exp(-D w_n**2 t)``.
    """
    l = cfg.domain_len
    for name, v in (("x", x), ("xi", xi)):
        if not 0 <= v <= l:
            raise DomainError(f"{name}={v!r} outside [0, {l}]")
    if t < 0:
        raise DomainError(f"negative time t={t!r}")
    w = cfg.omega()
    terms = np.sin(w * x) * np.sin(w * xi) * np.exp(-(mech.lam + mech.diff * w**2) * t)
    return float(2.0 / l * terms.sum())


def _h(bm, bn, tp, t, theta):
    """``h(beta_m, t', t)`` with the ``exp(nu**2)`` factor folded into erfc terms.

    Arrays broadcast; ``bm``/``bn`` carry the mode axes, ``tp``/``t`` the
    point axes.
    """
    nu = 0.5 * bm * theta
    lag = tp - t
    c1 = nu * nu - bm * lag
    c2 = nu * nu - bm * tp - bn * t
    first = specfun.exp_erfc(c1, nu - lag / theta) - specfun.exp_erfc(c1, t / theta + nu)
    second = specfun.exp_erfc(c2, nu - tp / theta) - specfun.exp_erfc(c2, nu)
    return (first - second) / (bm + bn)


class MrnaKernel:
    """Joint covariance of ``(u, y)`` when ``u`` carries an SE product prior.

    Parameters
    ----------
    kp, mech, cfg
        Prior, mechanistic and Green's-function settings.  ``lam + diff`` must
        be positive so every mode decays.
    """

    variant = "mrna"

    def __init__(self, kp: KernelParams, mech: MechanisticParams, cfg: GreensConfig = GreensConfig()):
        if mech.lam == 0 and mech.diff == 0:
            raise ParameterError("GP-mRNA kernels need lam > 0 or diff > 0")
        self.kp, self.mech, self.cfg = kp, mech, cfg
        self.omega = cfg.omega()
        self.beta = cfg.decay(mech)
        self.n = np.arange(1, cfg.n_terms + 1)
        self._C = self._spatial_c()

    # -- spatial factors -------------------------------------------------

    def _W(self):
        """``w(j z1) - exp(-(l/theta)**2) exp(-gamma l) w(j z2)`` for every mode."""
        th, l, w = self.kp.theta_x, self.cfg.domain_len, self.omega
        sign = np.where(self.n % 2 == 0, 1.0, -1.0)  # exp(-j n pi)
        z1 = -0.5 * th * w + 0j
        z2 = -0.5 * th * w + 1j * (l / th)
        return specfun.faddeeva(z1) - np.exp(-((l / th) ** 2)) * sign * specfun.faddeeva(z2)

    def _spatial_c(self):
        """``C(n, m) = int_0^l int_0^l sin(w_n s) sin(w_m s') k(s, s') ds ds'``."""
        th, l = self.kp.theta_x, self.cfg.domain_len
        n = self.n.astype(float)
        W = self._W()
        imW = W.imag
        nn, mm = np.meshgrid(n, n, indexing="ij")
        same_parity = (self.n[:, None] - self.n[None, :]) % 2 == 0
        off = nn != mm
        denom = np.where(off, mm**2 - nn**2, 1.0)
        C = th * l / (_SQRT_PI * denom) * (nn * imW[None, :] - mm * imW[:, None])
        C = np.where(off & same_parity, C, 0.0)
        diag = (
            0.5 * th * _SQRT_PI * l * (W.real - imW * (th**2 * n * np.pi / (2 * l**2) + 1.0 / (n * np.pi)))
            + 0.5 * th**2 * (np.exp(-((l / th) ** 2)) * np.cos(n * np.pi) - 1.0)
        )
        C[np.diag_indices_from(C)] = diag
        return C

    def spatial_cross(self, xp):
        """``C~(x', n) = int_0^l sin(w_n s) k(s, x') ds`` with shape ``(len(xp), N)``."""
        th, l, w = self.kp.theta_x, self.cfg.domain_len, self.omega
        xp = np.asarray(xp, dtype=float)[:, None]
        # W~ rewritten with w(z) = 2 exp(-z**2) - w(-z) so both Faddeeva calls sit in Im z >= 0.
        a = 0.5 * th * w
        far = np.exp(-(((xp - l) / th) ** 2)) * np.exp(1j * w * l) * specfun.faddeeva(a + 1j * (l - xp) / th)
        near = np.exp(-((xp / th) ** 2)) * specfun.faddeeva(-a + 1j * xp / th)
        wt = 2.0 * np.exp(-a * a) * np.exp(1j * w * xp) - far - near
        return 0.5 * th * _SQRT_PI * wt.imag

    # -- temporal factors ------------------------------------------------

    def temporal_yy(self, t1, t2):
        """``K(t, t', n, m)`` broadcast over ``t1``/``t2``; trailing axes ``(N, N)``."""
        th = self.kp.theta_t
        t1 = np.asarray(t1, dtype=float)[..., None, None]
        t2 = np.asarray(t2, dtype=float)[..., None, None]
        bn = self.beta[:, None]
        bm = self.beta[None, :]
        out = 0.5 * th * _SQRT_PI * (_h(bm, bn, t2, t1, th) + _h(bn, bm, t1, t2, th))
        self._check_finite(out, pair=True)
        return out

    def temporal_yu(self, t, tp):
        """``K~(t, t', n)`` broadcast over ``t``/``tp``; trailing axis ``(N,)``."""
        th = self.kp.theta_t
        t = np.asarray(t, dtype=float)[..., None]
        tp = np.asarray(tp, dtype=float)[..., None]
        b = self.beta
        nu = 0.5 * b * th
        c = nu * nu - b * (t - tp)
        out = 0.5 * th * _SQRT_PI * (
            specfun.exp_erfc(c, nu - (t - tp) / th) - specfun.exp_erfc(c, tp / th + nu)
        )
        # Causality: the defining integral runs over [0, t].
        out = np.where(t > 0, out, 0.0)
        self._check_finite(out, pair=False)
        return out

    def _check_finite(self, arr, pair):
        if np.all(np.isfinite(arr)):
            return
        idx = np.argwhere(~np.isfinite(arr))[0]
        if pair:
            n, m = idx[-2] + 1, idx[-1] + 1
            raise KernelOverflowError(f"non-finite series term at (n, m) = ({n}, {m})")
        raise KernelOverflowError(f"non-finite series term at n = {idx[-1] + 1}")

    # -- covariance matrices -------------------------------------------

    def _sin(self, x):
        return np.sin(np.asarray(x, dtype=float)[:, None] * self.omega[None, :])

    def kuu(self, U1, U2):
        U1, U2 = as_design(U1), as_design(U2)
        kp = self.kp
        return se_gram(U1[:, 0], U1[:, 1], U2[:, 0], U2[:, 1], kp.theta_x, kp.theta_t, kp.sigma2)

    def kuu_diag(self, U):
        return np.full(len(as_design(U)), self.kp.sigma2)

    def kyu(self, Y, U):
        """Cross-covariance ``cov(y(Y_i), u(U_j))``."""
        Y = as_design(Y, self.cfg.domain_len)
        U = as_design(U, self.cfg.domain_len)
        if len(Y) == 0 or len(U) == 0:
            return np.zeros((len(Y), len(U)))
        ty, iy = np.unique(Y[:, 1], return_inverse=True)
        tu, iu = np.unique(U[:, 1], return_inverse=True)
        Kt = self.temporal_yu(ty[:, None], tu[None, :])  # (py, pu, N)
        Sy = self._sin(Y[:, 0])
        Cu = self.spatial_cross(U[:, 0])
        out = np.empty((len(Y), len(U)))
        step = max(1, _CHUNK_ELEMS // max(1, len(U) * self.cfg.n_terms))
        for s in range(0, len(Y), step):
            rows = slice(s, s + step)
            G = Kt[iy[rows][:, None], iu[None, :]]
            out[rows] = np.einsum("an,abn,bn->ab", Sy[rows], G, Cu)
        return 2.0 * self.kp.sigma2 * self.mech.s_rate / self.cfg.domain_len * out

    def kyy(self, Y1, Y2):
        Y1 = as_design(Y1, self.cfg.domain_len)
        Y2 = as_design(Y2, self.cfg.domain_len)
        if len(Y1) == 0 or len(Y2) == 0:
            return np.zeros((len(Y1), len(Y2)))
        t1, i1 = np.unique(Y1[:, 1], return_inverse=True)
        t2, i2 = np.unique(Y2[:, 1], return_inverse=True)
        KC = self.temporal_yy(t1[:, None], t2[None, :]) * self._C  # (p1, p2, N, N)
        S1 = self._sin(Y1[:, 0])
        S2 = self._sin(Y2[:, 0])
        N = self.cfg.n_terms
        out = np.empty((len(Y1), len(Y2)))
        step = max(1, _CHUNK_ELEMS // max(1, len(Y2) * N * N))
        for s in range(0, len(Y1), step):
            rows = slice(s, s + step)
            G = KC[i1[rows][:, None], i2[None, :]]
            tmp = np.einsum("abnm,bm->abn", G, S2)
            out[rows] = np.einsum("abn,an->ab", tmp, S1[rows])
        return self._yy_scale() * out

    def kyy_diag(self, Y):
        Y = as_design(Y, self.cfg.domain_len)
        if len(Y) == 0:
            return np.zeros(0)
        tu, it = np.unique(Y[:, 1], return_inverse=True)
        KC = self.temporal_yy(tu, tu) * self._C  # (p, N, N)
        S = self._sin(Y[:, 0])
        return self._yy_scale() * np.einsum("an,anm,am->a", S, KC[it], S)

    def _yy_scale(self):
        return 4.0 * self.kp.sigma2 * self.mech.s_rate**2 / self.cfg.domain_len**2

    def blocks(self, du, dy):
        du, dy = as_design(du), as_design(dy)
        return CovarianceBlocks(k_uu=self.kuu(du, du), k_yu=self.kyu(dy, du), k_yy=_sym(self.kyy(dy, dy)))


def _sym(m):
    return 0.5 * (m + m.T)


def _point(p):
    x, t = p
    return np.array([[float(x), float(t)]])


def kuu_mrna(p1, p2, kp: KernelParams):
    return float(kp.sigma2 * np.exp(-((p1[0] - p2[0]) ** 2) / kp.theta_x**2 - (p1[1] - p2[1]) ** 2 / kp.theta_t**2))


def kyy_mrna(p1, p2, kp: KernelParams, mech: MechanisticParams, cfg: GreensConfig = GreensConfig()):
    """Protein-protein covariance between two ``(x, t)`` points."""
    return float(MrnaKernel(kp, mech, cfg).kyy(_point(p1), _point(p2))[0, 0])


def kyu_mrna(py, pu, kp: KernelParams, mech: MechanisticParams, cfg: GreensConfig = GreensConfig()):
    """Protein-mRNA cross-covariance ``cov(y(py), u(pu))``."""
    return float(MrnaKernel(kp, mech, cfg).kyu(_point(py), _point(pu))[0, 0])


def assemble_joint_mrna(du, dy, kp: KernelParams, mech: MechanisticParams, cfg: GreensConfig = GreensConfig()):
    return MrnaKernel(kp, mech, cfg).blocks(du, dy)
