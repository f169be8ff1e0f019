"""Covariances of the model with the GP prior on the protein.

The mRNA is recovered from the protein by the differential operator
``u = (1/S) (d/dt + lambda - D d2/dx2) y``, so its covariances are obtained
by differentiating the SE product prior.  Derivatives ``k^(j)(z, z')`` are
taken w.r.t. the first argument.

No initial or boundary conditions are imposed: samples of ``y`` need not
vanish at ``x = 0``, ``x = l`` or ``t = 0``.
"""
from __future__ import annotations

import numpy as np

from .params import KernelParams, MechanisticParams
from .se import se, se_d1, se_d2, se_d4
from .types import CovarianceBlocks, as_design

__all__ = ["ProteinKernel", "kyy_protein", "kuu_protein", "kyu_protein", "assemble_joint_protein"]


def _kyy(x1, t1, x2, t2, kp):
    return kp.sigma2 * se(x1, x2, kp.theta_x) * se(t1, t2, kp.theta_t)


def _kuu(x1, t1, x2, t2, kp, mech):
    S, lam, D = mech.s_rate, mech.lam, mech.diff
    kx = se(x1, x2, kp.theta_x)
    kt = se(t1, t2, kp.theta_t)
    space = D * (D * se_d4(x1, x2, kp.theta_x) - 2.0 * lam * se_d2(x1, x2, kp.theta_x)) * kt
    time = (se_d2(t1, t2, kp.theta_t) - lam**2 * kt) * kx
    return kp.sigma2 / S**2 * (space - time)


def _kyu(x1, t1, x2, t2, kp, mech):
    kx = se(x1, x2, kp.theta_x)
    kt = se(t1, t2, kp.theta_t)
    return kp.sigma2 / mech.s_rate * (
        mech.lam * kx * kt - kx * se_d1(t1, t2, kp.theta_t) - mech.diff * se_d2(x1, x2, kp.theta_x) * kt
    )


def kyy_protein(p1, p2, kp: KernelParams):
    return float(_kyy(p1[0], p1[1], p2[0], p2[1], kp))


def kuu_protein(p1, p2, kp: KernelParams, mech: MechanisticParams):
    return float(_kuu(p1[0], p1[1], p2[0], p2[1], kp, mech))


def kyu_protein(py, pu, kp: KernelParams, mech: MechanisticParams):
    """``cov(y(py), u(pu))``."""
    return float(_kyu(py[0], py[1], pu[0], pu[1], kp, mech))


class ProteinKernel:
    variant = "protein"

    def __init__(self, kp: KernelParams, mech: MechanisticParams, cfg=None):
        self.kp, self.mech, self.cfg = kp, mech, cfg

    @staticmethod
    def _grid(A, B):
        A, B = as_design(A), as_design(B)
        return A[:, 0][:, None], A[:, 1][:, None], B[:, 0][None, :], B[:, 1][None, :]

    def kyy(self, Y1, Y2):
        return np.asarray(_kyy(*self._grid(Y1, Y2), self.kp), dtype=float)

    def kuu(self, U1, U2):
        return np.asarray(_kuu(*self._grid(U1, U2), self.kp, self.mech), dtype=float)

    def kyu(self, Y, U):
        return np.asarray(_kyu(*self._grid(Y, U), self.kp, self.mech), dtype=float)

    def kyy_diag(self, Y):
        return np.full(len(as_design(Y)), self.kp.sigma2)

    def kuu_diag(self, U):
        kp, m = self.kp, self.mech
        value = kp.sigma2 / m.s_rate**2 * (
            12 * m.diff**2 / kp.theta_x**4 + 4 * m.diff * m.lam / kp.theta_x**2 + 2 / kp.theta_t**2 + m.lam**2
        )
        return np.full(len(as_design(U)), value)

    def blocks(self, du, dy):
        du, dy = as_design(du), as_design(dy)
        return CovarianceBlocks(k_uu=self.kuu(du, du), k_yu=self.kyu(dy, du), k_yy=self.kyy(dy, dy))


def assemble_joint_protein(du, dy, kp: KernelParams, mech: MechanisticParams):
    return ProteinKernel(kp, mech).blocks(du, dy)
