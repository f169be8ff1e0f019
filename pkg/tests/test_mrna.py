import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from gapgp import oracle
from gapgp.mrna import MrnaKernel, _h, assemble_joint_mrna, greens, kuu_mrna, kyu_mrna, kyy_mrna
from gapgp.params import GreensConfig, KernelParams, MechanisticParams, ParameterError
from gapgp.se import se
from gapgp.types import DomainError

KP = KernelParams(1.0, 0.3, 0.3)
MECH = MechanisticParams(1.0, 0.1, 0.01)
CFG5 = GreensConfig(1.0, 5)


@pytest.mark.parametrize("py,pu", [((0.4, 0.6), (0.4, 0.6)), ((0.2, 0.9), (0.7, 0.3)), ((0.85, 0.15), (0.5, 0.5))])
def test_kyu_matches_quadrature(py, pu):
    q = oracle.quad_kyu(py, pu, KP, MECH, CFG5)
    assert kyu_mrna(py, pu, KP, MECH, CFG5) == pytest.approx(q.value, rel=1e-4)


@pytest.mark.parametrize("p1,p2", [((0.4, 0.6), (0.4, 0.6)), ((0.2, 0.9), (0.7, 0.3))])
def test_kyy_matches_quadrature(p1, p2):
    q = oracle.quad_kyy(p1, p2, KP, MECH, CFG5)
    assert kyy_mrna(p1, p2, KP, MECH, CFG5) == pytest.approx(q.value, rel=1e-4)


def test_other_domain_and_fast_decay_match_quadrature():
    # l = 2 exercises the 1/l prefactors; large D makes beta_N ~ 1e3.
    kp = KernelParams(0.7, 0.5, 0.2)
    mech = MechanisticParams(1.3, 0.05, 0.9)
    cfg = GreensConfig(2.0, 9)
    for p1, p2 in [((0.5, 0.7), (1.3, 0.4)), ((1.1, 0.2), (0.9, 0.25))]:
        assert kyu_mrna(p1, p2, kp, mech, cfg) == pytest.approx(oracle.quad_kyu(p1, p2, kp, mech, cfg).value, rel=1e-4)
        assert kyy_mrna(p1, p2, kp, mech, cfg) == pytest.approx(oracle.quad_kyy(p1, p2, kp, mech, cfg).value, rel=1e-4)


def test_spatial_factor_against_dblquad():
    kern = MrnaKernel(KP, MECH, GreensConfig(1.0, 6))
    w = kern.omega
    for n, m in [(0, 0), (0, 2), (1, 3), (0, 1), (5, 5)]:
        ref, _ = integrate.dblquad(
            lambda s2, s: np.sin(w[n] * s) * np.sin(w[m] * s2) * se(s, s2, KP.theta_x), 0, 1, 0, 1, epsabs=1e-12
        )
        assert kern._C[n, m] == pytest.approx(ref, abs=1e-10)


def test_spatial_cross_against_quad():
    kern = MrnaKernel(KP, MECH, GreensConfig(1.0, 6))
    xp = np.array([0.0, 0.3, 1.0, 1.7])
    got = kern.spatial_cross(xp)
    for i, x in enumerate(xp):
        for n in range(6):
            ref, _ = integrate.quad(lambda s: np.sin(kern.omega[n] * s) * se(s, x, KP.theta_x), 0, 1, epsabs=1e-13)
            assert got[i, n] == pytest.approx(ref, abs=1e-11)


def test_h_against_quadrature():
    th = 0.3
    for bm, bn, tp, t in [(0.2, 0.5, 0.7, 0.4), (3.0, 1.0, 0.2, 0.9), (50.0, 80.0, 1.0, 1.0)]:
        def integrand(tau2, tau):
            return np.exp(-bn * (t - tau)) * np.exp(-bm * (tp - tau2)) * se(tau, tau2, th)

        ref, _ = integrate.dblquad(integrand, 0, t, 0, tp, epsabs=1e-13)
        # K(t, t') = h(bm, bn, t', t) + h(bn, bm, t, t') scaled by sqrt(pi) theta / 2
        got = 0.5 * np.sqrt(np.pi) * th * (_h(bm, bn, tp, t, th) + _h(bn, bm, t, tp, th))
        assert got == pytest.approx(ref, rel=1e-8)


def test_large_decay_rates_stay_finite():
    mech = MechanisticParams(1.0, 0.1, 5.0)
    kern = MrnaKernel(KP, mech, GreensConfig(1.0, 40))  # beta_40 ~ 8e4
    P = np.array([[0.3, 0.5], [0.7, 1.0]])
    assert np.all(np.isfinite(kern.kyy(P, P)))
    assert np.all(np.isfinite(kern.kyu(P, P)))


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_kyy_symmetric(x1, t1, x2, t2):
    a = kyy_mrna((x1, t1), (x2, t2), KP, MECH)
    b = kyy_mrna((x2, t2), (x1, t1), KP, MECH)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("boundary", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.0, 0.0)])
def test_boundary_zeroing(boundary):
    for other in [(0.3, 0.4), (0.9, 1.0), boundary]:
        assert abs(kyy_mrna(boundary, other, KP, MECH)) <= 1e-12
        assert abs(kyu_mrna(boundary, other, KP, MECH)) <= 1e-12


def test_kuu_is_plain_se():
    assert kuu_mrna((0.1, 0.2), (0.4, 0.2), KP) == pytest.approx(np.exp(-1.0))


def test_greens_function():
    cfg = GreensConfig(1.0, 200)
    # G integrates a stationary sine mode exactly: int G(x, xi, t) sin(pi xi) = exp(-beta_1 t) sin(pi x)
    xi = np.linspace(0, 1, 2001)
    vals = np.array([greens(0.3, s, 0.5, cfg, MECH) for s in xi])
    lhs = integrate.trapezoid(vals * np.sin(np.pi * xi), xi)
    assert lhs == pytest.approx(np.exp(-(0.1 + 0.01 * np.pi**2) * 0.5) * np.sin(0.3 * np.pi), rel=1e-5)
    assert greens(0.0, 0.4, 0.2, cfg, MECH) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        greens(1.5, 0.4, 0.2, cfg, MECH)


def test_joint_matrix_blocks():
    rng = np.random.default_rng(3)
    du, dy = rng.random((7, 2)), rng.random((5, 2))
    K = assemble_joint_mrna(du, dy, KP, MECH, CFG5).joint()
    assert K.shape == (12, 12)
    assert np.allclose(K, K.T)
    assert K[7 + 2, 3] == pytest.approx(kyu_mrna(dy[2], du[3], KP, MECH, CFG5), rel=1e-12)


def test_rejects_non_decaying_modes():
    with pytest.raises(ParameterError):
        MrnaKernel(KP, MechanisticParams(1.0, 0.0, 0.0))


def test_s_scaling():
    m2 = MechanisticParams(2.0, MECH.lam, MECH.diff)
    p1, p2 = (0.3, 0.6), (0.5, 0.8)
    assert kyy_mrna(p1, p2, KP, m2) == pytest.approx(4 * kyy_mrna(p1, p2, KP, MECH), rel=1e-12)
    assert kyu_mrna(p1, p2, KP, m2) == pytest.approx(2 * kyu_mrna(p1, p2, KP, MECH), rel=1e-12)
