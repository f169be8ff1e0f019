"""Oracle-backed consistency checks, run by ``gapgp verify`` and the acceptance suite.

Each ``check_*`` function returns a :class:`Check` with the measured error, the
tolerance it was held to and the wall time.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import oracle, specfun
from .design import LhdConfig, maximin_lhd
from .experiments import toy_model
from .gp import _stack_cov, cholesky_with_jitter, condition, sample_joint
from .metrics import coverage, smse
from .mrna import MrnaKernel
from .params import TOY_KERNEL, TOY_MECH, GreensConfig, KernelParams, MechanisticParams
from .protein import kuu_protein, kyu_protein, kyy_protein
from .types import Channel, ChannelObservations

__all__ = [
    "Check",
    "check_specfun",
    "check_protein_operator",
    "check_mrna_quadrature",
    "check_boundary_zeroing",
    "check_truncation",
    "check_psd",
    "check_metrics",
    "check_pde_consistency",
    "run_all",
]


@dataclass
class Check:
    name: str
    passed: bool
    error: float
    tolerance: float
    seconds: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: error={self.error:.3g} tol={self.tolerance:.3g} ({self.seconds:.2f}s) {self.detail}"

    def to_dict(self):
        return asdict(self)


def _rel(a, b, floor=0.0):
    return abs(a - b) / max(abs(b), floor)


def check_specfun(grid=10, tol=1e-10):
    """Production erf / erfc / Faddeeva against the multiprecision oracles."""
    axis = np.linspace(-4, 4, grid)
    zs = (axis[:, None] + 1j * axis[None, :]).ravel()
    xs = np.array([-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 5.0])
    start = time.perf_counter()
    w = specfun.faddeeva(zs)
    e = specfun.erf(xs)
    ec = specfun.erfc(xs)
    elapsed = time.perf_counter() - start
    err = max(_rel(w[i], oracle.faddeeva_ref(z)) for i, z in enumerate(zs))
    err_erf = max(abs(e[i] - oracle.erf_taylor(x)) for i, x in enumerate(xs))
    err_erfc = max(_rel(ec[i], oracle.erfc_cf(x)) for i, x in enumerate(xs))
    worst = max(err, err_erf, err_erfc)
    return Check(
        "specfun-vs-oracle",
        worst <= tol and elapsed < 1.0,
        worst,
        tol,
        elapsed,
        f"faddeeva={err:.2g} erf={err_erf:.2g} erfc={err_erfc:.2g} on {len(zs)} grid points",
    )


def random_protein_configs(n, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        kp = KernelParams(rng.uniform(0.5, 2.0), rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.6))
        mech = MechanisticParams(rng.uniform(0.5, 2.0), rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.05))
        p1 = tuple(rng.uniform(0, 1, 2))
        p2 = tuple(np.array(p1) + rng.normal(0, 0.3, 2))
        yield kp, mech, p1, p2


def check_protein_operator(n=100, tol=1e-5, seed=0, rel_step=2e-2):
    """k_uu and k_yu equal the finite-difference operator applied to k_yy.

    Errors are relative to the reference value, with a floor of ``1e-6`` times
    the variance ``k_uu(p, p)`` (resp. ``|k_yu|`` scale) to avoid dividing by
    values that cross zero.
    """
    start = time.perf_counter()
    worst = 0.0
    for kp, mech, p1, p2 in random_protein_configs(n, seed):
        def surface(x, t, x2, t2, kp=kp):
            return kyy_protein((x, t), (x2, t2), kp)

        step = (rel_step * kp.theta_x, rel_step * kp.theta_t)
        ref_uu = oracle.fd_operator_apply(surface, p1, p2, mech, "both", step)
        ref_yu = oracle.fd_operator_apply(surface, p1, p2, mech, "second", step)
        scale_uu = kuu_protein(p1, p1, kp, mech)
        scale_yu = kp.sigma2 / mech.s_rate * (mech.lam + 2 * mech.diff / kp.theta_x**2 + 1 / kp.theta_t)
        worst = max(
            worst,
            _rel(kuu_protein(p1, p2, kp, mech), ref_uu, 1e-6 * scale_uu),
            _rel(kyu_protein(p1, p2, kp, mech), ref_yu, 1e-6 * scale_yu),
        )
    elapsed = time.perf_counter() - start
    return Check("protein-operator-fd", worst <= tol and elapsed < 10, worst, tol, elapsed, f"{n} random configurations")


def check_mrna_quadrature(levels=(0.15, 0.4, 0.65, 0.9), n_terms=5, tol=1e-3, kp=TOY_KERNEL, mech=TOY_MECH):
    """Closed-form k_yy / k_yu against trapezoid quadrature on a 4-D argument grid."""
    cfg = GreensConfig(1.0, n_terms)
    kern = MrnaKernel(kp, mech, cfg)
    start = time.perf_counter()
    pts = [(x, t) for x in levels for t in levels]
    P = np.array(pts)
    Kyy = kern.kyy(P, P)
    Kyu = kern.kyu(P, P)
    worst, n = 0.0, 0
    for i, p1 in enumerate(pts):
        for j, p2 in enumerate(pts):
            if j >= i:
                q = oracle.quad_kyy(p1, p2, kp, mech, cfg)
                worst = max(worst, _rel(Kyy[i, j], q.value))
                n += 1
            q = oracle.quad_kyu(p1, p2, kp, mech, cfg)
            worst = max(worst, _rel(Kyu[i, j], q.value))
            n += 1
    elapsed = time.perf_counter() - start
    return Check("mrna-quadrature", worst <= tol and elapsed < 300, worst, tol, elapsed, f"{n} argument combinations")


def check_boundary_zeroing(n=9, tol=1e-10, kp=TOY_KERNEL, mech=TOY_MECH, n_terms=20):
    """GP-mRNA protein covariances vanish on x in {0, l} and at t = 0."""
    l = 1.0
    kern = MrnaKernel(kp, mech, GreensConfig(l, n_terms))
    start = time.perf_counter()
    g = np.linspace(0, l, n)
    interior = np.array([(x, t) for x in g for t in g])
    boundary = np.array([(0.0, t) for t in g] + [(l, t) for t in g] + [(x, 0.0) for x in g])
    yy = np.abs(kern.kyy(boundary, interior)).max() / (kp.sigma2 * mech.s_rate**2)
    yy2 = np.abs(kern.kyy(interior, boundary)).max() / (kp.sigma2 * mech.s_rate**2)
    yu = np.abs(kern.kyu(boundary, interior)).max() / (kp.sigma2 * mech.s_rate)
    worst = float(max(yy, yy2, yu))
    elapsed = time.perf_counter() - start
    return Check("mrna-boundary-zeroing", worst <= tol, worst, tol, elapsed, f"{len(boundary)}x{len(interior)} pairs")


def check_truncation(n_lo=20, n_hi=40, tol=1e-4, levels=(0.1, 0.3667, 0.6333, 0.9), kp=TOY_KERNEL, mech=TOY_MECH):
    """``max |k(N=n_hi) - k(N=n_lo)| <= tol * max |k(N=n_hi)|`` over all pairs of toy-grid points.

    The error is taken relative to the largest kernel value of each block, since
    individual entries cross zero.  The element-wise maximum is reported in
    ``detail`` as well.
    """
    start = time.perf_counter()
    P = np.array([(x, t) for x in levels for t in levels])
    lo = MrnaKernel(kp, mech, GreensConfig(1.0, n_lo))
    hi = MrnaKernel(kp, mech, GreensConfig(1.0, n_hi))
    worst = 0.0
    detail = []
    for name, f_lo, f_hi in (("kyy", lo.kyy, hi.kyy), ("kyu", lo.kyu, hi.kyu)):
        a, b = f_lo(P, P), f_hi(P, P)
        scaled = float(np.abs(a - b).max() / np.abs(b).max())
        elementwise = float((np.abs(a - b) / np.abs(b)).max())
        worst = max(worst, scaled)
        detail.append(f"{name}: {scaled:.2g} of max|k| (element-wise {elementwise:.2g})")
    elapsed = time.perf_counter() - start
    return Check(f"mrna-truncation-N{n_lo}-vs-N{n_hi}", worst <= tol, worst, tol, elapsed, "; ".join(detail))


def check_psd(n_designs=20, n_points=30, tol=1e-6, seed=0, n_terms=20):
    """Joint matrices on random designs factorise with small relative jitter."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for variant in ("mrna", "protein"):
        kern = toy_model(variant, n_terms).kernel()
        for _ in range(n_designs):
            du = rng.random((n_points, 2))
            dy = rng.random((n_points, 2))
            K = _stack_cov(kern, [(Channel.U, du), (Channel.Y, dy)])
            _, jitter = cholesky_with_jitter(K)
            worst = max(worst, jitter / np.mean(np.diag(K)))
    elapsed = time.perf_counter() - start
    return Check("joint-psd", worst <= tol, worst, tol, elapsed, f"{2 * n_designs} joint matrices of size {2 * n_points}")


def check_metrics(seed=0, n=100_000):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    truth = rng.normal(size=50)
    anchor = abs(smse(truth, np.full_like(truth, truth.mean())) - 1.0)
    resid = rng.standard_normal(n)
    ca = coverage(resid, np.zeros(n), np.ones(n))
    err = max(anchor, abs(ca - 0.6827))
    elapsed = time.perf_counter() - start
    return Check("metrics-anchors", anchor == 0.0 and abs(ca - 0.6827) <= 0.01, err, 0.01, elapsed,
                 f"mean-predictor SMSE-1={anchor:.2g}, coverage={ca:.4f}")


def check_pde_consistency(seed=0, n_train=40, grid=81, tol=0.10, n_terms=10):
    """Crank-Nicolson on the posterior mean of u reproduces the posterior mean of y."""
    start = time.perf_counter()
    model = toy_model("mrna", n_terms)
    train = maximin_lhd(LhdConfig(n_train, 2, seed=seed))
    u, y = sample_joint(model, train, train, seed=seed)
    obs = [ChannelObservations(Channel.U, train, u), ChannelObservations(Channel.Y, train, y)]
    xs = np.linspace(0, 1, grid)
    ts = np.linspace(0, 1, grid)
    xx, tt = np.meshgrid(xs, ts)  # rows = time
    Q = np.column_stack([xx.ravel(), tt.ravel()])
    post = condition(model, obs, {Channel.U: Q, Channel.Y: Q})
    u_mean = post[Channel.U].mean.reshape(grid, grid)
    y_mean = post[Channel.Y].mean.reshape(grid, grid)
    y_cn = oracle.pde_solve(u_mean, model.hyper.mech, xs, ts)
    err = float(np.linalg.norm(y_cn - y_mean) / np.linalg.norm(y_mean))
    elapsed = time.perf_counter() - start
    return Check("pde-consistency", err <= tol, err, tol, elapsed, f"{grid}x{grid} grid, {n_train}+{n_train} observations")


def run_all(profile="full"):
    if profile == "quick":
        return [
            check_specfun(),
            check_protein_operator(n=20),
            check_mrna_quadrature(levels=(0.3, 0.8)),
            check_boundary_zeroing(),
            check_truncation(),
            check_psd(n_designs=3),
            check_metrics(),
            check_pde_consistency(grid=41),
        ]
    if profile != "full":
        raise ValueError(f"unknown verification profile {profile!r}")
    return [
        check_specfun(),
        check_protein_operator(),
        check_mrna_quadrature(),
        check_boundary_zeroing(),
        check_truncation(),
        check_psd(),
        check_metrics(),
        check_pde_consistency(),
    ]
