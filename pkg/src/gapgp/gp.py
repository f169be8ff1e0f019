"""Joint Gaussian process over the mRNA ``u`` and protein ``y`` channels.

The joint prior of ``[u; y]`` is zero-mean with covariance
``[[K_uu, K_yu^T], [K_yu, K_yy]]``; the blocks come from either
:class:`~gapgp.mrna.MrnaKernel` or :class:`~gapgp.protein.ProteinKernel`.
Any subset of channels may be observed and any subset queried.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg, optimize

from .mrna import MrnaKernel
from .params import GreensConfig, KernelParams, MechanisticParams
from .protein import ProteinKernel
from .types import Channel, PosteriorField, as_design

__all__ = [
    "NumericalError",
    "FitError",
    "Hyperparameters",
    "Model",
    "FitOptions",
    "FitResult",
    "cholesky_with_jitter",
    "cross_cov",
    "sample_joint",
    "condition",
    "log_marginal_likelihood",
    "fit",
    "default_nuggets",
]

log = logging.getLogger(__name__)

MECH_FIELDS = ("s_rate", "lam", "diff")
KERNEL_FIELDS = ("sigma2", "theta_x", "theta_t")
ALL_FIELDS = MECH_FIELDS + KERNEL_FIELDS
_LOG_FLOOR = 1e-12


class NumericalError(np.linalg.LinAlgError):
    """Factorisation failed even at the largest admissible jitter."""


class FitError(RuntimeError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


def cholesky_with_jitter(m, start=1e-10, max_jitter=1e-4):
    """Lower Cholesky factor of ``m + jitter * I``.

    ``jitter`` is 0 if ``m`` factorises as is, otherwise it starts at
    ``start * mean(diag(m))`` and grows tenfold up to
    ``max_jitter * mean(diag(m))``.

    Returns
    -------
    (L, jitter)
    """
    m = np.asarray(m, dtype=float)
    if m.shape[0] == 0:
        return np.zeros((0, 0)), 0.0
    scale = float(np.mean(np.diag(m)))
    if not scale > 0:
        scale = 1.0
    jitter = 0.0
    rel = start
    eye = np.eye(m.shape[0])
    while True:
        try:
            return np.linalg.cholesky(m + jitter * eye), jitter
        except np.linalg.LinAlgError:
            if rel > max_jitter * (1 + 1e-9):
                break
            jitter = rel * scale
            rel *= 10.0
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])
    raise NumericalError(
        f"matrix not positive definite with jitter {jitter:.3g} (min eigenvalue {min_eig:.3g})"
    )


@dataclass(frozen=True)
class Hyperparameters:
    """Everything the likelihood depends on.

    ``frozen`` names fields held fixed by :func:`fit`; the shorthand
    ``"mech"`` expands to ``s_rate``, ``lam`` and ``diff``.
    """

    mech: MechanisticParams
    kernel: KernelParams
    nuggets: dict = field(default_factory=lambda: {Channel.U: 0.0, Channel.Y: 0.0})
    frozen: frozenset = frozenset()

    def __post_init__(self):
        nug = {Channel.U: 0.0, Channel.Y: 0.0}
        nug.update({Channel.parse(k): float(v) for k, v in self.nuggets.items()})
        if any(v < 0 for v in nug.values()):
            raise ValueError("nuggets must be >= 0")
        object.__setattr__(self, "nuggets", nug)
        frozen = set()
        for name in self.frozen:
            if name == "mech":
                frozen.update(MECH_FIELDS)
            elif name == "kernel":
                frozen.update(KERNEL_FIELDS)
            elif name in ALL_FIELDS:
                frozen.add(name)
            else:
                raise ValueError(f"unknown field {name!r} in frozen set")
        object.__setattr__(self, "frozen", frozenset(frozen))

    def values(self):
        return {**self.mech.to_dict(), **self.kernel.to_dict()}

    def free_fields(self):
        return [f for f in ALL_FIELDS if f not in self.frozen]

    def with_values(self, **kw):
        vals = self.values()
        vals.update(kw)
        return replace(
            self,
            mech=MechanisticParams(*(vals[f] for f in MECH_FIELDS)),
            kernel=KernelParams(*(vals[f] for f in KERNEL_FIELDS)),
        )

    def to_dict(self):
        return {
            "mech": self.mech.to_dict(),
            "kernel": self.kernel.to_dict(),
            "nuggets": {k.value: v for k, v in self.nuggets.items()},
            "frozen": sorted(self.frozen),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            mech=MechanisticParams(**d["mech"]),
            kernel=KernelParams(**d["kernel"]),
            nuggets=d.get("nuggets", {}),
            frozen=frozenset(d.get("frozen", ())),
        )


@dataclass(frozen=True)
class Model:
    variant: str  # "mrna" or "protein"
    hyper: Hyperparameters
    greens: GreensConfig = GreensConfig()

    def __post_init__(self):
        if self.variant not in ("mrna", "protein"):
            raise ValueError(f"unknown model variant {self.variant!r}")

    def kernel(self):
        cls = MrnaKernel if self.variant == "mrna" else ProteinKernel
        return cls(self.hyper.kernel, self.hyper.mech, self.greens)

    def with_hyper(self, hyper):
        return replace(self, hyper=hyper)


def cross_cov(kernel, ca, A, cb, B):
    """Covariance matrix between channel ``ca`` at ``A`` and channel ``cb`` at ``B``."""
    ca, cb = Channel.parse(ca), Channel.parse(cb)
    if ca is Channel.U and cb is Channel.U:
        return kernel.kuu(A, B)
    if ca is Channel.Y and cb is Channel.Y:
        return kernel.kyy(A, B)
    if ca is Channel.Y:
        return kernel.kyu(A, B)
    return kernel.kyu(B, A).T


def _prior_diag(kernel, channel, A):
    return kernel.kuu_diag(A) if Channel.parse(channel) is Channel.U else kernel.kyy_diag(A)


def _stack_cov(kernel, parts):
    """Dense covariance of the concatenation of ``(channel, design)`` parts."""
    blocks = []
    for i, (ci, Ai) in enumerate(parts):
        row = []
        for j, (cj, Aj) in enumerate(parts):
            if j < i:
                row.append(blocks[j][i].T)
            else:
                row.append(cross_cov(kernel, ci, Ai, cj, Aj))
        blocks.append(row)
    K = np.block(blocks) if parts else np.zeros((0, 0))
    return 0.5 * (K + K.T)


def sample_joint(model: Model, du, dy, seed=None, n_samples=None):
    """Draw ``(u, y)`` from the joint prior at designs ``du`` and ``dy``.

    Rows whose prior variance is numerically zero (e.g. GP-mRNA protein at
    ``x = 0`` or ``t = 0``) are returned as exact zeros instead of being
    polluted by factorisation jitter.  With ``n_samples`` the arrays gain a
    trailing sample axis.
    """
    du, dy = as_design(du), as_design(dy)
    kernel = model.kernel()
    K = _stack_cov(kernel, [(Channel.U, du), (Channel.Y, dy)])
    d = np.diag(K)
    live = d > 1e-12 * max(float(d.max(initial=0.0)), 1e-300)
    rng = np.random.default_rng(seed)
    k = 1 if n_samples is None else int(n_samples)
    out = np.zeros((len(d), k))
    if np.any(live):
        L, _ = cholesky_with_jitter(K[np.ix_(live, live)])
        out[live] = L @ rng.standard_normal((int(live.sum()), k))
    if n_samples is None:
        out = out[:, 0]
    return out[: len(du)], out[len(du):]


def _observed(kernel, obs, hyper):
    if not obs:
        raise ValueError("at least one observation set is required")
    parts = [(o.channel, o.design) for o in obs]
    K = _stack_cov(kernel, parts)
    nug = np.concatenate([np.full(len(o.design), max(o.nugget, hyper.nuggets[o.channel])) for o in obs])
    K[np.diag_indices_from(K)] += nug
    v = np.concatenate([o.values for o in obs])
    return parts, K, v


def condition(model: Model, obs, query):
    """Posterior mean and variance per queried channel.

    Parameters
    ----------
    obs : list of ChannelObservations
    query : mapping ``channel -> design``

    Returns
    -------
    dict mapping :class:`Channel` to :class:`PosteriorField`.
    """
    obs = [o for o in obs if len(o.design)]
    kernel = model.kernel()
    parts, K, v = _observed(kernel, obs, model.hyper)
    L, jitter = cholesky_with_jitter(K)
    alpha = linalg.cho_solve((L, True), v)
    result = {}
    for ch, Q in query.items():
        ch = Channel.parse(ch)
        Q = as_design(Q)
        if len(Q) == 0:
            raise ValueError(f"empty query design for channel {ch.value}")
        Kqo = np.hstack([cross_cov(kernel, ch, Q, c, A) for c, A in parts])
        mean = Kqo @ alpha
        V = linalg.solve_triangular(L, Kqo.T, lower=True)
        var = _prior_diag(kernel, ch, Q) - np.einsum("ij,ij->j", V, V)
        neg = var < 0
        result[ch] = PosteriorField(
            channel=ch,
            design=Q,
            mean=mean,
            variance=np.where(neg, 0.0, var),
            n_clamped=int(neg.sum()),
            extra={"jitter": jitter},
        )
    return result


def log_marginal_likelihood(model: Model, obs):
    """``log N(v | 0, K + nuggets)`` over all observed channels jointly."""
    obs = [o for o in obs if len(o.design)]
    _, K, v = _observed(model.kernel(), obs, model.hyper)
    L, _ = cholesky_with_jitter(K)
    alpha = linalg.solve_triangular(L, v, lower=True)
    return float(-0.5 * alpha @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * len(v) * math.log(2 * math.pi))


def default_nuggets(obs, rel=1e-6):
    """Per-channel nugget ``rel * var(values)`` used for real data."""
    out = {Channel.U: 0.0, Channel.Y: 0.0}
    for o in obs:
        if len(o.values) > 1:
            out[o.channel] = max(out[o.channel], rel * float(np.var(o.values)))
    return out


@dataclass
class FitOptions:
    method: str = "nelder-mead"  # or "l-bfgs-b" (numerical gradients)
    n_restarts: int = 1
    maxiter: int | None = None  # early stopping cap on optimiser iterations
    restart_scale: float = 0.5  # std-dev of log-space perturbation for extra starts
    simplex_step: float = 0.25  # log-space edge of the initial Nelder-Mead simplex
    xatol: float = 1e-4
    fatol: float = 1e-6
    seed: int | None = 0


@dataclass
class FitResult:
    hyper: Hyperparameters
    loglik: float
    initial_loglik: float
    trace: list
    n_evals: int

    def to_dict(self):
        return {
            "hyperparameters": self.hyper.to_dict(),
            "loglik": self.loglik,
            "initial_loglik": self.initial_loglik,
            "n_evals": self.n_evals,
            "trace": self.trace,
        }


def fit(model: Model, obs, options: FitOptions | None = None):
    """Maximum-likelihood estimate of the free hyperparameters.

    Positive fields are optimised on a log scale; fields listed in
    ``model.hyper.frozen`` are left untouched.  The returned likelihood is
    never below the starting one.
    """
    options = options or FitOptions()
    hyper0 = model.hyper
    free = hyper0.free_fields()
    start_vals = hyper0.values()
    trace = []

    def unpack(z):
        return hyper0.with_values(**{f: float(np.exp(zi)) for f, zi in zip(free, z)})

    def objective(z):
        try:
            ll = log_marginal_likelihood(model.with_hyper(unpack(z)), obs)
        except (NumericalError, ValueError, ArithmeticError) as exc:
            log.debug("likelihood failed at %s: %s", z, exc)
            return 1e25
        if not math.isfinite(ll):
            return 1e25
        trace.append({"params": {f: float(np.exp(zi)) for f, zi in zip(free, z)}, "loglik": ll})
        return -ll

    try:
        ll0 = log_marginal_likelihood(model, obs)
    except NumericalError:
        ll0 = -math.inf
    if not free:
        return FitResult(hyper0, ll0, ll0, trace, 0)

    z0 = np.log([max(start_vals[f], _LOG_FLOOR) for f in free])
    rng = np.random.default_rng(options.seed)
    starts = [z0] + [z0 + options.restart_scale * rng.standard_normal(len(z0)) for _ in range(options.n_restarts - 1)]
    best_z, best_f, n_evals = None, math.inf, 0
    for z_start in starts:
        if options.method == "nelder-mead":
            # scipy's default simplex is 5% of each coordinate, which collapses for
            # log-parameters near zero (e.g. sigma2 = 1); use a fixed log-space edge.
            simplex = np.vstack([z_start, z_start + options.simplex_step * np.eye(len(z_start))])
            opts = {"xatol": options.xatol, "fatol": options.fatol, "initial_simplex": simplex}
            if options.maxiter is not None:
                opts["maxiter"] = options.maxiter
            res = optimize.minimize(objective, z_start, method="Nelder-Mead", options=opts)
        elif options.method == "l-bfgs-b":
            opts = {} if options.maxiter is None else {"maxiter": options.maxiter}
            res = optimize.minimize(objective, z_start, method="L-BFGS-B", options=opts)
        else:
            raise ValueError(f"unknown optimiser {options.method!r}")
        n_evals += res.nfev
        if res.fun < best_f:
            best_z, best_f = res.x, res.fun
    if best_z is None or best_f >= 1e25:
        raise FitError("every optimiser start failed to factorise the covariance", trace)
    best = unpack(best_z)
    if -best_f < ll0:
        best, best_f = hyper0, -ll0
    return FitResult(best, float(-best_f), ll0, trace, n_evals)
