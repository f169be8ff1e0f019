"""Latin hypercube designs refined for the maximin criterion by simulated annealing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

__all__ = ["LhdConfig", "random_lhd", "maximin_sa", "min_distance", "is_lhd", "to_box", "maximin_lhd"]


@dataclass(frozen=True)
class LhdConfig:
    n_points: int
    dims: int = 2
    sa_iterations: int = 10_000
    t0: float | None = None  # None -> 0.1 * min distance of the starting design
    decay: float = 0.995
    seed: int | None = 0

    def __post_init__(self):
        if self.n_points < 1 or self.dims < 1 or self.sa_iterations < 0:
            raise ValueError(f"invalid LHD size: {self}")
        if not 0 < self.decay < 1:
            raise ValueError(f"decay must lie in (0, 1), got {self.decay}")


def min_distance(design):
    if len(design) < 2:
        return np.inf
    return float(pdist(design).min())


def is_lhd(design):
    """True if every column puts exactly one point in each of the ``n`` strata."""
    design = np.asarray(design)
    n = len(design)
    strata = np.floor(design * n).astype(int)
    return all(sorted(col) == list(range(n)) for col in strata.T)


def random_lhd(cfg: LhdConfig, rng=None):
    """One point per stratum ``[k/n, (k+1)/n)`` along every axis, uniformly jittered."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    n, d = cfg.n_points, cfg.dims
    perms = np.column_stack([rng.permutation(n) for _ in range(d)])
    return (perms + rng.random((n, d))) / n


def maximin_sa(design, cfg: LhdConfig, rng=None, history=False):
    """Simulated annealing on the minimum pairwise distance.

    Proposals swap two entries of one column, which keeps the design a Latin
    hypercube.  Uphill moves are accepted with probability
    ``exp(delta / T)``; the temperature decays geometrically.  The best
    design seen is returned (with the per-iteration best distances when
    ``history`` is set).
    """
    rng = np.random.default_rng(None if cfg.seed is None else cfg.seed + 1) if rng is None else rng
    cur = np.array(design, dtype=float, copy=True)
    n, d = cur.shape
    cur_d = min_distance(cur)
    best, best_d = cur.copy(), cur_d
    trail = []
    temp = cfg.t0 if cfg.t0 is not None else 0.1 * (cur_d if np.isfinite(cur_d) else 1.0)
    if n < 2:
        return (best, trail) if history else best
    for _ in range(cfg.sa_iterations):
        col = rng.integers(d)
        i, j = rng.choice(n, size=2, replace=False)
        cur[[i, j], col] = cur[[j, i], col]
        new_d = min_distance(cur)
        delta = new_d - cur_d
        if delta >= 0 or (temp > 0 and rng.random() < np.exp(delta / temp)):
            cur_d = new_d
            if cur_d > best_d:
                best, best_d = cur.copy(), cur_d
        else:
            cur[[i, j], col] = cur[[j, i], col]
        temp *= cfg.decay
        trail.append(best_d)
    return (best, trail) if history else best


def maximin_lhd(cfg: LhdConfig):
    rng = np.random.default_rng(cfg.seed)
    return maximin_sa(random_lhd(cfg, rng), cfg, rng)


def to_box(design, lower, upper):
    """Affinely map a design from ``[0, 1]^d`` to the box ``[lower, upper]``."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    return lower + np.asarray(design) * (upper - lower)
