"""Synthetic experiments on ``[0, 1]^2``: sample from the joint prior, condition, score."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import LhdConfig, maximin_lhd
from .gp import Hyperparameters, Model, condition, sample_joint
from .metrics import summary
from .params import TOY_KERNEL, TOY_MECH, GreensConfig
from .types import Channel, ChannelObservations

__all__ = ["REGIMES", "ToyData", "toy_model", "cell_grid", "toy_dataset", "evaluate_regimes"]

REGIMES = {"u-only": (Channel.U,), "y-only": (Channel.Y,), "both": (Channel.U, Channel.Y)}


@dataclass
class ToyData:
    train: np.ndarray
    test: np.ndarray
    u_train: np.ndarray
    y_train: np.ndarray
    u_test: np.ndarray
    y_test: np.ndarray


def toy_model(variant, n_terms=10, kp=TOY_KERNEL, mech=TOY_MECH):
    return Model(variant, Hyperparameters(mech, kp), GreensConfig(1.0, n_terms))


def cell_grid(n):
    """Cell-centre grid of ``n * n`` points in ``(0, 1)^2``, x varying fastest."""
    c = (np.arange(n) + 0.5) / n
    xx, tt = np.meshgrid(c, c)
    return np.column_stack([xx.ravel(), tt.ravel()])


def toy_dataset(model, seed, n_train=40, test_grid=20, sa_iterations=10_000):
    """Maximin-LHD training design shared by both channels plus a held-out grid.

    Truth for all points comes from a single joint prior draw.
    """
    train = maximin_lhd(LhdConfig(n_train, 2, sa_iterations=sa_iterations, seed=seed))
    test = cell_grid(test_grid)
    pts = np.vstack([train, test])
    u, y = sample_joint(model, pts, pts, seed=seed)
    k = len(train)
    return ToyData(train, test, u[:k], y[:k], u[k:], y[k:])


def evaluate_regimes(model, data: ToyData, regimes=tuple(REGIMES)):
    """Q2 / SMSE / CA on the test grid for each training regime and channel."""
    out = {}
    for name in regimes:
        obs = []
        for ch in REGIMES[name]:
            values = data.u_train if ch is Channel.U else data.y_train
            obs.append(ChannelObservations(ch, data.train, values))
        post = condition(model, obs, {Channel.U: data.test, Channel.Y: data.test})
        out[name] = {
            "U": summary(data.u_test, post[Channel.U].mean, post[Channel.U].variance),
            "Y": summary(data.y_test, post[Channel.Y].mean, post[Channel.Y].variance),
        }
    return out
