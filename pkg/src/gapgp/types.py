"""Data containers passed between the kernels, the GP layer and the CLI."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Channel",
    "DomainError",
    "as_design",
    "CovarianceBlocks",
    "ChannelObservations",
    "PosteriorField",
]


class DomainError(ValueError):
    """Raised for evaluation points outside the model's space-time domain."""


class Channel(str, enum.Enum):
    U = "U"  # mRNA, the driving force
    Y = "Y"  # protein, the PDE output

    @classmethod
    def parse(cls, token):
        if isinstance(token, cls):
            return token
        try:
            return cls(str(token).strip().upper())
        except ValueError:
            raise ValueError(f"unknown channel {token!r} (expected 'U' or 'Y')") from None


def as_design(points, domain_len=None):
    """Coerce ``points`` to a float array of shape ``(n, 2)`` holding ``(x, t)`` rows.

    When ``domain_len`` is given, also checks ``0 <= x <= domain_len`` and
    ``t >= 0``.
    """
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 2))
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"design must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("design contains non-finite coordinates")
    if domain_len is not None:
        x, t = arr[:, 0], arr[:, 1]
        tol = 1e-12 * domain_len
        if np.any(x < -tol) or np.any(x > domain_len + tol):
            raise DomainError(f"x outside [0, {domain_len}]")
        if np.any(t < 0):
            raise DomainError("negative time in design")
    return arr


@dataclass(frozen=True)
class CovarianceBlocks:
    """Blocks of the joint prior covariance of ``[u; y]``.

    ``k_yu`` has rows indexed by the y-design and columns by the u-design.
    """

    k_uu: np.ndarray
    k_yu: np.ndarray
    k_yy: np.ndarray

    def joint(self):
        return np.block([[self.k_uu, self.k_yu.T], [self.k_yu, self.k_yy]])


@dataclass(frozen=True)
class ChannelObservations:
    channel: Channel
    design: np.ndarray
    values: np.ndarray
    nugget: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "channel", Channel.parse(self.channel))
        object.__setattr__(self, "design", as_design(self.design))
        values = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", values)
        if len(values) != len(self.design):
            raise ValueError(
                f"{len(values)} values for {len(self.design)} design points in channel {self.channel.value}"
            )
        if not self.nugget >= 0:
            raise ValueError(f"nugget must be >= 0, got {self.nugget!r}")


@dataclass
class PosteriorField:
    channel: Channel
    design: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    n_clamped: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def std(self):
        return np.sqrt(self.variance)
