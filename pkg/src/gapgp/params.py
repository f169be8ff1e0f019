"""Parameter containers shared by both model variants.

Length-scale convention: every squared-exponential factor in this package is
``exp(-(z - z')**2 / theta**2)``, i.e. *without* the factor 2 that most GP
libraries put in the denominator.  A length-scale of 0.3 here corresponds to
``0.3 / sqrt(2)`` in the scikit-learn / GPy convention.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

__all__ = [
    "ParameterError",
    "KernelParams",
    "MechanisticParams",
    "GreensConfig",
    "PRESETS",
    "TOY_KERNEL",
    "TOY_MECH",
    "preset",
]


class ParameterError(ValueError):
    """Raised when a parameter is outside its admissible range."""


def _finite(name, value):
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class KernelParams:
    """Prior variance and space/time length-scales of the SE product prior."""

    sigma2: float
    theta_x: float
    theta_t: float

    def __post_init__(self):
        for name in ("sigma2", "theta_x", "theta_t"):
            value = getattr(self, name)
            _finite(name, value)
            if value <= 0:
                raise ParameterError(f"{name} must be > 0, got {value!r}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class MechanisticParams:
    """Constants of ``dy/dt = S u - lambda y + D d2y/dx2``."""

    s_rate: float
    lam: float
    diff: float

    def __post_init__(self):
        for name in ("s_rate", "lam", "diff"):
            _finite(name, getattr(self, name))
        if self.s_rate <= 0:
            raise ParameterError(f"s_rate must be > 0, got {self.s_rate!r}")
        if self.lam < 0:
            raise ParameterError(f"lam must be >= 0, got {self.lam!r}")
        if self.diff < 0:
            raise ParameterError(f"diff must be >= 0, got {self.diff!r}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class GreensConfig:
    """Spatial domain length and truncation of the Green's-function sine series."""

    domain_len: float = 1.0
    n_terms: int = 20

    def __post_init__(self):
        _finite("domain_len", self.domain_len)
        if self.domain_len <= 0:
            raise ParameterError(f"domain_len must be > 0, got {self.domain_len!r}")
        if int(self.n_terms) != self.n_terms or self.n_terms < 1:
            raise ParameterError(f"n_terms must be a positive integer, got {self.n_terms!r}")

    def omega(self):
        """Spatial frequencies ``n pi / l`` for ``n = 1..N`` as an array."""
        import numpy as np

        return np.arange(1, self.n_terms + 1) * np.pi / self.domain_len

    def decay(self, mech: MechanisticParams):
        """Per-mode decay rates ``lambda + D omega_n**2``."""
        return mech.lam + mech.diff * self.omega() ** 2


# Toy setup used for the synthetic experiments.
TOY_KERNEL = KernelParams(sigma2=1.0, theta_x=0.3, theta_t=0.3)
TOY_MECH = MechanisticParams(s_rate=1.0, lam=0.1, diff=0.01)

# Translation / decay / diffusion rates for the trunk gap genes (Becker et al., 2013).
PRESETS = {
    "becker-kr": MechanisticParams(s_rate=0.0970, lam=0.0764, diff=0.0015),
    "becker-kni": MechanisticParams(s_rate=0.0783, lam=0.0770, diff=0.0125),
    "becker-gt": MechanisticParams(s_rate=0.1107, lam=0.1110, diff=0.0159),
    "toy": TOY_MECH,
}


def preset(name: str) -> MechanisticParams:
    try:
        return PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
