"""Physically-inspired Gaussian processes for coupled mRNA / protein expression."""
from .gp import Hyperparameters, Model, condition, fit, log_marginal_likelihood, sample_joint
from .mrna import MrnaKernel
from .params import PRESETS, GreensConfig, KernelParams, MechanisticParams, preset
from .protein import ProteinKernel
from .types import Channel, ChannelObservations, PosteriorField

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "ChannelObservations",
    "GreensConfig",
    "Hyperparameters",
    "KernelParams",
    "MechanisticParams",
    "Model",
    "MrnaKernel",
    "PRESETS",
    "PosteriorField",
    "ProteinKernel",
    "condition",
    "fit",
    "log_marginal_likelihood",
    "preset",
    "sample_joint",
]
