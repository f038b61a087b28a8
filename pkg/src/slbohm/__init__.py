"""Stochastic Bohmian trajectories of Gaussian packets in a dissipative, fluctuating medium."""

from .core import (
    ConfigError,
    DimensionlessUnits,
    ExperimentConfig,
    LocalizationWarning,
    PacketState,
    PhysicalParams,
    Potential,
    PotentialKind,
    omega_eff,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionlessUnits",
    "ExperimentConfig",
    "LocalizationWarning",
    "PacketState",
    "PhysicalParams",
    "Potential",
    "PotentialKind",
    "omega_eff",
    "validate_config",
]
