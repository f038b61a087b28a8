"""Domain types shared by every module.

Internal arithmetic is done in natural units (hbar = m = 1 unless overridden).
Dimensionless "bar" units, built on the initial packet width ``sigma0``, are
only used at the reporting boundary (see :class:`DimensionlessUnits`).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants.

    ``errors`` holds one message per offending field.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class LocalizationWarning(UserWarning):
    """The incoming packet is not well localized left of the barrier."""


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, hbar, friction and the two temperatures (as k_B*T energies).

    ``kTs`` is the temperature of the initial thermal ensemble; ``None`` means
    "same as the bath", which is the fluctuation-dissipation balanced case.
    """

    mass: float = 1.0
    hbar: float = 1.0
    gamma: float = 0.0
    kT: float = 0.0
    kTs: float | None = None

    def __post_init__(self):
        errors = self.violations()
        if errors:
            raise ConfigError(errors)

    def violations(self):
        errors = []
        if not self.mass > 0:
            errors.append("mass must be > 0")
        if not self.hbar > 0:
            errors.append("hbar must be > 0")
        if not self.gamma >= 0:
            errors.append("gamma must be >= 0")
        if not self.kT >= 0:
            errors.append("kT must be >= 0")
        if self.kTs is not None and not self.kTs >= 0:
            errors.append("kTs must be >= 0")
        return errors

    @property
    def system_kT(self) -> float:
        return self.kT if self.kTs is None else self.kTs

    @property
    def noise_strength(self) -> float:
        """Coefficient 2 m gamma k_B T of the delta-correlated random force."""
        return 2.0 * self.mass * self.gamma * self.kT

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


class PotentialKind(str, enum.Enum):
    FREE = "free"
    LINEAR = "linear"
    REPELLER = "repeller"
    HARMONIC = "harmonic"


@dataclass(frozen=True)
class Potential:
    """Quadratic potential V(x) = m g x - (s/2) m omega^2 x^2.

    s = +1 for the parabolic repeller, -1 for the harmonic well and 0 for the
    free and linear kinds. A repeller may also carry a linear term ``g``.
    Only this closed family is supported: the Gaussian packet stays exact
    only when V'' is constant in space.
    """

    kind: PotentialKind = PotentialKind.FREE
    g: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        kind = PotentialKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.omega < 0:
            raise ConfigError(["omega must be >= 0"])
        if kind is PotentialKind.FREE and (self.g != 0 or self.omega != 0):
            raise ConfigError(["free potential takes no g or omega"])
        if kind is PotentialKind.LINEAR and self.omega != 0:
            raise ConfigError(["linear potential takes no omega"])
        if kind is PotentialKind.HARMONIC and self.g != 0:
            raise ConfigError(["harmonic potential takes no g"])
        if kind in (PotentialKind.REPELLER, PotentialKind.HARMONIC) and self.omega == 0:
            raise ConfigError([f"{kind.value} potential needs omega > 0"])

    @classmethod
    def free(cls):
        return cls(PotentialKind.FREE)

    @classmethod
    def linear(cls, g):
        return cls(PotentialKind.LINEAR, g=g)

    @classmethod
    def repeller(cls, omega, g=0.0):
        return cls(PotentialKind.REPELLER, g=g, omega=omega)

    @classmethod
    def harmonic(cls, omega):
        return cls(PotentialKind.HARMONIC, omega=omega)

    @property
    def stiffness(self) -> float:
        """kappa such that -V'(x)/m = -g + kappa x."""
        if self.kind is PotentialKind.REPELLER:
            return self.omega**2
        if self.kind is PotentialKind.HARMONIC:
            return -self.omega**2
        return 0.0

    def value(self, x, mass=1.0):
        x = np.asarray(x, dtype=float)
        return mass * (self.g * x - 0.5 * self.stiffness * x**2)

    def gradient(self, x, mass=1.0):
        x = np.asarray(x, dtype=float)
        return mass * (self.g - self.stiffness * x)

    def curvature(self, mass=1.0) -> float:
        return -mass * self.stiffness

    def acceleration(self, x):
        """Force per unit mass, -V'(x)/m."""
        return -self.g + self.stiffness * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class PacketState:
    q: float
    qdot: float
    sigma: float
    sigmadot: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError(["sigma must be > 0"])
        if not self.t >= 0:
            raise ConfigError(["t must be >= 0"])


def omega_squared(params: PhysicalParams, potential: Potential) -> float:
    """gamma^2/4 + kappa; negative means an underdamped harmonic well."""
    return 0.25 * params.gamma**2 + potential.stiffness


def omega_eff(params: PhysicalParams, potential: Potential | None = None) -> float:
    """Effective frequency Omega = sqrt(omega^2 + gamma^2/4).

    For the harmonic well the substitution omega -> i omega gives
    Omega^2 = gamma^2/4 - omega^2. When that is negative the motion is
    oscillatory and the returned value is the real angular frequency
    sqrt(omega^2 - gamma^2/4); use :func:`is_oscillatory` to tell the branches
    apart.
    """
    potential = potential or Potential.free()
    return math.sqrt(abs(omega_squared(params, potential)))


def is_oscillatory(params: PhysicalParams, potential: Potential) -> bool:
    return omega_squared(params, potential) < 0


@dataclass(frozen=True)
class DimensionlessUnits:
    """Reference scales built on the initial width sigma0.

    time t~ = 2 m sigma0^2 / hbar, frequency 1/t~,
    temperature (as energy) hbar^2 / (4 m sigma0^2), length sigma0.
    """

    sigma0: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("sigma0", "mass", "hbar"):
            if not getattr(self, name) > 0:
                raise ConfigError([f"{name} must be > 0"])

    @property
    def time(self) -> float:
        return 2.0 * self.mass * self.sigma0**2 / self.hbar

    @property
    def frequency(self) -> float:
        return 1.0 / self.time

    @property
    def energy(self) -> float:
        return self.hbar**2 / (4.0 * self.mass * self.sigma0**2)

    @property
    def length(self) -> float:
        return self.sigma0

    # bar -> natural
    def t(self, tbar):
        return np.asarray(tbar) * self.time

    def rate(self, ratebar):
        return np.asarray(ratebar) * self.frequency

    def kT(self, Tbar):
        return np.asarray(Tbar) * self.energy

    def x(self, xbar):
        return np.asarray(xbar) * self.length

    # natural -> bar
    def tbar(self, t):
        return np.asarray(t) / self.time

    def ratebar(self, rate):
        return np.asarray(rate) / self.frequency

    def Tbar(self, kT):
        return np.asarray(kT) / self.energy

    def xbar(self, x):
        return np.asarray(x) / self.length

    @classmethod
    def electron(cls, sigma0_angstrom=0.4):
        """SI reference scales for an electron packet, for reporting only."""
        from scipy import constants as c

        sigma0 = sigma0_angstrom * 1e-10
        t_ref = 2.0 * c.m_e * sigma0**2 / c.hbar
        T_ref = c.hbar**2 / (4.0 * c.m_e * sigma0**2 * c.k)
        return {"time_s": t_ref, "frequency_hz": 1.0 / t_ref, "temperature_K": T_ref}


TRANSMISSION_PRESETS = ("transmission", "dwell", "repeller-arrival")
PRESET_NAMES = (
    "uncertainty",
    "brownian-bohmian",
    "falling-arrival",
    "repeller-arrival",
    "transmission",
    "dwell",
    "custom",
)


@dataclass
class ExperimentConfig:
    """Fully resolved experiment description, in natural units."""

    preset: str = "custom"
    params: PhysicalParams = field(default_factory=PhysicalParams)
    potential: Potential = field(default_factory=Potential)
    sigma0: float = 1.0
    q0: float = 0.0
    v0: float = 0.0
    n_traj: int = 5000
    dt: float = 0.002
    t_end: float = 100.0
    seed: int = 20190101
    classical: bool = False
    x_d: float = 0.0
    x1: float = -1.0
    x2: float = 1.0
    out_dir: str = "out"
    sweeps: dict = field(default_factory=dict)


def validate_config(cfg: ExperimentConfig) -> list[str]:
    """Check every invariant; raise :class:`ConfigError` listing all failures.

    Returns the list of (non-fatal) warnings, which are also emitted through
    :mod:`warnings`.
    """
    errors = []
    errors += cfg.params.violations()
    if not cfg.sigma0 > 0:
        errors.append("sigma0 must be > 0")
    if not (isinstance(cfg.n_traj, (int, np.integer)) and cfg.n_traj >= 1):
        errors.append("n_traj must be an integer >= 1")
    if not cfg.dt > 0:
        errors.append("dt must be > 0")
    if not cfg.t_end > 0:
        errors.append("t_end must be > 0")
    if cfg.preset not in PRESET_NAMES:
        errors.append(f"preset must be one of {', '.join(PRESET_NAMES)}")
    if cfg.x1 > cfg.x2:
        errors.append("x1 must be <= x2")
    if not (0 <= int(cfg.seed) < 2**64):
        errors.append("seed must be a 64-bit unsigned integer")
    if errors:
        raise ConfigError(errors)

    found = []
    if cfg.preset in TRANSMISSION_PRESETS and cfg.q0 + 3.0 * cfg.sigma0 >= 0:
        msg = (
            f"q0 + 3 sigma0 = {cfg.q0 + 3.0 * cfg.sigma0:g} >= 0: packet is not "
            "well localized left of the barrier"
        )
        warnings.warn(msg, LocalizationWarning, stacklevel=2)
        found.append(msg)
    return found
