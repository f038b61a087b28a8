"""Seeded random streams: bath white noise, Maxwell-Boltzmann velocities, Born positions.

All draws come from Philox (counter-based) generators spawned from one master
seed. Bath noise has one substream per trajectory, keyed by ``(seed, layer,
index)``. Born offsets and initial velocities are read from a single stream
per layer, where trajectory i takes the i-th normal. Either way a trajectory
sees the same numbers no matter how the ensemble is chunked or scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Disjoint substream ranges of one master seed.
LAYER_BORN = 0
LAYER_VELOCITY = 1
LAYER_BATH = 2


def substream(seed: int, layer: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(layer), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def _layer_normals(seed, layer, indices):
    """Normal number ``i`` of the layer's single stream, for each index i.

    The layer is one Philox stream read in trajectory order, so draw i does
    not depend on which other indices are requested.
    """
    indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    if indices.size == 0:
        return np.zeros(0)
    if indices.min() < 0:
        raise ValueError("indices must be >= 0")
    z = substream(seed, layer, 0).standard_normal(int(indices.max()) + 1)
    return z[indices]


@dataclass
class NoiseStream:
    """Bath noise for a single trajectory.

    Each step of length ``dt`` consumes one pair of standard normals
    ``(xi, eta)``. The impulse int F_r dt over the step is
    ``impulse_std * xi``; ``eta`` is only used by the second-order
    integrator for the correlated position increment.
    """

    seed: int
    index: int
    dt: float
    impulse_std: float
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        self._gen = substream(self.seed, LAYER_BATH, self.index)

    @classmethod
    def for_params(cls, params, seed, index, dt):
        std = math.sqrt(params.noise_strength * dt)
        return cls(seed=seed, index=index, dt=dt, impulse_std=std)

    @property
    def silent(self) -> bool:
        return self.impulse_std == 0.0

    def normals(self, n_steps: int) -> np.ndarray:
        """Next ``n_steps`` pairs of standard normals, shape (n_steps, 2)."""
        return self._gen.standard_normal((n_steps, 2))

    def impulses(self, n_steps: int) -> np.ndarray:
        if self.silent:
            return np.zeros(n_steps)
        return self.impulse_std * self.normals(n_steps)[:, 0]


def sample_impulse(stream: NoiseStream) -> float:
    """One momentum impulse, N(0, 2 m gamma k_B T dt)."""
    return float(stream.impulses(1)[0])


def draw_block(streams, n_steps: int) -> np.ndarray:
    """Normals for many streams at once, shape (n_streams, n_steps, 2)."""
    out = np.empty((len(streams), n_steps, 2))
    for i, s in enumerate(streams):
        out[i] = s.normals(n_steps)
    return out


@dataclass(frozen=True)
class VelocitySampler:
    """Maxwell-Boltzmann initial velocities at system temperature ``kTs``."""

    kTs: float
    mass: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.kTs >= 0:
            raise ValueError("kTs must be >= 0")

    @property
    def std(self) -> float:
        return math.sqrt(self.kTs / self.mass)

    def sample(self, indices) -> np.ndarray:
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        if self.kTs == 0:
            # Delta-function limit: every packet starts at rest.
            return np.zeros(len(indices))
        return self.std * _layer_normals(self.seed, LAYER_VELOCITY, indices)


def sample_initial_velocity(sampler: VelocitySampler, index: int = 0) -> float:
    return float(sampler.sample([index])[0])


def sample_born_offsets(seed: int, indices, sigma0: float) -> np.ndarray:
    """Initial offsets x0 - q(0) distributed as |psi(x, 0)|^2 = N(0, sigma0^2)."""
    return sigma0 * _layer_normals(seed, LAYER_BORN, indices)
