"""Bohmian stochastic trajectories and seeded ensembles of them.

A Bohmian trajectory of the Gaussian packet is a rigid rescaling of the
packet about its center, x(t) = q(t) + (sigma(t)/sigma0) (x0 - q(0)), so an
ensemble is fully described by its center paths, the shared width path and
the initial offsets. Positions are composed on demand.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import PhysicalParams, Potential
from .dynamics import WidthPath, _grid, integrate_langevin, integrate_pinney
from .noise import NoiseStream, VelocitySampler, sample_born_offsets

WORKERS_ENV = "SLBOHM_WORKERS"


def bohmian_position(x0, q0, sigma0, q, sigma):
    """x = q + (sigma / sigma0) (x0 - q0); broadcasts over paths and offsets."""
    return np.asarray(q) + (np.asarray(sigma) / sigma0) * (np.asarray(x0) - q0)


def bohmian_velocity(x0, q0, sigma0, qdot, sigmadot):
    return np.asarray(qdot) + (np.asarray(sigmadot) / sigma0) * (np.asarray(x0) - q0)


def quantum_force(x0, q0, sigma0, sigma, hbar=1.0, mass=1.0):
    """Force hbar^2 (x0 - q0) / (4 m sigma0 sigma^3) along a noiseless trajectory."""
    return hbar**2 / (4 * mass * sigma0 * np.asarray(sigma) ** 3) * (np.asarray(x0) - q0)


@dataclass
class TrajectoryEnsemble:
    """N Bohmian trajectories sharing one width path.

    ``q`` and ``qdot`` have shape (N, n_t), or (1, n_t) when every trajectory
    has the same center (no noise, fixed initial velocity). ``x0`` are the
    Born-sampled initial positions and ``v0`` the initial center velocities.
    ``reduced`` holds per-trajectory results computed at full integrator
    resolution while the ensemble was built.
    """

    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    width: WidthPath
    x0: np.ndarray
    v0: np.ndarray
    params: PhysicalParams
    potential: Potential
    sigma0: float
    q0: float
    seed: int | None = None
    dt: float | None = None
    reduced: dict = field(default_factory=dict)

    @property
    def n_traj(self) -> int:
        return len(self.x0)

    @property
    def shared_center(self) -> bool:
        return self.q.shape[0] == 1

    @property
    def offsets(self):
        return self.x0 - self.q0

    @property
    def sigma(self):
        return self.width.sigma

    def _rows(self, rows):
        rows = np.arange(self.n_traj) if rows is None else np.atleast_1d(rows)
        return rows, (np.zeros_like(rows) if self.shared_center else rows)

    def positions(self, rows=None):
        rows, crow = self._rows(rows)
        ratio = self.width.sigma / self.sigma0
        return self.q[crow] + ratio[None, :] * self.offsets[rows, None]

    def velocities(self, rows=None):
        rows, crow = self._rows(rows)
        rate = self.width.sigmadot / self.sigma0
        return self.qdot[crow] + rate[None, :] * self.offsets[rows, None]

    def center_rows(self):
        """Center path of each trajectory, broadcast to (N, n_t) lazily."""
        if self.shared_center:
            return np.broadcast_to(self.q, (self.n_traj, self.q.shape[1]))
        return self.q

    def chunks(self, size=1024):
        """Yield (rows, positions) blocks of at most ``size`` trajectories."""
        for start in range(0, self.n_traj, size):
            rows = np.arange(start, min(start + size, self.n_traj))
            yield rows, self.positions(rows)

    def dump_csv(self, path, rows=None, every=1):
        """Write long-format raw trajectories: t, trajectory id, x."""
        rows = np.arange(self.n_traj) if rows is None else np.atleast_1d(rows)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "trajectory", "x"])
            for r in rows:
                x = self.positions([r])[0]
                for k in range(0, len(self.t), every):
                    w.writerow([repr(float(self.t[k])), int(r), repr(float(x[k]))])


def _sample_width(params, potential, sigma0, dt, t_end, classical):
    n_steps, _ = _grid(dt, t_end, 1)
    return integrate_pinney(params, potential, sigma0, dt, n_steps * dt, classical=classical)


def _subsample(width: WidthPath, every):
    if every == 1:
        return width
    sl = slice(None, None, every)
    return WidthPath(width.t[sl], width.sigma[sl], width.sigmadot[sl], width.sigmaddot[sl], width.classical)


def _run_chunk(job):
    (params, potential, sigma0, q0, x0, v0, idx, seed, dt, t_end, record_every, scheme, width, reducers) = job
    streams = None
    if params.noise_strength > 0:
        streams = [NoiseStream.for_params(params, seed, int(i), dt) for i in idx]
    path = integrate_langevin(params, potential, q0, v0, streams, dt, t_end, scheme=scheme)
    out = {}
    if reducers:
        fine = TrajectoryEnsemble(
            t=path.t, q=path.q, qdot=path.qdot, width=width, x0=x0, v0=v0,
            params=params, potential=potential, sigma0=sigma0, q0=q0, seed=seed, dt=dt,
        )
        for name, fn in reducers.items():
            out[name] = np.asarray(fn(fine))
    sl = slice(None, None, record_every)
    return path.q[:, sl], path.qdot[:, sl], out


def _workers(workers):
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, int(workers))


def build_ensemble(
    params: PhysicalParams,
    potential: Potential,
    sigma0: float,
    q0: float,
    n_traj: int,
    seed: int,
    dt: float,
    t_end: float,
    *,
    v0: float = 0.0,
    classical: bool = False,
    record_every: int = 1,
    scheme: str = "vec",
    born: bool = True,
    workers: int | None = None,
    chunk: int = 4096,
    reducers: dict | None = None,
) -> TrajectoryEnsemble:
    """Sample and integrate an ensemble of Bohmian stochastic trajectories.

    Per trajectory i: x0 ~ N(q0, sigma0^2) (Born), q'(0) = v0 + MB sample at
    ``params.system_kT`` and bath noise from substream i of ``seed``. The
    width path is integrated once. ``born=False`` puts every particle on the
    center. ``reducers`` maps names to picklable callables applied to each
    full-resolution chunk (itself a TrajectoryEnsemble); their per-trajectory
    outputs are concatenated in trajectory order into ``ens.reduced``.

    The work is split into chunks of ``chunk`` trajectories and optionally
    spread over ``workers`` processes (default from $SLBOHM_WORKERS); the
    result does not depend on either setting.
    """
    if not (isinstance(n_traj, (int, np.integer)) and n_traj >= 1):
        raise ValueError("n_traj must be an integer >= 1")
    idx = np.arange(n_traj)
    offsets = sample_born_offsets(seed, idx, sigma0) if born else np.zeros(n_traj)
    x0 = q0 + offsets
    v_init = v0 + VelocitySampler(params.system_kT, params.mass, seed).sample(idx)

    width_fine = _sample_width(params, potential, sigma0, dt, t_end, classical)
    width = _subsample(width_fine, record_every)
    _grid(dt, t_end, record_every)

    shared = params.noise_strength == 0 and params.system_kT == 0
    if shared:
        groups = [np.arange(1)]
    else:
        groups = [idx[s : s + chunk] for s in range(0, n_traj, chunk)]

    jobs = []
    for g in groups:
        # a shared center still hands every offset to the reducers
        jobs.append(
            (params, potential, sigma0, q0, x0[g] if not shared else x0, v_init[g], g, seed,
             dt, t_end, record_every, scheme, width_fine, reducers)
        )
    n_workers = _workers(workers)
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    else:
        results = [_run_chunk(j) for j in jobs]

    q = np.concatenate([r[0] for r in results], axis=0)
    qdot = np.concatenate([r[1] for r in results], axis=0)
    reduced = {}
    for name in reducers or {}:
        reduced[name] = np.concatenate([r[2][name] for r in results], axis=0)
    t = width.t
    return TrajectoryEnsemble(
        t=t, q=q, qdot=qdot, width=width, x0=x0, v0=v_init, params=params,
        potential=potential, sigma0=sigma0, q0=q0, seed=seed, dt=dt * record_every,
        reduced=reduced,
    )


def ensemble_seed_record(ens: TrajectoryEnsemble) -> dict:
    """Provenance of every random layer, for output headers."""
    return {
        "seed": ens.seed,
        "n_traj": ens.n_traj,
        "rng": "philox",
        "layers": "born=0 velocity=1 bath=2",
        "dt_record": ens.dt,
    }
