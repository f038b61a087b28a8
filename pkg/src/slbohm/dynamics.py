"""Center (Langevin) and width (Pinney) evolution of the Gaussian packet.

The center obeys ``q'' + gamma q' + V'(q)/m = F_r/m`` and the width
``s'' + gamma s' - hbar^2/(4 m^2 s^3) + s V''/m = 0``. For the quadratic
potentials handled here the deterministic center has a closed form, which is
used both directly and as an oracle for the stochastic integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .core import PhysicalParams, Potential, omega_squared

# Below this value of gamma*t the free/linear closed forms switch to series.
SERIES_SWITCH = 1e-2
_N_SERIES = 12


class IntegrationError(FloatingPointError):
    def __init__(self, message, step=None, trajectory=None):
        self.step = step
        self.trajectory = trajectory
        super().__init__(message)


# ---------------------------------------------------------------------------
# closed-form propagator


def propagators(params: PhysicalParams, potential: Potential, t):
    """Return (C, S) with C(0)=1, C'(0)=0 and S(0)=0, S'(0)=1.

    Both solve y'' + gamma y' - kappa y = 0, kappa = -V''/m. They are
    evaluated as sums of decaying/growing exponentials so that the damping
    factor exp(-gamma t / 2) never multiplies an overflowing cosh.
    Derivatives: C' = kappa S and S' = C - gamma S.
    """
    t = np.asarray(t, dtype=float)
    gamma = params.gamma
    w2 = omega_squared(params, potential)
    half = 0.5 * gamma
    if w2 > 0:
        w = math.sqrt(w2)
        grow = np.exp((w - half) * t)
        decay = np.exp(-(w + half) * t)
        ecosh = 0.5 * (grow + decay)
        x = w * t
        with np.errstate(over="ignore", invalid="ignore"):
            S = np.where(
                x > 1.0,
                (grow - decay) / (2.0 * w),
                decay * np.expm1(2.0 * np.minimum(x, 1.0)) / (2.0 * w),
            )
    elif w2 < 0:
        w = math.sqrt(-w2)
        damp = np.exp(-half * t)
        ecosh = damp * np.cos(w * t)
        S = damp * np.sin(w * t) / w
    else:
        damp = np.exp(-half * t)
        ecosh = damp
        S = t * damp
    C = ecosh + half * S
    return C, S


def _ramp(gamma, t):
    """(gamma t - 1 + exp(-gamma t)) / gamma^2, tends to t^2/2 as gamma -> 0."""
    t = np.asarray(t, dtype=float)
    x = gamma * t
    out = np.empty_like(x)
    small = np.abs(x) < SERIES_SWITCH
    if np.any(~small):
        xs = x[~small]
        out[~small] = (xs + np.expm1(-xs)) / gamma**2
    if np.any(small):
        xs = x[small]
        # sum_{n>=2} (-x)^n / n!  divided by x^2, times t^2
        acc = np.zeros_like(xs)
        term = np.full_like(xs, 0.5)
        for n in range(2, 2 + _N_SERIES):
            acc += term
            term = term * (-xs) / (n + 1)
        out[small] = acc * t[small] ** 2
    return out


def analytic_center(params: PhysicalParams, potential: Potential, q0, v0, t):
    """Noise-free center position and velocity at times ``t``.

    q(t) = q* + (q0 - q*) C(t) + v0 S(t), with q* = g / kappa the stationary
    point of the potential; for kappa = 0 the constant force enters through
    the ramp -g (gamma t - 1 + e^{-gamma t}) / gamma^2.
    """
    t = np.asarray(t, dtype=float)
    C, S = propagators(params, potential, t)
    kappa = potential.stiffness
    gamma = params.gamma
    Sdot = C - gamma * S
    if kappa != 0:
        qstar = potential.g / kappa
        q = qstar + (q0 - qstar) * C + v0 * S
        qdot = (q0 - qstar) * kappa * S + v0 * Sdot
    else:
        q = q0 + v0 * S - potential.g * _ramp(gamma, np.atleast_1d(t)).reshape(t.shape)
        qdot = v0 * Sdot - potential.g * S
    return q, qdot


# ---------------------------------------------------------------------------
# paths


@dataclass
class CenterPath:
    """Center samples on a uniform grid; q and qdot have shape (n_traj, n_t)."""

    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray

    @property
    def n_traj(self):
        return self.q.shape[0]


@dataclass
class WidthPath:
    """Deterministic width sigma(t) and its rate on a uniform grid."""

    t: np.ndarray
    sigma: np.ndarray
    sigmadot: np.ndarray
    sigmaddot: np.ndarray
    classical: bool = False

    def __post_init__(self):
        self._s = CubicHermiteSpline(self.t, self.sigma, self.sigmadot, extrapolate=False)
        self._sd = CubicHermiteSpline(self.t, self.sigmadot, self.sigmaddot, extrapolate=False)

    @property
    def sigma0(self):
        return float(self.sigma[0])

    @property
    def t_end(self):
        return float(self.t[-1])

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t > self.t[-1] * (1 + 1e-12)) or np.any(t < 0):
            raise ValueError(f"width path covers [0, {self.t[-1]:g}], asked for t outside it")
        return np.clip(t, 0.0, self.t[-1])

    def __call__(self, t):
        return self._s(self._check(t))

    def rate(self, t):
        return self._sd(self._check(t))


@dataclass
class PathPair:
    """Center and width on a shared grid."""

    center: CenterPath
    width: WidthPath

    def __post_init__(self):
        if not np.array_equal(self.center.t, self.width.t):
            raise ValueError("center and width grids differ")

    @property
    def t(self):
        return self.center.t


def _grid(dt, t_end, record_every):
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise ValueError("t_end must be >= dt")
    if abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError("t_end must be an integer multiple of dt")
    if n_steps % record_every:
        raise ValueError("number of steps must be a multiple of record_every")
    t = np.arange(n_steps // record_every + 1) * (dt * record_every)
    return n_steps, t


# ---------------------------------------------------------------------------
# Langevin integrator


def integrate_langevin(
    params: PhysicalParams,
    potential: Potential,
    q0,
    v0,
    streams,
    dt: float,
    t_end: float,
    record_every: int = 1,
    scheme: str = "vec",
    block: int = 512,
) -> CenterPath:
    """Integrate the center of ``len(q0)`` packets.

    ``streams`` is a sequence of :class:`NoiseStream` (one per trajectory) or
    ``None`` for the noise-free equation. ``scheme`` selects the
    Vanden-Eijnden--Ciccotti second-order scheme ("vec", default) or
    Euler--Maruyama ("euler"). Without noise and friction "vec" is velocity
    Verlet.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if scheme not in ("vec", "euler"):
        raise ValueError(f"unknown scheme {scheme!r}")
    x = np.array(np.atleast_1d(q0), dtype=float)
    v = np.array(np.atleast_1d(v0), dtype=float)
    x, v = np.broadcast_arrays(x, v)
    x, v = x.copy(), v.copy()
    n = x.shape[0]
    n_steps, t = _grid(dt, t_end, record_every)

    noisy = streams is not None and params.noise_strength > 0
    if noisy:
        if len(streams) != n:
            raise ValueError("need one noise stream per trajectory")
        # velocity-noise amplitude per unit mass: sqrt(2 gamma kT / m)
        amp = math.sqrt(params.noise_strength) / params.mass
    gamma = params.gamma
    kappa = potential.stiffness
    g = potential.g
    h = dt
    sh = math.sqrt(h)
    h32 = h * sh
    c3 = 1.0 / (2.0 * math.sqrt(3.0))

    qs = np.empty((n, len(t)))
    vs = np.empty((n, len(t)))
    qs[:, 0] = x
    vs[:, 0] = v
    f = -g + kappa * x
    rec = 1
    step = 0
    # overflow surfaces as the IntegrationError below, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        while step < n_steps:
            nb = min(block, n_steps - step)
            if noisy:
                z = np.stack([s.normals(nb) for s in streams])  # (n, nb, 2)
            for k in range(nb):
                if scheme == "vec":
                    a = f - gamma * v
                    A = 0.5 * h * h * a
                    if noisy:
                        xi = z[:, k, 0]
                        A = A + amp * h32 * (0.5 * xi + c3 * z[:, k, 1])
                    x_new = x + h * v + A
                    f_new = -g + kappa * x_new
                    v = v + 0.5 * h * (f + f_new) - h * gamma * v - gamma * A
                    if noisy:
                        v = v + amp * sh * xi
                    x, f = x_new, f_new
                else:
                    x_new = x + h * v
                    v = v + h * (f - gamma * v)
                    if noisy:
                        v = v + amp * sh * z[:, k, 0]
                    x = x_new
                    f = -g + kappa * x
                step += 1
                if not (np.isfinite(x).all() and np.isfinite(v).all()):
                    bad = int(np.flatnonzero(~(np.isfinite(x) & np.isfinite(v)))[0])
                    raise IntegrationError(
                        f"non-finite center state at step {step} (t={step * h:g}) in trajectory {bad}",
                        step=step,
                        trajectory=bad,
                    )
                if step % record_every == 0:
                    qs[:, rec] = x
                    vs[:, rec] = v
                    rec += 1
    return CenterPath(t=t, q=qs, qdot=vs)


# ---------------------------------------------------------------------------
# Pinney width


def pinney_rhs(params: PhysicalParams, potential: Potential, classical=False):
    """Right-hand side of the generalized Pinney equation as (s, sd) -> sdd."""
    gamma = params.gamma
    kappa = potential.stiffness
    quantum = 0.0 if classical else params.hbar**2 / (4.0 * params.mass**2)

    def rhs(s, sd):
        return -gamma * sd + quantum / (s * s * s) + kappa * s

    return rhs


def integrate_pinney(
    params: PhysicalParams,
    potential: Potential,
    sigma0: float,
    dt: float,
    t_end: float,
    classical: bool = False,
    record_every: int = 1,
    min_substep: float = 2.0**-40,
) -> WidthPath:
    """RK4 solution of the width equation with sigma'(0) = 0.

    A step whose stages would drive sigma to zero or below is rejected and
    retried as two half steps (recursively); the singular hbar^2/sigma^3 term
    is never clamped. ``classical`` drops that term.
    """
    if not sigma0 > 0:
        raise ValueError("sigma0 must be > 0")
    n_steps, t = _grid(dt, t_end, record_every)
    rhs = pinney_rhs(params, potential, classical)
    floor = dt * min_substep

    def rk4(s, sd, h):
        k1s, k1v = sd, rhs(s, sd)
        s2 = s + 0.5 * h * k1s
        if s2 <= 0:
            return None
        k2s, k2v = sd + 0.5 * h * k1v, rhs(s2, sd + 0.5 * h * k1v)
        s3 = s + 0.5 * h * k2s
        if s3 <= 0:
            return None
        k3s, k3v = sd + 0.5 * h * k2v, rhs(s3, sd + 0.5 * h * k2v)
        s4 = s + h * k3s
        if s4 <= 0:
            return None
        k4s, k4v = sd + h * k3v, rhs(s4, sd + h * k3v)
        s_new = s + h / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
        if not s_new > 0:
            return None
        return s_new, sd + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)

    def advance(s, sd, h, step):
        out = rk4(s, sd, h)
        if out is not None:
            return out
        if h / 2 < floor:
            raise IntegrationError(f"width step underflow at step {step}", step=step)
        s, sd = advance(s, sd, h / 2, step)
        return advance(s, sd, h / 2, step)

    sig = np.empty(len(t))
    sigd = np.empty(len(t))
    s, sd = float(sigma0), 0.0
    sig[0], sigd[0] = s, sd
    rec = 1
    for step in range(1, n_steps + 1):
        s, sd = advance(s, sd, dt, step)
        if not (math.isfinite(s) and math.isfinite(sd)):
            raise IntegrationError(f"non-finite width at step {step}", step=step)
        if step % record_every == 0:
            sig[rec], sigd[rec] = s, sd
            rec += 1
    sigdd = rhs(sig, sigd)
    return WidthPath(t=t, sigma=sig, sigmadot=sigd, sigmaddot=sigdd, classical=classical)


def width_path(params, potential, sigma0, t_end, dt=None, classical=False, samples=4000):
    """Pinney path on [0, t_end] with a resolution suitable for interpolation.

    The integrator step defaults to min(0.01 * sigma0^2-time-unit, t_end/samples)
    and at most ``samples`` grid points are stored.
    """
    t_unit = 2.0 * params.mass * sigma0**2 / params.hbar
    if dt is None:
        dt = min(0.01 * t_unit, t_end / samples)
    n_steps = max(1, int(math.ceil(t_end / dt)))
    record_every = max(1, n_steps // samples)
    n_steps = int(math.ceil(n_steps / record_every)) * record_every
    dt = t_end / n_steps
    return integrate_pinney(params, potential, sigma0, dt, n_steps * dt, classical, record_every)
