"""Closed-form thermal observables of Gaussian packets in quadratic potentials.

Three averaging modes are used throughout:

``"pure"``
    one packet with initial center velocity ``v0``, friction but no noise;
``"thermal"``
    Maxwell-Boltzmann mixture of such packets at ``params.system_kT``
    (dissipation, no fluctuations);
``"stochastic"``
    the thermal mixture additionally driven by the bath noise at ``params.kT``.

Every mode reduces to a Gaussian position law with some center and effective
width, so probabilities come out as complementary error functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .core import DimensionlessUnits, PhysicalParams, Potential, PotentialKind, omega_squared
from .dynamics import SERIES_SWITCH, WidthPath, analytic_center, propagators, width_path

MODES = ("pure", "thermal", "stochastic")

SQRT2 = math.sqrt(2.0)


class ConvergenceError(RuntimeError):
    pass


def erfc(x):
    return special.erfc(x)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


# ---------------------------------------------------------------------------
# noise-induced spreading of the center


def _poly_tail(x, first, n_terms=14):
    """sum_{n>=first} (-1)^n (4 - 2^n) x^(n-first) / n!  (series of the free variance)."""
    acc = np.zeros_like(x)
    for n in range(first, first + n_terms):
        acc = acc + (-1) ** n * (4.0 - 2.0**n) / math.factorial(n) * x ** (n - first)
    return acc


def center_noise_variance(params: PhysicalParams, potential: Potential, t):
    """Variance of the noise-driven part of q(t) and of q'(t), for fixed q0, v0.

    For a flat curvature this is (kT/m gamma^2)(2 gamma t - 3 + 4e^{-gamma t}
    - e^{-2 gamma t}) for the position and (kT/m)(1 - e^{-2 gamma t}) for the
    velocity; for the repeller/harmonic well the omega-dependent forms are
    used. Both vanish when gamma = 0 or kT = 0.
    """
    t = np.asarray(t, dtype=float)
    kT, m, gamma = params.kT, params.mass, params.gamma
    if kT == 0 or gamma == 0:
        z = np.zeros_like(t)
        return z, z.copy()
    kappa = potential.stiffness
    if kappa == 0:
        x = gamma * t
        small = x < SERIES_SWITCH
        xs = np.where(small, 1.0, x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            direct = (2 * xs - 3 + 4 * np.exp(-xs) - np.exp(-2 * xs)) / gamma**2
        series = _poly_tail(np.where(small, x, 0.0), 3) * gamma * t**3
        var_q = kT / m * np.where(small, series, direct)
        var_v = -kT / m * np.expm1(-2 * x)
        return var_q, var_v
    C, S = propagators(params, potential, t)
    ecosh = C - 0.5 * gamma * S
    decay = np.exp(-gamma * t)
    with np.errstate(over="ignore", invalid="ignore"):
        var_q = kT / (m * kappa) * (-1 + decay + gamma * S * ecosh + 0.5 * gamma**2 * S**2)
        var_v = kT / m * (1 - decay + gamma * S * ecosh - 0.5 * gamma**2 * S**2)
    return np.maximum(var_q, 0.0), np.maximum(var_v, 0.0)


# ---------------------------------------------------------------------------
# widths


def frictionless_width(params: PhysicalParams, potential: Potential, sigma0, t):
    """Quantum width of a pure packet with gamma = 0, in closed form.

    sigma(t)^2 = sigma0^2 C(t)^2 + (hbar / 2 m sigma0)^2 S(t)^2; for the free
    particle this is sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2).
    """
    if params.gamma != 0:
        raise ValueError("closed-form width needs gamma = 0")
    C, S = propagators(params, potential, t)
    return np.sqrt((sigma0 * C) ** 2 + (params.hbar / (2 * params.mass * sigma0) * S) ** 2)


def packet_width(params, potential, sigma0, t, width: WidthPath | None = None, classical=False):
    """sigma_gamma(t): closed form when frictionless, Pinney path otherwise."""
    t = np.asarray(t, dtype=float)
    if width is not None:
        return width(t)
    if params.gamma == 0 and not classical:
        return frictionless_width(params, potential, sigma0, t)
    t_max = float(np.max(t)) if t.size else 0.0
    return width_path(params, potential, sigma0, max(t_max, 1e-12), classical=classical)(t)


def thermal_width(potential, params, sigma0, t, width: WidthPath | None = None):
    """Width of the thermal (Maxwell-Boltzmann mixed) density, no bath noise.

    sigma_{gamma,Ts}(t)^2 = sigma_gamma(t)^2 + (k_B Ts / m) S(t)^2, where
    S(t) = e^{-gamma t/2} sinh(Omega t)/Omega. With gamma = 0 this is the
    closed frictionless expression.
    """
    t = np.asarray(t, dtype=float)
    sig = packet_width(params, potential, sigma0, t, width)
    _, S = propagators(params, potential, t)
    return np.sqrt(sig**2 + params.system_kT / params.mass * S**2)


# ---------------------------------------------------------------------------
# Gaussian laws of the center


@dataclass(frozen=True)
class ThermalMoments:
    """Double-averaged (noise and initial velocity) center moments."""

    kind: PotentialKind
    t: np.ndarray
    mean_q: np.ndarray
    mean_v: np.ndarray
    q2: np.ndarray
    v2: np.ndarray

    @property
    def var_q(self):
        return self.q2 - self.mean_q**2

    @property
    def var_v(self):
        return self.v2 - self.mean_v**2


def thermal_moments(potential, params, q0, t) -> ThermalMoments:
    """<<q>>, <<q'>>, <<q^2>>, <<q'^2>> averaged over noise and MB velocities."""
    t = np.asarray(t, dtype=float)
    mq, mv = analytic_center(params, potential, q0, 0.0, t)
    C, S = propagators(params, potential, t)
    Sdot = C - params.gamma * S
    vq, vv = center_noise_variance(params, potential, t)
    kTs_m = params.system_kT / params.mass
    var_q = vq + kTs_m * S**2
    var_v = vv + kTs_m * Sdot**2
    return ThermalMoments(
        kind=potential.kind,
        t=t,
        mean_q=mq,
        mean_v=mv,
        q2=mq**2 + var_q,
        v2=mv**2 + var_v,
    )


def center_law(mode, potential, params, q0, t, v0=0.0):
    """(mean, variance) of the packet center under the given averaging mode."""
    _check_mode(mode)
    t = np.asarray(t, dtype=float)
    if mode == "pure":
        mean, _ = analytic_center(params, potential, q0, v0, t)
        return mean, np.zeros_like(mean)
    mean, _ = analytic_center(params, potential, q0, 0.0, t)
    _, S = propagators(params, potential, t)
    var = params.system_kT / params.mass * S**2
    if mode == "stochastic":
        var = var + center_noise_variance(params, potential, t)[0]
    return mean, var


@dataclass(frozen=True)
class GaussianLaw:
    mean: float
    variance: float

    @property
    def degenerate(self) -> bool:
        return self.variance <= 0

    def pdf(self, x):
        if self.degenerate:
            raise ValueError("degenerate law (point mass at mean); no density")
        x = np.asarray(x, dtype=float)
        return np.exp(-((x - self.mean) ** 2) / (2 * self.variance)) / math.sqrt(
            2 * math.pi * self.variance
        )


def w1(params, potential, q0, v0, t) -> GaussianLaw:
    """Distribution of the noisy center at time t for fixed q(0), q'(0).

    At t = 0 (or without noise) the law is a point mass, flagged by
    ``GaussianLaw.degenerate``.
    """
    mean, _ = analytic_center(params, potential, q0, v0, t)
    var, _ = center_noise_variance(params, potential, t)
    return GaussianLaw(float(mean), float(var))


def w1_density(params, potential, q0, v0, q, t):
    return w1(params, potential, q0, v0, t).pdf(q)


def effective_law(mode, potential, params, sigma0, q0, t, v0=0.0, width=None):
    """Center and total width of the averaged position density."""
    t = np.asarray(t, dtype=float)
    mean, var = center_law(mode, potential, params, q0, t, v0)
    sig = packet_width(params, potential, sigma0, t, width)
    return mean, np.sqrt(sig**2 + var)


# ---------------------------------------------------------------------------
# momentum and phase space


def momentum_stats(potential, params, sigma0, q0, t, width=None):
    """Thermal <p>, <p^2> and the uncertainty Sigma = sqrt(<p^2> - <p>^2).

    Frictionless case in closed form:
    Sigma^2 = (hbar^2/4 sigma0^2 + m k_B Ts) S'(t)^2 + m^2 sigma0^2 C'(t)^2.
    With friction the quantum part m^2 sigma'^2 + hbar^2/(4 sigma^2) comes from
    the Pinney path.
    """
    t = np.asarray(t, dtype=float)
    m = params.mass
    mom = thermal_moments(potential, params, q0, t)
    p1 = m * mom.mean_v
    if params.gamma == 0:
        C, S = propagators(params, potential, t)
        Cdot = potential.stiffness * S
        # S' = C when gamma = 0
        spread = (params.hbar**2 / (4 * sigma0**2) + m * params.system_kT) * C**2
        var_p = spread + (m * sigma0 * Cdot) ** 2
    else:
        if width is None:
            width = width_path(params, potential, sigma0, max(float(np.max(t)), 1e-12))
        sig, sigd = width(t), width.rate(t)
        var_p = m**2 * mom.var_v + m**2 * sigd**2 + params.hbar**2 / (4 * sig**2)
    return p1, p1**2 + var_p, np.sqrt(var_p)


def momentum_uncertainty_free(params, sigma0):
    return math.sqrt(params.hbar**2 / (4 * sigma0**2) + params.mass * params.system_kT)


def wigner_free(params, sigma0, q0, x, p, t):
    """Thermal Wigner function of the free packet mixture.

    W = exp[-p^2/(2 Sigma^2) - (x - q0 - p t/m)^2/(2 sigma0^2)] / (2 pi sigma0 Sigma),
    Sigma^2 = (hbar^2 + 4 m sigma0^2 k_B Ts) / (4 sigma0^2).
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    m = params.mass
    B = params.hbar**2 + 4 * m * sigma0**2 * params.system_kT
    norm = 1.0 / (math.pi * math.sqrt(B))
    return norm * np.exp(-2 * sigma0**2 * p**2 / B - (m * (x - q0) - p * t) ** 2 / (2 * m**2 * sigma0**2))


def momentum_distribution(params, sigma0, p):
    s = momentum_uncertainty_free(params, sigma0)
    p = np.asarray(p, dtype=float)
    return np.exp(-(p**2) / (2 * s**2)) / (math.sqrt(2 * math.pi) * s)


# ---------------------------------------------------------------------------
# free particle: diffusion, velocity correlation, uncertainty


def msd_and_diffusion(params, width: WidthPath | None, t, sigma0=None, potential=None):
    """Classical and Bohmian mean-square displacements and D(t) = MSD/2t.

    MSD_cl is the double-averaged (q(t) - q(0))^2; the Bohmian MSD adds the
    Born average of the width term, (sigma(t) - sigma(0))^2. D at t = 0 is
    returned as its limit, 0.
    """
    potential = potential or Potential.free()
    t = np.asarray(t, dtype=float)
    mom = thermal_moments(potential, params, 0.0, t)
    msd_cl = mom.q2
    if width is None:
        width = width_path(params, potential, sigma0, max(float(np.max(t)), 1e-12))
    sig = width(t)
    msd_q = msd_cl + (sig - width.sigma0) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        d_cl = np.where(t > 0, msd_cl / (2 * np.where(t > 0, t, 1.0)), 0.0)
        d_q = np.where(t > 0, msd_q / (2 * np.where(t > 0, t, 1.0)), 0.0)
    return msd_cl, msd_q, d_cl, d_q


def diffusion_constant(params):
    """Einstein relation D = k_B T / (m gamma)."""
    return params.kT / (params.mass * params.gamma)


def vacf(params, t, potential=None):
    """<<q'(0) q'(t)>> = (k_B Ts/m) S'(t); for the free particle (kT/m) e^{-gamma t}."""
    potential = potential or Potential.free()
    C, S = propagators(params, potential, t)
    return params.system_kT / params.mass * (C - params.gamma * S)


def uncertainty_product(params, width: WidthPath, t, potential=None):
    """U(t) = sqrt(<<(dx)^2>> <<(dp)^2>>) for the Bohmian-Langevin packet.

    <<(dx)^2>> = Var_center + sigma^2 and
    <<(dp)^2>> = m^2 Var_velocity + m^2 sigma'^2 + hbar^2 / (4 sigma^2).
    """
    potential = potential or Potential.free()
    t = np.asarray(t, dtype=float)
    m, hbar = params.mass, params.hbar
    mom = thermal_moments(potential, params, 0.0, t)
    sig, sigd = width(t), width.rate(t)
    var_x = mom.var_q + sig**2
    var_p = m**2 * mom.var_v + m**2 * sigd**2 + hbar**2 / (4 * sig**2)
    return np.sqrt(var_x * var_p)


# ---------------------------------------------------------------------------
# repeller: transmission, Q, dwell time


def _half_erfc_diff(a1, a2):
    """0.5 (erfc(a1) - erfc(a2)) without cancellation when both are negative."""
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    return np.where(
        a1 >= 0,
        0.5 * (special.erfc(a1) - special.erfc(a2)),
        0.5 * (special.erfc(-a2) - special.erfc(-a1)),
    )


def transmission_probability(
    mode, potential, params, sigma0, q0, t, v0=0.0, width=None, exact=None
):
    """Probability of finding the particle right of the barrier top at time t.

    ``exact`` selects the erf-ratio form for a packet that is not well
    localized (pure mode only); ``None`` picks it when q0 + 3 sigma0 >= 0.
    """
    _check_mode(mode)
    t = np.asarray(t, dtype=float)
    center, w = effective_law(mode, potential, params, sigma0, q0, t, v0, width)
    z = -center / (SQRT2 * w)
    if exact is None:
        exact = q0 + 3 * sigma0 >= 0
    if exact and mode == "pure":
        a = q0 / (SQRT2 * sigma0)
        # (erf(q/sqrt2 s) - erf(a)) / erfc(a), written with erfc
        return (special.erfc(a) - special.erfc(-z)) / special.erfc(a)
    return 0.5 * special.erfc(z)


def q_beyond(mode, potential, params, sigma0, q0, x, t, v0=0.0, width=None, center="dissipative"):
    """Probability of presence beyond x at time t, 0.5 erfc((x - center)/(sqrt2 w)).

    ``center="frictionless"`` (thermal mode only) centers the erfc on
    q0 cosh(omega t) instead of the damped center X_gamma(t).
    """
    _check_mode(mode)
    t = np.asarray(t, dtype=float)
    c, w = effective_law(mode, potential, params, sigma0, q0, t, v0, width)
    if center == "frictionless":
        c, _ = analytic_center(params.with_(gamma=0.0), potential, q0, 0.0, t)
    elif center != "dissipative":
        raise ValueError("center must be 'dissipative' or 'frictionless'")
    return 0.5 * special.erfc((np.asarray(x, dtype=float) - c) / (SQRT2 * w))


def _growth_rate(params, potential):
    w2 = omega_squared(params, potential)
    if potential.kind is not PotentialKind.REPELLER or w2 <= 0:
        raise ValueError("transmission and dwell observables need the parabolic repeller")
    return math.sqrt(w2) - 0.5 * params.gamma


def _horizon(params, potential, sigma0, t_max=None):
    """Default integration horizon: max(400 t~, 40/gamma, 40/lambda), capped by overflow."""
    units = DimensionlessUnits(sigma0, params.mass, params.hbar)
    lam = _growth_rate(params, potential)
    if t_max is None:
        t_max = max(400 * units.time, 40 / max(lam, 1e-300))
        if params.gamma > 0:
            t_max = max(t_max, 40 / params.gamma)
    return min(t_max, 300.0 / max(lam, 1e-300))


@dataclass(frozen=True)
class Stationary:
    value: float
    t: float


def stationary_transmission(
    mode, potential, params, sigma0, q0, v0=0.0, rtol=1e-9, width=None, t_max=None
):
    """Long-time plateau of transmission_probability.

    The probability is evaluated on a grid of 2/lambda spaced times (lambda the
    asymptotic growth rate of the repeller) until three successive values
    agree to ``rtol``.
    """
    lam = _growth_rate(params, potential)
    t_cap = _horizon(params, potential, sigma0, t_max)
    if width is None:
        width = width_path(params, potential, sigma0, t_cap, samples=8000)
    step = 2.0 / lam
    ts = np.arange(step, width.t_end, step)
    if ts.size < 3:
        ts = np.linspace(width.t_end / 3, width.t_end, 3)
    vals = transmission_probability(mode, potential, params, sigma0, q0, ts, v0, width, exact=False)
    for i in range(2, len(ts)):
        a, b, c = vals[i - 2], vals[i - 1], vals[i]
        scale = max(abs(c), 1e-300)
        if abs(c - b) <= rtol * scale and abs(b - a) <= rtol * scale:
            return Stationary(float(c), float(ts[i]))
    raise ConvergenceError(f"transmission has no plateau by t = {ts[-1]:g}")


def time_integral(integrand, potential, params, sigma0, width, t_max=None, rtol=1e-6, window=None):
    """Integral over [0, inf) of a repeller integrand that decays once the
    packet has left a bounded region.

    Integrated window by window with adaptive quadrature. Such integrands
    decay at least like exp(-lambda t) (lambda the growth rate of the
    repeller), so the remaining tail is bounded by integrand / lambda;
    integration stops when that bound falls below ``rtol`` times the running
    total for three consecutive windows. Raises :class:`ConvergenceError` if
    that never happens before the horizon.
    """
    lam = _growth_rate(params, potential)
    t_cap = min(_horizon(params, potential, sigma0, t_max), width.t_end)
    units = DimensionlessUnits(sigma0, params.mass, params.hbar)
    window = window or min(1.0 / lam, 10 * units.time)
    total = 0.0
    quiet = 0
    a = 0.0
    while a < t_cap:
        b = min(a + window, t_cap)
        part, _ = integrate.quad(integrand, a, b, limit=200, epsabs=1e-14, epsrel=1e-10)
        total += part
        tail = abs(integrand(b)) / lam
        if total > 0 and tail <= rtol * total:
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
        a = b
    if total == 0.0:
        return 0.0
    raise ConvergenceError(f"integrand has not decayed by t = {t_cap:g}")


def dwell_time(
    mode,
    potential,
    params,
    sigma0,
    q0,
    x1,
    x2,
    v0=0.0,
    width=None,
    t_max=None,
    rtol=1e-6,
    window=None,
):
    """Mean time spent in [x1, x2]: integral over t of Q(x1, t) - Q(x2, t).

    See :func:`time_integral` for the quadrature and tail rule.
    """
    if x1 > x2:
        raise ValueError("x1 must be <= x2")
    if x1 == x2:
        return 0.0
    if width is None:
        t_cap = _horizon(params, potential, sigma0, t_max)
        width = width_path(params, potential, sigma0, t_cap, samples=16000)

    def integrand(t):
        c, w = effective_law(mode, potential, params, sigma0, q0, t, v0, width)
        return float(_half_erfc_diff((x1 - c) / (SQRT2 * w), (x2 - c) / (SQRT2 * w)))

    return time_integral(integrand, potential, params, sigma0, width, t_max, rtol, window)
