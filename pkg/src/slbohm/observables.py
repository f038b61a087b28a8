"""Monte-Carlo estimators over trajectory ensembles, and the arrival/transit
observables built from the Gaussian-packet current.

Every estimator returns a mean with a standard error computed from the
spread of independent per-trajectory values.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import logsumexp

from . import analytics
from .analytics import ConvergenceError, SQRT2
from .dynamics import analytic_center, width_path
from .trajectories import TrajectoryEnsemble

N_HERMITE = 64


class ArrivalWarning(UserWarning):
    pass


class HorizonWarning(UserWarning):
    pass


class NormalizationError(RuntimeError):
    pass


@dataclass
class ObservableSeries:
    name: str
    t: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    n: int
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def at(self, t):
        i = int(np.argmin(np.abs(self.t - t)))
        return float(self.value[i]), float(self.stderr[i])


def _mean_se(samples, axis=0):
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    mean = samples.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, samples.std(axis=axis, ddof=1) / math.sqrt(n)


# ---------------------------------------------------------------------------
# diffusion and velocity correlation


@dataclass
class DiffusionEstimate:
    msd_cl: ObservableSeries
    msd_q: ObservableSeries
    d_cl: ObservableSeries
    d_q: ObservableSeries


def _per_time(series, t, name, n, seed):
    m, se = series
    safe = np.where(t > 0, t, 1.0)
    return ObservableSeries(
        name, t, np.where(t > 0, m / (2 * safe), 0.0), np.where(t > 0, se / (2 * safe), 0.0), n, seed
    )


def estimate_msd_diffusion(ens: TrajectoryEnsemble, born="exact") -> DiffusionEstimate:
    """Classical and Bohmian MSD and D(t) = MSD / 2t from a free ensemble.

    The classical MSD averages (q(t) - q(0))^2 over noise and velocities. The
    Bohmian one adds the offset term: with ``born="exact"`` the Born average
    over x0 is taken analytically, giving (q - q0)^2 + (sigma - sigma0)^2 per
    center path; ``born="sampled"`` uses the ensemble's own x0 draws.
    """
    t = ens.t
    dq = ens.center_rows() - ens.q0
    cl = dq**2
    if born == "exact":
        qm = cl + (ens.width.sigma - ens.sigma0) ** 2
    elif born == "sampled":
        qm = (ens.positions() - ens.x0[:, None]) ** 2
    else:
        raise ValueError("born must be 'exact' or 'sampled'")
    n = ens.n_traj
    cl_s, qm_s = _mean_se(cl), _mean_se(qm)
    return DiffusionEstimate(
        msd_cl=ObservableSeries("msd_cl", t, *cl_s, n, ens.seed),
        msd_q=ObservableSeries("msd_q", t, *qm_s, n, ens.seed),
        d_cl=_per_time(cl_s, t, "d_cl", n, ens.seed),
        d_q=_per_time(qm_s, t, "d_q", n, ens.seed),
    )


def estimate_vacf(ens: TrajectoryEnsemble) -> ObservableSeries:
    """<<v(0) v(t)>> over Bohmian velocities (Born, MB and noise averaged)."""
    v = ens.velocities()
    prod = v[:, :1] * v
    m, se = _mean_se(prod)
    out = ObservableSeries("vacf", ens.t, m, se, ens.n_traj, ens.seed)
    out.meta["samples"] = prod
    return out


def vacf_half_life(series: ObservableSeries, reference):
    """Time at which the correlation first drops to reference/2, with SE.

    The SE follows from the delta method: SE_C(t*) / |dC/dt(t*)|.
    """
    target = 0.5 * reference
    v = series.value
    idx = np.flatnonzero((v[:-1] > target) & (v[1:] <= target))
    if idx.size == 0:
        raise ValueError("correlation never crosses half its reference value")
    i = int(idx[0])
    t0, t1 = series.t[i], series.t[i + 1]
    frac = (v[i] - target) / (v[i] - v[i + 1])
    t_half = t0 + frac * (t1 - t0)
    slope = (v[i + 1] - v[i]) / (t1 - t0)
    se = (1 - frac) * series.stderr[i] + frac * series.stderr[i + 1]
    return float(t_half), float(se / abs(slope))


def integrate_series(series: ObservableSeries, t_max=None):
    """Trapezoid integral of a per-trajectory series over [0, t_max], with SE."""
    samples = series.meta.get("samples")
    t = series.t
    keep = t <= (t[-1] if t_max is None else t_max) + 1e-12
    if samples is None:
        return float(trapezoid(series.value[keep], t[keep])), float("nan")
    per = trapezoid(samples[:, keep], t[keep], axis=1)
    m, se = _mean_se(per)
    return float(m), float(se)


# ---------------------------------------------------------------------------
# arrival times


@dataclass(frozen=True)
class ArrivalRecord:
    trajectory: int
    x_d: float
    time: float | None

    @property
    def never(self) -> bool:
        return self.time is None


def _crossings(t, s, direction):
    """First crossing time of zero along the last axis of s (nan if none)."""
    a, b = s[..., :-1], s[..., 1:]
    if direction == "down":
        hit = (a > 0) & (b <= 0)
    elif direction == "up":
        hit = (a < 0) & (b >= 0)
    elif direction == "any":
        hit = ((a > 0) & (b <= 0)) | ((a < 0) & (b >= 0))
    else:
        raise ValueError("direction must be 'down', 'up' or 'any'")
    any_hit = hit.any(axis=-1)
    i = np.argmax(hit, axis=-1)
    sa = np.take_along_axis(a, i[..., None], -1)[..., 0]
    sb = np.take_along_axis(b, i[..., None], -1)[..., 0]
    frac = sa / (sa - sb)
    dt = t[i + 1] - t[i]
    return np.where(any_hit, t[i] + frac * dt, np.nan)


def first_arrival(t, x, x_d, direction="down", trajectory=0) -> ArrivalRecord:
    """First crossing of x_d by a sampled path, linearly interpolated.

    A path that starts at x_d and moves away does not count as arriving.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(x, dtype=float) - x_d
    tc = float(_crossings(t, s, direction))
    return ArrivalRecord(int(trajectory), float(x_d), None if math.isnan(tc) else tc)


def arrival_times(ens: TrajectoryEnsemble, x_d, offsets=None, direction="down", chunk=512):
    """Crossing times of the ensemble's trajectories (nan = never).

    Without ``offsets`` each trajectory uses its own Born-sampled x0 and the
    result has shape (N,). With an offset grid X0 every center path is
    combined with every X0 (common random numbers across the grid) and the
    result has one row per center path and one column per offset. Picklable through functools.partial,
    so it can serve as a build-time reducer.
    """
    ratio = ens.width.sigma / ens.sigma0
    t = ens.t
    if offsets is None:
        out = np.empty(ens.n_traj)
        for rows, x in ens.chunks(chunk):
            out[rows] = _crossings(t, x - x_d, direction)
        return out
    offsets = np.asarray(offsets, dtype=float)
    q = ens.q
    out = np.empty((q.shape[0], len(offsets)))
    for s in range(0, q.shape[0], chunk):
        qc = q[s : s + chunk]
        for j, X in enumerate(offsets):
            out[s : s + chunk, j] = _crossings(t, qc + ratio * X - x_d, direction)
    return out


@dataclass
class ArrivalSummary:
    mean: float
    stderr: float
    never_fraction: float
    n: int
    offsets: np.ndarray | None = None
    profile: np.ndarray | None = None
    profile_se: np.ndarray | None = None
    profile_never: np.ndarray | None = None
    born_mean: float | None = None


def _warn_never(frac, where=""):
    if frac > 0.01:
        warnings.warn(
            f"{100 * frac:.2f}% of trajectories never reach the detector{where}; they are excluded",
            ArrivalWarning,
            stacklevel=3,
        )


def mean_arrival_time(times, offsets=None, sigma0=1.0) -> ArrivalSummary:
    """Mean arrival time from crossing times (see :func:`arrival_times`).

    For a 1-D array (Born-sampled x0) this is the plain ensemble mean. For an
    (N, n_offsets) array the per-offset profile is the noise/velocity average
    in each column, and the total is its Born-weighted (Gaussian) average over
    the offset grid. Never-arrivals are excluded and counted.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim == 1:
        ok = ~np.isnan(times)
        frac = 1 - ok.mean()
        _warn_never(frac)
        m, se = _mean_se(times[ok]) if ok.any() else (np.nan, np.nan)
        return ArrivalSummary(float(m), float(se), float(frac), int(ok.sum()))
    if offsets is None:
        raise ValueError("offset grid required for a 2-D array of times")
    offsets = np.asarray(offsets, dtype=float)
    ok = ~np.isnan(times)
    never = 1 - ok.mean(axis=0)
    prof = np.array([np.nanmean(c) if np.any(~np.isnan(c)) else np.nan for c in times.T])
    cnt = ok.sum(axis=0)
    std = np.array([np.nanstd(c, ddof=1) if k > 1 else 0.0 for c, k in zip(times.T, cnt)])
    prof_se = std / np.sqrt(np.maximum(cnt, 1))
    _warn_never(float(never.max()), " at some offsets")
    w = np.exp(-0.5 * (offsets / sigma0) ** 2)
    good = ~np.isnan(prof)
    w = w * good
    w = w / w.sum()
    total = float(np.sum(w * np.where(good, prof, 0.0)))
    # per-path Born average of one realization, to get an SE with correlations
    per_path = np.nansum(np.where(ok, times, 0.0) * w[None, :], axis=1) / np.maximum(
        np.sum(ok * w[None, :], axis=1), 1e-300
    )
    _, se = _mean_se(per_path)
    return ArrivalSummary(
        mean=total, stderr=float(se), never_fraction=float(never.mean()), n=times.shape[0],
        offsets=offsets, profile=prof, profile_se=prof_se, profile_never=never, born_mean=total,
    )


@dataclass
class ArrivalDistribution:
    t: np.ndarray
    density: np.ndarray
    mean: float
    flux: float


def _log_current(params, potential, sigma0, q0, v0, x_d, t, width):
    q, qd = analytic_center(params, potential, q0, v0, t)
    s, sd = width(t), width.rate(t)
    v = qd + sd / s * (x_d - q)
    with np.errstate(divide="ignore"):
        logj = -((x_d - q) ** 2) / (2 * s**2) - np.log(math.sqrt(2 * math.pi) * s) + np.log(np.abs(v))
    return logj


def _log_trapz(logf, t):
    """log of the trapezoid integral of exp(logf) without overflow."""
    top = np.max(logf)
    if not np.isfinite(top):
        return -np.inf
    return top + math.log(trapezoid(np.exp(logf - top), t))


def mb_nodes(kTs, mass=1.0, n=N_HERMITE):
    """Gauss-Hermite nodes and weights for averages over N(0, kTs/m)."""
    if kTs == 0:
        return np.zeros(1), np.ones(1)
    x, w = np.polynomial.hermite.hermgauss(n)
    return SQRT2 * math.sqrt(kTs / mass) * x, w / math.sqrt(math.pi)


def arrival_distribution_current(
    params, potential, sigma0, q0, x_d, t, v0=0.0, width=None, n_hermite=N_HERMITE,
    normalization="mixture", min_flux=1e-300,
) -> ArrivalDistribution:
    """Arrival-time density at x_d from the modulus of the probability current.

    For one packet j = rho v, with rho the Gaussian density and
    v = q' + (sigma'/sigma)(x - q) the Bohmian velocity field. Thermal
    packets (``params.system_kT`` > 0) are Maxwell-Boltzmann mixtures handled
    by Gauss-Hermite nodes. ``normalization="mixture"`` normalizes the
    mixture current sum_k w_k |j_k| as a whole; ``"element"`` normalizes each
    |j_k| on its own and averages the normalized densities. Both are
    normalized on the grid ``t`` and computed in the log domain, so a far
    detector does not underflow.

    ``flux`` is the MB-averaged int |j| dt over the grid; for a current of one
    sign it equals Q(x_d, t_end) - Q(x_d, t_0). Raises
    :class:`NormalizationError` when it is below ``min_flux`` (the packet
    never reaches x_d).
    """
    if normalization not in ("mixture", "element"):
        raise ValueError("normalization must be 'mixture' or 'element'")
    t = np.asarray(t, dtype=float)
    if width is None:
        width = width_path(params, potential, sigma0, float(t[-1]), samples=max(4000, len(t)))
    nodes, weights = mb_nodes(params.system_kT, params.mass, n_hermite)
    logs = np.array([_log_current(params, potential, sigma0, q0, v0 + v, x_d, t, width) for v in nodes])
    logz = np.array([_log_trapz(lj, t) for lj in logs])
    log_flux = logsumexp(logz, b=weights)
    if not log_flux > math.log(min_flux):
        raise NormalizationError(f"the packet never reaches x_d = {x_d:g} on the time grid")
    if normalization == "mixture":
        logmix = logsumexp(logs, b=weights[:, None], axis=0)
        dens = np.exp(logmix - _log_trapz(logmix, t))
    else:
        ok = logz > math.log(min_flux)
        dens = np.sum(weights[ok, None] * np.exp(logs[ok] - logz[ok, None]), axis=0) / weights[ok].sum()
    mean = float(trapezoid(t * dens, t))
    return ArrivalDistribution(t=t, density=dens, mean=mean, flux=float(np.exp(log_flux)))


def current_flux_check(params, potential, sigma0, q0, x_d, t_end, v0=0.0, width=None):
    """Q(x_d, t_end) - Q(x_d, 0) for one element; equals int j dt exactly."""
    q_end = analytics.q_beyond("pure", potential, params, sigma0, q0, x_d, t_end, v0, width)
    q_0 = analytics.q_beyond("pure", potential, params, sigma0, q0, x_d, 0.0, v0, width)
    return float(q_end - q_0)


# ---------------------------------------------------------------------------
# dwell and transit times from trajectories


def residence_times(t, x, x1, x2):
    """Time each path spends in [x1, x2], exact for piecewise-linear paths."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1])
    # paths that never touch the interval contribute nothing
    touch = (x.max(axis=-1) >= x1) & (x.min(axis=-1) <= x2)
    if not touch.any():
        return out
    xs = x[touch]
    a, b = xs[..., :-1], xs[..., 1:]
    dt = np.diff(t)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    span = hi - lo
    overlap = np.clip(np.minimum(hi, x2) - np.maximum(lo, x1), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(span > 0, overlap / np.where(span > 0, span, 1.0), ((lo >= x1) & (lo <= x2)) * 1.0)
    out[touch] = np.sum(frac * dt, axis=-1)
    return out


@dataclass
class DwellEstimate:
    tau_d: float
    tau_d_se: float
    p_tr: float
    tau_tr: float
    tau_tr_se: float
    tau_ref: float
    tau_ref_se: float
    residence: np.ndarray
    transmitted: np.ndarray
    still_inside: int


def dwell_time_trajectory(ens: TrajectoryEnsemble, x1, x2, barrier=0.0, chunk=1024) -> DwellEstimate:
    """Mean residence time in [x1, x2] over the ensemble, split by final side.

    A trajectory counts as transmitted when it ends right of ``barrier``.
    By construction tau_d = P_tr tau_tr + (1 - P_tr) tau_ref on the ensemble.
    """
    if x1 > x2:
        raise ValueError("x1 must be <= x2")
    res = np.empty(ens.n_traj)
    final = np.empty(ens.n_traj)
    for rows, x in ens.chunks(chunk):
        res[rows] = residence_times(ens.t, x, x1, x2)
        final[rows] = x[:, -1]
    inside = int(np.sum((final >= x1) & (final <= x2)))
    if inside:
        warnings.warn(
            f"{inside} trajectories are still inside [{x1:g}, {x2:g}] at t_end", HorizonWarning, stacklevel=2
        )
    tr = final > barrier
    m, se = _mean_se(res)
    p = float(tr.mean())

    def sub(mask):
        if not mask.any():
            return float("nan"), float("nan")
        mm, ss = _mean_se(res[mask])
        return float(mm), float(ss)

    t_tr, se_tr = sub(tr)
    t_rf, se_rf = sub(~tr)
    return DwellEstimate(float(m), float(se), p, t_tr, se_tr, t_rf, se_rf, res, tr, inside)


@dataclass
class TransitTimes:
    p_tr: float
    tau_tr: float
    tau_ref: float
    tau_d: float


def _split_pure(potential, params, sigma0, q0, x1, x2, v0, width, t_max, tiny):
    p = analytics.stationary_transmission("pure", potential, params, sigma0, q0, v0, width=width).value
    dwell = analytics.dwell_time("pure", potential, params, sigma0, q0, x1, x2, v0, width, t_max)

    def q_pair(t):
        return (
            analytics.q_beyond("pure", potential, params, sigma0, q0, x1, t, v0, width),
            analytics.q_beyond("pure", potential, params, sigma0, q0, x2, t, v0, width),
        )

    if p <= tiny:
        return TransitTimes(p, float("nan"), dwell, dwell)
    if p >= 1 - tiny:
        return TransitTimes(p, dwell, float("nan"), dwell)
    tr = analytics.time_integral(
        lambda t: float(np.minimum(q_pair(t)[0], p) - np.minimum(q_pair(t)[1], p)),
        potential, params, sigma0, width, t_max,
    )
    rf = analytics.time_integral(
        lambda t: float(np.maximum(q_pair(t)[0], p) - np.maximum(q_pair(t)[1], p)),
        potential, params, sigma0, width, t_max,
    )
    return TransitTimes(p, tr / p, rf / (1 - p), dwell)


def split_transit_times(
    mode, potential, params, sigma0, q0, x1, x2, v0=0.0, width=None, t_max=None, tiny=1e-12,
    n_hermite=N_HERMITE,
) -> TransitTimes:
    """Transmission probability and transmission/reflection times in [x1, x2].

    tau_tr = (1/P_tr) int [min(Q(x1,t), P_tr) - min(Q(x2,t), P_tr)] dt and
    tau_ref the same with max and 1/(1 - P_tr); no trajectory is needed.
    ``mode="thermal"`` averages P_tr and both times over Maxwell-Boltzmann
    velocities by Gauss-Hermite quadrature; elements whose time is undefined
    (P_tr of 0 or 1 for that element) are left out of that time's average.
    A time is reported as nan when undefined for the whole ensemble.
    """
    if mode not in ("pure", "thermal"):
        raise ValueError("split transit times are defined for 'pure' and 'thermal' modes")
    if x1 > x2:
        raise ValueError("x1 must be <= x2")
    if width is None:
        t_cap = analytics._horizon(params, potential, sigma0, t_max)
        width = width_path(params, potential, sigma0, t_cap, samples=16000)
    if mode == "pure":
        return _split_pure(potential, params, sigma0, q0, x1, x2, v0, width, t_max, tiny)
    nodes, weights = mb_nodes(params.system_kT, params.mass, n_hermite)
    parts = [_split_pure(potential, params, sigma0, q0, x1, x2, v0 + v, width, t_max, tiny) for v in nodes]
    p = float(sum(w * r.p_tr for w, r in zip(weights, parts)))
    dwell = float(sum(w * r.tau_d for w, r in zip(weights, parts)))

    def avg(vals):
        vals = np.array(vals)
        ok = ~np.isnan(vals)
        if not ok.any():
            return float("nan")
        return float(np.sum(weights[ok] * vals[ok]) / np.sum(weights[ok]))

    return TransitTimes(p, avg([r.tau_tr for r in parts]), avg([r.tau_ref for r in parts]), dwell)


def transmitted_fraction(ens: TrajectoryEnsemble, barrier=0.0):
    """Fraction of trajectories right of the barrier at each recorded time, with SE."""
    frac = np.zeros(len(ens.t))
    for rows, x in ens.chunks():
        frac += np.sum(x > barrier, axis=0)
    p = frac / ens.n_traj
    se = np.sqrt(p * (1 - p) / max(ens.n_traj - 1, 1))
    return ObservableSeries("p_tr", ens.t, p, se, ens.n_traj, ens.seed)


def critical_offset(ens: TrajectoryEnsemble, barrier=0.0):
    """For a shared-center ensemble: offset X0 separating the two final sides."""
    if not ens.shared_center:
        raise ValueError("critical offset needs a single center path")
    q_end = ens.q[0, -1]
    ratio = ens.width.sigma[-1] / ens.sigma0
    return (barrier - q_end) / ratio


__all__ = [
    "ArrivalDistribution",
    "ArrivalRecord",
    "ArrivalSummary",
    "ArrivalWarning",
    "ConvergenceError",
    "DiffusionEstimate",
    "DwellEstimate",
    "HorizonWarning",
    "NormalizationError",
    "ObservableSeries",
    "TransitTimes",
    "arrival_distribution_current",
    "arrival_times",
    "critical_offset",
    "dwell_time_trajectory",
    "estimate_msd_diffusion",
    "estimate_vacf",
    "first_arrival",
    "integrate_series",
    "mean_arrival_time",
    "residence_times",
    "split_transit_times",
    "transmitted_fraction",
    "vacf_half_life",
]
