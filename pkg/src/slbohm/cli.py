"""Command-line experiment runner.

A run is described by a flat key/value configuration (an INI file with an
``[experiment]`` and an optional ``[sweep]`` section, or command-line flags
on top of a preset). Every curve is written as its own CSV file and the run
is recorded in ``manifest.ini``, which is itself a valid configuration for
rerunning.
"""

from __future__ import annotations

import argparse
import configparser
import functools
import itertools
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__, analytics, observables
from .core import (
    ConfigError,
    DimensionlessUnits,
    ExperimentConfig,
    PhysicalParams,
    Potential,
    PotentialKind,
    validate_config,
)
from .dynamics import IntegrationError, width_path
from .trajectories import WORKERS_ENV, build_ensemble

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

# key -> parser; list-valued keys accept "a,b,c" or "start:stop:count"
FLOAT_KEYS = ("mass", "hbar", "gamma", "kT", "kTs", "omega", "g", "sigma0", "q0", "v0", "dt", "t_end", "x_d", "x1", "x2")
INT_KEYS = ("n_traj", "seed", "record_every", "n_points")
LIST_KEYS = ("offsets", "kT_grid", "kTs_grid", "kTs_curves", "stationary_gamma")
STR_KEYS = ("preset", "units", "potential", "out")
BOOL_KEYS = ("classical",)

# which keys scale with which bar unit
_UNIT_OF = {
    "gamma": "rate",
    "omega": "rate",
    "kT": "energy",
    "kTs": "energy",
    "dt": "time",
    "t_end": "time",
    "q0": "length",
    "x_d": "length",
    "x1": "length",
    "x2": "length",
    "v0": "velocity",
    "g": "acceleration",
    "kT_grid": "energy",
    "kTs_grid": "energy",
    "kTs_curves": "energy",
    "stationary_gamma": "rate",
    "offsets": "length",
}

BASE = {
    "preset": "custom",
    "units": "natural",
    "potential": "free",
    "mass": "1",
    "hbar": "1",
    "gamma": "0",
    "kT": "0",
    "sigma0": "1",
    "q0": "0",
    "v0": "0",
    "n_traj": "5000",
    "dt": "0.002",
    "t_end": "100",
    "seed": "20190101",
    "classical": "false",
    "x_d": "0",
    "x1": "-1",
    "x2": "1",
    "out": "out",
    "record_every": "10",
    "n_points": "2000",
}

PRESETS = {
    "uncertainty": {
        "figure": "Fig. 1: uncertainty product U(t) of a free dissipative packet",
        "defaults": {"potential": "free", "gamma": "0.1", "kT": "0", "dt": "0.01", "t_end": "100"},
        "sweep": {"gamma": "0.1,0.12,0.15,0.18"},
    },
    "brownian-bohmian": {
        "figure": "Fig. 2: classical and Bohmian MSD and D(t) of a free Brownian packet",
        "defaults": {"potential": "free", "gamma": "0.2", "kT": "0.5", "dt": "0.01", "t_end": "100"},
        "sweep": {"kT": "0.2,0.5"},
    },
    "falling-arrival": {
        "figure": "Fig. 3: thermal arrival time at the ground versus initial position",
        "defaults": {
            "potential": "linear", "g": "0.05", "gamma": "0.2", "q0": "10", "x_d": "0",
            "dt": "0.05", "t_end": "800", "offsets": "-3:3:13", "record_every": "100",
        },
        "sweep": {"kT": "0,0.1,1"},
    },
    "repeller-arrival": {
        "figure": "Fig. 4: arrival-time distributions and mean arrival time at x_d = 20",
        "defaults": {
            "units": "bar", "dt": "0.001", "potential": "repeller", "omega": "0.05", "gamma": "0", "kT": "0",
            "q0": "-20", "x_d": "20", "t_end": "400", "n_points": "2000",
            "kTs_curves": "0,1,5", "kTs_grid": "0:5:21",
        },
        "sweep": {"omega": "0.05,0.1"},
    },
    "transmission": {
        "figure": "Fig. 5: transmission probability versus time and its stationary value versus T",
        "defaults": {
            "units": "bar", "dt": "0.001", "potential": "repeller", "omega": "0.1", "gamma": "0.1", "q0": "-20",
            "t_end": "200", "n_points": "2000", "kT_grid": "0:100:41", "stationary_gamma": "0.05,0.5",
        },
        "sweep": {"kT": "10,30,50,80"},
    },
    "dwell": {
        "figure": "Fig. 6: dwell time in [-1, 1] versus temperature",
        "defaults": {
            "units": "bar", "dt": "0.001", "potential": "repeller", "omega": "0.1", "q0": "-20", "x1": "-1", "x2": "1",
            "kT_grid": "0:20:41",
        },
        "sweep": {"gamma": "0.05,0.1,0.2"},
    },
    "custom": {
        "figure": "none: ensemble mean position and width for any configuration",
        "defaults": {},
        "sweep": {},
    },
}


# ---------------------------------------------------------------------------
# configuration


def parse_list(text):
    text = str(text).strip()
    if not text:
        return []
    if ":" in text:
        a, b, n = text.split(":")
        return list(np.linspace(float(a), float(b), int(n)))
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class RawConfig:
    """String-valued configuration as layered from preset, file and flags."""

    values: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)


def layered_config(preset=None, config_path=None, overrides=None, sweeps=None) -> RawConfig:
    """Merge base defaults, preset defaults, an INI file and flag overrides."""
    errors = []
    file_vals, file_sweep = {}, None
    if config_path:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        if not cp.read(config_path):
            raise ConfigError([f"config: cannot read {config_path}"])
        if cp.has_section("experiment"):
            file_vals = dict(cp["experiment"])
        if cp.has_section("sweep"):
            file_sweep = dict(cp["sweep"])
    name = preset or file_vals.get("preset") or "custom"
    if name not in PRESETS:
        raise ConfigError([f"preset must be one of {', '.join(PRESETS)}"])
    vals = dict(BASE)
    vals.update(PRESETS[name]["defaults"])
    sweep = dict(PRESETS[name]["sweep"])
    vals.update(file_vals)
    if file_sweep is not None:
        sweep = file_sweep
    vals.update({k: str(v) for k, v in (overrides or {}).items() if v is not None})
    vals["preset"] = name
    if sweeps is not None:
        sweep = dict(sweeps)
    known = set(FLOAT_KEYS + INT_KEYS + LIST_KEYS + STR_KEYS + BOOL_KEYS)
    for k in vals:
        if k not in known:
            errors.append(f"{k}: unknown configuration key")
    for k in sweep:
        if k not in FLOAT_KEYS:
            errors.append(f"sweep {k}: only numeric parameters can be swept")
    if errors:
        raise ConfigError(errors)
    return RawConfig(vals, {k: v for k, v in sweep.items() if str(v).strip()})


def _units(vals):
    sigma0 = float(vals.get("sigma0", 1))
    return DimensionlessUnits(sigma0, float(vals.get("mass", 1)), float(vals.get("hbar", 1)))


def _scale(units: DimensionlessUnits, kind):
    return {
        "rate": units.frequency,
        "energy": units.energy,
        "time": units.time,
        "length": units.length,
        "velocity": units.length / units.time,
        "acceleration": units.length / units.time**2,
    }[kind]


def _typed(vals):
    out, errors = {}, []
    for k, v in vals.items():
        try:
            if k in FLOAT_KEYS:
                out[k] = float(v)
            elif k in INT_KEYS:
                out[k] = int(v)
            elif k in LIST_KEYS:
                out[k] = parse_list(v)
            elif k in BOOL_KEYS:
                out[k] = _parse_bool(v)
            else:
                out[k] = v
        except ValueError as exc:
            errors.append(f"{k}: {exc}")
    if errors:
        raise ConfigError(errors)
    return out


def to_natural(vals: dict) -> dict:
    """Convert a typed configuration from its declared units to natural units."""
    units = vals.get("units", "natural")
    if units not in ("natural", "bar"):
        raise ConfigError(["units must be 'natural' or 'bar'"])
    if units == "natural":
        return dict(vals)
    u = _units(vals)
    out = dict(vals)
    for k, kind in _UNIT_OF.items():
        if k in out and out[k] is not None:
            s = _scale(u, kind)
            out[k] = [x * s for x in out[k]] if isinstance(out[k], list) else out[k] * s
    return out


def build_experiment(vals: dict) -> ExperimentConfig:
    """Typed natural-unit values -> validated ExperimentConfig (raises ConfigError)."""
    errors = []
    try:
        params = PhysicalParams(
            mass=vals["mass"], hbar=vals["hbar"], gamma=vals["gamma"], kT=vals["kT"], kTs=vals.get("kTs"),
        )
    except ConfigError as exc:
        errors += exc.errors
        params = None
    try:
        kind = PotentialKind(vals["potential"])
        pot = Potential(
            kind,
            g=vals.get("g", 0.0) if kind in (PotentialKind.LINEAR, PotentialKind.REPELLER) else 0.0,
            omega=vals.get("omega", 0.0) if kind in (PotentialKind.REPELLER, PotentialKind.HARMONIC) else 0.0,
        )
    except ValueError as exc:
        errors += getattr(exc, "errors", [f"potential: {exc}"])
        pot = None
    if errors:
        raise ConfigError(errors)
    cfg = ExperimentConfig(
        preset=vals["preset"], params=params, potential=pot, sigma0=vals["sigma0"], q0=vals["q0"], v0=vals["v0"],
        n_traj=vals["n_traj"], dt=vals["dt"], t_end=vals["t_end"], seed=vals["seed"],
        classical=vals["classical"], x_d=vals["x_d"], x1=vals["x1"], x2=vals["x2"], out_dir=vals["out"],
    )
    validate_config(cfg)
    return cfg


# ---------------------------------------------------------------------------
# output


@dataclass
class Curve:
    label: str
    axis: str
    x: np.ndarray
    value: np.ndarray
    stderr: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    # sweep keys the curve depends on; None means all of them
    sweep_keys: tuple | None = None


def _fmt(v):
    return format(float(v), ".17g")


def write_csv(path, curve: Curve, header: dict):
    """CSV: '#'-prefixed 'key: value' header lines, then axis,value,stderr rows."""
    se = np.zeros_like(curve.value) if curve.stderr is None else curve.stderr
    with open(path, "w") as fh:
        for k, v in header.items():
            fh.write(f"# {k}: {v}\n")
        for k, v in curve.meta.items():
            fh.write(f"# {k}: {v}\n")
        fh.write(f"{curve.axis},value,stderr\n")
        for x, y, e in zip(curve.x, curve.value, se):
            fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(e)}\n")


def read_csv(path):
    """Return (header dict, axis name, array of shape (n, 3))."""
    header, rows, axis = {}, [], None
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition(": ")
                header[k] = v
            elif axis is None:
                axis = line.strip().split(",")[0]
            else:
                rows.append([float(x) for x in line.split(",")])
    return header, axis, np.array(rows)


def _sweep_label(point):
    return "_".join(f"{k}={_short(v)}" for k, v in point)


def _short(v):
    return format(float(v), "g")


# ---------------------------------------------------------------------------
# presets


def _time_grid(cfg, vals):
    n = int(vals["n_points"])
    return np.linspace(0.0, cfg.t_end, n + 1)


def run_uncertainty(cfg, vals, conv, cache):
    t = np.arange(0.0, cfg.t_end + 0.5 * cfg.dt, cfg.dt)
    w = width_path(cfg.params, cfg.potential, cfg.sigma0, cfg.t_end, classical=cfg.classical)
    u = analytics.uncertainty_product(cfg.params, w, t, cfg.potential)
    return [Curve("", "t", conv.t(t), u)]


def run_brownian(cfg, vals, conv, cache):
    ens = build_ensemble(
        cfg.params, cfg.potential, cfg.sigma0, cfg.q0, cfg.n_traj, cfg.seed, cfg.dt, cfg.t_end,
        v0=cfg.v0, classical=cfg.classical, record_every=int(vals["record_every"]),
    )
    est = observables.estimate_msd_diffusion(ens)
    t = conv.t(ens.t)
    return [
        Curve(s.name, "t", t, s.value, s.stderr)
        for s in (est.msd_cl, est.msd_q, est.d_cl, est.d_q)
    ]


def run_falling(cfg, vals, conv, cache):
    offsets = np.asarray(vals["offsets"], dtype=float)
    reducer = {"arrival": functools.partial(observables.arrival_times, x_d=cfg.x_d, offsets=offsets)}
    curves = []
    regimes = [("classical", True)] if cfg.classical else [("quantum", False), ("classical", True)]
    for name, classical in regimes:
        ens = build_ensemble(
            cfg.params, cfg.potential, cfg.sigma0, cfg.q0, cfg.n_traj, cfg.seed, cfg.dt, cfg.t_end,
            v0=cfg.v0, classical=classical, record_every=int(vals["record_every"]), reducers=reducer,
        )
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            s = observables.mean_arrival_time(ens.reduced["arrival"], offsets, cfg.sigma0)
        for wmsg in caught:
            print(f"warning: {wmsg.message}", file=sys.stderr)
        curves.append(
            Curve(
                name, "x0", conv.x(cfg.q0 + offsets), conv.time_value(s.profile), conv.time_value(s.profile_se),
                meta={
                    "mean_arrival": _fmt(conv.time_value(s.mean)),
                    "mean_arrival_stderr": _fmt(conv.time_value(s.stderr)),
                    "never_fraction": _fmt(s.never_fraction),
                },
            )
        )
    return curves


def run_repeller_arrival(cfg, vals, conv, cache):
    t = _time_grid(cfg, vals)[1:]
    curves = []
    for kts in vals["kTs_curves"]:
        p = cfg.params.with_(kTs=kts)
        d = observables.arrival_distribution_current(p, cfg.potential, cfg.sigma0, cfg.q0, cfg.x_d, t, cfg.v0)
        curves.append(
            Curve(
                f"kTs={_short(conv.energy(kts))}_distribution", "t", conv.t(t), d.density * conv.units_time,
                meta={"mean_arrival": _fmt(conv.time_value(d.mean))},
            )
        )
    means = []
    for kts in vals["kTs_grid"]:
        p = cfg.params.with_(kTs=kts)
        means.append(observables.arrival_distribution_current(p, cfg.potential, cfg.sigma0, cfg.q0, cfg.x_d, t, cfg.v0).mean)
    curves.append(Curve("mean", "kTs", conv.energy(np.array(vals["kTs_grid"])), conv.time_value(np.array(means))))
    return curves


def run_transmission(cfg, vals, conv, cache):
    t = _time_grid(cfg, vals)
    w = width_path(cfg.params, cfg.potential, cfg.sigma0, cfg.t_end, samples=max(4000, len(t)))
    p = analytics.transmission_probability("stochastic", cfg.potential, cfg.params, cfg.sigma0, cfg.q0, t, width=w)
    curves = [Curve("", "t", conv.t(t), p)]
    # the stationary curves carry their own gamma and T axes
    fixed = ("omega", "g", "q0", "sigma0", "v0", "mass", "hbar")
    for gamma in vals.get("stationary_gamma") or []:
        key = ("stationary", gamma, tuple(vals["kT_grid"])) + tuple(vals.get(k) for k in fixed)
        if key not in cache:
            vals_t = []
            for kT in vals["kT_grid"]:
                prm = cfg.params.with_(gamma=gamma, kT=kT)
                st = analytics.stationary_transmission("stochastic", cfg.potential, prm, cfg.sigma0, cfg.q0)
                vals_t.append(st.value)
            cache[key] = Curve(
                f"stationary_gamma={_short(conv.rate(gamma))}", "kT", conv.energy(np.array(vals["kT_grid"])),
                np.array(vals_t), sweep_keys=tuple(k for k in fixed if k in vals.get("_swept", ())),
            )
        curves.append(cache[key])
    return curves


def run_dwell(cfg, vals, conv, cache):
    taus = []
    for kT in vals["kT_grid"]:
        prm = cfg.params.with_(kT=kT)
        taus.append(analytics.dwell_time("stochastic", cfg.potential, prm, cfg.sigma0, cfg.q0, cfg.x1, cfg.x2))
    return [Curve("", "kT", conv.energy(np.array(vals["kT_grid"])), conv.time_value(np.array(taus)))]


def run_custom(cfg, vals, conv, cache):
    ens = build_ensemble(
        cfg.params, cfg.potential, cfg.sigma0, cfg.q0, cfg.n_traj, cfg.seed, cfg.dt, cfg.t_end,
        v0=cfg.v0, classical=cfg.classical, record_every=int(vals["record_every"]),
    )
    mean = np.zeros(len(ens.t))
    sq = np.zeros(len(ens.t))
    for _, x in ens.chunks():
        mean += x.sum(axis=0)
        sq += (x**2).sum(axis=0)
    n = ens.n_traj
    mean /= n
    var = np.maximum(sq / n - mean**2, 0.0)
    se = np.sqrt(var / max(n - 1, 1))
    t = conv.t(ens.t)
    return [
        Curve("mean_position", "t", t, conv.x(mean), conv.x(se)),
        Curve("width", "t", t, conv.x(ens.width.sigma)),
    ]


RUNNERS = {
    "uncertainty": run_uncertainty,
    "brownian-bohmian": run_brownian,
    "falling-arrival": run_falling,
    "repeller-arrival": run_repeller_arrival,
    "transmission": run_transmission,
    "dwell": run_dwell,
    "custom": run_custom,
}


class _Reporter:
    """Natural -> configured units for reported axes and values."""

    def __init__(self, units, u: DimensionlessUnits):
        self.bar = units == "bar"
        self.u = u
        self.units_time = u.time if self.bar else 1.0

    def t(self, t):
        return self.u.tbar(t) if self.bar else np.asarray(t)

    time_value = t

    def x(self, x):
        return self.u.xbar(x) if self.bar else np.asarray(x)

    def energy(self, e):
        return self.u.Tbar(e) if self.bar else np.asarray(e)

    def rate(self, r):
        return self.u.ratebar(r) if self.bar else np.asarray(r)


# ---------------------------------------------------------------------------
# run


def sweep_points(sweep: dict):
    keys = list(sweep)
    lists = [parse_list(sweep[k]) for k in keys]
    if not keys:
        return [()]
    return [tuple(zip(keys, combo)) for combo in itertools.product(*lists)]


def run(raw: RawConfig, stream=None) -> list[str]:
    """Execute a layered configuration; returns the written file paths."""
    stream = stream or sys.stdout
    typed = _typed(raw.values)
    preset = typed["preset"]
    points = sweep_points(raw.sweep)
    resolved = []
    for point in points:
        v = dict(typed)
        v.update(dict(point))
        nat = to_natural(v)
        resolved.append((point, nat, build_experiment(nat)))

    out_dir = typed["out"]
    os.makedirs(out_dir, exist_ok=True)
    written = []
    cache = {}
    for point, nat, cfg in resolved:
        conv = _Reporter(typed["units"], _units(typed))
        nat["_swept"] = tuple(k for k, _ in point)
        curves = RUNNERS[preset](cfg, nat, conv, cache)
        for c in curves:
            own = point if c.sweep_keys is None else tuple((k, v) for k, v in point if k in c.sweep_keys)
            label = _sweep_label(own)
            parts = [preset] + [s for s in (label, c.label) if s]
            path = os.path.join(out_dir, "_".join(parts) + ".csv")
            if path in written:
                continue
            header = {
                "slbohm": __version__,
                "preset": preset,
                "curve": "_".join(s for s in (label, c.label) if s) or "single",
                "units": typed["units"],
                "seed": cfg.seed,
                "n_traj": cfg.n_traj,
                "dt": _fmt(v_or(typed, point, "dt")),
                "t_end": _fmt(v_or(typed, point, "t_end")),
                "params": _param_line(typed, point),
            }
            write_csv(path, c, header)
            written.append(path)
            print(path, file=stream)
    write_manifest(os.path.join(out_dir, "manifest.ini"), raw, resolved, written)
    return written


def v_or(typed, point, key):
    return dict(point).get(key, typed[key])


def _param_line(typed, point):
    v = dict(typed)
    v.update(dict(point))
    keys = ("potential", "mass", "hbar", "gamma", "kT", "kTs", "g", "omega", "sigma0", "q0", "v0")
    return " ".join(f"{k}={v[k]}" for k in keys if k in v)


def write_manifest(path, raw: RawConfig, resolved, written):
    """INI run record: [experiment] and [sweep] rerun the same job as-is."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["experiment"] = {k: str(v) for k, v in sorted(raw.values.items())}
    cp["sweep"] = {k: str(v) for k, v in raw.sweep.items()}
    cp["run"] = {
        "version": __version__,
        "workers_env": WORKERS_ENV,
        "files": ",".join(os.path.basename(w) for w in written),
    }
    for i, (point, nat, cfg) in enumerate(resolved):
        p = cfg.params
        cp[f"resolved.{i}"] = {
            "sweep_point": _sweep_label(point) or "none",
            "mass": _fmt(p.mass), "hbar": _fmt(p.hbar), "gamma": _fmt(p.gamma), "kT": _fmt(p.kT),
            "kTs": _fmt(p.system_kT), "potential": cfg.potential.kind.value, "g": _fmt(cfg.potential.g),
            "omega": _fmt(cfg.potential.omega), "sigma0": _fmt(cfg.sigma0), "q0": _fmt(cfg.q0),
            "v0": _fmt(cfg.v0), "n_traj": str(cfg.n_traj), "dt": _fmt(cfg.dt), "t_end": _fmt(cfg.t_end),
            "seed": str(cfg.seed), "classical": str(cfg.classical).lower(), "x_d": _fmt(cfg.x_d),
            "x1": _fmt(cfg.x1), "x2": _fmt(cfg.x2),
        }
    if raw.values.get("units") == "bar":
        cp["electron_scales"] = {k: _fmt(v) for k, v in DimensionlessUnits.electron(0.4).items()}
    with open(path, "w") as fh:
        cp.write(fh)


def list_presets(stream=None):
    stream = stream or sys.stdout
    for name, entry in PRESETS.items():
        vals = dict(BASE)
        vals.update(entry["defaults"])
        print(f"{name}", file=stream)
        print(f"  reproduces: {entry['figure']}", file=stream)
        shown = {k: vals[k] for k in sorted(vals) if k not in ("preset", "out")}
        print("  defaults: " + ", ".join(f"{k}={v}" for k, v in shown.items()), file=stream)
        sweep = ", ".join(f"{k}={v}" for k, v in entry["sweep"].items()) or "none"
        print(f"  sweep: {sweep}", file=stream)


def _parse_sweep(items):
    out = {}
    for item in items or []:
        key, sep, values = item.partition("=")
        if not sep:
            raise ConfigError([f"sweep: expected key=v1,v2,... got {item!r}"])
        out[key.strip()] = values.strip()
    return out


def make_parser():
    ap = argparse.ArgumentParser(prog="slbohm", description="Stochastic Bohmian packet dynamics experiments.")
    ap.add_argument("--preset", choices=list(PRESETS))
    ap.add_argument("--config", help="INI file with [experiment] and optional [sweep] sections")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--n-traj", type=int, dest="n_traj")
    ap.add_argument("--dt", type=float)
    ap.add_argument("--t-end", type=float, dest="t_end")
    ap.add_argument("--out")
    ap.add_argument("--classical-mode", action="store_true", dest="classical",
                    help="drop the quantum term of the width equation")
    ap.add_argument("--sweep", action="append", metavar="KEY=V1,V2,...",
                    help="sweep a parameter (repeatable; an empty list gives a single run)")
    ap.add_argument("--list-presets", action="store_true")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.list_presets:
        list_presets()
        return 0
    try:
        overrides = {
            "seed": args.seed, "n_traj": args.n_traj, "dt": args.dt, "t_end": args.t_end, "out": args.out,
            "classical": "true" if args.classical else None,
        }
        sweeps = _parse_sweep(args.sweep) if args.sweep is not None else None
        raw = layered_config(args.preset, args.config, overrides, sweeps)
        run(raw)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, analytics.ConvergenceError, observables.NormalizationError, FloatingPointError) as exc:
        print(f"numerical error ({type(exc).__module__}.{type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
