"""Acceptance suite: one test per criterion, each recording a pass/fail line.

Run with ``pytest tests/test_acceptance.py``; the verdict lines appear in the
"acceptance criteria" section of the terminal summary.
"""

import math
import os
import sys
import time

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import trapezoid

from slbohm import PhysicalParams, Potential, cli
from slbohm import analytics as an
from slbohm import observables as ob
from slbohm.dynamics import analytic_center, integrate_langevin, integrate_pinney, width_path
from slbohm.noise import NoiseStream, VelocitySampler
from slbohm.trajectories import build_ensemble


def bar_params(gamma_bar=0.0, T_bar=0.0, Ts_bar=None):
    return PhysicalParams(gamma=gamma_bar / 2, kT=T_bar / 4, kTs=None if Ts_bar is None else Ts_bar / 4)


def preset_values(name, **overrides):
    """Natural-unit values of a preset, as the command line resolves them."""
    raw = cli.layered_config(name, overrides=overrides)
    return cli.to_natural(cli._typed(raw.values))


# 1


def test_criterion_1_dwell_regression(verdict):
    start = time.perf_counter()
    vals = preset_values("dwell")
    pot = Potential.repeller(vals["omega"])
    rows, ok = [], True
    for gamma_bar, target, tol in ((0.05, 0.0402, 0.02 * 0.0402), (0.1, 0.0194, 0.02 * 0.0194), (0.2, 0.002, 5e-4)):
        p = bar_params(gamma_bar)
        tau = an.dwell_time("stochastic", pot, p, vals["sigma0"], vals["q0"], vals["x1"], vals["x2"])
        tau_bar = tau / 2.0
        good = abs(tau_bar - target) <= tol
        ok &= good
        rows.append(f"gamma_bar={gamma_bar}: {tau_bar:.5f} (target {target})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    verdict(1, ok, "; ".join(rows) + f"; {elapsed:.1f} s")
    assert ok


# 2


def test_criterion_2_transmission_regression(verdict):
    start = time.perf_counter()
    q0 = -20.0
    p = bar_params(0.2, 5.0)
    a = an.stationary_transmission("stochastic", Potential.repeller(0.05), p, 1.0, q0).value
    b = an.stationary_transmission("stochastic", Potential.repeller(0.25), p, 1.0, q0).value
    hot = an.stationary_transmission("stochastic", Potential.repeller(0.05), bar_params(0.2, 1e4), 1.0, q0).value
    elapsed = time.perf_counter() - start
    ok_a = abs(a - 0.192) <= 0.03 * 0.192
    ok_b = abs(b - 2.5e-5) <= 0.03 * 2.5e-5
    ok_hot = abs(hot - 0.5) <= 1e-3
    ok = ok_a and ok_b and ok_hot and elapsed < 10
    verdict(
        2, ok,
        f"omega_bar=0.1: {a:.4f} (0.192) {'ok' if ok_a else 'off'}; omega_bar=0.5: {b:.3e} (2.5e-5) "
        f"{'ok' if ok_b else 'off'}; T_bar=1e4: {hot:.4f} (0.5 within 1e-3) {'ok' if ok_hot else 'off'}; "
        f"{elapsed:.2f} s",
    )
    assert ok_a and ok_b
    assert elapsed < 10
    assert ok_hot, f"stationary P_tr at T_bar = 1e4 is {hot:.5f}, not within 1e-3 of 0.5"


# 3


@pytest.mark.slow
def test_criterion_3_einstein(verdict):
    start = time.perf_counter()
    p = PhysicalParams(gamma=0.2, kT=0.5)
    t_end = 50 / p.gamma
    ens = build_ensemble(p, Potential.free(), 1.0, 0.0, 5000, 20190101, 0.01, t_end, record_every=100)
    est = ob.estimate_msd_diffusion(ens)
    d_cl, se_cl = est.d_cl.at(t_end)
    d_q, se_q = est.d_q.at(t_end)
    ok_cl = abs(d_cl - 2.5) <= 3 * se_cl
    ok_q = abs(d_q - 2.5) <= 3 * se_q
    ok_order = bool(np.all(est.d_q.value >= est.d_cl.value))
    elapsed = time.perf_counter() - start
    ok = ok_cl and ok_q and ok_order and elapsed < 120
    verdict(
        3, ok,
        f"D_cl(250) = {d_cl:.3f} +- {se_cl:.3f}, D_q(250) = {d_q:.3f} +- {se_q:.3f}, "
        f"D_q >= D_cl everywhere: {ok_order}; {elapsed:.1f} s",
    )
    assert ok


# 4


def test_criterion_4_uncertainty(verdict):
    t = np.linspace(0, 100, 401)
    n_points, floor = 0, np.inf
    for gamma in (0.0, 0.05, 0.1, 0.15, 0.2, 0.5):
        for kT in (0.0, 0.01, 0.05, 0.1, 0.5):
            p = PhysicalParams(gamma=gamma, kT=kT)
            w = width_path(p, Potential.free(), 1.0, 100.0)
            u = an.uncertainty_product(p, w, t)
            n_points += u.size
            floor = min(floor, float(u.min()))
    ok_floor = floor >= 0.5 - 1e-12 and n_points >= 1000

    tt = np.linspace(0, 100, 10001)
    peaks = []
    single = True
    for gamma in (0.1, 0.12, 0.15, 0.18):
        p = PhysicalParams(gamma=gamma)
        u = an.uncertainty_product(p, width_path(p, Potential.free(), 1.0, 100.0), tt)
        interior = np.flatnonzero((u[1:-1] > u[:-2]) & (u[1:-1] >= u[2:])) + 1
        single &= interior.size == 1
        i = int(np.argmax(u))
        peaks.append((tt[i], u[i]))
    loc = [a for a, _ in peaks]
    height = [b for _, b in peaks]
    ok_order = all(b < a for a, b in zip(loc, loc[1:])) and all(b < a for a, b in zip(height, height[1:]))
    ok = ok_floor and single and ok_order
    verdict(
        4, ok,
        f"min U = {floor:.6f} over {n_points} points; single interior max: {single}; "
        "peaks (t, U): " + ", ".join(f"({a:.2f}, {b:.3f})" for a, b in peaks),
    )
    assert ok


# 5


def _order_study():
    ratios = []
    pots = [Potential.free(), Potential.linear(0.05), Potential.repeller(0.3), Potential.harmonic(0.3)]
    for pot in pots:
        for gamma in (0.0, 0.1, 0.5):
            p = PhysicalParams(gamma=gamma)
            exact, _ = analytic_center(p, pot, 1.0, 0.5, 4.0)
            errs = [abs(integrate_langevin(p, pot, 1.0, 0.5, None, dt, 4.0).q[0, -1] - exact) for dt in (0.04, 0.02, 0.01)]
            if errs[0] < 1e-11:
                continue  # exact for constant force without friction
            ratios += [errs[0] / errs[1], errs[1] / errs[2]]
    return ratios


@pytest.mark.slow
def test_criterion_5_oracles(verdict):
    parts = {}
    ratios = _order_study()
    parts["a"] = (all(3.0 < r < 5.5 for r in ratios), f"dt-halving ratios {min(ratios):.2f}..{max(ratios):.2f}")

    w = integrate_pinney(PhysicalParams(), Potential.free(), 1.0, 0.001, 2.0)
    err = abs(w.sigma[-1] - math.sqrt(2.0))
    parts["b"] = (err <= 1e-8, f"|sigma(2) - sqrt2| = {err:.1e}")

    p = PhysicalParams(kT=0.75)
    ens = build_ensemble(p, Potential.free(), 1.0, 0.0, 20000, 11, 0.05, 1.0)
    x = ens.positions()[:, -1]
    s_mc = x.std(ddof=1)
    s_se = s_mc / math.sqrt(2 * (len(x) - 1))
    s_th = float(an.thermal_width(Potential.free(), p, 1.0, 1.0))
    parts["c"] = (abs(s_mc - s_th) <= 3 * s_se, f"width {s_mc:.4f} +- {s_se:.4f} vs {s_th:.4f}")

    pot = Potential.repeller(0.05)
    pb = bar_params(0.1)
    split = ob.split_transit_times("pure", pot, pb, 1.0, -20.0, -1.0, 1.0, v0=1.0)
    ens = build_ensemble(pb, pot, 1.0, -20.0, 2000, 7, 0.05, 400.0, v0=1.0)
    d = ob.dwell_time_trajectory(ens, -1.0, 1.0)
    ok_d = abs(d.tau_tr - split.tau_tr) <= 3 * d.tau_tr_se and abs(d.tau_ref - split.tau_ref) <= 3 * d.tau_ref_se
    parts["d"] = (
        ok_d,
        f"tau_tr {d.tau_tr:.3f} +- {d.tau_tr_se:.3f} vs {split.tau_tr:.3f}, "
        f"tau_ref {d.tau_ref:.3f} +- {d.tau_ref_se:.3f} vs {split.tau_ref:.3f}",
    )

    resid = d.p_tr * d.tau_tr + (1 - d.p_tr) * d.tau_ref - d.tau_d
    parts["e"] = (abs(resid) <= 1e-12 * d.tau_d, f"partition residual {resid:.1e}")

    ok = all(v for v, _ in parts.values())
    verdict(5, ok, "; ".join(f"({k}) {'ok' if v else 'off'} {s}" for k, (v, s) in parts.items()))
    assert ok


# 6


def test_criterion_6_statistics(verdict):
    parts = {}
    p = PhysicalParams(gamma=0.2, kT=0.5)
    imp = NoiseStream.for_params(p, 2019, 0, 0.01).impulses(10**6)
    std = math.sqrt(2e-3)
    ok_imp = abs(imp.mean()) < 4 * std / 1e3 and abs(imp.var() / 2e-3 - 1) < 0.01
    ks = stats.kstest(imp[: 10**5], "norm", args=(0, std)).pvalue
    parts["impulse"] = (ok_imp and ks > 0.01, f"mean {imp.mean():.1e}, var {imp.var():.5e}, KS p {ks:.2f}")

    v = VelocitySampler(1.0, 1.0, 5).sample(np.arange(10**6))
    parts["MB"] = (abs(np.mean(v**2) - 1) < 0.01, f"<v^2> = {np.mean(v**2):.4f}")

    ens = build_ensemble(p, Potential.free(), 1.0, 0.0, 5000, 3, 0.02, 20.0, record_every=5)
    s = ob.estimate_vacf(ens)
    th, th_se = ob.vacf_half_life(s, 0.5)
    parts["VACF"] = (abs(th - math.log(2) / 0.2) <= 3 * th_se, f"half-life {th:.3f} +- {th_se:.3f} vs {math.log(2) / 0.2:.3f}")

    t = np.linspace(0, 800, 2001)[1:]
    worst = 0.0
    for Ts in (0.0, 1.0, 5.0):
        dist = ob.arrival_distribution_current(bar_params(0.0, 0.0, Ts), Potential.repeller(0.05), 1.0, -20.0, 20.0, t)
        worst = max(worst, abs(trapezoid(dist.density, t) - 1))
    parts["arrival norm"] = (worst <= 1e-6, f"|int - 1| <= {worst:.1e}")

    ok = all(v for v, _ in parts.values())
    verdict(6, ok, "; ".join(f"{k} {'ok' if v else 'off'} ({s})" for k, (v, s) in parts.items()))
    assert ok


# 7


def _curves(directory, prefix):
    out = {}
    for name in sorted(os.listdir(directory)):
        if name.startswith(prefix) and name.endswith(".csv"):
            out[name[len(prefix) : -4]] = cli.read_csv(os.path.join(directory, name))
    return out


@pytest.mark.slow
def test_criterion_7_figures(verdict, tmp_path):
    start = time.perf_counter()
    parts = {}

    fall = tmp_path / "fall"
    assert cli.main(["--preset", "falling-arrival", "--out", str(fall)]) == 0
    c = _curves(fall, "falling-arrival_kT=")
    temps = ["0", "0.1", "1"]
    q = {T: c[f"{T}_quantum"][2] for T in temps}
    cl = {T: c[f"{T}_classical"][2] for T in temps}
    mid = len(q["0"]) // 2
    monotone = all(np.all(np.diff(q[T][:, 1]) > 0) and np.all(np.diff(cl[T][:, 1]) > 0) for T in temps)
    centre = all(
        abs(q[T][mid, 1] - cl[T][mid, 1]) <= 3 * math.hypot(q[T][mid, 2], cl[T][mid, 2]) + 1e-9 for T in temps
    )
    asym = True
    for T in temps:
        dt_front = q[T][-1, 1] - cl[T][-1, 1]
        dt_back = q[T][0, 1] - cl[T][0, 1]
        mean_q = float(c[f"{T}_quantum"][0]["mean_arrival"])
        mean_cl = float(c[f"{T}_classical"][0]["mean_arrival"])
        asym &= dt_front > abs(dt_back) and mean_q > mean_cl
    rising = all(
        np.all(prof[b][:, 1] > prof[a][:, 1]) for prof in (q, cl) for a, b in zip(temps, temps[1:])
    )
    parts["falling"] = (
        monotone and centre and asym and rising,
        f"monotone {monotone}, centre equal {centre}, front/back asymmetry {asym}, rises with T {rising}",
    )

    rep = tmp_path / "rep"
    cfg = tmp_path / "rep.ini"
    cfg.write_text("[experiment]\npreset = repeller-arrival\nkTs_grid = 0,5\n")
    assert cli.main(["--config", str(cfg), "--out", str(rep)]) == 0
    peaks_ok, shown = True, []
    for w in ("0.05", "0.1"):
        peaks = []
        for Ts in ("0", "1", "5"):
            _, _, data = cli.read_csv(rep / f"repeller-arrival_omega={w}_kTs={Ts}_distribution.csv")
            peaks.append(data[np.argmax(data[:, 1]), 0])
        peaks_ok &= peaks[0] > peaks[1] > peaks[2]
        shown.append(f"omega_bar={w}: " + "/".join(f"{x:.1f}" for x in peaks))
    parts["arrival peak"] = (peaks_ok, ", ".join(shown))

    tr = tmp_path / "tr"
    cfg = tmp_path / "tr.ini"
    cfg.write_text("[experiment]\npreset = transmission\nstationary_gamma =\nt_end = 50\n")
    assert cli.main(["--config", str(cfg), "--out", str(tr)]) == 0
    onsets = []
    for T in ("10", "30", "50", "80"):
        _, _, data = cli.read_csv(tr / f"transmission_kT={T}.csv")
        onsets.append(data[np.argmax(data[:, 1] >= 0.01), 0])
    onset_ok = all(b < a for a, b in zip(onsets, onsets[1:]))
    parts["onset"] = (onset_ok, "P_tr >= 0.01 at t_bar " + "/".join(f"{x:.2f}" for x in onsets))

    elapsed = time.perf_counter() - start
    ok = all(v for v, _ in parts.values()) and elapsed < 300
    verdict(7, ok, "; ".join(f"{k} {'ok' if v else 'off'} ({s})" for k, (v, s) in parts.items()) + f"; {elapsed:.0f} s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
