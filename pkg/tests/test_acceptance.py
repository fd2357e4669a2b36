"""Acceptance criteria 1-12; each test prints one PASS/FAIL line.

Runs shared between criteria are cached, so the density check (criterion 7)
reuses the monitors attached to the runs of criteria 3, 5, 6, 8 and 9.
"""

import filecmp
import functools
import math
import time

import numpy as np
import pytest

from eulerlab import bounds as bd
from eulerlab import cli
from eulerlab import fields as fl
from eulerlab import gas as gt
from eulerlab.characteristics import MINUS, PLUS, CharPath, Tracer, riccati_along, trusted_until
from eulerlab.evolution import BLOWUP, HORIZON, SolverConfig, run

from conftest import TWO_PI, record_criterion

pytestmark = pytest.mark.acceptance

GAMMAS_5 = (5 / 3, 2.0, 2.5)


def density_monitor(gas, snap, N=0.0):
    if not 1.0 < gas.gamma < 3.0:
        return None
    return bd.DensityMonitor(bd.density_params(gas, snap, N))


def _observers(mon):
    return [mon] if mon is not None else []


# --- cached runs ---------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def transport_run(n):
    gas = gt.GasModel(5 / 3)
    grid = fl.Grid1D(-20.0, 20.0, n, boundary=fl.CONSTANT)
    snap, _ = fl.sample_initial(gas, grid, fl.constant(1.0), fl.tanh_ramp(1.0, 0.0, 2.0))
    paths = [CharPath(x0, fam) for x0 in (-4.0, -2.0, 0.0, 2.0, 4.0) for fam in (PLUS, MINUS)]
    mon = density_monitor(gas, snap)
    t0 = time.perf_counter()
    res = run(snap, SolverConfig(T=4.0), paths=[Tracer(paths)], observers=_observers(mon))
    return res, paths, mon, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def sine_run(gamma, n, with_path=False):
    gas = gt.GasModel(gamma)
    grid = fl.Grid1D(0.0, TWO_PI, n)
    snap, _ = fl.sample_initial(gas, grid, fl.constant(1.0), fl.sine(-1.0))
    cert = bd.certify(gas, snap)
    mon = density_monitor(gas, snap)
    paths = [Tracer([CharPath(0.0, PLUS)])] if with_path else []
    t0 = time.perf_counter()
    res = run(snap, SolverConfig(T=3.0, blowup_factor=20), paths=paths, observers=_observers(mon))
    return res, cert, mon, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def rarefactive_run():
    gas = gt.GasModel(5 / 3)
    grid = fl.Grid1D(-200.0, 200.0, 2048, boundary=fl.CONSTANT)
    snap, _ = fl.sample_initial(gas, grid, fl.constant(1.0), fl.tanh_ramp(5.0, 0.0, 2.0))
    mon = density_monitor(gas, snap)
    t0 = time.perf_counter()
    res = run(snap, SolverConfig(T=200.0), observers=_observers(mon))
    return res, mon, time.perf_counter() - t0


STATIONARY = {
    "sine": (fl.sine(0.1), 0.0, TWO_PI, fl.PERIODIC),
    "lorentzian": (fl.lorentzian(1.0, 0.0, 1.0), -30.0, 30.0, fl.CONSTANT),
}


@functools.lru_cache(maxsize=None)
def stationary_run(name, n):
    S0, lo, hi, boundary = STATIONARY[name]
    gas = gt.GasModel(1.4)
    snap = fl.stationary_solution(gas, S0, 1.0, fl.Grid1D(lo, hi, n, boundary=boundary))
    N = bd.certify(gas, snap, bd.GLOBAL).N
    mon = density_monitor(gas, snap, N)
    t0 = time.perf_counter()
    res = run(snap, SolverConfig(T=10.0), observers=_observers(mon))
    drift = max(np.abs(res.final.tau - snap.tau).max(), np.abs(res.final.u - snap.u).max())
    return res, drift, mon, time.perf_counter() - t0


CRITICAL_GRID = dict(x_min=0.0, x_max=1.0, n=128, boundary=fl.CONSTANT)


@functools.lru_cache(maxsize=None)
def critical_run():
    gas = gt.GasModel(5 / 3)
    fam = fl.critical_family(gas, 1.0, 1.0, fl.Grid1D(**CRITICAL_GRID))
    cert = bd.certify(gas, fam.snapshot, bd.GLOBAL)
    mon = density_monitor(gas, fam.snapshot, cert.N)
    t0 = time.perf_counter()
    res = run(fam.snapshot, SolverConfig(T=100.0), observers=_observers(mon))
    return fam, cert, res, mon, time.perf_counter() - t0


# --- criteria --------------------------------------------------------------------------


def test_criterion_01_constant_identities():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    rejected = 0
    for _ in range(200):
        while True:
            g = float(rng.uniform(1.0, 5.0))
            K = float(10 ** rng.uniform(-2, 2))
            try:
                c = gt.GasModel(g, K).constants
                break
            except ValueError:
                # constants overflow double precision as gamma -> 1
                rejected += 1
        worst = max(worst,
                    abs(c.K_p / ((g - 1) / (2 * g) * c.K_c) - 1),
                    abs(c.K_tau * c.K_c / ((g - 1) / 2) - 1))
    el = time.perf_counter() - t0
    ok = worst <= 1e-12 and el < 1.0
    detail = f"max rel err {worst:.2e} over 200 pairs ({rejected} unrepresentable redrawn), {el:.2f}s"
    assert record_criterion(1, ok, detail), detail


def test_criterion_02_transform_roundtrips():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst_tau = worst_u = worst_eta = 0.0
    for _ in range(100):
        gas = gt.GasModel(float(rng.uniform(1.1, 5.0)))
        tau = 10 ** rng.uniform(-1, 1, 100)
        u = rng.uniform(-5, 5, 100)
        S = rng.uniform(-2, 2, 100)
        r, s, m = gt.riemann_from_primitive(gas, tau, u, S)
        tau2, u2 = gt.primitive_from_riemann(gas, r, s, m)
        scale = np.abs(u) + m * gt.eta_from_tau(gas, tau)
        worst_tau = max(worst_tau, float(np.max(np.abs(tau2 / tau - 1))))
        worst_u = max(worst_u, float(np.max(np.abs(u2 - u) / scale)))
        eta = gt.eta_from_tau(gas, tau)
        worst_eta = max(worst_eta, float(np.max(np.abs(gt.tau_from_eta(gas, eta) / tau - 1))))
    el = time.perf_counter() - t0
    worst = max(worst_tau, worst_u, worst_eta)
    ok = worst <= 1e-12 and el < 1.0
    detail = f"1e4 states: tau {worst_tau:.1e}, u {worst_u:.1e}, tau<->eta {worst_eta:.1e} (rel), {el:.2f}s"
    assert record_criterion(2, ok, detail), detail


def test_criterion_03_invariant_transport_order():
    ns = (512, 1024, 2048, 4096)
    drifts = []
    el = 0.0
    for n in ns:
        res, paths, _, t = transport_run(n)
        el += t
        assert res.termination == HORIZON
        drifts.append(max(float(np.max(np.abs(p["inv"] - p["inv"][0]))) for p in paths))
    orders = [math.log2(a / b) for a, b in zip(drifts, drifts[1:])]
    ok = min(orders) >= 1.8 and el < 120
    detail = "drift " + ", ".join(f"{d:.2e}" for d in drifts) + "; orders " + ", ".join(f"{o:.2f}" for o in orders) + f", {el:.1f}s"
    assert record_criterion(3, ok, detail), detail


def test_criterion_04_riccati_consistency():
    res, _, _, el = sine_run(5 / 3, 4096, True)
    (path,) = res.paths[0].paths
    ser = riccati_along(path)
    T = trusted_until(path)
    k = ser.t <= T
    field = path["w"][: len(ser.w)]
    err = float(np.max(np.abs(ser.w[k] / field[k] - 1)))
    ok = err <= 0.01 and k.sum() > 10 and el < 60
    detail = f"max rel diff {err:.2e} over t <= {T:.4f} ({int(k.sum())} samples), {el:.1f}s"
    assert record_criterion(4, ok, detail), detail


def test_criterion_05_blowup_before_certificate_time():
    parts = []
    ok = True
    el = 0.0
    for g in GAMMAS_5:
        res, cert, _, t = sine_run(g, 2048)
        el += t
        good = cert.verdict == bd.CERTIFIED and res.termination == BLOWUP
        if good:
            lo, hi = res.bracket
            good = hi <= cert.T_ub + (hi - lo) + 0.02 * cert.T_ub
            parts.append(f"g={g:.3g}: t_hi {hi:.4f} <= T_ub {cert.T_ub:.4f}" if good else f"g={g:.3g}: t_hi {hi:.4f} > T_ub {cert.T_ub:.4f}")
        else:
            parts.append(f"g={g:.3g}: {cert.verdict}/{res.termination}")
        ok &= good
    ok &= el < 300
    detail = "; ".join(parts) + f", {el:.1f}s"
    assert record_criterion(5, ok, detail), detail


def test_criterion_06_rarefactive_long_time():
    res, _, el = rarefactive_run()
    b = res.budget
    mon = res.monitors
    dy = float(mon["max_y"].max() - b.Y)
    dq = float(mon["max_q"].max() - b.Q)
    fit = bd.linear_growth_fit(mon["t"], mon["max_tau"])
    ok = res.termination == HORIZON and dy <= 1e-6 and dq <= 1e-6 and fit.r2 >= 0.99 and el < 300
    detail = (f"{res.termination} at t={res.final.t:g}; max y - Y = {dy:.1e}, max q - Q = {dq:.1e}; "
              f"max tau slope {fit.slope:.3f}, R^2 {fit.r2:.6f}, {el:.1f}s")
    assert record_criterion(6, ok, detail), detail


def test_criterion_08_stationary_preservation():
    ns = (512, 1024, 2048)
    parts = []
    ok = True
    el = 0.0
    for name in STATIONARY:
        drifts = []
        for n in ns:
            res, d, _, t = stationary_run(name, n)
            el += t
            ok &= res.termination == HORIZON
            drifts.append(d)
        orders = [math.log2(a / b) for a, b in zip(drifts, drifts[1:])]
        ok &= drifts[-1] <= 1e-4 and min(orders) >= 1.8
        parts.append(f"{name}: drift@2048 {drifts[-1]:.2e}, orders " + ", ".join(f"{o:.2f}" for o in orders))
    ok &= el < 120
    detail = "; ".join(parts) + f", {el:.1f}s"
    assert record_criterion(8, ok, detail), detail


def test_criterion_09_threshold_sharpness():
    fam, cert, res, _, el = critical_run()
    gas = fam.snapshot.gas
    sat = fam.max_saturation_error
    smooth = res.termination == HORIZON
    # amplified entropy slope: strictly beyond the critical compression
    amp = fl.critical_family(gas, 1.0, 1.0, fl.Grid1D(**CRITICAL_GRID), entropy_scale=1.2).snapshot
    window = (CRITICAL_GRID["x_min"], CRITICAL_GRID["x_max"])
    local = bd.certify(gas, amp, bd.LOCAL, window)
    t0 = time.perf_counter()
    amp_res = run(amp, SolverConfig(T=10.0, blowup_factor=20))
    el += time.perf_counter() - t0
    final = bd.reconcile(local, amp_res)
    certified = final.verdict == bd.CERTIFIED and amp_res.termination == BLOWUP
    ok = sat <= 1e-10 and cert.verdict == bd.NOT_MET and smooth and certified and el < 300
    bracket = "none" if amp_res.bracket is None else f"{amp_res.bracket[1]:.4f}"
    detail = (f"saturation {sat:.1e}; critical certify {cert.verdict} (inf y {cert.w0:.4g}, N {cert.N:.4g}); "
              f"critical run {res.termination} at t={res.final.t:g}; amplified local certify {local.verdict} "
              f"(w0 {local.w0:.4g} vs threshold {local.threshold_used:.4g}), run {amp_res.termination} "
              f"t_hi {bracket}, {el:.1f}s")
    assert record_criterion(9, ok, detail), detail


def test_criterion_10_pressure_audit():
    t0 = time.perf_counter()
    worst = 0.0
    for g in (1.2, 1.4, 5 / 3, 2.0, 3.0, 4.0):
        rep = gt.gp_audit(gt.power_law(1.0, g))
        worst = max(worst, abs(rep.A_min - max(0.0, (3 - g) / (g + 1))))
    rep = gt.gp_audit(gt.power_sum([(1.0, 2.0), (1.0, 1.0)]))
    el = time.perf_counter() - t0
    finite = rep.A_min is not None and math.isfinite(rep.A_min)
    ok = worst <= 1e-6 and rep.monotone_ok and rep.convex_ok and finite and el < 10
    detail = (f"gamma-law A_min max err {worst:.1e}; tau^-2 + tau^-1: monotone {rep.monotone_ok}, "
              f"convex {rep.convex_ok}, A_min {rep.A_min}, {el:.2f}s")
    assert record_criterion(10, ok, detail), detail


def test_criterion_11_theta():
    a, b = gt.critical_theta(5 / 3), gt.critical_theta(3.0)
    ok = abs(a + 0.7) <= 1e-12 and abs(b + 1 / 3) <= 1e-12
    detail = f"theta(5/3) = {a!r}, theta(3) = {b!r}"
    assert record_criterion(11, ok, detail), detail


DETERMINISM = """
[gas]
gamma = 1.4
[grid]
x_min = -10
x_max = 10
n = 256
boundary = constant-extension
[init]
kind = profiles
tau = gaussian-bump amplitude=0.3 width=2 offset=1
u = sine amplitude=-0.5
S = lorentzian amplitude=0.2
[solver]
T = 2
snapshot_cadence = 20
"""


def test_criterion_12_determinism(tmp_path):
    cfg = tmp_path / "d.ini"
    cfg.write_text(DETERMINISM)
    for k in (1, 2):
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / f"run{k}"), "--quiet"]) == 0
    same = filecmp.cmp(tmp_path / "run1" / "snapshots.csv", tmp_path / "run2" / "snapshots.csv", shallow=False)
    size = (tmp_path / "run1" / "snapshots.csv").stat().st_size
    detail = f"snapshots.csv ({size} bytes) {'byte-identical' if same else 'differs'} across two runs"
    assert record_criterion(12, same, detail), detail


def test_criterion_07_density_bounds():
    # runs above, every monitored step of every scenario with 1 < gamma < 3
    mons = [("transport n=%d" % n, transport_run(n)[2]) for n in (512, 1024, 2048, 4096)]
    mons += [("sine g=%.3g" % g, sine_run(g, 2048)[2]) for g in GAMMAS_5]
    mons.append(("sine riccati", sine_run(5 / 3, 4096, True)[2]))
    mons.append(("rarefactive", rarefactive_run()[1]))
    mons += [(f"stationary {k} n={n}", stationary_run(k, n)[2]) for k in STATIONARY for n in (512, 1024, 2048)]
    mons.append(("critical", critical_run()[3]))
    worst = min((m.worst[0], name) for name, m in mons if m is not None)
    steps = sum(len(m.t) for _, m in mons if m is not None)
    ok = worst[0] >= -1e-6
    detail = f"{len(mons)} runs, {steps} steps; worst relative margin {worst[0]:.3e} ({worst[1]})"
    assert record_criterion(7, ok, detail), detail
