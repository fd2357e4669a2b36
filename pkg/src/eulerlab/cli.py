"""Command-line scenario runner.

    eulerlab <simulate|certify|audit-pressure|family|sweep> --config FILE
             [--out DIR] [--seed-paths K] [--quiet]

Exit codes: 0 success, 2 certificate bound violated, 3 step failure,
4 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import bounds as bd
from . import characteristics as ch
from . import evolution as ev
from . import fields as fl
from . import gas as gt
from . import io
from . import kernels
from .config import FORMATS, ConfigError, ScenarioConfig, _defaults, parse_config, parse_pressure, parse_profile

log = logging.getLogger("eulerlab")

EXIT_OK = 0
EXIT_VIOLATED = 2
EXIT_STEP_FAILURE = 3
EXIT_CONFIG = 4

COMMANDS = ("simulate", "certify", "audit-pressure", "family", "sweep")


# --- building blocks from a config ------------------------------------------------


def build_gas(cfg: ScenarioConfig) -> gt.GasModel:
    g = cfg["gas"]
    return gt.GasModel(g["gamma"], g["K"], g["c_v"])


def build_grid(cfg: ScenarioConfig) -> fl.Grid1D:
    cfg.require("grid")
    g = cfg["grid"]
    return fl.Grid1D(g["x_min"], g["x_max"], g["n"], g["boundary"])


def build_initial(cfg: ScenarioConfig, gas=None, grid=None):
    """Initial snapshot and an info dict describing how it was made."""
    cfg.require("init")
    gas = gas or build_gas(cfg)
    grid = grid or build_grid(cfg)
    init = cfg["init"]
    kind = init["kind"]
    info = {"kind": kind}
    try:
        if kind == "profiles":
            S0 = parse_profile(init["S"]) if init["S"] is not None else None
            snap, rep = fl.sample_initial(gas, grid, parse_profile(init["tau"]), parse_profile(init["u"]), S0)
            info.update(M1=rep.M1, M2=rep.M2)
        elif kind == "table":
            cols = io.read_table(init["file"], init["time"])
            xs = cols["x"]
            tau0 = fl.tabulated(xs, cols["tau"], grid.boundary)
            u0 = fl.tabulated(xs, cols["u"], grid.boundary)
            S0 = None
            if "S" in cols and np.any(cols["S"] != 0.0):
                S0 = fl.tabulated(xs, cols["S"], grid.boundary)
            snap, rep = fl.sample_initial(gas, grid, tau0, u0, S0)
            info.update(M1=rep.M1, M2=rep.M2)
        elif kind == "stationary":
            snap = fl.stationary_solution(gas, parse_profile(init["S"]), init["K_tauS"], grid)
        else:
            fam = fl.critical_family(
                gas, init["slope"], init["offset"], grid, init["K_tauS"], init["entropy_scale"]
            )
            snap = fam.snapshot
            info.update(theta=fam.theta, max_saturation_error=fam.max_saturation_error)
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}: init: {exc}") from None
    return snap, info


def solver_config(cfg: ScenarioConfig) -> ev.SolverConfig:
    cfg.require("solver")
    s = cfg["solver"]
    return ev.SolverConfig(
        T=s["T"], cfl=s["cfl"], snapshot_cadence=s["snapshot_cadence"],
        blowup_factor=s["blowup_factor"], dt_min=s["dt_min"], interpolation=s["interpolation"],
    )


def _analysis(cfg):
    return cfg["analysis"] if cfg.has("analysis") else _defaults("analysis")


def _formats(cfg):
    return cfg["output"]["formats"] if cfg.has("output") else FORMATS


def _out_dir(cfg, override):
    if override:
        return override
    return cfg["output"]["directory"] if cfg.has("output") else "out"


# --- subcommands -----------------------------------------------------------------------------


def _run_with_paths(snap, scfg, seed_paths, observers=()):
    tracer = ch.Tracer(ch.default_seeds(snap, seed_paths)) if seed_paths is not None else None
    res = ev.run(snap, scfg, paths=[tracer] if tracer else [], observers=observers)
    return res, tracer


def _emit_run(out, formats, res, tracer, scfg):
    if "snapshots" in formats:
        io.write_snapshots(os.path.join(out, "snapshots.csv"), res.snapshots)
    if "monitors" in formats:
        io.write_monitors(os.path.join(out, "monitors.csv"), res.monitors)
    if "paths" in formats and tracer is not None and tracer.paths:
        series = [ch.riccati_along(p, blowup_factor=scfg.blowup_factor) for p in tracer.paths]
        io.write_paths(os.path.join(out, "paths.csv"), tracer.paths, series)


def _run_summary(res) -> dict:
    lo, hi = res.bracket or (math.nan, math.nan)
    return {
        "termination": res.termination,
        "t_final": res.final.t,
        "steps": res.steps,
        "bracket_lo": lo,
        "bracket_hi": hi,
        "clamped_feet": res.clamped_feet,
        "message": res.message or "none",
    }


def cmd_simulate(cfg, out, seed_paths=8, quiet=False) -> int:
    gas = build_gas(cfg)
    snap, info = build_initial(cfg, gas)
    scfg = solver_config(cfg)
    res, tracer = _run_with_paths(snap, scfg, seed_paths)
    formats = _formats(cfg)
    _emit_run(out, formats, res, tracer, scfg)
    summary = {**info, **_run_summary(res)}
    if "report" in formats:
        io.write_kv(os.path.join(out, "summary.txt"), summary)
    log.info("simulate: %s at t=%.6g after %d steps", res.termination, res.final.t, res.steps)
    return EXIT_STEP_FAILURE if res.termination == ev.FAILURE else EXIT_OK


def _certify_pipeline(cfg, out, seed_paths=8):
    """Certificate, run, reconciliation and monitor report; returns (exit code, row)."""
    gas = build_gas(cfg)
    snap, info = build_initial(cfg, gas)
    scfg = solver_config(cfg)
    a = _analysis(cfg)
    mode = None if a["mode"] == "auto" else a["mode"]
    window = (a["alpha"], a["beta"]) if a["alpha"] is not None else None
    try:
        cert = bd.certify(gas, snap, mode, window)
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}: analysis: {exc}") from None
    observers = []
    density = None
    linfty = None
    if 1.0 < gas.gamma < 3.0 and cert.mode != bd.LOCAL:
        density = bd.DensityMonitor(bd.density_params(gas, snap, cert.N if cert.mode == bd.GLOBAL else 0.0))
        observers.append(density)
    if cert.mode == bd.GLOBAL:
        d = fl.entropy_diagnostics(snap)
        linfty = bd.linfty_bounds(gas, d.M_s, d.M_r, d.V, d.M_L, d.M_U)
    res, tracer = _run_with_paths(snap, scfg, seed_paths, observers)
    final = bd.reconcile(cert, res, a["rel_tol"])
    report = bd.verify_run(res, cert.N if cert.mode != bd.ISENTROPIC else 0.0, density, a["tolerance"], linfty)
    formats = _formats(cfg)
    _emit_run(out, formats, res, tracer, scfg)
    cd = final.as_dict()
    cd["verdict_before_run"] = cert.verdict
    if "certificate" in formats:
        io.write_kv(os.path.join(out, "certificate.txt"), _certificate_fields(cd))
    if "report" in formats:
        io.write_kv(os.path.join(out, "report.txt"), {**_run_summary(res), **report.as_dict()})
    if final.verdict == bd.VIOLATED:
        code = EXIT_VIOLATED
    elif res.termination == ev.FAILURE:
        code = EXIT_STEP_FAILURE
    else:
        code = EXIT_OK
    row = {
        "verdict": final.verdict, "T_ub": final.T_ub, "w0": final.w0, "threshold": final.threshold_used,
        **_run_summary(res), "exit": code,
    }
    return code, row


def _certificate_fields(d):
    order = [
        ("mode", "mode"), ("w0", "w0"), ("x0", "x0"), ("family", "family"),
        ("threshold", "threshold_used"), ("margin", "margin"), ("N", "N"),
        ("sharp_threshold", "sharp_threshold"), ("envelope_K10", "envelope_K10"),
        ("envelope_K9", "envelope_K9"), ("T_ub", "T_ub"), ("bracket_lo", "bracket_lo"),
        ("bracket_hi", "bracket_hi"), ("verdict_before_run", "verdict_before_run"),
        ("verdict", "verdict"), ("alpha", "alpha"), ("beta", "beta"), ("note", "note"),
    ]
    return {k: d[src] for k, src in order if src in d and (src not in ("alpha", "beta") or d[src] is not None)}


def cmd_certify(cfg, out, seed_paths=8, quiet=False) -> int:
    code, row = _certify_pipeline(cfg, out, seed_paths)
    log.info("certify: verdict %s, T_ub=%.6g, run %s", row["verdict"], row["T_ub"], row["termination"])
    return code


def cmd_audit(cfg, out, seed_paths=None, quiet=False) -> int:
    a = _analysis(cfg)
    if a["pressure"] is not None:
        law = gt.power_sum(parse_pressure(a["pressure"]))
    else:
        g = cfg["gas"]
        law = gt.power_law(g["K"], g["gamma"])
    audit = gt.gp_audit(law)
    d = {"law": law.name, **audit.as_dict()}
    io.write_kv(os.path.join(out, "pressure_audit.txt"), d)
    log.info("audit-pressure: A_min = %s", d["A_min"])
    return EXIT_OK


def cmd_family(cfg, out, seed_paths=None, quiet=False) -> int:
    gas = build_gas(cfg)
    snap, info = build_initial(cfg, gas)
    io.write_snapshots(os.path.join(out, "initial.csv"), [snap])
    extra = {}
    if not snap.isentropic:
        extra["sharp_threshold"] = bd.sharp_threshold(snap)
        extra["min_y"] = float(snap.y.min())
        extra["min_q"] = float(snap.q.min())
    io.write_kv(os.path.join(out, "family.txt"), {**info, **extra})
    return EXIT_OK


def _sweep_one(args):
    cfg, out, seed_paths = args
    logging.getLogger("eulerlab").setLevel(logging.WARNING)
    try:
        code, row = _certify_pipeline(cfg, out, seed_paths)
    except ConfigError as exc:
        return EXIT_CONFIG, {"exit": EXIT_CONFIG, "message": str(exc)}
    return code, row


SWEEP_COLUMNS = (
    "verdict", "T_ub", "w0", "threshold", "termination", "t_final", "steps",
    "bracket_lo", "bracket_hi", "exit",
)


def cmd_sweep(cfg, out, seed_paths=8, quiet=False) -> int:
    points = cfg.sweep_points()
    jobs = []
    for i, pt in enumerate(points):
        jobs.append((cfg.with_values(pt), os.path.join(out, f"run_{i:03d}"), seed_paths))
    cap = os.environ.get("EULERLAB_THREADS")
    workers = max(1, int(cap)) if cap else (os.cpu_count() or 1)
    workers = min(workers, len(jobs))
    if workers == 1:
        results = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    keys = list(cfg.sweep)
    rows = []
    worst = EXIT_OK
    for i, (pt, (code, row)) in enumerate(zip(points, results)):
        rows.append([i, *(pt[k] for k in keys), *(row.get(c, math.nan) for c in SWEEP_COLUMNS)])
        if not quiet:
            desc = " ".join(f"{k}={pt[k]}" for k in keys)
            print(f"[{i:03d}] {desc}: {row.get('verdict', '-')} {row.get('termination', '-')} exit={code}")
        if code != EXIT_OK and worst == EXIT_OK:
            worst = code
    io.write_rows(os.path.join(out, "sweep_summary.csv"), ("index", *keys, *SWEEP_COLUMNS), rows)
    return worst


HANDLERS = {
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "audit-pressure": cmd_audit,
    "family": cmd_family,
    "sweep": cmd_sweep,
}


def make_parser():
    p = argparse.ArgumentParser(prog="eulerlab", description="Smooth 1D Euler flows: runs, bounds and blowup certificates")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="scenario INI file")
    p.add_argument("--out", default=None, help="output directory (default: output.directory)")
    p.add_argument("--seed-paths", type=int, default=8, metavar="K",
                   help="uniformly seeded characteristic pairs traced per run (default 8)")
    p.add_argument("--quiet", action="store_true", help="only warnings and errors")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    if args.seed_paths < 0:
        print("error: --seed-paths must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(args.config)
        out = _out_dir(cfg, args.out)
        log.info("kernel backend: %s", kernels.BACKEND)
        return HANDLERS[args.command](cfg, out, args.seed_paths, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
