"""Characteristic semi-Lagrangian evolution in Riemann variables.

The forward variable ``s`` is carried along ``dx/dt = c`` and the backward
variable ``r`` along ``dx/dt = -c``, both with the entropy source
``(1/(2 gamma)) (c m_x / m) (s - r)``.  ``m`` (equivalently ``S``) is frozen.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .fields import FieldSnapshot, GradientBudget, gradient_budget

log = logging.getLogger(__name__)

HORIZON = "horizon-reached"
BLOWUP = "blowup-detected"
FAILURE = "step-failure"

MONOTONE_CUBIC = "monotone-cubic"
LINEAR = "linear"


class StepFailure(RuntimeError):
    """The scheme cannot produce a valid next state (vacuum, bad dt, NaN)."""


@dataclass(frozen=True)
class SolverConfig:
    T: float
    cfl: float = 0.5
    snapshot_cadence: int = 0
    blowup_factor: float = 1e4
    dt_min: float | None = None
    interpolation: str = MONOTONE_CUBIC
    blowup_window: int = 10

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.blowup_factor > 10.0:
            raise ValueError(f"blowup_factor must exceed 10, got {self.blowup_factor}")
        if not self.T > 0.0:
            raise ValueError("horizon T must be positive")
        if self.interpolation not in (MONOTONE_CUBIC, LINEAR):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")

    @property
    def min_dt(self) -> float:
        return 1e-12 * self.T if self.dt_min is None else self.dt_min


class Interpolant:
    """Field on a grid evaluated at arbitrary points (periodic or clamped)."""

    __slots__ = ("values", "slopes", "x0", "dx", "periodic", "clamped")

    def __init__(self, values, grid, method=MONOTONE_CUBIC):
        self.values = np.ascontiguousarray(values, dtype=float)
        self.x0 = grid.x_min
        self.dx = grid.dx
        self.periodic = grid.periodic
        self.slopes = (
            kernels.node_slopes(self.values, self.dx, self.periodic)
            if method == MONOTONE_CUBIC
            else None
        )
        self.clamped = 0

    def __call__(self, pts):
        pts = np.ascontiguousarray(pts, dtype=float)
        if self.slopes is None:
            v, k = kernels.linear_eval(self.values, self.x0, self.dx, pts, self.periodic)
        else:
            v, k = kernels.hermite_eval(
                self.values, self.slopes, self.x0, self.dx, pts, self.periodic
            )
        self.clamped += k
        return v


def cfl_dt(snap: FieldSnapshot, cfl: float, remaining: float | None = None) -> float:
    """Largest stable step ``cfl * dx / max c``, capped by the time left."""
    cmax = float(np.max(snap.c))
    if not math.isfinite(cmax) or cmax <= 0.0:
        raise StepFailure(f"max sound speed is {cmax!r}")
    dt = cfl * snap.grid.dx / cmax
    if remaining is not None:
        dt = min(dt, remaining)
    return dt


def source(gamma, c, m, m_x, s, r):
    """Entropy source ``(1/(2 gamma)) (c m_x/m) (s - r)``."""
    return (0.5 / gamma) * c * (m_x / m) * (s - r)


def _outside(grid, feet):
    """Masks of feet left of / right of a constant-extension window."""
    if grid.periodic:
        return None, None
    return feet < grid.x_min, feet > grid.x_max


def _inflow(vals, mask, value):
    if mask is not None and mask.any():
        vals[mask] = value
    return vals


@dataclass
class StepInfo:
    clamped_feet: int = 0


def step(snap: FieldSnapshot, dt: float, interpolation: str = MONOTONE_CUBIC, info=None):
    """Advance by ``dt`` with the two-stage (Heun) semi-Lagrangian update."""
    gas, grid = snap.gas, snap.grid
    g = gas.gamma
    x = grid.x
    m, m_x = snap.m, snap.m_x
    isentropic = snap.isentropic or not np.any(m_x)
    K_c = gas.constants.K_c
    cexp = (g + 1.0) / (g - 1.0)

    s0 = Interpolant(snap.s, grid, interpolation)
    r0 = Interpolant(snap.r, grid, interpolation)
    c0 = Interpolant(snap.c, grid, interpolation)
    if isentropic:
        src0 = None
    else:
        src0 = Interpolant(source(g, snap.c, m, m_x, snap.s, snap.r), grid, interpolation)

    # stage 1: feet from current speeds; beyond a constant-extension window
    # the entering invariant keeps its initial edge value and the source vanishes
    s_in, r_in = snap.inflow if snap.inflow is not None else (None, None)
    fp = x - snap.c * dt
    fm = x + snap.c * dt
    out_p, _ = _outside(grid, fp)
    _, out_m = _outside(grid, fm)
    s1 = _inflow(s0(fp), out_p, s_in)
    r1 = _inflow(r0(fm), out_m, r_in)
    if src0 is not None:
        s1 = s1 + dt * _inflow(src0(fp), out_p, 0.0)
        r1 = r1 + dt * _inflow(src0(fm), out_m, 0.0)
    if not np.all(s1 > r1):
        raise StepFailure(f"s <= r after predictor at t={snap.t + dt:.6g} (vacuum approach)")
    eta1 = (s1 - r1) / (2.0 * m)
    c1 = K_c * m * eta1**cexp

    # stage 2: trapezoidal feet and sources
    fp = x - 0.5 * dt * (c1 + c0(fp))
    fm = x + 0.5 * dt * (c1 + c0(fm))
    out_p, _ = _outside(grid, fp)
    _, out_m = _outside(grid, fm)
    s2 = _inflow(s0(fp), out_p, s_in)
    r2 = _inflow(r0(fm), out_m, r_in)
    if src0 is not None:
        src1 = source(g, c1, m, m_x, s1, r1)
        s2 = s2 + 0.5 * dt * (_inflow(src0(fp), out_p, 0.0) + src1)
        r2 = r2 + 0.5 * dt * (_inflow(src0(fm), out_m, 0.0) + src1)
    if not (np.all(np.isfinite(s2)) and np.all(np.isfinite(r2))):
        raise StepFailure(f"non-finite Riemann variables at t={snap.t + dt:.6g}")
    if not np.all(s2 > r2):
        raise StepFailure(f"s <= r at t={snap.t + dt:.6g} (vacuum approach)")
    if info is not None:
        info.clamped_feet += s0.clamped + r0.clamped
    return FieldSnapshot.from_riemann(snap, snap.t + dt, r2, s2)


MONITOR_FIELDS = (
    "t",
    "dt",
    "max_y",
    "max_q",
    "min_y",
    "min_q",
    "max_abs_w",
    "min_tau",
    "max_tau",
    "max_abs_s",
    "max_abs_r",
    "max_abs_u",
    "max_eta",
)


def peak_abs(w, periodic=True) -> float:
    """Sub-grid estimate of ``max |w|`` from a parabola through the top node.

    Removes the grid-phase jitter of the raw node maximum as a narrow peak
    travels between nodes, which would otherwise break the monotone-growth
    test of :func:`detect_blowup`.
    """
    a = np.abs(w)
    i = int(np.argmax(a))
    n = a.shape[0]
    c = float(a[i])
    if periodic:
        lft, rgt = float(a[(i - 1) % n]), float(a[(i + 1) % n])
    elif 0 < i < n - 1:
        lft, rgt = float(a[i - 1]), float(a[i + 1])
    else:
        return c
    den = lft - 2.0 * c + rgt
    return c - 0.125 * (rgt - lft) ** 2 / den if den < 0.0 else c


class Monitors:
    """Per-step scalar records, stored column-wise."""

    def __init__(self):
        self.data = {k: [] for k in MONITOR_FIELDS}

    def record(self, snap: FieldSnapshot, dt: float = 0.0):
        d = self.data
        d["t"].append(snap.t)
        d["dt"].append(dt)
        d["max_y"].append(float(snap.y.max()))
        d["max_q"].append(float(snap.q.max()))
        d["min_y"].append(float(snap.y.min()))
        d["min_q"].append(float(snap.q.min()))
        d["max_abs_w"].append(max(peak_abs(snap.y, snap.grid.periodic), peak_abs(snap.q, snap.grid.periodic)))
        d["min_tau"].append(float(snap.tau.min()))
        d["max_tau"].append(float(snap.tau.max()))
        d["max_abs_s"].append(float(np.abs(snap.s).max()))
        d["max_abs_r"].append(float(np.abs(snap.r).max()))
        d["max_abs_u"].append(float(np.abs(snap.u).max()))
        d["max_eta"].append(float(snap.eta.max()))

    def __len__(self):
        return len(self.data["t"])

    def __getitem__(self, key) -> np.ndarray:
        return np.asarray(self.data[key])

    def tail(self, key, k: int) -> np.ndarray:
        """Last ``k`` records of ``key``."""
        return np.asarray(self.data[key][-k:])


@dataclass(frozen=True)
class BlowupVerdict:
    detected: bool
    bracket: tuple[float, float] | None = None
    threshold: float = math.inf
    value: float = 0.0


def detect_blowup(monitors, budget: GradientBudget, blowup_factor: float, window: int = 10):
    """Gradient catastrophe test on the monitor history.

    Blowup is declared when ``max(|y|, |q|)`` reaches
    ``blowup_factor * (1 + Ybar + Qbar)`` after rising strictly over the last
    ``window`` steps; the bracket is the last step interval.
    """
    w = monitors.tail("max_abs_w", window + 1)
    threshold = blowup_factor * (1.0 + budget.Ybar + budget.Qbar)
    if len(w) < 2 or w[-1] < threshold:
        return BlowupVerdict(False, threshold=threshold, value=float(w[-1]) if len(w) else 0.0)
    if len(w) < window + 1 or not np.all(np.diff(w) > 0.0):
        return BlowupVerdict(False, threshold=threshold, value=float(w[-1]))
    t = monitors.tail("t", 2)
    return BlowupVerdict(True, (float(t[-2]), float(t[-1])), threshold, float(w[-1]))


@dataclass
class RunResult:
    snapshots: list
    monitors: Monitors
    termination: str
    bracket: tuple[float, float] | None = None
    message: str = ""
    clamped_feet: int = 0
    budget: GradientBudget | None = None
    paths: list = field(default_factory=list)
    steps: int = 0

    @property
    def final(self) -> FieldSnapshot:
        return self.snapshots[-1]

    @property
    def initial(self) -> FieldSnapshot:
        return self.snapshots[0]


def run(
    initial: FieldSnapshot,
    config: SolverConfig,
    budget: GradientBudget | None = None,
    paths=(),
    observers=(),
) -> RunResult:
    """Advance ``initial`` to the horizon or to detected gradient blowup.

    ``paths`` are characteristic tracers (see :mod:`eulerlab.characteristics`)
    advanced in lockstep; ``observers`` are callables receiving every snapshot.
    """
    if budget is None:
        budget = gradient_budget(initial)
    monitors = Monitors()
    monitors.record(initial)
    snaps = [initial]
    paths = list(paths)
    for p in paths:
        p.start(initial)
    for obs in observers:
        obs(initial)
    info = StepInfo()
    snap = initial
    T = config.T
    nstep = 0
    termination, bracket, message = HORIZON, None, ""
    while snap.t < T and not math.isclose(snap.t, T, rel_tol=1e-14, abs_tol=0.0):
        try:
            dt = cfl_dt(snap, config.cfl, T - snap.t)
            if dt < config.min_dt and T - snap.t > config.min_dt:
                raise StepFailure(f"dt={dt:.3e} below dt_min at t={snap.t:.6g}")
            new = step(snap, dt, config.interpolation, info)
        except StepFailure as exc:
            termination, message = FAILURE, str(exc)
            log.warning("step failure: %s", exc)
            break
        nstep += 1
        for p in paths:
            p.advance(snap, new, dt)
        snap = new
        monitors.record(snap, dt)
        for obs in observers:
            obs(snap)
        verdict = detect_blowup(monitors, budget, config.blowup_factor, config.blowup_window)
        if verdict.detected:
            termination, bracket = BLOWUP, verdict.bracket
            message = f"max |w| = {verdict.value:.4g} >= {verdict.threshold:.4g}"
            break
        if config.snapshot_cadence and nstep % config.snapshot_cadence == 0:
            snaps.append(snap)
    if snaps[-1] is not snap:
        snaps.append(snap)
    return RunResult(
        snapshots=snaps,
        monitors=monitors,
        termination=termination,
        bracket=bracket,
        message=message,
        clamped_feet=info.clamped_feet,
        budget=budget,
        paths=paths,
        steps=nstep,
    )
