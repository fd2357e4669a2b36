"""Characteristic paths traced through a run, and the Riccati ODEs along them.

Plus paths follow ``dx/dt = c`` and carry ``y``; minus paths follow
``dx/dt = -c`` and carry ``q``.  Paths advance inside the run loop with the
same two-stage update as the field, so no space-time history is stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import MONOTONE_CUBIC, Interpolant
from .fields import FieldSnapshot

PLUS = "plus"
MINUS = "minus"

SAMPLE_FIELDS = ("t", "x", "c", "a0", "a2", "w", "inv", "resolution")


class _Sampler:
    """Interpolants of the fields a path needs, built once per snapshot."""

    def __init__(self, snap: FieldSnapshot):
        grid = snap.grid
        a0, a2 = snap.riccati_coeffs()
        a0 = np.broadcast_to(a0, snap.c.shape)
        self.snap = snap
        self.c = Interpolant(snap.c, grid, MONOTONE_CUBIC)
        self._a0 = a0
        self._a2 = a2
        self._cache = {}
        # fraction of the invariant's range crossed within one cell
        osc_s = float(np.ptp(snap.s)) or 1.0
        osc_r = float(np.ptp(snap.r)) or 1.0
        self._res = {
            PLUS: np.abs(snap.s_x) * grid.dx / osc_s,
            MINUS: np.abs(snap.r_x) * grid.dx / osc_r,
        }

    def field(self, name, family=None):
        key = (name, family)
        if key not in self._cache:
            snap = self.snap
            if name == "a0":
                arr = self._a0
            elif name == "a2":
                arr = self._a2
            elif name == "w":
                arr = snap.y if family == PLUS else snap.q
            elif name == "inv":
                arr = snap.s if family == PLUS else snap.r
            elif name == "resolution":
                arr = self._res[family]
            else:
                raise KeyError(name)
            self._cache[key] = Interpolant(arr, snap.grid, MONOTONE_CUBIC)
        return self._cache[key]


class CharPath:
    """One traced characteristic with per-step samples.

    Attributes
    ----------
    family : {"plus", "minus"}
    x0 : float
        Foot at ``t = 0``.
    truncated : bool
        True once the path left a non-periodic window; sampling stops there.
    """

    def __init__(self, x0: float, family: str = PLUS):
        if family not in (PLUS, MINUS):
            raise ValueError(f"family must be 'plus' or 'minus', got {family!r}")
        self.family = family
        self.sign = 1.0 if family == PLUS else -1.0
        self.x0 = float(x0)
        self.x = self.x0
        self.truncated = False
        self._rec = {k: [] for k in SAMPLE_FIELDS}

    def __len__(self):
        return len(self._rec["t"])

    def __getitem__(self, key) -> np.ndarray:
        return np.asarray(self._rec[key])

    @property
    def samples(self) -> dict:
        return {k: self[k] for k in SAMPLE_FIELDS}

    def _sample(self, sampler: _Sampler, t: float):
        _sample_all([self], sampler, t)

    def _inside(self, grid) -> bool:
        return grid.periodic or grid.x_min <= self.x <= grid.x_max


def _sample_all(paths, sampler: _Sampler, t: float):
    """Record one sample per path, evaluating each interpolant once per family."""
    if not paths:
        return
    x = np.array([p.x for p in paths])
    shared = {"c": sampler.c(x), "a0": sampler.field("a0")(x), "a2": sampler.field("a2")(x)}
    fams = np.array([p.family for p in paths])
    own = {}
    for fam in (PLUS, MINUS):
        idx = np.flatnonzero(fams == fam)
        if idx.size:
            own[fam] = (idx, {k: sampler.field(k, fam)(x[idx]) for k in ("w", "inv", "resolution")})
    for fam, (idx, vals) in own.items():
        for j, i in enumerate(idx):
            rec = paths[i]._rec
            rec["t"].append(t)
            rec["x"].append(float(x[i]))
            for k in ("c", "a0", "a2"):
                rec[k].append(float(shared[k][i]))
            for k, v in vals.items():
                rec[k].append(float(v[j]))


class Tracer:
    """A set of paths attached to a run (pass as ``run(..., paths=[tracer])``)."""

    def __init__(self, paths):
        self.paths = list(paths)
        self._sampler = None

    def start(self, snap: FieldSnapshot):
        if snap.t != 0.0:
            raise ValueError("paths are seeded at t = 0")
        self._sampler = _Sampler(snap)
        for p in self.paths:
            if not p._inside(snap.grid):
                raise ValueError(f"seed x0={p.x0} outside the grid window")
        _sample_all(self.paths, self._sampler, snap.t)

    def advance(self, old: FieldSnapshot, new: FieldSnapshot, dt: float):
        s_old = self._sampler if self._sampler is not None and self._sampler.snap is old else _Sampler(old)
        s_new = _Sampler(new)
        live = [p for p in self.paths if not p.truncated]
        if live:
            x = np.array([p.x for p in live])
            sg = np.array([p.sign for p in live])
            c0 = s_old.c(x)
            x1 = x + sg * c0 * dt
            c1 = s_new.c(x1)
            xn = x + 0.5 * dt * sg * (c0 + c1)
            keep = []
            for p, xv in zip(live, xn):
                p.x = float(xv)
                if p._inside(new.grid):
                    keep.append(p)
                else:
                    p.truncated = True
            _sample_all(keep, s_new, new.t)
        self._sampler = s_new

    def __iter__(self):
        return iter(self.paths)

    def __len__(self):
        return len(self.paths)


def default_seeds(snap: FieldSnapshot, n_uniform: int = 8) -> list[CharPath]:
    """Paths at every compressive local minimum of ``y`` (plus) and ``q`` (minus),
    plus ``n_uniform`` evenly spaced feet traced in both families."""
    paths = []
    x = snap.x
    periodic = snap.grid.periodic
    for fam, w in ((PLUS, snap.y), (MINUS, snap.q)):
        for i in _local_minima(w, periodic):
            if w[i] < 0.0:
                paths.append(CharPath(x[i], fam))
    if n_uniform > 0:
        lo, hi = snap.grid.x_min, snap.grid.x_max
        if periodic:
            feet = lo + (hi - lo) * np.arange(n_uniform) / n_uniform
        else:
            feet = lo + (hi - lo) * (np.arange(n_uniform) + 0.5) / n_uniform
        for xf in feet:
            paths.append(CharPath(xf, PLUS))
            paths.append(CharPath(xf, MINUS))
    return paths


def _local_minima(w, periodic):
    if periodic:
        left, right = np.roll(w, 1), np.roll(w, -1)
        idx = np.flatnonzero((w < left) & (w <= right))
    else:
        inner = np.flatnonzero((w[1:-1] < w[:-2]) & (w[1:-1] <= w[2:])) + 1
        idx = inner
    return idx


def trace(result_or_initial, x0: float, family: str = PLUS, config=None) -> CharPath:
    """Trace a single path by re-running from an initial snapshot.

    Prefer attaching a :class:`Tracer` to the run itself; this helper is for
    one-off use and needs ``config`` (a :class:`SolverConfig`).
    """
    from .evolution import run

    snap = result_or_initial if isinstance(result_or_initial, FieldSnapshot) else result_or_initial.initial
    if config is None:
        raise ValueError("trace needs the solver config used for the run")
    path = CharPath(x0, family)
    run(snap, config, paths=[Tracer([path])])
    return path


@dataclass(frozen=True)
class RiccatiSeries:
    t: np.ndarray
    w: np.ndarray
    blowup: bool
    t_flag: float | None = None


def _rk4_interval(w, t0, h, a0L, a0R, a2L, a2R, cap):
    """Integrate over one sample interval with linear coefficients; substeps keep
    ``h * a2 * |w|`` small so the Riccati growth is resolved."""
    T = t0 + h
    t = t0

    def f(tt, ww):
        lam = (tt - t0) / h if h > 0 else 0.0
        a0 = a0L + lam * (a0R - a0L)
        a2 = a2L + lam * (a2R - a2L)
        return a0 - a2 * ww * ww

    while t < T:
        a2m = max(abs(a2L), abs(a2R))
        rate = a2m * abs(w) + math.sqrt(abs(a0L) + abs(a0R)) * math.sqrt(a2m) + 1e-300
        k = min(T - t, 0.05 / rate)
        if T - t - k < 1e-14 * max(1.0, abs(T)):
            k = T - t
        k1 = f(t, w)
        k2 = f(t + k / 2, w + k / 2 * k1)
        k3 = f(t + k / 2, w + k / 2 * k2)
        k4 = f(t + k, w + k * k3)
        w = w + k / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t + k if k < T - t else T
        if not math.isfinite(w) or abs(w) > cap:
            return w, t, True
    return w, T, False


def riccati_along(path: CharPath, w0: float | None = None, blowup_factor: float = 1e4) -> RiccatiSeries:
    """Integrate ``dw/dt = a0 - a2 w**2`` with the path's sampled coefficients.

    Classic RK4 with coefficients linear in time between samples.  The series
    stops at the first sample time where ``|w|`` passes
    ``blowup_factor * (1 + |w0|)``; that time is returned as ``t_flag``.
    """
    t = path["t"]
    a0 = path["a0"]
    a2 = path["a2"]
    w = float(path["w"][0]) if w0 is None else float(w0)
    cap = blowup_factor * (1.0 + abs(w))
    out_t = [t[0]]
    out_w = [w]
    for i in range(len(t) - 1):
        w, t_end, flagged = _rk4_interval(w, t[i], t[i + 1] - t[i], a0[i], a0[i + 1], a2[i], a2[i + 1], cap)
        if flagged:
            return RiccatiSeries(np.asarray(out_t), np.asarray(out_w), True, float(t_end))
        out_t.append(t[i + 1])
        out_w.append(w)
    return RiccatiSeries(np.asarray(out_t), np.asarray(out_w), False, None)


def a2_integral(path: CharPath, T: float | None = None) -> float:
    """Trapezoid accumulation of ``a2`` along the path up to ``T`` (default: end)."""
    t = path["t"]
    a2 = path["a2"]
    if T is None:
        T = t[-1]
    if T > t[-1] * (1 + 1e-12) + 1e-300:
        raise ValueError(f"path covers [0, {t[-1]:.6g}], asked for T={T:.6g}")
    k = int(np.searchsorted(t, T, side="right"))
    val = float(np.trapezoid(a2[:k], t[:k])) if k > 1 else 0.0
    if k < len(t) and T > t[k - 1]:
        lam = (T - t[k - 1]) / (t[k] - t[k - 1])
        a2T = a2[k - 1] + lam * (a2[k] - a2[k - 1])
        val += 0.5 * (T - t[k - 1]) * (a2[k - 1] + a2T)
    return val


def trusted_until(path: CharPath, resolution: float = 0.5) -> float:
    """Last sample time before the invariant's gradient stops being resolved.

    ``resolution`` bounds ``|s_x| dx / osc(s)`` (``r`` on minus paths).
    """
    res = path["resolution"]
    t = path["t"]
    bad = np.flatnonzero(res > resolution)
    if bad.size == 0:
        return float(t[-1])
    return float(t[max(bad[0] - 1, 0)])
