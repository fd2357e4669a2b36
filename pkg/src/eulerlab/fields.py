"""Grids, field snapshots, initial data and entropy diagnostics."""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from typing import Callable

import numpy as np

from . import gas as gt
from . import kernels

PERIODIC = "periodic"
CONSTANT = "constant-extension"


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n`` cells on ``[x_min, x_max]``.

    Periodic grids carry ``n`` nodes (``x_max`` is identified with ``x_min``);
    constant-extension grids carry ``n + 1`` nodes including both ends.
    """

    x_min: float
    x_max: float
    n: int
    boundary: str = PERIODIC

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be below x_max")
        if self.n < 16:
            raise ValueError("grid needs at least 16 cells")
        if self.boundary not in (PERIODIC, CONSTANT):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")

    @property
    def periodic(self) -> bool:
        return self.boundary == PERIODIC

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def n_nodes(self) -> int:
        return self.n if self.periodic else self.n + 1

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_nodes)

    def refine(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.n * factor, self.boundary)


def spatial_derivative(values, grid: Grid1D) -> np.ndarray:
    """Fourth-order derivative on the grid; one-sided at open boundaries."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_nodes,):
        raise ValueError(f"expected {grid.n_nodes} values, got {values.shape}")
    return kernels.derivative(values, grid.dx, grid.periodic)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FieldSnapshot:
    """State ``(tau, u, S)`` on a grid at time ``t`` plus derived fields.

    ``S is None`` marks an isentropic snapshot (``m == 1``).  ``m_x`` and
    ``m_xx`` default to grid derivatives of ``S`` chained into ``m``;
    generators with closed forms pass them explicitly.  Passing
    ``riemann=(r, s)`` builds the state from the Riemann variables, which are
    then stored bit-for-bit (``tau`` and ``u`` are ignored).

    On a constant-extension grid ``inflow = (s_left, r_right)`` holds the
    invariants entering through the window edges.  Outside the window the
    extended data is constant with no entropy source, so these keep their
    ``t = 0`` values; they default to the edge values of this snapshot.
    """

    gas: gt.GasModel
    grid: Grid1D
    t: float
    tau: np.ndarray
    u: np.ndarray
    S: np.ndarray | None = None
    m_x: np.ndarray | None = None
    m_xx: np.ndarray | None = None
    inflow: tuple | None = None
    eta: np.ndarray = field(init=False)
    c: np.ndarray = field(init=False)
    m: np.ndarray = field(init=False)
    r: np.ndarray = field(init=False)
    s: np.ndarray = field(init=False)
    y: np.ndarray = field(init=False)
    q: np.ndarray = field(init=False)
    riemann: InitVar[tuple | None] = None

    def __post_init__(self, riemann):
        n = self.grid.n_nodes
        set_ = object.__setattr__
        if riemann is None:
            tau = np.asarray(self.tau, dtype=float)
            if tau.shape != (n,):
                raise ValueError(f"tau has shape {tau.shape}, grid has {n} nodes")
            if not np.all(tau > 0.0):
                raise ValueError("tau must be positive everywhere (vacuum in data)")
            set_(self, "tau", _frozen(tau))
            set_(self, "u", _frozen(np.broadcast_to(np.asarray(self.u, dtype=float), (n,))))
        if self.S is not None:
            S = self.S
            if not (isinstance(S, np.ndarray) and not S.flags.writeable):
                S = _frozen(np.broadcast_to(np.asarray(S, dtype=float), (n,)))
            set_(self, "S", S)
            two_cv = 2.0 * self.gas.c_v
            m = np.exp(S / two_cv)
            m_x, m_xx = self.m_x, self.m_xx
            if m_x is None or m_xx is None:
                # two stencil passes on S, chain rule into m
                S_x = spatial_derivative(S, self.grid)
                S_xx = spatial_derivative(S_x, self.grid)
                m_x = m * S_x / two_cv
                m_xx = m * (S_xx / two_cv + (S_x / two_cv) ** 2)
        else:
            m = np.ones(n)
            m_x = np.zeros(n)
            m_xx = np.zeros(n)
        set_(self, "m", _frozen(m))
        set_(self, "m_x", _frozen(m_x))
        set_(self, "m_xx", _frozen(m_xx))
        if riemann is None:
            eta = gt.eta_from_tau(self.gas, self.tau)
            set_(self, "r", _frozen(self.u - self.m * eta))
            set_(self, "s", _frozen(self.u + self.m * eta))
        else:
            r, s = (np.asarray(v, dtype=float) for v in riemann)
            if r.shape != (n,) or s.shape != (n,):
                raise ValueError(f"Riemann variables must have {n} entries")
            if not np.all(s > r):
                raise ValueError("s <= r: state at or beyond vacuum")
            eta = (s - r) / (2.0 * self.m)
            set_(self, "r", _frozen(r))
            set_(self, "s", _frozen(s))
            set_(self, "tau", _frozen(gt.tau_from_eta(self.gas, eta)))
            set_(self, "u", _frozen(0.5 * (s + r)))
        if self.inflow is None and not self.grid.periodic:
            set_(self, "inflow", (float(self.s[0]), float(self.r[-1])))
        set_(self, "eta", _frozen(eta))
        set_(self, "c", _frozen(gt.sound_speed_eta(self.gas, eta, self.m)))
        s_x = spatial_derivative(self.s, self.grid)
        r_x = spatial_derivative(self.r, self.grid)
        y, q = gt.gradient_vars(self.gas, eta, self.m, self.m_x, s_x, r_x)
        set_(self, "y", _frozen(y))
        set_(self, "q", _frozen(q))

    @property
    def isentropic(self) -> bool:
        return self.S is None

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def s_x(self):
        return spatial_derivative(self.s, self.grid)

    @property
    def r_x(self):
        return spatial_derivative(self.r, self.grid)

    @property
    def pressure(self):
        return gt.pressure(self.gas, self.tau, self.S)

    def riccati_coeffs(self):
        return gt.riccati_coeffs(self.gas, self.eta, self.m, self.m_x, self.m_xx)

    @classmethod
    def from_riemann(cls, like: "FieldSnapshot", t: float, r, s) -> "FieldSnapshot":
        """New snapshot on ``like``'s grid/entropy from Riemann variables."""
        return cls(like.gas, like.grid, t, None, None, like.S, like.m_x, like.m_xx, like.inflow, riemann=(r, s))

    def columns(self):
        """Columns in snapshot-CSV order."""
        S = np.zeros_like(self.tau) if self.S is None else self.S
        return {
            "t": np.full(self.tau.shape, self.t),
            "x": self.x,
            "tau": self.tau,
            "u": self.u,
            "S": S,
            "eta": self.eta,
            "c": self.c,
            "m": self.m,
            "r": self.r,
            "s": self.s,
            "y": self.y,
            "q": self.q,
        }


# --- initial data ------------------------------------------------------------

Profile = Callable[[np.ndarray], np.ndarray]


def constant(value=0.0) -> Profile:
    return lambda x: np.full_like(np.asarray(x, dtype=float), value)


def sine(amplitude=1.0, wavenumber=1.0, phase=0.0, offset=0.0) -> Profile:
    return lambda x: offset + amplitude * np.sin(wavenumber * np.asarray(x) + phase)


def gaussian_bump(amplitude=1.0, center=0.0, width=1.0, offset=0.0) -> Profile:
    return lambda x: offset + amplitude * np.exp(-(((np.asarray(x) - center) / width) ** 2))


def tanh_ramp(amplitude=1.0, center=0.0, width=1.0, offset=0.0) -> Profile:
    return lambda x: offset + amplitude * np.tanh((np.asarray(x) - center) / width)


def lorentzian(amplitude=1.0, center=0.0, width=1.0, offset=0.0) -> Profile:
    """``offset + amplitude / (1 + ((x - center)/width)**2)``."""
    return lambda x: offset + amplitude / (1.0 + ((np.asarray(x) - center) / width) ** 2)


PROFILES = {
    "constant": constant,
    "sine": sine,
    "gaussian-bump": gaussian_bump,
    "tanh-ramp": tanh_ramp,
    "lorentzian": lorentzian,
}


def tabulated(xs, values, boundary=CONSTANT) -> Profile:
    """Monotone-cubic interpolant through samples on a uniform abscissa."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    dx = (xs[-1] - xs[0]) / (len(xs) - 1)
    if not np.allclose(np.diff(xs), dx, rtol=1e-9, atol=1e-12 * max(1.0, abs(dx))):
        raise ValueError("tabulated samples must be uniformly spaced")
    periodic = boundary == PERIODIC
    slopes = kernels.node_slopes(values, dx, periodic)

    n = len(xs)

    def prof(x):
        pts = np.ravel(np.asarray(x, dtype=float))
        v, _ = kernels.hermite_eval(values, slopes, xs[0], dx, pts, periodic)
        # exact samples at the nodes, so a table re-reads as the same snapshot
        j = np.rint((pts - xs[0]) / dx).astype(np.int64)
        ok = (j >= 0) & (j < n)
        hit = np.flatnonzero(ok)
        hit = hit[np.abs(pts[hit] - xs[j[hit]]) <= 1e-9 * dx]
        v[hit] = values[j[hit]]
        return v.reshape(np.shape(x))

    return prof


@dataclass(frozen=True)
class InitialReport:
    M1: float
    M2: float


def sample_initial(
    gas: gt.GasModel,
    grid: Grid1D,
    tau0: Profile,
    u0: Profile,
    S0: Profile | None = None,
    tau_floor: float = 0.0,
) -> tuple[FieldSnapshot, InitialReport]:
    """Sample profiles on the grid and build the ``t = 0`` snapshot."""
    x = grid.x
    tau = np.asarray(tau0(x), dtype=float)
    if not np.all(tau > tau_floor):
        raise ValueError("tau0 must stay above its positive floor (vacuum in data)")
    u = np.asarray(u0(x), dtype=float)
    S = None if S0 is None else np.asarray(S0(x), dtype=float)
    snap = FieldSnapshot(gas, grid, 0.0, tau, u, S)
    return snap, initial_report(snap)


def initial_report(snap: FieldSnapshot) -> InitialReport:
    """Grid estimates of the C1 budget M1 and the volume floor M2."""
    tau_x = spatial_derivative(snap.tau, snap.grid)
    u_x = spatial_derivative(snap.u, snap.grid)
    M1 = max(np.abs(snap.tau).max(), np.abs(snap.u).max()) + max(
        np.abs(tau_x).max(), np.abs(u_x).max()
    )
    if snap.S is not None:
        S_x = spatial_derivative(snap.S, snap.grid)
        S_xx = spatial_derivative(S_x, snap.grid)
        M1 += np.abs(snap.S).max() + np.abs(S_x).max() + np.abs(S_xx).max()
    return InitialReport(M1=float(M1), M2=float(snap.tau.min()))


# --- budgets and classification -------------------------------------------------


@dataclass(frozen=True)
class GradientBudget:
    Y: float
    Q: float
    N: float
    Ybar: float
    Qbar: float


def gradient_budget(snap: FieldSnapshot, N: float = 0.0, window=None) -> GradientBudget:
    """Upper bounds carried by the comparison principle for ``y`` and ``q``."""
    sel = _window_mask(snap.grid, window)
    ymax = float(snap.y[sel].max())
    qmax = float(snap.q[sel].max())
    return GradientBudget(
        Y=max(0.0, ymax),
        Q=max(0.0, qmax),
        N=float(N),
        Ybar=max(float(N), ymax),
        Qbar=max(float(N), qmax),
    )


@dataclass(frozen=True)
class Classification:
    rarefactive: bool
    forward_compressive: np.ndarray
    backward_compressive: np.ndarray
    min_s_x: float
    min_r_x: float

    @property
    def compressive_nodes(self) -> np.ndarray:
        return np.union1d(self.forward_compressive, self.backward_compressive)


def classify_initial(snap: FieldSnapshot) -> Classification:
    """Split nodes by the sign of ``s_x`` and ``r_x`` (zero counts as rarefactive)."""
    s_x = snap.s_x
    r_x = snap.r_x
    fwd = np.flatnonzero(s_x < 0.0)
    bwd = np.flatnonzero(r_x < 0.0)
    return Classification(
        rarefactive=fwd.size == 0 and bwd.size == 0,
        forward_compressive=fwd,
        backward_compressive=bwd,
        min_s_x=float(s_x.min()),
        min_r_x=float(r_x.min()),
    )


# --- exact stationary and critical families -----------------------------------


def stationary_solution(
    gas: gt.GasModel, S0: Profile, K_tauS: float, grid: Grid1D, m_x=None, m_xx=None
) -> FieldSnapshot:
    """Zero-velocity state with ``tau = K_tauS exp(S/(gamma c_v))`` (uniform pressure)."""
    if not K_tauS > 0.0:
        raise ValueError("K_tauS must be positive")
    S = np.asarray(S0(grid.x), dtype=float)
    tau = K_tauS * np.exp(S / (gas.gamma * gas.c_v))
    return FieldSnapshot(gas, grid, 0.0, tau, np.zeros_like(tau), S, m_x, m_xx)


def stationary_y(gas: gt.GasModel, m, m_x, eta):
    """Closed-form ``y = -q`` of a stationary state."""
    g = gas.gamma
    return (
        (g - 1.0)
        / (g * (3.0 * g - 1.0))
        * m_x
        * m ** (3.0 * (g - 3.0) / (2.0 * (3.0 * g - 1.0)))
        * eta ** ((3.0 * g - 1.0) / (2.0 * (g - 1.0)))
    )


@dataclass(frozen=True)
class CriticalFamily:
    snapshot: FieldSnapshot
    theta: float
    y_exact: np.ndarray
    ratio: np.ndarray
    max_saturation_error: float


def critical_family(
    gas: gt.GasModel,
    slope: float,
    offset: float,
    grid: Grid1D,
    K_tauS: float = 1.0,
    entropy_scale: float = 1.0,
) -> CriticalFamily:
    """Stationary data with ``m**theta`` affine, where ``y**2 == a0/a2`` at every node.

    ``entropy_scale != 1`` multiplies ``S`` (and so its slope) while keeping
    the unscaled ``tau``; the result is no longer stationary and carries
    compression beyond the critical strength.
    """
    theta = gt.critical_theta(gas.gamma)
    x = grid.x
    base = slope * x + offset
    if not np.all(base > 0.0):
        raise ValueError("m**theta = slope*x + offset must stay positive on the grid")
    m = base ** (1.0 / theta)
    m_x = (slope / theta) * base ** (1.0 / theta - 1.0)
    m_xx = (slope / theta) * (1.0 / theta - 1.0) * slope * base ** (1.0 / theta - 2.0)
    S = 2.0 * gas.c_v * np.log(m)
    tau = K_tauS * np.exp(S / (gas.gamma * gas.c_v))
    if entropy_scale == 1.0:
        snap = FieldSnapshot(gas, grid, 0.0, tau, np.zeros_like(tau), S, m_x, m_xx)
    else:
        k = entropy_scale
        mk_x = k * m ** (k - 1.0) * m_x
        mk_xx = k * (k - 1.0) * m ** (k - 2.0) * m_x**2 + k * m ** (k - 1.0) * m_xx
        snap = FieldSnapshot(gas, grid, 0.0, tau, np.zeros_like(tau), k * S, mk_x, mk_xx)
    eta = gt.eta_from_tau(gas, tau)
    y_exact = stationary_y(gas, m, m_x, eta)
    ratio = gt.a0_over_a2(gas, eta, m, m_x, m_xx)
    err = np.abs(y_exact**2 - ratio) / np.maximum(np.abs(ratio), np.finfo(float).tiny)
    return CriticalFamily(snap, theta, y_exact, ratio, float(err.max()) if err.size else 0.0)


# --- entropy diagnostics -------------------------------------------------------------


@dataclass(frozen=True)
class EntropyDiagnostics:
    b: np.ndarray
    M3: float
    V: float
    M_L: float
    M_U: float
    M_s: float
    M_r: float
    window: tuple[float, float]


def _window_mask(grid: Grid1D, window):
    x = grid.x
    if window is None:
        return np.ones(x.shape, dtype=bool)
    a, b = window
    tol = 1e-9 * grid.dx
    return (x >= a - tol) & (x <= b + tol)


def entropy_diagnostics(snap: FieldSnapshot, window=None) -> EntropyDiagnostics:
    """Entropy curvature ``b``, ``M3``, total variation ``V`` and state suprema.

    Suprema are taken over the grid nodes inside ``window`` (default: all).
    """
    gas = snap.gas
    sel = _window_mask(snap.grid, window)
    m, m_x, m_xx = snap.m, snap.m_x, snap.m_xx
    curv = gt.entropy_curvature(gas, m, m_x, m_xx)
    S_x, S_xx = entropy_derivatives(snap)
    b = S_xx - S_x**2 / (gas.c_v * (3.0 * gas.gamma - 1.0))
    # |S'|/(2 c_v) == |m'|/m
    dens = np.abs(m_x) / m
    xs = snap.x[sel]
    V = float(np.trapezoid(dens[sel], xs)) if xs.size > 1 else 0.0
    if window is None and snap.grid.periodic:
        V += 0.5 * snap.grid.dx * (dens[0] + dens[-1])  # closing periodic cell
    return EntropyDiagnostics(
        b=b,
        M3=float(np.abs(curv[sel]).max()),
        V=V,
        M_L=float(m[sel].min()),
        M_U=float(m[sel].max()),
        M_s=float(np.abs(snap.s[sel]).max()),
        M_r=float(np.abs(snap.r[sel]).max()),
        window=(float(xs[0]), float(xs[-1])),
    )


def entropy_derivatives(snap: FieldSnapshot):
    """``(S_x, S_xx)`` consistent with the snapshot's ``m_x`` and ``m_xx``."""
    two_cv = 2.0 * snap.gas.c_v
    g = snap.m_x / snap.m
    return two_cv * g, two_cv * (snap.m_xx / snap.m - g**2)

