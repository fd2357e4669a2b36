"""Analytic bounds, critical thresholds and blowup-time certificates.

Every ``a2`` lower envelope used here has the form ``K10 / (1 + K9 t)``
(``K9 = 0`` gives a constant floor), so the envelope integral and the
certificate time ``T_ub`` have closed forms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import integrate, optimize

from . import gas as gt
from .fields import (
    EntropyDiagnostics,
    FieldSnapshot,
    entropy_diagnostics,
    gradient_budget,
    _window_mask,
)

ISENTROPIC = "isentropic"
GLOBAL = "global"
LOCAL = "local"
MODES = (ISENTROPIC, GLOBAL, LOCAL)

CERTIFIED = "certified-blowup"
NOT_MET = "threshold-not-met"
VIOLATED = "bound-violated"


class NotApplicable(ValueError):
    """The requested bound has no proven form for these parameters."""


def _p_exp(g):
    """Exponent of ``m`` in ``a2`` (and minus that in the gradient weight)."""
    return 3.0 * (3.0 - g) / (2.0 * (3.0 * g - 1.0))


def _ratio_coef(g):
    return 2.0 * (g - 1.0) ** 2 / (g * (g + 1.0) * (3.0 * g - 1.0))


# --- density upper bounds --------------------------------------------------------------


@dataclass(frozen=True)
class DensityBoundParams:
    """``tau(x, t) <= [tau0(x)**k + coef * Ysum * t]**(1/k)`` with ``k = (3-gamma)/4``."""

    mode: str
    coef: float
    Ysum: float
    tau0: np.ndarray
    gamma: float

    def __post_init__(self):
        if not 1.0 < self.gamma < 3.0:
            raise NotApplicable(
                f"density upper bound needs 1 < gamma < 3 (gamma={self.gamma}); "
                "no proven constant exists for gamma >= 3"
            )


def K0_constant(gas: gt.GasModel) -> float:
    g = gas.gamma
    return (3.0 - g) / 8.0 * (gas.K * g) ** -0.25 * math.sqrt(gas.constants.K_c)


def K6_constant(gas: gt.GasModel, M_U: float) -> float:
    g = gas.gamma
    return (3.0 - g) / 4.0 * M_U ** _p_exp(g) * gas.eta_scale ** (-(g + 1.0) / (2.0 * (g - 1.0)))


def density_params(gas: gt.GasModel, snap: FieldSnapshot, N: float = 0.0, diag=None, window=None):
    """Density-bound parameters for ``snap`` (isentropic K0, otherwise K6 with ``N``)."""
    if not 1.0 < gas.gamma < 3.0:
        raise NotApplicable(f"density upper bound needs 1 < gamma < 3 (gamma={gas.gamma})")
    budget = gradient_budget(snap, N, window)
    if snap.isentropic:
        return DensityBoundParams("isentropic-K0", K0_constant(gas), budget.Y + budget.Q, snap.tau, gas.gamma)
    if diag is None:
        diag = entropy_diagnostics(snap, window)
    return DensityBoundParams(
        "full-K6", K6_constant(gas, diag.M_U), budget.Ybar + budget.Qbar, snap.tau, gas.gamma
    )


def density_upper_bound(params: DensityBoundParams, x=None, t: float = 0.0):
    """Bound on ``tau`` at grid index/indices ``x`` (default: all nodes) and time ``t``."""
    k = (3.0 - params.gamma) / 4.0
    tau0 = params.tau0 if x is None else params.tau0[x]
    base = tau0**k + params.coef * params.Ysum * t
    return np.maximum(base, 0.0) ** (1.0 / k)


# --- a2 envelopes and the certificate time -------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    """Lower bound ``a2 >= K10 / (1 + K9 t)`` along every characteristic."""

    K10: float
    K9: float = 0.0

    def __call__(self, t):
        return self.K10 / (1.0 + self.K9 * np.asarray(t, dtype=float))

    def integral(self, T: float) -> float:
        if self.K9 == 0.0:
            return self.K10 * T
        return self.K10 / self.K9 * math.log1p(self.K9 * T)


def _isentropic_eta_max(snap):
    return 0.5 * (float(snap.s.max()) - float(snap.r.min()))


def a2_lower_envelope(gas: gt.GasModel, mode: str, *, Ysum=0.0, tau_ref=1.0, M_L=1.0, M_U=1.0,
                      eta_max=None, density_coef=None) -> Envelope:
    """Envelope for the given mode.

    For ``1 < gamma < 3`` the density bound with reference volume ``tau_ref``
    (an upper bound of ``tau0`` on the relevant set) and slope
    ``density_coef * Ysum`` gives ``K10 / (1 + K9 t)``.  For ``gamma >= 3``
    ``eta_max`` (an upper bound on ``eta``) gives a constant floor.
    """
    g = gas.gamma
    K_c = gas.constants.K_c
    lead = K_c * (g + 1.0) / (2.0 * (g - 1.0))
    k = (3.0 - g) / 4.0
    if mode == ISENTROPIC:
        m_fac = 1.0
        coef = K0_constant(gas) if density_coef is None else density_coef
    else:
        p = _p_exp(g)
        # m**p is bounded below by M_L**p when p >= 0, by M_U**p otherwise
        m_fac = M_L**p if p >= 0.0 else M_U**p
        coef = density_coef
    if g < 3.0:
        if coef is None:
            coef = K6_constant(gas, M_U)
        K7 = lead * m_fac * gas.eta_scale ** ((3.0 - g) / (2.0 * (g - 1.0)))
        scale = tau_ref ** (-k)
        return Envelope(K10=K7 * scale, K9=coef * Ysum * scale)
    if eta_max is None:
        raise ValueError("gamma >= 3 envelope needs an upper bound on eta")
    return Envelope(K10=lead * m_fac * eta_max ** ((3.0 - g) / (2.0 * (g - 1.0))), K9=0.0)


def margin_factor(margin: float | None) -> float:
    """``eps (2 + eps) / (1 + eps)**2``; ``None`` means no margin needed (factor 1)."""
    if margin is None:
        return 1.0
    return margin * (2.0 + margin) / (1.0 + margin) ** 2


def blowup_time_upper(w0: float, envelope, factor: float = 1.0, rtol: float = 1e-10) -> float:
    """Smallest ``T`` with ``factor * int_0^T envelope = -1/w0``.

    ``envelope`` is an :class:`Envelope` (closed form) or any positive
    callable of ``t`` (bracketing plus root finding to ``rtol``).
    """
    if not w0 < 0.0:
        raise ValueError("blowup time needs w0 < 0")
    if not factor > 0.0:
        raise ValueError("margin factor must be positive")
    target = -1.0 / (w0 * factor)
    if isinstance(envelope, Envelope):
        if envelope.K9 == 0.0:
            return target / envelope.K10
        try:
            return math.expm1(target * envelope.K9 / envelope.K10) / envelope.K9
        except OverflowError:
            return math.inf

    def F(T):
        return integrate.quad(envelope, 0.0, T, epsrel=1e-12, limit=200)[0] - target

    hi = 1.0
    while F(hi) < 0.0:
        hi *= 2.0
        if hi > 1e300:
            return math.inf
    return optimize.brentq(F, 0.0, hi, rtol=rtol, xtol=1e-300)


# --- Prop-3.3 type L-infinity bounds and thresholds --------------------------------


@dataclass(frozen=True)
class LinftyBounds:
    N1: float
    N2: float
    E_U: float
    s_max: float
    r_max: float
    u_max: float


def linfty_bounds(gas: gt.GasModel, M_s, M_r, V, M_L=1.0, M_U=1.0) -> LinftyBounds:
    g = gas.gamma
    Vb = V / (2.0 * g)
    ex = math.exp(Vb * Vb) if Vb * Vb < 700.0 else math.inf
    N1 = M_s + Vb * M_r + Vb * (Vb * M_s + Vb * Vb * M_r) * ex
    N2 = M_r + Vb * M_s + Vb * (Vb * M_r + Vb * Vb * M_s) * ex
    half = 0.5 * (N1 + N2)
    up = M_U ** (1.0 / (2.0 * g))
    return LinftyBounds(N1, N2, half * M_L ** (1.0 / (2.0 * g) - 1.0), N1 * up, N2 * up, half * up)


def global_threshold_N(gas: gt.GasModel, diag: EntropyDiagnostics, E_U: float) -> float:
    """Critical compression strength: ``sqrt(a0/a2)`` bounded over the admissible set."""
    g = gas.gamma
    m_ref = diag.M_L if g < 3.0 else diag.M_U
    return (
        math.sqrt(_ratio_coef(g) * diag.M3)
        * E_U ** ((3.0 * g - 1.0) / (2.0 * (g - 1.0)))
        * m_ref ** (-_p_exp(g))
    )


def sharp_threshold(snap: FieldSnapshot, window=None) -> float:
    """``max sqrt(a0/a2)`` over the nodes at the snapshot time (0 where negative)."""
    sel = _window_mask(snap.grid, window)
    ratio = gt.a0_over_a2(snap.gas, snap.eta, snap.m, snap.m_x, snap.m_xx)
    return float(np.sqrt(np.maximum(np.asarray(ratio)[sel], 0.0)).max())


# --- local domain of determination -------------------------------------------------------


@dataclass(frozen=True)
class DomainOfDetermination:
    alpha: float
    beta: float
    V_ab: float
    N1_ab: float
    N2_ab: float
    Etilde_U: float
    T_ab_lower: float
    N_ab: float
    K7: float
    K8: float
    K9: float
    K10: float
    B_ab: float
    note: str = ""

    def feasibility_rhs(self, gamma: float) -> float:
        """Right side of the margin condition ``B(2+B)/(1+B) >= rhs``."""
        if self.N_ab == 0.0:
            return math.inf
        if gamma >= 3.0:
            return 1.0 / (self.K8 * self.N_ab * self.T_ab_lower)
        return 1.0 / (self.N_ab * self.envelope.integral(self.T_ab_lower))

    def feasible(self, B: float, gamma: float) -> bool:
        return B * (2.0 + B) / (1.0 + B) >= self.feasibility_rhs(gamma) * (1.0 - 1e-14)

    @property
    def envelope(self) -> Envelope:
        # K10 == K8 and K9 == 0 when gamma >= 3
        return Envelope(self.K10, self.K9)


def local_domain(gas: gt.GasModel, snap: FieldSnapshot, alpha: float, beta: float) -> DomainOfDetermination:
    """Constants of the domain of determination over ``[alpha, beta]``."""
    grid = snap.grid
    if not alpha < beta:
        raise ValueError("need alpha < beta")
    if beta - alpha < 4.0 * grid.dx:
        raise ValueError(f"window [{alpha}, {beta}] spans fewer than 4 cells")
    lo, hi = grid.x_min, grid.x_max
    if alpha < lo - 1e-12 or beta > hi + 1e-12:
        raise ValueError(f"window [{alpha}, {beta}] leaves the grid [{lo}, {hi}]")
    g = gas.gamma
    diag = entropy_diagnostics(snap, (alpha, beta))
    lb = linfty_bounds(gas, diag.M_s, diag.M_r, diag.V, diag.M_L, diag.M_U)
    E = lb.E_U
    # crossing-time bound; the 1/K_c speed factor is kept whenever K_c > 1
    T_ab = 0.5 * (beta - alpha) / diag.M_U * E ** (-(g + 1.0) / (g - 1.0)) * min(1.0, 1.0 / gas.constants.K_c)
    N_ab = global_threshold_N(gas, diag, E)
    sel = _window_mask(grid, (alpha, beta))
    Yt = max(N_ab, float(snap.y[sel].max()))
    Qt = max(N_ab, float(snap.q[sel].max()))
    K_c = gas.constants.K_c
    p = _p_exp(g)
    lead = K_c * (g + 1.0) / (2.0 * (g - 1.0))
    m_fac = diag.M_L**p if p >= 0.0 else diag.M_U**p
    K7 = lead * m_fac * gas.eta_scale ** ((3.0 - g) / (2.0 * (g - 1.0)))
    K8 = lead * m_fac * E ** ((3.0 - g) / (2.0 * (g - 1.0)))
    if g < 3.0:
        tau_ref = float(snap.tau[sel].max())
        k = (3.0 - g) / 4.0
        K9 = K6_constant(gas, diag.M_U) * (Yt + Qt) * tau_ref ** (-k)
        K10 = K7 * tau_ref ** (-k)
    else:
        K9 = 0.0
        K10 = K8
    note = ""
    if N_ab == 0.0:
        B = math.inf
        note = "isentropic window: use the isentropic certificate"
    else:
        B = 1.0 / (N_ab * Envelope(K10, K9).integral(T_ab))
    return DomainOfDetermination(
        alpha=float(alpha), beta=float(beta), V_ab=diag.V, N1_ab=lb.N1, N2_ab=lb.N2,
        Etilde_U=E, T_ab_lower=T_ab, N_ab=N_ab, K7=K7, K8=K8, K9=K9, K10=K10, B_ab=B, note=note,
    )


# --- certificates ------------------------------------------------------------------------------


@dataclass
class BlowupCertificate:
    mode: str
    w0: float
    x0: float
    family: str
    threshold_used: float
    margin: float | None
    T_ub: float
    verdict: str
    sharp_threshold: float = 0.0
    N: float = 0.0
    envelope_K10: float = 0.0
    envelope_K9: float = 0.0
    window: tuple | None = None
    numeric_bracket: tuple | None = None
    note: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        lo, hi = self.numeric_bracket or (math.nan, math.nan)
        d["bracket_lo"], d["bracket_hi"] = lo, hi
        d.pop("numeric_bracket")
        if self.window is not None:
            d["alpha"], d["beta"] = self.window
        d.pop("window")
        return d


def _most_negative(snap, window=None):
    sel = np.flatnonzero(_window_mask(snap.grid, window))
    iy = sel[np.argmin(snap.y[sel])]
    iq = sel[np.argmin(snap.q[sel])]
    if snap.y[iy] <= snap.q[iq]:
        return float(snap.y[iy]), float(snap.x[iy]), "plus"
    return float(snap.q[iq]), float(snap.x[iq]), "minus"


def certify(gas: gt.GasModel, snap: FieldSnapshot, mode: str | None = None, window=None) -> BlowupCertificate:
    """Check the blowup hypothesis for ``snap`` and bound the blowup time.

    Modes: ``isentropic`` (threshold 0), ``global`` (entropy of finite total
    variation, threshold ``N``, margin ``eps = -w0/N - 1``) and ``local``
    (window ``[alpha, beta]``, threshold ``N_ab (1 + B_ab)``).  A hypothesis
    met only so weakly that ``T_ub`` overflows (roundoff-level compression)
    is reported as not met.
    """
    cert = _certify(gas, snap, mode, window)
    if cert.verdict == CERTIFIED and not math.isfinite(cert.T_ub):
        cert = replace(cert, verdict=NOT_MET, note="T_ub overflows: compression at roundoff level")
    return cert


def _certify(gas, snap, mode, window):
    if mode is None:
        mode = ISENTROPIC if snap.isentropic else (LOCAL if window is not None else GLOBAL)
    if mode not in MODES:
        raise ValueError(f"unknown certificate mode {mode!r}")
    g = gas.gamma
    if mode == ISENTROPIC:
        if not snap.isentropic:
            raise ValueError("isentropic certificate on data with entropy")
        w0, x0, fam = _most_negative(snap)
        budget = gradient_budget(snap)
        env = a2_lower_envelope(
            gas, ISENTROPIC, Ysum=budget.Y + budget.Q, tau_ref=float(snap.tau.max()),
            eta_max=_isentropic_eta_max(snap),
        )
        if w0 < 0.0:
            return BlowupCertificate(mode, w0, x0, fam, 0.0, None, blowup_time_upper(w0, env), CERTIFIED,
                                     envelope_K10=env.K10, envelope_K9=env.K9)
        return BlowupCertificate(mode, w0, x0, fam, 0.0, None, math.inf, NOT_MET,
                                 envelope_K10=env.K10, envelope_K9=env.K9,
                                 note="no compression: global classical solution")
    sharp = sharp_threshold(snap, window if mode == LOCAL else None)
    if mode == GLOBAL:
        diag = entropy_diagnostics(snap)
        lb = linfty_bounds(gas, diag.M_s, diag.M_r, diag.V, diag.M_L, diag.M_U)
        N = global_threshold_N(gas, diag, lb.E_U)
        w0, x0, fam = _most_negative(snap)
        budget = gradient_budget(snap, N)
        env = a2_lower_envelope(
            gas, GLOBAL, Ysum=budget.Ybar + budget.Qbar, tau_ref=float(snap.tau.max()),
            M_L=diag.M_L, M_U=diag.M_U, eta_max=lb.E_U,
        )
        kw = dict(sharp_threshold=sharp, N=N, envelope_K10=env.K10, envelope_K9=env.K9)
        if N > 0.0 and w0 < -N:
            eps = -w0 / N - 1.0
            T = blowup_time_upper(w0, env, margin_factor(eps))
            return BlowupCertificate(mode, w0, x0, fam, N, eps, T, CERTIFIED, **kw)
        if N == 0.0 and w0 < 0.0:
            T = blowup_time_upper(w0, env)
            return BlowupCertificate(mode, w0, x0, fam, 0.0, None, T, CERTIFIED, note="constant entropy", **kw)
        return BlowupCertificate(mode, w0, x0, fam, N, None, math.inf, NOT_MET, **kw)
    if window is None:
        raise ValueError("local certificate needs a window (alpha, beta)")
    dom = local_domain(gas, snap, *window)
    w0, x0, fam = _most_negative(snap, window)
    kw = dict(sharp_threshold=sharp, N=dom.N_ab, envelope_K10=dom.K10, envelope_K9=dom.K9,
              window=(dom.alpha, dom.beta), note=dom.note)
    if dom.N_ab == 0.0:
        return BlowupCertificate(mode, w0, x0, fam, 0.0, None, math.inf, NOT_MET, **kw)
    thr = dom.N_ab * (1.0 + dom.B_ab)
    if w0 < -thr:
        env = Envelope(dom.K10, dom.K9)
        T = blowup_time_upper(w0, env, margin_factor(dom.B_ab))
        return BlowupCertificate(mode, w0, x0, fam, thr, dom.B_ab, T, CERTIFIED, **kw)
    return BlowupCertificate(mode, w0, x0, fam, thr, dom.B_ab, math.inf, NOT_MET, **kw)


def reconcile(cert: BlowupCertificate, result, rel_tol: float = 0.02) -> BlowupCertificate:
    """Attach a run's outcome to ``cert`` and update the verdict.

    A certified blowup is violated when the numeric bracket ends later than
    ``T_ub`` plus the bracket width plus ``rel_tol * T_ub``.  A run that
    passes ``T_ub`` without detecting blowup has no bracket to compare (the
    grid cannot resolve the catastrophe); it keeps the verdict with a note.
    """
    from .evolution import BLOWUP

    out = BlowupCertificate(**{**cert.__dict__})
    if result.termination == BLOWUP:
        out.numeric_bracket = tuple(result.bracket)
    if cert.verdict != CERTIFIED:
        return out
    if out.numeric_bracket is not None:
        lo, hi = out.numeric_bracket
        if hi > cert.T_ub + (hi - lo) + rel_tol * cert.T_ub:
            out.verdict = VIOLATED
    elif result.final.t > cert.T_ub * (1.0 + rel_tol):
        out.note = (out.note + "; " if out.note else "") + "run passed T_ub without detecting blowup (under-resolved)"
    return out


# --- run verification ----------------------------------------------------------------------------


class DensityMonitor:
    """Observer recording the worst relative margin of the density bound per step."""

    def __init__(self, params: DensityBoundParams):
        self.params = params
        self.t = []
        self.margin = []
        self.where = []

    def __call__(self, snap: FieldSnapshot):
        b = density_upper_bound(self.params, None, snap.t)
        rel = (b - snap.tau) / b
        i = int(np.argmin(rel))
        self.t.append(snap.t)
        self.margin.append(float(rel[i]))
        self.where.append(float(snap.x[i]))

    @property
    def worst(self):
        i = int(np.argmin(self.margin))
        return self.margin[i], self.t[i], self.where[i]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_margin: float
    t: float = math.nan
    x: float = math.nan


@dataclass
class MonitorReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        d = {"passed": self.passed}
        for c in self.checks:
            d[f"{c.name}.passed"] = c.passed
            d[f"{c.name}.worst_margin"] = c.worst_margin
            d[f"{c.name}.t"] = c.t
        return d


def verify_run(result, N: float = 0.0, density: DensityMonitor | None = None, tol: float = 1e-6,
               linfty: LinftyBounds | None = None) -> MonitorReport:
    """Check a finished run against the comparison, density and L-infinity bounds.

    ``tol`` is the absolute allowance for scheme error on the comparison
    bounds; the density check uses ``tol`` relative to the bound.
    """
    mon = result.monitors
    budget = gradient_budget(result.initial, N)
    t = mon["t"]
    rep = MonitorReport()

    def add(name, values, limit):
        marg = limit - values
        i = int(np.argmin(marg))
        rep.checks.append(CheckResult(name, bool(marg[i] >= -tol), float(marg[i]), float(t[i])))

    add("y_upper", mon["max_y"], budget.Ybar)
    add("q_upper", mon["max_q"], budget.Qbar)
    if density is not None:
        m, tt, xx = density.worst
        rep.checks.append(CheckResult("density", m >= -tol, m, tt, xx))
    if linfty is not None:
        add("s_linfty", mon["max_abs_s"], linfty.s_max)
        add("r_linfty", mon["max_abs_r"], linfty.r_max)
        add("u_linfty", mon["max_abs_u"], linfty.u_max)
        add("eta_upper", mon["max_eta"], linfty.E_U)
    S0 = result.initial.S
    frozen = all(
        (s.S is None and S0 is None) or (s.S is not None and S0 is not None and np.array_equal(s.S, S0))
        for s in result.snapshots
    )
    rep.checks.append(CheckResult("entropy_frozen", frozen, 0.0 if frozen else -1.0))
    return rep


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    r2: float


def linear_growth_fit(t, values, tail: float = 0.5) -> GrowthFit:
    """Least-squares line through the last ``tail`` fraction of ``(t, values)``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    sel = t >= t[0] + (1.0 - tail) * (t[-1] - t[0])
    slope, icpt = np.polyfit(t[sel], v[sel], 1)
    resid = v[sel] - (slope * t[sel] + icpt)
    ss = float(np.sum((v[sel] - v[sel].mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return GrowthFit(float(slope), float(icpt), r2)
