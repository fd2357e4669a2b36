"""Polytropic gas thermodynamics in Lagrangian variables.

Everything here works for both the isentropic p-system (entropy absent,
``m == 1``) and the full Euler system, where the entropy enters only through
``m = exp(S / (2 c_v))``.  Functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate


class AdmissibilityError(ValueError):
    """A pressure law or state violates the hyperbolicity requirements."""


@dataclass(frozen=True)
class GasModel:
    """gamma-law gas ``p = K exp(S/c_v) tau**(-gamma)``."""

    gamma: float
    K: float = 1.0
    c_v: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.K > 0.0:
            raise ValueError(f"K must be positive, got {self.K}")
        if not self.c_v > 0.0:
            raise ValueError(f"c_v must be positive, got {self.c_v}")
        # K_tau ~ (2/(gamma-1))**(2/(gamma-1)) leaves double range as gamma -> 1
        g = self.gamma
        log_Kt = 2.0 / (g - 1.0) * math.log(2.0 * math.sqrt(self.K * g) / (g - 1.0))
        logs = (log_Kt, 0.5 * math.log(self.K * g) - 0.5 * (g + 1.0) * log_Kt, math.log(self.K) - g * log_Kt)
        if max(abs(v) for v in logs) > 700.0:
            raise ValueError(f"gamma={g}, K={self.K}: derived constants overflow double precision")

    @property
    def eta_scale(self) -> float:
        """``2 sqrt(K gamma) / (gamma - 1)``, the prefactor of eta(tau)."""
        return 2.0 * math.sqrt(self.K * self.gamma) / (self.gamma - 1.0)

    @functools.cached_property
    def constants(self) -> "ThermoConstants":
        return derive_constants(self)


@dataclass(frozen=True)
class ThermoConstants:
    K_tau: float
    K_p: float
    K_c: float


def derive_constants(gas: GasModel) -> ThermoConstants:
    g = gas.gamma
    K_tau = gas.eta_scale ** (2.0 / (g - 1.0))
    K_p = gas.K * K_tau ** (-g)
    K_c = math.sqrt(gas.K * g) * K_tau ** (-(g + 1.0) / 2.0)
    return ThermoConstants(K_tau=K_tau, K_p=K_p, K_c=K_c)


def _check_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(arr > 0.0):
        raise ValueError(f"{name} must be positive everywhere")
    return arr


def m_from_entropy(gas: GasModel, S):
    """``m = exp(S / (2 c_v))``; returns 1 when ``S`` is None."""
    if S is None:
        return 1.0
    return np.exp(np.asarray(S, dtype=float) / (2.0 * gas.c_v))


def sound_speed(gas: GasModel, tau, S=None):
    """Lagrangian sound speed ``sqrt(-p_tau)``."""
    tau = _check_positive("tau", tau)
    c = math.sqrt(gas.K * gas.gamma) * tau ** (-(gas.gamma + 1.0) / 2.0)
    return c * m_from_entropy(gas, S)


def pressure(gas: GasModel, tau, S=None):
    tau = _check_positive("tau", tau)
    p = gas.K * tau ** (-gas.gamma)
    if S is None:
        return p
    return p * np.exp(np.asarray(S, dtype=float) / gas.c_v)


def eta_from_tau(gas: GasModel, tau):
    tau = _check_positive("tau", tau)
    return gas.eta_scale * tau ** (-(gas.gamma - 1.0) / 2.0)


def tau_from_eta(gas: GasModel, eta):
    eta = _check_positive("eta", eta)
    return (eta / gas.eta_scale) ** (-2.0 / (gas.gamma - 1.0))


def sound_speed_eta(gas: GasModel, eta, m=1.0):
    """``c = K_c m eta**((gamma+1)/(gamma-1))``."""
    g = gas.gamma
    return gas.constants.K_c * m * np.asarray(eta, dtype=float) ** ((g + 1.0) / (g - 1.0))


def riemann_from_primitive(gas: GasModel, tau, u, S=None):
    """Return ``(r, s, m)`` with ``r = u - m eta`` and ``s = u + m eta``."""
    eta = eta_from_tau(gas, tau)
    m = m_from_entropy(gas, S)
    u = np.asarray(u, dtype=float)
    return u - m * eta, u + m * eta, m


def primitive_from_riemann(gas: GasModel, r, s, m=1.0):
    """Invert :func:`riemann_from_primitive`; returns ``(tau, u)``."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if not np.all(s > r):
        raise ValueError("s <= r: state at or beyond vacuum")
    eta = (s - r) / (2.0 * np.asarray(m, dtype=float))
    return tau_from_eta(gas, eta), 0.5 * (s + r)


def _exponents(g):
    return {
        "w_m": -3.0 * (3.0 - g) / (2.0 * (3.0 * g - 1.0)),
        "w_eta": (g + 1.0) / (2.0 * (g - 1.0)),
        "shift": 2.0 / (3.0 * g - 1.0),
    }


def gradient_weight(gas: GasModel, eta, m=1.0):
    """The factor multiplying ``s_x - ...`` in the gradient variables."""
    e = _exponents(gas.gamma)
    return np.asarray(m, dtype=float) ** e["w_m"] * np.asarray(eta, dtype=float) ** e["w_eta"]


def gradient_vars(gas: GasModel, eta, m, m_x, s_x, r_x):
    """Weighted Riemann-variable gradients ``(y, q)``.

    With ``m == 1`` and ``m_x == 0`` this is ``eta**((g+1)/(2(g-1))) * s_x``.
    """
    e = _exponents(gas.gamma)
    eta = np.asarray(eta, dtype=float)
    w = gradient_weight(gas, eta, m)
    corr = e["shift"] * np.asarray(m_x, dtype=float) * eta
    return w * (np.asarray(s_x, dtype=float) - corr), w * (np.asarray(r_x, dtype=float) + corr)


def entropy_curvature(gas: GasModel, m, m_x, m_xx):
    """``m m_xx - (3g+1)/(3g-1) m_x**2``, the sign-carrier of a0."""
    g = gas.gamma
    return m * m_xx - (3.0 * g + 1.0) / (3.0 * g - 1.0) * m_x**2


def riccati_coeffs(gas: GasModel, eta, m=1.0, m_x=0.0, m_xx=0.0):
    """Coefficients ``(a0, a2)`` of ``w' = a0 - a2 w**2`` along characteristics."""
    g = gas.gamma
    K_c = gas.constants.K_c
    eta = np.asarray(eta, dtype=float)
    m = np.asarray(m, dtype=float)
    m_x = np.asarray(m_x, dtype=float)
    m_xx = np.asarray(m_xx, dtype=float)
    p = 3.0 * (3.0 - g) / (2.0 * (3.0 * g - 1.0))
    bracket = (g - 1.0) / (3.0 * g - 1.0) * m * m_xx - (3.0 * g + 1.0) * (g - 1.0) / (
        3.0 * g - 1.0
    ) ** 2 * m_x**2
    a0 = K_c / g * bracket * m ** (-p) * eta ** (3.0 * (g + 1.0) / (2.0 * (g - 1.0)) + 1.0)
    a2 = K_c * (g + 1.0) / (2.0 * (g - 1.0)) * m**p * eta ** ((3.0 - g) / (2.0 * (g - 1.0)))
    return a0, a2


def a0_over_a2(gas: GasModel, eta, m, m_x, m_xx):
    """Closed form of the ratio ``a0 / a2`` (independent of K_c)."""
    g = gas.gamma
    coef = 2.0 * (g - 1.0) ** 2 / (g * (g + 1.0) * (3.0 * g - 1.0))
    return (
        coef
        * entropy_curvature(gas, m, m_x, m_xx)
        * np.asarray(eta, dtype=float) ** ((3.0 * g - 1.0) / (g - 1.0))
        * np.asarray(m, dtype=float) ** (-3.0 * (3.0 - g) / (3.0 * g - 1.0))
    )


def critical_theta(gamma: float) -> float:
    """Exponent for which ``(m**theta)_xx == 0`` saturates ``y**2 = a0/a2``."""
    return 1.0 - (6.0 * gamma**2 + 3.0 * gamma + 1.0) / (2.0 * gamma * (3.0 * gamma - 1.0))


# --- general pressure laws -------------------------------------------------


@dataclass(frozen=True)
class GeneralPressureLaw:
    """``p(tau)`` with its first three derivatives, audited on [tau_lo, tau_hi]."""

    p: Callable[[float], float]
    dp: Callable[[float], float]
    d2p: Callable[[float], float]
    d3p: Callable[[float], float]
    tau_lo: float = 1e-3
    tau_hi: float = 1e3
    name: str = "custom"


def power_law(K: float, gamma: float, **window) -> GeneralPressureLaw:
    """``p = K tau**(-gamma)``."""
    g = gamma
    return GeneralPressureLaw(
        p=lambda t: K * t ** (-g),
        dp=lambda t: -g * K * t ** (-g - 1.0),
        d2p=lambda t: g * (g + 1.0) * K * t ** (-g - 2.0),
        d3p=lambda t: -g * (g + 1.0) * (g + 2.0) * K * t ** (-g - 3.0),
        name=f"{K:g}*tau^-{g:g}",
        **window,
    )


def power_sum(terms, **window) -> GeneralPressureLaw:
    """Sum of power laws, ``terms = [(K1, g1), (K2, g2), ...]``."""
    laws = [power_law(K, g) for K, g in terms]
    return GeneralPressureLaw(
        p=lambda t: sum(law.p(t) for law in laws),
        dp=lambda t: sum(law.dp(t) for law in laws),
        d2p=lambda t: sum(law.d2p(t) for law in laws),
        d3p=lambda t: sum(law.d3p(t) for law in laws),
        name=" + ".join(law.name for law in laws),
        **window,
    )


def _neg_dp(law: GeneralPressureLaw, tau: float) -> float:
    d = law.dp(tau)
    if not d < 0.0:
        raise AdmissibilityError(f"p_tau = {d!r} is not negative at tau = {tau!r}")
    return -d


def gp_sound_speed(law: GeneralPressureLaw, tau):
    if np.ndim(tau):
        return np.array([math.sqrt(_neg_dp(law, float(t))) for t in np.ravel(tau)]).reshape(
            np.shape(tau)
        )
    return math.sqrt(_neg_dp(law, float(tau)))


def gp_eta(law: GeneralPressureLaw, tau: float, tau_ref: float = 1.0) -> float:
    """``int_tau^tau_ref sqrt(-p_tau) dtau`` by adaptive quadrature."""
    if not (tau > 0.0 and tau_ref > 0.0):
        raise ValueError("tau and tau_ref must be positive")
    if tau == tau_ref:
        return 0.0
    val, _ = integrate.quad(
        lambda t: math.sqrt(_neg_dp(law, t)), tau, tau_ref, epsrel=1e-10, epsabs=0.0, limit=200
    )
    return val


def gp_a(law: GeneralPressureLaw, tau: float) -> float:
    """Riccati coefficient ``p_tt / (4 (-p_t)**(5/4))`` for a general law."""
    c2 = _neg_dp(law, tau)
    d2 = law.d2p(tau)
    if not d2 > 0.0:
        raise AdmissibilityError(f"p_tautau = {d2!r} is not positive at tau = {tau!r}")
    return d2 / (4.0 * c2**1.25)


@dataclass
class PressureAudit:
    monotone_ok: bool
    convex_ok: bool
    integral_small_tau_divergent: bool
    small_tau_partials: list
    small_tau_slope: float
    integral_large_tau_finite: bool
    large_tau_partials: list
    large_tau_slope: float
    A_min: float | None
    A_cap: float
    bad_samples: list = field(default_factory=list)
    n_samples: int = 0

    def as_dict(self):
        return {
            "monotone_ok": self.monotone_ok,
            "convex_ok": self.convex_ok,
            "integral_small_tau_divergent": self.integral_small_tau_divergent,
            "small_tau_slope": self.small_tau_slope,
            "integral_large_tau_finite": self.integral_large_tau_finite,
            "large_tau_slope": self.large_tau_slope,
            "A_min": "none" if self.A_min is None else self.A_min,
            "A_cap": self.A_cap,
            "n_samples": self.n_samples,
            "n_bad_samples": len(self.bad_samples),
        }


def _partials(law, limits, fixed, lower):
    """Integrals of sqrt(-p_tau) between ``fixed`` and each entry of ``limits``."""
    out = []
    for lim in limits:
        a, b = (lim, fixed) if lower else (fixed, lim)
        # split at decades so quad sees a well-scaled integrand
        edges = np.geomspace(a, b, int(abs(math.log10(b / a))) + 2)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, _ = integrate.quad(
                lambda t: math.sqrt(_neg_dp(law, t)), lo, hi, epsrel=1e-10, epsabs=0.0, limit=200
            )
            total += v
        out.append(total)
    return out


def _increment_slope(partials, limits):
    """Slope of log(increment) against log(limit) for successive partial integrals."""
    inc = np.diff(partials)
    x = np.log10(np.asarray(limits[1:], dtype=float))
    with np.errstate(divide="ignore"):
        y = np.log10(np.abs(inc))
    ok = np.isfinite(y)
    if ok.sum() < 2:
        return -np.inf if np.all(inc == 0) else 0.0
    return float(np.polyfit(x[ok], y[ok], 1)[0])


def gp_audit(
    law: GeneralPressureLaw,
    n_samples: int = 4096,
    A_cap: float = 1e6,
    slope_tol: float = 0.05,
) -> PressureAudit:
    """Audit a pressure law for monotonicity, convexity, integrability and the A-condition."""
    taus = np.geomspace(law.tau_lo, law.tau_hi, n_samples)
    bad = []
    mono = conv = True
    A_pts = []
    for t in taus:
        try:
            d1, d2, d3 = float(law.dp(t)), float(law.d2p(t)), float(law.d3p(t))
        except (ArithmeticError, ValueError) as exc:
            bad.append((float(t), repr(exc)))
            continue
        if not all(map(math.isfinite, (d1, d2, d3))):
            bad.append((float(t), "non-finite derivative"))
            continue
        mono &= d1 < 0.0
        conv &= d2 > 0.0
        if d2 > 0.0:
            A_pts.append(max(0.0, 4.0 * d1 * d3 / d2**2 - 5.0))

    small_lims = [10.0**-k for k in range(2, 9)]
    large_lims = [10.0**k for k in range(2, 9)]
    if mono:
        small = _partials(law, small_lims, 1.0, lower=True)
        large = _partials(law, large_lims, 1.0, lower=False)
        # increments of a convergent tail shrink geometrically towards the singular end
        s_slope = _increment_slope(small, small_lims)
        l_slope = _increment_slope(large, large_lims)
        small_div = s_slope < slope_tol
        large_fin = l_slope < -slope_tol
    else:
        small, large = [], []
        s_slope = l_slope = float("nan")
        small_div = large_fin = False

    A_min = max(A_pts) if A_pts else None
    if A_min is not None and A_min > A_cap:
        A_min = None
    return PressureAudit(
        monotone_ok=bool(mono),
        convex_ok=bool(conv),
        integral_small_tau_divergent=bool(small_div),
        small_tau_partials=small,
        small_tau_slope=s_slope,
        integral_large_tau_finite=bool(large_fin),
        large_tau_partials=large,
        large_tau_slope=l_slope,
        A_min=A_min,
        A_cap=A_cap,
        bad_samples=bad,
        n_samples=n_samples,
    )
