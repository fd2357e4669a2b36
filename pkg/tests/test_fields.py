import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eulerlab import fields as fl
from eulerlab import gas as gt

from conftest import TWO_PI, sine_snapshot


def test_grid_validation():
    with pytest.raises(ValueError):
        fl.Grid1D(1.0, 0.0, 32)
    with pytest.raises(ValueError):
        fl.Grid1D(0.0, 1.0, 8)
    with pytest.raises(ValueError):
        fl.Grid1D(0.0, 1.0, 32, "reflecting")


def test_grid_nodes():
    g = fl.Grid1D(0.0, 1.0, 16)
    assert g.n_nodes == 16 and g.dx == 1 / 16
    g = fl.Grid1D(0.0, 1.0, 16, fl.CONSTANT)
    assert g.n_nodes == 17 and g.x[-1] == 1.0


def test_derivative_constant_is_zero():
    g = fl.Grid1D(0.0, 3.0, 64, fl.CONSTANT)
    assert np.all(fl.spatial_derivative(np.full(g.n_nodes, 2.5), g) == 0)


def test_derivative_exact_for_cubics():
    g = fl.Grid1D(-1.0, 2.0, 48, fl.CONSTANT)
    x = g.x
    d = fl.spatial_derivative(x**3 - 2 * x**2 + x, g)
    np.testing.assert_allclose(d, 3 * x**2 - 4 * x + 1, atol=1e-10)


def test_derivative_sine_accuracy():
    g = fl.Grid1D(0.0, TWO_PI, 256)
    # fourth-order stencil: error ~ dx**4 / 30
    assert np.abs(fl.spatial_derivative(np.sin(g.x), g) - np.cos(g.x)).max() <= g.dx**4 / 25


def test_derivative_shape_check():
    g = fl.Grid1D(0.0, 1.0, 32)
    with pytest.raises(ValueError):
        fl.spatial_derivative(np.zeros(33), g)


def test_constant_snapshot(air53):
    g = fl.Grid1D(0.0, 1.0, 32)
    snap, rep = fl.sample_initial(air53, g, fl.constant(1.0), fl.constant(0.0), fl.constant(0.0))
    assert np.all(snap.y == 0) and np.all(snap.q == 0)
    assert rep.M2 == 1.0


def test_vacuum_rejected(air53):
    g = fl.Grid1D(0.0, TWO_PI, 64)
    with pytest.raises(ValueError):
        fl.sample_initial(air53, g, fl.sine(1.0), fl.constant(0.0))


def test_snapshot_consistency(air53):
    g = fl.Grid1D(0.0, TWO_PI, 128)
    snap, _ = fl.sample_initial(air53, g, fl.sine(0.3, offset=1.0), fl.sine(0.5), fl.sine(0.2))
    r, s, m = gt.riemann_from_primitive(air53, snap.tau, snap.u, snap.S)
    np.testing.assert_allclose(snap.r, r, rtol=1e-12)
    np.testing.assert_allclose(snap.s, s, rtol=1e-12)
    np.testing.assert_allclose(snap.c, gt.sound_speed(air53, snap.tau, snap.S), rtol=1e-12)
    assert not snap.tau.flags.writeable


def test_sine_gradient_signs(air53):
    snap = sine_snapshot(air53, 256)
    eta = gt.eta_from_tau(air53, 1.0)
    w = eta ** ((air53.gamma + 1) / (2 * (air53.gamma - 1)))
    np.testing.assert_allclose(snap.y, -w * np.cos(snap.x), atol=1e-6)
    np.testing.assert_allclose(snap.q, -w * np.cos(snap.x), atol=1e-6)
    assert snap.y[0] == pytest.approx(-eta**2, rel=1e-7)


def test_from_riemann_roundtrip(air53):
    snap = sine_snapshot(air53, 64)
    again = fl.FieldSnapshot.from_riemann(snap, 0.5, snap.r, snap.s)
    assert again.t == 0.5
    np.testing.assert_allclose(again.tau, snap.tau, rtol=1e-12)
    np.testing.assert_allclose(again.u, snap.u, atol=1e-14)


def test_budget_definitions(air53):
    snap = sine_snapshot(air53, 128)
    b = fl.gradient_budget(snap)
    assert b.Y == pytest.approx(snap.y.max()) and b.Y > 0
    g = fl.Grid1D(0.0, 1.0, 32, fl.CONSTANT)
    neg = fl.FieldSnapshot(air53, g, 0.0, np.ones(33), -0.01 * g.x)
    assert fl.gradient_budget(neg).Y == 0.0
    assert fl.gradient_budget(snap, N=1e3).Ybar == 1e3


def test_budget_full_euler_threshold():
    gas = gt.GasModel(1.4)
    g = fl.Grid1D(0.0, TWO_PI, 256)
    snap = fl.stationary_solution(gas, fl.sine(0.002), 1.0, g)
    assert 0 < snap.y.max() < 0.3
    b = fl.gradient_budget(snap, 0.3)
    assert b.Ybar == 0.3 and b.Ybar >= b.Y


def test_classify(air53):
    c = fl.classify_initial(sine_snapshot(air53, 128))
    x = np.linspace(0, TWO_PI, 128, endpoint=False)
    clear = np.abs(np.cos(x)) > 1e-6
    got = np.zeros(128, dtype=bool)
    got[c.forward_compressive] = True
    assert np.array_equal(got[clear], np.cos(x)[clear] > 0)
    g = fl.Grid1D(0.0, 1.0, 32)
    const = fl.FieldSnapshot(air53, g, 0.0, np.ones(32), np.zeros(32))
    assert fl.classify_initial(const).rarefactive
    # u = 0, tau decreasing: s_x = eta_x > 0 but r_x = -eta_x < 0
    dec = fl.classify_initial(
        fl.FieldSnapshot(air53, fl.Grid1D(0, 1, 32, fl.CONSTANT), 0.0, 2 - np.linspace(0, 1, 33), 0.0)
    )
    assert dec.forward_compressive.size == 0 and dec.backward_compressive.size == 33


@pytest.mark.parametrize("gamma", [5 / 3, 1.4])
def test_stationary_pressure_constant(gamma):
    gas = gt.GasModel(gamma)
    g = fl.Grid1D(-10.0, 10.0, 1600, fl.CONSTANT)
    snap = fl.stationary_solution(gas, fl.lorentzian(), 1.0, g)
    p = snap.pressure
    assert np.ptp(p) <= 1e-10 * p.max()
    assert np.all(snap.u == 0)
    np.testing.assert_allclose(snap.y, -snap.q, atol=1e-14)
    y = fl.stationary_y(gas, snap.m, snap.m_x, snap.eta)
    np.testing.assert_allclose(snap.y, y, rtol=1e-5, atol=1e-9)
    assert np.abs(snap.y).max() > 1e-2


def test_stationary_zero_entropy_is_constant():
    gas = gt.GasModel(1.4)
    snap = fl.stationary_solution(gas, fl.constant(0.0), 2.0, fl.Grid1D(0, 1, 32))
    assert np.ptp(snap.tau) == 0 and np.all(snap.y == 0)


@pytest.mark.parametrize("gamma", [5 / 3, 2.0, 3.0, 4.0])
def test_critical_family_saturates(gamma):
    gas = gt.GasModel(gamma)
    fam = fl.critical_family(gas, 1.0, 1.0, fl.Grid1D(0.0, 1.0, 64, fl.CONSTANT))
    assert fam.max_saturation_error <= 1e-10
    np.testing.assert_allclose(fam.snapshot.y, fam.y_exact, rtol=1e-5)


def test_critical_family_flat_and_invalid():
    gas = gt.GasModel(5 / 3)
    g = fl.Grid1D(0.0, 1.0, 32, fl.CONSTANT)
    fam = fl.critical_family(gas, 0.0, 2.0, g)
    assert np.all(fam.snapshot.y == 0) and np.all(fam.snapshot.riccati_coeffs()[0] == 0)
    with pytest.raises(ValueError):
        fl.critical_family(gas, -3.0, 1.0, g)


def test_entropy_diagnostics_constant():
    gas = gt.GasModel(1.4)
    snap = fl.stationary_solution(gas, fl.constant(0.5), 1.0, fl.Grid1D(0, 1, 32))
    d = fl.entropy_diagnostics(snap)
    assert d.M3 == 0 and d.V == 0 and np.all(d.b == 0)


def test_entropy_identity_and_variation():
    gas = gt.GasModel(5 / 3, c_v=0.7)
    g = fl.Grid1D(-6.0, 6.0, 6000, fl.CONSTANT)
    snap = fl.stationary_solution(gas, fl.lorentzian(), 1.0, g)
    d = fl.entropy_diagnostics(snap)
    k = (3 * gas.gamma + 1) / (3 * gas.gamma - 1)
    rhs = 2 * gas.c_v * (snap.m * snap.m_xx - k * snap.m_x**2)
    np.testing.assert_allclose(snap.m**2 * d.b, rhs, rtol=1e-10, atol=1e-12)
    # total variation of S/(2 c_v) on [-6, 6] is (S(0) - S(6)) / c_v
    assert d.V == pytest.approx((1 - 1 / 37) / gas.c_v, rel=1e-5)
    left = fl.entropy_diagnostics(snap, (-6.0, 0.0)).V
    right = fl.entropy_diagnostics(snap, (0.0, 6.0)).V
    assert left + right == pytest.approx(d.V, rel=1e-12)


def test_variation_bounded_by_budget():
    gas = gt.GasModel(1.4)
    g = fl.Grid1D(0.0, TWO_PI, 256)
    snap, rep = fl.sample_initial(gas, g, fl.constant(1.0), fl.constant(0.0), fl.sine(0.3))
    d = fl.entropy_diagnostics(snap, (1.0, 2.5))
    assert d.V <= rep.M1 * 1.5 / (2 * gas.c_v)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(0.5, 3))
def test_tabulated_reproduces_nodes(a, w):
    xs = np.linspace(-3, 3, 41)
    vals = np.tanh(a * xs / w)
    prof = fl.tabulated(xs, vals)
    np.testing.assert_allclose(prof(xs), vals, atol=1e-14)
    mid = prof(0.5 * (xs[1:] + xs[:-1]))
    assert np.all(mid >= np.minimum(vals[1:], vals[:-1]) - 1e-14)
    assert np.all(mid <= np.maximum(vals[1:], vals[:-1]) + 1e-14)
