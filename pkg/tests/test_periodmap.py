import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lorentzwire import CANONICAL, PhysParams, RadialState
from lorentzwire import periodmap as pm
from lorentzwire.integrator import return_time
from lorentzwire.model import equilibrium

# tanh-sinh quadrature and findroot at 40 digits
RA_2 = 0.60225380044541729495
RB_2 = 1.9189949089299869742
T_2 = 8.8005994382071257426
T_NEAR = 6.2839847694100921011  # T(H0 + 1e-4)
H_4PI = 2.2890772282691654902

params_st = st.builds(PhysParams, I0=st.floats(0.3, 3.0), L=st.floats(0.3, 3.0), pz=st.floats(-2.0, 2.0))


def test_profile_examples():
    assert pm.profile_f(1.0, CANONICAL) == pytest.approx(3.0, rel=1e-15)
    g, g1, g2, g3 = pm.g_derivatives(1.0, CANONICAL)
    assert (g, g1) == (0.0, 0.0)
    assert g2 == pytest.approx(3.0, rel=1e-15)
    assert g3 == pytest.approx(-13.0, rel=1e-15)


@given(params_st)
def test_f_stationary_at_rbar(p):
    eq = equilibrium(p)
    f0, f1, f2, _ = pm.f_derivatives(eq.r_bar, p)
    assert abs(f1) <= 1e-12 * max(1.0, f2 * eq.r_bar)
    assert f0 == pytest.approx(eq.H0 ** 2, rel=1e-13)


@given(params_st, st.floats(-1.5, 1.5))
def test_g_derivatives_fd(p, lx):
    r = equilibrium(p).r_bar * math.exp(lx)
    h = 1e-5 * r
    gm, gp = pm.g_derivatives(r - h, p), pm.g_derivatives(r + h, p)
    g = pm.g_derivatives(r, p)
    for i in range(3):
        fd = (gp[i] - gm[i]) / (2 * h)
        assert fd == pytest.approx(g[i + 1], rel=1e-6, abs=1e-6 * max(1.0, abs(g[i + 1])))


def test_turning_points_example():
    tp = pm.turning_points(2.0, CANONICAL)
    assert tp.r_a == pytest.approx(RA_2, rel=1e-13)
    assert tp.r_b == pytest.approx(RB_2, rel=1e-13)
    with pytest.raises(ValueError):
        pm.turning_points(math.sqrt(3.0), CANONICAL)


@given(params_st, st.floats(1e-6, 5.0))
def test_turning_points_residual(p, s):
    eq = equilibrium(p)
    H = eq.H0 + s
    tp = pm.turning_points(H, p)
    assert 0.0 < tp.r_a < eq.r_bar < tp.r_b
    for r in (tp.r_a, tp.r_b):
        assert pm.profile_f(r, p) == pytest.approx(H * H, rel=1e-10)


def test_turning_points_scaling():
    H0 = math.sqrt(3.0)
    w = [(pm.turning_points(H0 + s, CANONICAL), s) for s in (1e-8, 4e-8)]
    widths = [tp.r_b - tp.r_a for tp, _ in w]
    # gap ~ sqrt(H^2 - H0^2): quadrupling the energy offset doubles the width
    assert widths[1] / widths[0] == pytest.approx(2.0, rel=1e-3)


def test_period_oracles():
    assert pm.period(2.0, CANONICAL) == pytest.approx(T_2, rel=1e-12)
    near = pm.period(math.sqrt(3.0) + 1e-4, CANONICAL)
    assert near == pytest.approx(T_NEAR, rel=1e-12)
    assert near == pytest.approx(2.0 * math.pi, rel=1e-3)
    assert abs(near / (math.pi * math.sqrt(2.0)) - 1.0) > 0.4


def test_period_vs_return_time():
    for H in (1.8, 2.0, 3.0, 5.0):
        tp = pm.turning_points(H, CANONICAL)
        T = pm.period(H, CANONICAL, tp=tp)
        assert return_time(RadialState(tp.r_b, 0.0), CANONICAL) == pytest.approx(T, rel=1e-6)


@settings(max_examples=30)
@given(params_st, st.floats(1e-4, 20.0))
def test_period_exceeds_turning_gap(p, s):
    H = equilibrium(p).H0 + s
    tp = pm.turning_points(H, p)
    assert pm.period(H, p, tp=tp) > 2.0 * (tp.r_b - tp.r_a)


def test_min_period():
    lin, l3 = pm.min_period(CANONICAL)
    assert lin == pytest.approx(2.0 * math.pi, rel=1e-14)
    assert l3 == pytest.approx(math.pi * math.sqrt(2.0), rel=1e-14)


def test_gap_order_near_H0():
    # T(H0 + s) - T0 is linear in s near the centre
    H0 = math.sqrt(3.0)
    gaps = [pm.period(H0 + s, CANONICAL) - 2.0 * math.pi for s in (1e-5, 2e-5, 4e-5)]
    orders = [math.log2(gaps[i + 1] / gaps[i]) for i in range(2)]
    assert orders == pytest.approx([1.0, 1.0], abs=1e-3)


def test_invert_period():
    assert pm.invert_period(4.0 * math.pi, CANONICAL) == pytest.approx(H_4PI, rel=1e-12)
    for H in np.linspace(1.75, math.sqrt(3.0) + 5.0, 20):
        assert pm.invert_period(pm.period(H, CANONICAL), CANONICAL) == pytest.approx(H, rel=1e-8)
    with pytest.raises(ValueError):
        pm.invert_period(2.0 * math.pi, CANONICAL)
    with pytest.raises(ValueError):
        pm.invert_period(6.0, CANONICAL)


def test_build_table():
    H0 = math.sqrt(3.0)
    tab = pm.build_table(CANONICAL, H0 + 5.0, 40)
    assert len(tab) == 40
    assert np.all(np.diff(tab.H) > 0.0) and np.all(np.diff(tab.T) > 0.0)
    assert np.all(tab.T > tab.T0)
    assert tab.T[0] == pytest.approx(tab.T0, rel=1e-3)
    bound = 2.0 * (tab.r_b - tab.r_a)
    assert np.all(tab.T > bound) and np.all(np.diff(bound[-5:]) > 0.0)
    with pytest.raises(ValueError):
        pm.build_table(CANONICAL, H0, 10)
    with pytest.raises(ValueError):
        pm.build_table(CANONICAL, H0 + 1.0, 1)


def test_build_table_reports_violation(monkeypatch):
    real = pm.period
    calls = []

    def fake(H, params, eq=None, **kw):
        calls.append(H)
        return real(H, params, eq, **kw) if len(calls) != 3 else 0.0

    monkeypatch.setattr(pm, "period", fake)
    with pytest.raises(pm.MonotonicityError) as exc:
        pm.build_table(CANONICAL, 3.0, 6)
    assert exc.value.index == 1


def test_table_csv_deterministic(tmp_path):
    tab = pm.build_table(CANONICAL, 3.0, 5)
    tab.to_csv(tmp_path / "a.csv")
    pm.build_table(CANONICAL, 3.0, 5).to_csv(tmp_path / "b.csv")
    text = (tmp_path / "a.csv").read_bytes()
    assert text == (tmp_path / "b.csv").read_bytes()
    rows = text.decode().splitlines()
    assert rows[0] == "H,T,r_a,r_b" and len(rows) == 6
    assert np.array_equal(np.array([[float(v) for v in r.split(",")] for r in rows[1:]]), tab.entries)
