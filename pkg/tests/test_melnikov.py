import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lorentzwire import CANONICAL, FieldModel, RadialState
from lorentzwire import melnikov as mk

# H_n from mpmath root of the period integral; (a, b) from scipy DOP853 at rtol 1e-13
# with scipy.special Bessel profiles and a 8192-point trapezoid rule
H1 = 1.8173026947660843027
H2 = 2.3777749896575596902
B1 = -0.20233415478897915
B2 = 0.18532677999715763


@pytest.fixture(scope="module")
def field():
    return FieldModel.harmonic(CANONICAL.omega1, "bessel")


@pytest.fixture(scope="module")
def res(field):
    return {n: mk.melnikov_fourier(n, CANONICAL, field) for n in (1, 2, 3)}


def test_resonant_energies():
    assert mk.resonant_energy(1, CANONICAL) == pytest.approx(H1, rel=1e-12)
    assert mk.resonant_energy(2, CANONICAL) == pytest.approx(H2, rel=1e-12)
    Hs = [mk.resonant_energy(n, CANONICAL) for n in range(1, 6)]
    assert np.all(np.diff(Hs) > 0.0)
    with pytest.raises(mk.NoResonance):
        mk.resonant_energy(1, CANONICAL.replace(T1=6.0))
    with pytest.raises(ValueError):
        mk.resonant_energy(0, CANONICAL)


def test_resonant_orbit_closes():
    for n in (1, 2):
        orb = mk.resonant_orbit(n, CANONICAL)
        assert mk.closure_residual(orb) <= 1e-9
        assert orb.period == n * CANONICAL.T1


@given(st.floats(0.1, 8.0))
def test_wedge_vanishes_and_odd(r):
    f = FieldModel.harmonic(CANONICAL.omega1, "bessel")
    assert mk.wedge_integrand(RadialState(r, 0.0), CANONICAL, f) == 0.0
    a = mk.wedge_integrand(RadialState(r, 0.7), CANONICAL, f)
    b = mk.wedge_integrand(RadialState(r, -0.7), CANONICAL, f)
    assert b == -a


def test_wedge_closed_form_vs_assembled(field):
    rng = np.random.default_rng(3)
    st_ = RadialState(rng.uniform(0.2, 6.0, 100), rng.uniform(-3.0, 3.0, 100))
    a = mk.wedge_integrand(st_, CANONICAL, field)
    b = mk.wedge_assembled(st_, CANONICAL, field)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-14)


def test_fourier_pair_oracle(res):
    assert res[1].b == pytest.approx(B1, rel=1e-9)
    assert abs(res[1].a) <= 1e-12
    assert res[2].b == pytest.approx(B2, rel=1e-9)
    assert abs(res[2].a) <= 1e-12


def test_zero_structure(res, field):
    for n, r in res.items():
        assert r.simple
        assert len(r.zeros) == 2 * n
        assert np.allclose(np.diff(r.zeros), CANONICAL.T1 / 2.0, atol=1e-12)
        assert 0.0 <= r.zeros[0] and r.zeros[-1] < n * CANONICAL.T1
        vals = mk.melnikov_value(n, np.array(r.zeros), CANONICAL, field)
        assert np.max(np.abs(vals)) <= 1e-8 * r.amplitude
        assert math.sin(r.phase) * math.hypot(r.a, r.b) == pytest.approx(r.b, abs=1e-15)
        assert math.cos(r.phase) * math.hypot(r.a, r.b) == pytest.approx(-r.a, abs=1e-15)


def test_value_is_sinusoid(res, field):
    for n, r in res.items():
        span = n * CANONICAL.T1
        t0 = np.linspace(0.0, span, 64, endpoint=False)
        v = mk.melnikov_value(n, t0, CANONICAL, field)
        assert abs(v.mean()) <= 1e-10 * r.amplitude
        assert np.allclose(r.value(t0), v, atol=1e-9 * r.amplitude)
        _, resid = mk.fit_sinusoid(t0, v, CANONICAL.omega1)
        assert resid <= 1e-8 * r.amplitude
        shifted = mk.melnikov_value(n, t0 + CANONICAL.T1, CANONICAL, field)
        assert np.allclose(shifted, v, atol=1e-10 * r.amplitude)


def test_only_fundamental_mode_contributes(field):
    orbit, t, wD, wE, a, b, _ = mk._resolved(2, CANONICAL, field, mk.N_SAMPLES, 1e-11, "r_b", None)
    w1 = CANONICAL.omega1
    proj = a * np.cos(w1 * t) + b * np.sin(w1 * t)
    t0 = np.linspace(0.0, 14.0, 17)
    span = 2 * CANONICAL.T1
    full = mk._direct(t, wD, None, t0, w1, span)
    only = mk._direct(t, proj, None, t0, w1, span)
    assert np.allclose(full, only, atol=1e-9 * np.max(np.abs(full)))


def test_amplitude_independent_of_start(field):
    # starting at r_a shifts time by half the orbit period n T1 / 2, so the phase moves by n pi
    for n in (1, 2):
        a = mk.melnikov_fourier(n, CANONICAL, field, start="r_b")
        b = mk.melnikov_fourier(n, CANONICAL, field, start="r_a")
        assert b.amplitude == pytest.approx(a.amplitude, rel=1e-9)
        sign = (-1) ** n
        assert b.b == pytest.approx(sign * a.b, rel=1e-9)


def test_cosine_profile_folds():
    f = FieldModel.harmonic(CANONICAL.omega1, "bessel", cosine=True)
    r = mk.melnikov_fourier(1, CANONICAL, f)
    t0 = np.linspace(0.0, 7.0, 11)
    assert np.allclose(r.value(t0), mk.melnikov_value(1, t0, CANONICAL, f), atol=1e-9 * r.amplitude)
    assert len(r.zeros) == 2


def test_constant_field_not_simple():
    r = mk.melnikov_fourier(1, CANONICAL, FieldModel.harmonic(CANONICAL.omega1, "constant", value=1e-30))
    assert r.amplitude < 1e-20


def test_result_dict(res):
    d = res[1].as_dict()
    assert set(d) == {"n", "H_n", "a", "b", "amplitude", "phase", "zeros", "simple"}
