"""Acceptance criteria 1-10; a PASS/FAIL line per criterion is printed in the terminal summary."""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from lorentzwire import CANONICAL, FieldModel, PhysParams, RadialState
from lorentzwire import melnikov as mk
from lorentzwire import orbitfinder as of
from lorentzwire import periodmap as pm
from lorentzwire import verify as V
from lorentzwire.integrator import integrate, return_time
from lorentzwire.model import equilibrium, hamiltonian
from lorentzwire.potential import Waveform, delayed_potential, harmonic_profiles


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    assert ok, detail


@pytest.fixture(scope="module")
def field():
    return FieldModel.harmonic(CANONICAL.omega1, "bessel")


def test_criterion_01_equilibrium():
    t = time.perf_counter()
    a = equilibrium(CANONICAL)
    b = equilibrium(PhysParams(I0=1.0, L=math.e, pz=0.0))
    dt = time.perf_counter() - t
    ok = (abs(a.r_bar - 1.0) <= 1e-12 and a.residual <= 1e-12 and abs(b.r_bar / math.e - 1.0) <= 1e-12
          and b.residual <= 1e-12 and dt < 1.0)
    record(1, ok, f"r_bar = {a.r_bar!r}, {b.r_bar!r}; residuals {a.residual:.1e}, {b.residual:.1e}; {dt * 1e3:.1f} ms")


def test_criterion_02_conservation():
    eq = equilibrium(CANONICAL)
    tp = pm.turning_points(2.0, CANONICAL)
    orb = integrate(RadialState(tp.r_b, 0.0), 0.0, 100.0 * eq.T0_lin, CANONICAL, tol=1e-11, n_out=4001)
    drift = float(np.max(np.abs(hamiltonian(RadialState(orb.r, orb.pr), CANONICAL) / 2.0 - 1.0)))
    record(2, drift <= 1e-9, f"max relative drift {drift:.2e} over 100 T0_lin")


def test_criterion_03_period_cross_oracle():
    eq = equilibrium(CANONICAL)
    t = time.perf_counter()
    worst = 0.0
    for H in eq.H0 + 5.0 * np.arange(1, 21) / 20.0:
        tp = pm.turning_points(H, CANONICAL)
        T = pm.period(H, CANONICAL, tp=tp)
        worst = max(worst, abs(T - return_time(RadialState(tp.r_b, 0.0), CANONICAL)) / T)
    dt = time.perf_counter() - t
    record(3, worst <= 1e-6 and dt < 60.0, f"max relative gap {worst:.2e} on 20 energies; {dt:.1f} s")


def test_criterion_04_monotonicity():
    eq = equilibrium(CANONICAL)
    tab = pm.build_table(CANONICAL, eq.H0 + 5.0, 40)
    inc = bool(np.all(np.diff(tab.T) > 0.0))
    bound = bool(np.all(tab.T >= 2.0 * (tab.r_b - tab.r_a)))
    record(4, len(tab) == 40 and inc and bound,
           f"40 entries, T from {tab.T[0]:.6f} to {tab.T[-1]:.6f}, increasing={inc}, T >= 2(r_b - r_a): {bound}")


def test_criterion_05_minimal_period():
    eq = equilibrium(CANONICAL)
    T = pm.period(eq.H0 + 1e-4, CANONICAL)
    rel_lin = abs(T / eq.T0_lin - 1.0)
    ratio = T / eq.T0_lemma3
    detail = (f"T(H0+1e-4) = {T:.9f}; T0_lin = 2pi, rel gap {rel_lin:.1e}; linearized formula supported. "
              f"T0_lemma3 = pi*sqrt(2) = {eq.T0_lemma3:.7f}, ratio {ratio:.6f} (sqrt 2 = {math.sqrt(2):.6f})")
    record(5, rel_lin <= 1e-3 and abs(ratio - math.sqrt(2.0)) < 1e-3, detail)


def test_criterion_06_melnikov_closed_form(field):
    parts = []
    ok = True
    for n in (1, 2, 3):
        r = mk.melnikov_fourier(n, CANONICAL, field)
        t0 = np.linspace(0.0, n * CANONICAL.T1, 64, endpoint=False)
        vals = mk.melnikov_value(n, t0, CANONICAL, field)
        _, resid = mk.fit_sinusoid(t0, vals, CANONICAL.omega1)
        rel = resid / r.amplitude
        spaced = len(r.zeros) == 2 * n and np.allclose(np.diff(r.zeros), CANONICAL.T1 / 2.0, atol=1e-10)
        ok = ok and rel <= 1e-8 and spaced
        parts.append(f"n={n}: fit {rel:.1e}, {len(r.zeros)} zeros")
    record(6, ok, "; ".join(parts))


def _ladder(n, field, t0):
    recs = []
    for k in of.K_LADDER[:2]:
        seed = mk.orbit_point(n, t0, CANONICAL)
        recs.append(of.find_orbit(n, CANONICAL.replace(k=k), field, seed))
    return recs


def test_criterion_07_melnikov_predicts_orbits(field):
    parts = []
    ok = True
    for n in (1, 2):
        r = mk.melnikov_fourier(n, CANONICAL, field)
        assert r.simple
        a, b = _ladder(n, field, r.zeros[0])
        ratio = b.distance_to_unperturbed / a.distance_to_unperturbed
        ok = ok and a.iterations <= 15 and a.residual <= 1e-9 and 0.3 <= ratio <= 0.7 and a.minimal_n == n
        parts.append(f"n={n}: {a.iterations} iterations, residual {a.residual:.1e}, distance ratio {ratio:.3f}")
    record(7, ok, "; ".join(parts))


def test_criterion_08_period_lock(field):
    cat = of.scan_orbits(4, CANONICAL.replace(k=1e-3), field)
    ok = bool(cat.all_orbits()) and not cat.lower_period and not cat.failures
    for o in cat.all_orbits():
        P = of._Map(CANONICAL.replace(k=1e-3), field, of.MAP_TOL, None)
        x = o.fixed_point.as_array()
        closes = float(np.max(np.abs(P(x, o.n) - x))) <= 1e-8
        smaller = all(float(np.max(np.abs(P(x, d) - x))) > 1e-3 for d in range(1, o.n))
        ok = ok and closes and smaller and o.minimal_n == o.n
    counts = ", ".join(f"n={n}: {c} orbits / {cat.melnikov_zero_counts[n]} Melnikov zeros"
                       for n, c in cat.counts().items())
    record(8, ok, counts)


def test_criterion_09_appendix():
    t = time.perf_counter()
    reps = V.verify_appendix(1e-9)
    dt = time.perf_counter() - t
    failed = [r.claim for r in reps if not r.passed]
    record(9, not failed and dt < 60.0, f"{len(reps) - len(failed)}/{len(reps)} reports pass in {dt:.1f} s"
           + (f"; failed: {failed}" if failed else ""))


def test_criterion_10_potential():
    w = 1.0
    wf = Waveform.sine(2.0 * math.pi / w)
    worst = 0.0
    for x in np.linspace(0.5, 10.0, 40):
        for t in (0.0, 0.7, 2.0):
            D, E = harmonic_profiles(w, x / w)
            ref = D * math.sin(w * t) + E * math.cos(w * t)
            q = delayed_potential(t, x / w, wf).value
            worst = max(worst, abs(q - ref) / max(abs(ref), 1e-3))
    spot = delayed_potential(0.0, 1.0, wf).value
    ref = -0.5 * math.pi * 0.76519768655796655145  # J0(1)
    ok = worst <= 1e-6 and abs(spot / ref - 1.0) <= 1e-6
    record(10, ok, f"max relative gap {worst:.1e} on wr in [0.5, 10]; a(0, 1) = {spot:.7f}")
