import json
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from lorentzwire import CANONICAL, PhysParams
from lorentzwire import verify as V
from lorentzwire.model import equilibrium

# the coefficient polynomials evaluated by mpmath at 40 digits
C_AT_1 = (403.42879349273512261, 1374.0808305776380851, 1762.9245287127630422, 873.39826854012499430)
C_AT_M07 = (0.0036004379945966973072, 0.063558187146686225975, 0.52070345803599151740, 1.0560907556508043629)


@pytest.fixture(scope="module")
def reports():
    return V.verify_appendix()


def test_s_at_rbar():
    assert Fraction(V.s_function(1.0, CANONICAL)).limit_denominator(1000) == Fraction(13, 27)
    assert V.s_function(1.0, CANONICAL) == pytest.approx(13.0 / 27.0, rel=1e-15)


def test_s_one_sided_limits():
    for p in V.S_PARAM_SETS:
        lim = V.s_function(equilibrium(p).r_bar, p)
        lo, hi = V.one_sided_limits(p)
        assert lo == pytest.approx(lim, rel=1e-6) and hi == pytest.approx(lim, rel=1e-6)


def test_coefficients_oracle():
    assert np.allclose(V.appendix_coefficients(1.0), C_AT_1, rtol=1e-14)
    assert np.allclose(V.appendix_coefficients(-0.7), C_AT_M07, rtol=1e-12)
    assert V.appendix_coefficients(0.0) == (0.0, 0.0, 0.0, 0.0)
    assert V.appendix_coefficients(1.0)[3] == pytest.approx(4 * math.e ** 6 - 18 * math.e ** 4 + 32 * math.e ** 2 + 6,
                                                            rel=1e-15)
    with pytest.raises(ValueError):
        V.appendix_coefficients(101.0)


@given(st.floats(-100.0, 100.0))
def test_C0_nonnegative(x):
    assert V.appendix_coefficients(x)[0] >= 0.0


def test_symbolic_identities():
    xi, a, I, lam = sp.symbols("xi a I lam", positive=True)
    E = sp.exp(2 * xi)
    A1 = a + E * (-a + 2 * a * xi + xi ** 2)
    A2 = -a + E * (xi + a)
    A3 = 3 * a + E * (1 - a - xi)
    A4 = -12 * a + E * (-3 + 2 * a + 2 * xi)
    P3 = 3 * A1 * A3 ** 2 - A1 * A2 * A4 - 3 * A2 ** 2 * A3
    e2, e4, e6 = sp.exp(2 * xi), sp.exp(4 * xi), sp.exp(6 * xi)
    Pc = ((e6 * (2 * xi + 2) + e4 * (-8 * xi - 10) + e2 * (30 * xi + 2) + 6) * a ** 3
          + (e6 * (5 * xi ** 2 + xi) + e4 * (-12 * xi ** 2 + 6 * xi - 12) + e2 * (15 * xi ** 2 + 17 * xi + 12)) * a ** 2
          + (e6 * (4 * xi ** 3 - xi ** 2 + 3 * xi - 3) + e4 * (-4 * xi ** 3 + xi ** 2 + 3 * xi + 3)) * a
          + e6 * xi ** 4)
    assert sp.expand(P3 - Pc) == 0
    # g in the rescaled variable xi = ln(lam r), r-derivatives via lam e^{-xi} d/dxi
    g = (I * (xi + a) ** 2 + I * a * sp.exp(-2 * xi) - I * (a ** 2 + a)) / 2
    D = lambda h: lam * sp.exp(-xi) * sp.diff(h, xi)
    g1 = D(g)
    g2 = D(g1)
    g3 = D(g2)
    N = -2 * g3 * g * g1 - 3 * g2 * g1 ** 2 + 6 * g2 ** 2 * g
    assert sp.simplify(sp.expand(N - I ** 3 * lam ** 4 * sp.exp(-10 * xi) * Pc)) == 0


@given(st.floats(-20.0, 20.0), st.floats(1e-3, 50.0))
def test_P_forms_agree(x, a):
    # at x = 0 every product vanishes, so compare against the larger term scale of the two forms
    d, ds = V.P_direct(x, a)
    p, ps = V.P_poly(x, a)
    assert abs(d - p) <= 1e-9 * max(ds, ps)


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-2.0, 2.0), st.floats(-3.0, 3.0))
def test_numerator_identity(I0, L, pz, lr):
    p = PhysParams(I0=I0, L=L, pz=pz)
    r = equilibrium(p).r_bar * math.exp(lr)
    N, Ns = V.s_numerator(r, p)
    NP, NPs = V.numerator_from_P(r, p)
    assert abs(N - NP) <= 1e-9 * max(Ns, NPs)
    assert N >= -1e-9 * max(Ns, NPs)


def test_zero_identities():
    assert V.f1(0.0)[0] == 0.0 and V.f1_d1(0.0)[0] == 0.0
    a = np.linspace(0.1, 50.0, 500)
    assert np.all(V.P_poly(np.zeros_like(a), a)[0] == 0.0)


def test_all_reports_pass(reports):
    failed = [r.claim for r in reports if not r.passed]
    assert failed == []
    claims = {r.claim for r in reports}
    for needed in ("C1 >= 0", "C2 >= 0", "C3 >= 0", "P(x, a) >= 0", "f1 >= 0", "f2 >= 0", "f3 >= 0",
                   "P(0, a) == 0", "g2 has the sign of x", "g2 vanishes only at 0"):
        assert needed in claims
    assert sum(r.claim == "s(r) nondecreasing" for r in reports) == 3


def test_report_consistency(reports):
    for r in reports:
        assert r.passed == (r.min_value >= -r.tol)


def test_audit_flags_intermediate_claims():
    audit = {r.claim: r for r in V.audit_intermediate_claims()}
    assert not audit["g2'' has the sign of x"].passed
    assert not audit["g2' >= g2'(0) = 40"].passed
    assert V.g2_d2(0.0)[0] == 103.0
    assert V.g2_d1(0.0)[0] == 40.0


def test_failure_is_reported():
    x = np.linspace(-1.0, 1.0, 5)
    r = V._report("x >= 0", "test", x, np.ones_like(x), 1e-9, x)
    assert not r.passed and r.witnesses == (-1.0,) and r.min_value == -1.0


def test_write_reports(tmp_path, reports):
    V.write_reports(tmp_path / "r.json", reports)
    d = json.loads((tmp_path / "r.json").read_text())
    assert len(d) == len(reports)
    assert set(d[0]) == {"claim", "grid", "min_value", "pass", "witnesses", "tol"}
