"""Grid corroboration of the monotonicity of ``s(r)`` and the polynomial
inequalities behind it.

``s(r) = (g'^2 - 2 g'' g) / g'^3`` with ``g = (f - H0^2)/2``. Its derivative
has numerator

    N_g = -2 g''' g g' - 3 g'' g'^2 + 6 g''^2 g,

which after rescaling ``x = ln(r / r_bar)`` equals ``c^6 r_bar^-4 e^{-10x} P(x, a)``
with ``a = ln x0`` and ``P`` the cubic in ``a`` whose coefficients
``C0..C3`` are checked below, together with the auxiliary functions used to
bound ``C1, C2, C3``.

Each sign check is relative: a value is compared against ``tol`` times the
sum of the absolute values of its terms at the same point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .io import write_json
from .model import PhysParams, derived_constants, equilibrium
from .periodmap import g_derivatives

X_GRID = (-20.0, 20.0, 4001)
A_GRID = (0.1, 50.0, 500)
R_GRID = (0.05, 20.0, 2000)
X_MAX = 100.0
LIMIT_BAND = 1e-6

S_PARAM_SETS = (
    PhysParams(I0=1.0, L=1.0, pz=1.0),
    PhysParams(I0=1.0, L=math.e, pz=0.0),
    PhysParams(I0=2.0, L=1.0, pz=0.0),
)


@dataclass(frozen=True)
class SignReport:
    claim: str
    grid: str
    min_value: float
    passed: bool
    witnesses: tuple
    tol: float

    def as_dict(self) -> dict:
        return {"claim": self.claim, "grid": self.grid, "min_value": self.min_value,
                "pass": self.passed, "witnesses": list(self.witnesses), "tol": self.tol}


# --- s(r) --------------------------------------------------------------------

def s_function(r, params: PhysParams):
    """``(g'^2 - 2 g'' g)/g'^3``; within ``1e-6`` of ``r_bar`` the limit ``-g'''/(3 g''^2)``."""
    eq = equilibrium(params)
    rr = np.asarray(r, dtype=float)
    g, g1, g2, g3 = g_derivatives(np.atleast_1d(rr), params, eq)
    near = np.abs(np.atleast_1d(rr) - eq.r_bar) < LIMIT_BAND
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (g1 * g1 - 2.0 * g2 * g) / g1 ** 3
    if near.any():
        _, _, h2, h3 = g_derivatives(eq.r_bar, params, eq)
        s = np.where(near, -h3 / (3.0 * h2 * h2), s)
    return float(s[0]) if rr.ndim == 0 else s


def s_numerator(r, params: PhysParams):
    """``N_g(r)`` and its term scale ``|2 g''' g g'| + |3 g'' g'^2| + |6 g''^2 g|``."""
    g, g1, g2, g3 = g_derivatives(np.asarray(r, dtype=float), params)
    t1 = -2.0 * g3 * g * g1
    t2 = -3.0 * g2 * g1 * g1
    t3 = 6.0 * g2 * g2 * g
    return t1 + t2 + t3, np.abs(t1) + np.abs(t2) + np.abs(t3)


def numerator_from_P(r, params: PhysParams):
    """``N_g(r)`` rebuilt from ``P``: ``I^3 lam^4 e^{-10 x} P(x, a)`` with ``x = ln(lam r)``."""
    d = derived_constants(params)
    lam = math.exp(params.pz / d.c) / d.x0
    x = np.log(lam * np.asarray(r, dtype=float))
    val, scale = P_poly(x, d.a_sub)
    pref = d.I_sub ** 3 * lam ** 4 * np.exp(-10.0 * x)
    return pref * val, pref * scale


# --- P(x, a) and its coefficients ---------------------------------------------

def _check_x(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    if np.any(np.abs(x) > X_MAX):
        raise ValueError(f"|x| > {X_MAX:g} overflows the exponential terms")
    return x


def _coefficient_terms(x):
    e2, e4, e6 = np.exp(2 * x), np.exp(4 * x), np.exp(6 * x)
    c3 = (e6 * (2 * x + 2), e4 * (-8 * x - 10), e2 * (30 * x + 2), 6.0 + 0.0 * x)
    c2 = (e6 * (5 * x ** 2 + x), e4 * (-12 * x ** 2 + 6 * x - 12), e2 * (15 * x ** 2 + 17 * x + 12))
    c1 = (e6 * (4 * x ** 3 - x ** 2 + 3 * x - 3), e4 * (-4 * x ** 3 + x ** 2 + 3 * x + 3))
    c0 = (e6 * x ** 4,)
    return c0, c1, c2, c3


def _sum_and_scale(terms):
    return sum(terms), sum(np.abs(t) for t in terms)


def appendix_coefficients(x):
    """``(C0, C1, C2, C3)`` at ``x`` (``|x| <= 100``)."""
    x = _check_x(x)
    out = tuple(_sum_and_scale(t)[0] for t in _coefficient_terms(x))
    if x.ndim == 0:
        return tuple(float(v) for v in out)
    return out


def P_poly(x, a):
    """``C3 a^3 + C2 a^2 + C1 a + C0`` and its term scale."""
    x = _check_x(x)
    a = np.asarray(a, dtype=float)
    val = 0.0
    scale = 0.0
    for i, terms in enumerate(_coefficient_terms(x)):
        c, s = _sum_and_scale(terms)
        val = val + c * a ** i
        scale = scale + s * np.abs(a) ** i
    return val, scale


def P_direct(x, a):
    """``P`` from the three-product form, with the scale of its products."""
    x = _check_x(x)
    a = np.asarray(a, dtype=float)
    E = np.exp(2 * x)
    A1 = a + E * (-a + 2 * a * x + x * x)
    A2 = -a + E * (x + a)
    A3 = 3 * a + E * (1 - a - x)
    A4 = -12 * a + E * (-3 + 2 * a + 2 * x)
    p1 = 3 * A1 * A3 * A3
    p2 = -A1 * A2 * A4
    p3 = -3 * A2 * A2 * A3
    return p1 + p2 + p3, np.abs(p1) + np.abs(p2) + np.abs(p3)


# --- auxiliary chains ----------------------------------------------------------

def _t(*terms):
    return _sum_and_scale(terms)


def f1(x):
    e = np.exp(x)
    return _t(e * (2 * x ** 3 - x ** 2 + 6 * x - 12), -2 * x ** 3 + x ** 2 + 6 * x + 12)


def f1_d1(x):
    e = np.exp(x)
    return _t(e * (2 * x ** 3 + 5 * x ** 2 + 4 * x - 6), -6 * x ** 2 + 2 * x + 6)


def f1_d2(x):
    e = np.exp(x)
    return _t(e * (2 * x ** 3 + 11 * x ** 2 + 14 * x - 2), -12 * x + 2)


def f1_d3(x):
    e = np.exp(x)
    return _t(e * (2 * x ** 3 + 17 * x ** 2 + 36 * x + 12), -12.0 + 0 * x)


def f1_d4(x):
    return _t(np.exp(x) * (2 * x ** 3 + 23 * x ** 2 + 70 * x + 48))


def f2(x):
    e = np.exp(x)
    return _t(e * e * (5 * x ** 2 + 2 * x), -12 * e * (x ** 2 - x + 4), 15 * x ** 2 + 34 * x + 48)


def f2_d1(x):
    e = np.exp(x)
    return _t(e * e * (10 * x ** 2 + 14 * x + 2), -12 * e * (x ** 2 + x + 3), 30 * x + 34)


def f2_d2(x):
    e = np.exp(x)
    return _t(e * e * (20 * x ** 2 + 48 * x + 18), -12 * e * (x ** 2 + 3 * x + 4), 30.0 + 0 * x)


def f2_d3(x):
    e = np.exp(x)
    return _t(4 * e * e * (10 * x ** 2 + 34 * x + 21), 4 * e * (-3 * x ** 2 - 15 * x - 21))


def g2(x):
    return _t(np.exp(x) * (10 * x ** 2 + 34 * x + 21), -3 * x ** 2 - 15 * x - 21)


def g2_d1(x):
    return _t(np.exp(x) * (10 * x ** 2 + 54 * x + 55), -6 * x - 15)


def g2_d2(x):
    return _t(np.exp(x) * (10 * x ** 2 + 74 * x + 109), -6.0 + 0 * x)


def g2_d3(x):
    return _t(np.exp(x) * (10 * x ** 2 + 94 * x + 183))


def f3(x):
    e = np.exp(x)
    return _t(e ** 3 * (x + 2), e * e * (-4 * x - 10), e * (15 * x + 2), 6.0 + 0 * x)


def f3_d1(x):
    e = np.exp(x)
    return _t(e ** 3 * (3 * x + 7), e * e * (-8 * x - 24), e * (15 * x + 17))


def g3(x):
    e = np.exp(x)
    return _t(e * e * (3 * x + 7), e * (-8 * x - 24), 15 * x + 17)


def g3_d1(x):
    e = np.exp(x)
    return _t(e * e * (6 * x + 17), e * (-8 * x - 32), 15.0 + 0 * x)


def g3_d2(x):
    e = np.exp(x)
    return _t(4 * e * e * (3 * x + 10), -4 * e * (2 * x + 10))


def h3(x):
    return _t(np.exp(x) * (3 * x + 10), -2 * x - 10)


def h3_d1(x):
    return _t(np.exp(x) * (3 * x + 13), -2.0 + 0 * x)


def h3_d2(x):
    return _t(np.exp(x) * (3 * x + 16))


DERIVATIVE_CHAINS = (
    ("f1", (f1, f1_d1, f1_d2, f1_d3, f1_d4)),
    ("f2", (f2, f2_d1, f2_d2, f2_d3)),
    ("g2", (g2, g2_d1, g2_d2, g2_d3)),
    ("f3", (f3, f3_d1)),
    ("g3", (g3, g3_d1, g3_d2)),
    ("h3", (h3, h3_d1, h3_d2)),
)


# --- report assembly -----------------------------------------------------------

def _report(claim, grid, values, scale, tol, where):
    """``pass`` iff ``values >= -tol * scale`` everywhere; ``min_value`` is the scaled minimum."""
    values = np.asarray(values, dtype=float)
    scale = np.maximum(np.asarray(scale, dtype=float), np.finfo(float).tiny)
    rel = values / scale
    i = int(np.argmin(rel))
    ok = bool(np.all(np.isfinite(rel)) and rel[i] >= -tol)
    return SignReport(claim, grid, float(rel[i]), ok, tuple(np.atleast_1d(where[i]).tolist()), tol)


def _identity_report(claim, grid, lhs, rhs, scale, tol, where):
    """``pass`` iff ``|lhs - rhs| <= tol * scale``; ``min_value`` is minus the worst scaled gap."""
    scale = np.maximum(np.asarray(scale, dtype=float), np.finfo(float).tiny)
    err = np.abs(np.asarray(lhs, dtype=float) - np.asarray(rhs, dtype=float)) / scale
    i = int(np.argmax(err))
    return SignReport(claim, grid, float(-err[i]), bool(err[i] <= tol),
                      tuple(np.atleast_1d(where[i]).tolist()), tol)


def _exact_report(claim, grid, values, where):
    values = np.asarray(values, dtype=float)
    i = int(np.argmax(np.abs(values)))
    return SignReport(claim, grid, float(-abs(values[i])), bool(np.all(values == 0.0)),
                      tuple(np.atleast_1d(where[i]).tolist()), 0.0)


def _grids():
    x = np.linspace(*X_GRID[:2], X_GRID[2])
    a = np.linspace(*A_GRID[:2], A_GRID[2])
    xg = f"x in [{X_GRID[0]:g}, {X_GRID[1]:g}], {X_GRID[2]} points"
    ag = f"{xg}; a in [{A_GRID[0]:g}, {A_GRID[1]:g}], {A_GRID[2]} points"
    return x, a, xg, ag


def verify_appendix(tol: float = 1e-9, *, seed: int = 20240601) -> list:
    """Run every sign, identity and monotonicity check; reports in a fixed order."""
    if not tol > 0.0:
        raise ValueError("tol must be > 0")
    x, a, xg, ag = _grids()
    reps = []

    coeffs = _coefficient_terms(x)
    for i in range(4):
        v, s = _sum_and_scale(coeffs[i])
        reps.append(_report(f"C{i} >= 0", xg, v, s, tol, x))

    X, A = np.meshgrid(x, a, indexing="ij")
    Pv, Ps = P_poly(X, A)
    where = np.stack([X.ravel(), A.ravel()], axis=1)
    reps.append(_report("P(x, a) >= 0", ag, Pv.ravel(), Ps.ravel(), tol, where))
    Dv, Ds = P_direct(X, A)
    reps.append(_identity_report("P three-product form equals cubic in a", ag,
                                 Dv.ravel(), Pv.ravel(), Ds.ravel(), tol, where))
    rng = np.random.default_rng(seed)
    xr = rng.uniform(-20.0, 20.0, 2000)
    ar = rng.uniform(1e-3, 50.0, 2000)
    Dv, Ds = P_direct(xr, ar)
    Pv, _ = P_poly(xr, ar)
    reps.append(_identity_report("P three-product form equals cubic in a (random points)",
                                 "2000 uniform (x, a) in [-20, 20] x (0, 50]",
                                 Dv, Pv, Ds, tol, np.stack([xr, ar], axis=1)))
    z0, _ = P_poly(np.zeros_like(a), a)
    z1, _ = P_direct(np.zeros_like(a), a)
    reps.append(_exact_report("P(0, a) == 0", f"a in [{A_GRID[0]:g}, {A_GRID[1]:g}], {A_GRID[2]} points",
                              np.concatenate([z0, z1]), np.concatenate([a, a])))

    v, s = f1(x)
    reps.append(_report("f1 >= 0", xg, v, s, tol, x))
    v, s = f1_d3(x)
    reps.append(_report("f1''' has the sign of x", xg, np.sign(x) * v, s, tol, x))
    v, s = f1_d2(x)
    reps.append(_report("f1'' >= 0", xg, v, s, tol, x))
    z = np.array([f1(0.0)[0], f1_d1(0.0)[0], f1_d2(0.0)[0]])
    reps.append(_exact_report("f1(0) = f1'(0) = f1''(0) = 0", "x = 0", z, np.zeros(3)))

    v, s = f2(x)
    reps.append(_report("f2 >= 0", xg, v, s, tol, x))
    v, s = f2_d2(x)
    reps.append(_report("f2'' >= 0", xg, v, s, tol, x))
    v, s = g2(x)
    reps.append(_report("g2 has the sign of x", xg, np.sign(x) * v, s, tol, x))
    nz = x != 0.0
    reps.append(_report("g2 vanishes only at 0", xg + ", x != 0",
                        np.abs(v[nz]) - tol * s[nz], s[nz], 0.0, x[nz]))
    z = np.array([f2(0.0)[0], f2_d1(0.0)[0], f2_d2(0.0)[0], g2(0.0)[0]])
    reps.append(_exact_report("f2(0) = f2'(0) = f2''(0) = g2(0) = 0", "x = 0", z, np.zeros(4)))

    v, s = f3(x)
    reps.append(_report("f3 >= 0", xg, v, s, tol, x))
    v, s = g3_d1(x)
    reps.append(_report("g3' >= 0", xg, v, s, tol, x))
    v, s = g3(x)
    reps.append(_report("g3 has the sign of x", xg, np.sign(x) * v, s, tol, x))
    z = np.array([f3(0.0)[0], g3(0.0)[0], g3_d1(0.0)[0], h3(0.0)[0]])
    reps.append(_exact_report("f3(0) = g3(0) = g3'(0) = h3(0) = 0", "x = 0", z, np.zeros(4)))
    v, s = h3_d1(x)
    changes = int(np.count_nonzero(np.diff(np.sign(v)) != 0))
    xm = x[int(np.argmax(v > 0))]
    reps.append(SignReport("h3' has exactly one sign change", xg, float(changes == 1) - 1.0,
                           changes == 1, (float(xm),), 0.0))
    # negative before the change and positive after it: h3 falls then rises
    reps.append(_report("h3' < 0 before its zero and > 0 after it", xg, np.where(x < xm, -v, v), s, tol, x))
    v, s = g3_d2(x)
    hv, _ = h3(x)
    reps.append(_report("g3'' has the sign of h3", xg, np.sign(hv) * v, s, tol, x))

    for name, chain in DERIVATIVE_CHAINS:
        reps.append(_derivative_report(name, chain, tol=1e-6))

    for k, p in enumerate(S_PARAM_SETS):
        reps.extend(_s_reports(k, p, tol))
    return reps


def audit_intermediate_claims(tol: float = 1e-9) -> list:
    """Sign claims on ``g2''`` and ``g2'`` that a step-by-step argument for ``C2 >= 0`` might use.

    These are reported separately: they do not hold on the grid (``g2''(0) = 103``
    and ``g2'`` dips below zero near ``x = -2.5``), while the conclusions they
    were meant to support (``g2`` has the sign of ``x``, ``f2 >= 0``) do.
    """
    x, _, xg, _ = _grids()
    v, s = g2_d2(x)
    out = [_report("g2'' has the sign of x", xg, np.sign(x) * v, s, tol, x)]
    v, s = g2_d1(x)
    g0 = g2_d1(0.0)[0]
    out.append(_report("g2' >= g2'(0) = 40", xg, v - g0, s + abs(g0), tol, x))
    out.append(_report("g2' > 0", xg, v, s, tol, x))
    return out


def _derivative_report(name, chain, tol):
    """Each analytic derivative matches a central difference of its predecessor."""
    x = np.linspace(-5.0, 5.0, 201)
    h = 1e-5
    worst = -math.inf
    where = 0.0
    for lo, hi in zip(chain[:-1], chain[1:]):
        fd = (lo(x + h)[0] - lo(x - h)[0]) / (2 * h)
        v, s = hi(x)
        err = np.abs(fd - v) / np.maximum(s, 1.0)
        i = int(np.argmax(err))
        if err[i] > worst:
            worst, where = float(err[i]), float(x[i])
    return SignReport(f"{name} derivative chain matches central differences",
                      "x in [-5, 5], 201 points, h = 1e-5", -worst, worst <= tol, (where,), tol)


def one_sided_limits(params: PhysParams, h: float = 1e-4):
    """``s(r_bar -/+ 0)`` by Richardson extrapolation of ``s(r_bar (1 -/+ h))`` and ``h/2``."""
    eq = equilibrium(params)
    out = []
    for sgn in (-1.0, 1.0):
        s1 = s_function(eq.r_bar * (1.0 + sgn * h), params)
        s2 = s_function(eq.r_bar * (1.0 + sgn * 0.5 * h), params)
        out.append(2.0 * s2 - s1)
    return tuple(out)


def _s_reports(k, params, tol):
    r = np.geomspace(*R_GRID[:2], R_GRID[2])
    label = f"set {k}: I0={params.I0:g}, L={params.L:.6g}, pz={params.pz:g}"
    rg = f"r log-spaced in [{R_GRID[0]:g}, {R_GRID[1]:g}], {R_GRID[2]} points; {label}"
    eq = equilibrium(params)
    out = []
    s = s_function(r, params)
    scale = np.maximum(np.abs(s[1:]), np.abs(s[:-1]))
    out.append(_report("s(r) nondecreasing", rg, np.diff(s), scale, tol, r[1:]))
    N, Ns = s_numerator(r, params)
    out.append(_report("numerator of s'(r) >= 0", rg, N, Ns, tol, r))
    NP, _ = numerator_from_P(r, params)
    ok = np.abs(np.log(r / eq.r_bar)) <= 20.0
    out.append(_identity_report("numerator of s'(r) equals the rescaled P(x, a)", rg,
                                N[ok], NP[ok], Ns[ok], tol, r[ok]))
    lim = s_function(eq.r_bar, params)
    side = np.array(one_sided_limits(params))
    out.append(_identity_report("s one-sided limits at r_bar match -g'''/(3 g''^2)",
                                f"Richardson from r_bar (1 -/+ 1e-4); {label}",
                                side, np.full(2, lim), np.full(2, abs(lim)), 1e-6, np.full(2, eq.r_bar)))
    return out


def write_reports(path, reports) -> None:
    write_json(path, [r.as_dict() for r in reports])
