"""Energy-period map of the unperturbed system.

Closed orbits at energy ``H > H0`` oscillate between the roots ``r_a < r_b``
of ``f(r) = H^2`` and have period

    T(H) = 2 int_{r_a}^{r_b} H / sqrt(H^2 - f(r)) dr.

The quadrature runs in ``rho = ln r`` with ``rho = m - h cos(theta)``; the
square-root endpoint singularities cancel against ``d rho = h sin(theta)``
and the remaining integrand is smooth and even in ``theta``, so the
midpoint rule converges spectrally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from ._roots import grow_bracket, newton_bisect
from .model import Equilibrium, PhysParams, _check_radius, equilibrium

QUAD_RTOL = 1e-12
QUAD_N0 = 16
QUAD_NMAX = 1 << 17


class QuadratureError(RuntimeError):
    pass


class MonotonicityError(RuntimeError):
    """Adjacent table entries with ``T[i+1] <= T[i]``."""

    def __init__(self, index, lower, upper):
        super().__init__(f"period not increasing between entries {index} and {index + 1}: "
                         f"(H={lower[0]!r}, T={lower[1]!r}) -> (H={upper[0]!r}, T={upper[1]!r})")
        self.index = index
        self.pair = (lower, upper)


@dataclass(frozen=True)
class TurningPoints:
    r_a: float
    r_b: float
    H: float


def profile_f(r, params: PhysParams):
    """``f(r) = 1 + (pz + c ln r)^2 + L^2 / r^2``; orbits satisfy ``H^2 = f(r) + pr^2``."""
    r = _check_radius(r)
    u = params.pz + params.c * np.log(r)
    v = 1.0 + u * u + params.L ** 2 / (r * r)
    return float(v) if v.ndim == 0 else v


def f_derivatives(r, params: PhysParams):
    """``(f, f', f'', f''')`` in ``r``."""
    r = _check_radius(r)
    c = params.c
    L2 = params.L ** 2
    u = params.pz + c * np.log(r)
    f0 = 1.0 + u * u + L2 / (r * r)
    f1 = 2.0 * c * u / r - 2.0 * L2 / r ** 3
    f2 = 2.0 * c * c / r ** 2 - 2.0 * c * u / r ** 2 + 6.0 * L2 / r ** 4
    f3 = -6.0 * c * c / r ** 3 + 4.0 * c * u / r ** 3 - 24.0 * L2 / r ** 5
    out = (f0, f1, f2, f3)
    if np.ndim(f0) == 0:
        return tuple(float(v) for v in out)
    return out


def g_derivatives(r, params: PhysParams, eq: Equilibrium | None = None):
    """``(g, g', g'', g''')`` for ``g = (f - H0^2)/2``, which vanishes doubly at ``r_bar``."""
    eq = eq or equilibrium(params)
    _, _, f2, f3 = f_derivatives(r, params)
    r = np.asarray(r, dtype=float)
    rho = np.log(r)
    rb = math.log(eq.r_bar)
    # f - H0^2 without cancellation
    d = rho - rb
    ub = params.pz + params.c * rb
    u = params.pz + params.c * rho
    e = params.L ** 2 * math.exp(-2.0 * rb)
    df = params.c * d * (u + ub) + e * np.expm1(-2.0 * d)
    g = 0.5 * df
    # g' = (c u - L^2/r^2)/r, rewritten around the equilibrium balance c ub = L^2 exp(-2 rb)
    g1 = (params.c ** 2 * d - e * np.expm1(-2.0 * d)) / r
    out = (g, g1, 0.5 * f2, 0.5 * f3)
    if np.ndim(g) == 0:
        return tuple(float(v) for v in out)
    return out


def _df_from_bar(delta, params, rho_bar):
    """``f(rho_bar + delta) - f(rho_bar)`` and its derivative in ``delta``."""
    c = params.c
    L2 = params.L ** 2
    ub = params.pz + c * rho_bar
    u = ub + c * delta
    e = L2 * math.exp(-2.0 * rho_bar)
    val = c * delta * (u + ub) + e * math.expm1(-2.0 * delta)
    der = 2.0 * c * u - 2.0 * e * math.exp(-2.0 * delta)
    return val, der


def _check_energy(H, eq):
    if not (math.isfinite(H) and H > eq.H0):
        raise ValueError(f"energy must exceed H0 = {eq.H0!r}, got {H!r}")


def turning_points(H: float, params: PhysParams, eq: Equilibrium | None = None) -> TurningPoints:
    """Roots ``r_a < r_bar < r_b`` of ``f(r) = H^2``."""
    eq = eq or equilibrium(params)
    _check_energy(H, eq)
    rho_bar = math.log(eq.r_bar)
    target = (H - eq.H0) * (H + eq.H0)
    curv = 2.0 * params.c ** 2 + 4.0 * params.L ** 2 * math.exp(-2.0 * rho_bar)
    step = math.sqrt(2.0 * target / curv)

    def fn(d):
        return _df_from_bar(d, params, rho_bar)[0] - target

    def dfn(d):
        return _df_from_bar(d, params, rho_bar)[1]

    roots = []
    for sgn in (-1.0, 1.0):
        a, b = grow_bracket(fn, 0.0, 0.5 * sgn * step)
        roots.append(newton_bisect(fn, dfn, a, b))
    return TurningPoints(r_a=math.exp(rho_bar + roots[0]), r_b=math.exp(rho_bar + roots[1]), H=H)


def _period_sum(n, params, H, rho_a, rho_b):
    c = params.c
    L2 = params.L ** 2
    m = 0.5 * (rho_a + rho_b)
    h = 0.5 * (rho_b - rho_a)
    theta = (np.arange(n) + 0.5) * (math.pi / n)
    rho = m - h * np.cos(theta)
    da = 2.0 * h * np.sin(0.5 * theta) ** 2
    db = 2.0 * h * np.cos(0.5 * theta) ** 2
    u = params.pz + c * rho
    ua = params.pz + c * rho_a
    ub = params.pz + c * rho_b
    e = L2 * np.exp(-2.0 * rho)
    a_half = theta < 0.5 * math.pi
    q = np.empty(n)
    # H^2 - f written as f(rho_a) - f or f(rho_b) - f, divided by the vanishing factor
    qa = -c * (ua + u) + e * np.expm1(2.0 * da) / da
    qb = c * (ub + u) + e * np.expm1(-2.0 * db) / db
    q[a_half] = qa[a_half] / db[a_half]
    q[~a_half] = qb[~a_half] / da[~a_half]
    if np.any(q <= 0.0):
        raise QuadratureError("non-positive reduced gap; turning points inconsistent")
    return 2.0 * (math.pi / n) * float(np.sum(H * np.exp(rho) / np.sqrt(q)))


def period(H: float, params: PhysParams, eq: Equilibrium | None = None, *,
           tp: TurningPoints | None = None, rtol: float = QUAD_RTOL) -> float:
    """``T(H)`` by midpoint quadrature in the endpoint angle, doubled until converged."""
    eq = eq or equilibrium(params)
    _check_energy(H, eq)
    tp = tp or turning_points(H, params, eq)
    rho_a, rho_b = math.log(tp.r_a), math.log(tp.r_b)
    n = QUAD_N0
    prev = _period_sum(n, params, H, rho_a, rho_b)
    while n < QUAD_NMAX:
        n *= 2
        cur = _period_sum(n, params, H, rho_a, rho_b)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise QuadratureError(f"period quadrature not converged at H={H!r} with {n} nodes")


def min_period(params: PhysParams) -> tuple[float, float]:
    """``(T0_lin, T0_lemma3)``: the linearized period at the centre and the alternative closed-form value."""
    eq = equilibrium(params)
    return eq.T0_lin, eq.T0_lemma3


def invert_period(T: float, params: PhysParams, eq: Equilibrium | None = None, *,
                  rtol: float = 1e-13) -> float:
    """Unique energy with ``period(H) = T``; requires ``T > T0_lin``."""
    eq = eq or equilibrium(params)
    if not (math.isfinite(T) and T > eq.T0_lin):
        raise ValueError(f"period {T!r} is not above the minimal period T0_lin = {eq.T0_lin!r}")

    def fn(s):
        return period(eq.H0 + s, params, eq) - T

    lo = 1e-6 * eq.H0
    while fn(lo) >= 0.0:
        lo *= 0.01
        if lo < 1e-14 * eq.H0:
            raise ValueError(f"period {T!r} is too close to T0_lin to resolve")
    hi = 2.0 * lo
    while fn(hi) < 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12 * eq.H0:
            raise ValueError(f"no energy reaches period {T!r}")
    s = brentq(fn, lo, hi, xtol=1e-15 * eq.H0, rtol=rtol, maxiter=300)
    return eq.H0 + s


@dataclass(frozen=True)
class PeriodMapTable:
    """Rows ``(H, T, r_a, r_b)`` sorted by ``H``."""

    entries: np.ndarray
    H0: float
    T0: float

    @property
    def H(self):
        return self.entries[:, 0]

    @property
    def T(self):
        return self.entries[:, 1]

    @property
    def r_a(self):
        return self.entries[:, 2]

    @property
    def r_b(self):
        return self.entries[:, 3]

    def __len__(self):
        return self.entries.shape[0]

    def to_csv(self, path) -> None:
        from .io import atomic_write_text, fmt

        lines = ["H,T,r_a,r_b"]
        lines += [",".join(fmt(v) for v in row) for row in self.entries]
        atomic_write_text(Path(path), "\n".join(lines) + "\n")


def build_table(params: PhysParams, H_max: float, n_points: int, *, s_min: float | None = None,
                rtol: float = QUAD_RTOL) -> PeriodMapTable:
    """Tabulate ``T(H)`` on a grid geometric in ``H - H0`` from ``s_min`` to ``H_max - H0``.

    Raises :class:`MonotonicityError` on the first non-increasing pair.
    """
    eq = equilibrium(params)
    if not H_max > eq.H0:
        raise ValueError(f"H_max must exceed H0 = {eq.H0!r}")
    if n_points < 2:
        raise ValueError("need at least 2 points")
    span = H_max - eq.H0
    s_min = 1e-5 * span if s_min is None else s_min
    if not 0.0 < s_min < span:
        raise ValueError("s_min must lie in (0, H_max - H0)")
    s = np.geomspace(s_min, span, n_points)
    rows = []
    for si in s:
        H = eq.H0 + float(si)
        tp = turning_points(H, params, eq)
        rows.append((H, period(H, params, eq, tp=tp, rtol=rtol), tp.r_a, tp.r_b))
    entries = np.array(rows)
    for i in range(len(rows) - 1):
        if not entries[i + 1, 1] > entries[i, 1]:
            raise MonotonicityError(i, tuple(entries[i]), tuple(entries[i + 1]))
    return PeriodMapTable(entries=entries, H0=eq.H0, T0=eq.T0_lin)

