"""Reduced radial model of a relativistic charge near a straight wire.

Units: light speed and charge-to-mass ratio are 1. The wire carries
``I0 + k*I1(t)`` along the z axis; conservation of the angular momentum
``L`` and the canonical z-momentum ``pz`` reduces the motion to the planar
Hamiltonian system in ``(r, pr)`` implemented here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from ._roots import grow_bracket, newton_bisect

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysParams:
    """Physical constants and conserved momenta.

    Parameters
    ----------
    I0 : float
        Base current, > 0.
    L : float
        Angular momentum, > 0.
    pz : float
        Canonical linear momentum along the wire.
    T1 : float
        Period of the current modulation.
    k : float
        Modulation amplitude, >= 0.
    mu0 : float
        Vacuum permeability. The default 2*pi makes the coupling ``c``
        equal to ``I0``.
    """

    I0: float = 1.0
    L: float = 1.0
    pz: float = 1.0
    T1: float = 7.0
    k: float = 0.0
    mu0: float = TWO_PI

    def __post_init__(self):
        for name in ("I0", "L", "T1", "mu0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if not (math.isfinite(self.k) and self.k >= 0.0):
            raise ValueError(f"k must be finite and >= 0, got {self.k!r}")
        if not math.isfinite(self.pz):
            raise ValueError(f"pz must be finite, got {self.pz!r}")

    @property
    def omega1(self) -> float:
        return TWO_PI / self.T1

    @property
    def kappa(self) -> float:
        """mu0 / (2 pi)."""
        return self.mu0 / TWO_PI

    @property
    def c(self) -> float:
        """Coupling constant mu0*I0/(2 pi)."""
        return self.kappa * self.I0

    def replace(self, **changes) -> "PhysParams":
        vals = {k: getattr(self, k) for k in ("I0", "L", "pz", "T1", "k", "mu0")}
        vals.update(changes)
        return PhysParams(**vals)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("I0", "L", "pz", "T1", "k", "mu0")}

    def kernel_vector(self) -> np.ndarray:
        """Packed ``(kappa, I0, L, pz, k, omega1)`` as consumed by the integration kernels."""
        return np.array([self.kappa, self.I0, self.L, self.pz, self.k, self.omega1])


CANONICAL = PhysParams(I0=1.0, L=1.0, pz=1.0, T1=7.0, k=0.0)


@dataclass(frozen=True)
class DerivedParams:
    c: float
    I_sub: float
    K_sub: float
    x0: float
    a_sub: float


@dataclass(frozen=True)
class RadialState:
    r: float
    pr: float

    def __post_init__(self):
        if not np.all(np.asarray(self.r) > 0.0):
            raise ValueError(f"radius must be > 0, got {self.r!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.pr], dtype=float)

    @classmethod
    def from_array(cls, y) -> "RadialState":
        return cls(float(y[0]), float(y[1]))


@dataclass(frozen=True)
class Equilibrium:
    r_bar: float
    H0: float
    omega_lin: float
    T0_lin: float
    T0_lemma3: float
    residual: float


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0.0):
        raise ValueError("radius must be > 0")
    return r


def derived_constants(params: PhysParams) -> DerivedParams:
    """Constants of the rescaled profile ``f(x) = 1 + I ln^2 x + K x^-2``.

    ``x0`` solves ``K = I x0^2 ln x0``; the solve runs on ``a = ln x0``
    where the left side ``I a exp(2a)`` is increasing for ``a > 0``.
    """
    c = params.c
    I_sub = c * c
    K_sub = params.L ** 2 * math.exp(2.0 * params.pz / c)
    target = K_sub / I_sub

    def fn(a):
        return a * math.exp(2.0 * a) - target

    def dfn(a):
        return (1.0 + 2.0 * a) * math.exp(2.0 * a)

    lo, hi = grow_bracket(fn, 0.0, 0.5)
    a = newton_bisect(fn, dfn, lo, hi)
    if not a > 0.0:
        raise ValueError("no root with x0 > 1: inconsistent parameters")
    return DerivedParams(c=c, I_sub=I_sub, K_sub=K_sub, x0=math.exp(a), a_sub=a)


def hamiltonian(state: RadialState, params: PhysParams):
    """Energy of the unperturbed system, ``sqrt(1 + (pz + c ln r)^2 + pr^2 + L^2/r^2)``."""
    r = _check_radius(state.r)
    pr = np.asarray(state.pr, dtype=float)
    u = params.pz + params.c * np.log(r)
    h = np.sqrt(1.0 + u * u + pr * pr + (params.L / r) ** 2)
    return float(h) if h.ndim == 0 else h


def _potential_terms(t, r, params, field):
    """Return ``(u, dA_dr_neg)``: ``pz - A`` and ``-dA/dr`` with the full field."""
    u = params.pz + params.c * np.log(r)
    dneg = params.c / r
    if field is not None and params.k != 0.0 and not field.is_constant:
        a, ar = field.potential(t, r)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(ar))):
            raise FloatingPointError("non-finite field evaluation")
        u = u + params.kappa * params.k * a
        dneg = dneg + params.kappa * params.k * ar
    return u, dneg


def vector_field(t, state: RadialState, params: PhysParams, field=None):
    """Right-hand side ``(dr/dt, dpr/dt)`` of the reduced system.

    Uses the full vector potential ``A = -kappa (I0 ln r + k a(t, r))``
    without truncation in ``k``. ``field=None`` means a constant current.
    """
    r = _check_radius(state.r)
    pr = np.asarray(state.pr, dtype=float)
    u, dneg = _potential_terms(t, r, params, field)
    L2 = params.L ** 2
    H = np.sqrt(1.0 + u * u + pr * pr + L2 / (r * r))
    dr = pr / H
    dpr = (L2 / r ** 3 - u * dneg) / H
    if dr.ndim == 0:
        return float(dr), float(dpr)
    return dr, dpr


def _first_order(state, params, a, ar):
    r = _check_radius(state.r)
    pr = np.asarray(state.pr, dtype=float)
    kap = params.kappa
    c = params.c
    u0 = params.pz + c * np.log(r)
    L2 = params.L ** 2
    H2 = 1.0 + u0 * u0 + pr * pr + L2 / (r * r)
    H = np.sqrt(H2)
    H3 = H2 * H
    d1 = -kap * pr * u0 * a / H3
    num = L2 / r ** 3 - c * u0 / r
    d2 = -(kap * c * a / r + kap * u0 * ar) / H - num * kap * u0 * a / H3
    return d1, d2


def perturbation_coefficients(t, state: RadialState, params: PhysParams, field):
    """First-order coefficients ``(dF1/dk, dF2/dk)`` at ``k = 0``."""
    a, ar = field.potential(t, np.asarray(state.r, dtype=float))
    d1, d2 = _first_order(state, params, a, ar)
    if np.ndim(d1) == 0:
        return float(d1), float(d2)
    return d1, d2


def profile_factors(state: RadialState, params: PhysParams, field, *, part="sine"):
    """Time-free factors ``(G1, G2)`` of the first-order coefficients.

    For the fundamental harmonic ``a = D(r) sin(w t) + E(r) cos(w t)`` the
    coefficients are ``G1 sin(w t), G2 sin(w t)`` from ``D`` plus the same
    with ``E`` and ``cos``. ``part`` selects which profile to use.
    """
    r = np.asarray(state.r, dtype=float)
    if part == "sine":
        D, Dr = field.sine_profile(r)
    elif part == "cosine":
        D, Dr = field.cosine_profile(r)
    else:
        raise ValueError(f"part must be 'sine' or 'cosine', got {part!r}")
    return _first_order(state, params, D, Dr)


def _eq11_residual(rho, params):
    c = params.c
    return params.pz + c * rho - (params.L ** 2 / c) * math.exp(-2.0 * rho)


def equilibrium(params: PhysParams) -> Equilibrium:
    """Unique centre ``(r_bar, 0)`` of the unperturbed system.

    Solved in ``rho = ln r`` where ``pz + c rho - (L^2/c) exp(-2 rho)`` is
    strictly increasing.
    """
    c = params.c
    L2 = params.L ** 2

    def fn(rho):
        return _eq11_residual(rho, params)

    def dfn(rho):
        return c + 2.0 * (L2 / c) * math.exp(-2.0 * rho)

    step = 0.5 if fn(0.0) < 0.0 else -0.5
    lo, hi = grow_bracket(fn, 0.0, step)
    rho = newton_bisect(fn, dfn, lo, hi)
    r_bar = math.exp(rho)
    u = params.pz + c * rho
    H0 = math.sqrt(1.0 + u * u + L2 / (r_bar * r_bar))
    stiffness = 2.0 * L2 / r_bar ** 4 + c * c / r_bar ** 2
    omega_lin = math.sqrt(stiffness) / H0
    lemma3_den = (c - params.pz - c * rho) * c / r_bar ** 2 + 3.0 * L2 / r_bar ** 4
    T0_lemma3 = math.sqrt(2.0 * math.pi ** 2 * H0 * H0 / lemma3_den)
    scale = max(abs(params.pz), abs(c * rho), L2 / c / r_bar ** 2)
    return Equilibrium(
        r_bar=r_bar,
        H0=H0,
        omega_lin=omega_lin,
        T0_lin=TWO_PI / omega_lin,
        T0_lemma3=T0_lemma3,
        residual=abs(fn(rho)) / scale,
    )


@dataclass(frozen=True)
class FullMotion:
    """Cylindrical trajectory rebuilt from a radial time series."""

    t: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    r_dot: np.ndarray
    theta_dot: np.ndarray
    z_dot: np.ndarray
    energy: np.ndarray = field(repr=False)

    @property
    def speed_squared(self) -> np.ndarray:
        return self.r_dot ** 2 + (self.r * self.theta_dot) ** 2 + self.z_dot ** 2


def reconstruct_full_motion(t, r, pr, params: PhysParams, field=None, *, theta0=0.0, z0=0.0) -> FullMotion:
    """Velocities from the momenta definitions; ``theta``, ``z`` by cumulative Simpson."""
    t = np.asarray(t, dtype=float)
    r = _check_radius(r)
    pr = np.asarray(pr, dtype=float)
    if t.ndim != 1 or t.shape != r.shape or r.shape != pr.shape:
        raise ValueError("t, r, pr must be 1-d arrays of equal length")
    if np.any(np.diff(t) <= 0.0):
        raise ValueError("times must be strictly increasing")
    u, _ = _potential_terms(t, r, params, field)
    H = np.sqrt(1.0 + u * u + pr * pr + (params.L / r) ** 2)
    r_dot = pr / H
    theta_dot = params.L / (r * r * H)
    z_dot = u / H
    v2 = r_dot ** 2 + (r * theta_dot) ** 2 + z_dot ** 2
    if np.any(v2 >= 1.0):
        raise ValueError("reconstructed speed reaches light speed; inconsistent input series")
    if t.size >= 3:
        theta = theta0 + cumulative_simpson(theta_dot, x=t, initial=0.0)
        z = z0 + cumulative_simpson(z_dot, x=t, initial=0.0)
    else:
        theta = theta0 + np.concatenate([[0.0], np.cumsum(0.5 * (theta_dot[1:] + theta_dot[:-1]) * np.diff(t))])
        z = z0 + np.concatenate([[0.0], np.cumsum(0.5 * (z_dot[1:] + z_dot[:-1]) * np.diff(t))])
    return FullMotion(t=t, r=r, theta=theta, z=z, r_dot=r_dot, theta_dot=theta_dot, z_dot=z_dot, energy=H)
