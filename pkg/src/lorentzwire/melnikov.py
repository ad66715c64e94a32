"""Melnikov functions for the resonant orbits of the unperturbed system.

For the resonance ``T(H_n) = n T1`` the subharmonic Melnikov function is

    M_n(t0) = int_0^{n T1} w(gamma_n(t)) sin(w1 (t - t0)) dt

with ``w = F1 G2 - F2 G1`` the wedge of the unperturbed field with the
sine-profile factors of the first-order perturbation. It is an exact
sinusoid in ``t0``:

    M_n(t0) = (n T1 / 2) sqrt(a^2 + b^2) sin(w1 t0 + phi),
    a, b = (2 / (n T1)) int w cos(w1 t), w sin(w1 t).

A cosine profile ``E`` adds ``int w_E cos(w1 (t - t0))``, which folds into
the same pair as ``a - b_E`` and ``b + a_E``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import integrator
from .model import PhysParams, RadialState, _check_radius, equilibrium, profile_factors
from .periodmap import invert_period, turning_points

N_SAMPLES = 4096
MAX_SAMPLES = 1 << 17
RES_RTOL = 1e-9
SIMPLE_RTOL = 1e-10


class NoResonance(ValueError):
    pass


@dataclass(frozen=True)
class MelnikovResult:
    n: int
    H_n: float
    a: float
    b: float
    amplitude: float
    phase: float
    zeros: tuple
    simple: bool
    T1: float

    def value(self, t0):
        """Closed-form ``M_n(t0)``."""
        w1 = 2.0 * math.pi / self.T1
        t0 = np.asarray(t0, dtype=float)
        v = 0.5 * self.n * self.T1 * (-self.a * np.sin(w1 * t0) + self.b * np.cos(w1 * t0))
        return float(v) if v.ndim == 0 else v

    def as_dict(self) -> dict:
        return {"n": self.n, "H_n": self.H_n, "a": self.a, "b": self.b,
                "amplitude": self.amplitude, "phase": self.phase,
                "zeros": list(self.zeros), "simple": self.simple}


def resonant_energy(n: int, params: PhysParams) -> float:
    """``H_n`` with ``T(H_n) = n T1``."""
    if int(n) != n or n < 1:
        raise ValueError(f"resonance order must be a positive integer, got {n!r}")
    p0 = params.replace(k=0.0)
    eq = equilibrium(p0)
    if not n * params.T1 > eq.T0_lin:
        raise NoResonance(f"n*T1 = {n * params.T1!r} does not exceed T0_lin = {eq.T0_lin!r}; "
                          f"no resonance of order {n}")
    return invert_period(n * params.T1, p0, eq)


def resonant_orbit(n: int, params: PhysParams, *, n_samples: int = N_SAMPLES, tol: float = 1e-11,
                   start: str = "r_b", backend: str | None = None) -> integrator.OrbitSample:
    """Closed orbit ``gamma_n`` sampled at ``n_samples + 1`` uniform times on ``[0, n T1]``.

    ``start`` picks the initial turning point (``r_b`` or ``r_a``).
    """
    H = resonant_energy(n, params)
    p0 = params.replace(k=0.0)
    tp = turning_points(H, p0)
    if start not in ("r_a", "r_b"):
        raise ValueError("start must be 'r_a' or 'r_b'")
    r0 = tp.r_b if start == "r_b" else tp.r_a
    ts = np.linspace(0.0, n * params.T1, n_samples + 1)
    orb = integrator.integrate(RadialState(r0, 0.0), 0.0, ts[-1], p0, tol=tol, t_eval=ts, backend=backend)
    return integrator.OrbitSample(times=orb.times, y=orb.y, energy=H, period=n * params.T1, steps=orb.steps)


def closure_residual(orbit: integrator.OrbitSample) -> float:
    return float(np.max(np.abs(orbit.y[-1] - orbit.y[0])))


def _u0_H2(r, pr, params):
    u0 = params.pz + params.c * np.log(r)
    H2 = 1.0 + u0 * u0 + pr * pr + params.L ** 2 / (r * r)
    return u0, H2


def _profile(field, r, part):
    return field.sine_profile(r) if part == "sine" else field.cosine_profile(r)


def wedge_integrand(state: RadialState, params: PhysParams, field, *, part: str = "sine"):
    """Closed form ``-kappa (c D / r + (pz + c ln r) D') pr / H^2``."""
    r = _check_radius(state.r)
    pr = np.asarray(state.pr, dtype=float)
    D, Dr = _profile(field, r, part)
    u0, H2 = _u0_H2(r, pr, params)
    v = -params.kappa * (params.c * D / r + u0 * Dr) * pr / H2
    return float(v) if np.ndim(v) == 0 else v


def wedge_assembled(state: RadialState, params: PhysParams, field, *, part: str = "sine"):
    """``F1 G2 - F2 G1`` from the unperturbed field and the perturbation factors."""
    r = _check_radius(state.r)
    pr = np.asarray(state.pr, dtype=float)
    u0, H2 = _u0_H2(r, pr, params)
    H = np.sqrt(H2)
    F1 = pr / H
    F2 = (params.L ** 2 / r ** 3 - params.c * u0 / r) / H
    G1, G2 = profile_factors(state, params, field, part=part)
    v = F1 * G2 - F2 * G1
    return float(v) if np.ndim(v) == 0 else v


def _samples(orbit, params, field):
    """Wedge samples on the periodic grid (endpoint dropped)."""
    st = RadialState(orbit.r[:-1], orbit.pr[:-1])
    wD = wedge_integrand(st, params, field, part="sine")
    wE = wedge_integrand(st, params, field, part="cosine") if field.has_cosine else None
    return orbit.times[:-1], wD, wE


def _fourier(t, w, w1):
    """``(a, b)`` with the ``2/period`` normalization; trapezoid on the periodic grid."""
    return 2.0 * float(np.mean(w * np.cos(w1 * t))), 2.0 * float(np.mean(w * np.sin(w1 * t)))


def _coefficients(t, wD, wE, w1):
    a, b = _fourier(t, wD, w1)
    if wE is not None:
        aE, bE = _fourier(t, wE, w1)
        a, b = a - bE, b + aE
    return a, b


def _resolved(n, params, field, n_samples, tol, start, backend):
    """Orbit and wedge samples at a resolution where halving changes ``(a, b)`` by < RES_RTOL."""
    w1 = params.omega1
    while True:
        orbit = resonant_orbit(n, params, n_samples=n_samples, tol=tol, start=start, backend=backend)
        t, wD, wE = _samples(orbit, params, field)
        a, b = _coefficients(t, wD, wE, w1)
        ah, bh = _coefficients(t[::2], wD[::2], None if wE is None else wE[::2], w1)
        scale = max(math.hypot(a, b), 1e-300)
        rms = float(np.sqrt(np.mean(wD ** 2) + (0.0 if wE is None else np.mean(wE ** 2))))
        err = max(abs(a - ah), abs(b - bh))
        if err <= RES_RTOL * max(scale, SIMPLE_RTOL * rms) or n_samples >= MAX_SAMPLES:
            return orbit, t, wD, wE, a, b, rms
        n_samples *= 2


def melnikov_value(n: int, t0, params: PhysParams, field, *, n_samples: int = N_SAMPLES,
                   tol: float = 1e-11, start: str = "r_b", backend: str | None = None):
    """Direct quadrature of ``M_n(t0)``; ``t0`` may be an array."""
    _, t, wD, wE, _, _, _ = _resolved(n, params, field, n_samples, tol, start, backend)
    return _direct(t, wD, wE, np.asarray(t0, dtype=float), params.omega1, n * params.T1)


def _direct(t, wD, wE, t0, w1, span):
    ph = w1 * (t[None, :] - np.atleast_1d(t0)[:, None])
    v = np.sin(ph) @ wD
    if wE is not None:
        v = v + np.cos(ph) @ wE
    v = v * (span / t.size)
    return float(v[0]) if t0.ndim == 0 else v


def _zeros(phase, w1, n, T1):
    out = []
    k = math.ceil(phase / math.pi)
    while len(out) < 2 * n:
        z = (k * math.pi - phase) / w1
        if z >= n * T1:
            break
        if z >= 0.0:
            out.append(z)
        k += 1
    return tuple(out)


def melnikov_fourier(n: int, params: PhysParams, field, *, n_samples: int = N_SAMPLES,
                     tol: float = 1e-11, start: str = "r_b", backend: str | None = None) -> MelnikovResult:
    """Fourier pair, amplitude, phase and zero set of ``M_n``."""
    orbit, t, wD, wE, a, b, rms = _resolved(n, params, field, n_samples, tol, start, backend)
    span = n * params.T1
    amp = 0.5 * span * math.hypot(a, b)
    phase = math.atan2(b, -a)
    simple = amp > SIMPLE_RTOL * span * rms
    zeros = _zeros(phase, params.omega1, n, params.T1) if simple else ()
    return MelnikovResult(n=int(n), H_n=orbit.energy, a=a, b=b, amplitude=amp, phase=phase,
                          zeros=zeros, simple=bool(simple), T1=params.T1)


def orbit_point(n: int, t0: float, params: PhysParams, *, tol: float = 1e-11, start: str = "r_b",
                backend: str | None = None) -> RadialState:
    """``gamma_n(t0)``: the unperturbed resonant orbit ``t0`` after its start point."""
    H = resonant_energy(n, params)
    p0 = params.replace(k=0.0)
    tp = turning_points(H, p0)
    r0 = tp.r_b if start == "r_b" else tp.r_a
    t0 = math.fmod(t0, n * params.T1)
    y = integrator.flow([r0, 0.0], 0.0, t0, p0, tol=tol, backend=backend)
    return RadialState(float(y[0]), float(y[1]))


def fit_sinusoid(t0, values, omega):
    """Least-squares ``c0 + c1 sin + c2 cos``; returns coefficients and max residual."""
    t0 = np.asarray(t0, dtype=float)
    A = np.column_stack([np.ones_like(t0), np.sin(omega * t0), np.cos(omega * t0)])
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    return coef, float(np.max(np.abs(A @ coef - values)))
