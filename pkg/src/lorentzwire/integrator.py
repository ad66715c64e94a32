"""Time integration of the reduced system.

All trajectories go through one adaptive DOP853 kernel (compiled when
available). Output times are hit exactly, so a trajectory sampled on a
grid is reproducible independent of the grid used elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from . import _backend
from .model import PhysParams, RadialState, equilibrium, hamiltonian

TOL_MIN = 1e-13
TOL_MAX = 1e-6
MAX_STEPS = 5_000_000
_CONSTANT = np.array([0.0])


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OrbitSample:
    """Trajectory samples ``y[i] = (r, pr)`` at ``times[i]``."""

    times: np.ndarray
    y: np.ndarray = dc_field(repr=False)
    energy: float
    period: float | None = None
    steps: int = 0

    @property
    def r(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def pr(self) -> np.ndarray:
        return self.y[:, 1]

    @property
    def states(self) -> list:
        return [RadialState(float(a), float(b)) for a, b in self.y]

    def __len__(self):
        return self.times.size


def _check_tol(tol):
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise ValueError(f"tol must lie in [{TOL_MIN:g}, {TOL_MAX:g}], got {tol!r}")


def encode_field(params: PhysParams, field) -> np.ndarray:
    if field is None or params.k == 0.0 or field.is_constant:
        return _CONSTANT
    return field.encode()


def _run(y0, t_eval, params, fld, tol, backend, max_steps):
    kern = _backend.get(backend)
    t_eval = np.ascontiguousarray(t_eval, dtype=float)
    out, acc, rej, status = kern.integrate(
        np.asarray(y0, dtype=float), t_eval, params.kernel_vector(), fld,
        tol, tol * 1e-2, int(max_steps))
    out = np.asarray(out, dtype=float)
    if status == 1:
        raise IntegrationError(f"step size underflow near t={_last_time(t_eval, out):.6g} "
                               "(r -> 0 or stiff field)")
    if status == 2:
        raise IntegrationError(f"step budget of {max_steps} exhausted")
    return out, acc + rej


def _last_time(t_eval, out):
    ok = np.isfinite(out[:, 0])
    return t_eval[ok][-1] if ok.any() else t_eval[0]


def integrate(initial: RadialState, t0: float, t1: float, params: PhysParams, field=None, *,
              tol: float = 1e-11, t_eval=None, n_out: int = 201, backend: str | None = None,
              max_steps: int = MAX_STEPS) -> OrbitSample:
    """Integrate from ``t0`` to ``t1`` (``t1 > t0``) with relative tolerance ``tol``.

    Output is at ``t_eval`` if given (must start at ``t0`` and end at ``t1``),
    else on ``n_out`` uniform times.
    """
    _check_tol(tol)
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if t_eval is None:
        ts = np.linspace(t0, t1, max(int(n_out), 2))
    else:
        ts = np.asarray(t_eval, dtype=float)
        if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0.0):
            raise ValueError("t_eval must be strictly increasing with >= 2 entries")
        if ts[0] != t0 or ts[-1] != t1:
            raise ValueError("t_eval must start at t0 and end at t1")
    y, steps = _run(initial.as_array(), ts, params, encode_field(params, field), tol, backend, max_steps)
    return OrbitSample(times=ts, y=y, energy=hamiltonian(initial, params), steps=steps)


def flow(y0, t0: float, t1: float, params: PhysParams, field=None, *, tol: float = 1e-11,
         backend: str | None = None, fld: np.ndarray | None = None) -> np.ndarray:
    """State at ``t1`` starting from ``y0`` at ``t0`` (either time direction)."""
    if t1 == t0:
        return np.array(y0, dtype=float)
    if fld is None:
        fld = encode_field(params, field)
    out, _ = _run(y0, np.array([t0, t1]), params, fld, tol, backend, MAX_STEPS)
    return out[-1]


def return_time(initial: RadialState, params: PhysParams, *, tol: float = 1e-11,
                backend: str | None = None, horizon_factor: float = 1000.0) -> float:
    """First return time to ``pr = 0`` crossed in the starting direction (unperturbed system).

    The crossing is bracketed on a grid of ``T0_lin/64`` and polished by Brent
    on the length of a re-integrated final step.
    """
    if params.k != 0.0:
        raise ValueError("return_time is defined for the unperturbed system (k = 0)")
    _check_tol(tol)
    eq = equilibrium(params)
    if abs(initial.pr) > 1e-14 * max(1.0, abs(initial.r)):
        raise ValueError("initial state must lie on the section pr = 0")
    if abs(initial.r - eq.r_bar) <= 1e-14 * eq.r_bar:
        raise ValueError("the equilibrium has no return time")
    p0 = params.replace(k=0.0)
    fld = _CONSTANT
    kern = _backend.get(backend)
    _, dpr0 = kern.rhs(0.0, initial.r, 0.0, p0.kernel_vector(), fld)
    s0 = np.sign(dpr0)
    dt = eq.T0_lin / 64.0
    horizon = horizon_factor * eq.T0_lin
    chunk = 256
    t_start = 0.0
    y_start = initial.as_array()
    first = True
    while t_start < horizon:
        ts = t_start + dt * np.arange(chunk + 1)
        ys, _ = _run(y_start, ts, p0, fld, tol, backend, MAX_STEPS)
        pr = ys[:, 1]
        lo = 1 if first else 0
        for i in range(lo, chunk):
            if np.sign(pr[i]) == -s0 and np.sign(pr[i + 1]) != -s0:
                if pr[i + 1] == 0.0:
                    return float(ts[i + 1])
                yi = ys[i]

                def g(tau, yi=yi, ti=ts[i]):
                    return flow(yi, ti, ti + tau, p0, tol=tol, backend=backend, fld=fld)[1]

                tau = brentq(g, 0.0, dt, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
                return float(ts[i] + tau)
        first = False
        t_start = ts[-1]
        y_start = ys[-1]
    raise IntegrationError(f"no return to pr = 0 within {horizon:.6g}; check parameters")
