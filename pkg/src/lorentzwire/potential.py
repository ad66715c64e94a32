"""Vector potential of the wire current.

The modulated part is the retarded integral

    a(t, r) = int_r^inf I1(t - u) / sqrt(u^2 - r^2) du

of a periodic, zero-mean current ``I1``. Near the lower limit the square
root singularity is removed with ``u = r cosh s``; the oscillatory tail is
summed over sub-blocks of one period and the partial sums are smoothed by
repeated one-period moving averages.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import special

HALF_PI = 0.5 * math.pi
_ACOSH2 = math.acosh(2.0)


class ConvergenceError(RuntimeError):
    """Block-averaged tail failed to settle; ``spread`` is the last partial-sum spread."""

    def __init__(self, message, spread):
        super().__init__(f"{message} (spread {spread:.3e})")
        self.spread = spread


@dataclass(frozen=True)
class PotentialSample:
    t: float
    r: float
    value: float
    dvalue_dr: float


@dataclass(frozen=True)
class Waveform:
    """Periodic current ``I1(t) = sum_m sin_m sin(m w t) + cos_m cos(m w t)`` (m >= 1).

    ``mean`` is the constant term left in the samples; it must be zero for
    the retarded integral to converge.
    """

    period: float
    sin_coeffs: np.ndarray
    cos_coeffs: np.ndarray
    mean: float = 0.0

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.period

    @property
    def n_harmonics(self) -> int:
        return len(self.sin_coeffs)

    @classmethod
    def sine(cls, period: float, amplitude: float = 1.0) -> "Waveform":
        return cls(period, np.array([amplitude]), np.array([0.0]))

    @classmethod
    def cosine(cls, period: float, amplitude: float = 1.0) -> "Waveform":
        return cls(period, np.array([0.0]), np.array([amplitude]))

    @classmethod
    def from_samples(cls, values, period: float, *, t0: float = 0.0,
                     enforce_zero_mean: bool = True) -> "Waveform":
        """Trigonometric interpolant of ``N`` uniform samples on ``[t0, t0 + period)``."""
        x = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise ValueError("need at least 3 waveform samples")
        n = x.size
        mean = float(x.mean())
        amp = float(np.max(np.abs(x - mean)))
        if enforce_zero_mean:
            if abs(mean) > 1e-6 * max(amp, 1e-300):
                warnings.warn(f"waveform mean {mean:.3e} subtracted to enforce zero mean", stacklevel=2)
            mean = 0.0
        spec = np.fft.rfft(x) / n
        coef = spec[1:] * np.exp(-2j * math.pi * np.arange(1, spec.size) * t0 / period)
        cos_c = 2.0 * coef.real
        sin_c = -2.0 * coef.imag
        if n % 2 == 0:
            cos_c[-1] *= 0.5
            sin_c[-1] = 0.0
        return cls(float(period), sin_c, cos_c, mean)

    def __call__(self, t):
        return self.mean + self._sum(t, 0)

    def derivative(self, t):
        return self._sum(t, 1)

    def _sum(self, t, order):
        t = np.asarray(t, dtype=float)
        m = np.arange(1, self.n_harmonics + 1)
        ph = np.multiply.outer(t, m * self.omega)
        s, c = np.sin(ph), np.cos(ph)
        if order == 0:
            return s @ self.sin_coeffs + c @ self.cos_coeffs
        mw = m * self.omega
        return c @ (self.sin_coeffs * mw) - s @ (self.cos_coeffs * mw)


def log_potential(r, params):
    """Static part ``I0 ln r``."""
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0.0):
        raise ValueError("radius must be > 0")
    v = params.I0 * np.log(r)
    return float(v) if v.ndim == 0 else v


def log_potential_dr(r, params):
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0.0):
        raise ValueError("radius must be > 0")
    v = params.I0 / r
    return float(v) if v.ndim == 0 else v


def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _near_part(fn, t, r, weight, n_panels, nodes):
    """int_0^{acosh 2} fn(t - r cosh s) * weight(s) ds by composite Gauss-Legendre."""
    x, w = _gauss(nodes)
    edges = np.linspace(0.0, _ACOSH2, n_panels + 1)
    h = np.diff(edges)
    s = (edges[:-1, None] + h[:, None] * x[None, :]).ravel()
    ws = (h[:, None] * w[None, :]).ravel()
    return float(np.sum(fn(t - r * np.cosh(s)) * weight(s) * ws))


def _tail_partial_sums(fn, t, u0, weight, period, m_sub, n_periods, nodes):
    x, w = _gauss(nodes)
    dh = period / m_sub
    n_blocks = m_sub * n_periods
    starts = u0 + dh * np.arange(n_blocks)
    u = (starts[:, None] + dh * x[None, :])
    vals = fn(t - u.ravel()).reshape(u.shape) * weight(u)
    blocks = dh * (vals @ w)
    return np.concatenate([[0.0], np.cumsum(blocks)])


def _iterated_average(seq, window, passes):
    kernel = np.full(window, 1.0 / window)
    out = seq
    for _ in range(passes):
        out = np.convolve(out, kernel, mode="valid")
    return out


def _tail(fn, t, u0, weight, period, *, m_sub, passes, n_periods, tol, max_periods, nodes):
    while True:
        sums = _tail_partial_sums(fn, t, u0, weight, period, m_sub, n_periods, nodes)
        avg = _iterated_average(sums, m_sub, passes)
        # estimate from the sequence truncated at half length
        half = _iterated_average(sums[: len(sums) // 2 + 1], m_sub, passes)
        value = avg[-1]
        spread = abs(value - half[-1])
        if spread <= tol * max(1.0, abs(value)):
            return value, spread
        if n_periods >= max_periods:
            raise ConvergenceError("retarded-potential tail did not converge", spread)
        n_periods *= 2


def delayed_potential(t: float, r: float, waveform: Waveform, *, m_sub: int = 8, passes: int = 6,
                      n_periods: int = 32, tol: float = 1e-11, max_periods: int = 4096) -> PotentialSample:
    """Evaluate ``a(t, r)`` and ``da/dr`` by quadrature.

    The radial derivative uses the absolutely convergent form

        da/dr = -I1(t - r)/r - int_r^inf I1'(t - u) r / (sqrt(u^2 - r^2) (u + sqrt(u^2 - r^2))) du

    obtained by splitting ``u/sqrt(u^2 - r^2)`` off the differentiated kernel.
    """
    if not r > 0.0:
        raise ValueError("radius must be > 0")
    if waveform.mean != 0.0:
        raise ValueError(f"waveform must have zero mean, got {waveform.mean!r}")
    if not np.any(waveform.sin_coeffs) and not np.any(waveform.cos_coeffs):
        return PotentialSample(t, r, 0.0, 0.0)
    T = waveform.period
    top = waveform.n_harmonics
    n_panels = 2 + int(math.ceil(2.0 * r * top / T))
    nodes_tail = max(10, int(math.ceil(3.0 * top / m_sub)) + 8)
    kw = dict(m_sub=m_sub, passes=passes, n_periods=n_periods, tol=tol, max_periods=max_periods, nodes=nodes_tail)

    near = _near_part(waveform, t, r, lambda s: 1.0, n_panels, 20)
    far, _ = _tail(waveform, t, 2.0 * r, lambda u: 1.0 / np.sqrt(u * u - r * r), T, **kw)

    d_near = _near_part(waveform.derivative, t, r, lambda s: np.exp(-s), n_panels, 20)

    def dweight(u):
        root = np.sqrt(u * u - r * r)
        return r / (root * (u + root))

    d_far, _ = _tail(waveform.derivative, t, 2.0 * r, dweight, T, **kw)
    dvalue = -float(waveform(t - r)) / r - d_near - d_far
    return PotentialSample(float(t), float(r), float(near + far), float(dvalue))


def potential_grid(ts, rs, waveform: Waveform, **kw):
    """Evaluate on the outer product grid, ordered by (t index, r index)."""
    out = []
    for t in np.asarray(ts, dtype=float):
        for r in np.asarray(rs, dtype=float):
            out.append(delayed_potential(float(t), float(r), waveform, **kw))
    return out


def _profiles_scalar(omega, r):
    x = omega * r
    if not x > 0.0:
        raise ValueError("omega * r must be > 0")
    j0, y0, j1, y1 = special.bessel_all(x)
    return -HALF_PI * y0, -HALF_PI * j0, HALF_PI * omega * y1, HALF_PI * omega * j1


def harmonic_profiles(omega, r):
    """Sine and cosine radial profiles ``(D, E)`` of the potential of ``I1 = sin(omega t)``.

    ``D = -(pi/2) Y0(omega r)``, ``E = -(pi/2) J0(omega r)``.
    """
    rs = np.asarray(r, dtype=float)
    vals = np.array([_profiles_scalar(omega, float(v))[:2] for v in rs.ravel()])
    if rs.ndim == 0:
        return float(vals[0, 0]), float(vals[0, 1])
    return vals[:, 0].reshape(rs.shape), vals[:, 1].reshape(rs.shape)


def harmonic_profiles_dr(omega, r):
    """Radial derivatives ``(D', E') = (pi/2) omega (Y1, J1)``."""
    rs = np.asarray(r, dtype=float)
    vals = np.array([_profiles_scalar(omega, float(v))[2:] for v in rs.ravel()])
    if rs.ndim == 0:
        return float(vals[0, 0]), float(vals[0, 1])
    return vals[:, 0].reshape(rs.shape), vals[:, 1].reshape(rs.shape)


def load_waveform_csv(path, period: float | None = None) -> Waveform:
    """Read one period of ``I1`` from a CSV with columns ``t, I1`` on a uniform grid.

    If ``period`` is given and the last sample sits at ``t0 + period`` it is
    treated as the repeat of the first and dropped.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "t" not in rows[0] or "I1" not in rows[0]:
        raise ValueError(f"{path}: expected columns 't' and 'I1'")
    t = np.array([float(row["t"]) for row in rows])
    x = np.array([float(row["I1"]) for row in rows])
    dt = np.diff(t)
    if t.size < 3 or np.any(dt <= 0.0) or np.ptp(dt) > 1e-9 * dt.mean():
        raise ValueError(f"{path}: time column must be a uniform increasing grid")
    h = dt.mean()
    if period is not None and abs(t[-1] - t[0] - period) <= 1e-9 * period:
        t, x = t[:-1], x[:-1]
    elif period is None:
        period = (t[-1] - t[0]) + h
    return Waveform.from_samples(x, period, t0=float(t[0]))
