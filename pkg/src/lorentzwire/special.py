"""Bessel functions of the first and second kind, orders 0 and 1.

Power series below ``SERIES_MAX`` and the Hankel asymptotic expansion
above it. The scalar routines are mirrored line for line in the compiled
kernel; keep the two in step.
"""
import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
SERIES_MAX = 12.0
_TWO_OVER_PI = 2.0 / math.pi


def _series_j(x):
    """Return (J0, J1, S0, S1) where S0, S1 are the harmonic-number sums
    entering the Y0 and Y1 series."""
    q = 0.25 * x * x
    t0 = 1.0          # (-q)^k / (k!)^2
    t1 = 0.5 * x      # (-q)^k (x/2) / (k! (k+1)!)
    j0 = t0
    j1 = t1
    s0 = 0.0          # sum (-1)^(k+1) H_k q^k / (k!)^2
    s1 = (2.0 * 0.0 + 1.0) * t1  # sum (H_k + H_{k+1}) * term1 ; H_0 + H_1 = 1
    hk = 0.0
    k = 0
    while True:
        k += 1
        t0 *= -q / (k * k)
        t1 *= -q / (k * (k + 1))
        hk += 1.0 / k
        j0 += t0
        j1 += t1
        s0 -= hk * t0
        s1 += (2.0 * hk + 1.0 / (k + 1)) * t1
        if abs(t0) < 1e-17 * max(abs(j0), 1e-300) and abs(t1) < 1e-17 * max(abs(j1), 1e-300) and k > 3:
            break
        if k > 200:
            break
    return j0, j1, s0, s1


def _hankel_pq(nu, x):
    mu = 4.0 * nu * nu
    z = 8.0 * x
    p = 1.0
    q = 0.0
    term = 1.0
    last = math.inf
    k = 0
    while k < 60:
        k += 1
        term *= (mu - (2 * k - 1) ** 2) / (k * z)
        if abs(term) > last:
            break
        last = abs(term)
        # k odd feeds Q with sign (-1)^((k-1)/2); k even feeds P with (-1)^(k/2)
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += term if (k // 2) % 2 == 0 else -term
        if last < 1e-17:
            break
    return p, q


def bessel_all(x):
    """Return (J0, Y0, J1, Y1) at a scalar ``x > 0``."""
    if not x > 0.0:
        raise ValueError(f"Bessel argument must be positive, got {x!r}")
    if x <= SERIES_MAX:
        j0, j1, s0, s1 = _series_j(x)
        lg = math.log(0.5 * x) + EULER_GAMMA
        y0 = _TWO_OVER_PI * (lg * j0 + s0)
        # Y1 = -2/(pi x) + (2/pi) ln(x/2) J1 - (1/pi) sum (psi(k+1)+psi(k+2)) term1
        # with psi(k+1) = H_k - gamma
        y1 = -_TWO_OVER_PI / x + _TWO_OVER_PI * lg * j1 - (s1 / math.pi)
        return j0, y0, j1, y1
    amp = math.sqrt(_TWO_OVER_PI / x)
    p0, q0 = _hankel_pq(0.0, x)
    p1, q1 = _hankel_pq(1.0, x)
    chi0 = x - 0.25 * math.pi
    chi1 = x - 0.75 * math.pi
    c0, s0 = math.cos(chi0), math.sin(chi0)
    c1, s1 = math.cos(chi1), math.sin(chi1)
    return (amp * (p0 * c0 - q0 * s0), amp * (p0 * s0 + q0 * c0),
            amp * (p1 * c1 - q1 * s1), amp * (p1 * s1 + q1 * c1))


def _vectorized(index):
    def fn(x):
        xs = np.asarray(x, dtype=float)
        out = np.array([bessel_all(float(v))[index] for v in xs.ravel()])
        if xs.ndim == 0:
            return float(out[0])
        return out.reshape(xs.shape)
    return fn


j0 = _vectorized(0)
y0 = _vectorized(1)
j1 = _vectorized(2)
y1 = _vectorized(3)
