"""Pure-Python integration kernel (fallback for the compiled ``_kernel``).

Adaptive DOP853 for the reduced system with the field in its encoded
layout (see ``FieldModel.encode``). Output times are hit exactly by
shortening the step that would cross them.

Status codes: 0 ok, 1 step-size underflow, 2 step budget exhausted.
"""
import math

from ._dop853_tableau import A, B, C, E3, E5, N_STAGES
from .special import bessel_all

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_EXPONENT = -1.0 / 8.0


def _hermite(fld, off, r):
    n = int(fld[off])
    x = off + 1
    y = x + n
    d = y + n
    if r <= fld[x]:
        return fld[y] + fld[d] * (r - fld[x]), fld[d]
    if r >= fld[x + n - 1]:
        return fld[y + n - 1] + fld[d + n - 1] * (r - fld[x + n - 1]), fld[d + n - 1]
    lo, hi = 0, n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fld[x + mid] <= r:
            lo = mid
        else:
            hi = mid
    xi = fld[x + lo]
    h = fld[x + lo + 1] - xi
    s = (r - xi) / h
    s2 = s * s
    s3 = s2 * s
    y0, y1 = fld[y + lo], fld[y + lo + 1]
    d0, d1 = fld[d + lo], fld[d + lo + 1]
    val = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1
    der = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * h * d0
           + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * h * d1) / h
    return val, der


def field_at(t, r, omega, fld):
    """``(a, da/dr)`` of an encoded field."""
    nterms = int(fld[0])
    a = 0.0
    ar = 0.0
    for j in range(nterms):
        b = 1 + 10 * j
        m = fld[b]
        beta = fld[b + 1]
        sv = fld[b + 2]
        sd = 0.0
        cv = fld[b + 6]
        cd = 0.0
        if fld[b + 3] != 0.0 or fld[b + 4] != 0.0 or fld[b + 7] != 0.0 or fld[b + 8] != 0.0:
            j0, y0, j1, y1 = bessel_all(beta * r)
            sv += fld[b + 3] * j0 + fld[b + 4] * y0
            sd -= beta * (fld[b + 3] * j1 + fld[b + 4] * y1)
            cv += fld[b + 7] * j0 + fld[b + 8] * y0
            cd -= beta * (fld[b + 7] * j1 + fld[b + 8] * y1)
        if fld[b + 5] >= 0.0:
            tv, td = _hermite(fld, int(fld[b + 5]), r)
            sv += tv
            sd += td
        if fld[b + 9] >= 0.0:
            tv, td = _hermite(fld, int(fld[b + 9]), r)
            cv += tv
            cd += td
        ph = m * omega * t
        sn = math.sin(ph)
        cs = math.cos(ph)
        a += sv * sn + cv * cs
        ar += sd * sn + cd * cs
    return a, ar


def rhs(t, r, pr, p, fld):
    """Reduced vector field; returns ``(nan, nan)`` for ``r <= 0``."""
    if not r > 0.0:
        return math.nan, math.nan
    kappa, I0, L, pz, k, omega = p[0], p[1], p[2], p[3], p[4], p[5]
    c = kappa * I0
    u = pz + c * math.log(r)
    dneg = c / r
    if k != 0.0 and fld[0] > 0:
        a, ar = field_at(t, r, omega, fld)
        u += kappa * k * a
        dneg += kappa * k * ar
    L2 = L * L
    H = math.sqrt(1.0 + u * u + pr * pr + L2 / (r * r))
    return pr / H, (L2 / (r * r * r) - u * dneg) / H


def _step(t, y0, y1, f0, f1, h, p, fld, K0, K1):
    """One DOP853 step of signed size ``h``. Returns ``(yn0, yn1, err_sq5, err_sq3)`` pieces."""
    K0[0] = f0
    K1[0] = f1
    for s in range(1, N_STAGES):
        row = A[s]
        d0 = 0.0
        d1 = 0.0
        for j in range(s):
            d0 += row[j] * K0[j]
            d1 += row[j] * K1[j]
        k0, k1 = rhs(t + C[s] * h, y0 + h * d0, y1 + h * d1, p, fld)
        K0[s] = k0
        K1[s] = k1
    s0 = 0.0
    s1 = 0.0
    e50 = e51 = e30 = e31 = 0.0
    for j in range(N_STAGES):
        s0 += B[j] * K0[j]
        s1 += B[j] * K1[j]
        e50 += E5[j] * K0[j]
        e51 += E5[j] * K1[j]
        e30 += E3[j] * K0[j]
        e31 += E3[j] * K1[j]
    return y0 + h * s0, y1 + h * s1, e50, e51, e30, e31


def _error_norm(h, y0, y1, n0, n1, e50, e51, e30, e31, rtol, atol):
    sc0 = atol + rtol * max(abs(y0), abs(n0))
    sc1 = atol + rtol * max(abs(y1), abs(n1))
    a0, a1 = e50 / sc0, e51 / sc1
    b0, b1 = e30 / sc0, e31 / sc1
    err5 = a0 * a0 + a1 * a1
    err3 = b0 * b0 + b1 * b1
    if err5 == 0.0 and err3 == 0.0:
        return 0.0
    return abs(h) * err5 / math.sqrt((err5 + 0.01 * err3) * 2.0)


def initial_step(t, y0, y1, f0, f1, direction, p, fld, rtol, atol):
    sc0 = atol + abs(y0) * rtol
    sc1 = atol + abs(y1) * rtol
    d0 = math.sqrt(((y0 / sc0) ** 2 + (y1 / sc1) ** 2) / 2.0)
    d1 = math.sqrt(((f0 / sc0) ** 2 + (f1 / sc1) ** 2) / 2.0)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    g0, g1 = rhs(t + direction * h0, y0 + direction * h0 * f0, y1 + direction * h0 * f1, p, fld)
    if not (math.isfinite(g0) and math.isfinite(g1)):
        return h0
    d2 = math.sqrt((((g0 - f0) / sc0) ** 2 + ((g1 - f1) / sc1) ** 2) / 2.0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100.0 * h0, h1)


def integrate(y_init, t_eval, p, fld, rtol, atol, max_steps, h_init=0.0):
    """Integrate from ``t_eval[0]`` through every ``t_eval[i]``.

    Returns ``(Y, n_accepted, n_rejected, status)`` where ``Y`` is a list of
    ``[r, pr]`` rows (rows past a failure are left as ``nan``).
    """
    n = len(t_eval)
    out = [[math.nan, math.nan] for _ in range(n)]
    y0, y1 = float(y_init[0]), float(y_init[1])
    out[0] = [y0, y1]
    if n == 1:
        return out, 0, 0, STATUS_OK
    t = float(t_eval[0])
    direction = 1.0 if t_eval[-1] >= t_eval[0] else -1.0
    f0, f1 = rhs(t, y0, y1, p, fld)
    h = abs(h_init) if h_init > 0.0 else initial_step(t, y0, y1, f0, f1, direction, p, fld, rtol, atol)
    K0 = [0.0] * N_STAGES
    K1 = [0.0] * N_STAGES
    accepted = 0
    rejected = 0
    for i in range(1, n):
        target = float(t_eval[i])
        while direction * (target - t) > 0.0:
            if accepted + rejected >= max_steps:
                return out, accepted, rejected, STATUS_MAX_STEPS
            min_step = 10.0 * abs(math.nextafter(t, direction * math.inf) - t)
            if h < min_step:
                return out, accepted, rejected, STATUS_UNDERFLOW
            remaining = abs(target - t)
            landing = h >= remaining * (1.0 - 1e-12)
            hs = remaining if landing else h
            n0, n1, e50, e51, e30, e31 = _step(t, y0, y1, f0, f1, direction * hs, p, fld, K0, K1)
            if not (n0 > 0.0 and math.isfinite(n0) and math.isfinite(n1)):
                h = 0.25 * hs
                rejected += 1
                continue
            err = _error_norm(hs, y0, y1, n0, n1, e50, e51, e30, e31, rtol, atol)
            if not math.isfinite(err):
                h = 0.25 * hs
                rejected += 1
                continue
            if err <= 1.0:
                factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err ** _EXPONENT)
                t = target if landing else t + direction * hs
                y0, y1 = n0, n1
                f0, f1 = rhs(t, y0, y1, p, fld)
                accepted += 1
                h_new = hs * factor
                # a shortened landing step should not shrink the next proposal
                h = max(h, h_new) if landing else h_new
            else:
                h = hs * max(_MIN_FACTOR, _SAFETY * err ** _EXPONENT)
                rejected += 1
        out[i] = [y0, y1]
    return out, accepted, rejected, STATUS_OK
