# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernel. Mirrors ``_kernel_py`` and ``special``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, sin, cos, fabs, nextafter, INFINITY, NAN, isfinite, pow

from ._dop853_tableau import A as _A, B as _B, C as _C, E3 as _E3, E5 as _E5, N_STAGES as _NS

cnp.import_array()

DEF NS = 12
DEF PI = 3.14159265358979323846
DEF EULER_GAMMA = 0.57721566490153286061
DEF SERIES_MAX = 12.0

cdef double TA[NS][NS]
cdef double TB[NS]
cdef double TC[NS]
cdef double TE3[NS]
cdef double TE5[NS]

if _NS != NS:
    raise ImportError("DOP853 tableau has unexpected stage count")
for _i in range(NS):
    TB[_i] = _B[_i]
    TC[_i] = _C[_i]
    TE3[_i] = _E3[_i]
    TE5[_i] = _E5[_i]
    for _j in range(NS):
        TA[_i][_j] = _A[_i][_j] if _j < _i else 0.0

DEF C_OK = 0
DEF C_UNDERFLOW = 1
DEF C_MAX_STEPS = 2
STATUS_OK = C_OK
STATUS_UNDERFLOW = C_UNDERFLOW
STATUS_MAX_STEPS = C_MAX_STEPS


cdef void _series(double x, double* j0, double* j1, double* s0, double* s1) noexcept nogil:
    cdef double q = 0.25 * x * x
    cdef double t0 = 1.0
    cdef double t1 = 0.5 * x
    cdef double hk = 0.0
    cdef int k = 0
    j0[0] = t0
    j1[0] = t1
    s0[0] = 0.0
    s1[0] = t1
    while True:
        k += 1
        t0 *= -q / (k * k)
        t1 *= -q / (k * (k + 1.0))
        hk += 1.0 / k
        j0[0] += t0
        j1[0] += t1
        s0[0] -= hk * t0
        s1[0] += (2.0 * hk + 1.0 / (k + 1.0)) * t1
        if fabs(t0) < 1e-17 * max(fabs(j0[0]), 1e-300) and fabs(t1) < 1e-17 * max(fabs(j1[0]), 1e-300) and k > 3:
            break
        if k > 200:
            break


cdef void _hankel(double nu, double x, double* p, double* q) noexcept nogil:
    cdef double mu = 4.0 * nu * nu
    cdef double z = 8.0 * x
    cdef double term = 1.0
    cdef double last = INFINITY
    cdef int k = 0
    cdef int kk
    p[0] = 1.0
    q[0] = 0.0
    while k < 60:
        k += 1
        kk = 2 * k - 1
        term *= (mu - kk * kk) / (k * z)
        if fabs(term) > last:
            break
        last = fabs(term)
        if k % 2:
            if (k // 2) % 2 == 0:
                q[0] += term
            else:
                q[0] -= term
        else:
            if (k // 2) % 2 == 0:
                p[0] += term
            else:
                p[0] -= term
        if last < 1e-17:
            break


cdef void bessel_all(double x, double* j0, double* y0, double* j1, double* y1) noexcept nogil:
    cdef double s0, s1, lg, amp, p0, q0, p1, q1, c0, sn0, c1, sn1
    if x <= SERIES_MAX:
        _series(x, j0, j1, &s0, &s1)
        lg = log(0.5 * x) + EULER_GAMMA
        y0[0] = (2.0 / PI) * (lg * j0[0] + s0)
        y1[0] = -(2.0 / PI) / x + (2.0 / PI) * lg * j1[0] - s1 / PI
        return
    amp = sqrt((2.0 / PI) / x)
    _hankel(0.0, x, &p0, &q0)
    _hankel(1.0, x, &p1, &q1)
    c0 = cos(x - 0.25 * PI)
    sn0 = sin(x - 0.25 * PI)
    c1 = cos(x - 0.75 * PI)
    sn1 = sin(x - 0.75 * PI)
    j0[0] = amp * (p0 * c0 - q0 * sn0)
    y0[0] = amp * (p0 * sn0 + q0 * c0)
    j1[0] = amp * (p1 * c1 - q1 * sn1)
    y1[0] = amp * (p1 * sn1 + q1 * c1)


def bessel(double x):
    """``(J0, Y0, J1, Y1)`` at ``x > 0`` from the compiled routines."""
    cdef double j0, y0, j1, y1
    if not x > 0.0:
        raise ValueError("Bessel argument must be positive")
    bessel_all(x, &j0, &y0, &j1, &y1)
    return j0, y0, j1, y1


cdef void _hermite(const double[::1] fld, int off, double r, double* val, double* der) noexcept nogil:
    cdef int n = <int>fld[off]
    cdef int x = off + 1
    cdef int y = x + n
    cdef int d = y + n
    cdef int lo, hi, mid
    cdef double xi, h, s, s2, s3, ya, yb, da, db
    if r <= fld[x]:
        val[0] = fld[y] + fld[d] * (r - fld[x])
        der[0] = fld[d]
        return
    if r >= fld[x + n - 1]:
        val[0] = fld[y + n - 1] + fld[d + n - 1] * (r - fld[x + n - 1])
        der[0] = fld[d + n - 1]
        return
    lo = 0
    hi = n - 1
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
    ya = fld[y + lo]
    yb = fld[y + lo + 1]
    da = fld[d + lo]
    db = fld[d + lo + 1]
    val[0] = (2 * s3 - 3 * s2 + 1) * ya + (s3 - 2 * s2 + s) * h * da + (-2 * s3 + 3 * s2) * yb + (s3 - s2) * h * db
    der[0] = ((6 * s2 - 6 * s) * ya + (3 * s2 - 4 * s + 1) * h * da
              + (-6 * s2 + 6 * s) * yb + (3 * s2 - 2 * s) * h * db) / h


cdef void field_at_c(double t, double r, double omega, const double[::1] fld, double* a, double* ar) noexcept nogil:
    cdef int nterms = <int>fld[0]
    cdef int j, b
    cdef double m, beta, sv, sd, cv, cd, j0, y0, j1, y1, tv, td, ph, sn, cs
    a[0] = 0.0
    ar[0] = 0.0
    for j in range(nterms):
        b = 1 + 10 * j
        m = fld[b]
        beta = fld[b + 1]
        sv = fld[b + 2]
        sd = 0.0
        cv = fld[b + 6]
        cd = 0.0
        if fld[b + 3] != 0.0 or fld[b + 4] != 0.0 or fld[b + 7] != 0.0 or fld[b + 8] != 0.0:
            bessel_all(beta * r, &j0, &y0, &j1, &y1)
            sv += fld[b + 3] * j0 + fld[b + 4] * y0
            sd -= beta * (fld[b + 3] * j1 + fld[b + 4] * y1)
            cv += fld[b + 7] * j0 + fld[b + 8] * y0
            cd -= beta * (fld[b + 7] * j1 + fld[b + 8] * y1)
        if fld[b + 5] >= 0.0:
            _hermite(fld, <int>fld[b + 5], r, &tv, &td)
            sv += tv
            sd += td
        if fld[b + 9] >= 0.0:
            _hermite(fld, <int>fld[b + 9], r, &tv, &td)
            cv += tv
            cd += td
        ph = m * omega * t
        sn = sin(ph)
        cs = cos(ph)
        a[0] += sv * sn + cv * cs
        ar[0] += sd * sn + cd * cs


cdef inline void rhs_c(double t, double r, double pr, const double* p, const double[::1] fld,
                       double* dr, double* dpr) noexcept nogil:
    cdef double kappa = p[0], I0 = p[1], L = p[2], pz = p[3], k = p[4], omega = p[5]
    cdef double c, u, dneg, a, ar, L2, H
    if not r > 0.0:
        dr[0] = NAN
        dpr[0] = NAN
        return
    c = kappa * I0
    u = pz + c * log(r)
    dneg = c / r
    if k != 0.0 and fld[0] > 0:
        field_at_c(t, r, omega, fld, &a, &ar)
        u += kappa * k * a
        dneg += kappa * k * ar
    L2 = L * L
    H = sqrt(1.0 + u * u + pr * pr + L2 / (r * r))
    dr[0] = pr / H
    dpr[0] = (L2 / (r * r * r) - u * dneg) / H


def rhs(double t, double r, double pr, double[::1] p, const double[::1] fld):
    cdef double dr, dpr
    rhs_c(t, r, pr, &p[0], fld, &dr, &dpr)
    return dr, dpr


def field_at(double t, double r, double omega, const double[::1] fld):
    cdef double a, ar
    field_at_c(t, r, omega, fld, &a, &ar)
    return a, ar


cdef double _initial_step(double t, double y0, double y1, double f0, double f1, double direction,
                          const double* p, const double[::1] fld, double rtol, double atol) noexcept nogil:
    cdef double sc0 = atol + fabs(y0) * rtol
    cdef double sc1 = atol + fabs(y1) * rtol
    cdef double d0 = sqrt(((y0 / sc0) ** 2 + (y1 / sc1) ** 2) / 2.0)
    cdef double d1 = sqrt(((f0 / sc0) ** 2 + (f1 / sc1) ** 2) / 2.0)
    cdef double h0, h1, d2, g0, g1
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    rhs_c(t + direction * h0, y0 + direction * h0 * f0, y1 + direction * h0 * f1, p, fld, &g0, &g1)
    if not (isfinite(g0) and isfinite(g1)):
        return h0
    d2 = sqrt((((g0 - f0) / sc0) ** 2 + ((g1 - f1) / sc1) ** 2) / 2.0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / max(d1, d2), 1.0 / 8.0)
    return min(100.0 * h0, h1)


def integrate(y_init, double[::1] t_eval, double[::1] p, const double[::1] fld,
              double rtol, double atol, long max_steps, double h_init=0.0):
    """Same contract as ``_kernel_py.integrate`` but returns an ``(n, 2)`` array."""
    cdef Py_ssize_t n = t_eval.shape[0]
    out_arr = np.full((n, 2), np.nan)
    cdef double[:, ::1] out = out_arr
    cdef double y0 = float(y_init[0])
    cdef double y1 = float(y_init[1])
    cdef double t, direction, f0, f1, h, hs, target, remaining, min_step
    cdef double n0, n1, d0, d1, s0, s1, e50, e51, e30, e31, err, factor, h_new
    cdef double sc0, sc1, a0, a1, b0, b1, err5, err3
    cdef double K0[NS]
    cdef double K1[NS]
    cdef double* pp = &p[0]
    cdef long accepted = 0, rejected = 0
    cdef Py_ssize_t i
    cdef int s, j, status = 0
    cdef bint landing
    out[0, 0] = y0
    out[0, 1] = y1
    if n == 1:
        return out_arr, 0, 0, STATUS_OK
    t = t_eval[0]
    direction = 1.0 if t_eval[n - 1] >= t_eval[0] else -1.0
    rhs_c(t, y0, y1, pp, fld, &f0, &f1)
    if h_init > 0.0:
        h = h_init
    else:
        h = _initial_step(t, y0, y1, f0, f1, direction, pp, fld, rtol, atol)
    with nogil:
        for i in range(1, n):
            target = t_eval[i]
            while direction * (target - t) > 0.0:
                if accepted + rejected >= max_steps:
                    status = C_MAX_STEPS
                    break
                min_step = 10.0 * fabs(nextafter(t, direction * INFINITY) - t)
                if h < min_step:
                    status = C_UNDERFLOW
                    break
                remaining = fabs(target - t)
                landing = h >= remaining * (1.0 - 1e-12)
                hs = remaining if landing else h
                K0[0] = f0
                K1[0] = f1
                for s in range(1, NS):
                    d0 = 0.0
                    d1 = 0.0
                    for j in range(s):
                        d0 += TA[s][j] * K0[j]
                        d1 += TA[s][j] * K1[j]
                    rhs_c(t + TC[s] * direction * hs, y0 + direction * hs * d0, y1 + direction * hs * d1,
                          pp, fld, &K0[s], &K1[s])
                s0 = 0.0
                s1 = 0.0
                e50 = 0.0
                e51 = 0.0
                e30 = 0.0
                e31 = 0.0
                for j in range(NS):
                    s0 += TB[j] * K0[j]
                    s1 += TB[j] * K1[j]
                    e50 += TE5[j] * K0[j]
                    e51 += TE5[j] * K1[j]
                    e30 += TE3[j] * K0[j]
                    e31 += TE3[j] * K1[j]
                n0 = y0 + direction * hs * s0
                n1 = y1 + direction * hs * s1
                if not (n0 > 0.0 and isfinite(n0) and isfinite(n1)):
                    h = 0.25 * hs
                    rejected += 1
                    continue
                sc0 = atol + rtol * max(fabs(y0), fabs(n0))
                sc1 = atol + rtol * max(fabs(y1), fabs(n1))
                a0 = e50 / sc0
                a1 = e51 / sc1
                b0 = e30 / sc0
                b1 = e31 / sc1
                err5 = a0 * a0 + a1 * a1
                err3 = b0 * b0 + b1 * b1
                if err5 == 0.0 and err3 == 0.0:
                    err = 0.0
                else:
                    err = hs * err5 / sqrt((err5 + 0.01 * err3) * 2.0)
                if not isfinite(err):
                    h = 0.25 * hs
                    rejected += 1
                    continue
                if err <= 1.0:
                    if err == 0.0:
                        factor = 10.0
                    else:
                        factor = min(10.0, 0.9 * pow(err, -0.125))
                    if landing:
                        t = target
                    else:
                        t = t + direction * hs
                    y0 = n0
                    y1 = n1
                    rhs_c(t, y0, y1, pp, fld, &f0, &f1)
                    accepted += 1
                    h_new = hs * factor
                    if landing:
                        h = max(h, h_new)
                    else:
                        h = h_new
                else:
                    h = hs * max(0.2, 0.9 * pow(err, -0.125))
                    rejected += 1
            if status != 0:
                break
            out[i, 0] = y0
            out[i, 1] = y1
    return out_arr, accepted, rejected, status
