"""Time-periodic modulation ``a(t, r)`` fed to the reduced model.

A field is a short list of harmonic terms

    a(t, r) = sum_j S_j(r) sin(m_j w t) + C_j(r) cos(m_j w t)

whose radial profiles combine a constant, Bessel J0/Y0 of ``beta*r`` and a
monotone cubic (PCHIP) table. The same data is packed into one float
array for the integration kernels by :meth:`FieldModel.encode`.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import special
from .potential import HALF_PI, Waveform

# per-term record: m, then (c0, cJ, cY, table offset) for sine and cosine, beta shared
TERM_WIDTH = 10


@dataclass(frozen=True)
class Profile:
    """Radial profile ``const + cJ J0(beta r) + cY Y0(beta r) + table(r)``.

    Outside the table knots the table part extends linearly with its end slope.
    """

    const: float = 0.0
    cJ: float = 0.0
    cY: float = 0.0
    beta: float = 0.0
    knots: np.ndarray | None = dc_field(default=None, repr=False)
    values: np.ndarray | None = dc_field(default=None, repr=False)
    slopes: np.ndarray | None = dc_field(default=None, repr=False)

    @property
    def is_zero(self) -> bool:
        return self.const == 0.0 and self.cJ == 0.0 and self.cY == 0.0 and self.knots is None

    @property
    def uses_bessel(self) -> bool:
        return self.cJ != 0.0 or self.cY != 0.0

    @classmethod
    def table(cls, r, values) -> "Profile":
        r = np.asarray(r, dtype=float)
        v = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2 or np.any(np.diff(r) <= 0.0):
            raise ValueError("profile table needs >= 2 strictly increasing knots")
        if np.any(r <= 0.0):
            raise ValueError("profile knots must be > 0")
        slopes = PchipInterpolator(r, v).derivative()(r)
        return cls(knots=r, values=v, slopes=np.asarray(slopes, dtype=float))

    def __call__(self, r):
        """Return ``(value, d/dr value)``."""
        r = np.asarray(r, dtype=float)
        val = np.full(r.shape, self.const)
        der = np.zeros(r.shape)
        if self.uses_bessel:
            x = self.beta * r
            j0, y0, j1, y1 = (np.vectorize(special.bessel_all, otypes=[float] * 4))(x)
            val = val + self.cJ * j0 + self.cY * y0
            der = der - self.beta * (self.cJ * j1 + self.cY * y1)
        if self.knots is not None:
            tv, td = _hermite(self.knots, self.values, self.slopes, r)
            val = val + tv
            der = der + td
        if val.ndim == 0:
            return float(val), float(der)
        return val, der


def _hermite(xk, yk, dk, r):
    r = np.asarray(r, dtype=float)
    n = xk.size
    i = np.clip(np.searchsorted(xk, r, side="right") - 1, 0, n - 2)
    below = r < xk[0]
    above = r > xk[-1]
    h = xk[i + 1] - xk[i]
    s = (r - xk[i]) / h
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    val = h00 * yk[i] + h10 * h * dk[i] + h01 * yk[i + 1] + h11 * h * dk[i + 1]
    der = ((6 * s2 - 6 * s) * yk[i] + (3 * s2 - 4 * s + 1) * h * dk[i]
           + (-6 * s2 + 6 * s) * yk[i + 1] + (3 * s2 - 2 * s) * h * dk[i + 1]) / h
    val = np.where(below, yk[0] + dk[0] * (r - xk[0]), val)
    der = np.where(below, dk[0], der)
    val = np.where(above, yk[-1] + dk[-1] * (r - xk[-1]), val)
    der = np.where(above, dk[-1], der)
    return val, der


ZERO = Profile()


@dataclass(frozen=True)
class HarmonicTerm:
    m: int
    sine: Profile = ZERO
    cosine: Profile = ZERO


@dataclass(frozen=True)
class FieldModel:
    """Modulation model. ``kind`` is ``constant``, ``harmonic`` or ``tabulated``."""

    kind: str
    omega: float
    terms: tuple = ()
    waveform: Waveform | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("constant", "harmonic", "tabulated"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "constant" and self.terms:
            raise ValueError("a constant field has no modulation terms")
        if self.kind == "tabulated" and self.waveform is not None and self.waveform.mean != 0.0:
            raise ValueError("tabulated waveform must have zero mean")

    @property
    def is_constant(self) -> bool:
        return not self.terms

    @classmethod
    def constant(cls, omega: float = 1.0) -> "FieldModel":
        return cls("constant", omega)

    @classmethod
    def harmonic(cls, omega: float, profile="bessel", *, cosine: bool = False,
                 value: float = 1.0) -> "FieldModel":
        """Fundamental-frequency field ``D(r) sin(w t) [+ E(r) cos(w t)]``.

        ``profile`` is ``"bessel"`` (the retarded potential of ``sin(w t)``),
        ``"constant"`` (``D = value``) or a :class:`Profile`. With
        ``cosine=True`` and the Bessel profile the cosine part ``E`` of the
        retarded potential is included as well.
        """
        if profile == "bessel":
            sine = Profile(cY=-HALF_PI, beta=omega)
            cos_p = Profile(cJ=-HALF_PI, beta=omega) if cosine else ZERO
        elif profile == "constant":
            if cosine:
                raise ValueError("cosine part is only defined for the Bessel profile")
            sine = Profile(const=float(value))
            cos_p = ZERO
        elif isinstance(profile, Profile):
            sine = profile
            cos_p = ZERO
        else:
            raise ValueError(f"unknown profile {profile!r}")
        return cls("harmonic", omega, (HarmonicTerm(1, sine, cos_p),))

    @classmethod
    def from_tables(cls, omega: float, r, D, E=None) -> "FieldModel":
        sine = Profile.table(r, D)
        cos_p = Profile.table(r, E) if E is not None else ZERO
        return cls("harmonic", omega, (HarmonicTerm(1, sine, cos_p),))

    @classmethod
    def from_waveform(cls, waveform: Waveform, *, max_harmonics: int | None = None,
                      rtol: float = 1e-12) -> "FieldModel":
        """Exact retarded potential of a sampled waveform, harmonic by harmonic.

        ``sin(m w t)`` maps to ``-(pi/2)[Y0 sin + J0 cos]`` and ``cos(m w t)``
        to ``-(pi/2)[Y0 cos - J0 sin]`` at argument ``m w r``. Harmonics below
        ``rtol`` of the largest coefficient are dropped.
        """
        if waveform.mean != 0.0:
            raise ValueError("tabulated waveform must have zero mean")
        w = waveform.omega
        amp = np.hypot(waveform.sin_coeffs, waveform.cos_coeffs)
        cut = rtol * (amp.max() if amp.size else 0.0)
        terms = []
        for idx, (s, c) in enumerate(zip(waveform.sin_coeffs, waveform.cos_coeffs)):
            m = idx + 1
            if max_harmonics is not None and m > max_harmonics:
                break
            if amp[idx] <= cut:
                continue
            beta = m * w
            sine = Profile(cJ=HALF_PI * c, cY=-HALF_PI * s, beta=beta)
            cos_p = Profile(cJ=-HALF_PI * s, cY=-HALF_PI * c, beta=beta)
            terms.append(HarmonicTerm(m, sine, cos_p))
        return cls("tabulated", w, tuple(terms), waveform)

    def potential(self, t, r):
        """Return ``(a, da/dr)`` at broadcastable ``t``, ``r``."""
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        shape = np.broadcast_shapes(t.shape, r.shape)
        a = np.zeros(shape)
        ar = np.zeros(shape)
        for term in self.terms:
            ph = term.m * self.omega * t
            sn, cs = np.sin(ph), np.cos(ph)
            if not term.sine.is_zero:
                v, d = term.sine(r)
                a = a + v * sn
                ar = ar + d * sn
            if not term.cosine.is_zero:
                v, d = term.cosine(r)
                a = a + v * cs
                ar = ar + d * cs
        if a.ndim == 0:
            return float(a), float(ar)
        return a, ar

    def _fundamental(self):
        if len(self.terms) != 1 or self.terms[0].m != 1:
            raise ValueError("a single fundamental-frequency term is required here")
        return self.terms[0]

    def sine_profile(self, r):
        return self._fundamental().sine(r)

    def cosine_profile(self, r):
        return self._fundamental().cosine(r)

    @property
    def has_cosine(self) -> bool:
        return any(not t.cosine.is_zero for t in self.terms)

    def encode(self) -> np.ndarray:
        """Pack into the flat float layout read by the kernels.

        ``[n_terms, term_0 .. term_{n-1}, tables...]`` with each term
        ``[m, beta, S.c0, S.cJ, S.cY, S.tab, C.c0, C.cJ, C.cY, C.tab]``; a
        table at offset ``o`` is ``[n, x_0..x_{n-1}, y.., dy..]`` and ``-1``
        marks no table.
        """
        head = [float(len(self.terms))]
        tables = []
        offset = 1 + TERM_WIDTH * len(self.terms)

        def table_slot(p):
            nonlocal offset
            if p.knots is None:
                return -1.0
            block = np.concatenate([[p.knots.size], p.knots, p.values, p.slopes])
            tables.append(block)
            here = offset
            offset += block.size
            return float(here)

        for term in self.terms:
            s, c = term.sine, term.cosine
            if s.uses_bessel and c.uses_bessel and s.beta != c.beta:
                raise ValueError("sine and cosine Bessel profiles of one term must share beta")
            beta = s.beta if s.uses_bessel else c.beta
            head += [float(term.m), beta,
                     s.const, s.cJ, s.cY, table_slot(s),
                     c.const, c.cJ, c.cY, table_slot(c)]
        return np.concatenate([np.array(head)] + tables) if tables else np.array(head)

    def describe(self) -> dict:
        out = {"kind": self.kind, "omega": self.omega, "terms": []}
        for t in self.terms:
            out["terms"].append({
                "m": t.m,
                "sine": _describe_profile(t.sine),
                "cosine": _describe_profile(t.cosine),
            })
        return out


def _describe_profile(p: Profile) -> dict:
    d = {"const": p.const, "cJ": p.cJ, "cY": p.cY, "beta": p.beta}
    if p.knots is not None:
        d["table_knots"] = int(p.knots.size)
    return d


def decode_check(encoded: np.ndarray) -> int:
    """Return the number of terms after a cheap structural check of an encoded field."""
    n = int(encoded[0])
    if n < 0 or encoded.size < 1 + TERM_WIDTH * n:
        raise ValueError("malformed encoded field")
    return n
