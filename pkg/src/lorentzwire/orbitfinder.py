"""Periodic orbits of the forced system as fixed points of the stroboscopic map.

``P(x)`` flows the perturbed system from ``t = 0`` to ``t = T1``; an
``n T1``-periodic orbit is a fixed point of ``P^n``. Fixed points are
found by Newton iteration with a central-difference Jacobian, seeded on
the resonant unperturbed orbit at the zeros of the Melnikov function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import integrator, melnikov
from .io import write_csv, write_json
from .model import PhysParams, RadialState

MAP_TOL = 1e-13
FD_STEP = 1e-7
MAX_ITER = 50
RES_TOL = 1e-11
ACCEPT_RES = 1e-9
DEDUP_TOL = 1e-6
TRACE_MARGIN = 1e-6
K_LADDER = (1e-3, 5e-4, 2.5e-4)


class NewtonError(RuntimeError):
    pass


@dataclass(frozen=True)
class OrbitRecord:
    n: int
    fixed_point: RadialState
    residual: float
    floquet: tuple
    kind: str
    distance_to_unperturbed: float
    k: float
    iterations: int = 0
    trace: float = 0.0
    det: float = 1.0
    minimal_n: int = 0
    sub_residuals: tuple = ()
    seed_index: int = -1

    @property
    def lower_period(self) -> bool:
        return self.minimal_n != self.n

    def as_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k,
            "r": self.fixed_point.r, "pr": self.fixed_point.pr,
            "residual": self.residual,
            "floquet": [[z.real, z.imag] for z in self.floquet],
            "floquet_moduli": [abs(z) for z in self.floquet],
            "trace": self.trace, "det": self.det, "kind": self.kind,
            "distance_to_unperturbed": self.distance_to_unperturbed,
            "iterations": self.iterations, "minimal_n": self.minimal_n,
            "sub_residuals": [list(p) for p in self.sub_residuals],
            "seed_index": self.seed_index,
        }


class _Map:
    """Time-``T1`` map with the field encoded once."""

    def __init__(self, params, field, tol, backend, *, allow_unperturbed=False):
        if not allow_unperturbed and (params.k == 0.0 or field is None):
            raise ValueError("the unperturbed map has non-isolated fixed points; use k > 0")
        self.params = params
        self.T1 = params.T1
        self.fld = integrator.encode_field(params, field)
        self.tol = tol
        self.backend = backend

    def __call__(self, y, n):
        return integrator.flow(np.asarray(y, dtype=float), 0.0, n * self.T1, self.params,
                               tol=self.tol, backend=self.backend, fld=self.fld)

    def jacobian(self, y, n):
        y = np.asarray(y, dtype=float)
        h = FD_STEP * max(1.0, float(np.linalg.norm(y)))
        J = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            J[:, j] = (self(y + e, n) - self(y - e, n)) / (2.0 * h)
        return J


def stroboscopic_map(state: RadialState, params: PhysParams, field, n: int = 1, *,
                     tol: float = MAP_TOL, backend: str | None = None) -> RadialState:
    """Flow of the forced system from ``t = 0`` to ``t = n T1``."""
    fld = integrator.encode_field(params, field)
    y = integrator.flow(state.as_array(), 0.0, n * params.T1, params, tol=tol, backend=backend, fld=fld)
    return RadialState(float(y[0]), float(y[1]))


def map_jacobian(state: RadialState, params: PhysParams, field, n: int = 1, *,
                 tol: float = MAP_TOL, backend: str | None = None) -> np.ndarray:
    """Central-difference Jacobian of ``P^n`` (step ``1e-7`` times the state norm)."""
    m = _Map(params, field, tol, backend, allow_unperturbed=True)
    return m.jacobian(state.as_array(), n)


def classify(J: np.ndarray):
    """Floquet pair, trace, determinant and kind from a 2x2 monodromy matrix."""
    tr = float(np.trace(J))
    det = float(np.linalg.det(J))
    ev = np.linalg.eigvals(J)
    ev = tuple(sorted((complex(z) for z in ev), key=lambda z: (abs(z), z.imag)))
    if abs(tr) < 2.0 - TRACE_MARGIN:
        kind = "elliptic"
    elif abs(tr) > 2.0 + TRACE_MARGIN:
        kind = "hyperbolic"
    else:
        kind = "parabolic"
    return ev, tr, det, kind


def _divisors(n):
    return [d for d in range(1, n) if n % d == 0]


def point_polyline_distance(points: np.ndarray, poly: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Distance from each point to the closed polyline through ``poly`` rows."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    L2 = np.where(L2 > 0.0, L2, 1.0)
    out = np.empty(points.shape[0])
    for s in range(0, points.shape[0], chunk):
        p = points[s:s + chunk, None, :]
        t = np.clip(np.einsum("pij,ij->pi", p - a[None], ab) / L2, 0.0, 1.0)
        proj = a[None] + t[..., None] * ab[None]
        d = np.sqrt(np.sum((p - proj) ** 2, axis=-1))
        out[s:s + chunk] = d.min(axis=1)
    return out


def distance_to_unperturbed(y0, n: int, params: PhysParams, field, *, samples_per_T1: int = 256,
                            gamma: integrator.OrbitSample | None = None, tol: float = MAP_TOL,
                            backend: str | None = None) -> float:
    """Sup over one period of the perturbed orbit of the distance to ``Gamma_n``."""
    gamma = gamma or melnikov.resonant_orbit(n, params, backend=backend)
    ts = np.linspace(0.0, n * params.T1, n * samples_per_T1 + 1)
    orb = integrator.integrate(RadialState(float(y0[0]), float(y0[1])), 0.0, ts[-1], params, field,
                               tol=tol, t_eval=ts, backend=backend)
    return float(point_polyline_distance(orb.y, gamma.y[:-1]).max())


def find_orbit(n: int, params: PhysParams, field, seed: RadialState, *, tol: float = MAP_TOL,
               max_iter: int = MAX_ITER, gamma: integrator.OrbitSample | None = None,
               backend: str | None = None, seed_index: int = -1) -> OrbitRecord:
    """Newton iteration on ``P^n(x) - x`` from ``seed``."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if params.k == 0.0:
        raise ValueError("k = 0: unperturbed periodic orbits form continuous families; no isolated fixed point")
    P = _Map(params, field, tol, backend)
    x = seed.as_array()
    res = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        Fx = P(x, n) - x
        res = float(np.max(np.abs(Fx)))
        if res <= RES_TOL:
            break
        J = P.jacobian(x, n) - np.eye(2)
        try:
            dx = np.linalg.solve(J, -Fx)
        except np.linalg.LinAlgError as exc:
            raise NewtonError(f"singular Newton matrix at iteration {it}") from exc
        # damp steps that would leave the physical half plane
        lam = 1.0
        while x[0] + lam * dx[0] <= 0.0:
            lam *= 0.5
        x = x + lam * dx
        if not np.all(np.isfinite(x)):
            raise NewtonError("Newton iterate became non-finite")
        if float(np.max(np.abs(dx))) <= 1e-14 * max(1.0, float(np.max(np.abs(x)))):
            Fx = P(x, n) - x
            res = float(np.max(np.abs(Fx)))
            break
    else:
        Fx = P(x, n) - x
        res = float(np.max(np.abs(Fx)))
    if not res <= ACCEPT_RES:
        raise NewtonError(f"no convergence after {it} iterations (residual {res:.3e})")
    J = P.jacobian(x, n)
    ev, tr, det, kind = classify(J)
    sub = tuple((d, float(np.max(np.abs(P(x, d) - x)))) for d in _divisors(n))
    minimal = next((d for d, r in sub if r <= 1e-8), n)
    dist = distance_to_unperturbed(x, n, params, field, gamma=gamma, tol=tol, backend=backend)
    return OrbitRecord(n=int(n), fixed_point=RadialState(float(x[0]), float(x[1])), residual=res,
                       floquet=ev, kind=kind, distance_to_unperturbed=dist, k=params.k,
                       iterations=it, trace=tr, det=det, minimal_n=minimal, sub_residuals=sub,
                       seed_index=seed_index)


@dataclass
class Catalogue:
    """Distinct orbits per ``n`` plus seed failures and Melnikov zero counts."""

    k: float
    orbits: dict = dc_field(default_factory=dict)
    failures: list = dc_field(default_factory=list)
    melnikov_zero_counts: dict = dc_field(default_factory=dict)
    lower_period: list = dc_field(default_factory=list)

    def all_orbits(self):
        return [o for n in sorted(self.orbits) for o in self.orbits[n]]

    def counts(self) -> dict:
        return {n: len(v) for n, v in sorted(self.orbits.items())}

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "orbits": [o.as_dict() for o in self.all_orbits()],
            "lower_period": [o.as_dict() for o in self.lower_period],
            "counts": [{"n": n, "orbits": len(self.orbits[n]),
                        "melnikov_zeros": self.melnikov_zero_counts.get(n, 0)} for n in sorted(self.orbits)],
            "failures": self.failures,
        }

    def to_json(self, path) -> None:
        write_json(path, self.as_dict())

    def to_csv(self, path) -> None:
        rows = [(str(o.n), o.fixed_point.r, o.fixed_point.pr, o.residual, abs(o.floquet[0]),
                 o.kind, o.distance_to_unperturbed, o.k) for o in self.all_orbits()]
        write_csv(path, ["n", "r_fixed", "pr_fixed", "residual", "|floquet_1|", "kind", "distance", "k"], rows)


def _images(P, x, n):
    out = [np.asarray(x, dtype=float)]
    for _ in range(n - 1):
        out.append(P(out[-1], 1))
    return out


def scan_orbits(n_max: int, params: PhysParams, field, *, annulus: tuple | None = None,
                tol: float = MAP_TOL, backend: str | None = None) -> Catalogue:
    """Seed Newton at the Melnikov zeros on each ``Gamma_n`` and collect distinct orbits.

    ``annulus = (H_lo, H_hi)`` restricts the scan to resonances with ``H_n`` inside it.
    """
    if params.k == 0.0:
        raise ValueError("scan_orbits needs k > 0")
    P = _Map(params, field, tol, backend)
    cat = Catalogue(k=params.k)
    for n in range(1, int(n_max) + 1):
        cat.orbits[n] = []
        try:
            mel = melnikov.melnikov_fourier(n, params, field, backend=backend)
        except melnikov.NoResonance:
            cat.melnikov_zero_counts[n] = 0
            continue
        cat.melnikov_zero_counts[n] = len(mel.zeros)
        if annulus is not None and not (annulus[0] <= mel.H_n <= annulus[1]):
            continue
        gamma = melnikov.resonant_orbit(n, params, backend=backend)
        phases = mel.zeros if mel.simple else tuple(np.arange(2 * n) * params.T1 / 2.0)
        known = []
        for i, t0 in enumerate(phases):
            seed = melnikov.orbit_point(n, t0, params, backend=backend)
            try:
                rec = find_orbit(n, params, field, seed, tol=tol, gamma=gamma, backend=backend, seed_index=i)
            except (NewtonError, integrator.IntegrationError) as exc:
                cat.failures.append({"n": n, "seed_index": i, "t0": t0, "error": str(exc)})
                continue
            x = rec.fixed_point.as_array()
            if any(np.max(np.abs(x - img)) <= DEDUP_TOL for img in known):
                continue
            known.extend(_images(P, x, n))
            if rec.lower_period:
                cat.lower_period.append(rec)
            else:
                cat.orbits[n].append(rec)
    return cat
