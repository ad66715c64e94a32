"""Compare the compiled and pure-Python integration kernels.

    python3 benchmarks/bench_kernel.py [--repeat 3] [--periods 10]

Times one perturbed trajectory of ``periods`` drive periods (Bessel field,
k = 1e-2) and one unperturbed trajectory on each available backend, and
checks that both backends return the same samples.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from lorentzwire import CANONICAL, FieldModel, RadialState, _backend
from lorentzwire.integrator import integrate


def _time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--periods", type=float, default=10.0)
    ap.add_argument("--tol", type=float, default=1e-11)
    args = ap.parse_args(argv)

    p = CANONICAL.replace(k=1e-2)
    field = FieldModel.harmonic(p.omega1, "bessel")
    t1 = args.periods * p.T1
    cases = {
        "unperturbed": (CANONICAL, None),
        "bessel k=1e-2": (p, field),
    }
    backends = _backend.available()
    print(f"backends: {', '.join(backends)}; horizon {t1:g}; tol {args.tol:g}; best of {args.repeat}")
    for label, (params, fld) in cases.items():
        res = {}
        for b in backends:
            dt, orb = _time(lambda b=b: integrate(RadialState(1.7, -0.2), 0.0, t1, params, fld,
                                                  tol=args.tol, n_out=101, backend=b), args.repeat)
            res[b] = (dt, orb)
            print(f"  {label:14s} {b:8s} {dt * 1e3:10.2f} ms  {orb.steps} steps  "
                  f"{dt / max(orb.steps, 1) * 1e6:8.2f} us/step")
        if len(res) == 2:
            (tc, oc), (tp, op) = res["compiled"], res["python"]
            gap = float(np.max(np.abs(oc.y - op.y)))
            print(f"  {label:14s} speedup {tp / tc:8.1f}x, max sample difference {gap:.1e}")


if __name__ == "__main__":
    main()
