import math


class BracketError(RuntimeError):
    pass


def grow_bracket(fn, x0, step, *, factor=2.0, max_iter=200):
    """Walk from ``x0`` by ``step``, ``step*factor``, ... until ``fn`` changes sign.

    Returns ``(a, b)`` ordered so that ``a < b``.
    """
    fa = fn(x0)
    if fa == 0.0:
        return x0, x0
    x = x0
    for _ in range(max_iter):
        xn = x + step
        fb = fn(xn)
        if fb == 0.0 or math.copysign(1.0, fa) != math.copysign(1.0, fb):
            return (x, xn) if x < xn else (xn, x)
        x, fa = xn, fb
        step *= factor
    raise BracketError(f"no sign change found walking from {x0!r}")


def newton_bisect(fn, dfn, a, b, *, xtol=1e-15, rtol=4e-16, max_iter=200):
    """Root of ``fn`` in ``[a, b]`` by Newton steps, falling back to bisection
    whenever a step leaves the current bracket or fails to halve it."""
    fa, fb = fn(a), fn(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise BracketError(f"[{a!r}, {b!r}] does not bracket a root")
    x = 0.5 * (a + b)
    width_prev = abs(b - a)
    for _ in range(max_iter):
        fx = fn(x)
        if fx == 0.0:
            return x
        if math.copysign(1.0, fx) == math.copysign(1.0, fa):
            a, fa = x, fx
        else:
            b, fb = x, fx
        d = dfn(x)
        xn = x - fx / d if d != 0.0 else math.nan
        if not (a < xn < b) or abs(b - a) > 0.5 * width_prev:
            xn = 0.5 * (a + b)
        width_prev = abs(b - a)
        if abs(xn - x) <= xtol + rtol * abs(xn):
            return xn
        x = xn
    return x
