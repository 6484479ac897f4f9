"""Bracketed scalar minimization over a positive variable (log axis)."""

from __future__ import annotations

import math

from scipy.optimize import minimize_scalar

from .params import SolverError


def minimize_positive(f, x_guess, span=100.0, max_widen=6, xtol=1e-13):
    """Minimize f over x > 0, bracketing around x_guess on a log axis.

    Returns (x_min, f_min).  The bracket [x_guess/span, x_guess*span] is
    widened and retried until the minimum is interior; failure after
    max_widen rounds raises SolverError.
    """
    if x_guess <= 0:
        raise ValueError("x_guess must be > 0")

    def fu(u):
        return f(math.exp(u))

    u0 = math.log(x_guess)
    half = math.log(span)
    for _ in range(max_widen):
        lo, hi = u0 - half, u0 + half
        res = minimize_scalar(fu, bounds=(lo, hi), method="bounded",
                              options={"xatol": xtol})
        u = res.x
        # interior check: reject brackets whose minimum sits on an edge
        if lo + 10 * xtol < u < hi - 10 * xtol:
            # polish with a parabolic pass around the bounded solution
            res2 = minimize_scalar(fu, bracket=(u - 1e-4, u, u + 1e-4),
                                   method="brent", options={"xtol": xtol})
            if res2.fun <= res.fun:
                res = res2
                u = res.x
            return math.exp(u), res.fun
        half *= 4.0
    raise SolverError("bracketed minimization failed: minimum never interior "
                      f"around x_guess={x_guess:g}")
