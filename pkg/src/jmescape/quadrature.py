"""Adaptive Gauss-Kronrod quadrature (QUADPACK via scipy) with optional
square-root endpoint substitution for integrable endpoint singularities."""

import math
import warnings

from scipy.integrate import IntegrationWarning, quad

from .errors import SolverError

RTOL = 1e-8
MAX_PANELS = 10_000


def integrate(f, a, b, rtol=RTOL, atol=1e-14, singular=None, limit=MAX_PANELS):
    """Integrate ``f`` over [a, b].

    ``singular`` may be ``"left"``, ``"right"`` or ``"both"`` for integrands
    that blow up like |x - endpoint|^(-1/2) (or milder); the substitution
    x = endpoint +- (b - a) u^2 makes such integrands bounded.
    """
    if a == b:
        return 0.0
    if singular == "both":
        mid = 0.5 * (a + b)
        return (integrate(f, a, mid, rtol, atol, "left", limit)
                + integrate(f, mid, b, rtol, atol, "right", limit))
    w = b - a
    if singular == "left":
        g = lambda u: 2.0 * w * u * f(a + w * u * u)
    elif singular == "right":
        g = lambda u: 2.0 * w * u * f(b - w * u * u)
    elif singular is None:
        g = f
    else:
        raise ValueError(f"unknown singular option {singular!r}")
    lo, hi = (a, b) if singular is None else (0.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(g, lo, hi, epsabs=atol, epsrel=rtol, limit=limit)
        except IntegrationWarning as exc:
            raise SolverError(f"quadrature failed on [{a}, {b}]: {exc}") from None
    if not math.isfinite(val):
        raise SolverError(f"quadrature produced a non-finite value on [{a}, {b}]")
    return val
