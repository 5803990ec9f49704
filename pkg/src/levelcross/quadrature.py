"""Quadrature for integrands with inverse-square-root endpoint singularities."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

__all__ = ["sine_squared_quad", "gauss_legendre_bins", "quiet_quad"]


def sine_squared_quad(f, a: float, b: float, epsabs: float = 1e-12, epsrel: float = 1e-12,
                      limit: int = 400) -> float:
    """Integrate ``f`` over ``[a, b]`` when ``f ~ |x - end|**-1/2`` at either end.

    Uses ``x = a + (b - a) sin(t)**2``, whose Jacobian ``(b - a) sin(2t)``
    vanishes like the square root of the distance to each endpoint, leaving
    a bounded integrand on ``t in [0, pi/2]``.
    """
    if b <= a:
        return 0.0
    L = b - a

    def g(t):
        s = math.sin(t)
        return f(a + L * s * s) * L * math.sin(2.0 * t)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(g, 0.0, 0.5 * math.pi, epsabs=epsabs, epsrel=epsrel, limit=limit)
    return val


def quiet_quad(f, a, b, **kw) -> float:
    """``scipy.integrate.quad`` value with accuracy warnings silenced."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, **kw)[0]


def gauss_legendre_bins(f, edges, order: int = 16) -> np.ndarray:
    """Integral of a vectorised ``f`` over each bin ``[edges[i], edges[i+1]]``."""
    edges = np.asarray(edges, dtype=float)
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return (vals * w[None, :]).sum(axis=1) * half
