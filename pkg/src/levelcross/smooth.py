"""Smooth (non-oscillating) crossing densities and slope-difference laws.

Closed forms for both billiards live next to :func:`generic_dcds` and
:func:`generic_smooth_density`, which integrate the general action-space
expressions for any model exposing the shell interface of
:mod:`levelcross.billiards`.  The closed forms are the oracles for the
generic routines and vice versa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from .billiards import DEFAULT_GAMMA, BilliardModel, CylinderBilliard, DomainError, OffShellError
from .quadrature import quiet_quad, sine_squared_quad

__all__ = [
    "SmoothPrediction",
    "GvDistribution",
    "CylGv",
    "rect_smooth_density",
    "rect_integrated_count",
    "rect_cumulative_count",
    "rect_gv",
    "cyl_smooth_density",
    "cyl_cumulative_count",
    "cyl_sign_fractions",
    "cyl_gv",
    "cyl_g_plus",
    "cyl_g_minus_low",
    "cyl_g_minus_high",
    "rect_distribution",
    "cyl_distribution",
    "generic_dcds",
    "generic_smooth_density",
]

_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class SmoothPrediction:
    """A smooth density value together with the formula that produced it."""

    density: float
    formula: str


# ---------------------------------------------------------------------------
# rectangle
# ---------------------------------------------------------------------------

def rect_smooth_density(eps: float, mu: float) -> float:
    """Mean crossings per unit energy per unit shape parameter, ``eps/(4 mu)``."""
    if np.any(np.asarray(eps) < 0) or not np.all(np.asarray(mu) > 0):
        raise DomainError("need eps >= 0 and mu > 0")
    return eps / (4.0 * mu)


def rect_integrated_count(eps: float, mu1: float, mu2: float) -> float:
    """``dn_c/d(eps)`` for shape parameters in ``[mu1, mu2]``: ``(eps/4) ln(mu2/mu1)``."""
    if not (0 < mu1 <= mu2):
        raise DomainError("need 0 < mu1 <= mu2")
    return 0.25 * eps * math.log(mu2 / mu1)


def rect_cumulative_count(eps: float, mu1: float, mu2: float) -> float:
    """Mean number of crossings below ``eps`` in ``[mu1, mu2]``."""
    if not (0 < mu1 <= mu2):
        raise DomainError("need 0 < mu1 <= mu2")
    return eps**2 / 8.0 * math.log(mu2 / mu1)


def _rect_gv_integrand(v):
    w = 1.0 - v

    def f(t):
        s2 = math.sin(t) ** 2
        return 1.0 / math.sqrt((v + w * s2) * (1.0 - w * s2))

    return f


def rect_gv(v: float) -> float:
    """Distribution of the relative slope jump ``v`` for the rectangle.

    After ``z**2 = v + (1 - v) sin(t)**2`` the defining integral has a bounded
    integrand on ``[0, pi/2]``.  The support is ``[0, 1)``: at ``v = 1`` the
    integration range is empty and 0 is returned, even though the left
    limit is ``pi/2``.
    """
    if not (0.0 <= v <= 1.0):
        raise DomainError(f"v must lie in [0, 1], got {v}")
    if v == 0.0 or v == 1.0:
        return 0.0
    pts = [min(math.sqrt(v), 0.25 * math.pi)]
    val = quiet_quad(_rect_gv_integrand(v), 0.0, _HALF_PI, points=pts,
                     epsabs=1e-13, epsrel=1e-12, limit=400)
    return v * val


# ---------------------------------------------------------------------------
# cylinder
# ---------------------------------------------------------------------------

def cyl_smooth_density(eps: float, gamma: float = DEFAULT_GAMMA) -> float:
    """Mean crossings per unit energy per unit flux, ``2 sqrt(eps/gamma)``."""
    if np.any(np.asarray(eps) < 0) or not gamma > 0:
        raise DomainError("need eps >= 0 and gamma > 0")
    return 2.0 * np.sqrt(eps / gamma)


def cyl_cumulative_count(eps: float, gamma: float = DEFAULT_GAMMA) -> float:
    """Mean number of crossings below ``eps`` per unit flux."""
    if eps < 0 or not gamma > 0:
        raise DomainError("need eps >= 0 and gamma > 0")
    return 4.0 / 3.0 * eps**1.5 / math.sqrt(gamma)


def cyl_sign_fractions() -> tuple[float, float]:
    """Fractions of same-sign and opposite-sign crossings, ``(1 - pi/4, pi/4)``."""
    return 1.0 - 0.25 * math.pi, 0.25 * math.pi


def _arcsine_pair(v: float, z_lo: float, z_hi: float) -> float:
    """``int dz / (sqrt(1 - z**2) sqrt(1 - (z - v)**2))`` over part of ``[v-1, 1]``.

    With ``z = (v - 1) + (2 - v) sin(t)**2`` the two factors vanishing at the
    ends of ``[v-1, 1]`` are absorbed by the Jacobian.
    """
    L = 2.0 - v
    if z_hi <= z_lo or L <= 0:
        return 0.0

    def theta(z):
        return math.asin(math.sqrt(min(1.0, max(0.0, (z - v + 1.0) / L))))

    def f(t):
        z = (v - 1.0) + L * math.sin(t) ** 2
        return 2.0 / math.sqrt((1.0 + z) * (1.0 + v - z))

    t0, t1 = theta(z_lo), theta(z_hi)
    pts = [p for p in (theta(v - 1.0 + min(v, 0.5)), theta(1.0 - min(v, 0.5))) if t0 < p < t1]
    val = quiet_quad(f, t0, t1, points=pts or None, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


def cyl_g_plus(v: float) -> float:
    """Same-sign component, nonzero for ``0 < v < 1``."""
    if not 0.0 < v < 1.0:
        return 0.0
    return 0.5 * v * _arcsine_pair(v, v, 1.0)


def cyl_g_minus_low(v: float) -> float:
    """Opposite-sign component on ``0 <= v <= 1``."""
    if not 0.0 < v <= 1.0:
        return 0.0
    return 0.25 * v * _arcsine_pair(v, 0.0, v)


def cyl_g_minus_high(v: float) -> float:
    """Opposite-sign component on ``1 <= v < 2``."""
    if not 1.0 <= v < 2.0:
        return 0.0
    return 0.25 * v * _arcsine_pair(v, v - 1.0, 1.0)


class CylGv(NamedTuple):
    total: float
    plus: float
    minus: float


def cyl_gv(v: float) -> CylGv:
    """Cylinder slope-jump distribution split by sign class.

    The support is ``[0, 2)``; ``v = 2`` gives an empty range and returns
    zeros (the left limit of the total is ``pi/4``).
    """
    if not (0.0 <= v <= 2.0):
        raise DomainError(f"v must lie in [0, 2], got {v}")
    if v <= 1.0:
        p, m = cyl_g_plus(v), cyl_g_minus_low(v)
    else:
        p, m = 0.0, cyl_g_minus_high(v)
    return CylGv(p + m, p, m)


# ---------------------------------------------------------------------------
# tabulated distributions (for CDFs and KS tests)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GvDistribution:
    """A slope-jump density on ``[0, support]`` with a tabulated CDF.

    ``components`` maps a name to a callable density; for the cylinder these
    are ``"plus"`` and ``"minus"``.
    """

    support: float
    pdf: Callable[[float], float]
    components: dict = field(default_factory=dict)
    nodes: np.ndarray = field(default=None, repr=False)
    cdf_nodes: np.ndarray = field(default=None, repr=False)

    def cdf(self, v):
        v = np.clip(np.asarray(v, dtype=float), 0.0, self.support)
        return PchipInterpolator(self.nodes, self.cdf_nodes)(v)

    def mass(self) -> float:
        return float(self.cdf_nodes[-1])


def _tabulate(pdf, breaks, n_per_unit=600, order=8):
    nodes = [0.0]
    x, w = np.polynomial.legendre.leggauss(order)
    inc = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        # geometric refinement toward v = 0, where g ~ v log v
        n = int(n_per_unit * (b - a))
        if a == 0.0:
            edges = np.concatenate([[0.0], np.geomspace(1e-8, 0.02, 60), np.linspace(0.02, b, n)[1:]])
        else:
            edges = np.linspace(a, b, n + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            h = 0.5 * (hi - lo)
            c = 0.5 * (hi + lo)
            inc.append(h * sum(wi * pdf(c + h * xi) for xi, wi in zip(x, w)))
            nodes.append(hi)
    return np.array(nodes), np.concatenate([[0.0], np.cumsum(inc)])


@lru_cache(maxsize=None)
def rect_distribution() -> GvDistribution:
    nodes, cdf = _tabulate(rect_gv, [0.0, 1.0])
    return GvDistribution(1.0, rect_gv, {}, nodes, cdf)


@lru_cache(maxsize=None)
def cyl_distribution() -> GvDistribution:
    nodes, cdf = _tabulate(lambda v: cyl_gv(v).total, [0.0, 1.0, 2.0])
    comps = {"plus": lambda v: cyl_gv(v).plus, "minus": lambda v: cyl_gv(v).minus}
    return GvDistribution(2.0, lambda v: cyl_gv(v).total, comps, nodes, cdf)


# ---------------------------------------------------------------------------
# generic action-space integrals
# ---------------------------------------------------------------------------

def generic_dcds(model: BilliardModel, eps: float, mu: float, v: float) -> float:
    """Smooth density of crossings per unit energy, parameter and ``v``.

    Sums over the two branches ``sigma(I1') = sigma(I1) +/- V`` of the
    on-shell slope ``sigma``,

        (1/2) sum_branch int dI1  V / (omega2(I1) omega2(I1') |sigma'(I1')|),

    then converts from ``V`` to ``v = V / slope_scale``.  Each branch panel
    ends where ``I1`` or ``I1'`` reaches the shell boundary, which is where
    the integrand has its inverse-square-root singularities.
    """
    if not eps > 0:
        raise OffShellError(f"energy must be positive, got {eps}")
    model.check_param(mu)
    v_max = 2.0 if isinstance(model, CylinderBilliard) else 1.0
    if not 0.0 <= v <= v_max:
        raise DomainError(f"v must lie in [0, {v_max}], got {v}")
    if v == 0.0:
        return 0.0
    scale = model.slope_scale(eps, mu)
    V = v * scale
    lo, hi = model.shell_range(eps, mu)
    s_lo, s_hi = sorted((model.shell_slope(eps, lo, mu), model.shell_slope(eps, hi, mu)))

    total = 0.0
    for branch in (1.0, -1.0):
        t_lo = max(s_lo, s_lo - branch * V)
        t_hi = min(s_hi, s_hi - branch * V)
        if t_hi <= t_lo:
            continue
        a, b = sorted((float(model.shell_slope_inverse(eps, t_lo, mu)),
                       float(model.shell_slope_inverse(eps, t_hi, mu))))

        def f(x, branch=branch):
            xp = model.shell_slope_inverse(eps, model.shell_slope(eps, x, mu) + branch * V, mu)
            den = model.omega2(eps, x, mu) * model.omega2(eps, xp, mu) * abs(model.shell_slope_di1(eps, xp, mu))
            return V / den

        total += sine_squared_quad(f, a, b)
    return 0.5 * total * scale


def generic_smooth_density(model: BilliardModel, eps: float, mu: float) -> float:
    """Smooth crossing density from the double action integral.

    ``(1/2) int int dI1 dI1' |sigma(I1) - sigma(I1')| / (omega2 omega2')``; the
    inner integral is split at ``I1' = I1`` where the kernel changes sign
    (the on-shell slope is monotone for both models).
    """
    if eps < 0:
        raise OffShellError(f"energy must be nonnegative, got {eps}")
    if eps == 0:
        return 0.0
    model.check_param(mu)
    lo, hi = model.shell_range(eps, mu)

    def inner(x):
        sx = model.shell_slope(eps, x, mu)

        def k(y):
            return abs(sx - model.shell_slope(eps, y, mu)) / model.omega2(eps, y, mu)

        return (sine_squared_quad(k, lo, x, epsabs=1e-11, epsrel=1e-10)
                + sine_squared_quad(k, x, hi, epsabs=1e-11, epsrel=1e-10))

    outer = sine_squared_quad(lambda x: inner(x) / model.omega2(eps, x, mu), lo, hi,
                              epsabs=1e-10, epsrel=1e-10)
    return 0.5 * outer
