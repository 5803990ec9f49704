"""Truncated periodic-orbit sums for the oscillating crossing density.

Each sum runs over orbit topologies ``(m1, m2)`` up to ``m_max``:

* rectangle: ``1 <= m1, m2 <= m_max``;
* cylinder: ``0 <= m1 <= m_max`` and ``1 <= m2 <= m_max``, the sign of the
  winding being folded into the multiplicity ``Delta = 2`` (``m1 != 0``).
  ``m2 = 0`` orbits touch the shell edge where the stationary-phase
  curvature diverges and are left out.

Point evaluations accumulate with :func:`math.fsum`, so the result does not
depend on term order.  The pair sums (``osc2``) use a sorted prefix-sum
evaluation of ``sum_ij |x_i - x_j| u_i w_j`` that costs ``O(N log N)``
instead of ``O(N**2)``; the literal quadruple sum is kept as a reference
(``method="direct"``).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .billiards import DEFAULT_GAMMA, BilliardModel, CylinderBilliard, DomainError, RectBilliard

__all__ = [
    "OrbitTopology",
    "TruncationSpec",
    "OscWindow",
    "orbit_topologies",
    "rect_osc1",
    "rect_osc2",
    "cyl_osc1",
    "cyl_osc2",
    "cyl_integrated_osc1",
    "cyl_integrated_osc1_curve",
    "cyl_flux_average_osc1",
    "cyl_integrated_osc2",
    "osc_grid",
    "abs_kernel_bilinear",
]

TWO_PI = 2.0 * math.pi
QUARTER_PI = 0.25 * math.pi


@dataclass(frozen=True)
class OrbitTopology:
    """A periodic-orbit class with its action, Maslov phase and multiplicity."""

    m1: int
    m2: int
    multiplicity: int
    action: float
    phase: float = -QUARTER_PI


@dataclass(frozen=True)
class TruncationSpec:
    """Orbit cutoff and grid size for oscillating-sum evaluations."""

    m_max: int = 150
    n_eps: int = 512
    n_mu: int = 512

    def __post_init__(self):
        if self.m_max < 1 or self.n_eps < 1 or self.n_mu < 1:
            raise DomainError("m_max, n_eps and n_mu must all be >= 1")


@dataclass(frozen=True)
class OscWindow:
    """Rectangle ``[eps_min, eps_max] x [mu_min, mu_max]`` sampled at cell centres."""

    eps_min: float
    eps_max: float
    mu_min: float
    mu_max: float

    def __post_init__(self):
        if not (0 < self.eps_min < self.eps_max and self.mu_min < self.mu_max):
            raise DomainError("degenerate oscillating-sum window")

    def axes(self, n_eps: int, n_mu: int) -> tuple[np.ndarray, np.ndarray]:
        de = (self.eps_max - self.eps_min) / n_eps
        dm = (self.mu_max - self.mu_min) / n_mu
        return (self.eps_min + de * (np.arange(n_eps) + 0.5),
                self.mu_min + dm * (np.arange(n_mu) + 0.5))

    def cell(self, n_eps: int, n_mu: int) -> tuple[float, float]:
        return (self.eps_max - self.eps_min) / n_eps, (self.mu_max - self.mu_min) / n_mu


def _check_m(m_max):
    if m_max < 0 or int(m_max) != m_max:
        raise DomainError(f"m_max must be a nonnegative integer, got {m_max}")
    return int(m_max)


def _lattice(m_max: int, m1_start: int):
    """Orbit indices ordered by ``m1**2 + m2**2`` (ties by ``m1``)."""
    m1, m2 = np.meshgrid(np.arange(m1_start, m_max + 1), np.arange(1, m_max + 1), indexing="ij")
    m1, m2 = m1.ravel().astype(float), m2.ravel().astype(float)
    order = np.lexsort((m1, m1**2 + m2**2))
    return m1[order], m2[order]


def orbit_topologies(model: BilliardModel, eps: float, mu: float, m_max: int) -> list[OrbitTopology]:
    """Orbit classes entering the truncated sums, with actions at ``(eps, mu)``."""
    m_max = _check_m(m_max)
    out = []
    if isinstance(model, RectBilliard):
        m1, m2 = _lattice(m_max, 1)
        S = TWO_PI * np.sqrt((m1**2 / mu + m2**2 * mu) * eps)
        mult = np.ones_like(m1)
    else:
        m1, m2 = _lattice(m_max, 0)
        S = TWO_PI * np.sqrt(eps / model.gamma * (m1**2 + model.gamma * m2**2))
        mult = np.where(m1 == 0, 1, 2)
    for a, b, d, s in zip(m1, m2, mult, S):
        out.append(OrbitTopology(int(a), int(b), int(d), float(s)))
    return out


# ---------------------------------------------------------------------------
# pair-sum kernel
# ---------------------------------------------------------------------------

def abs_kernel_bilinear(x, u, w):
    """``sum_{i,j} |x_i - x_j| u_i w_j`` by sorting and prefix sums.

    Works for real or complex ``u`` and ``w``.
    """
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    x, u, w = x[order], np.asarray(u)[order], np.asarray(w)[order]
    # below: i < j in sorted order, |x_i - x_j| = x_j - x_i
    U = np.cumsum(u) - u
    XU = np.cumsum(x * u) - x * u
    W = np.cumsum(w) - w
    XW = np.cumsum(x * w) - x * w
    return np.sum(w * (x * U - XU)) + np.sum(u * (x * W - XW))


# ---------------------------------------------------------------------------
# rectangle
# ---------------------------------------------------------------------------

def _rect_terms(eps, mu, m_max):
    m1, m2 = _lattice(m_max, 1)
    Q = m1**2 + m2**2 * mu**2
    S = TWO_PI * np.sqrt((m1**2 / mu + m2**2 * mu) * eps)
    return m1, m2, Q, S


def _rect_osc1_amp(m1, m2, Q, mu):
    return Q**-0.25 * ((4 * m1 * m2 * mu + math.pi * (m2**2 * mu**2 - m1**2)) / (8 * Q)
                       + (m1**2 - m2**2 * mu**2) / (2 * Q) * np.arcsin(m1 / np.sqrt(Q)))


def rect_osc1(eps: float, mu: float, m_max: int = 150) -> float:
    """First oscillating contribution for the rectangle (double orbit sum)."""
    m_max = _check_m(m_max)
    if not (eps > 0 and mu > 0):
        raise DomainError("need eps > 0 and mu > 0")
    if m_max == 0:
        return 0.0
    m1, m2, Q, S = _rect_terms(eps, mu, m_max)
    terms = _rect_osc1_amp(m1, m2, Q, mu) * np.cos(S - QUARTER_PI)
    return (eps / mu) ** 0.75 * math.fsum(terms)


def rect_osc2(eps: float, mu: float, m_max: int = 150, method: str = "sorted") -> float:
    """Second oscillating contribution for the rectangle (pair orbit sum)."""
    m_max = _check_m(m_max)
    if not (eps > 0 and mu > 0):
        raise DomainError("need eps > 0 and mu > 0")
    if m_max == 0:
        return 0.0
    m1, m2, Q, S = _rect_terms(eps, mu, m_max)
    a = Q**-0.25 * np.cos(S - QUARTER_PI)
    x = m1**2 / Q
    if method == "sorted":
        total = abs_kernel_bilinear(x, a, a)
    elif method == "direct":
        total = math.fsum((np.abs(x[:, None] - x[None, :]) * a[:, None] * a[None, :]).ravel())
    else:
        raise DomainError(f"unknown method {method!r}")
    return math.sqrt(eps / mu) * float(total)


# ---------------------------------------------------------------------------
# cylinder
# ---------------------------------------------------------------------------

def _cyl_terms(eps, gamma, m_max):
    m1, m2 = _lattice(m_max, 0)
    Q = m1**2 + gamma * m2**2
    S = np.sqrt(eps / gamma * Q)  # action in units of 2 pi
    return m1, m2, Q, S


def _cyl_osc1_amp(m1, m2, Q, eps, gamma):
    r = m1 / np.sqrt(Q)
    delta = np.where(m1 == 0, 1.0, 2.0)
    return delta * (eps / (gamma * Q)) ** 0.25 * (r * np.arcsin(r) + math.sqrt(gamma) * m2 / np.sqrt(Q))


def _check_cyl(eps, gamma):
    if not (eps > 0 and gamma > 0):
        raise DomainError("need eps > 0 and gamma > 0")


def cyl_osc1(eps: float, phi: float, gamma: float = DEFAULT_GAMMA, m_max: int = 150) -> float:
    """First oscillating contribution for the flux-threaded cylinder."""
    m_max = _check_m(m_max)
    _check_cyl(eps, gamma)
    if m_max == 0:
        return 0.0
    m1, m2, Q, S = _cyl_terms(eps, gamma, m_max)
    # cos(2 pi m1 phi) is evaluated on the fractional part so that integer
    # shifts of the flux leave every term bit-identical
    frac = phi - math.floor(phi)
    terms = _cyl_osc1_amp(m1, m2, Q, eps, gamma) * np.cos(TWO_PI * S - QUARTER_PI) * np.cos(TWO_PI * m1 * frac)
    return math.fsum(terms)


def _cyl_osc2_parts(eps, phi, gamma, m_max):
    m1, m2, Q, S = _cyl_terms(eps, gamma, m_max)
    k = m1 / Q
    alpha = TWO_PI * S
    beta = TWO_PI * m1 * (phi - math.floor(phi))
    return k, alpha, beta


def cyl_osc2(eps: float, phi: float, gamma: float = DEFAULT_GAMMA, m_max: int = 150,
             method: str = "sorted") -> float:
    """Second oscillating contribution for the cylinder, pair sum as printed.

    With ``k = m1/(m1**2 + gamma m2**2)``, ``a = 2 pi S`` and ``b = 2 pi m1 phi``
    every ordered pair contributes

        |k - k'| [cos(a - a') cos(b - b') + sin(a + a') cos(b + b')]
        + (k + k') [sin(a + a') cos(b - b') + cos(a - a') cos(b + b')].
    """
    m_max = _check_m(m_max)
    _check_cyl(eps, gamma)
    if m_max == 0:
        return 0.0
    k, a, b = _cyl_osc2_parts(eps, phi, gamma, m_max)
    if method == "direct":
        da = a[:, None] - a[None, :]
        sa = a[:, None] + a[None, :]
        db = b[:, None] - b[None, :]
        sb = b[:, None] + b[None, :]
        K = np.abs(k[:, None] - k[None, :])
        L = k[:, None] + k[None, :]
        t = (K * (np.cos(da) * np.cos(db) + np.sin(sa) * np.cos(sb))
             + L * (np.sin(sa) * np.cos(db) + np.cos(da) * np.cos(sb)))
        return math.fsum(t.ravel())
    if method != "sorted":
        raise DomainError(f"unknown method {method!r}")
    E = np.exp(1j * (a + b))
    F = np.exp(1j * (a - b))
    # product-to-sum: every bracket is a sum of separable z_i w_j pieces
    k1 = 0.5 * (abs_kernel_bilinear(k, E, E.conj()).real + abs_kernel_bilinear(k, F, F.conj()).real
                + abs_kernel_bilinear(k, E, E).imag + abs_kernel_bilinear(k, F, F).imag)

    def plus_kernel(z, w):
        # sum_ij (k_i + k_j) z_i w_j
        return np.sum(k * z) * np.sum(w) + np.sum(z) * np.sum(k * w)

    k2 = 0.5 * ((plus_kernel(E, F) + plus_kernel(F, E)).imag
                + (plus_kernel(E, F.conj()) + plus_kernel(F, E.conj())).real)
    return float(k1 + k2)


def cyl_integrated_osc1(eps: float, gamma: float = DEFAULT_GAMMA, m_max: int = 500) -> float:
    """Flux-integrated first oscillating term, ``2 (eps/gamma)**(1/4) sum m2**-1/2 cos(...)``.

    Only the non-rotating (``m1 = 0``) orbits survive the flux integral.
    """
    m_max = _check_m(m_max)
    _check_cyl(eps, gamma)
    if m_max == 0:
        return 0.0
    m2 = np.arange(1, m_max + 1, dtype=float)
    terms = m2**-0.5 * np.cos(TWO_PI * m2 * math.sqrt(eps) - QUARTER_PI)
    return 2.0 * (eps / gamma) ** 0.25 * math.fsum(terms)


def cyl_integrated_osc1_curve(eps, gamma: float = DEFAULT_GAMMA, m_max: int = 500,
                              block: int = 4096) -> np.ndarray:
    """Vectorised :func:`cyl_integrated_osc1` over an array of energies."""
    m_max = _check_m(m_max)
    eps = np.asarray(eps, dtype=float)
    if np.any(eps <= 0) or not gamma > 0:
        raise DomainError("need eps > 0 and gamma > 0")
    flat = eps.ravel()
    out = np.zeros(flat.size)
    if m_max:
        m2 = np.arange(1, m_max + 1, dtype=float)
        w = m2**-0.5
        for s in range(0, flat.size, block):
            e = flat[s:s + block]
            out[s:s + block] = np.cos(TWO_PI * np.sqrt(e)[:, None] * m2[None, :] - QUARTER_PI) @ w
        out *= 2.0 * (flat / gamma) ** 0.25
    return out.reshape(eps.shape)


def cyl_flux_average_osc1(eps: float, gamma: float = DEFAULT_GAMMA, m_max: int = 150) -> float:
    """Exact flux average of :func:`cyl_osc1`: its ``m1 = 0`` partial sum.

    This differs from :func:`cyl_integrated_osc1` by the constant factor
    ``2 gamma**(1/4)``, a normalization mismatch between the two printed
    amplitudes that is kept as is.
    """
    m_max = _check_m(m_max)
    _check_cyl(eps, gamma)
    if m_max == 0:
        return 0.0
    m2 = np.arange(1, m_max + 1, dtype=float)
    terms = m2**-0.5 * np.cos(TWO_PI * m2 * math.sqrt(eps) - QUARTER_PI)
    return eps**0.25 / math.sqrt(gamma) * math.fsum(terms)


def cyl_integrated_osc2(eps: float, gamma: float = DEFAULT_GAMMA, m_max: int = 150) -> float:
    """Exact flux integral over one period of :func:`cyl_osc2`.

    Only pairs with ``m1 = m1'`` survive; for those the flux factors are 1
    (difference) and 0 (sum, unless ``m1 = m1' = 0`` where ``k`` vanishes).
    """
    m_max = _check_m(m_max)
    _check_cyl(eps, gamma)
    if m_max == 0:
        return 0.0
    m2 = np.arange(1, m_max + 1, dtype=float)
    parts = []
    for m1 in range(1, m_max + 1):
        Q = m1**2 + gamma * m2**2
        k = m1 / Q
        E = np.exp(1j * TWO_PI * np.sqrt(eps / gamma * Q))
        diff = abs_kernel_bilinear(k, E, E.conj()).real
        plus = 2.0 * (np.sum(k * E) * np.sum(E)).imag
        parts.extend((diff, plus))
    return math.fsum(parts)


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def _rect_column(eps_axis, mu, m_max, block=128):
    m1, m2, Q, _ = _rect_terms(1.0, mu, m_max)
    amp = _rect_osc1_amp(m1, m2, Q, mu)
    c = TWO_PI * np.sqrt(m1**2 / mu + m2**2 * mu)
    out = np.empty(eps_axis.size)
    for s in range(0, eps_axis.size, block):
        e = eps_axis[s:s + block]
        out[s:s + block] = np.cos(np.sqrt(e)[:, None] * c[None, :] - QUARTER_PI) @ amp
    return (eps_axis / mu) ** 0.75 * out


def _cyl_grid(eps_axis, phi_axis, gamma, m_max):
    m1v = np.arange(m_max + 1, dtype=float)
    m2v = np.arange(1, m_max + 1, dtype=float)
    B = np.empty((eps_axis.size, m1v.size))
    for i, m1 in enumerate(m1v):
        m1a = np.full_like(m2v, m1)
        Q = m1**2 + gamma * m2v**2
        amp = _cyl_osc1_amp(m1a, m2v, Q, 1.0, gamma)
        phase = TWO_PI * np.sqrt(eps_axis[:, None] * Q[None, :] / gamma) - QUARTER_PI
        B[:, i] = eps_axis**0.25 * (np.cos(phase) @ amp)
    frac = phi_axis - np.floor(phi_axis)
    return B @ np.cos(TWO_PI * m1v[:, None] * frac[None, :])


def osc_grid(model: BilliardModel, window: OscWindow, truncation: TruncationSpec = TruncationSpec(),
             workers: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``osc1`` on the cell-centred lattice of ``window``.

    Returns
    -------
    eps_axis : ndarray, shape (n_eps,)
    mu_axis : ndarray, shape (n_mu,)
    values : ndarray, shape (n_eps, n_mu)
        Row-major in energy.  Columns are computed independently, so the
        result does not depend on ``workers``.
    """
    if workers < 1:
        raise DomainError("workers must be >= 1")
    eps_axis, mu_axis = window.axes(truncation.n_eps, truncation.n_mu)
    M = truncation.m_max
    if isinstance(model, CylinderBilliard):
        return eps_axis, mu_axis, _cyl_grid(eps_axis, mu_axis, model.gamma, M)
    if window.mu_min <= 0:
        raise DomainError("rectangle window needs mu_min > 0")
    if workers == 1:
        cols = [_rect_column(eps_axis, mu, M) for mu in mu_axis]
    else:
        with ThreadPoolExecutor(workers) as pool:
            cols = list(pool.map(lambda mu: _rect_column(eps_axis, mu, M), mu_axis))
    return eps_axis, mu_axis, np.column_stack(cols)
