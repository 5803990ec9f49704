"""Exact enumeration of level crossings.

Both models have closed-form crossing parameters, so every degeneracy in an
``(eps, mu)`` window is found by iterating unordered pairs of candidate
levels.  :func:`scan_crossings` is an independent grid-scan-plus-bisection
brute force used as an oracle.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .billiards import BilliardModel, CylinderBilliard, DomainError, LevelKey, RectBilliard
from .spectrum import candidate_levels

__all__ = [
    "Crossing",
    "CrossingWindow",
    "CrossingSet",
    "crossing_of_pair",
    "enumerate_crossings",
    "classify_sign",
    "scan_crossings",
]

SIGN_LABELS = {1: "+", -1: "-", 0: "."}
RESIDUAL_RTOL = 1e-9
_BLOCK_PAIRS = 4_000_000


@dataclass(frozen=True)
class Crossing:
    """A resolved degeneracy between two levels.

    ``pair`` is ordered lexicographically by quantum numbers, so a crossing
    does not depend on the order its levels were supplied in.
    """

    pair: tuple[LevelKey, LevelKey]
    mu_star: float
    energy: float
    slope_gap: float
    relative_gap: float
    sign: str

    @property
    def V(self) -> float:
        return self.slope_gap

    @property
    def v(self) -> float:
        return self.relative_gap


@dataclass(frozen=True)
class CrossingWindow:
    """Crossings with energy ``<= eps_max`` and parameter in ``[mu_min, mu_max)``.

    Parameters
    ----------
    closed : bool
        Include ``mu_max`` itself (``[mu_min, mu_max]``).
    level_cutoff : {"crossing", "window"}
        ``"crossing"`` applies the energy cutoff at the crossing point.
        ``"window"`` only admits levels that stay at or below ``eps_max``
        over the whole parameter window.
    """

    model: BilliardModel
    eps_max: float
    mu_min: float
    mu_max: float
    closed: bool = False
    level_cutoff: str = "crossing"

    def __post_init__(self):
        if not (math.isfinite(self.eps_max) and math.isfinite(self.mu_min) and math.isfinite(self.mu_max)):
            raise DomainError("window bounds must be finite")
        if not self.mu_min < self.mu_max:
            raise DomainError(f"need mu_min < mu_max, got [{self.mu_min}, {self.mu_max})")
        self.model.check_param(self.mu_min)
        self.model.check_param(self.mu_max)
        if self.level_cutoff not in ("crossing", "window"):
            raise DomainError(f"level_cutoff must be 'crossing' or 'window', got {self.level_cutoff!r}")

    def contains_mu(self, mu):
        upper = mu <= self.mu_max if self.closed else mu < self.mu_max
        return (mu >= self.mu_min) & upper


@dataclass
class CrossingSet:
    """Column store of crossings, ordered by ``(mu_star, energy, keys)``.

    Behaves as a read-only sequence of :class:`Crossing`.
    """

    model_tag: str
    n1: np.ndarray
    n2: np.ndarray
    n1p: np.ndarray
    n2p: np.ndarray
    mu_star: np.ndarray
    energy: np.ndarray
    V: np.ndarray
    v: np.ndarray
    sign: np.ndarray  # int8: +1, -1, 0 (not applicable)

    def __len__(self) -> int:
        return int(self.mu_star.size)

    def __getitem__(self, i: int) -> Crossing:
        tag = self.model_tag
        return Crossing(
            pair=(LevelKey(tag, int(self.n1[i]), int(self.n2[i])),
                  LevelKey(tag, int(self.n1p[i]), int(self.n2p[i]))),
            mu_star=float(self.mu_star[i]),
            energy=float(self.energy[i]),
            slope_gap=float(self.V[i]),
            relative_gap=float(self.v[i]),
            sign=SIGN_LABELS[int(self.sign[i])],
        )

    def __iter__(self) -> Iterator[Crossing]:
        return (self[i] for i in range(len(self)))

    @property
    def n_plus(self) -> int:
        return int(np.count_nonzero(self.sign == 1))

    @property
    def n_minus(self) -> int:
        return int(np.count_nonzero(self.sign == -1))

    def select(self, mask) -> "CrossingSet":
        mask = np.asarray(mask)
        return CrossingSet(self.model_tag, *(getattr(self, f)[mask] for f in _COLUMNS))

    def pair_keys(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        return [((int(a), int(b)), (int(c), int(d)))
                for a, b, c, d in zip(self.n1, self.n2, self.n1p, self.n2p)]

    @classmethod
    def empty(cls, tag: str) -> "CrossingSet":
        z = np.zeros(0, np.int64)
        f = np.zeros(0)
        return cls(tag, z, z, z, z, f, f, f, f, np.zeros(0, np.int8))


_COLUMNS = ("n1", "n2", "n1p", "n2p", "mu_star", "energy", "V", "v", "sign")


def _pair_kernel(model: BilliardModel, a1, a2, b1, b2):
    """Closed-form crossing of level arrays ``(a1, a2)`` and ``(b1, b2)``.

    Returns the subset of pairs that cross as a dict of arrays.  Arithmetic
    is shared between the scalar and vectorised entry points so both give
    bit-identical results.
    """
    a1 = np.asarray(a1, np.int64)
    a2 = np.asarray(a2, np.int64)
    b1 = np.asarray(b1, np.int64)
    b2 = np.asarray(b2, np.int64)
    if isinstance(model, RectBilliard):
        den = a1**2 - b1**2
        num = b2**2 - a2**2
        ok = (den != 0) & (num * den > 0)
        a1, a2, b1, b2, den, num = a1[ok], a2[ok], b1[ok], b2[ok], den[ok], num[ok]
        mu = np.sqrt(num / den)
        fa1, fa2, fb1, fb2 = (x.astype(float) for x in (a1, a2, b1, b2))
        e = model.h(fa1, fa2, mu)
        e_other = model.h(fb1, fb2, mu)
        sa = model.dh(fa1, fa2, mu)
        sb = model.dh(fb1, fb2, mu)
        V = np.abs(sa - sb)
        v = V / (2.0 * e / mu)
        sign = np.zeros(mu.size, np.int8)
    else:
        g = model.gamma
        ok = a1 != b1
        a1, a2, b1, b2 = a1[ok], a2[ok], b1[ok], b2[ok]
        delta = (b2 + 1) ** 2 - (a2 + 1) ** 2
        fa1, fa2, fb1, fb2 = (x.astype(float) for x in (a1, a2, b1, b2))
        mu = (fa1 + fb1) / 2.0 - delta / (2.0 * g * (fa1 - fb1))
        e = model.h(fa1, fa2, mu)
        e_other = model.h(fb1, fb2, mu)
        sa = model.dh(fa1, fa2, mu)
        sb = model.dh(fb1, fb2, mu)
        V = np.abs(sa - sb)
        v = V / (2.0 * np.sqrt(g * e))
        sign = np.where(sa * sb > 0, 1, -1).astype(np.int8)
    resid = np.abs(e - e_other)
    bad = resid > RESIDUAL_RTOL * np.maximum(1.0, e)
    if np.any(bad):
        raise FloatingPointError(f"crossing residual {resid[bad].max():.3g} exceeds tolerance")
    return dict(n1=a1, n2=a2, n1p=b1, n2p=b2, mu_star=mu, energy=e, V=V, v=v, sign=sign)


def _canonical(k1: LevelKey, k2: LevelKey):
    return (k1, k2) if (k1.n1, k1.n2) <= (k2.n1, k2.n2) else (k2, k1)


def crossing_of_pair(model: BilliardModel, key1: LevelKey, key2: LevelKey) -> list[Crossing]:
    """All crossings of two distinct levels.

    The rectangle has at most one root with ``mu > 0``; cylinder levels are
    parabolas in the flux with equal curvature and cross at most once
    (never when ``n1 == n1'``).  The cylinder flux is not folded back into
    ``[0, 1)``.
    """
    model.check_key(key1)
    model.check_key(key2)
    if (key1.n1, key1.n2) == (key2.n1, key2.n2):
        raise DomainError(f"a level cannot cross itself: {key1}")
    k1, k2 = _canonical(key1, key2)
    cols = _pair_kernel(model, [k1.n1], [k1.n2], [k2.n1], [k2.n2])
    return list(CrossingSet(model.tag, *(cols[f] for f in _COLUMNS)))


def classify_sign(model: BilliardModel, crossing: Crossing) -> str:
    """``"+"`` when both flux slopes share a sign at the crossing, else ``"-"``.

    A level sitting exactly at its parabola vertex (zero slope) makes the
    crossing ``"-"``.
    """
    if not isinstance(model, CylinderBilliard):
        raise DomainError("sign classes are defined for the cylinder only")
    (ka, kb) = crossing.pair
    sa = model.dh(ka.n1, ka.n2, crossing.mu_star)
    sb = model.dh(kb.n1, kb.n2, crossing.mu_star)
    return "+" if sa * sb > 0 else "-"


def _block(model, window, n1, n2, start, stop):
    n = n1.size
    rows = np.arange(start, stop)
    I, J = np.meshgrid(rows, np.arange(n), indexing="ij")
    keep = J > I
    I, J = I[keep], J[keep]
    cols = _pair_kernel(model, n1[I], n2[I], n1[J], n2[J])
    sel = window.contains_mu(cols["mu_star"]) & (cols["energy"] <= window.eps_max)
    return {k: c[sel] for k, c in cols.items()}


def enumerate_crossings(window: CrossingWindow, workers: int = 1) -> CrossingSet:
    """Every crossing inside ``window``, each unordered pair counted once.

    The pair space is split into blocks of first-level rows; blocks may be
    processed concurrently and are merged by a final sort, so the output
    does not depend on ``workers``.
    """
    if workers < 1:
        raise DomainError("workers must be >= 1")
    model = window.model
    mode = "window" if window.level_cutoff == "window" else "dip"
    n1, n2 = candidate_levels(model, window.eps_max, window.mu_min, window.mu_max, mode)
    n = n1.size
    if n < 2:
        return CrossingSet.empty(model.tag)
    rows_per_block = max(1, _BLOCK_PAIRS // n)
    starts = list(range(0, n, rows_per_block))
    jobs = [(s, min(n, s + rows_per_block)) for s in starts]
    if workers == 1:
        parts = [_block(model, window, n1, n2, s, e) for s, e in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda se: _block(model, window, n1, n2, *se), jobs))
    cols = {k: np.concatenate([p[k] for p in parts]) for k in _COLUMNS}
    order = np.lexsort((cols["n2p"], cols["n1p"], cols["n2"], cols["n1"], cols["energy"], cols["mu_star"]))
    return CrossingSet(model.tag, *(cols[k][order] for k in _COLUMNS))


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def _box_levels(model: BilliardModel, eps_max, mu_min, mu_max):
    """Generous rectangular box of quantum numbers, pruned on the scan grid."""
    if isinstance(model, RectBilliard):
        n1 = np.arange(1, math.ceil(math.sqrt(eps_max / mu_min)) + 2)
        n2 = np.arange(1, math.ceil(math.sqrt(eps_max * mu_max)) + 2)
    else:
        n2 = np.arange(0, math.ceil(math.sqrt(eps_max)) + 1)
        w = math.ceil(math.sqrt(eps_max / model.gamma)) + math.ceil(max(abs(mu_min), abs(mu_max))) + 2
        n1 = np.arange(-w, w + 1)
    N1, N2 = np.meshgrid(n1, n2, indexing="ij")
    return N1.ravel(), N2.ravel()


def scan_crossings(window: CrossingWindow, step: float = 1e-4, xtol: float = 1e-12):
    """Brute-force crossings by sign changes on a parameter grid plus bisection.

    Only the energy cutoff at the crossing point (``level_cutoff="crossing"``)
    is supported.

    Returns
    -------
    list of ((n1, n2), (n1', n2'), mu_star, energy)
        Sorted by ``(mu_star, energy, keys)``.
    """
    model = window.model
    lo, hi = window.mu_min, window.mu_max
    K = max(1, math.ceil((hi - lo) / step))
    grid = lo + (hi - lo) * np.arange(K + 1) / K
    n1, n2 = _box_levels(model, window.eps_max, lo, hi)
    f1, f2 = n1.astype(float), n2.astype(float)
    E = model.h(f1[:, None], f2[:, None], grid[None, :])
    # a level between nodes can dip below its node values by at most this much
    dmax = np.abs(model.dh(f1[:, None], f2[:, None], grid[None, :])).max(axis=1) * (hi - lo) / K
    live = E.min(axis=1) - dmax <= window.eps_max
    n1, n2, E = n1[live], n2[live], E[live]
    f1, f2 = n1.astype(float), n2.astype(float)
    I, J = np.triu_indices(n1.size, 1)
    out = []
    for s in range(0, I.size, 256):
        i, j = I[s:s + 256], J[s:s + 256]
        d = E[i] - E[j]
        # exact zeros on nodes
        zi, zk = np.nonzero(d == 0.0)
        roots = [(i[zi], j[zi], grid[zk])]
        # strict sign changes between nodes
        ci, ck = np.nonzero(d[:, :-1] * d[:, 1:] < 0)
        a = grid[ck].copy()
        b = grid[ck + 1].copy()
        pa, pb = i[ci], j[ci]
        da = d[ci, ck]
        for _ in range(200):
            if np.all(b - a <= xtol):
                break
            m = 0.5 * (a + b)
            dm = model.h(f1[pa], f2[pa], m) - model.h(f1[pb], f2[pb], m)
            left = np.sign(dm) == np.sign(da)
            a = np.where(left, m, a)
            da = np.where(left, dm, da)
            b = np.where(left, b, m)
        roots.append((pa, pb, 0.5 * (a + b)))
        for pi, pj, mu in roots:
            e = model.h(f1[pi], f2[pi], mu)
            ok = window.contains_mu(mu) & (e <= window.eps_max)
            for x, y, m, en in zip(pi[ok], pj[ok], mu[ok], e[ok]):
                ka = (int(n1[x]), int(n2[x]))
                kb = (int(n1[y]), int(n2[y]))
                ka, kb = min(ka, kb), max(ka, kb)
                out.append((ka, kb, float(m), float(en)))
    out.sort(key=lambda r: (r[2], r[3], r[0], r[1]))
    return out
