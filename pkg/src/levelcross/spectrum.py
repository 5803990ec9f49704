"""Level enumeration below an energy cutoff."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .billiards import BilliardModel, DomainError, LevelKey, RectBilliard

__all__ = ["SpectrumWindow", "enumerate_levels", "level_table", "level_curve", "candidate_levels"]


@dataclass(frozen=True)
class SpectrumWindow:
    """All levels of ``model`` with energy ``<= eps_max`` at parameter ``mu``."""

    model: BilliardModel
    eps_max: float
    mu: float

    def __post_init__(self):
        if not math.isfinite(self.eps_max):
            raise DomainError("eps_max must be finite")
        self.model.check_param(self.mu)


def candidate_levels(model: BilliardModel, eps_max: float, mu_min: float, mu_max: float,
                     mode: str = "dip") -> tuple[np.ndarray, np.ndarray]:
    """Quantum numbers of levels that reach ``eps_max`` inside ``[mu_min, mu_max]``.

    ``mode="dip"`` keeps a level if its minimum over the window is ``<= eps_max``;
    ``mode="window"`` keeps it only if it stays ``<= eps_max`` over the whole
    window.  Both level families are convex in the parameter, so the window
    maximum sits at an endpoint.

    Returns
    -------
    n1, n2 : ndarray of int64
        Sorted lexicographically by ``(n1, n2)``.
    """
    if mode not in ("dip", "window"):
        raise DomainError(f"unknown candidate mode {mode!r}")
    model.check_param(mu_min)
    model.check_param(mu_max)
    if mu_max < mu_min:
        raise DomainError("mu_max < mu_min")
    if not eps_max > 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)

    if isinstance(model, RectBilliard):
        n1 = np.arange(1, int(math.sqrt(eps_max / mu_min)) + 2)
        n2 = np.arange(1, int(math.sqrt(eps_max * mu_max)) + 2)
        N1, N2 = np.meshgrid(n1, n2, indexing="ij")
        if mode == "dip":
            mu_c = np.clip(N2 / N1, mu_min, mu_max)
            e = model.h(N1, N2, mu_c)
        else:
            e = np.maximum(model.h(N1, N2, mu_min), model.h(N1, N2, mu_max))
    else:
        g = model.gamma
        n2 = np.arange(0, int(math.sqrt(eps_max)) + 1)
        w = math.sqrt(eps_max / g)
        n1 = np.arange(math.floor(mu_min - w) - 1, math.ceil(mu_max + w) + 2)
        N1, N2 = np.meshgrid(n1, n2, indexing="ij")
        if mode == "dip":
            phi_c = np.clip(N1, mu_min, mu_max)
            e = model.h(N1, N2, phi_c)
        else:
            e = np.maximum(model.h(N1, N2, mu_min), model.h(N1, N2, mu_max))
    keep = e <= eps_max
    return N1[keep].astype(np.int64), N2[keep].astype(np.int64)


def level_table(window: SpectrumWindow) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays ``(n1, n2, energy)`` for ``window``, ordered by energy then key."""
    model, mu = window.model, window.mu
    n1, n2 = candidate_levels(model, window.eps_max, mu, mu)
    e = model.h(n1.astype(float), n2.astype(float), mu) if n1.size else np.zeros(0)
    order = np.lexsort((n2, n1, e))
    return n1[order], n2[order], e[order]


def enumerate_levels(window: SpectrumWindow) -> list[tuple[LevelKey, float]]:
    """Every admissible level with energy ``<= window.eps_max``.

    An empty list is returned when the cutoff lies below the ground state.
    Ties at degenerate energies are broken by the lexicographic key.
    """
    tag = window.model.tag
    n1, n2, e = level_table(window)
    return [(LevelKey(tag, int(a), int(b)), float(x)) for a, b, x in zip(n1, n2, e)]


def level_curve(model: BilliardModel, key: LevelKey, mu_grid) -> list[float]:
    """Energy of ``key`` at each parameter value in ``mu_grid``."""
    model.check_key(key)
    mu = np.asarray(mu_grid, dtype=float)
    for m in mu.ravel():
        model.check_param(m)
    return [float(x) for x in model.h(key.n1, key.n2, mu)]
