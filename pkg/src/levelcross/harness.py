"""Binned empirical statistics of crossings and their scoring against predictions.

Histograms are left-closed and right-open,  ``[e_i, e_{i+1})``, and values
outside ``[lo, hi)`` are dropped.  Predictions are given as densities which
are integrated over each bin with Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, signal, stats

from .billiards import DomainError
from .quadrature import gauss_legendre_bins

__all__ = [
    "HistogramSpec",
    "Histogram",
    "ComparisonReport",
    "bin_values",
    "bin_crossings",
    "compare_to_smooth",
    "ks_one_sample",
    "ks_two_sample",
    "ks_critical_two_sample",
    "ks_distance_cdfs",
    "linear_slope_fit",
    "detect_peaks",
    "top_local_maxima",
]

MODES = ("raw", "per_eps", "per_eps_mu", "probability")


@dataclass(frozen=True)
class HistogramSpec:
    """Uniform binning of one crossing attribute.

    Parameters
    ----------
    lo, hi : float
        Range ``[lo, hi)``.
    bins : int
    field : str
        Crossing attribute to bin, ``"energy"`` or ``"v"``.
    mode : str
        ``raw`` counts, counts ``per_eps`` of bin width, ``per_eps_mu`` also
        divided by ``mu_span``, or a ``probability`` density.
    mu_span : float
        Parameter range covered by the crossings (for ``per_eps_mu``).
    """

    lo: float
    hi: float
    bins: int = 100
    field: str = "energy"
    mode: str = "per_eps"
    mu_span: float = 1.0

    def __post_init__(self):
        if not (self.hi > self.lo and self.bins >= 1):
            raise DomainError("histogram needs hi > lo and bins >= 1")
        if self.mode not in MODES:
            raise DomainError(f"unknown histogram mode {self.mode!r}")
        if not self.mu_span > 0:
            raise DomainError("mu_span must be positive")

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.bins + 1)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    mode: str = "raw"
    mu_span: float = 1.0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def scale(self) -> np.ndarray:
        """Factor turning counts into the histogram's density units."""
        w = self.widths
        if self.mode == "raw":
            return np.ones_like(w)
        if self.mode == "per_eps":
            return 1.0 / w
        if self.mode == "per_eps_mu":
            return 1.0 / (w * self.mu_span)
        return 1.0 / (w * max(self.total, 1))

    @property
    def density(self) -> np.ndarray:
        return self.counts * self.scale()


def bin_values(values, spec: HistogramSpec) -> Histogram:
    """Histogram of raw values under ``spec``."""
    x = np.asarray(values, dtype=float).ravel()
    edges = spec.edges
    idx = np.searchsorted(edges, x, side="right") - 1
    keep = (idx >= 0) & (idx < spec.bins) & (x < spec.hi)
    counts = np.bincount(idx[keep], minlength=spec.bins).astype(np.int64)
    return Histogram(edges, counts, spec.mode, spec.mu_span)


def bin_crossings(crossings, spec: HistogramSpec) -> Histogram:
    """Histogram of a :class:`~levelcross.crossings.CrossingSet` attribute."""
    if spec.field not in ("energy", "v", "mu_star", "V"):
        raise DomainError(f"cannot bin field {spec.field!r}")
    return bin_values(getattr(crossings, spec.field), spec)


@dataclass
class ComparisonReport:
    """Per-bin residuals and summary statistics of a histogram comparison."""

    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    prediction: np.ndarray
    expected: np.ndarray
    included: np.ndarray
    chi2: float
    dof: int
    ks: float | None = None
    peaks: list = field(default_factory=list)

    @property
    def residual(self) -> np.ndarray:
        return self.density - self.prediction

    @property
    def chi2_per_dof(self) -> float:
        return self.chi2 / self.dof if self.dof else float("nan")

    def rows(self):
        res = self.residual
        for i in range(self.counts.size):
            yield (self.edges[i], self.edges[i + 1], int(self.counts[i]), self.density[i],
                   self.prediction[i], res[i])


def compare_to_smooth(hist: Histogram, prediction, exclude=None, order: int = 16) -> ComparisonReport:
    """Score ``hist`` against a predicted density.

    Parameters
    ----------
    hist : Histogram
    prediction : callable or array_like
        Vectorised density in the histogram's units, or per-bin expected
        counts given directly as an array.
    exclude : array_like of bool, optional
        Bins left out of the chi-square (e.g. known peak bins).

    Notes
    -----
    The chi-square uses Poisson weights taken from the observed counts; a
    bin with zero counts is weighted by its expected count instead.
    """
    scale = hist.scale()
    if callable(prediction):
        expected = gauss_legendre_bins(prediction, hist.edges, order) / (hist.widths * scale)
    else:
        expected = np.asarray(prediction, dtype=float)
        if expected.shape != hist.counts.shape:
            raise DomainError("prediction must have one entry per bin")
    pred_density = expected * scale
    included = np.ones(hist.counts.size, bool) if exclude is None else ~np.asarray(exclude, bool)
    c = hist.counts.astype(float)
    var = np.where(c > 0, c, expected)
    diff2 = (c - expected) ** 2
    terms = np.divide(diff2, var, out=np.zeros_like(diff2), where=var > 0)
    chi2 = float(math.fsum(terms[included]))
    return ComparisonReport(hist.edges, hist.counts, hist.density, pred_density, expected,
                            included, chi2, int(included.sum()))


# ---------------------------------------------------------------------------
# distribution tests
# ---------------------------------------------------------------------------

def ks_one_sample(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between samples and a model CDF."""
    return float(stats.kstest(np.asarray(samples, dtype=float), cdf).statistic)


def ks_two_sample(a, b) -> float:
    return float(stats.ks_2samp(np.asarray(a, float), np.asarray(b, float)).statistic)


def ks_critical_two_sample(n1: int, n2: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample critical distance ``c(alpha) sqrt((n1+n2)/(n1 n2))``."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n1 + n2) / (n1 * n2))


def ks_distance_cdfs(cdf_a, cdf_b, grid) -> float:
    """Sup distance between two CDFs sampled on ``grid``."""
    g = np.asarray(grid, dtype=float)
    return float(np.max(np.abs(np.asarray(cdf_a(g)) - np.asarray(cdf_b(g)))))


def linear_slope_fit(x, y) -> tuple[float, float]:
    """Least-squares ``(slope, intercept)``."""
    slope, intercept = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(slope), float(intercept)


# ---------------------------------------------------------------------------
# peaks
# ---------------------------------------------------------------------------

def detect_peaks(series, window: int = 25, factor: float = 3.0) -> np.ndarray:
    """Indices of sharp maxima standing out from the background.

    The series is detrended with a running median of ``window`` samples,
    and a peak must have a prominence above ``factor`` times the running
    interquartile range of the detrended series.

    Parameters
    ----------
    series : array_like
        Values on a uniform grid.
    window : int
        Length (in samples) of the running median and IQR.
    factor : float
        Prominence threshold in units of the local IQR.
    """
    y = np.asarray(series, dtype=float)
    if y.size < 3:
        return np.zeros(0, dtype=int)
    window = max(3, min(int(window) | 1, (y.size // 2) * 2 - 1))
    resid = y - ndimage.median_filter(y, size=window, mode="nearest")
    iqr = (ndimage.percentile_filter(resid, 75, size=window, mode="nearest")
           - ndimage.percentile_filter(resid, 25, size=window, mode="nearest"))
    floor = 1e-9 * max(float(np.ptp(y)), 1e-300)
    idx, _ = signal.find_peaks(resid, prominence=np.maximum(factor * iqr, floor))
    return idx


def top_local_maxima(values, k: int = 3, absolute: bool = True) -> np.ndarray:
    """Grid indices of the ``k`` largest interior local maxima.

    A cell is a local maximum if it is not smaller than any of its eight
    neighbours; border cells, whose neighbourhood is incomplete, are not
    eligible.

    Returns
    -------
    ndarray of shape (<=k, 2)
        ``(row, column)`` pairs ordered by decreasing value.
    """
    a = np.abs(values) if absolute else np.asarray(values, dtype=float)
    mx = ndimage.maximum_filter(a, size=3, mode="constant", cval=np.inf)
    loc = np.argwhere(a >= mx)
    loc = loc[np.argsort(-a[tuple(loc.T)], kind="stable")]
    return loc[:k]
