"""Degree distributions (analytic and empirical) and curve similarity."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .graph import HybridGraph

__all__ = [
    "Curve",
    "DegreeHistogram",
    "SimilarityReport",
    "ba_degree_pdf",
    "empirical_distribution",
    "fit_tail_slope",
    "hybrid_average_degree",
    "hybrid_degree_pdf",
    "resample_pair",
    "similarity",
    "total_variation",
    "ws_degree_pmf",
]

ArrayLike = Union[int, float, Sequence[float], np.ndarray]


def _poisson_rate(K: int, p: float, a: float, N: int, classical: bool) -> float:
    if classical:
        return p * K / 2.0
    if a * N == 0:
        if p > 0:
            warnings.warn("aN = 0: falling back to the classical rate pK/2", RuntimeWarning, stacklevel=3)
        return p * K / 2.0
    return p * K / (2.0 * a * N)


def ws_degree_pmf(k: ArrayLike, K: int, p: float, a: float = 0.0, N: int = 0, classical: bool = False):
    """Degree pmf of the rewired ring.

    A node keeps ``n`` of its ``K/2`` incoming lattice edges (binomial with
    survival ``1-p``) and gains a Poisson number of rewired edges. The Poisson
    rate is ``pK/(2aN)`` by default and ``pK/2`` with ``classical=True``.
    Returns 0 below ``K/2``. Scalar in, scalar out.
    """
    if K < 2 or K % 2:
        raise ValueError(f"K must be an even integer >= 2, got {K}")
    half = K // 2
    rate = _poisson_rate(K, p, a, N, classical)
    ks = np.atleast_1d(np.asarray(k, dtype=np.int64))
    out = np.zeros(ks.shape, dtype=float)
    for idx, kk in enumerate(ks.tolist()):
        if kk < half:
            continue
        total = 0.0
        for n in range(0, min(kk - half, half) + 1):
            extra = kk - half - n
            binom = math.comb(half, n) * (1.0 - p) ** n * p ** (half - n)
            if rate == 0.0:
                pois = 1.0 if extra == 0 else 0.0
            else:
                pois = math.exp(extra * math.log(rate) - rate - math.lgamma(extra + 1))
            total += binom * pois
        out[idx] = total
    return float(out[0]) if np.ndim(k) == 0 else out


def ba_degree_pdf(k: ArrayLike, m: int, a: float):
    """Mean-field BA density ``2 m^2 (1-a) / k^3`` for ``k >= m``, else 0."""
    ks = np.asarray(k, dtype=float)
    if np.any(ks <= 0):
        raise ValueError("degree must be positive")
    out = np.where(ks >= m, 2.0 * m * m * (1.0 - a) / ks**3, 0.0)
    return float(out) if out.ndim == 0 else out


def hybrid_degree_pdf(k: ArrayLike, K: int, p: float, a: float, N: int, m: int, classical: bool = False):
    """Small-world pmf on ``[1, m)``; small-world pmf plus BA density from ``m`` up."""
    if K != m:
        warnings.warn(f"hybrid prediction assumes K = m (got K={K}, m={m})", RuntimeWarning, stacklevel=2)
    ks = np.asarray(k, dtype=float)
    if np.any(ks < 1):
        raise ValueError("degree must be >= 1")
    ps = ws_degree_pmf(np.atleast_1d(ks).astype(np.int64), K, p, a, N, classical)
    ps = np.asarray(ps, dtype=float).reshape(np.shape(np.atleast_1d(ks)))
    tail = np.where(np.atleast_1d(ks) >= m, 2.0 * m * m * (1.0 - a) / np.atleast_1d(ks) ** 3, 0.0)
    out = ps + tail
    return float(out[0]) if ks.ndim == 0 else out


def hybrid_average_degree(K: int) -> float:
    if K % 2:
        raise ValueError(f"K must be even, got {K}")
    return float(K + K // 2)


@dataclass
class DegreeHistogram:
    """Exact degree counts; ``degrees`` ascending, ``counts`` aligned."""

    degrees: np.ndarray
    counts: np.ndarray
    n: int
    bins_per_decade: Optional[int] = None  # None: raw counts

    @classmethod
    def from_degrees(cls, deg: np.ndarray, bins_per_decade: Optional[int] = None) -> "DegreeHistogram":
        values, counts = np.unique(np.asarray(deg, dtype=np.int64), return_counts=True)
        return cls(values, counts, int(np.sum(counts)), bins_per_decade)

    @property
    def pk(self) -> np.ndarray:
        return self.counts / self.n

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.degrees.tolist(), self.counts.tolist()))

    def pmf_on(self, support: np.ndarray) -> np.ndarray:
        """Empirical pmf evaluated on an integer support (0 where unseen)."""
        lookup = self.as_dict()
        return np.array([lookup.get(int(k), 0) for k in support], dtype=float) / self.n

    def log_binned(self, bins_per_decade: Optional[int] = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(centers, density, counts)`` over geometric bins ``10**(j/b)``.

        Density is the bin count divided by ``n`` and by the number of integer
        degrees the bin covers; degree 0 is dropped. Empty-width bins are
        skipped.
        """
        bins_per_decade = bins_per_decade or self.bins_per_decade or 10
        pos = self.degrees > 0
        deg, cnt = self.degrees[pos], self.counts[pos]
        if deg.size == 0:
            return np.empty(0), np.empty(0), np.empty(0, dtype=np.int64)
        top = math.ceil(math.log10(deg.max() + 1) * bins_per_decade) + 1
        edges = 10.0 ** (np.arange(top + 1) / bins_per_decade)
        int_edges = np.ceil(edges).astype(np.int64)
        width = np.diff(int_edges)
        # bin j holds integers in [ceil(e_j), ceil(e_{j+1}))
        which = np.searchsorted(int_edges, deg, side="right") - 1
        binned = np.bincount(which, weights=cnt, minlength=edges.size - 1)[: edges.size - 1]
        keep = width > 0
        centers = np.sqrt(edges[:-1] * edges[1:])[keep]
        density = binned[keep] / width[keep] / self.n
        return centers, density, binned[keep].astype(np.int64)


def empirical_distribution(g: HybridGraph, bins_per_decade: Optional[int] = None) -> DegreeHistogram:
    return DegreeHistogram.from_degrees(g.degrees(), bins_per_decade)


def fit_tail_slope(hist: DegreeHistogram, k_min: float, k_max: float, bins_per_decade: Optional[int] = None) -> float:
    """Least-squares slope of log10 density vs log10 degree over non-empty bins."""
    centers, density, counts = hist.log_binned(bins_per_decade)
    sel = (centers >= k_min) & (centers <= k_max) & (counts > 0)
    if np.count_nonzero(sel) < 2:
        raise ValueError(f"fewer than two populated bins in [{k_min}, {k_max}]")
    slope, _ = np.polyfit(np.log10(centers[sel]), np.log10(density[sel]), 1)
    return float(slope)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


# -- curves --------------------------------------------------------------------


@dataclass
class Curve:
    t: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.t.shape != self.values.shape or self.t.ndim != 1:
            raise ValueError("curve needs equal-length 1-d t and value arrays")
        if self.t.size == 0:
            raise ValueError("curve is empty")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("curve t must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("curve values must be finite")

    @property
    def step(self) -> float:
        return float(np.median(np.diff(self.t))) if self.t.size > 1 else 0.0


@dataclass
class SimilarityReport:
    rho: float
    integral_zeta: float
    integral_absdiff: float
    grid_points: int

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "integral_zeta": self.integral_zeta,
            "integral_absdiff": self.integral_absdiff,
            "grid_points": self.grid_points,
        }


def resample_pair(zeta: Curve, rho: Curve) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Linear interpolation of both curves onto a uniform grid over their overlap.

    The grid spacing is the coarser of the two median spacings.
    """
    lo = max(zeta.t[0], rho.t[0])
    hi = min(zeta.t[-1], rho.t[-1])
    if hi < lo:
        raise ValueError("curves do not overlap in t")
    step = max(zeta.step, rho.step)
    if step == 0.0 or hi == lo:
        grid = np.array([lo])
    else:
        n_steps = int(math.floor((hi - lo) / step + 1e-9))
        grid = lo + step * np.arange(n_steps + 1)
    return grid, np.interp(grid, zeta.t, zeta.values), np.interp(grid, rho.t, rho.values)


def similarity(zeta: Curve, rho: Curve) -> SimilarityReport:
    """``(int zeta - int |zeta - rho|) / int zeta`` with trapezoidal integrals.

    ``zeta`` is the reference that normalises the score, so the metric is not
    symmetric. Identical curves score exactly 1; the score has no lower bound.
    """
    grid, z, r = resample_pair(zeta, rho)
    if grid.size < 2:
        raise ValueError("need at least two common grid points")
    iz = float(np.trapezoid(z, grid))
    if iz <= 0:
        raise ValueError("reference curve integrates to zero; similarity undefined")
    idiff = float(np.trapezoid(np.abs(z - r), grid))
    return SimilarityReport((iz - idiff) / iz, iz, idiff, int(grid.size))
