"""Correlation-based retrieval of similar historical periods.

Periods are zero-based row indices into the relatives grid. The window of
period ``k`` is rows ``k-w .. k-1`` and the matched sample is row ``k``.
A candidate ``k`` is admissible when ``w <= k < t``: its full window exists
and row ``k`` is already observed when deciding period ``t``. In one-based
period numbers this is ``w < j < t`` with ``j = k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from racorn._backend import kernels
from racorn.market_data import PriceRelativeSeries


@dataclass(frozen=True)
class MatchSet:
    anchor: int
    width: int
    threshold: float
    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)


def pearson(a, b) -> float:
    """Pearson correlation; 0 when either argument has zero variance."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise ValueError("pearson needs at least 2 samples")
    if a.max() == a.min() or b.max() == b.min():
        return 0.0
    da = a - a.sum() / a.size
    db = b - b.sum() / b.size
    c = float(da @ db) / np.sqrt(float(da @ da) * float(db @ db))
    return min(1.0, max(-1.0, c))


def _relatives(series: PriceRelativeSeries | np.ndarray) -> np.ndarray:
    rel = series.relatives if isinstance(series, PriceRelativeSeries) else series
    return np.ascontiguousarray(rel, dtype=np.float64)


def window_correlations(series: PriceRelativeSeries | np.ndarray, t: int, w: int) -> np.ndarray:
    """Correlations of period ``t``'s window with candidates ``k = w .. t-1``."""
    rel = _relatives(series)
    if w < 1 or t < w or t > rel.shape[0]:
        raise IndexError(f"no window for t={t}, w={w} over {rel.shape[0]} periods")
    return kernels.window_correlations(rel, t, w)


def matches_from_correlations(corr: np.ndarray, w: int, rho: float) -> np.ndarray:
    return np.flatnonzero(corr > rho) + w


def find_matches(series: PriceRelativeSeries | np.ndarray, t: int, w: int, rho: float) -> MatchSet:
    corr = window_correlations(series, t, w)
    idx = matches_from_correlations(corr, w, rho)
    return MatchSet(t, w, rho, tuple(int(k) for k in idx))
