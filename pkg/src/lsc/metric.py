"""Alpha-weighted blend of DTW (shape) and Euclidean (magnitude) distance.

    D(a, b) = alpha * DTW(a, b) + (1 - alpha) * ||a - b||_2

With ``scale_mode="raw"`` the two terms are blended as they come. DTW sums
``d`` absolute differences while the Euclidean term is a root of a sum, so
their magnitudes differ by roughly ``sqrt(d)``; ``scale_mode="normalized"``
divides each term by a dataset-level median first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .core import DataError, LineSeries
from .dtw import FastDtwSpec, cross_dtw, dtw_pair, pairwise_dtw_array

DTW_MODES = ("exact", "fast", "auto")
SCALE_MODES = ("raw", "normalized")

# "auto" picks exact DTW while an assignment step needs at most this many pairs
AUTO_EXACT_MAX_PAIRS = 1000


@dataclass(frozen=True)
class CombinedMetricSpec:
    alpha: float = 0.5
    dtw_mode: str = "exact"
    fast: FastDtwSpec = field(default_factory=FastDtwSpec)
    scale_mode: str = "raw"
    dtw_normalize: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.dtw_mode not in DTW_MODES:
            raise ValueError(f"dtw_mode must be one of {DTW_MODES}, got {self.dtw_mode!r}")
        if self.scale_mode not in SCALE_MODES:
            raise ValueError(f"scale_mode must be one of {SCALE_MODES}, got {self.scale_mode!r}")

    def resolve_dtw(self, n_pairs: int):
        """The concrete DTW mode ('exact' or a FastDtwSpec) for a batch size."""
        if self.dtw_mode == "exact":
            return "exact"
        if self.dtw_mode == "fast":
            return self.fast
        return "exact" if n_pairs <= AUTO_EXACT_MAX_PAIRS else self.fast


@dataclass(frozen=True)
class TermScales:
    """Divisors applied to the DTW and Euclidean terms (1.0 in raw mode)."""

    dtw: float = 1.0
    euclidean: float = 1.0


def _values(x) -> np.ndarray:
    if isinstance(x, LineSeries):
        x = x.values
    return np.asarray(x, dtype=np.float64).ravel()


def euclidean(a, b) -> float:
    a, b = _values(a), _values(b)
    if a.size != b.size:
        raise DataError(f"length mismatch: {a.size} vs {b.size}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def combined_distance(a, b, spec: CombinedMetricSpec = CombinedMetricSpec(),
                      scales: TermScales | None = None) -> float:
    a, b = _values(a), _values(b)
    if a.size != b.size:
        raise DataError(f"length mismatch: {a.size} vs {b.size}")
    scales = scales or TermScales()
    alpha = spec.alpha
    total = 0.0
    # skip a term entirely at the endpoints so alpha=0 / alpha=1 are exact
    if alpha > 0.0:
        d = dtw_pair(a, b, spec.resolve_dtw(1), normalize=spec.dtw_normalize)
        total += alpha * (d / scales.dtw)
    if alpha < 1.0:
        total += (1.0 - alpha) * (euclidean(a, b) / scales.euclidean)
    return total


def _blend(dtw_part, euc_part, alpha: float, scales: TermScales) -> np.ndarray:
    if alpha == 0.0:
        return euc_part / scales.euclidean
    if alpha == 1.0:
        return dtw_part / scales.dtw
    return alpha * (dtw_part / scales.dtw) + (1.0 - alpha) * (euc_part / scales.euclidean)


def euclidean_cross(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - C[None, :, :]
    return np.sqrt(np.einsum("nkd,nkd->nk", diff, diff))


def combined_cross(X: np.ndarray, C: np.ndarray, spec: CombinedMetricSpec,
                   scales: TermScales | None = None) -> np.ndarray:
    """Combined distance from every row of ``X`` to every row of ``C``."""
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    if X.shape[1] != C.shape[1]:
        raise DataError(f"length mismatch: {X.shape[1]} vs {C.shape[1]}")
    scales = scales or TermScales()
    n, k = X.shape[0], C.shape[0]
    dtw_part = euc_part = 0.0
    if spec.alpha > 0.0:
        dtw_part = cross_dtw(X, C, spec.resolve_dtw(n * k), normalize=spec.dtw_normalize)
    if spec.alpha < 1.0:
        euc_part = euclidean_cross(X, C)
    return np.broadcast_to(_blend(dtw_part, euc_part, spec.alpha, scales), (n, k)).copy()


def combined_pairwise(X: np.ndarray, spec: CombinedMetricSpec,
                      scales: TermScales | None = None, workers: int = 1) -> np.ndarray:
    """Symmetric (n, n) combined-distance matrix with a zero diagonal."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    scales = scales or TermScales()
    dtw_part = euc_part = 0.0
    if spec.alpha > 0.0:
        n_pairs = n * (n - 1) // 2
        dtw_part = pairwise_dtw_array(X, spec.resolve_dtw(n_pairs),
                                      normalize=spec.dtw_normalize, workers=workers)
    if spec.alpha < 1.0:
        euc_part = cdist(X, X)
    out = np.broadcast_to(_blend(dtw_part, euc_part, spec.alpha, scales), (n, n)).copy()
    np.fill_diagonal(out, 0.0)
    return out


def estimate_scales(X: np.ndarray, spec: CombinedMetricSpec) -> TermScales:
    """Median DTW and Euclidean distance over a fixed set of row pairs.

    Pairs row ``i`` with row ``(i + n // 2) % n`` for every ``i``: n pairs,
    deterministic, no RNG involved. Raw mode returns unit scales.
    """
    if spec.scale_mode == "raw":
        return TermScales()
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        return TermScales()
    partner = (np.arange(n) + n // 2) % n
    mode = spec.resolve_dtw(n)
    dtw_vals = np.array([
        dtw_pair(X[i], X[partner[i]], mode, normalize=spec.dtw_normalize) for i in range(n)
    ])
    euc_vals = np.sqrt(np.sum((X - X[partner]) ** 2, axis=1))
    dtw_scale = float(np.median(dtw_vals))
    euc_scale = float(np.median(euc_vals))
    return TermScales(dtw=dtw_scale if dtw_scale > 0 else 1.0,
                      euclidean=euc_scale if euc_scale > 0 else 1.0)
