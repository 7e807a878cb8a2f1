"""Line Space Clustering (K-medians under the combined metric) and K-means.

Pipeline for :func:`lsc_fit`:

1. standardize columns,
2. optionally smooth every line with a Savitzky-Golay filter,
3. pick ``k`` distinct lines uniformly at random as initial centers,
4. assign each line to its nearest center (ties go to the lowest index),
5. move each center to the coordinate-wise median of its lines,
6. stop when labels stop changing, the largest coordinate shift drops
   below ``tol``, or ``max_iter`` is reached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import time

import numpy as np

from .core import ClusterModel, DataError, DataMatrix, IterationRecord
from .dtw import FastDtwSpec
from .metric import CombinedMetricSpec, TermScales, combined_cross, estimate_scales
from .preprocess import (
    SavGolSpec,
    apply_standardizer,
    fit_spec_to_length,
    fit_standardizer,
    savgol_kernel,
    smooth_array,
)

log = logging.getLogger(__name__)

INIT_METHODS = ("random", "kmeans++")


@dataclass(frozen=True)
class LscConfig:
    k: int
    metric: CombinedMetricSpec = field(default_factory=CombinedMetricSpec)
    max_iter: int = 100
    smoothing: bool = True
    savgol: SavGolSpec = field(default_factory=SavGolSpec)
    seed: int = 0
    tol: float = 1e-6
    init: str = "random"
    standardize: bool = True
    # shrink the smoothing window for lines shorter than it instead of failing
    shrink_window: bool = True
    empty_cluster_policy: str = "reseed-farthest"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol < 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")
        if self.init not in INIT_METHODS:
            raise ValueError(f"init must be one of {INIT_METHODS}, got {self.init!r}")
        if self.empty_cluster_policy != "reseed-farthest":
            raise ValueError("only the 'reseed-farthest' empty-cluster policy is supported")

    def to_dict(self) -> dict:
        """Flat dotted-key view, the same keys the config-file grammar uses."""
        m = self.metric
        return {
            "k": self.k,
            "seed": self.seed,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "init": self.init,
            "standardize": self.standardize,
            "metric.alpha": m.alpha,
            "metric.dtw_mode": m.dtw_mode,
            "metric.scale_mode": m.scale_mode,
            "metric.dtw_normalize": m.dtw_normalize,
            "fastdtw.radius": m.fast.radius,
            "fastdtw.min_size": m.fast.min_size,
            "smoothing.enabled": self.smoothing,
            "smoothing.window_length": self.savgol.window_length,
            "smoothing.poly_order": self.savgol.poly_order,
            "smoothing.shrink_window": self.shrink_window,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LscConfig":
        default = cls(k=int(d.get("k", 1)))
        fast = FastDtwSpec(
            radius=int(d.get("fastdtw.radius", default.metric.fast.radius)),
            min_size=int(d.get("fastdtw.min_size", default.metric.fast.min_size)),
        )
        metric = CombinedMetricSpec(
            alpha=float(d.get("metric.alpha", default.metric.alpha)),
            dtw_mode=str(d.get("metric.dtw_mode", default.metric.dtw_mode)),
            fast=fast,
            scale_mode=str(d.get("metric.scale_mode", default.metric.scale_mode)),
            dtw_normalize=bool(d.get("metric.dtw_normalize", default.metric.dtw_normalize)),
        )
        savgol = SavGolSpec(
            int(d.get("smoothing.window_length", default.savgol.window_length)),
            int(d.get("smoothing.poly_order", default.savgol.poly_order)),
        )
        return cls(
            k=int(d.get("k", 1)),
            metric=metric,
            max_iter=int(d.get("max_iter", default.max_iter)),
            smoothing=bool(d.get("smoothing.enabled", default.smoothing)),
            savgol=savgol,
            seed=int(d.get("seed", default.seed)),
            tol=float(d.get("tol", default.tol)),
            init=str(d.get("init", default.init)),
            standardize=bool(d.get("standardize", default.standardize)),
            shrink_window=bool(d.get("smoothing.shrink_window", default.shrink_window)),
        )


def update_centers(groups) -> np.ndarray:
    """Coordinate-wise median of each group; shape (len(groups), d).

    Even-sized groups take the midpoint of the two middle values.
    """
    centers = []
    for j, g in enumerate(groups):
        g = np.asarray([getattr(x, "values", x) for x in g], dtype=np.float64)
        if g.shape[0] == 0:
            raise ValueError(f"cluster {j} is empty; reseed it before updating centers")
        centers.append(np.median(g, axis=0))
    return np.vstack(centers)


def _medians_by_label(X: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    return update_centers([X[labels == j] for j in range(k)])


def _reseed_empty(X, labels, dist_to_centers, centers, k):
    """Give each empty cluster the line farthest from its current center.

    Only lines whose cluster keeps at least one other member are eligible.
    Returns the indices of reseeded clusters.
    """
    reseeded = []
    counts = np.bincount(labels, minlength=k)
    own = dist_to_centers[np.arange(labels.size), labels]
    for j in np.flatnonzero(counts == 0):
        eligible = counts[labels] > 1
        if not eligible.any():
            break
        cand = np.where(eligible, own, -np.inf)
        i = int(np.argmax(cand))
        counts[labels[i]] -= 1
        labels[i] = j
        counts[j] = 1
        own[i] = 0.0
        centers[j] = X[i]
        reseeded.append(int(j))
    return reseeded


def _check_input(m: DataMatrix, k: int) -> np.ndarray:
    if not isinstance(m, DataMatrix):
        m = DataMatrix(m)
    if k > m.n_samples:
        raise DataError(f"k={k} exceeds the number of samples ({m.n_samples})")
    return m.values


def _kmeanspp_indices(X: np.ndarray, k: int, rng: np.random.Generator, dist_fn,
                      n_trials: int | None = None) -> np.ndarray:
    """Greedy D^2 seeding.

    Each step draws ``n_trials`` candidates (default ``2 + floor(ln k)``)
    with probability proportional to squared distance to the nearest chosen
    center and keeps the one that lowers the total potential most.
    ``dist_fn(X, C)`` returns an (n, len(C)) distance matrix.
    """
    n = X.shape[0]
    if n_trials is None:
        n_trials = 2 + int(np.log(k))
    chosen = [int(rng.integers(n))]
    closest = dist_fn(X, X[chosen])[:, 0] ** 2
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every point coincides with a chosen center; fall back to unused rows
            remaining = np.setdiff1d(np.arange(n), chosen)
            pick = int(rng.choice(remaining))
            chosen.append(pick)
            closest = np.minimum(closest, dist_fn(X, X[[pick]])[:, 0] ** 2)
            continue
        cumulative = np.cumsum(closest)
        cand = np.searchsorted(cumulative, rng.uniform(0, total, n_trials), side="right")
        cand = np.minimum(cand, n - 1)
        cand_sq = np.minimum(closest[:, None], dist_fn(X, X[cand]) ** 2)
        best = int(np.argmin(cand_sq.sum(axis=0)))
        chosen.append(int(cand[best]))
        closest = cand_sq[:, best]
    return np.asarray(chosen)


def prepare_lines(m: DataMatrix, cfg: LscConfig) -> tuple[np.ndarray, dict, dict]:
    """Standardize and smooth as configured.

    Returns the transformed (n, d) array, per-phase timings and an info dict
    recording the smoothing window actually used.
    """
    X = m.values
    timings = {}
    info = {}
    t0 = time.perf_counter()
    if cfg.standardize:
        X = apply_standardizer(m, fit_standardizer(m)).values
    timings["standardize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    info["smoothing"] = None
    if cfg.smoothing:
        spec = cfg.savgol
        if cfg.shrink_window:
            spec = fit_spec_to_length(spec, X.shape[1])
            if spec != cfg.savgol:
                log.warning(
                    "lines have %d points; smoothing window %s reduced to %s",
                    X.shape[1], cfg.savgol, spec,
                )
        if spec is not None:
            X = smooth_array(X, savgol_kernel(spec))
            info["smoothing"] = {"window_length": spec.window_length,
                                 "poly_order": spec.poly_order}
    timings["smooth"] = time.perf_counter() - t0
    return np.ascontiguousarray(X), timings, info


def lsc_fit(m: DataMatrix, cfg: LscConfig) -> ClusterModel:
    """Cluster the rows of ``m`` as lines under the combined DTW/Euclidean metric.

    Deterministic for a fixed ``(m, cfg)``. Centers in the returned model
    live in the standardized/smoothed space the assignment used.
    """
    t_start = time.perf_counter()
    _check_input(m, cfg.k)
    if not isinstance(m, DataMatrix):
        m = DataMatrix(m)
    X, timings, info = prepare_lines(m, cfg)
    n, k = X.shape[0], cfg.k
    spec = cfg.metric
    rng = np.random.default_rng(cfg.seed)

    t_dist = 0.0
    t0 = time.perf_counter()
    scales = estimate_scales(X, spec)
    t_dist += time.perf_counter() - t0

    def dist(A, C):
        return combined_cross(A, C, spec, scales)

    if cfg.init == "random":
        init_idx = rng.choice(n, size=k, replace=False)
    else:
        init_idx = _kmeanspp_indices(X, k, rng, dist)
    centers = X[init_idx].copy()
    labels = None
    trace = []
    converged = False
    shift_converged = False
    it = 0
    for it in range(1, max(cfg.max_iter, 1) + 1):
        t0 = time.perf_counter()
        D = dist(X, centers)
        t_dist += time.perf_counter() - t0
        new_labels = np.argmin(D, axis=1)
        _reseed_empty(X, new_labels, D, centers, k)
        changes = n if labels is None else int(np.count_nonzero(new_labels != labels))
        labels = new_labels

        new_centers = _medians_by_label(X, labels, k)
        coord_shift = float(np.max(np.abs(new_centers - centers)))
        t0 = time.perf_counter()
        shift = float(np.max(np.diag(dist(new_centers, centers))))
        t_dist += time.perf_counter() - t0
        centers = new_centers
        trace.append(IterationRecord(it, shift, changes, time.time()))

        if it > 1 and changes == 0:
            converged = True
            break
        if coord_shift < cfg.tol:
            converged = shift_converged = True
            break

    if shift_converged:
        # centers moved by less than tol; relabel against the final centers so
        # every label is an argmin of the returned model
        t0 = time.perf_counter()
        labels = np.argmin(dist(X, centers), axis=1)
        t_dist += time.perf_counter() - t0

    timings["distance"] = t_dist
    timings["total"] = time.perf_counter() - t_start
    info.update(
        init_indices=[int(i) for i in init_idx],
        scales={"dtw": scales.dtw, "euclidean": scales.euclidean},
        dtw_mode_resolved=_mode_name(spec.resolve_dtw(n * k)) if spec.alpha > 0 else "none",
    )
    return ClusterModel(centers, labels, it, converged, trace, timings, info)


def _mode_name(mode) -> str:
    if isinstance(mode, FastDtwSpec):
        return f"fast(radius={mode.radius},min_size={mode.min_size})"
    return str(mode)


def _sq_euclidean_cross(X, C):
    return np.maximum(
        (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :], 0.0
    )


def kmeans_fit(m: DataMatrix, k: int, seed: int = 0, max_iter: int = 100,
               tol: float = 1e-6, standardize: bool = True) -> ClusterModel:
    """Lloyd's algorithm with K-means++ seeding and Euclidean distance.

    Convergence rules match :func:`lsc_fit`; empty clusters are reseeded to
    the point farthest from its center.
    """
    t_start = time.perf_counter()
    _check_input(m, k)
    if not isinstance(m, DataMatrix):
        m = DataMatrix(m)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    cfg = LscConfig(k=k, smoothing=False, standardize=standardize, seed=seed)
    X, timings, info = prepare_lines(m, cfg)
    n = X.shape[0]
    rng = np.random.default_rng(seed)

    def dist(A, C):
        return np.sqrt(_sq_euclidean_cross(A, C))

    init_idx = _kmeanspp_indices(X, k, rng, dist)
    centers = X[init_idx].copy()
    labels = None
    trace = []
    converged = shift_converged = False
    it = 0
    for it in range(1, max_iter + 1):
        D = dist(X, centers)
        new_labels = np.argmin(D, axis=1)
        _reseed_empty(X, new_labels, D, centers, k)
        changes = n if labels is None else int(np.count_nonzero(new_labels != labels))
        labels = new_labels
        new_centers = np.vstack([X[labels == j].mean(axis=0) for j in range(k)])
        coord_shift = float(np.max(np.abs(new_centers - centers)))
        shift = float(np.max(np.sqrt(((new_centers - centers) ** 2).sum(1))))
        centers = new_centers
        trace.append(IterationRecord(it, shift, changes, time.time()))
        if it > 1 and changes == 0:
            converged = True
            break
        if coord_shift < tol:
            converged = shift_converged = True
            break
    if shift_converged:
        labels = np.argmin(dist(X, centers), axis=1)
    timings["total"] = time.perf_counter() - t_start
    info["init_indices"] = [int(i) for i in init_idx]
    return ClusterModel(centers, labels, it, converged, trace, timings, info)


def within_cluster_ss(X: np.ndarray, labels: np.ndarray, centers: np.ndarray) -> float:
    return float(((X - centers[labels]) ** 2).sum())
