"""External and internal clustering scores.

External scores (ARI, AMI, homogeneity, completeness, V-measure) compare a
predicted partition with ground truth through their contingency table.
Silhouette needs the data or a precomputed distance matrix.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
import math

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gammaln

from .core import DataError, as_labels


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    counts: np.ndarray  # (n_classes, n_clusters) int64

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _check_pair(truth, pred) -> tuple[np.ndarray, np.ndarray]:
    t = as_labels(truth)
    p = as_labels(pred)
    if t.size != p.size:
        raise DataError(f"label vectors differ in length: {t.size} vs {p.size}")
    if t.size < 2:
        raise DataError("at least two samples are needed to compare partitions")
    return t, p


def contingency(truth, pred) -> ContingencyTable:
    t, p = _check_pair(truth, pred)
    _, ti = np.unique(t, return_inverse=True)
    _, pi = np.unique(p, return_inverse=True)
    counts = np.zeros((ti.max() + 1, pi.max() + 1), dtype=np.int64)
    np.add.at(counts, (ti, pi), 1)
    return ContingencyTable(counts)


def _is_one_to_one(c: np.ndarray) -> bool:
    nz = c > 0
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def _comb2(x) -> int:
    return sum(int(v) * (int(v) - 1) // 2 for v in np.ravel(x))


def adjusted_rand_index(truth, pred) -> float:
    """Hubert-Arabie adjusted Rand index; pair counts in exact integers."""
    c = contingency(truth, pred).counts
    n = int(c.sum())
    index = _comb2(c)
    sum_a = _comb2(c.sum(axis=1))
    sum_b = _comb2(c.sum(axis=0))
    total = n * (n - 1) // 2
    # (index - expected) / (max - expected), scaled by 2 * total to stay integral
    num = 2 * total * index - 2 * sum_a * sum_b
    den = total * (sum_a + sum_b) - 2 * sum_a * sum_b
    if den == 0:
        # both partitions trivial (one cluster or all singletons) and equal
        return 1.0
    return num / den


def _entropy_from_counts(counts: np.ndarray) -> float:
    counts = counts[counts > 0].astype(np.float64)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(-(p * np.log(p)).sum())


def mutual_information(c: np.ndarray) -> float:
    n = c.sum()
    a = c.sum(axis=1, keepdims=True)
    b = c.sum(axis=0, keepdims=True)
    nz = c > 0
    nij = c[nz].astype(np.float64)
    outer = (a * b)[nz].astype(np.float64)
    return float(np.sum(nij / n * (np.log(nij) + math.log(n) - np.log(outer))))


def expected_mutual_information(c: np.ndarray) -> float:
    """E[MI] under the hypergeometric model of random partitions with fixed marginals."""
    n = int(c.sum())
    a = c.sum(axis=1).astype(np.int64)
    b = c.sum(axis=0).astype(np.int64)
    emi = 0.0
    lg_n = gammaln(n + 1)
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            term1 = nij / n
            term2 = np.log(n * nij) - math.log(ai * bj)
            log_p = (gammaln(ai + 1) + gammaln(bj + 1) + gammaln(n - ai + 1)
                     + gammaln(n - bj + 1) - lg_n - gammaln(nij + 1)
                     - gammaln(ai - nij + 1) - gammaln(bj - nij + 1)
                     - gammaln(n - ai - bj + nij + 1))
            emi += float(np.sum(term1 * term2 * np.exp(log_p)))
    return emi


def adjusted_mutual_information(truth, pred) -> float:
    """AMI with the arithmetic mean of the two entropies as normalizer."""
    c = contingency(truth, pred).counts
    if _is_one_to_one(c):
        return 1.0
    mi = mutual_information(c)
    emi = expected_mutual_information(c)
    h_true = _entropy_from_counts(c.sum(axis=1))
    h_pred = _entropy_from_counts(c.sum(axis=0))
    den = 0.5 * (h_true + h_pred) - emi
    if abs(den) < 1e-15:
        return 1.0 if abs(mi - emi) < 1e-15 else 0.0
    return float((mi - emi) / den)


def homogeneity_completeness_v(truth, pred) -> tuple[float, float, float]:
    c = contingency(truth, pred).counts
    n = c.sum()
    h_c = _entropy_from_counts(c.sum(axis=1))
    h_k = _entropy_from_counts(c.sum(axis=0))
    a = c.sum(axis=1, keepdims=True)
    b = c.sum(axis=0, keepdims=True)
    nz = c > 0
    nij = c[nz].astype(np.float64)
    # conditional entropies H(C|K) and H(K|C)
    h_c_given_k = float(-np.sum(nij / n * np.log(nij / np.broadcast_to(b, c.shape)[nz])))
    h_k_given_c = float(-np.sum(nij / n * np.log(nij / np.broadcast_to(a, c.shape)[nz])))
    h = 1.0 if h_c == 0 else 1.0 - h_c_given_k / h_c
    comp = 1.0 if h_k == 0 else 1.0 - h_k_given_c / h_k
    v = 0.0 if h + comp == 0 else 2.0 * h * comp / (h + comp)
    return h, comp, v


def silhouette_samples(distances: np.ndarray, labels) -> np.ndarray:
    """Per-point silhouette from a square distance matrix.

    Points alone in their cluster score 0.
    """
    D = np.asarray(distances, dtype=np.float64)
    lab = as_labels(labels)
    n = lab.size
    if D.shape != (n, n):
        raise DataError(f"distance matrix shape {D.shape} does not match {n} labels")
    uniq, inv = np.unique(lab, return_inverse=True)
    if uniq.size < 2:
        raise DataError("silhouette is undefined for a single cluster")
    k = uniq.size
    onehot = np.zeros((n, k))
    onehot[np.arange(n), inv] = 1.0
    sizes = onehot.sum(axis=0)
    sums = D @ onehot  # (n, k) total distance from each point to each cluster
    own = sizes[inv]
    a = np.where(own > 1, sums[np.arange(n), inv] / np.maximum(own - 1, 1), 0.0)
    means = sums / sizes
    means[np.arange(n), inv] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return np.where(own > 1, s, 0.0)


def silhouette(data=None, labels=None, distances: np.ndarray | None = None) -> float:
    """Mean silhouette, Euclidean on ``data`` unless ``distances`` is given."""
    if distances is None:
        if data is None:
            raise ValueError("give either data or a distance matrix")
        X = np.asarray(getattr(data, "values", data), dtype=np.float64)
        distances = cdist(X, X)
    return float(np.mean(silhouette_samples(distances, labels)))


@dataclass(frozen=True)
class MetricReport:
    ari: float | None = None
    ami: float | None = None
    homogeneity: float | None = None
    completeness: float | None = None
    v_measure: float | None = None
    silhouette: float | None = None
    silhouette_distance: str = "euclidean"
    ami_normalizer: str = "arithmetic"

    def to_dict(self) -> dict:
        return asdict(self)


METRIC_NAMES = ("ari", "ami", "homogeneity", "completeness", "v_measure", "silhouette")


def evaluate(truth=None, pred=None, data=None, distances: np.ndarray | None = None,
             silhouette_distance: str = "euclidean") -> MetricReport:
    """All six scores; external ones need ``truth``, silhouette needs data.

    Silhouette is left as None when the prediction has a single cluster.
    """
    if pred is None:
        raise ValueError("pred labels are required")
    out = {}
    if truth is not None:
        out["ari"] = adjusted_rand_index(truth, pred)
        out["ami"] = adjusted_mutual_information(truth, pred)
        h, c, v = homogeneity_completeness_v(truth, pred)
        out.update(homogeneity=h, completeness=c, v_measure=v)
    if (data is not None or distances is not None) and np.unique(pred).size > 1:
        out["silhouette"] = silhouette(data, pred, distances=distances)
    return MetricReport(**out, silhouette_distance=silhouette_distance)
