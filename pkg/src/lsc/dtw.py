"""Dynamic Time Warping with an absolute-difference local cost.

Exact DTW fills the cumulative cost matrix

    D(i, j) = |s_i - t_j| + min(D(i-1, j), D(i, j-1), D(i-1, j-1))

with the first row and column accumulated along the border. FastDTW
(Salvador & Chan) coarsens both sequences by pairwise averaging, solves the
coarsest level exactly, then projects the path one level finer and re-solves
inside a band of ``radius`` cells around it.

The numba kernels release the GIL so batch helpers can be driven from a
thread pool.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .core import DataError, LineSeries, lines_to_array

_NB = dict(cache=True, nogil=True)


@dataclass(frozen=True)
class FastDtwSpec:
    radius: int = 1
    min_size: int = 4

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")
        if self.min_size < 2:
            raise ValueError(f"min_size must be >= 2, got {self.min_size}")


@dataclass(frozen=True)
class WarpingPath:
    """Sequence of 1-based ``(i, j)`` index pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def is_valid(self, n: int, m: int) -> bool:
        """Boundary, continuity and monotonicity, no repeated pair."""
        p = self.pairs
        if not p or p[0] != (1, 1) or p[-1] != (n, m):
            return False
        for (i0, j0), (i1, j1) in zip(p, p[1:]):
            di, dj = i1 - i0, j1 - j0
            if not (0 <= di <= 1 and 0 <= dj <= 1) or di + dj == 0:
                return False
        return True

    def cost(self, s, t) -> float:
        s = np.asarray(s, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        return float(sum(abs(s[i - 1] - t[j - 1]) for i, j in self.pairs))


# ---------------------------------------------------------------- kernels


@numba.njit(**_NB)
def _cost_matrix(s, t):
    n, m = s.size, t.size
    D = np.empty((n, m))
    D[0, 0] = abs(s[0] - t[0])
    for i in range(1, n):
        D[i, 0] = D[i - 1, 0] + abs(s[i] - t[0])
    for j in range(1, m):
        D[0, j] = D[0, j - 1] + abs(s[0] - t[j])
    for i in range(1, n):
        for j in range(1, m):
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = abs(s[i] - t[j]) + best
    return D


@numba.njit(**_NB)
def _backtrack(D):
    """Optimal path from (n-1, m-1) back to (0, 0); 0-based, forward order.

    Ties prefer the diagonal, then (i-1, j), then (i, j-1). Cells outside a
    window hold +inf and are never chosen.
    """
    n, m = D.shape
    path = np.empty((n + m - 1, 2), dtype=np.int64)
    i, j = n - 1, m - 1
    k = 0
    path[k, 0] = i
    path[k, 1] = j
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = D[i - 1, j - 1]
            up = D[i - 1, j]
            left = D[i, j - 1]
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        k += 1
        path[k, 0] = i
        path[k, 1] = j
    return path[: k + 1][::-1].copy()


@numba.njit(**_NB)
def _dtw_distance(s, t):
    """Distance and optimal-path length using two rolling rows."""
    n, m = s.size, t.size
    prev = np.empty(m)
    cur = np.empty(m)
    plen_prev = np.empty(m, dtype=np.int64)
    plen_cur = np.empty(m, dtype=np.int64)
    prev[0] = abs(s[0] - t[0])
    plen_prev[0] = 1
    for j in range(1, m):
        prev[j] = prev[j - 1] + abs(s[0] - t[j])
        plen_prev[j] = plen_prev[j - 1] + 1
    for i in range(1, n):
        cur[0] = prev[0] + abs(s[i] - t[0])
        plen_cur[0] = plen_prev[0] + 1
        for j in range(1, m):
            best = prev[j - 1]
            bl = plen_prev[j - 1]
            if prev[j] < best:
                best = prev[j]
                bl = plen_prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
                bl = plen_cur[j - 1]
            cur[j] = abs(s[i] - t[j]) + best
            plen_cur[j] = bl + 1
        prev, cur = cur, prev
        plen_prev, plen_cur = plen_cur, plen_prev
    return prev[m - 1], plen_prev[m - 1]


@numba.njit(**_NB)
def _coarsen(x):
    """Average adjacent pairs; an odd trailing element stays as its own cell."""
    n = x.size
    out = np.empty((n + 1) // 2)
    for i in range(n // 2):
        out[i] = 0.5 * (x[2 * i] + x[2 * i + 1])
    if n % 2:
        out[n // 2] = x[n - 1]
    return out


@numba.njit(**_NB)
def _window_from_path(path, n, m, radius):
    """Per-row column ranges [lo, hi] covering the projected path +- radius."""
    lo = np.full(n, m, dtype=np.int64)
    hi = np.full(n, -1, dtype=np.int64)
    for k in range(path.shape[0]):
        ci, cj = path[k, 0], path[k, 1]
        for i in range(2 * ci, min(2 * ci + 2, n)):
            j0 = 2 * cj
            j1 = min(2 * cj + 1, m - 1)
            if j0 < lo[i]:
                lo[i] = j0
            if j1 > hi[i]:
                hi[i] = j1
    if radius == 0:
        return lo, hi
    wlo = np.empty(n, dtype=np.int64)
    whi = np.empty(n, dtype=np.int64)
    for i in range(n):
        a = max(0, i - radius)
        b = min(n - 1, i + radius)
        mn = m
        mx = -1
        for r in range(a, b + 1):
            if lo[r] < mn:
                mn = lo[r]
            if hi[r] > mx:
                mx = hi[r]
        wlo[i] = max(0, mn - radius)
        whi[i] = min(m - 1, mx + radius)
    return wlo, whi


@numba.njit(**_NB)
def _windowed_cost_matrix(s, t, lo, hi):
    n, m = s.size, t.size
    inf = np.inf
    D = np.full((n, m), inf)
    for i in range(n):
        for j in range(lo[i], hi[i] + 1):
            c = abs(s[i] - t[j])
            if i == 0 and j == 0:
                D[i, j] = c
                continue
            best = inf
            if i > 0 and j > 0 and D[i - 1, j - 1] < best:
                best = D[i - 1, j - 1]
            if i > 0 and D[i - 1, j] < best:
                best = D[i - 1, j]
            if j > 0 and D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = c + best
    return D


@numba.njit(**_NB)
def _fast_dtw(s, t, radius, min_size):
    """FastDTW distance and path (0-based), iterative over resolution levels."""
    levels_s = [s]
    levels_t = [t]
    while levels_s[-1].size > min_size and levels_t[-1].size > min_size:
        levels_s.append(_coarsen(levels_s[-1]))
        levels_t.append(_coarsen(levels_t[-1]))
    top = len(levels_s) - 1
    D = _cost_matrix(levels_s[top], levels_t[top])
    path = _backtrack(D)
    for lev in range(top - 1, -1, -1):
        a = levels_s[lev]
        b = levels_t[lev]
        lo, hi = _window_from_path(path, a.size, b.size, radius)
        D = _windowed_cost_matrix(a, b, lo, hi)
        path = _backtrack(D)
    n, m = D.shape
    return D[n - 1, m - 1], path


@numba.njit(**_NB)
def _fast_dtw_distance(s, t, radius, min_size):
    d, path = _fast_dtw(s, t, radius, min_size)
    return d, path.shape[0]


@numba.njit(**_NB)
def _pair_distance(s, t, fast, radius, min_size, normalize):
    if fast:
        d, plen = _fast_dtw_distance(s, t, radius, min_size)
    else:
        d, plen = _dtw_distance(s, t)
    if normalize:
        return d / plen
    return d


@numba.njit(**_NB)
def _cross_distances(X, C, fast, radius, min_size, normalize):
    n, k = X.shape[0], C.shape[0]
    out = np.empty((n, k))
    for i in range(n):
        for j in range(k):
            out[i, j] = _pair_distance(X[i], C[j], fast, radius, min_size, normalize)
    return out


@numba.njit(**_NB)
def _pairwise_rows(X, rows, fast, radius, min_size, normalize):
    n = X.shape[0]
    out = np.zeros((rows.size, n))
    for r in range(rows.size):
        i = rows[r]
        for j in range(i + 1, n):
            out[r, j] = _pair_distance(X[i], X[j], fast, radius, min_size, normalize)
    return out


# ---------------------------------------------------------------- public API


def _as_seq(x, name="sequence") -> np.ndarray:
    if isinstance(x, LineSeries):
        x = x.values
    a = np.ascontiguousarray(x, dtype=np.float64).ravel()
    if a.size == 0:
        raise DataError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise DataError(f"{name} contains non-finite values")
    return a


def dtw_exact(s, t) -> tuple[float, WarpingPath]:
    """Exact DTW distance and one optimal warping path (1-based pairs).

    >>> dtw_exact([0, 1, 2], [0, 2])[0]
    1.0
    """
    a, b = _as_seq(s, "s"), _as_seq(t, "t")
    D = _cost_matrix(a, b)
    path = _backtrack(D) + 1
    pairs = tuple((int(i), int(j)) for i, j in path)
    return float(D[-1, -1]), WarpingPath(pairs)


def dtw_distance(s, t, normalize: bool = False) -> float:
    """Exact DTW distance only, O(len(t)) memory."""
    d, plen = _dtw_distance(_as_seq(s, "s"), _as_seq(t, "t"))
    return float(d / plen) if normalize else float(d)


def dtw_fast(s, t, spec: FastDtwSpec = FastDtwSpec()) -> float:
    """FastDTW distance: the cost of a valid warping path, never below exact DTW."""
    d, _ = _fast_dtw(_as_seq(s, "s"), _as_seq(t, "t"), spec.radius, spec.min_size)
    return float(d)


def dtw_fast_path(s, t, spec: FastDtwSpec = FastDtwSpec()) -> tuple[float, WarpingPath]:
    d, path = _fast_dtw(_as_seq(s, "s"), _as_seq(t, "t"), spec.radius, spec.min_size)
    pairs = tuple((int(i) + 1, int(j) + 1) for i, j in path)
    return float(d), WarpingPath(pairs)


def _mode_args(mode) -> tuple[bool, int, int]:
    if mode == "exact" or mode is None:
        return False, 0, 2
    if mode == "fast":
        mode = FastDtwSpec()
    if isinstance(mode, FastDtwSpec):
        return True, mode.radius, mode.min_size
    raise ValueError(f"unknown DTW mode {mode!r}; use 'exact', 'fast' or a FastDtwSpec")


def dtw_pair(s, t, mode="exact", normalize: bool = False) -> float:
    """Distance under ``mode`` ('exact', 'fast' or a FastDtwSpec).

    ``normalize`` divides by the length of the chosen warping path.
    """
    fast, radius, min_size = _mode_args(mode)
    return float(_pair_distance(_as_seq(s, "s"), _as_seq(t, "t"), fast, radius, min_size,
                                normalize))


def cross_dtw(X: np.ndarray, C: np.ndarray, mode="exact", normalize: bool = False) -> np.ndarray:
    """DTW between every row of ``X`` and every row of ``C``; shape (n, k)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    if X.shape[1] != C.shape[1]:
        raise DataError(f"length mismatch: {X.shape[1]} vs {C.shape[1]}")
    fast, radius, min_size = _mode_args(mode)
    return _cross_distances(X, C, fast, radius, min_size, normalize)


def pairwise_dtw_array(X: np.ndarray, mode="exact", normalize: bool = False,
                       workers: int = 1) -> np.ndarray:
    """Symmetric (n, n) DTW matrix over the rows of ``X``.

    Rows are split across ``workers`` threads; every entry depends only on
    its own pair, so the result does not depend on the worker count.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    fast, radius, min_size = _mode_args(mode)
    out = np.zeros((n, n))
    if n < 2:
        return out
    rows = np.arange(n - 1, dtype=np.int64)
    if workers <= 1:
        upper = _pairwise_rows(X, rows, fast, radius, min_size, normalize)
        out[: n - 1] = upper
    else:
        from concurrent.futures import ThreadPoolExecutor

        # interleave rows so each chunk carries a similar amount of work
        chunks = [rows[w::workers] for w in range(workers)]
        with ThreadPoolExecutor(workers) as pool:
            parts = pool.map(
                lambda r: _pairwise_rows(X, r, fast, radius, min_size, normalize), chunks
            )
            for r, part in zip(chunks, parts):
                out[r] = part
    return out + out.T


def pairwise_dtw(lines: Sequence[LineSeries], mode="exact", normalize: bool = False,
                 workers: int = 1) -> np.ndarray:
    X = lines_to_array(list(lines))
    return pairwise_dtw_array(X, mode=mode, normalize=normalize, workers=workers)
