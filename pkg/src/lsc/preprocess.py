"""Column standardization and Savitzky-Golay smoothing of data lines."""

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import DataError, DataMatrix, LineSeries

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StandardizationParams:
    means: np.ndarray
    stds: np.ndarray

    @property
    def n_features(self) -> int:
        return self.means.size


def fit_standardizer(m: DataMatrix) -> StandardizationParams:
    """Per-column mean and population std (ddof=0).

    Zero-variance columns get std 1 so they standardize to all zeros.
    """
    means = m.values.mean(axis=0)
    stds = m.values.std(axis=0)
    # tolerance relative to the column magnitude catches float noise on constant columns
    degenerate = stds <= 1e-12 * np.maximum(1.0, np.abs(means))
    stds = np.where(degenerate, 1.0, stds)
    means.setflags(write=False)
    stds.setflags(write=False)
    return StandardizationParams(means, stds)


def apply_standardizer(m: DataMatrix, p: StandardizationParams) -> DataMatrix:
    if m.n_features != p.n_features:
        raise DataError(
            f"standardization params fitted on {p.n_features} features, "
            f"matrix has {m.n_features}"
        )
    return DataMatrix((m.values - p.means) / p.stds)


def standardize(m: DataMatrix) -> DataMatrix:
    return apply_standardizer(m, fit_standardizer(m))


@dataclass(frozen=True)
class SavGolSpec:
    window_length: int = 5
    poly_order: int = 2

    def __post_init__(self):
        w, p = self.window_length, self.poly_order
        if w < 3 or w % 2 == 0:
            raise ValueError(f"window_length must be odd and >= 3, got {w}")
        if not 0 <= p < w:
            raise ValueError(f"poly_order must satisfy 0 <= order < window ({w}), got {p}")

    @property
    def half_width(self) -> int:
        return self.window_length // 2


def fit_spec_to_length(spec: SavGolSpec, length: int) -> SavGolSpec | None:
    """Shrink ``spec`` so its window fits a line of ``length`` points.

    The window drops to the largest odd size <= length and the order to at
    most window - 2, so the filter still smooths instead of interpolating.
    Returns None when the line is too short for any window (length < 3).
    """
    if length >= spec.window_length:
        return spec
    if length < 3:
        return None
    window = length if length % 2 else length - 1
    order = min(spec.poly_order, window - 2)
    return SavGolSpec(window, order)


@dataclass(frozen=True, eq=False)
class SavGolKernel:
    """Least-squares smoothing weights for one (window, order) pair.

    ``projection`` is the (2m+1) x (2m+1) hat matrix ``V (V^T V)^-1 V^T``;
    row ``r`` evaluates the fitted polynomial at window position ``r``.
    The central row is the convolution kernel, the outer rows serve the
    first and last ``m`` points of a line.
    """

    spec: SavGolSpec
    projection: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        return self.projection[self.spec.half_width]


def savgol_kernel(spec: SavGolSpec) -> SavGolKernel:
    m = spec.half_width
    positions = np.arange(-m, m + 1, dtype=np.float64)
    vander = positions[:, None] ** np.arange(spec.poly_order + 1)[None, :]
    # lstsq against the identity yields the pseudo-inverse via SVD, which is
    # better conditioned than forming the normal equations explicitly
    pinv, *_ = np.linalg.lstsq(vander, np.eye(2 * m + 1), rcond=None)
    projection = vander @ pinv
    # the exact hat matrix is symmetric; remove rounding asymmetry
    projection = 0.5 * (projection + projection[::-1, ::-1])
    projection.setflags(write=False)
    return SavGolKernel(spec, projection)


def smooth_array(values: np.ndarray, kernel: SavGolKernel) -> np.ndarray:
    """Smooth every row of a 2-D array (or a single 1-D array)."""
    x = np.asarray(values, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    w = kernel.spec.window_length
    m = kernel.spec.half_width
    d = x.shape[1]
    if d < w:
        raise DataError(
            f"line of length {d} is shorter than the smoothing window {w}; "
            "disable smoothing or use a smaller window"
        )
    out = np.empty_like(x)
    H = kernel.projection
    windows = sliding_window_view(x, w, axis=1)  # (n, d - w + 1, w)
    out[:, m : d - m] = windows @ H[m]
    out[:, :m] = x[:, :w] @ H[:m].T
    out[:, d - m :] = x[:, d - w :] @ H[m + 1 :].T
    return out[0] if squeeze else out


def smooth_line(line: LineSeries, kernel: SavGolKernel) -> LineSeries:
    return line.with_values(smooth_array(line.values, kernel))


def smooth_matrix(m: DataMatrix, kernel: SavGolKernel) -> DataMatrix:
    return DataMatrix(smooth_array(m.values, kernel))
