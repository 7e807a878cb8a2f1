"""Figures: line-space SVG plots and matplotlib benchmark charts.

The line-space plot is written directly as SVG so every sample is exactly
one ``<polyline>`` and the bytes depend only on the input. Benchmark charts
go through matplotlib with a fixed hash salt and no date stamp, which keeps
them reproducible too.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
UNLABELED = "#4c72b0"


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


def line_space_svg(values: np.ndarray, labels=None, title: str = "line space",
                   width: int = 800, height: int = 480) -> str:
    """One polyline per row of ``values`` plotted over feature indices 1..d."""
    X = np.asarray(values, dtype=np.float64)
    n, d = X.shape
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom
    ymin, ymax = float(X.min()), float(X.max())
    if ymax == ymin:
        ymin, ymax = ymin - 1.0, ymax + 1.0
    xs = left + (np.arange(d) / max(d - 1, 1)) * pw

    def ymap(v):
        return top + (ymax - v) / (ymax - ymin) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
        '<g id="axes" stroke="black" stroke-width="1" fill="none">',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}"/>',
        "</g>",
        '<g id="ticks" font-family="sans-serif" font-size="11" fill="black">',
    ]
    step = max(1, int(np.ceil(d / 10)))
    for j in range(0, d, step):
        x = xs[j]
        out.append(f'<line x1="{_fmt(x)}" y1="{top + ph}" x2="{_fmt(x)}" y2="{top + ph + 5}" '
                   'stroke="black"/>')
        out.append(f'<text x="{_fmt(x)}" y="{top + ph + 18}" text-anchor="middle">{j + 1}</text>')
    for v in _ticks(ymin, ymax):
        y = ymap(v)
        out.append(f'<line x1="{left - 5}" y1="{_fmt(y)}" x2="{left}" y2="{_fmt(y)}" '
                   'stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{_fmt(y + 4)}" text-anchor="end">{v:.2f}</text>')
    out.append("</g>")
    out.append(f'<text x="{left + pw / 2:.0f}" y="{height - 10}" text-anchor="middle" '
               'font-family="sans-serif" font-size="13">feature index</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.0f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 16 {top + ph / 2:.0f})">value</text>')

    out.append('<g id="lines" fill="none" stroke-width="1" stroke-opacity="0.6">')
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.size != n:
            raise ValueError(f"{labels.size} labels for {n} lines")
    for i in range(n):
        color = UNLABELED if labels is None else PALETTE[int(labels[i]) % len(PALETTE)]
        pts = " ".join(f"{_fmt(xs[j])},{_fmt(ymap(X[i, j]))}" for j in range(d))
        out.append(f'<polyline points="{pts}" stroke="{color}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_line_space_svg(path, values, labels=None, title="line space") -> Path:
    path = Path(path)
    path.write_text(line_space_svg(values, labels, title))
    return path


# ------------------------------------------------------------ matplotlib


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({
        "svg.hashsalt": "lsc",
        "svg.fonttype": "none",
        "font.size": 10,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "figure.figsize": (6.0, 4.0),
    })
    return plt


def _save(fig, path):
    path = Path(path)
    fig.savefig(path, format=path.suffix.lstrip(".") or "svg", metadata={"Date": None}
                if path.suffix == ".svg" else None, bbox_inches="tight")
    return path


def metric_curve(aggregate: list[dict], x_key: str, path, metric: str = "ari",
                 group_keys=("algorithm",), xlabel: str | None = None, title: str = ""):
    """Mean +- std of ``metric`` against ``x_key``, one curve per group."""
    plt = _pyplot()
    groups: dict[tuple, list[dict]] = {}
    for row in aggregate:
        groups.setdefault(tuple(row.get(k) for k in group_keys), []).append(row)
    fig, ax = plt.subplots()
    for key, rows in sorted(groups.items(), key=lambda kv: str(kv[0])):
        rows = sorted(rows, key=lambda r: float(r[x_key]))
        x = [float(r[x_key]) for r in rows]
        y = [float(r[f"{metric}_mean"]) for r in rows]
        e = [float(r.get(f"{metric}_std") or 0.0) for r in rows]
        ax.errorbar(x, y, yerr=e, marker="o", capsize=3,
                    label=" / ".join(str(k) for k in key))
    ax.set_xlabel(xlabel or x_key)
    ax.set_ylabel(metric.upper() if len(metric) <= 3 else metric)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    out = _save(fig, path)
    plt.close(fig)
    return out


def scaling_plot(ns, seconds, path, fit=None, title="LSC wall-clock vs samples"):
    """Scatter of fit time against n with the least-squares line, if given."""
    plt = _pyplot()
    fig, ax = plt.subplots()
    ax.plot(ns, seconds, "o", label="measured")
    if fit is not None:
        slope, intercept, r2 = fit
        xs = np.linspace(min(ns), max(ns), 50)
        ax.plot(xs, slope * xs + intercept, "-", label=f"linear fit (R² = {r2:.3f})")
    ax.set_xlabel("samples (n)")
    ax.set_ylabel("seconds")
    ax.set_title(title)
    ax.legend(frameon=False)
    out = _save(fig, path)
    plt.close(fig)
    return out


def bar_pair(labels, values, path, ylabel="ARI", title=""):
    plt = _pyplot()
    fig, ax = plt.subplots()
    ax.bar(labels, values, color=PALETTE[: len(values)])
    for i, v in enumerate(values):
        ax.text(i, v, f"{v:.4f}", ha="center", va="bottom")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    out = _save(fig, path)
    plt.close(fig)
    return out
