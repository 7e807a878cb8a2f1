"""Desk-scale benchmark suites.

A suite expands into independent cells, one per (condition, algorithm,
seed). Each cell is fully described by a JSON-serializable echo (dataset
recipe plus flat algorithm config), so :func:`run_cell` can replay any cell
and reproduce its labels byte for byte. Cells may run on a thread pool; the
aggregate is assembled only after every cell has finished and depends on
the per-run rows alone.

Suites
------
noise-sweep         LSC and K-means over synthetic noise levels.
alpha-sweep         LSC over a grid of alpha on synthetic, Iris and Wine.
realworld           Iris and Wine, alpha x smoothing grid plus K-means.
smoothing-ablation  LSC with and without smoothing on noisy synthetic data.
timing              LSC wall-clock (FastDTW) against n and d.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field, replace
import io
import json
import logging
import math
import os
from pathlib import Path
import re
import statistics
import time
import traceback

import numpy as np

from .cluster import LscConfig, kmeans_fit, lsc_fit
from .core import DataMatrix
from .data import BUNDLED, SyntheticSpec, generate_synthetic, labels_text
from .evaluation import METRIC_NAMES, evaluate
from .metric import CombinedMetricSpec
from .preprocess import standardize

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SUITES = ("noise-sweep", "alpha-sweep", "realworld", "smoothing-ablation", "timing")
ALGORITHMS = ("lsc", "kmeans")
KMEANS_KEYS = ("k", "seed", "max_iter", "tol", "standardize")
STAT_FIELDS = METRIC_NAMES + ("iterations", "time_total")

# columns of the per-run CSV, after the condition columns
RUN_FIELDS = ("suite", "cell_id", "dataset", "algorithm", "seed", "status",
              "n_samples", "n_features", "k") + METRIC_NAMES + (
              "iterations", "converged", "time_total", "time_distance", "error")


# ------------------------------------------------------------------ cells


@dataclass(frozen=True)
class Cell:
    suite: str
    algorithm: str
    dataset: dict
    config: dict
    condition: dict
    seed: int

    @property
    def cell_id(self) -> str:
        parts = [self.suite, _dataset_name(self.dataset), self.algorithm]
        for key, v in sorted(self.condition.items()):
            if key == "dataset" or v is None:
                continue
            if isinstance(v, bool):
                v = "on" if v else "off"
            parts.append(f"{key}{v:g}" if isinstance(v, float) else f"{key}{v}")
        parts.append(f"seed{self.seed}")
        return re.sub(r"[^A-Za-z0-9_.+-]", "_", "__".join(parts))

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "cell_id": self.cell_id,
                "suite": self.suite, "algorithm": self.algorithm, "seed": self.seed,
                "dataset": self.dataset, "condition": self.condition,
                "config": self.config}

    @classmethod
    def from_json(cls, doc: dict) -> "Cell":
        return cls(doc["suite"], doc["algorithm"], dict(doc["dataset"]),
                   dict(doc["config"]), dict(doc.get("condition", {})), int(doc["seed"]))


def _dataset_name(recipe: dict) -> str:
    return recipe["name"] if recipe["kind"] == "bundled" else "synthetic"


def load_dataset(recipe: dict):
    """Materialize a dataset recipe (synthetic spec or bundled name)."""
    if recipe["kind"] == "synthetic":
        fields = {k: v for k, v in recipe.items() if k != "kind"}
        return generate_synthetic(SyntheticSpec(**fields))
    if recipe["kind"] == "bundled":
        try:
            return BUNDLED[recipe["name"]]()
        except KeyError:
            raise ValueError(f"unknown bundled dataset {recipe['name']!r}") from None
    raise ValueError(f"unknown dataset kind {recipe['kind']!r}")


@dataclass
class CellResult:
    cell: Cell
    row: dict
    labels: np.ndarray | None


def run_cell(cell: Cell) -> CellResult:
    """Fit one cell and score it. Exceptions become a failed row."""
    row = {"suite": cell.suite, "cell_id": cell.cell_id,
           "dataset": _dataset_name(cell.dataset), "algorithm": cell.algorithm,
           "seed": cell.seed, **cell.condition}
    try:
        ds = load_dataset(cell.dataset)
        cfg = cell.config
        if cell.algorithm == "lsc":
            model = lsc_fit(ds.matrix, LscConfig.from_dict(cfg))
        elif cell.algorithm == "kmeans":
            model = kmeans_fit(ds.matrix, int(cfg["k"]), seed=int(cfg.get("seed", 0)),
                               max_iter=int(cfg.get("max_iter", 100)),
                               tol=float(cfg.get("tol", 1e-6)),
                               standardize=bool(cfg.get("standardize", True)))
        else:
            raise ValueError(f"unknown algorithm {cell.algorithm!r}")
        data = standardize(ds.matrix) if cfg.get("standardize", True) else ds.matrix
        rep = evaluate(ds.truth, model.labels, data=data.values)
        row.update(status="ok", n_samples=ds.matrix.n_samples,
                   n_features=ds.matrix.n_features, k=model.k,
                   iterations=model.iterations_run, converged=model.converged,
                   time_total=model.timings["total"],
                   time_distance=model.timings.get("distance"), error="")
        row.update({m: getattr(rep, m) for m in METRIC_NAMES})
        return CellResult(cell, row, np.asarray(model.labels))
    except Exception as exc:  # recorded, the suite carries on
        log.error("cell %s failed: %s", cell.cell_id, exc)
        log.debug("%s", traceback.format_exc())
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        return CellResult(cell, row, None)


# ------------------------------------------------------------- suite plan


def parse_list(text: str, cast=float) -> list:
    """``"1,2,3"`` or an inclusive range ``"0.1:0.9:0.1"``."""
    text = str(text).strip()
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("range step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [cast(round(start + i * step, 10)) for i in range(count)]
    return [cast(p) for p in text.split(",") if p.strip()]


@dataclass
class SuiteOptions:
    seeds: int = 10
    seed_start: int = 0
    noise: list | None = None
    alphas: list | None = None
    datasets: list | None = None
    smoothing: list | None = None
    ns: list | None = None
    ds: list | None = None
    n: int = 500
    d: int = 32
    k: int = 5
    center_spread: float = 10.0
    base_std: float = 1.0
    include_kmeans: bool = True
    # flat LscConfig keys applied on top of the suite's LSC defaults
    lsc: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


SUITE_DEFAULTS = {
    "noise-sweep": {"noise": [1.0, 2.0, 3.0, 5.0, 10.0]},
    "alpha-sweep": {"alphas": parse_list("0.1:0.9:0.1"), "noise": [3.0],
                    "datasets": ["synthetic", "iris", "wine"]},
    "realworld": {"datasets": ["iris", "wine"], "alphas": [0.25, 0.5],
                  "smoothing": [True, False]},
    "smoothing-ablation": {"noise": [10.0], "smoothing": [True, False]},
    "timing": {"ns": [250, 500, 1000], "ds": [32], "noise": [10.0]},
}


def resolved_options(suite: str, opts: SuiteOptions) -> SuiteOptions:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    fill = {k: v for k, v in SUITE_DEFAULTS[suite].items() if getattr(opts, k) is None}
    return replace(opts, **fill)


def lsc_defaults(k: int) -> dict:
    """LSC settings shared by every suite: K-means++ seeding, alpha 0.5, auto DTW."""
    cfg = LscConfig(k=k, init="kmeans++",
                    metric=CombinedMetricSpec(alpha=0.5, dtw_mode="auto"))
    return cfg.to_dict()


def _synthetic(opts: SuiteOptions, noise: float, seed: int, n=None, d=None) -> dict:
    return {"kind": "synthetic", "n_samples": int(n or opts.n), "n_features": int(d or opts.d),
            "n_clusters": opts.k, "noise_std": float(noise), "seed": seed,
            "center_spread": opts.center_spread, "base_std": opts.base_std}


def _recipe(name: str, opts, noise, seed):
    if name == "synthetic":
        return _synthetic(opts, noise, seed)
    if name not in BUNDLED:
        raise ValueError(f"unknown dataset {name!r}")
    return {"kind": "bundled", "name": name}


_BUNDLED_K = {"iris": 3, "wine": 3}


def _k_for(name, opts):
    return _BUNDLED_K.get(name, opts.k)


def build_cells(suite: str, opts: SuiteOptions) -> list[Cell]:
    opts = resolved_options(suite, opts)
    seeds = range(opts.seed_start, opts.seed_start + opts.seeds)
    cells: list[Cell] = []

    def lsc(recipe, cond, seed, k, **over):
        cfg = {**lsc_defaults(k), **opts.lsc, **over, "k": k, "seed": seed}
        cells.append(Cell(suite, "lsc", recipe, cfg, cond, seed))

    def km(recipe, cond, seed, k):
        base = {**lsc_defaults(k), **opts.lsc}
        cfg = {key: base[key] for key in KMEANS_KEYS} | {"k": k, "seed": seed}
        cells.append(Cell(suite, "kmeans", recipe, cfg, cond, seed))

    if suite == "noise-sweep":
        for noise in opts.noise:
            for s in seeds:
                rec = _synthetic(opts, noise, s)
                lsc(rec, {"noise": float(noise)}, s, opts.k)
                if opts.include_kmeans:
                    km(rec, {"noise": float(noise)}, s, opts.k)
    elif suite == "alpha-sweep":
        for name in opts.datasets:
            for a in opts.alphas:
                for s in seeds:
                    rec = _recipe(name, opts, opts.noise[0], s)
                    lsc(rec, {"dataset": name, "alpha": float(a)}, s, _k_for(name, opts),
                        **{"metric.alpha": float(a)})
    elif suite == "realworld":
        for name in opts.datasets:
            k = _k_for(name, opts)
            for a in opts.alphas:
                for sm in opts.smoothing:
                    for s in seeds:
                        lsc(_recipe(name, opts, None, s),
                            {"dataset": name, "alpha": float(a), "smoothing": bool(sm)},
                            s, k, **{"metric.alpha": float(a), "smoothing.enabled": bool(sm)})
            if opts.include_kmeans:
                for s in seeds:
                    km(_recipe(name, opts, None, s),
                       {"dataset": name, "alpha": None, "smoothing": None}, s, k)
    elif suite == "smoothing-ablation":
        for noise in opts.noise:
            for sm in opts.smoothing:
                for s in seeds:
                    lsc(_synthetic(opts, noise, s),
                        {"noise": float(noise), "smoothing": bool(sm)}, s, opts.k,
                        **{"smoothing.enabled": bool(sm)})
    elif suite == "timing":
        for d in opts.ds:
            for n in opts.ns:
                for s in seeds:
                    lsc(_synthetic(opts, opts.noise[0], s, n=n, d=d),
                        {"n": int(n), "d": int(d)}, s, opts.k,
                        **{"metric.dtw_mode": "fast"})
    return cells


# -------------------------------------------------------------- aggregate


def condition_keys(rows: list[dict]) -> list[str]:
    fixed = set(RUN_FIELDS)
    keys: list[str] = []
    for r in rows:
        for key in r:
            if key not in fixed and key not in keys:
                keys.append(key)
    return keys


def _num(v):
    if v is None or v == "":
        return None
    return float(v)


def aggregate(rows: list[dict], cond_keys: list[str] | None = None) -> list[dict]:
    """Mean, sample std and best ARI per (condition, algorithm).

    Groups keep first-appearance order. Failed runs count towards
    ``n_failed`` and are excluded from the statistics.
    """
    if cond_keys is None:
        cond_keys = condition_keys(rows)
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        key = (r.get("dataset"),) + tuple(r.get(k) for k in cond_keys) + (r["algorithm"],)
        groups.setdefault(key, []).append(r)
    out = []
    for key, members in groups.items():
        ok = [r for r in members if r.get("status") == "ok"]
        agg = {"dataset": key[0]}
        agg.update(dict(zip(cond_keys, key[1:-1])))
        agg["algorithm"] = key[-1]
        agg["n_runs"] = len(ok)
        agg["n_failed"] = len(members) - len(ok)
        for m in STAT_FIELDS:
            vals = [_num(r.get(m)) for r in ok]
            vals = [v for v in vals if v is not None]
            agg[f"{m}_mean"] = statistics.fmean(vals) if vals else None
            agg[f"{m}_std"] = statistics.stdev(vals) if len(vals) > 1 else (0.0 if vals else None)
        aris = [_num(r.get("ari")) for r in ok if _num(r.get("ari")) is not None]
        agg["ari_best"] = max(aris) if aris else None
        out.append(agg)
    return out


_PRETTY = {"ari": "ARI", "ami": "AMI", "homogeneity": "Homogeneity",
           "completeness": "Completeness", "v_measure": "V-measure",
           "silhouette": "Silhouette"}


def paper_table(suite: str, agg: list[dict]) -> list[dict]:
    """Aggregate projected onto the published table layout (means only)."""
    out = []
    for a in agg:
        alg = "LSC" if a["algorithm"] == "lsc" else "KM"
        if suite == "noise-sweep":
            row = {"Noise": a["noise"], "Algorithm": alg}
        elif suite == "alpha-sweep":
            row = {"Dataset": a["dataset"], "Alpha": a["alpha"], "Algorithm": alg}
        elif suite == "realworld":
            if a["algorithm"] == "lsc":
                sm = "on" if _truthy(a["smoothing"]) else "off"
                alg = f"LSC (alpha={float(a['alpha']):g}, smoothing {sm})"
            row = {"Dataset": a["dataset"], "Algorithm": alg}
        elif suite == "smoothing-ablation":
            row = {"Noise": a["noise"],
                   "Condition": "With Smoothing" if _truthy(a["smoothing"])
                   else "Without Smoothing"}
        else:
            row = {"n": a["n"], "d": a["d"], "Algorithm": alg,
                   "Seconds": a["time_total_mean"], "Seconds std": a["time_total_std"]}
            out.append(row)
            continue
        for m in METRIC_NAMES:
            row[_PRETTY[m]] = a[f"{m}_mean"]
        row["ARI std"] = a["ari_std"]
        row["ARI best"] = a["ari_best"]
        out.append(row)
    return out


def _truthy(v) -> bool:
    if isinstance(v, str):
        return v.strip().lower() in ("true", "1", "on", "yes")
    return bool(v)


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares line through (x, y): slope, intercept, R^2."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def summarize(suite: str, agg: list[dict]) -> dict:
    """Headline numbers per suite for the report JSON."""
    if suite == "timing":
        fits = {}
        for d in sorted({int(a["d"]) for a in agg}):
            pts = sorted((int(a["n"]), a["time_total_mean"]) for a in agg
                         if int(a["d"]) == d and a["time_total_mean"] is not None)
            if len(pts) >= 2:
                slope, icpt, r2 = linear_fit(*zip(*pts))
                fits[str(d)] = {"n": [p[0] for p in pts], "seconds": [p[1] for p in pts],
                                "slope": slope, "intercept": icpt, "r2": r2}
        return {"linear_fit": fits}
    if suite == "smoothing-ablation":
        return {"ari_mean": {f"noise={a['noise']:g},smoothing={_truthy(a['smoothing'])}":
                             a["ari_mean"] for a in agg}}
    key = {"noise-sweep": ("noise",), "alpha-sweep": ("dataset", "alpha"),
           "realworld": ("dataset", "alpha", "smoothing")}[suite]
    return {"ari_mean": {",".join(f"{k}={a[k]}" for k in key) + f",{a['algorithm']}":
                         a["ari_mean"] for a in agg}}


# ------------------------------------------------------------------- I/O


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
    return path


def _cell_text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell_text(r.get(c)) for c in columns])
    return buf.getvalue()


def read_rows(path) -> list[dict]:
    """Per-run CSV back into dicts; numbers stay strings except via :func:`_num`."""
    with open(path, newline="") as fh:
        return [dict(r) for r in csv.DictReader(fh)]


def resolve_workers(requested: int | None = None) -> int:
    """Requested count (default: CPU count), capped by ``LSC_THREADS``."""
    workers = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("LSC_THREADS")
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            log.warning("ignoring non-integer LSC_THREADS=%r", cap)
    return max(1, int(workers))


def write_cell(result: CellResult, cell_dir: Path) -> dict:
    cid = result.cell.cell_id
    files = {"config": str(atomic_write(cell_dir / f"{cid}.json",
                                        json.dumps(result.cell.to_json(), indent=2,
                                                   sort_keys=True) + "\n"))}
    if result.labels is not None:
        files["labels"] = str(atomic_write(cell_dir / f"{cid}.labels.csv",
                                           labels_text(result.labels)))
    return files


@dataclass
class SuiteResult:
    suite: str
    rows: list[dict]
    aggregate: list[dict]
    table: list[dict]
    summary: dict
    failures: list[dict]
    files: dict

    @property
    def ok(self) -> bool:
        return not self.failures


def _warm_up():
    # compile/load the numba kernels outside any timed region
    m = DataMatrix(np.arange(40, dtype=np.float64).reshape(5, 8) % 7)
    for mode in ("exact", "fast"):
        lsc_fit(m, LscConfig(k=2, metric=CombinedMetricSpec(dtw_mode=mode), max_iter=2))


def run_suite(suite: str, opts: SuiteOptions | None = None, out_dir=None,
              workers: int | None = None, figures: bool = True,
              cells: list[Cell] | None = None) -> SuiteResult:
    """Run every cell of ``suite`` and write the report files under ``out_dir``."""
    opts = resolved_options(suite, opts or SuiteOptions())
    if cells is None:
        cells = build_cells(suite, opts)
    workers = resolve_workers(workers)
    out = Path(out_dir) if out_dir is not None else None
    cell_dir = None
    if out is not None:
        cell_dir = out / "cells"
        cell_dir.mkdir(parents=True, exist_ok=True)
    if suite == "timing":
        _warm_up()
        workers = 1  # concurrent fits would distort wall-clock

    def job(cell):
        res = run_cell(cell)
        if cell_dir is not None:
            write_cell(res, cell_dir)
        return res

    t0 = time.perf_counter()
    log.info("suite %s: %d cells on %d worker(s)", suite, len(cells), workers)
    if workers == 1:
        results = [job(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, cells))
    elapsed = time.perf_counter() - t0

    rows = [r.row for r in results]
    cond = condition_keys(rows)
    for r in rows:
        for key in cond:
            r.setdefault(key, None)
    agg = aggregate(rows, cond)
    table = paper_table(suite, agg)
    summary = summarize(suite, agg)
    failures = [{"cell_id": r["cell_id"], "error": r["error"]} for r in rows
                if r["status"] != "ok"]
    files: dict = {}
    if out is not None:
        columns = ["suite", "cell_id", "dataset", *[c for c in cond if c != "dataset"],
                   *[c for c in RUN_FIELDS if c not in ("suite", "cell_id", "dataset")]]
        files["runs"] = str(atomic_write(out / "runs.csv", rows_to_csv(rows, columns)))
        files["aggregate"] = str(atomic_write(out / "aggregate.csv", rows_to_csv(agg)))
        files["table"] = str(atomic_write(out / "table.csv", rows_to_csv(table)))
        files["cells"] = str(cell_dir)
        if figures:
            files["figures"] = [str(p) for p in render_figures(suite, agg, summary, out)]
        report = {
            "schema_version": SCHEMA_VERSION,
            "suite": suite,
            "options": opts.to_json(),
            "lsc_defaults": lsc_defaults(opts.k),
            "workers": workers,
            "n_cells": len(cells),
            "elapsed_seconds": elapsed,
            "summary": summary,
            "aggregate": agg,
            "failures": failures,
            "files": files,
        }
        files["report"] = str(atomic_write(out / "report.json",
                                           json.dumps(report, indent=2) + "\n"))
    return SuiteResult(suite, rows, agg, table, summary, failures, files)


def render_figures(suite: str, agg: list[dict], summary: dict, out: Path) -> list[Path]:
    from . import plotting

    ok = [a for a in agg if a["ari_mean"] is not None]
    paths = []
    if suite == "noise-sweep" and ok:
        paths.append(plotting.metric_curve(ok, "noise", out / "noise_sweep_ari.svg",
                                           xlabel="noise std", title="ARI vs noise"))
    elif suite == "alpha-sweep" and ok:
        paths.append(plotting.metric_curve(ok, "alpha", out / "alpha_sweep_ari.svg",
                                           group_keys=("dataset",), xlabel="alpha",
                                           title="LSC ARI vs alpha"))
    elif suite in ("realworld", "smoothing-ablation") and ok:
        names = [" ".join(str(v) for v in r.values())
                 for r in (_short_label(suite, a) for a in ok)]
        paths.append(plotting.bar_pair(names, [a["ari_mean"] for a in ok],
                                       out / f"{suite}_ari.svg", title=f"{suite}: mean ARI"))
    elif suite == "timing":
        for d, fit in summary.get("linear_fit", {}).items():
            paths.append(plotting.scaling_plot(
                fit["n"], fit["seconds"], out / f"timing_d{d}.svg",
                fit=(fit["slope"], fit["intercept"], fit["r2"]),
                title=f"LSC wall-clock vs n (d={d}, FastDTW)"))
    return paths


def _short_label(suite, a) -> dict:
    if suite == "smoothing-ablation":
        return {"s": "with" if _truthy(a["smoothing"]) else "without"}
    if a["algorithm"] == "kmeans":
        return {"d": a["dataset"], "a": "KM"}
    return {"d": a["dataset"], "a": f"a={float(a['alpha']):g}",
            "s": "sm" if _truthy(a["smoothing"]) else "raw"}
