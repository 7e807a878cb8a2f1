"""``lsc`` command-line interface.

Subcommands: generate, cluster, evaluate, benchmark, rerun, plot.

Exit codes
----------
0  success
2  usage error (bad flags or flag combinations)
3  data error (missing/unreadable/malformed input, k > n, label mismatch)
4  runtime failure (a benchmark cell failed, or an unexpected error)
"""

from __future__ import annotations

import argparse
import json
import logging
import os
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .bench import SUITES, Cell, SuiteOptions, atomic_write, parse_list, run_cell, run_suite
from .cluster import LscConfig, kmeans_fit, lsc_fit, prepare_lines
from .config import as_bool, load_config, merge, parse_value
from .core import DataError
from .data import (
    BUNDLED,
    SyntheticSpec,
    bundled_path,
    generate_synthetic,
    labels_text,
    load_csv,
    read_labels,
    write_csv,
    write_metadata,
)
from .evaluation import METRIC_NAMES, MetricReport, evaluate
from .metric import combined_pairwise
from .plotting import write_line_space_svg
from .preprocess import standardize

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4
SCHEMA_VERSION = 1

log = logging.getLogger("lsc")


class UsageError(Exception):
    pass


# flag dest -> flat config key
_CLUSTER_FLAGS = {
    "algorithm": "algorithm",
    "k": "k",
    "seed": "seed",
    "max_iter": "max_iter",
    "tol": "tol",
    "init": "init",
    "standardize": "standardize",
    "alpha": "metric.alpha",
    "dtw": "metric.dtw_mode",
    "scale": "metric.scale_mode",
    "dtw_normalize": "metric.dtw_normalize",
    "radius": "fastdtw.radius",
    "min_size": "fastdtw.min_size",
    "smooth": "smoothing.enabled",
    "window": "smoothing.window_length",
    "order": "smoothing.poly_order",
    "shrink_window": "smoothing.shrink_window",
    "silhouette": "silhouette",
    "label_column": "data.label_column",
    "delimiter": "data.delimiter",
}
_BOOL_KEYS = {"standardize", "metric.dtw_normalize", "smoothing.enabled",
              "smoothing.shrink_window"}


def _onoff(text: str) -> bool:
    try:
        return as_bool(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsc", description="Line Space Clustering toolkit")
    p.add_argument("--version", action="version", version=f"lsc {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic Gaussian-blob dataset")
    g.add_argument("--n", type=int, default=500)
    g.add_argument("--d", type=int, default=32)
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--noise", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--center-spread", type=float, default=10.0)
    g.add_argument("--base-std", type=float, default=1.0)
    g.add_argument("-o", "--out", required=True, help="dataset CSV path")

    c = sub.add_parser("cluster", help="cluster a dataset with LSC or K-means")
    c.add_argument("dataset", help="CSV path, or 'iris'/'wine' for the bundled sets")
    c.add_argument("--config", help="key=value config file or a report JSON to rerun")
    c.add_argument("--alg", dest="algorithm", choices=("lsc", "kmeans"))
    c.add_argument("--k", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--max-iter", type=int)
    c.add_argument("--tol", type=float)
    c.add_argument("--init", choices=("random", "kmeans++"))
    c.add_argument("--standardize", type=_onoff, metavar="on|off")
    c.add_argument("--alpha", type=float)
    c.add_argument("--dtw", choices=("exact", "fast", "auto"))
    c.add_argument("--scale", choices=("raw", "normalized"))
    c.add_argument("--dtw-normalize", type=_onoff, metavar="on|off")
    c.add_argument("--radius", type=int)
    c.add_argument("--min-size", type=int)
    c.add_argument("--smooth", type=_onoff, metavar="on|off")
    c.add_argument("--window", type=int)
    c.add_argument("--order", type=int)
    c.add_argument("--shrink-window", type=_onoff, metavar="on|off")
    c.add_argument("--silhouette", choices=("euclidean", "combined"))
    c.add_argument("--label-column",
                   help="label column name or 0-based index; 'none' for unlabeled data "
                        "(default: a 'label' or 'class' header column if present)")
    c.add_argument("--delimiter")
    c.add_argument("-o", "--out", default="lsc-out", help="output directory")

    e = sub.add_parser("evaluate", help="score predicted labels")
    e.add_argument("labels", help="labels CSV")
    e.add_argument("--truth", help="truth labels CSV or labeled dataset CSV")
    e.add_argument("--data", help="dataset CSV for silhouette")
    e.add_argument("--truth-column", help="label column in the truth file")
    e.add_argument("--no-standardize", action="store_true",
                   help="silhouette on raw rather than standardized data")
    e.add_argument("-o", "--out", help="write the metrics as JSON here")

    b = sub.add_parser("benchmark", help="run a desk-scale benchmark suite")
    b.add_argument("suite", choices=SUITES)
    b.add_argument("--seeds", type=int, default=10, help="repetitions (seeds 0..N-1)")
    b.add_argument("--seed-start", type=int, default=0)
    b.add_argument("--noise", help="comma list, e.g. 1,2,3,5,10")
    b.add_argument("--alphas", help="comma list or start:stop:step")
    b.add_argument("--datasets", help="comma list from synthetic,iris,wine")
    b.add_argument("--smoothing", help="comma list of on/off")
    b.add_argument("--ns", help="timing: sample counts")
    b.add_argument("--ds", help="timing: feature counts")
    b.add_argument("--n", type=int, default=500)
    b.add_argument("--d", type=int, default=32)
    b.add_argument("--k", type=int, default=5)
    b.add_argument("--no-kmeans", action="store_true")
    b.add_argument("--config", help="key=value overrides for the LSC config")
    b.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="one LSC config override; repeatable")
    b.add_argument("--workers", type=int, help="parallel cells (capped by LSC_THREADS)")
    b.add_argument("--no-figures", action="store_true")
    b.add_argument("-o", "--out", default=None, help="output directory")

    r = sub.add_parser("rerun", help="replay one benchmark cell from its config echo")
    r.add_argument("cell", help="cell JSON written by 'benchmark'")
    r.add_argument("-o", "--out", required=True, help="labels CSV to write")

    pl = sub.add_parser("plot", help="draw lines as an SVG, colored by cluster")
    pl.add_argument("dataset")
    pl.add_argument("--labels", help="labels CSV for coloring")
    pl.add_argument("--label-column")
    pl.add_argument("--standardize", action="store_true")
    pl.add_argument("--title")
    pl.add_argument("-o", "--out", required=True, help="SVG path")
    return p


# ---------------------------------------------------------------- helpers


def _label_column(value):
    if value is None:
        return "auto"
    if isinstance(value, int):
        return value
    s = str(value).strip()
    if s.lower() == "none":
        return None
    if s.lstrip("-").isdigit():
        return int(s)
    return s


def resolve_path(path: str) -> str:
    """Map a bundled dataset name to its CSV unless a file of that name exists."""
    if path in BUNDLED and not Path(path).exists():
        return str(bundled_path(path))
    return path


def load_dataset_arg(path: str, label_column="auto", delimiter: str = ","):
    """Dataset from a path or bundled name; ``auto`` finds a label/class column."""
    path = resolve_path(path)
    label_column = _label_column(label_column)
    if label_column == "auto":
        label_column = None
        try:
            with open(path) as fh:
                header = [h.strip() for h in fh.readline().split(delimiter)]
        except OSError:
            raise DataError(f"no such file: {path}") from None
        for cand in ("label", "class"):
            if cand in header:
                label_column = cand
                break
    return load_csv(path, label_column=label_column, delimiter=delimiter)


def _write_json(path, doc) -> Path:
    return atomic_write(path, json.dumps(doc, indent=2) + "\n")


def _lsc_config(cfg: dict) -> LscConfig:
    try:
        return LscConfig.from_dict(cfg)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _metrics_lines(rep: MetricReport) -> list[str]:
    out = []
    for m in METRIC_NAMES:
        v = getattr(rep, m)
        if v is not None:
            out.append(f"{m}\t{v:.6f}")
    return out


# ------------------------------------------------------------- commands


def cmd_generate(args) -> int:
    try:
        spec = SyntheticSpec(args.n, args.d, args.k, args.noise, args.seed,
                             args.center_spread, args.base_std)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = generate_synthetic(spec)
    out = Path(args.out)
    try:
        write_csv(ds, out)
        meta = write_metadata(ds, out)
    except OSError as exc:
        raise DataError(f"cannot write {out}: {exc}") from None
    print(f"wrote {out} ({spec.n_samples} rows) and {meta}")
    return EXIT_OK


CLUSTER_DEFAULTS = {
    "algorithm": "lsc",
    "silhouette": "euclidean",
    "data.label_column": "auto",
    "data.delimiter": ",",
    **{k: v for k, v in LscConfig(k=1).to_dict().items() if k != "k"},
}


def resolve_cluster_config(args) -> dict:
    file_cfg = load_config(args.config) if args.config else {}
    flags = {key: getattr(args, dest) for dest, key in _CLUSTER_FLAGS.items()
             if getattr(args, dest, None) is not None}
    unknown = sorted(set(file_cfg) - set(CLUSTER_DEFAULTS) - {"k"})
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    cfg = merge(CLUSTER_DEFAULTS, file_cfg, flags)
    for key in _BOOL_KEYS & cfg.keys():
        try:
            cfg[key] = as_bool(cfg[key])
        except ValueError as exc:
            raise UsageError(f"{key}: {exc}") from None
    if cfg["algorithm"] not in ("lsc", "kmeans"):
        raise UsageError(f"algorithm must be lsc or kmeans, got {cfg['algorithm']!r}")
    if cfg["silhouette"] not in ("euclidean", "combined"):
        raise UsageError("silhouette must be euclidean or combined")
    if cfg["algorithm"] == "kmeans":
        lsc_only = ["alpha", "dtw", "scale", "dtw_normalize", "radius", "min_size",
                    "smooth", "window", "order", "shrink_window", "init"]
        given = [f"--{d.replace('_', '-')}" for d in lsc_only if getattr(args, d) is not None]
        if given:
            raise UsageError(f"{', '.join(given)} only apply to --alg lsc")
    return cfg


def cmd_cluster(args) -> int:
    cfg = resolve_cluster_config(args)
    ds = load_dataset_arg(args.dataset, cfg["data.label_column"], cfg["data.delimiter"])
    if "k" not in cfg:
        if ds.truth is None:
            raise UsageError("--k is required for unlabeled data")
        cfg["k"] = int(np.unique(ds.truth).size)
    cfg["k"] = int(cfg["k"])
    lsc_cfg = _lsc_config(cfg)
    if cfg["algorithm"] == "lsc":
        model = lsc_fit(ds.matrix, lsc_cfg)
    else:
        model = kmeans_fit(ds.matrix, lsc_cfg.k, seed=lsc_cfg.seed, max_iter=lsc_cfg.max_iter,
                           tol=lsc_cfg.tol, standardize=lsc_cfg.standardize)

    data = standardize(ds.matrix) if lsc_cfg.standardize else ds.matrix
    distances = None
    if cfg["silhouette"] == "combined":
        X, _, _ = prepare_lines(ds.matrix, lsc_cfg)
        distances = combined_pairwise(X, lsc_cfg.metric)
    rep = evaluate(ds.truth, model.labels, data=data.values, distances=distances,
                   silhouette_distance=cfg["silhouette"])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    labels_path = atomic_write(out / "labels.csv", labels_text(model.labels))
    header = ",".join(f"f{j + 1}" for j in range(model.centers.shape[1]))
    centers = header + "\n" + "".join(
        ",".join(repr(float(v)) for v in row) + "\n" for row in model.centers)
    centers_path = atomic_write(out / "centers.csv", centers)
    shifts = [t.center_shift for t in model.trace]
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "cluster",
        "dataset": {"path": str(args.dataset), "name": ds.name,
                    "n_samples": ds.matrix.n_samples, "n_features": ds.matrix.n_features,
                    "has_truth": ds.truth is not None},
        "config": cfg,
        "metrics": {cfg["algorithm"]: rep.to_dict()},
        "timings": model.timings,
        "trace": {"iterations_run": model.iterations_run, "converged": model.converged,
                  "final_shift": shifts[-1] if shifts else None,
                  "label_changes": [t.label_changes for t in model.trace]},
        "info": model.info,
        "outputs": {"labels": str(labels_path), "centers": str(centers_path)},
    }
    report_path = _write_json(out / "report.json", report)
    print(f"{cfg['algorithm']}: k={lsc_cfg.k} iterations={model.iterations_run} "
          f"converged={model.converged}")
    for line in _metrics_lines(rep):
        print(line)
    print(f"wrote {labels_path}, {centers_path}, {report_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    pred = read_labels(args.labels)
    truth = None
    if args.truth:
        truth = read_labels(resolve_path(args.truth), _label_column(args.truth_column)
                            if args.truth_column else None)
        if truth.size != pred.size:
            raise DataError(f"{truth.size} truth labels vs {pred.size} predicted labels")
    data = None
    if args.data:
        ds = load_dataset_arg(args.data)
        if ds.matrix.n_samples != pred.size:
            raise DataError(f"{ds.matrix.n_samples} data rows vs {pred.size} labels")
        data = (ds.matrix if args.no_standardize else standardize(ds.matrix)).values
    if truth is None and data is None:
        raise UsageError("give --truth, --data or both")
    rep = evaluate(truth, pred, data=data)
    for line in _metrics_lines(rep):
        print(line)
    if args.out:
        doc = {"schema_version": SCHEMA_VERSION, "command": "evaluate",
               "labels": args.labels, "truth": args.truth, "data": args.data,
               "metrics": rep.to_dict()}
        _write_json(args.out, doc)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    try:
        overrides = load_config(args.config) if args.config else {}
        for item in args.set:
            if "=" not in item:
                raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            overrides[key.strip()] = parse_value(value)
        opts = SuiteOptions(
            seeds=args.seeds, seed_start=args.seed_start,
            noise=parse_list(args.noise) if args.noise else None,
            alphas=parse_list(args.alphas) if args.alphas else None,
            datasets=[s.strip() for s in args.datasets.split(",")] if args.datasets else None,
            smoothing=[as_bool(s) for s in args.smoothing.split(",")] if args.smoothing else None,
            ns=parse_list(args.ns, int) if args.ns else None,
            ds=parse_list(args.ds, int) if args.ds else None,
            n=args.n, d=args.d, k=args.k, include_kmeans=not args.no_kmeans, lsc=overrides,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if opts.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    out = Path(args.out or f"bench-{args.suite}")
    res = run_suite(args.suite, opts, out, workers=args.workers,
                    figures=not args.no_figures)
    for row in res.table:
        print(",".join(f"{k}={_short(v)}" for k, v in row.items()))
    print(f"wrote {res.files.get('report')}")
    if res.failures:
        for f in res.failures:
            print(f"FAILED {f['cell_id']}: {f['error']}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _short(v):
    return f"{v:.4f}" if isinstance(v, float) else v


def cmd_rerun(args) -> int:
    try:
        doc = json.loads(Path(args.cell).read_text())
        cell = Cell.from_json(doc)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read cell config {args.cell}: {exc}") from None
    res = run_cell(cell)
    if res.labels is None:
        print(f"FAILED {cell.cell_id}: {res.row['error']}", file=sys.stderr)
        return EXIT_RUNTIME
    atomic_write(args.out, labels_text(res.labels))
    print(f"{cell.cell_id}: ari={_short(res.row['ari'])} wrote {args.out}")
    return EXIT_OK


def cmd_plot(args) -> int:
    ds = load_dataset_arg(args.dataset, args.label_column)
    values = (standardize(ds.matrix) if args.standardize else ds.matrix).values
    labels = None
    if args.labels:
        labels = read_labels(args.labels)
        if labels.size != ds.matrix.n_samples:
            raise DataError(f"{labels.size} labels for {ds.matrix.n_samples} rows")
    try:
        path = write_line_space_svg(args.out, values, labels,
                                    title=args.title or f"{ds.name} in line space")
    except OSError as exc:
        raise DataError(f"cannot write {args.out}: {exc}") from None
    print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "cluster": cmd_cluster, "evaluate": cmd_evaluate,
            "benchmark": cmd_benchmark, "rerun": cmd_rerun, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"lsc {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"lsc {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        if os.environ.get("LSC_DEBUG"):
            raise
        print(f"lsc {args.command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
