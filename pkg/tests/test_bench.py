import json

import numpy as np
import pytest

from lsc.bench import (
    Cell,
    SuiteOptions,
    aggregate,
    build_cells,
    linear_fit,
    parse_list,
    read_rows,
    resolve_workers,
    run_cell,
    run_suite,
)


def test_parse_list():
    assert parse_list("1,2,3") == [1.0, 2.0, 3.0]
    assert parse_list("0.1:0.9:0.1") == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    assert parse_list("250,500", int) == [250, 500]


def test_cell_grid_shapes():
    noise = build_cells("noise-sweep", SuiteOptions(seeds=3))
    assert len(noise) == 5 * 3 * 2
    alpha = build_cells("alpha-sweep", SuiteOptions(seeds=2))
    assert len(alpha) == 3 * 9 * 2
    real = build_cells("realworld", SuiteOptions(seeds=1))
    assert len(real) == 2 * (2 * 2 + 1)
    assert len({c.cell_id for c in real}) == len(real)
    with pytest.raises(ValueError):
        build_cells("nonsense", SuiteOptions())


def test_suite_lsc_defaults():
    cell = build_cells("noise-sweep", SuiteOptions(seeds=1, noise=[1.0]))[0]
    assert cell.config["init"] == "kmeans++"
    assert cell.config["metric.alpha"] == 0.5
    assert cell.config["metric.dtw_mode"] == "auto"
    override = build_cells("noise-sweep", SuiteOptions(seeds=1, noise=[1.0],
                                                       lsc={"init": "random"}))[0]
    assert override.config["init"] == "random"


def test_cell_json_round_trip():
    cell = build_cells("realworld", SuiteOptions(seeds=1))[0]
    assert Cell.from_json(json.loads(json.dumps(cell.to_json()))) == cell


def test_failed_cell_is_recorded():
    bad = Cell("noise-sweep", "lsc", {"kind": "bundled", "name": "iris"},
               {"k": 500, "seed": 0}, {"noise": 1.0}, 0)
    res = run_cell(bad)
    assert res.labels is None
    assert res.row["status"] == "failed" and "k=500" in res.row["error"]


def test_workers_capped_by_env(monkeypatch):
    monkeypatch.setenv("LSC_THREADS", "2")
    assert resolve_workers(8) == 2
    monkeypatch.delenv("LSC_THREADS")
    assert resolve_workers(3) == 3


def test_linear_fit():
    slope, icpt, r2 = linear_fit([1, 2, 3], [3, 5, 7])
    assert (slope, icpt) == pytest.approx((2.0, 1.0)) and r2 == pytest.approx(1.0)


@pytest.fixture(scope="module")
def small_suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    opts = SuiteOptions(seeds=2, noise=[1.0, 3.0], n=60, d=12, k=3)
    return run_suite("noise-sweep", opts, out, workers=2), out


def test_suite_outputs(small_suite):
    res, out = small_suite
    for name in ("runs.csv", "aggregate.csv", "table.csv", "report.json",
                 "noise_sweep_ari.svg"):
        assert (out / name).exists()
    report = json.loads((out / "report.json").read_text())
    assert report["schema_version"] == 1 and report["failures"] == []
    assert [(a["noise"], a["algorithm"]) for a in res.aggregate] == [
        (1.0, "lsc"), (1.0, "kmeans"), (3.0, "lsc"), (3.0, "kmeans")]
    assert all(a["n_runs"] == 2 for a in res.aggregate)
    assert len(list((out / "cells").glob("*.labels.csv"))) == 8


def test_aggregate_recomputable_from_csv(small_suite):
    res, out = small_suite
    rows = read_rows(out / "runs.csv")
    for row in rows:
        row["noise"] = float(row["noise"])
    again = aggregate(rows)
    assert len(again) == len(res.aggregate)
    for a, b in zip(again, res.aggregate):
        for key in ("ari_mean", "ari_std", "ari_best", "silhouette_mean", "n_runs"):
            assert a[key] == pytest.approx(b[key], abs=1e-12)


def test_cells_replay_identically(small_suite):
    _, out = small_suite
    for cfg in sorted((out / "cells").glob("*.json")):
        cell = Cell.from_json(json.loads(cfg.read_text()))
        labels = run_cell(cell).labels
        saved = np.loadtxt(cfg.with_name(cell.cell_id + ".labels.csv"), skiprows=1, dtype=int)
        np.testing.assert_array_equal(labels, saved)
