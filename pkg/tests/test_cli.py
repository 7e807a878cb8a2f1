import json
import re
import subprocess
import sys

import numpy as np
import pytest

from lsc.cli import EXIT_DATA, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from lsc.data import load_iris, read_labels
from lsc.evaluation import adjusted_rand_index


@pytest.fixture
def run(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)

    def _run(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out, out.err

    return _run


def test_generate(run, tmp_path):
    args = ["generate", "--n", 500, "--d", 32, "--k", 5, "--noise", 1.0, "--seed", 42]
    assert run(*args, "-o", "ds.csv")[0] == EXIT_OK
    assert run(*args, "-o", "again.csv")[0] == EXIT_OK
    text = (tmp_path / "ds.csv").read_text()
    assert len(text.splitlines()) == 501
    assert text == (tmp_path / "again.csv").read_text()
    meta = json.loads((tmp_path / "ds.meta.json").read_text())
    assert meta["spec"]["seed"] == 42


def test_generate_noise_free_kmeans(run, tmp_path):
    run("generate", "--n", 60, "--d", 4, "--k", 3, "--noise", 0, "--base-std", 1e-9, "-o", "z.csv")
    assert run("cluster", "--alg", "kmeans", "z.csv", "-o", "km")[0] == EXIT_OK
    report = json.loads((tmp_path / "km" / "report.json").read_text())
    assert report["metrics"]["kmeans"]["ari"] == 1.0


def test_cluster_iris(run, tmp_path):
    code, out, _ = run("cluster", "--alg", "lsc", "--k", 3, "--alpha", 0.5, "--smooth", "on",
                       "iris", "-o", "res")
    assert code == EXIT_OK
    assert len((tmp_path / "res" / "labels.csv").read_text().splitlines()) == 151
    report = json.loads((tmp_path / "res" / "report.json").read_text())
    assert report["schema_version"] == 1
    assert report["config"]["metric.alpha"] == 0.5
    assert {"standardize", "smooth", "distance", "total"} <= report["timings"].keys()
    assert len((tmp_path / "res" / "centers.csv").read_text().splitlines()) == 4
    assert re.search(r"^ari\t", out, re.M)


def test_rerun_from_report(run, tmp_path):
    run("cluster", "--alg", "lsc", "--alpha", 0.25, "--seed", 3, "--init", "kmeans++",
        "wine", "-o", "a")
    run("cluster", "--config", tmp_path / "a" / "report.json", "wine", "-o", "b")
    assert (tmp_path / "a" / "labels.csv").read_bytes() == (tmp_path / "b" / "labels.csv").read_bytes()
    ra = json.loads((tmp_path / "a" / "report.json").read_text())
    rb = json.loads((tmp_path / "b" / "report.json").read_text())
    assert ra["metrics"] == rb["metrics"] and ra["config"] == rb["config"]


def test_config_file_then_flags(run, tmp_path):
    (tmp_path / "exp.cfg").write_text("metric.alpha = 0.9\nseed = 4\nsmoothing.enabled = off\n")
    run("cluster", "--config", "exp.cfg", "--alpha", 0.1, "iris", "-o", "c")
    cfg = json.loads((tmp_path / "c" / "report.json").read_text())["config"]
    assert cfg["metric.alpha"] == 0.1 and cfg["seed"] == 4 and cfg["smoothing.enabled"] is False


def test_alpha_zero_versus_kmeans(run, tmp_path):
    run("cluster", "--alg", "lsc", "--alpha", 0, "--smooth", "off", "iris", "-o", "l")
    run("cluster", "--alg", "kmeans", "iris", "-o", "k")
    rl = json.loads((tmp_path / "l" / "report.json").read_text())
    rk = json.loads((tmp_path / "k" / "report.json").read_text())
    assert "ari" in rl["metrics"]["lsc"] and "ari" in rk["metrics"]["kmeans"]
    assert (tmp_path / "l" / "centers.csv").read_text() != (tmp_path / "k" / "centers.csv").read_text()


def test_usage_and_data_errors(run, tmp_path):
    assert run("cluster", "--alg", "kmeans", "--alpha", 0.3, "iris")[0] == EXIT_USAGE
    assert run("cluster", "--k", 999, "iris")[0] == EXIT_DATA
    assert run("cluster", "missing.csv")[0] == EXIT_DATA
    assert run("cluster", "--smooth", "maybe", "iris")[0] == EXIT_USAGE
    assert run("nonsense")[0] == EXIT_USAGE
    (tmp_path / "bad.cfg").write_text("metric.alfa = 0.3\n")
    assert run("cluster", "--config", "bad.cfg", "iris")[0] == EXIT_USAGE


def test_evaluate(run, tmp_path):
    run("cluster", "iris", "-o", "r")
    code, out, _ = run("evaluate", "r/labels.csv", "--truth", "iris", "--data", "iris",
                       "-o", "m.json")
    assert code == EXIT_OK
    pred = read_labels(tmp_path / "r" / "labels.csv")
    ari = adjusted_rand_index(load_iris().truth, pred)
    assert json.loads((tmp_path / "m.json").read_text())["metrics"]["ari"] == ari
    report = json.loads((tmp_path / "r" / "report.json").read_text())
    assert report["metrics"]["lsc"]["ari"] == ari


def test_evaluate_identity_and_internal_only(run, tmp_path):
    (tmp_path / "t.csv").write_text("label\n0\n0\n1\n1\n")
    code, out, _ = run("evaluate", "t.csv", "--truth", "t.csv")
    assert code == EXIT_OK and "ari\t1.000000" in out
    (tmp_path / "d.csv").write_text("x\n0\n0.1\n10\n10.1\n")
    code, out, _ = run("evaluate", "t.csv", "--data", "d.csv", "--no-standardize")
    assert code == EXIT_OK and out.startswith("silhouette") and "ari" not in out
    (tmp_path / "short.csv").write_text("label\n0\n1\n")
    assert run("evaluate", "t.csv", "--truth", "short.csv")[0] == EXIT_DATA


def test_plot(run, tmp_path):
    (tmp_path / "toy.csv").write_text("\n".join(",".join(str(i * j) for j in range(6))
                                                for i in range(5)) + "\n")
    (tmp_path / "lab.csv").write_text("label\n0\n1\n2\n0\n1\n")
    assert run("plot", "toy.csv", "--labels", "lab.csv", "-o", "a.svg")[0] == EXIT_OK
    run("plot", "toy.csv", "--labels", "lab.csv", "-o", "b.svg")
    svg = (tmp_path / "a.svg").read_text()
    assert svg.count("<polyline") == 5
    assert len(set(re.findall(r'<polyline [^>]*stroke="([^"]+)"', svg))) == 3
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_benchmark_and_rerun(run, tmp_path):
    code, out, _ = run("benchmark", "alpha-sweep", "--alphas", "0.1:0.9:0.1", "--datasets", "iris",
                       "--seeds", 1, "-o", "as")
    assert code == EXIT_OK
    table = (tmp_path / "as" / "table.csv").read_text().splitlines()
    assert len(table) == 1 + 9
    cell = sorted((tmp_path / "as" / "cells").glob("*.json"))[0]
    assert run("rerun", cell, "-o", "re.csv")[0] == EXIT_OK
    assert (tmp_path / "re.csv").read_bytes() == cell.with_name(
        cell.name.replace(".json", ".labels.csv")).read_bytes()


def test_benchmark_failure_exit_code(run):
    code, _, err = run("benchmark", "realworld", "--datasets", "iris", "--seeds", 1,
                       "--set", "max_iter=0", "--no-figures", "-o", "bad")
    assert code == EXIT_RUNTIME and "FAILED" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lsc", "--version"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("lsc ")
