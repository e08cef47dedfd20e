"""Tests for the iclab command line."""
import json
import os.path as osp

import matplotlib
matplotlib.use("Agg")

import numpy as np
import pytest
import yaml

from iclab import error, make_benchmark_config
from iclab.reporting import OUTPUT_ENV_VAR, read_csv
from iclab.scripts import run_sweep
from iclab.scripts.cli import CHECK_FAILED, SUCCESS, USAGE_ERROR, main
from iclab.training.metrics import EpochRecord, write_metrics_csv
from iclab.training.trainer import TrainResult


@pytest.fixture(autouse=True)
def no_output_override(monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV_VAR, raising=False)


def read_report(out, command):
    with open(osp.join(out, command, "report.json")) as fin:
        return json.load(fin)


def test_verify_theorem1(tmp_path):
    out = str(tmp_path)
    code = main(["verify-theorem1", "--p", "0.95", "--trials", "100",
                 "--output-dir", out])
    assert code == SUCCESS
    report = read_report(out, "verify-theorem1")
    assert len(report["records"]) == 100
    assert all(r["pass"] for r in report["records"])
    assert len(read_csv(osp.join(out, "verify-theorem1", "theorem1.csv"))) \
        == 100


def test_verify_theorem1_p_lists(tmp_path):
    out = str(tmp_path)
    code = main(["verify-theorem1", "--p", "0.25,0.5", "--p", "0.75",
                 "--trials", "3", "--output-dir", out])
    assert code == SUCCESS
    records = read_report(out, "verify-theorem1")["records"]
    assert sorted({r["p_keep"] for r in records}) == [0.25, 0.5, 0.75]


def test_verify_theorem1_invalid_trials(tmp_path):
    assert main(["verify-theorem1", "--trials", "0",
                 "--output-dir", str(tmp_path)]) == USAGE_ERROR


def test_verify_correlation(tmp_path):
    out = str(tmp_path)
    assert main(["verify-correlation", "--sigma", "4",
                 "--output-dir", out]) == SUCCESS
    records = read_report(out, "verify-correlation")["records"]
    assert [(r["p_keep"], r["c"]) for r in records] == \
        [(p, c) for p in [0.5, 0.95] for c in [0.0, 0.3, 0.8]]
    assert all(r["n_samples"] == 10**6 for r in records)


def test_verify_correlation_options(tmp_path):
    out = str(tmp_path)
    code = main(["verify-correlation", "--p", "0.75", "--c", "0.2", "0.6",
                 "--samples", "100000", "--sigma", "4", "--output-dir", out])
    assert code == SUCCESS
    records = read_report(out, "verify-correlation")["records"]
    assert [r["c"] for r in records] == [0.2, 0.6]


def test_verify_correlation_too_few_samples(tmp_path):
    assert main(["verify-correlation", "--samples", "1000",
                 "--output-dir", str(tmp_path)]) == USAGE_ERROR


def test_whiten_race(tmp_path):
    out = str(tmp_path)
    assert main(["whiten-race", "--output-dir", out]) == SUCCESS
    report = read_report(out, "whiten-race")
    assert report["iteration_ratio"] >= 10
    history = read_csv(osp.join(out, "whiten-race", "loss_history.csv"))
    assert history[0]["iteration"] == "0"


def test_whiten_race_divergence(tmp_path):
    assert main(["whiten-race", "--lr-scale", "3.0",
                 "--output-dir", str(tmp_path)]) == CHECK_FAILED


def test_arch_dump(tmp_path):
    out = str(tmp_path)
    assert main(["arch-dump", "arch-n2-v1", "--output-dir", out]) == SUCCESS
    report = read_report(out, "arch-dump")
    assert report["weighted_layer_count"] == 14


def test_diagnose_zigzag(tmp_path):
    out = str(tmp_path)
    assert main(["diagnose-zigzag", "synthetic-v1",
                 "--output-dir", out]) == SUCCESS
    report = read_report(out, "diagnose-zigzag")
    relu, ic = report["feeds"]
    assert relu["min_coherence"] == 1.0
    assert ic["mean_coherence"] < 0.5


def test_train_config_file(tmp_path):
    config = {"seed": 0, "layout": "v2", "n": 1, "epochs": 1,
              "data_format": "synthetic", "num_classes": 3, "image_size": 8,
              "synthetic_train_per_class": 6, "synthetic_test_per_class": 2,
              "batch_size": 6}
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(config))
    out = str(tmp_path / "out")
    assert main(["train", str(path), "--output-dir", out]) == SUCCESS
    assert osp.isfile(osp.join(out, "tiny", "metrics.csv"))


def test_train_missing_config(tmp_path):
    assert main(["train", str(tmp_path / "missing.yaml")]) == USAGE_ERROR


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["whiten-race", "--bogus"],
    ["verify-theorem1", "--p", "high"],
    ["sweep", "synthetic-v1", "-l", "v9"],
])
def test_usage_errors(argv):
    assert main(argv) == USAGE_ERROR


def test_describe(tmp_path):
    out = str(tmp_path)
    assert main(["describe", "--output-dir", out]) == SUCCESS
    table = read_report(out, "describe")["benchmarks"]
    rows = {row["Name"]: row for row in table}
    arch = rows["arch-n2-v1"]
    assert arch["Params"] == arch["Baseline params"]
    assert arch["Needs data"] == "no"
    assert rows["cifar10-desk"]["Needs data"] == "yes"


def write_run(run_dir, accs):
    run_dir.mkdir()
    records = [EpochRecord(e, 1.0, 0.5, 1.0, acc)
               for e, acc in enumerate(accs)]
    write_metrics_csv(records, str(run_dir / "metrics.csv"))
    return str(run_dir)


def test_plot(tmp_path):
    runs = [write_run(tmp_path / "a", [0.2, 0.4, 0.5]),
            write_run(tmp_path / "b", [0.3, 0.3, 0.6])]
    figure = str(tmp_path / "fig.png")
    code = main(["plot", *runs, "-l", "a", "b", "-o", figure,
                 "--output-dir", str(tmp_path)])
    assert code == SUCCESS
    assert osp.isfile(figure)


def test_plot_label_mismatch(tmp_path):
    run = write_run(tmp_path / "a", [0.2, 0.4])
    assert main(["plot", run, "-l", "a", "b"]) == USAGE_ERROR


def fake_train(config, output_dir=None, verbose=None):
    if "-v2-" in config.name:
        raise error.TrainingDivergedError("non-finite loss at epoch 0",
                                          {"epoch": 0})
    records = [EpochRecord(e, 1.0, 0.5, 1.0, acc)
               for e, acc in enumerate([0.4, 0.5, 0.6, 0.6, 0.6, 0.6])]
    return TrainResult(records, network=None)


def test_sweep_keeps_results_when_a_run_diverges(tmp_path, monkeypatch):
    monkeypatch.setattr(run_sweep, "train", fake_train)
    config = make_benchmark_config("synthetic-v1").to_dict()
    out = str(tmp_path)
    results, comparison = run_sweep.run_sweep(config, "synthetic-v1", out,
                                              num_seeds=2,
                                              layouts=["v2", "baseline"])
    assert [r["Diverged"] for r in results] == [True, True, False, False]
    assert all(np.isnan(r["Final test acc"]) for r in results[:2])
    assert comparison is None
    rows = read_csv(osp.join(out, "runs.csv"))
    assert [r["Diverged"] for r in rows] == ["True", "True", "False", "False"]
    summary = run_sweep.collate_results(results)
    assert summary["v2"].num_diverged == 2
    assert np.isnan(summary["v2"].summarize()[0])
    assert summary["baseline"].summarize()[0] == pytest.approx(0.6)
    assert osp.isfile(osp.join(out, "summary.csv"))


def test_sweep_divergence_fails_check(tmp_path, monkeypatch):
    monkeypatch.setattr(run_sweep, "train", fake_train)
    out = str(tmp_path)
    code = main(["sweep", "synthetic-v1", "-s", "2",
                 "-l", "baseline", "v1", "v2", "--output-dir", out])
    assert code == CHECK_FAILED
    report = read_report(out, "sweep")
    assert len(report["runs"]) == 6
    assert report["comparison"]["seeds"] == 2
    diverged = [r for r in report["runs"] if r["Diverged"]]
    assert {r["Layout"] for r in diverged} == {"v2"}
    assert diverged[0]["Final test acc"] is None
