"""End-to-end command-line checks: exit codes, reports, and artifacts."""

import csv
import json

import numpy as np
import pytest

import cagnn.gradcheck
from cagnn.cli import main
from cagnn.data import load_dataset, make_split, save_split, write_dataset
from cagnn.gradcheck import CheckResult
from cagnn.runner import resolve_self_loops, strip_wall_clock
from cagnn.synthetic import make_classification_graph


@pytest.fixture(scope="module")
def small_bundle(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "small"
    graph = make_classification_graph(120, 3, seed=0, name="small")
    write_dataset(graph, str(path))
    return str(path)


@pytest.fixture(scope="module")
def semi_bundle(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "semi"
    graph = make_classification_graph(1800, 3, seed=1, name="semi")
    write_dataset(graph, str(path))
    return str(path)


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------


def test_no_command_prints_help_and_fails():
    assert main([]) == 1


def test_usage_errors_exit_one():
    for argv in (
        ["train"],                                   # missing required flags
        ["train", "--model", "nonsense", "--dataset", "x", "--split", "semi",
         "--seed", "0", "--out", "r.json"],          # bad model choice
        ["grid-eps"],                                # missing everything
        ["frobnicate"],                              # unknown command
    ):
        with pytest.raises(SystemExit) as excinfo:
            main(argv)
        assert excinfo.value.code == 1


def test_missing_dataset_exits_two(tmp_path):
    code = main([
        "train", "--model", "gcn", "--dataset", str(tmp_path / "absent"),
        "--split", "supervised", "--seed", "0", "--epochs", "1",
        "--out", str(tmp_path / "r.json"),
    ])
    assert code == 2


def test_grid_eps_on_non_augss_model_exits_one(small_bundle, tmp_path):
    code = main([
        "grid-eps", "--dataset", small_bundle, "--model", "gcn",
        "--min", "0.1", "--max", "0.2", "--step", "0.1",
        "--seed", "0", "--out", str(tmp_path / "g.json"),
    ])
    assert code == 1


def test_gradient_check_failure_exits_three(monkeypatch, capsys):
    failing = [CheckResult(name="layer-gcn[seed 0]", max_error=1.0, tolerance=1e-4)]
    monkeypatch.setattr(cagnn.gradcheck, "run_suite", lambda module, seeds: failing)
    assert main(["gradcheck", "--seeds", "1"]) == 3
    out = capsys.readouterr()
    assert "FAIL" in out.out
    assert "0/1 checks passed" in out.out


def test_resolve_self_loops_defaults():
    assert resolve_self_loops(None, "supervised") is True
    assert resolve_self_loops(None, "semi") is False
    assert resolve_self_loops(True, "semi") is True
    assert resolve_self_loops(False, "supervised") is False


# ---------------------------------------------------------------------------
# happy paths
# ---------------------------------------------------------------------------


def test_dataset_info_prints_statistics(small_bundle, capsys):
    assert main(["dataset-info", small_bundle]) == 0
    out = capsys.readouterr().out
    assert "nodes" in out and "120" in out
    assert "classes" in out and "attributes" in out


def test_gradcheck_command_passes(capsys):
    assert main(["gradcheck", "--module", "layers", "--seeds", "2"]) == 0
    out = capsys.readouterr().out
    assert "ok" in out and "FAIL" not in out
    assert "checks passed" in out


def test_train_writes_report_and_model(small_bundle, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    model_path = tmp_path / "model.bin"
    code = main([
        "train", "--model", "gcn", "--dataset", small_bundle,
        "--split", "supervised", "--seed", "0", "--epochs", "2",
        "--out", str(report_path), "--save-model", str(model_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "accuracy" in out and "report written" in out
    report = json.loads(report_path.read_text())
    assert report["config"]["model"] == "gcn"
    assert report["config"]["self_loops"] is True  # supervised default
    assert len(report["runs"]) == 1
    assert 0.0 <= report["aggregate"]["accuracy"]["mean"] <= 100.0
    assert model_path.exists()


def test_reports_are_identical_apart_from_wall_clock(small_bundle, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        assert main([
            "train", "--model", "mlp", "--dataset", small_bundle,
            "--split", "supervised", "--seed", "3", "--runs", "2",
            "--epochs", "2", "--out", str(path),
        ]) == 0
    a, b = (json.loads(p.read_text()) for p in paths)
    assert a != b  # timings differ
    assert strip_wall_clock(a) == strip_wall_clock(b)


def test_roc_command_emits_parseable_curves(small_bundle, tmp_path, capsys):
    model_path = tmp_path / "model.bin"
    assert main([
        "train", "--model", "gcn", "--dataset", small_bundle,
        "--split", "supervised", "--seed", "0", "--epochs", "2",
        "--out", str(tmp_path / "r.json"), "--save-model", str(model_path),
    ]) == 0
    graph = load_dataset(small_bundle)
    split_path = tmp_path / "split.json"
    save_split(make_split(graph, "supervised", seed=0), str(split_path))
    csv_path = tmp_path / "roc.csv"
    assert main([
        "roc", "--model-file", str(model_path), "--dataset", small_bundle,
        "--split-file", str(split_path), "--out", str(csv_path),
    ]) == 0
    assert "wrote ROC curves for 3 class(es)" in capsys.readouterr().out
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert {row["class"] for row in rows} == {"0", "1", "2"}
    for row in rows:
        assert 0.0 <= float(row["fpr"]) <= 1.0
        assert 0.0 <= float(row["tpr"]) <= 1.0


def test_grid_eps_sweeps_and_reports_the_best_threshold(semi_bundle, tmp_path, capsys):
    out_path = tmp_path / "grid.json"
    code = main([
        "grid-eps", "--dataset", semi_bundle, "--model", "augss-gcn",
        "--min", "0.4", "--max", "0.5", "--step", "0.1",
        "--seed", "0", "--epochs", "2", "--out", str(out_path),
    ])
    assert code == 0
    assert "best epsilon" in capsys.readouterr().out
    report = json.loads(out_path.read_text())
    grid = report["grid"]
    assert [entry["epsilon"] for entry in grid] == [0.4, 0.5]
    assert all("best_val_accuracy" in entry for entry in grid if "error" not in entry)
    best = report["best"]
    assert best["best_val_accuracy"] == max(
        e["best_val_accuracy"] for e in grid if "error" not in e
    )


def test_train_semi_model_end_to_end(semi_bundle, tmp_path):
    report_path = tmp_path / "semi.json"
    code = main([
        "train", "--model", "augss-gcn", "--dataset", semi_bundle,
        "--split", "semi", "--seed", "0", "--epochs", "2",
        "--epsilon", "0.5", "--out", str(report_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["config"]["self_loops"] is False  # semi default
    (run,) = report["runs"]
    assert "best_epoch" in run
    assert 0.0 <= run["accuracy"] <= 100.0
