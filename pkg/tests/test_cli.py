"""
Tests of the command line interface.
"""
import json

import pytest

from message_estimator.cli import create_parser, main
from message_estimator.dataset import SyntheticConfig, generate_synthetic, write_csv
from message_estimator.exceptions import NumericalError
from message_estimator.selectors import LassoGicSelector
from tests.conftest import make_dataset

FAST = ["--set", "selector.lasso.path_length=20"]
TWO_METHODS = ["--set", 'methods=["message", "full_data"]']


@pytest.fixture
def csv_path(tmp_path):
    d, _ = generate_synthetic(SyntheticConfig(n=400, p=10, s=2, seed=3))
    path = tmp_path / "data.csv"
    write_csv(d, path)
    return str(path)


def _simulate(out):
    return main(
        [
            "-q",
            "simulate",
            "--reps",
            "2",
            "--seed",
            "7",
            "--out",
            str(out),
            "--set",
            "n_values=[200, 400]",
            "--set",
            "p=10",
            "--set",
            "subset_size=100",
            "--set",
            "diagnose=false",
        ]
        + FAST
        + TWO_METHODS
    )


def test_fit(csv_path, tmp_path):
    out = tmp_path / "fit"
    assert main(["fit", "--data", csv_path, "--m", "2", "--out", str(out)] + FAST) == 0
    with open(out / "result.json", encoding="utf-8") as f:
        result = json.load(f)
    assert result["method"] == "message"
    assert result["m"] == 2
    assert len(result["beta"]) == 10
    assert result["selected_features"] == [f"x{j}" for j in result["gamma"]]
    assert "Method: message" in (out / "summary.txt").read_text(encoding="utf-8")


def test_fit_standardized(csv_path, tmp_path):
    out = tmp_path / "fit"
    args = ["fit", "--data", csv_path, "--method", "full_data", "--standardize", "--out", str(out)]
    assert main(args + FAST) == 0
    with open(out / "result.json", encoding="utf-8") as f:
        result = json.load(f)
    assert len(result["beta_raw"]) == 10
    assert "intercept_raw" in result


def test_exit_codes(csv_path, tmp_path):
    out = str(tmp_path / "out")
    assert main(["fit", "--data", csv_path, "--method", "ridge", "--out", out]) == 2
    assert main(["fit", "--data", str(tmp_path / "missing.csv"), "--out", out]) == 3
    rank_deficient = [
        "--set",
        "selector.kind=fixed_support",
        "--set",
        "selector.support=[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]",
    ]
    assert main(["fit", "--data", csv_path, "--m", "100", "--out", out] + rank_deficient) == 4


def test_simulate_and_report(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert _simulate(first) == 0
    assert _simulate(second) == 0
    text = (first / "report.json").read_text(encoding="utf-8")
    assert text == (second / "report.json").read_text(encoding="utf-8")

    report = json.loads(text)
    assert set(report["scores"]) == {"message", "full_data"}
    assert len(report["scores"]["message"]) == 4
    assert report["config"]["simulation"]["base_seed"] == 7
    assert (first / "timing.json").exists()

    (first / "report.csv").unlink()
    assert main(["report", "--out", str(first)]) == 0
    assert (first / "report.csv").exists()


def test_simulate_plots(tmp_path):
    pytest.importorskip("matplotlib")
    assert _simulate(tmp_path) == 0
    for name in ("coef_mse.svg", "recovery.svg", "wall_time.svg"):
        assert (tmp_path / name).exists()


def test_bench(csv_path, tmp_path):
    out = tmp_path / "bench"
    args = ["bench", "--data", csv_path, "--m", "2", "4", "--out", str(out)]
    assert main(args + FAST + TWO_METHODS) == 0
    with open(out / "bench.json", encoding="utf-8") as f:
        bench = json.load(f)
    assert [(run["method"], run["m"]) for run in bench["runs"]] == [
        ("message", 2),
        ("message", 4),
        ("full_data", 1),
    ]
    assert (out / "bench.csv").exists()


def test_diagnose(csv_path, tmp_path):
    out = tmp_path / "diag"
    args = ["diagnose", "--data", csv_path, "--support", "x0", "x1", "--m", "2", "--out", str(out)]
    assert main(args) == 0
    with open(out / "diagnostics.json", encoding="utf-8") as f:
        diagnostics = json.load(f)
    assert diagnostics["support"] == ["x0", "x1"]
    assert diagnostics["full"]["gram_normalization"] == "n"
    assert [sub["subset_id"] for sub in diagnostics["subsets"]] == [0, 1]


def test_diagnose_selected_support(csv_path, tmp_path):
    out = tmp_path / "diag"
    assert main(["diagnose", "--data", csv_path, "--out", str(out)] + FAST) == 0
    with open(out / "diagnostics.json", encoding="utf-8") as f:
        diagnostics = json.load(f)
    assert diagnostics["support"]
    assert diagnostics["subsets"] == []


def test_diagnose_selection_failure(csv_path, tmp_path, monkeypatch):
    def fail(self, d):
        raise NumericalError("no candidate")

    monkeypatch.setattr(LassoGicSelector, "select", fail)
    out = tmp_path / "diag"
    assert main(["diagnose", "--data", csv_path, "--out", str(out)]) == 0
    with open(out / "diagnostics.json", encoding="utf-8") as f:
        diagnostics = json.load(f)
    assert diagnostics["support"] == []
    assert diagnostics["full"] is None


def test_diagnose_unknown_column(csv_path, tmp_path):
    args = ["diagnose", "--data", csv_path, "--support", "nope", "--out", str(tmp_path)]
    assert main(args) == 2


def test_list_methods(capsys):
    assert main(["--list-methods"]) == 0
    output = capsys.readouterr().out
    for name in ("message", "full_data", "averaging", "geometric_median", "bolasso"):
        assert f"* {name} " in output


def test_no_command():
    assert main([]) == 2


def test_parser():
    args = create_parser().parse_args(["simulate", "--case", "3", "--scale", "paper"])
    assert args.case == 3 and args.scale == "paper"
    with pytest.raises(SystemExit):
        create_parser().parse_args(["simulate", "--case", "4"])


def test_fit_missing_response(csv_path, tmp_path):
    assert main(["fit", "--data", csv_path, "--response", "target", "--out", str(tmp_path)]) == 3


def test_fit_single_subset_is_full_data(csv_path, tmp_path):
    betas = []
    for method, extra in (("message", ["--m", "1"]), ("full_data", [])):
        out = tmp_path / method
        assert main(["fit", "--data", csv_path, "--method", method, "--out", str(out)] + extra) == 0
        with open(out / "result.json", encoding="utf-8") as f:
            betas.append(json.load(f)["beta"])
    assert betas[0] == pytest.approx(betas[1], abs=1e-12)


def test_simulate_invalid_reps(tmp_path):
    assert main(["simulate", "--reps", "0", "--out", str(tmp_path)]) == 2


def test_diagnose_rank_deficient_support(tmp_path, rng):
    x = rng.standard_normal((60, 4))
    x[:, 1] = x[:, 0]
    path = tmp_path / "dup.csv"
    write_csv(make_dataset(x, x[:, 0] + rng.standard_normal(60)), path)
    out = tmp_path / "diag"
    assert main(["diagnose", "--data", str(path), "--support", "x0", "x1", "--out", str(out)]) == 0
    with open(out / "diagnostics.json", encoding="utf-8") as f:
        diagnostics = json.load(f)
    assert diagnostics["full"]["irrepresentable_stat"] is None
    assert diagnostics["full"]["warnings"]
