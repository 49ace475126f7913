"""
Tests of the SVG charts.
"""
import pandas as pd
import pytest

from message_estimator.dataset import SyntheticConfig
from message_estimator.metrics import monte_carlo
from message_estimator.pipeline import MethodConfig, MethodName
from message_estimator.plotting import FILES, report_metrics, write_plots, write_tradeoff_plot
from message_estimator.selectors import SelectorConfig
from message_estimator.solvers import LassoConfig

pytest.importorskip("matplotlib")

FAST = SelectorConfig(lasso=LassoConfig(path_length=20))


@pytest.fixture(scope="module")
def report():
    grid = [SyntheticConfig(n=200, p=8, s=2), SyntheticConfig(n=400, p=8, s=2)]
    methods = [
        MethodConfig(MethodName.MESSAGE, FAST, m=2),
        MethodConfig(MethodName.AVERAGING, FAST, m=2),
    ]
    return monte_carlo(grid, methods, reps=2, n_test=50)


def test_report_metrics(report):
    assert report_metrics(report) == ["coef_mse", "exact_recovery", "wall_time", "pred_mse"]


def test_write_plots(report, tmp_path):
    written = write_plots(report, tmp_path)
    assert [path.name for path in written] == [
        FILES[metric] for metric in report_metrics(report)
    ]
    svg = (tmp_path / "coef_mse.svg").read_text(encoding="utf-8")
    assert svg.lstrip().startswith("<?xml")


def test_plots_are_reproducible(report, tmp_path):
    write_plots(report, tmp_path / "a")
    write_plots(report, tmp_path / "b")
    first = (tmp_path / "a" / "recovery.svg").read_bytes()
    assert first == (tmp_path / "b" / "recovery.svg").read_bytes()


def test_tradeoff_plot(tmp_path):
    frame = pd.DataFrame(
        {
            "method": ["message", "message", "full_data"],
            "m": [5, 10, 1],
            "accuracy": [0.81, 0.8, 0.82],
            "wall_time": [0.2, 0.1, 0.9],
        }
    )
    path = write_tradeoff_plot(frame, tmp_path / "tradeoff.svg")
    assert path is not None and path.exists()
