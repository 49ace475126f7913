# message-estimator - Median selection subset aggregation for distributed sparse regression.
# Copyright (C) 2026 The message-estimator developers

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.

# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

"""
SVG line charts of a benchmark report: one metric against n, one series per method.

matplotlib is optional (``plots`` extra).
"""
import logging
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from message_estimator.metrics import BenchmarkReport
from message_estimator.utils import need_modules

logger = logging.getLogger(__name__)

try:
    import matplotlib
    from matplotlib.figure import Figure
except ImportError:
    pass

#: Axis labels of the plotted metrics.
LABELS = {
    "coef_mse": "Coefficient MSE",
    "exact_recovery": "Exact recovery rate",
    "wall_time": "Wall time (s)",
    "accuracy": "Test accuracy",
    "pred_mse": "Test prediction MSE",
    "support_size": "Selected model size",
}

#: File name of each plotted metric.
FILES = {
    "coef_mse": "coef_mse.svg",
    "exact_recovery": "recovery.svg",
    "wall_time": "wall_time.svg",
    "accuracy": "accuracy.svg",
    "pred_mse": "pred_mse.svg",
    "support_size": "support_size.svg",
}


@need_modules("matplotlib")
class SvgPlotter:
    """
    Draw the summary of a report as SVG files.
    """

    report: BenchmarkReport  #: Report to draw.

    def __init__(self, report: BenchmarkReport) -> None:
        """
        Args:
            report (BenchmarkReport): report to draw.
        """
        self.report = report

    def plot(self, metric: str, path: Union[str, Path]) -> None:
        """
        Draw the mean of a metric against n, with standard error bars.

        Args:
            metric (str): metric name, one of LABELS.
            path (Union[str, Path]): output SVG file.
        """
        summary = self.report.summary(include_timing=metric == "wall_time")
        fig = Figure(figsize=(6, 4))
        ax = fig.add_subplot(1, 1, 1)
        for method, rows in summary.groupby("method", sort=False):
            rows = rows.sort_values("n")
            ax.errorbar(
                rows["n"],
                rows[f"{metric}_mean"],
                yerr=rows[f"{metric}_se"].fillna(0.0),
                marker="o",
                capsize=3,
                label=method,
            )
        ax.set_xlabel("n")
        ax.set_ylabel(LABELS[metric])
        if metric == "wall_time":
            ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        with matplotlib.rc_context({"svg.hashsalt": "message-estimator"}):
            fig.savefig(path, format="svg", metadata={"Date": None})
        logger.debug("Wrote %s.", path)

    def plot_all(self, directory: Union[str, Path], metrics: List[str]) -> List[Path]:
        """
        Draw several metrics.

        Args:
            directory (Union[str, Path]): output directory.
            metrics (List[str]): metric names.

        Returns:
            List[Path]: written files.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for metric in metrics:
            path = directory / FILES[metric]
            self.plot(metric, path)
            written.append(path)
        return written


def report_metrics(report: BenchmarkReport) -> List[str]:
    """
    Metrics drawn for a report: coefficient MSE, recovery and wall time, plus
    test accuracy or prediction MSE when the report has them.

    Args:
        report (BenchmarkReport): the report.

    Returns:
        List[str]: metric names.
    """
    metrics = ["coef_mse", "exact_recovery", "wall_time"]
    scores = [score for entries in report.scores.values() for score in entries]
    if any(score.accuracy is not None for score in scores):
        metrics.append("accuracy")
    if any(score.pred_mse is not None for score in scores):
        metrics.append("pred_mse")
    return metrics


def write_plots(report: BenchmarkReport, directory: Union[str, Path]) -> List[Path]:
    """
    Draw the charts of a report, or log a warning when matplotlib is missing.

    Args:
        report (BenchmarkReport): the report.
        directory (Union[str, Path]): output directory.

    Returns:
        List[Path]: written files, empty without matplotlib.
    """
    try:
        plotter = SvgPlotter(report)
    except TypeError:
        logger.warning("matplotlib is not installed, skipping the plots.")
        return []
    return plotter.plot_all(directory, report_metrics(report))


@need_modules("matplotlib")
class TradeoffPlotter:
    """
    Draw a real data benchmark: held out metric against wall time, one series per method.
    """

    frame: pd.DataFrame  #: Benchmark table, as returned by benchmark_real.

    def __init__(self, frame: pd.DataFrame) -> None:
        """
        Args:
            frame (pd.DataFrame): benchmark table.
        """
        self.frame = frame

    def plot(self, path: Union[str, Path]) -> None:
        """
        Args:
            path (Union[str, Path]): output SVG file.
        """
        metric = "accuracy" if "accuracy" in self.frame else "pred_mse"
        fig = Figure(figsize=(6, 4))
        ax = fig.add_subplot(1, 1, 1)
        for method, rows in self.frame.groupby("method", sort=False):
            rows = rows.sort_values("wall_time")
            ax.plot(rows["wall_time"], rows[metric], marker="o", label=method)
            for _, row in rows.iterrows():
                ax.annotate(f"m={row['m']}", (row["wall_time"], row[metric]), fontsize=7)
        ax.set_xscale("log")
        ax.set_xlabel(LABELS["wall_time"])
        ax.set_ylabel(LABELS[metric])
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        with matplotlib.rc_context({"svg.hashsalt": "message-estimator"}):
            fig.savefig(path, format="svg", metadata={"Date": None})


def write_tradeoff_plot(frame: pd.DataFrame, path: Union[str, Path]) -> Optional[Path]:
    """
    Draw a real data benchmark, or log a warning when matplotlib is missing.

    Args:
        frame (pd.DataFrame): benchmark table.
        path (Union[str, Path]): output SVG file.

    Returns:
        Optional[Path]: the written file, None without matplotlib.
    """
    try:
        plotter = TradeoffPlotter(frame)
    except TypeError:
        logger.warning("matplotlib is not installed, skipping the plot.")
        return None
    plotter.plot(path)
    return Path(path)
