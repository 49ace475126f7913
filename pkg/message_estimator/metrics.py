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
Scores of a method run against the generating truth, and the Monte Carlo harness.

Replicates are independent tasks: replicate r of grid point g draws its data
from a seed derived from (base seed, g, r) and every method sees the same data
and the same partition.
"""
import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from message_estimator.aggregation import InclusionVector
from message_estimator.dataset import (
    Dataset,
    GroundTruth,
    SyntheticConfig,
    Task,
    generate_synthetic,
    random_partition,
    split_train_test,
)
from message_estimator.diagnostics import condition_report
from message_estimator.exceptions import ConfigError, MessageError
from message_estimator.pipeline import CommLedger, MethodConfig, MethodResult, run_method
from message_estimator.utils import derive_seed, get_method, run_parallel

logger = logging.getLogger(__name__)

#: Metrics summarized by mean and standard error.
METRICS = ("coef_mse", "exact_recovery", "support_size", "pred_mse", "accuracy")

REPORT_FILE = "report.json"
TIMING_FILE = "timing.json"
CSV_FILE = "report.csv"


def _float_or_none(value: Optional[float]) -> Optional[float]:
    """
    Returns:
        Optional[float]: the value, None for NaN or None.
    """
    if value is None or math.isnan(value):
        return None
    return float(value)


@dataclass(frozen=True)
class ReplicateScore:
    """
    Scores of one method on one replicate.
    """

    method: str  #: Method name.
    coef_mse: float  #: Squared error of the coefficients, NaN if the run failed.
    exact_recovery: bool  #: The selected model is exactly the true support.
    support_size: int  #: Size of the selected model.
    comm: CommLedger  #: Communication ledger.
    wall_time: float  #: Wall time, in seconds.
    m: int = 1  #: Number of subsets.
    grid_point: int = 0  #: Index of the grid point.
    replicate: int = 0  #: Replicate index.
    n: int = 0  #: Number of training rows.
    pred_mse: Optional[float] = None  #: Test prediction MSE (regression with a test set).
    accuracy: Optional[float] = None  #: Test accuracy (classification with a test set).
    dataset_digest: str = ""  #: SHA-256 of the training data.
    error: Optional[str] = None  #: Error message if the run failed.

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        """
        Args:
            include_timing (bool, optional): include the wall time. Defaults to False.

        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        res = {
            "method": self.method,
            "grid_point": self.grid_point,
            "replicate": self.replicate,
            "n": self.n,
            "m": self.m,
            "coef_mse": _float_or_none(self.coef_mse),
            "exact_recovery": self.exact_recovery,
            "support_size": self.support_size,
            "pred_mse": _float_or_none(self.pred_mse),
            "accuracy": _float_or_none(self.accuracy),
            "comm": self.comm.to_dict(),
            "dataset_digest": self.dataset_digest,
            "error": self.error,
        }
        if include_timing:
            res["wall_time"] = _float_or_none(self.wall_time)
        return res

    @classmethod
    def from_dict(cls, data: Dict[str, Any], wall_time: Optional[float] = None) -> "ReplicateScore":
        """
        Args:
            data (Dict[str, Any]): JSON document.
            wall_time (Optional[float], optional): wall time, when stored apart. Defaults to None.

        Returns:
            ReplicateScore: the score.
        """
        if wall_time is None:
            wall_time = data.get("wall_time")
        coef_mse = data.get("coef_mse")
        return cls(
            method=data["method"],
            coef_mse=math.nan if coef_mse is None else float(coef_mse),
            exact_recovery=bool(data["exact_recovery"]),
            support_size=int(data["support_size"]),
            comm=CommLedger.from_dict(data.get("comm") or {}),
            wall_time=math.nan if wall_time is None else float(wall_time),
            m=int(data.get("m", 1)),
            grid_point=int(data.get("grid_point", 0)),
            replicate=int(data.get("replicate", 0)),
            n=int(data.get("n", 0)),
            pred_mse=data.get("pred_mse"),
            accuracy=data.get("accuracy"),
            dataset_digest=data.get("dataset_digest", ""),
            error=data.get("error"),
        )


def score_replicate(
    result: MethodResult, truth: GroundTruth, test: Optional[Dataset] = None
) -> ReplicateScore:
    """
    Score a method result against the generating truth.

    Args:
        result (MethodResult): result of a method.
        truth (GroundTruth): truth of the synthetic data.
        test (Optional[Dataset], optional): held out data for prediction scores. Defaults to None.

    Raises:
        ConfigError: if the dimensions disagree.

    Returns:
        ReplicateScore: the scores. pred_mse is set for regression test sets, accuracy for classification ones.
    """
    if result.beta.p != truth.p:
        raise ConfigError(f"Estimate has {result.beta.p} coefficients, truth has {truth.p}.")
    if test is not None and test.p != truth.p:
        raise ConfigError(f"Test set has {test.p} columns, truth has {truth.p}.")

    diff = result.beta.values - truth.beta
    pred_mse = None
    accuracy = None
    if test is not None:
        if test.task == Task.CLASSIFICATION:
            accuracy = held_out_error(result, test)
        else:
            pred_mse = held_out_error(result, test)

    return ReplicateScore(
        method=result.method.value,
        coef_mse=float(diff @ diff),
        exact_recovery=result.gamma == InclusionVector(truth.beta != 0),
        support_size=result.gamma.size,
        comm=result.ledger,
        wall_time=result.wall_time,
        m=result.m,
        pred_mse=pred_mse,
        accuracy=accuracy,
    )


@dataclass
class BenchmarkReport:
    """
    Scores of every method over the grid and the replicates.
    """

    scores: Dict[str, List[ReplicateScore]]  #: Scores of each method, ordered by (grid point, replicate).
    config: Dict[str, Any] = field(default_factory=dict)  #: Echo of the run configuration.
    partial: bool = False  #: At least one cell failed.
    conditions: Dict[str, Dict[str, Any]] = field(default_factory=dict)  #: Condition reports by grid point.

    def __post_init__(self) -> None:
        """
        Raises:
            ConfigError: if the methods have different numbers of replicates.
        """
        counts = {len(scores) for scores in self.scores.values()}
        if len(counts) > 1:
            raise ConfigError(f"Methods have different numbers of scores: {sorted(counts)}.")

    def to_frame(self, include_timing: bool = True) -> pd.DataFrame:
        """
        Tidy table: one row per method, grid point and replicate.

        Args:
            include_timing (bool, optional): include the wall time column. Defaults to True.

        Returns:
            pd.DataFrame: the table.
        """
        rows = []
        for scores in self.scores.values():
            for score in scores:
                row = score.to_dict(include_timing=include_timing)
                comm = row.pop("comm")
                row.update({f"comm_{key}": value for key, value in comm.items()})
                if score.error is not None:
                    row["exact_recovery"] = None
                rows.append(row)
        frame = pd.DataFrame(rows)
        for metric in METRICS + ("wall_time",):
            if metric in frame:
                frame[metric] = frame[metric].astype(np.float64)
        return frame

    def summary(self, include_timing: bool = False) -> pd.DataFrame:
        """
        Mean and standard error of every metric, by method and grid point.
        Failed cells are skipped.

        Args:
            include_timing (bool, optional): summarize the wall time too. Defaults to False.

        Returns:
            pd.DataFrame: columns method, grid_point, n, and <metric>_mean, <metric>_se.
        """
        metrics = list(METRICS) + (["wall_time"] if include_timing else [])
        frame = self.to_frame(include_timing=include_timing)
        if frame.empty:
            return pd.DataFrame(columns=["method", "grid_point", "n"])
        grouped = frame.groupby(["method", "grid_point", "n"], sort=False)[metrics]
        means = grouped.mean().add_suffix("_mean")
        errors = grouped.sem(ddof=1).add_suffix("_se")
        return pd.concat([means, errors], axis=1).reset_index()

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        """
        JSON compatible representation. Without timing it is a deterministic
        function of the configuration.

        Args:
            include_timing (bool, optional): include the wall times. Defaults to False.

        Returns:
            Dict[str, Any]: config, partial flag, scores, summary and condition reports.
        """
        summary = self.summary(include_timing=include_timing)
        records = [
            {key: _json_value(value) for key, value in record.items()}
            for record in summary.to_dict(orient="records")
        ]
        return {
            "config": self.config,
            "partial": self.partial,
            "scores": {
                method: [score.to_dict(include_timing) for score in scores]
                for method, scores in self.scores.items()
            },
            "summary": records,
            "conditions": self.conditions,
        }

    def timing_dict(self) -> Dict[str, List[Optional[float]]]:
        """
        Returns:
            Dict[str, List[Optional[float]]]: wall times of each method, in score order.
        """
        return {
            method: [_float_or_none(score.wall_time) for score in scores]
            for method, scores in self.scores.items()
        }

    @classmethod
    def from_dict(
        cls, data: Dict[str, Any], timing: Optional[Dict[str, List[Optional[float]]]] = None
    ) -> "BenchmarkReport":
        """
        Args:
            data (Dict[str, Any]): JSON document, as written by to_dict.
            timing (Optional[Dict[str, List[Optional[float]]]], optional): wall times, as written by timing_dict. Defaults to None.

        Returns:
            BenchmarkReport: the report.
        """
        timing = timing or {}
        scores: Dict[str, List[ReplicateScore]] = {}
        for method, entries in data.get("scores", {}).items():
            times = timing.get(method, [None] * len(entries))
            scores[method] = [
                ReplicateScore.from_dict(entry, wall_time)
                for entry, wall_time in zip(entries, times)
            ]
        return cls(
            scores=scores,
            config=data.get("config", {}),
            partial=bool(data.get("partial", False)),
            conditions=data.get("conditions", {}),
        )

    def save(self, directory: Union[str, Path]) -> None:
        """
        Write report.json (without timings), timing.json and the tidy report.csv.

        Args:
            directory (Union[str, Path]): output directory, created if needed.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / REPORT_FILE, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(include_timing=False), f, indent=2, sort_keys=True)
            f.write("\n")
        with open(directory / TIMING_FILE, "w", encoding="utf-8") as f:
            json.dump(self.timing_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        self.to_frame(include_timing=True).to_csv(directory / CSV_FILE, index=False)
        logger.info("Report written to %s.", directory)

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "BenchmarkReport":
        """
        Read a report written by save. timing.json is optional.

        Args:
            directory (Union[str, Path]): report directory.

        Raises:
            ConfigError: if report.json is missing or invalid.

        Returns:
            BenchmarkReport: the report.
        """
        directory = Path(directory)
        try:
            with open(directory / REPORT_FILE, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"Cannot read {directory / REPORT_FILE}: {exc}") from exc
        timing = None
        if (directory / TIMING_FILE).exists():
            with open(directory / TIMING_FILE, "r", encoding="utf-8") as f:
                timing = json.load(f)
        return cls.from_dict(data, timing)


def _json_value(value: Any) -> Any:
    """
    Convert numpy scalars and NaN to JSON values.
    """
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _float_or_none(float(value))
    return value


def subset_count(n: int, subset_size: Optional[int], default: int) -> int:
    """
    Number of subsets for n rows: n // subset_size (at least 1), or the default
    when the subset size is not fixed.

    Args:
        n (int): number of rows.
        subset_size (Optional[int]): fixed subset size.
        default (int): number of subsets when subset_size is None.

    Returns:
        int: number of subsets.
    """
    if subset_size is None:
        return default
    return max(1, n // subset_size)


def _failed_score(cfg: MethodConfig, m: int, exc: Exception) -> ReplicateScore:
    """
    Returns:
        ReplicateScore: the score recorded for a failed cell.
    """
    return ReplicateScore(
        method=cfg.method.value,
        coef_mse=math.nan,
        exact_recovery=False,
        support_size=0,
        comm=CommLedger(),
        wall_time=math.nan,
        m=m,
        error=f"{type(exc).__name__}: {exc}",
    )


def _replicate_task(
    grid_point: int,
    replicate: int,
    synthetic: SyntheticConfig,
    methods: Sequence[MethodConfig],
    base_seed: int,
    subset_size: Optional[int],
    n_test: int,
    diagnose: bool,
) -> Tuple[List[ReplicateScore], Optional[Dict[str, Any]]]:
    """
    Worker task: every method on one replicate.

    Returns:
        Tuple[List[ReplicateScore], Optional[Dict[str, Any]]]: one score per method, and the condition report when requested.
    """
    seed = derive_seed(base_seed, grid_point, replicate)
    full, truth = generate_synthetic(
        dataclasses.replace(synthetic, n=synthetic.n + n_test, seed=seed)
    )
    train, test = split_train_test(full, synthetic.n) if n_test > 0 else (full, None)
    digest = train.digest()

    plans = {}
    scores = []
    for cfg in methods:
        m = subset_count(train.n, subset_size, cfg.m)
        try:
            method = get_method(cfg.method.value)
            plan = None
            if method.distributed:
                if m not in plans:
                    plans[m] = random_partition(train.n, m, derive_seed(seed, "partition", m))
                plan = plans[m]
            run_cfg = cfg.replace(m=m, seed=derive_seed(seed, "method"))
            result = run_method(train, run_cfg, plan, threads=1)
            score = score_replicate(result, truth, test)
        except (MessageError, np.linalg.LinAlgError) as exc:
            logger.warning(
                "%s failed on grid point %d replicate %d: %s",
                cfg.method.value,
                grid_point,
                replicate,
                exc,
            )
            score = _failed_score(cfg, m, exc)
        scores.append(
            dataclasses.replace(
                score, grid_point=grid_point, replicate=replicate, n=train.n, dataset_digest=digest
            )
        )

    conditions = None
    if diagnose and truth.s > 0:
        report = condition_report(
            train, truth.support, np.sign(truth.beta[truth.support]), s=truth.s, seed=seed
        )
        conditions = report.to_dict()
    return scores, conditions


def monte_carlo(
    grid: Sequence[SyntheticConfig],
    methods: Sequence[MethodConfig],
    reps: int,
    base_seed: int = 0,
    subset_size: Optional[int] = None,
    n_test: int = 0,
    threads: int = 1,
    diagnose: bool = False,
) -> BenchmarkReport:
    """
    Run every method on reps synthetic replicates of every grid point.

    The seeds of the grid configurations are ignored: replicate r of grid
    point g uses the seed derived from (base_seed, g, r).

    Args:
        grid (Sequence[SyntheticConfig]): grid of synthetic configurations.
        methods (Sequence[MethodConfig]): methods to compare, with distinct names.
        reps (int): number of replicates per grid point.
        base_seed (int, optional): base seed. Defaults to 0.
        subset_size (Optional[int], optional): fixed subset size, None to use each method's m. Defaults to None.
        n_test (int, optional): number of held out rows for prediction scores. Defaults to 0.
        threads (int, optional): number of workers. Defaults to 1.
        diagnose (bool, optional): add the condition report of the first replicate of each grid point. Defaults to False.

    Raises:
        ConfigError: if reps < 1, the grid or the method list is empty, or two methods share a name.

    Returns:
        BenchmarkReport: the report.
    """
    if reps < 1:
        raise ConfigError(f"reps must be at least 1, got {reps}.")
    if not grid or not methods:
        raise ConfigError("The grid and the method list must be nonempty.")
    names = [cfg.method.value for cfg in methods]
    if len(set(names)) != len(names):
        raise ConfigError(f"Method names must be distinct, got {names}.")
    if subset_size is not None and subset_size < 1:
        raise ConfigError(f"subset_size must be at least 1, got {subset_size}.")
    if n_test < 0:
        raise ConfigError(f"n_test must be nonnegative, got {n_test}.")

    tasks = [
        (g, r, synthetic, list(methods), base_seed, subset_size, n_test, diagnose and r == 0)
        for g, synthetic in enumerate(grid)
        for r in range(reps)
    ]
    logger.info(
        "Monte Carlo: %d grid points, %d replicates, %d methods.", len(grid), reps, len(methods)
    )
    outputs = run_parallel(_replicate_task, tasks, threads)

    scores: Dict[str, List[ReplicateScore]] = {name: [] for name in names}
    conditions: Dict[str, Dict[str, Any]] = {}
    for (g, r, *_), (replicate_scores, report) in zip(tasks, outputs):
        for score in replicate_scores:
            scores[score.method].append(score)
        if report is not None:
            conditions[str(g)] = report
        if r == reps - 1:
            logger.info("Grid point %d (n=%d) done.", g, grid[g].n)

    partial = any(score.error is not None for entries in scores.values() for score in entries)
    if partial:
        logger.warning("Some cells failed, the report is partial.")
    config = {
        "grid": [synthetic.to_dict() for synthetic in grid],
        "methods": [cfg.to_dict() for cfg in methods],
        "reps": reps,
        "base_seed": base_seed,
        "subset_size": subset_size,
        "n_test": n_test,
    }
    return BenchmarkReport(scores=scores, config=config, partial=partial, conditions=conditions)


def held_out_error(result: MethodResult, test: Dataset) -> float:
    """
    Held out error of a fit: accuracy for classification, prediction MSE for regression.

    Args:
        result (MethodResult): result of a method.
        test (Dataset): held out data.

    Raises:
        ConfigError: if the dimensions disagree.

    Returns:
        float: the accuracy or the prediction MSE.
    """
    if result.beta.p != test.p:
        raise ConfigError(f"Estimate has {result.beta.p} coefficients, test set has {test.p}.")
    eta = result.beta.linear_predictor(test.x)
    if test.task == Task.CLASSIFICATION:
        return float(np.mean((eta > 0) == (test.y > 0.5)))
    return float(np.mean((test.y - eta) ** 2))


def benchmark_real(
    train: Dataset,
    test: Dataset,
    methods: Sequence[MethodConfig],
    m_values: Sequence[int],
    seed: int = 0,
    threads: int = 1,
) -> pd.DataFrame:
    """
    Fit every method on a training set and score it on a test set. Distributed
    methods run once per number of subsets, on partitions shared by the methods.

    Args:
        train (Dataset): training data.
        test (Dataset): held out data.
        methods (Sequence[MethodConfig]): compared methods.
        m_values (Sequence[int]): numbers of subsets.
        seed (int, optional): seed of the partitions. Defaults to 0.
        threads (int, optional): number of workers of each run. Defaults to 1.

    Returns:
        pd.DataFrame: one row per run with method, m, support_size, the test metric, wall_time and the ledger.
    """
    metric = "accuracy" if train.task == Task.CLASSIFICATION else "pred_mse"
    plans = {m: random_partition(train.n, m, derive_seed(seed, "partition", m)) for m in m_values}
    rows = []
    for cfg in methods:
        method = get_method(cfg.method.value)
        for m in m_values if method.distributed else [1]:
            plan = plans[m] if method.distributed else None
            result = run_method(train, cfg.replace(m=m, seed=seed), plan, threads)
            row = {
                "method": cfg.method.value,
                "m": result.m,
                "support_size": result.gamma.size,
                metric: held_out_error(result, test),
                "wall_time": result.wall_time,
            }
            row.update({f"comm_{key}": value for key, value in result.ledger.to_dict().items()})
            logger.info(
                "%s (m=%d): %s = %.6g in %.3f s.",
                row["method"],
                row["m"],
                metric,
                row[metric],
                row["wall_time"],
            )
            rows.append(row)
    return pd.DataFrame(rows)
