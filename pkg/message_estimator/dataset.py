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
Data representation, ingestion, synthetic generation and partitioning.
"""
import hashlib
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from message_estimator.exceptions import ConfigError, DataError

logger = logging.getLogger(__name__)


class Task(Enum):
    """
    Learning task of a dataset.
    """

    REGRESSION = "regression"  #: Linear model, real response.
    CLASSIFICATION = "classification"  #: Logistic model, response in {0, 1}.


class NoiseFamily(Enum):
    """
    Family of the observation noise of a synthetic dataset.
    """

    GAUSSIAN = "gaussian"  #: Gaussian noise, ``noise_param`` is the standard deviation.
    STUDENT_T = "student_t"  #: Unscaled Student t noise, ``noise_param`` is the degrees of freedom.
    LOGISTIC = "logistic"  #: Bernoulli response through the logistic link.


class Case(Enum):
    """
    Simulation cases.
    """

    CASE1 = "case1"  #: Linear model with N(0, 2^2) noise.
    CASE2 = "case2"  #: Linear model with t(df=3) noise.
    CASE3 = "case3"  #: Logistic model.


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Design matrix and response with column metadata.
    """

    x: np.ndarray  #: Design matrix, n rows and p columns.
    y: np.ndarray  #: Response vector of length n.
    column_names: List[str]  #: Names of the p columns of x.
    task: Task = Task.REGRESSION  #: Learning task.
    response_name: str = "y"  #: Name of the response column.

    def __post_init__(self) -> None:
        """
        Raises:
            DataError: if the dimensions or the response are invalid.
        """
        if self.x.ndim != 2 or self.x.shape[0] < 1 or self.x.shape[1] < 1:
            raise DataError(f"Design matrix must be n x p with n, p >= 1, got {self.x.shape}.")
        if self.y.ndim != 1 or self.y.shape[0] != self.x.shape[0]:
            raise DataError(
                f"Response of length {self.y.shape[0]} does not match {self.x.shape[0]} rows."
            )
        if len(self.column_names) != self.x.shape[1]:
            raise DataError(
                f"{len(self.column_names)} column names for {self.x.shape[1]} columns."
            )
        if self.task == Task.CLASSIFICATION and not np.all(np.isin(self.y, (0.0, 1.0))):
            raise DataError("Classification response must take values in {0, 1}.")

    @property
    def n(self) -> int:
        """Number of rows."""
        return self.x.shape[0]

    @property
    def p(self) -> int:
        """Number of columns."""
        return self.x.shape[1]

    def subset(self, rows: Union[np.ndarray, Sequence[int]]) -> "Dataset":
        """
        Return the dataset restricted to the given rows, in the given order.

        Args:
            rows (Union[np.ndarray, Sequence[int]]): row indices.

        Returns:
            Dataset: the restricted dataset.
        """
        rows = np.asarray(rows, dtype=int)
        return Dataset(
            x=self.x[rows],
            y=self.y[rows],
            column_names=list(self.column_names),
            task=self.task,
            response_name=self.response_name,
        )

    def digest(self) -> str:
        """
        SHA-256 of the design matrix and the response.

        Returns:
            str: hexadecimal digest.
        """
        sha = hashlib.sha256()
        sha.update(np.ascontiguousarray(self.x, dtype=np.float64).tobytes())
        sha.update(np.ascontiguousarray(self.y, dtype=np.float64).tobytes())
        return sha.hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.task == other.task
            and self.column_names == other.column_names
            and self.response_name == other.response_name
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """
    True coefficients and noise of a synthetic dataset.
    """

    beta: np.ndarray  #: True coefficient vector of length p.
    noise: NoiseFamily  #: Noise family.
    noise_param: Optional[float] = None  #: Standard deviation (gaussian) or degrees of freedom (student_t).
    sigma2: Optional[float] = None  #: Noise variance, when defined.

    @property
    def support(self) -> np.ndarray:
        """Sorted indices of the nonzero coefficients."""
        return np.flatnonzero(self.beta)

    @property
    def s(self) -> int:
        """Size of the support."""
        return int(np.count_nonzero(self.beta))

    @property
    def p(self) -> int:
        """Number of features."""
        return self.beta.shape[0]


@dataclass(frozen=True)
class SyntheticConfig:
    """
    Parameters of a synthetic benchmark dataset.
    """

    n: int  #: Number of rows.
    p: int  #: Number of features.
    s: int  #: Size of the true support.
    rho: float = 0.0  #: Compound symmetry correlation.
    case: Case = Case.CASE1  #: Simulation case.
    seed: int = 0  #: Seed of the generator.

    def __post_init__(self) -> None:
        """
        Raises:
            ConfigError: if the configuration is invalid.
        """
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}.")
        if self.p < 1:
            raise ConfigError(f"p must be at least 1, got {self.p}.")
        if not 0 <= self.s <= self.p:
            raise ConfigError(f"s must be in [0, p={self.p}], got {self.s}.")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError(f"rho must be in [0, 1), got {self.rho}.")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}.")

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        return {
            "n": self.n,
            "p": self.p,
            "s": self.s,
            "rho": self.rho,
            "case": self.case.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SyntheticConfig":
        """
        Build a configuration from its JSON representation.

        Args:
            data (Dict[str, Any]): JSON document.

        Raises:
            ConfigError: if a field is missing or invalid.

        Returns:
            SyntheticConfig: the configuration.
        """
        try:
            return cls(
                n=int(data["n"]),
                p=int(data["p"]),
                s=int(data["s"]),
                rho=float(data.get("rho", 0.0)),
                case=Case(data.get("case", Case.CASE1.value)),
                seed=int(data.get("seed", 0)),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid synthetic configuration: {exc}") from exc


@dataclass(frozen=True, eq=False)
class PartitionPlan:
    """
    Assignment of the rows of a dataset to m subsets.
    """

    m: int  #: Number of subsets.
    assignment: np.ndarray  #: Subset id of each row.
    seed: int  #: Seed used to shuffle the rows.

    @property
    def n(self) -> int:
        """Number of rows."""
        return self.assignment.shape[0]

    def indices(self, subset_id: int) -> np.ndarray:
        """
        Rows of a subset, in increasing order.

        Args:
            subset_id (int): id of the subset, in [0, m).

        Returns:
            np.ndarray: row indices.
        """
        return np.flatnonzero(self.assignment == subset_id)

    def sizes(self) -> List[int]:
        """
        Returns:
            List[int]: number of rows of each subset.
        """
        return np.bincount(self.assignment, minlength=self.m).tolist()


@dataclass(frozen=True, eq=False)
class ScalingRecord:
    """
    Column means and standard deviations used by :func:`standardize`.
    """

    mean: np.ndarray  #: Column means of the raw design.
    scale: np.ndarray  #: Column sample standard deviations of the raw design.

    def to_raw(self, beta: np.ndarray, intercept: float = 0.0) -> Tuple[np.ndarray, float]:
        """
        Map coefficients fitted on the standardized design back to the raw scale.

        Args:
            beta (np.ndarray): coefficients on the standardized scale.
            intercept (float, optional): intercept on the standardized scale. Defaults to 0.0.

        Returns:
            Tuple[np.ndarray, float]: coefficients and intercept on the raw scale.
        """
        raw = beta / self.scale
        return raw, float(intercept - self.mean @ raw)


def load_csv(
    path: Union[str, Path],
    response: str,
    categorical: Optional[Sequence[str]] = None,
    task: Task = Task.REGRESSION,
) -> Dataset:
    """
    Load a dataset from a CSV file with a header row.

    Categorical columns are recoded with one indicator column per observed level,
    except the reference level which is the lexicographically first one. The
    indicator columns are named ``column=level`` and replace the categorical
    column in place.

    Args:
        path (Union[str, Path]): path of the CSV file.
        response (str): name of the response column.
        categorical (Optional[Sequence[str]], optional): names of the categorical columns. Defaults to None.
        task (Task, optional): learning task. Defaults to Task.REGRESSION.

    Raises:
        DataError: if the file is missing or empty, if a column is missing or if a cell cannot be parsed.

    Returns:
        Dataset: the loaded dataset.
    """
    path = Path(path)
    categorical = list(categorical or [])
    if not path.is_file():
        raise DataError(f"Data file {path} does not exist.")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as exc:
        raise DataError(f"Data file {path} is empty.") from exc
    if frame.shape[0] == 0:
        raise DataError(f"Data file {path} has no data rows.")

    for name in [response] + categorical:
        if name not in frame.columns:
            raise DataError(f"Column {name} not found in {path}.", column=name)

    y = _parse_numeric(frame[response], response)
    columns: List[np.ndarray] = []
    names: List[str] = []
    for name in frame.columns:
        if name == response:
            continue
        if name in categorical:
            values = frame[name].to_numpy(dtype=str)
            levels = sorted(set(values))
            for level in levels[1:]:
                columns.append((values == level).astype(np.float64))
                names.append(f"{name}={level}")
            logger.debug("Column %s recoded with %d levels.", name, len(levels))
        else:
            columns.append(_parse_numeric(frame[name], name))
            names.append(name)
    if not columns:
        raise DataError(f"Data file {path} has no predictor columns.")

    logger.info("Loaded %s: %d rows, %d predictors.", path, frame.shape[0], len(names))
    return Dataset(
        x=np.column_stack(columns),
        y=y,
        column_names=names,
        task=task,
        response_name=response,
    )


def _parse_numeric(column: pd.Series, name: str) -> np.ndarray:
    """
    Parse a column of strings as finite reals.

    Args:
        column (pd.Series): raw column.
        name (str): column name, for error messages.

    Raises:
        DataError: naming the first faulty row.

    Returns:
        np.ndarray: parsed values.
    """
    try:
        values = column.str.strip().astype(np.float64).to_numpy()
    except ValueError:
        values = np.array([_to_float(cell) for cell in column], dtype=np.float64)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.flatnonzero(bad)[0]) + 1
        raise DataError(
            f"Cannot parse {column.iloc[row - 1]!r} as a finite number in column {name}, row {row}.",
            row=row,
            column=name,
        )
    return values


def _to_float(cell: str) -> float:
    """
    Parse one cell, NaN when it is not a number.
    """
    try:
        return float(cell)
    except ValueError:
        return float("nan")


def write_csv(d: Dataset, path: Union[str, Path]) -> None:
    """
    Write a dataset as CSV, the predictors followed by the response.

    Floats are written with their shortest round-trip representation so that
    :func:`load_csv` gives back the same dataset.

    Args:
        d (Dataset): dataset to write.
        path (Union[str, Path]): destination.
    """
    frame = pd.DataFrame(d.x, columns=d.column_names)
    frame[d.response_name] = d.y
    frame.to_csv(path, index=False, encoding="utf-8")


def generate_synthetic(cfg: SyntheticConfig) -> Tuple[Dataset, GroundTruth]:
    """
    Generate a synthetic dataset.

    Rows of X are multivariate normal with unit variances and all pairwise
    correlations equal to rho. The support is a seeded random subset of size s
    and the nonzero coefficients are (-1)^Bernoulli(0.4) * (8 log(n) / sqrt(n) + |N(0, 1)|).

    Args:
        cfg (SyntheticConfig): configuration.

    Returns:
        Tuple[Dataset, GroundTruth]: the dataset and the generating truth.
    """
    rng = np.random.default_rng(cfg.seed)
    n, p = cfg.n, cfg.p

    # Shared factor gives compound symmetry: var 1, covariance rho.
    common = rng.standard_normal((n, 1))
    x = np.sqrt(1.0 - cfg.rho) * rng.standard_normal((n, p)) + np.sqrt(cfg.rho) * common

    support = np.sort(rng.permutation(p)[: cfg.s])
    signs = np.where(rng.random(cfg.s) < 0.4, -1.0, 1.0)
    magnitudes = 8.0 * np.log(n) / np.sqrt(n) + np.abs(rng.standard_normal(cfg.s))
    beta = np.zeros(p)
    beta[support] = signs * magnitudes

    mean = x @ beta
    if cfg.case == Case.CASE1:
        y = mean + 2.0 * rng.standard_normal(n)
        truth = GroundTruth(beta, NoiseFamily.GAUSSIAN, noise_param=2.0, sigma2=4.0)
        task = Task.REGRESSION
    elif cfg.case == Case.CASE2:
        y = mean + rng.standard_t(3.0, n)
        truth = GroundTruth(beta, NoiseFamily.STUDENT_T, noise_param=3.0, sigma2=3.0)
        task = Task.REGRESSION
    else:
        prob = 1.0 / (1.0 + np.exp(-mean))
        y = (rng.random(n) < prob).astype(np.float64)
        truth = GroundTruth(beta, NoiseFamily.LOGISTIC)
        task = Task.CLASSIFICATION

    names = [f"x{j}" for j in range(p)]
    return Dataset(x=x, y=y, column_names=names, task=task), truth


def random_partition(n: int, m: int, seed: int) -> PartitionPlan:
    """
    Randomly partition n rows into m balanced subsets.

    The rows are shuffled with the seed and dealt round-robin, so subset sizes
    differ by at most one.

    Args:
        n (int): number of rows.
        m (int): number of subsets.
        seed (int): seed of the shuffle.

    Raises:
        ConfigError: if m is not in [1, n].

    Returns:
        PartitionPlan: the partition.
    """
    if not 1 <= m <= n:
        raise ConfigError(f"Number of subsets must be in [1, n={n}], got {m}.")
    order = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = np.arange(n) % m
    return PartitionPlan(m=m, assignment=assignment, seed=seed)


def split_train_test(d: Dataset, n_train: int) -> Tuple[Dataset, Dataset]:
    """
    Split a dataset in file order: the first n_train rows train, the rest test.

    Args:
        d (Dataset): dataset to split.
        n_train (int): number of training rows.

    Raises:
        ConfigError: if n_train is not in [1, n).

    Returns:
        Tuple[Dataset, Dataset]: training and test datasets.
    """
    if not 1 <= n_train < d.n:
        raise ConfigError(f"n_train must be in [1, {d.n}), got {n_train}.")
    return d.subset(np.arange(n_train)), d.subset(np.arange(n_train, d.n))


def standardize(d: Dataset) -> Tuple[Dataset, ScalingRecord]:
    """
    Center every column and scale it to unit sample standard deviation.

    Args:
        d (Dataset): dataset to standardize.

    Raises:
        DataError: if a column is constant.

    Returns:
        Tuple[Dataset, ScalingRecord]: the standardized dataset and the record to map coefficients back.
    """
    mean = d.x.mean(axis=0)
    scale = d.x.std(axis=0, ddof=1) if d.n > 1 else np.zeros(d.p)
    constant = np.flatnonzero(~(scale > 0))
    if constant.size:
        name = d.column_names[constant[0]]
        raise DataError(f"Column {name} is constant and cannot be standardized.", column=name)
    standardized = Dataset(
        x=(d.x - mean) / scale,
        y=d.y.copy(),
        column_names=list(d.column_names),
        task=d.task,
        response_name=d.response_name,
    )
    return standardized, ScalingRecord(mean=mean, scale=scale)
