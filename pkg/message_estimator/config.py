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
JSON configuration files, command line overrides and scale presets.

A configuration file is a JSON object. Overrides are ``key=value`` strings
with dotted keys (``selector.gic.penalty=bic``); the value is parsed as JSON
and kept as a string when it is not valid JSON.
"""
import copy
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from message_estimator.dataset import Case, SyntheticConfig, Task
from message_estimator.exceptions import ConfigError
from message_estimator.pipeline import MethodConfig, MethodName
from message_estimator.selectors import SelectorConfig
from message_estimator.solvers import LassoConfig

logger = logging.getLogger(__name__)


def load_json(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a JSON configuration file.

    Args:
        path (Union[str, Path]): path of the file.

    Raises:
        ConfigError: if the file cannot be read, is not valid JSON or is not an object.

    Returns:
        Dict[str, Any]: the document.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise ConfigError(f"Cannot read configuration {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Configuration {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Configuration {path} must be a JSON object.")
    logger.debug("Loaded configuration %s.", path)
    return data


def parse_override(override: str) -> Tuple[List[str], Any]:
    """
    Split a ``key=value`` override.

    Args:
        override (str): the override.

    Raises:
        ConfigError: if there is no ``=`` or the key is empty.

    Returns:
        Tuple[List[str], Any]: the dotted key split on dots, and the parsed value.
    """
    key, sep, raw = override.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"Override {override!r} must have the form key=value.")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def apply_overrides(document: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """
    Apply overrides to a copy of a document. Missing intermediate objects are created.

    Args:
        document (Dict[str, Any]): the document.
        overrides (Sequence[str]): ``key=value`` strings, applied in order.

    Raises:
        ConfigError: if an override goes through a value that is not an object.

    Returns:
        Dict[str, Any]: the new document.
    """
    res = copy.deepcopy(document)
    for override in overrides:
        path, value = parse_override(override)
        node = res
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"Cannot override {override!r}: {part} is not an object.")
            node = child
        node[path[-1]] = value
        logger.debug("Override %s = %r.", ".".join(path), value)
    return res


class Scale(Enum):
    """
    Simulation presets.
    """

    DESK = "desk"  #: Small runs, minutes on a laptop.
    PAPER = "paper"  #: Full size grid, hours on a workstation.


#: Preset values: p, s, subset size, replicates, grid of n, path truncation.
PRESETS: Dict[Scale, Dict[str, Any]] = {
    Scale.DESK: {
        "p": 100,
        "s": 3,
        "subset_size": 200,
        "reps": 20,
        "n_values": [1000, 2000, 4000],
        "max_active": 30,
    },
    Scale.PAPER: {
        "p": 1000,
        "s": 3,
        "subset_size": 400,
        "reps": 200,
        "n_values": [2000, 4000, 6000, 8000, 10000],
        "max_active": 50,
    },
}

#: Test rows held out for the logistic case.
CLASSIFICATION_TEST_ROWS = 2000

DEFAULT_METHODS = (
    MethodName.MESSAGE,
    MethodName.FULL_DATA,
    MethodName.AVERAGING,
    MethodName.GEOMETRIC_MEDIAN,
)


def _method_names(raw: Sequence[Any]) -> Tuple[MethodName, ...]:
    """
    Raises:
        ConfigError: if a name is unknown.

    Returns:
        Tuple[MethodName, ...]: method names.
    """
    try:
        return tuple(MethodName(name) for name in raw)
    except ValueError as exc:
        raise ConfigError(f"Unknown method: {exc}") from exc


@dataclass(frozen=True)
class SimulationConfig:
    """
    Monte Carlo simulation: a grid of n for one case, and the compared methods.
    """

    case: Case = Case.CASE1  #: Simulation case.
    rho: float = 0.0  #: Compound symmetry correlation.
    p: int = 100  #: Number of features.
    s: int = 3  #: Size of the true support.
    n_values: Tuple[int, ...] = (1000, 2000, 4000)  #: Grid of training sizes.
    subset_size: Optional[int] = 200  #: Fixed subset size, None to use m.
    m: int = 1  #: Number of subsets when subset_size is None.
    reps: int = 20  #: Replicates per grid point.
    base_seed: int = 0  #: Base seed.
    n_test: int = 0  #: Held out rows per replicate.
    methods: Tuple[MethodName, ...] = DEFAULT_METHODS  #: Compared methods.
    selector: SelectorConfig = field(default_factory=SelectorConfig)  #: Shared selector.
    bolasso_B: int = 32  #: Bootstrap resamples of Bolasso.
    diagnose: bool = True  #: Add condition reports to the benchmark report.

    def __post_init__(self) -> None:
        """
        Raises:
            ConfigError: if the configuration is invalid.
        """
        if self.reps < 1:
            raise ConfigError(f"reps must be at least 1, got {self.reps}.")
        if not self.n_values:
            raise ConfigError("n_values must be nonempty.")
        if not self.methods:
            raise ConfigError("methods must be nonempty.")
        if self.subset_size is not None and self.subset_size < 1:
            raise ConfigError(f"subset_size must be at least 1, got {self.subset_size}.")
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "methods", _method_names(self.methods))
        # Validates n, p, s and rho.
        self.grid()
        self.method_configs()

    def grid(self) -> List[SyntheticConfig]:
        """
        Returns:
            List[SyntheticConfig]: one synthetic configuration per n.
        """
        return [
            SyntheticConfig(
                n=n, p=self.p, s=self.s, rho=self.rho, case=self.case, seed=self.base_seed
            )
            for n in self.n_values
        ]

    def method_configs(self) -> List[MethodConfig]:
        """
        Returns:
            List[MethodConfig]: one configuration per compared method.
        """
        return [
            MethodConfig(
                method=name,
                selector=self.selector,
                m=self.m,
                bolasso_B=self.bolasso_B,
                seed=self.base_seed,
            )
            for name in self.methods
        ]

    def replace(self, **changes: Any) -> "SimulationConfig":
        """
        Args:
            changes (Any): fields to change.

        Returns:
            SimulationConfig: a copy with the changes.
        """
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        return {
            "case": self.case.value,
            "rho": self.rho,
            "p": self.p,
            "s": self.s,
            "n_values": list(self.n_values),
            "subset_size": self.subset_size,
            "m": self.m,
            "reps": self.reps,
            "base_seed": self.base_seed,
            "n_test": self.n_test,
            "methods": [name.value for name in self.methods],
            "selector": self.selector.to_dict(),
            "bolasso_B": self.bolasso_B,
            "diagnose": self.diagnose,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimulationConfig":
        """
        Args:
            data (Dict[str, Any]): JSON document, missing fields take their defaults.

        Raises:
            ConfigError: if a field is invalid.

        Returns:
            SimulationConfig: the configuration.
        """
        default = cls()
        try:
            subset_size = data.get("subset_size", default.subset_size)
            return cls(
                case=Case(data.get("case", default.case.value)),
                rho=float(data.get("rho", default.rho)),
                p=int(data.get("p", default.p)),
                s=int(data.get("s", default.s)),
                n_values=tuple(int(n) for n in data.get("n_values", default.n_values)),
                subset_size=int(subset_size) if subset_size is not None else None,
                m=int(data.get("m", default.m)),
                reps=int(data.get("reps", default.reps)),
                base_seed=int(data.get("base_seed", default.base_seed)),
                n_test=int(data.get("n_test", default.n_test)),
                methods=_method_names(data.get("methods", [m.value for m in default.methods])),
                selector=SelectorConfig.from_dict(data.get("selector") or {}),
                bolasso_B=int(data.get("bolasso_B", default.bolasso_B)),
                diagnose=bool(data.get("diagnose", default.diagnose)),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid simulation configuration: {exc}") from exc


def preset_document(scale: Scale, case: Case = Case.CASE1, rho: float = 0.0) -> Dict[str, Any]:
    """
    Simulation document of a scale preset. The logistic case holds out test rows
    to measure the accuracy.

    Args:
        scale (Scale): preset.
        case (Case, optional): simulation case. Defaults to Case.CASE1.
        rho (float, optional): compound symmetry correlation. Defaults to 0.0.

    Returns:
        Dict[str, Any]: document accepted by SimulationConfig.from_dict.
    """
    preset = PRESETS[scale]
    selector = SelectorConfig(lasso=LassoConfig(max_active=preset["max_active"]))
    return {
        "case": case.value,
        "rho": rho,
        "p": preset["p"],
        "s": preset["s"],
        "n_values": list(preset["n_values"]),
        "subset_size": preset["subset_size"],
        "reps": preset["reps"],
        "n_test": CLASSIFICATION_TEST_ROWS if case == Case.CASE3 else 0,
        "selector": selector.to_dict(),
    }


@dataclass(frozen=True)
class DataConfig:
    """
    How to read a CSV file.
    """

    response: str = "y"  #: Name of the response column.
    categorical: Tuple[str, ...] = ()  #: Columns recoded as reference level dummies.
    task: Task = Task.REGRESSION  #: Learning task.
    standardize: bool = False  #: Standardize the columns before fitting.

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        return {
            "response": self.response,
            "categorical": list(self.categorical),
            "task": self.task.value,
            "standardize": self.standardize,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DataConfig":
        """
        Args:
            data (Dict[str, Any]): JSON document.

        Raises:
            ConfigError: if a field is invalid.

        Returns:
            DataConfig: the configuration.
        """
        try:
            return cls(
                response=str(data.get("response", "y")),
                categorical=tuple(str(c) for c in data.get("categorical") or ()),
                task=Task(data.get("task", Task.REGRESSION.value)),
                standardize=bool(data.get("standardize", False)),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid data configuration: {exc}") from exc


@dataclass(frozen=True)
class BenchConfig:
    """
    Real data benchmark: every method for several numbers of subsets, scored on held out rows.
    """

    data: DataConfig = field(default_factory=DataConfig)  #: How to read the CSV file.
    n_train: Optional[int] = None  #: Training rows (file order), None for 80 percent.
    m_values: Tuple[int, ...] = (5, 10)  #: Numbers of subsets of the distributed methods.
    methods: Tuple[MethodName, ...] = DEFAULT_METHODS  #: Compared methods.
    selector: SelectorConfig = field(default_factory=SelectorConfig)  #: Shared selector.
    bolasso_B: int = 32  #: Bootstrap resamples of Bolasso.
    seed: int = 0  #: Seed of the partitions.

    def __post_init__(self) -> None:
        """
        Raises:
            ConfigError: if the configuration is invalid.
        """
        if not self.m_values or min(self.m_values) < 1:
            raise ConfigError("m_values must be a nonempty list of positive integers.")
        if self.n_train is not None and self.n_train < 1:
            raise ConfigError(f"n_train must be positive, got {self.n_train}.")
        if not self.methods:
            raise ConfigError("methods must be nonempty.")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BenchConfig":
        """
        Args:
            data (Dict[str, Any]): JSON document.

        Raises:
            ConfigError: if a field is invalid.

        Returns:
            BenchConfig: the configuration.
        """
        default = cls()
        try:
            n_train = data.get("n_train")
            return cls(
                data=DataConfig.from_dict(data.get("data") or {}),
                n_train=int(n_train) if n_train is not None else None,
                m_values=tuple(int(m) for m in data.get("m_values", default.m_values)),
                methods=_method_names(data.get("methods", [m.value for m in default.methods])),
                selector=SelectorConfig.from_dict(data.get("selector") or {}),
                bolasso_B=int(data.get("bolasso_B", default.bolasso_B)),
                seed=int(data.get("seed", default.seed)),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid benchmark configuration: {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        return {
            "data": self.data.to_dict(),
            "n_train": self.n_train,
            "m_values": list(self.m_values),
            "methods": [name.value for name in self.methods],
            "selector": self.selector.to_dict(),
            "bolasso_B": self.bolasso_B,
            "seed": self.seed,
        }
