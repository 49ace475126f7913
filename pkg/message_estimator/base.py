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
Abstract base classes for selectors and estimation methods.
"""
import abc
from typing import TYPE_CHECKING, Optional

from message_estimator.dataset import Dataset, PartitionPlan

if TYPE_CHECKING:
    from message_estimator.pipeline import MethodConfig, MethodResult
    from message_estimator.solvers import FitResult


class GenericSelector(abc.ABC):
    """
    Abstract class for per-subset feature selectors.

    A selector should implement:

    * `select` : run the selection rule on a dataset and return the fit whose support is the selected model.
    """

    @abc.abstractmethod
    def select(self, d: Dataset) -> "FitResult":
        """
        Select a model on the dataset.

        Args:
            d (Dataset): dataset (usually one subset of the full data).

        Returns:
            FitResult: fit whose gamma is the selected model.
        """

    def __str__(self) -> str:
        return "Generic selector"


class GenericMethod(abc.ABC):
    """
    Abstract class for estimation methods.

    A method should define:

    * `name` : the value of the method in the configuration.
    * `distributed` : whether the method works on a partition of the data.
    * `run` : run the method and return its result.
    """

    name: str = ""  #: Method name used in configurations.
    distributed: bool = True  #: Whether run needs a partition plan.

    @abc.abstractmethod
    def run(
        self,
        d: Dataset,
        cfg: "MethodConfig",
        plan: Optional[PartitionPlan] = None,
        threads: int = 1,
    ) -> "MethodResult":
        """
        Run the method.

        Args:
            d (Dataset): full dataset.
            cfg (MethodConfig): method configuration.
            plan (Optional[PartitionPlan], optional): partition, for distributed methods. Defaults to None.
            threads (int, optional): number of workers, 0 for all cores. Defaults to 1.

        Returns:
            MethodResult: the result.
        """

    def __str__(self) -> str:
        return f"Method {self.name}"
