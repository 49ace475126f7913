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
Estimation methods: the message algorithm and its comparators.

Every distributed method runs its subset work on a worker pool; results are
collected by subset id and combined by a deterministic fold, so the output
does not depend on the number of workers.
"""
import dataclasses
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from message_estimator.aggregation import (
    CoefficientVector,
    InclusionVector,
    average_coefficients,
    geometric_median,
    intersect_models,
    median_model,
)
from message_estimator.base import GenericMethod, GenericSelector
from message_estimator.dataset import Dataset, PartitionPlan
from message_estimator.exceptions import ConfigError, NumericalError
from message_estimator.selectors import SelectorConfig, refit
from message_estimator.solvers import FitResult
from message_estimator.utils import derive_seed, get_method, run_parallel

logger = logging.getLogger(__name__)


class MethodName(Enum):
    """
    Estimation methods.
    """

    MESSAGE = "message"  #: Median selection subset aggregation.
    FULL_DATA = "full_data"  #: Selection and refit on the undivided data.
    AVERAGING = "averaging"  #: Per-subset selection and refit, averaged.
    GEOMETRIC_MEDIAN = "geometric_median"  #: Per-subset selection and refit, geometric median.
    BOLASSO = "bolasso"  #: Bootstrap Lasso, intersected supports.


@dataclass(frozen=True)
class MethodConfig:
    """
    Configuration of an estimation method.
    """

    method: MethodName = MethodName.MESSAGE  #: Method to run.
    selector: SelectorConfig = field(default_factory=SelectorConfig)  #: Per-subset selector.
    m: int = 1  #: Number of subsets.
    bolasso_B: int = 32  #: Number of bootstrap resamples of Bolasso.
    seed: int = 0  #: Seed of the partition and of the resamples.

    def __post_init__(self) -> None:
        """
        Raises:
            ConfigError: if the configuration is invalid.
        """
        if self.m < 1:
            raise ConfigError(f"m must be at least 1, got {self.m}.")
        if self.bolasso_B < 1:
            raise ConfigError(f"bolasso_B must be at least 1, got {self.bolasso_B}.")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}.")

    def replace(self, **changes: Any) -> "MethodConfig":
        """
        Args:
            changes (Any): fields to change.

        Returns:
            MethodConfig: a copy with the changes.
        """
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        return {
            "method": self.method.value,
            "selector": self.selector.to_dict(),
            "m": self.m,
            "bolasso_B": self.bolasso_B,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MethodConfig":
        """
        Args:
            data (Dict[str, Any]): JSON document.

        Raises:
            ConfigError: if a field is invalid.

        Returns:
            MethodConfig: the configuration.
        """
        try:
            return cls(
                method=MethodName(data.get("method", MethodName.MESSAGE.value)),
                selector=SelectorConfig.from_dict(data.get("selector") or {}),
                m=int(data.get("m", 1)),
                bolasso_B=int(data.get("bolasso_B", 32)),
                seed=int(data.get("seed", 0)),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid method configuration: {exc}") from exc


@dataclass(frozen=True)
class CommLedger:
    """
    Simulated communication between the subsets and the central computer.
    """

    uplink_bits: int = 0  #: Inclusion bits sent to the center.
    downlink_bits: int = 0  #: Inclusion bits broadcast back to the subsets.
    uplink_floats: int = 0  #: Coefficients sent to the center.
    rounds: int = 0  #: Number of communication rounds.

    def to_dict(self) -> Dict[str, int]:
        """
        Returns:
            Dict[str, int]: JSON compatible representation.
        """
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CommLedger":
        """
        Args:
            data (Dict[str, Any]): JSON document.

        Returns:
            CommLedger: the ledger.
        """
        return cls(**{key: int(value) for key, value in data.items()})


@dataclass(frozen=True, eq=False)
class MethodResult:
    """
    Output of an estimation method.
    """

    method: MethodName  #: Method that produced the result.
    beta: CoefficientVector  #: Final coefficients.
    gamma: InclusionVector  #: Final model.
    ledger: CommLedger  #: Communication ledger.
    wall_time: float  #: Wall time, in seconds.
    m: int  #: Number of subsets (1 for non distributed methods).
    per_subset: List[FitResult] = field(default_factory=list)  #: Selection fits (subsets or resamples).
    refits: List[CoefficientVector] = field(default_factory=list)  #: Per-subset refits.
    empty_model: bool = False  #: The final model is empty.

    def to_dict(self, column_names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        """
        JSON compatible representation.

        Args:
            column_names (Optional[Sequence[str]], optional): feature names to report the selected features. Defaults to None.

        Returns:
            Dict[str, Any]: beta, gamma, ledger, timing and per-subset summaries.
        """
        selected = self.gamma.indices.tolist()
        res: Dict[str, Any] = {
            "method": self.method.value,
            "m": self.m,
            "intercept": self.beta.intercept,
            "beta": self.beta.values.tolist(),
            "gamma": selected,
            "ledger": self.ledger.to_dict(),
            "wall_time": self.wall_time,
            "empty_model": self.empty_model,
            "per_subset": [
                {
                    "subset": i,
                    "gamma": fit.gamma.indices.tolist(),
                    "lambda": fit.lam,
                    "iterations": fit.iterations,
                    "converged": fit.converged,
                    "separated": fit.separated,
                }
                for i, fit in enumerate(self.per_subset)
            ],
        }
        if column_names is not None:
            res["selected_features"] = [column_names[j] for j in selected]
        return res


def _ledger(method: MethodName, m: int, p: int, model_size: int) -> CommLedger:
    """
    Communication of a method.

    Args:
        method (MethodName): method.
        m (int): number of subsets.
        p (int): number of features.
        model_size (int): size of the final model.

    Returns:
        CommLedger: the ledger.
    """
    if method == MethodName.MESSAGE:
        return CommLedger(
            uplink_bits=m * p, downlink_bits=m * p, uplink_floats=m * model_size, rounds=2
        )
    if method in (MethodName.AVERAGING, MethodName.GEOMETRIC_MEDIAN):
        return CommLedger(uplink_floats=m * p, rounds=1)
    return CommLedger()


def communication_cost(result: MethodResult) -> CommLedger:
    """
    Communication ledger of a result, recomputed from its method, m, p and model size.

    Args:
        result (MethodResult): result of a method.

    Returns:
        CommLedger: the ledger.
    """
    return _ledger(result.method, result.m, result.gamma.p, result.gamma.size)


def _select_task(selector: GenericSelector, d: Dataset, subset_id: int) -> FitResult:
    """
    Worker task: selection on one subset.

    Raises:
        NumericalError: naming the subset, if the selection fails.
    """
    try:
        return selector.select(d)
    except NumericalError as exc:
        raise NumericalError(
            f"Selection failed on subset {subset_id}: {exc}", subset=subset_id
        ) from exc


def _refit_task(d: Dataset, gamma: InclusionVector, subset_id: int) -> CoefficientVector:
    """
    Worker task: refit on one subset.

    Raises:
        NumericalError: naming the subset, if the refit is rank deficient.
    """
    try:
        fit = refit(d, gamma)
    except NumericalError as exc:
        raise NumericalError(
            f"Refit failed on subset {subset_id}: {exc}", subset=subset_id
        ) from exc
    if fit.separated:
        logger.warning("Refit on subset %d is separated.", subset_id)
    return dataclasses.replace(fit.beta, subset_id=subset_id)


def _select_and_refit_task(
    selector: GenericSelector, d: Dataset, subset_id: int
) -> Tuple[FitResult, CoefficientVector]:
    """
    Worker task: selection then refit on the selected support of one subset.
    """
    fit = _select_task(selector, d, subset_id)
    return fit, _refit_task(d, fit.gamma, subset_id)


def _check_plan(d: Dataset, cfg: MethodConfig, plan: Optional[PartitionPlan]) -> PartitionPlan:
    """
    Raises:
        ConfigError: if the plan is missing or does not match the data and the configuration.

    Returns:
        PartitionPlan: the plan.
    """
    if plan is None:
        raise ConfigError(f"Method {cfg.method.value} needs a partition plan.")
    if plan.m != cfg.m:
        raise ConfigError(f"Plan has {plan.m} subsets but the configuration asks for {cfg.m}.")
    if plan.n != d.n:
        raise ConfigError(f"Plan covers {plan.n} rows but the dataset has {d.n}.")
    return plan


def _subsets(d: Dataset, plan: PartitionPlan) -> List[Dataset]:
    """
    Returns:
        List[Dataset]: the subsets, ordered by subset id.
    """
    return [d.subset(plan.indices(i)) for i in range(plan.m)]


class MessageMethod(GenericMethod):
    """
    Median selection subset aggregation.

    Each subset selects a model, the center takes the median model and
    broadcasts it, each subset refits on it and the center averages the refits.
    """

    name = MethodName.MESSAGE.value

    def run(
        self,
        d: Dataset,
        cfg: MethodConfig,
        plan: Optional[PartitionPlan] = None,
        threads: int = 1,
    ) -> MethodResult:
        """
        Args:
            d (Dataset): full dataset.
            cfg (MethodConfig): configuration.
            plan (Optional[PartitionPlan], optional): partition with cfg.m subsets. Defaults to None.
            threads (int, optional): number of workers. Defaults to 1.

        Raises:
            ConfigError: if the plan does not match.
            NumericalError: if a refit is rank deficient, naming the subset.

        Returns:
            MethodResult: the result.
        """
        start = time.perf_counter()
        plan = _check_plan(d, cfg, plan)
        subsets = _subsets(d, plan)
        selector = cfg.selector.build()

        selections = run_parallel(
            _select_task, [(selector, sub, i) for i, sub in enumerate(subsets)], threads
        )
        gamma = median_model([fit.gamma for fit in selections])
        logger.info("Median model over %d subsets has %d features.", plan.m, gamma.size)
        empty = gamma.size == 0
        if empty:
            logger.warning("The median model is empty.")

        refits = run_parallel(
            _refit_task, [(sub, gamma, i) for i, sub in enumerate(subsets)], threads
        )
        beta = dataclasses.replace(average_coefficients(refits), method=self.name)
        return MethodResult(
            method=MethodName.MESSAGE,
            beta=beta,
            gamma=gamma,
            ledger=_ledger(MethodName.MESSAGE, plan.m, d.p, gamma.size),
            wall_time=time.perf_counter() - start,
            m=plan.m,
            per_subset=list(selections),
            refits=list(refits),
            empty_model=empty,
        )


class FullDataMethod(GenericMethod):
    """
    Selection and refit on the undivided data.
    """

    name = MethodName.FULL_DATA.value
    distributed = False

    def run(
        self,
        d: Dataset,
        cfg: MethodConfig,
        plan: Optional[PartitionPlan] = None,
        threads: int = 1,
    ) -> MethodResult:
        """
        Args:
            d (Dataset): full dataset.
            cfg (MethodConfig): configuration.
            plan (Optional[PartitionPlan], optional): ignored. Defaults to None.
            threads (int, optional): ignored. Defaults to 1.

        Returns:
            MethodResult: the result.
        """
        start = time.perf_counter()
        fit, beta = _select_and_refit_task(cfg.selector.build(), d, 0)
        beta = dataclasses.replace(beta, method=self.name, subset_id=None)
        gamma = fit.gamma
        if gamma.size == 0:
            logger.warning("The full data model is empty.")
        return MethodResult(
            method=MethodName.FULL_DATA,
            beta=beta,
            gamma=gamma,
            ledger=CommLedger(),
            wall_time=time.perf_counter() - start,
            m=1,
            per_subset=[fit],
            refits=[beta],
            empty_model=gamma.size == 0,
        )


class _SubsetCombiner(GenericMethod):
    """
    Per-subset selection and refit on each subset's own model, then a combining rule.
    """

    method: MethodName
    combine: Callable[[Sequence[CoefficientVector]], CoefficientVector]

    def run(
        self,
        d: Dataset,
        cfg: MethodConfig,
        plan: Optional[PartitionPlan] = None,
        threads: int = 1,
    ) -> MethodResult:
        """
        Args:
            d (Dataset): full dataset.
            cfg (MethodConfig): configuration.
            plan (Optional[PartitionPlan], optional): partition with cfg.m subsets. Defaults to None.
            threads (int, optional): number of workers. Defaults to 1.

        Returns:
            MethodResult: the result, whose model is the support of the combined vector.
        """
        start = time.perf_counter()
        plan = _check_plan(d, cfg, plan)
        selector = cfg.selector.build()
        outputs = run_parallel(
            _select_and_refit_task,
            [(selector, sub, i) for i, sub in enumerate(_subsets(d, plan))],
            threads,
        )
        selections = [fit for fit, _ in outputs]
        refits = [beta for _, beta in outputs]
        beta = dataclasses.replace(type(self).combine(refits), method=self.name)
        gamma = beta.support()
        return MethodResult(
            method=self.method,
            beta=beta,
            gamma=gamma,
            ledger=_ledger(self.method, plan.m, d.p, gamma.size),
            wall_time=time.perf_counter() - start,
            m=plan.m,
            per_subset=selections,
            refits=refits,
            empty_model=gamma.size == 0,
        )


class AveragingMethod(_SubsetCombiner):
    """
    Average of the per-subset refits.
    """

    name = MethodName.AVERAGING.value
    method = MethodName.AVERAGING
    combine = staticmethod(average_coefficients)


class GeometricMedianMethod(_SubsetCombiner):
    """
    Geometric median of the per-subset refits.
    """

    name = MethodName.GEOMETRIC_MEDIAN.value
    method = MethodName.GEOMETRIC_MEDIAN
    combine = staticmethod(geometric_median)


def bootstrap_indices(n: int, seed: int, b: int) -> np.ndarray:
    """
    Rows of the b-th bootstrap resample: n draws with replacement.

    Args:
        n (int): number of rows.
        seed (int): base seed.
        b (int): resample id.

    Returns:
        np.ndarray: row indices.
    """
    rng = np.random.default_rng(derive_seed(seed, "bolasso", b))
    return rng.integers(0, n, size=n)


class BolassoMethod(GenericMethod):
    """
    Bootstrap Lasso: selection on bootstrap resamples, intersection, refit on the full data.
    """

    name = MethodName.BOLASSO.value
    distributed = False

    resample: Callable[[int, int, int], np.ndarray]  #: Resampling rule (n, seed, b) -> rows.

    def __init__(self, resample: Callable[[int, int, int], np.ndarray] = bootstrap_indices) -> None:
        """
        Args:
            resample (Callable[[int, int, int], np.ndarray], optional): resampling rule. Defaults to bootstrap_indices.
        """
        self.resample = resample

    def run(
        self,
        d: Dataset,
        cfg: MethodConfig,
        plan: Optional[PartitionPlan] = None,
        threads: int = 1,
    ) -> MethodResult:
        """
        Args:
            d (Dataset): full dataset.
            cfg (MethodConfig): configuration, with bolasso_B resamples.
            plan (Optional[PartitionPlan], optional): ignored. Defaults to None.
            threads (int, optional): number of workers. Defaults to 1.

        Returns:
            MethodResult: the result.
        """
        start = time.perf_counter()
        selector = cfg.selector.build()
        resamples = [d.subset(self.resample(d.n, cfg.seed, b)) for b in range(cfg.bolasso_B)]
        selections = run_parallel(
            _select_task, [(selector, sub, b) for b, sub in enumerate(resamples)], threads
        )
        gamma = intersect_models([fit.gamma for fit in selections])
        if gamma.size == 0:
            logger.warning("The Bolasso intersection is empty.")
        beta = _refit_task(d, gamma, 0)
        beta = dataclasses.replace(beta, method=self.name, subset_id=None)
        return MethodResult(
            method=MethodName.BOLASSO,
            beta=beta,
            gamma=gamma,
            ledger=CommLedger(),
            wall_time=time.perf_counter() - start,
            m=1,
            per_subset=list(selections),
            refits=[beta],
            empty_model=gamma.size == 0,
        )


def run_message(
    d: Dataset, cfg: MethodConfig, plan: PartitionPlan, threads: int = 1
) -> MethodResult:
    """
    Run the message algorithm.

    Args:
        d (Dataset): full dataset.
        cfg (MethodConfig): configuration.
        plan (PartitionPlan): partition with cfg.m subsets.
        threads (int, optional): number of workers. Defaults to 1.

    Returns:
        MethodResult: the result.
    """
    return MessageMethod().run(d, cfg, plan, threads)


def run_full_data(d: Dataset, cfg: MethodConfig, threads: int = 1) -> MethodResult:
    """
    Run selection and refit on the undivided data.

    Args:
        d (Dataset): full dataset.
        cfg (MethodConfig): configuration.
        threads (int, optional): ignored. Defaults to 1.

    Returns:
        MethodResult: the result.
    """
    return FullDataMethod().run(d, cfg, None, threads)


def run_averaging(
    d: Dataset, cfg: MethodConfig, plan: PartitionPlan, threads: int = 1
) -> MethodResult:
    """
    Run the averaging comparator.

    Args:
        d (Dataset): full dataset.
        cfg (MethodConfig): configuration.
        plan (PartitionPlan): partition with cfg.m subsets.
        threads (int, optional): number of workers. Defaults to 1.

    Returns:
        MethodResult: the result.
    """
    return AveragingMethod().run(d, cfg, plan, threads)


def run_geometric_median(
    d: Dataset, cfg: MethodConfig, plan: PartitionPlan, threads: int = 1
) -> MethodResult:
    """
    Run the geometric median comparator.

    Args:
        d (Dataset): full dataset.
        cfg (MethodConfig): configuration.
        plan (PartitionPlan): partition with cfg.m subsets.
        threads (int, optional): number of workers. Defaults to 1.

    Returns:
        MethodResult: the result.
    """
    return GeometricMedianMethod().run(d, cfg, plan, threads)


def run_bolasso(
    d: Dataset,
    cfg: MethodConfig,
    threads: int = 1,
    resample: Callable[[int, int, int], np.ndarray] = bootstrap_indices,
) -> MethodResult:
    """
    Run the bootstrap Lasso comparator.

    Args:
        d (Dataset): full dataset.
        cfg (MethodConfig): configuration.
        threads (int, optional): number of workers. Defaults to 1.
        resample (Callable[[int, int, int], np.ndarray], optional): resampling rule. Defaults to bootstrap_indices.

    Returns:
        MethodResult: the result.
    """
    return BolassoMethod(resample).run(d, cfg, None, threads)


def run_method(
    d: Dataset, cfg: MethodConfig, plan: Optional[PartitionPlan] = None, threads: int = 1
) -> MethodResult:
    """
    Run the method named in the configuration, looked up in the method registry.

    Args:
        d (Dataset): full dataset.
        cfg (MethodConfig): configuration.
        plan (Optional[PartitionPlan], optional): partition, for distributed methods. Defaults to None.
        threads (int, optional): number of workers. Defaults to 1.

    Returns:
        MethodResult: the result.
    """
    method = get_method(cfg.method.value)
    logger.info("Running %s.", method)
    return method.run(d, cfg, plan if method.distributed else None, threads)
