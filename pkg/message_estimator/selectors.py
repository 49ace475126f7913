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
Feature selectors run on every subset.
"""
import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from math import comb
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from message_estimator.aggregation import InclusionVector
from message_estimator.base import GenericSelector
from message_estimator.dataset import Dataset, Task
from message_estimator.exceptions import ConfigError, NumericalError
from message_estimator.solvers import (
    FitResult,
    GicConfig,
    LassoConfig,
    gic_score,
    gic_select,
    gic_support_bound,
    lasso_cd,
    lasso_path,
    logistic_irls,
    logistic_lasso,
    logistic_lasso_path,
    ols_fit,
)

logger = logging.getLogger(__name__)

MAX_ENUMERATION = 10**6  #: Largest number of supports enumerated by the exhaustive GIC.


def refit(d: Dataset, gamma: InclusionVector) -> FitResult:
    """
    Unpenalized refit on a support: least squares for regression, logistic maximum likelihood for classification.

    Args:
        d (Dataset): dataset.
        gamma (InclusionVector): support.

    Raises:
        NumericalError: if the refit design is rank deficient.

    Returns:
        FitResult: the refit.
    """
    if d.task == Task.CLASSIFICATION:
        return logistic_irls(d, gamma)
    beta = ols_fit(d, gamma)
    resid = d.y - beta.linear_predictor(d.x)
    return FitResult(
        beta=beta,
        gamma=beta.support(),
        objective=float(resid @ resid) / d.n,
        iterations=1,
        converged=True,
    )


class LassoGicSelector(GenericSelector):
    """
    Lasso path followed by a GIC choice among the supports it visits (and the empty model).
    """

    lasso: LassoConfig  #: Configuration of the path.
    gic: GicConfig  #: GIC penalty.

    def __init__(self, lasso: LassoConfig = LassoConfig(), gic: GicConfig = GicConfig()) -> None:
        """
        Args:
            lasso (LassoConfig, optional): path configuration. Defaults to LassoConfig().
            gic (GicConfig, optional): GIC penalty. Defaults to GicConfig().
        """
        self.lasso = lasso
        self.gic = gic

    def select(self, d: Dataset) -> FitResult:
        """
        Run the path and return its first fit whose support minimizes the GIC.

        For classification the path stops once its support exceeds
        gic_support_bound, the largest size the GIC can select.

        Args:
            d (Dataset): dataset.

        Returns:
            FitResult: the selected fit.
        """
        if d.task == Task.CLASSIFICATION:
            bound = gic_support_bound(d, self.gic)
            lasso = self.lasso
            if lasso.max_active is None or bound < lasso.max_active:
                lasso = replace(lasso, max_active=bound)
            fits = logistic_lasso_path(d, lasso)
        else:
            fits = lasso_path(d, self.lasso)
        candidates = [InclusionVector.empty(d.p)] + [fit.gamma for fit in fits]
        chosen = gic_select(d, candidates, self.gic)
        logger.debug("GIC selected %d features among %d path points.", chosen.size, len(fits))
        for fit in fits:
            if fit.gamma == chosen:
                return fit
        # The empty model is not on a truncated or custom grid.
        return refit(d, chosen)

    def __str__(self) -> str:
        return f"Lasso path + GIC ({self.gic.penalty.value})"


class LassoFixedSelector(GenericSelector):
    """
    Lasso at a single penalty level.
    """

    lam: float  #: Penalty level.
    lasso: LassoConfig  #: Solver configuration.

    def __init__(self, lam: float, lasso: LassoConfig = LassoConfig()) -> None:
        """
        Args:
            lam (float): penalty level.
            lasso (LassoConfig, optional): solver configuration. Defaults to LassoConfig().
        """
        self.lam = lam
        self.lasso = lasso

    def select(self, d: Dataset) -> FitResult:
        """
        Args:
            d (Dataset): dataset.

        Returns:
            FitResult: the Lasso fit (logistic Lasso for classification).
        """
        if d.task == Task.CLASSIFICATION:
            return logistic_lasso(d, self.lam, self.lasso)
        return lasso_cd(d, self.lam, self.lasso)

    def __str__(self) -> str:
        return f"Lasso (lambda={self.lam:g})"


class GicExhaustiveSelector(GenericSelector):
    """
    Exhaustive GIC over every support of at most ``max_size`` features.
    """

    max_size: int  #: Largest support considered.
    gic: GicConfig  #: GIC penalty.

    def __init__(self, max_size: int, gic: GicConfig = GicConfig()) -> None:
        """
        Args:
            max_size (int): largest support considered.
            gic (GicConfig, optional): GIC penalty. Defaults to GicConfig().
        """
        self.max_size = max_size
        self.gic = gic

    def select(self, d: Dataset) -> FitResult:
        """
        Args:
            d (Dataset): dataset.

        Raises:
            NumericalError: if there are more than MAX_ENUMERATION supports.

        Returns:
            FitResult: refit on the selected support.
        """
        size = min(self.max_size, d.p)
        count = sum(comb(d.p, k) for k in range(size + 1))
        if count > MAX_ENUMERATION:
            raise NumericalError(
                f"{count} supports to enumerate, more than {MAX_ENUMERATION}: lower max_size."
            )
        candidates = [
            InclusionVector.from_indices(d.p, combination)
            for k in range(size + 1)
            for combination in itertools.combinations(range(d.p), k)
        ]
        chosen = gic_select(d, candidates, self.gic)
        fit = refit(d, chosen)
        return FitResult(
            beta=fit.beta,
            gamma=fit.gamma,
            objective=gic_score(d, chosen, self.gic),
            iterations=len(candidates),
            converged=fit.converged,
            separated=fit.separated,
        )

    def __str__(self) -> str:
        return f"Exhaustive GIC (max size {self.max_size})"


class FixedSupportSelector(GenericSelector):
    """
    Selector always returning the same support, refit on the data.
    """

    support: Tuple[int, ...]  #: Selected features.

    def __init__(self, support: Sequence[int]) -> None:
        """
        Args:
            support (Sequence[int]): selected features.
        """
        self.support = tuple(int(j) for j in support)

    def select(self, d: Dataset) -> FitResult:
        """
        Args:
            d (Dataset): dataset.

        Returns:
            FitResult: refit on the fixed support.
        """
        return refit(d, InclusionVector.from_indices(d.p, self.support))

    def __str__(self) -> str:
        return f"Fixed support {list(self.support)}"


class SelectorKind(Enum):
    """
    Selector families available in configurations.
    """

    LASSO_GIC = "lasso_gic"  #: LassoGicSelector.
    LASSO_FIXED = "lasso_fixed"  #: LassoFixedSelector.
    GIC_EXHAUSTIVE = "gic_exhaustive"  #: GicExhaustiveSelector.
    FIXED_SUPPORT = "fixed_support"  #: FixedSupportSelector.


@dataclass(frozen=True)
class SelectorConfig:
    """
    Configuration of a selector.
    """

    kind: SelectorKind = SelectorKind.LASSO_GIC  #: Selector family.
    lasso: LassoConfig = field(default_factory=LassoConfig)  #: Lasso solver configuration.
    gic: GicConfig = field(default_factory=GicConfig)  #: GIC penalty.
    lam: Optional[float] = None  #: Penalty level of lasso_fixed.
    max_size: int = 3  #: Largest support of gic_exhaustive.
    support: Tuple[int, ...] = ()  #: Support of fixed_support.

    def __post_init__(self) -> None:
        """
        Raises:
            ConfigError: if the selector parameters are missing or invalid.
        """
        if self.kind == SelectorKind.LASSO_FIXED and (self.lam is None or self.lam < 0):
            raise ConfigError("lasso_fixed needs a nonnegative lam.")
        if self.max_size < 0:
            raise ConfigError(f"max_size must be nonnegative, got {self.max_size}.")
        object.__setattr__(self, "support", tuple(int(j) for j in self.support))

    def build(self) -> GenericSelector:
        """
        Returns:
            GenericSelector: the configured selector.
        """
        if self.kind == SelectorKind.LASSO_GIC:
            return LassoGicSelector(self.lasso, self.gic)
        if self.kind == SelectorKind.LASSO_FIXED:
            assert self.lam is not None
            return LassoFixedSelector(self.lam, self.lasso)
        if self.kind == SelectorKind.GIC_EXHAUSTIVE:
            return GicExhaustiveSelector(self.max_size, self.gic)
        return FixedSupportSelector(self.support)

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        return {
            "kind": self.kind.value,
            "lasso": self.lasso.to_dict(),
            "gic": self.gic.to_dict(),
            "lam": self.lam,
            "max_size": self.max_size,
            "support": list(self.support),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SelectorConfig":
        """
        Args:
            data (Dict[str, Any]): JSON document.

        Raises:
            ConfigError: if a field is invalid.

        Returns:
            SelectorConfig: the configuration.
        """
        try:
            lam = data.get("lam")
            return cls(
                kind=SelectorKind(data.get("kind", SelectorKind.LASSO_GIC.value)),
                lasso=LassoConfig.from_dict(data.get("lasso") or {}),
                gic=GicConfig.from_dict(data.get("gic") or {}),
                lam=float(lam) if lam is not None else None,
                max_size=int(data.get("max_size", 3)),
                support=tuple(data.get("support") or ()),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid selector configuration: {exc}") from exc
