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
Computable checks of the estimation and selection consistency conditions,
and the preconditioner for elliptical designs with more features than rows.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import comb

from message_estimator.dataset import Dataset, Task
from message_estimator.exceptions import ConfigError, NumericalError

logger = logging.getLogger(__name__)

#: Largest number of supports enumerated by check_a4.
MAX_ENUMERATION = 10**6

#: Number of supports whose Gram matrices are decomposed in one batch.
BATCH_SIZE = 4096

#: Relative eigenvalue under which a matrix is treated as singular.
SINGULAR_TOL = 1e-12


@dataclass
class ConditionReport:
    """
    Estimated constants of the consistency conditions.

    The sparse Riesz constant is computed on the Gram matrix divided by n.
    """

    v1_hat: float  #: Largest column energy, max_j x_j^T x_j / n.
    v2_hat: float  #: Smallest eigenvalue of the support Gram matrix divided by n.
    irrepresentable_stat: Optional[float]  #: Irrepresentable statistic, None if the support Gram is singular.
    eta_hat: Optional[float]  #: 1 - irrepresentable_stat.
    sparse_riesz_rho: Optional[float] = None  #: Sparse Riesz constant, None if not computed.
    sparse_riesz_estimated: bool = False  #: The sparse Riesz constant comes from sampled supports.
    per_subset: bool = False  #: The report is about one subset of the data.
    subset_id: Optional[int] = None  #: Subset id, if per_subset.
    warnings: List[str] = field(default_factory=list)  #: Failed checks.

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        return {
            "v1_hat": self.v1_hat,
            "v2_hat": self.v2_hat,
            "irrepresentable_stat": self.irrepresentable_stat,
            "eta_hat": self.eta_hat,
            "sparse_riesz_rho": self.sparse_riesz_rho,
            "sparse_riesz_estimated": self.sparse_riesz_estimated,
            "gram_normalization": "n",
            "per_subset": self.per_subset,
            "subset_id": self.subset_id,
            "warnings": list(self.warnings),
        }


def _support(d: Dataset, support: Sequence[int]) -> np.ndarray:
    """
    Raises:
        ConfigError: if the support is empty, out of range or larger than n.

    Returns:
        np.ndarray: sorted unique support indices.
    """
    idx = np.unique(np.asarray(support, dtype=int))
    if idx.size == 0:
        raise ConfigError("The support must be nonempty.")
    if idx[0] < 0 or idx[-1] >= d.p:
        raise ConfigError(f"Support indices must be in [0, {d.p}).")
    if idx.size > d.n:
        raise ConfigError(f"Support of size {idx.size} is larger than n = {d.n}.")
    return idx


def check_a1(d: Dataset, support: Sequence[int]) -> Tuple[float, float]:
    """
    Column energy and smallest eigenvalue of the support Gram matrix.

    Args:
        d (Dataset): dataset.
        support (Sequence[int]): support indices.

    Returns:
        Tuple[float, float]: (v1_hat, v2_hat).
    """
    idx = _support(d, support)
    v1_hat = float(np.max(np.einsum("ij,ij->j", d.x, d.x)) / d.n)
    xs = d.x[:, idx]
    gram = xs.T @ xs / d.n
    v2_hat = float(linalg.eigh(gram, eigvals_only=True)[0])
    return v1_hat, v2_hat


def check_a3(d: Dataset, support: Sequence[int], signs: Sequence[float]) -> float:
    """
    Irrepresentable statistic max_{j not in S} |x_j^T X_S (X_S^T X_S)^-1 sign(beta_S)|.

    Args:
        d (Dataset): dataset.
        support (Sequence[int]): support indices.
        signs (Sequence[float]): signs of the coefficients on the support, in sorted support order.

    Raises:
        ConfigError: if signs and support lengths differ.
        NumericalError: if the support Gram matrix is singular.

    Returns:
        float: the statistic, 0 when the support is every feature.
    """
    idx = _support(d, support)
    signs = np.sign(np.asarray(signs, dtype=np.float64))
    if signs.shape != idx.shape:
        raise ConfigError(f"{signs.shape[0]} signs for a support of size {idx.size}.")
    xs = d.x[:, idx]
    gram = xs.T @ xs
    eigenvalues = linalg.eigh(gram, eigvals_only=True)
    if eigenvalues[0] <= SINGULAR_TOL * max(eigenvalues[-1], 1.0):
        raise NumericalError("The support Gram matrix is singular.")
    complement = np.setdiff1d(np.arange(d.p), idx)
    if complement.size == 0:
        return 0.0
    direction = linalg.solve(gram, signs, assume_a="pos")
    stat = np.abs(d.x[:, complement].T @ (xs @ direction))
    return float(stat.max())


def _min_eigenvalue(gram: np.ndarray, subsets: np.ndarray) -> float:
    """
    Smallest eigenvalue over the principal submatrices of the Gram matrix.

    Args:
        gram (np.ndarray): Gram matrix divided by n.
        subsets (np.ndarray): supports, one per row.

    Returns:
        float: the minimum.
    """
    submatrices = gram[subsets[:, :, None], subsets[:, None, :]]
    return float(np.linalg.eigvalsh(submatrices)[:, 0].min())


def check_a4(d: Dataset, s: int) -> float:
    """
    Sparse Riesz constant: minimum over all supports of size at most s of the
    smallest eigenvalue of X_pi^T X_pi / n.

    Since eigenvalues of principal submatrices interlace, supports of size
    exactly min(s, p) attain the minimum.

    Args:
        d (Dataset): dataset.
        s (int): largest support size.

    Raises:
        ConfigError: if s < 1.
        NumericalError: if there are more than MAX_ENUMERATION supports.

    Returns:
        float: the constant.
    """
    if s < 1:
        raise ConfigError(f"s must be at least 1, got {s}.")
    size = min(s, d.p)
    count = int(comb(d.p, size, exact=True))
    if count > MAX_ENUMERATION:
        raise NumericalError(
            f"check_a4 would enumerate {count} supports (limit {MAX_ENUMERATION}), "
            "reduce s or p or use sparse_riesz_estimate."
        )
    gram = d.x.T @ d.x / d.n
    rho = np.inf
    supports = itertools.combinations(range(d.p), size)
    while True:
        batch = np.array(list(itertools.islice(supports, BATCH_SIZE)), dtype=int)
        if batch.size == 0:
            break
        rho = min(rho, _min_eigenvalue(gram, batch))
    return float(rho)


def sparse_riesz_estimate(d: Dataset, s: int, n_samples: int = 10000, seed: int = 0) -> float:
    """
    Sampled sparse Riesz constant: minimum over random supports of size min(s, p).

    The result is an upper bound of check_a4.

    Args:
        d (Dataset): dataset.
        s (int): support size.
        n_samples (int, optional): number of sampled supports. Defaults to 10000.
        seed (int, optional): seed of the sampler. Defaults to 0.

    Raises:
        ConfigError: if s or n_samples is smaller than 1.

    Returns:
        float: the estimate.
    """
    if s < 1 or n_samples < 1:
        raise ConfigError("s and n_samples must be at least 1.")
    size = min(s, d.p)
    rng = np.random.default_rng(seed)
    gram = d.x.T @ d.x / d.n
    rho = np.inf
    for start in range(0, n_samples, BATCH_SIZE):
        count = min(BATCH_SIZE, n_samples - start)
        batch = np.argsort(rng.random((count, d.p)), axis=1)[:, :size]
        rho = min(rho, _min_eigenvalue(gram, np.sort(batch, axis=1)))
    return float(rho)


def precondition_elliptical(d: Dataset) -> Dataset:
    """
    Return (A X, A y) with A = (X X^T / p)^(-1/2), so that the new design
    satisfies X X^T = p I.

    Args:
        d (Dataset): regression dataset with p > n.

    Raises:
        ConfigError: if p <= n or the dataset is a classification dataset.
        NumericalError: if X X^T is singular.

    Returns:
        Dataset: the preconditioned dataset.
    """
    if d.task != Task.REGRESSION:
        raise ConfigError("The preconditioner only applies to regression datasets.")
    if d.p <= d.n:
        raise ConfigError(f"The preconditioner needs p > n, got p = {d.p}, n = {d.n}.")
    eigenvalues, vectors = linalg.eigh(d.x @ d.x.T / d.p)
    if eigenvalues[0] <= SINGULAR_TOL * eigenvalues[-1]:
        raise NumericalError("X X^T is singular.")
    inv_sqrt = (vectors / np.sqrt(eigenvalues)) @ vectors.T
    return Dataset(
        x=inv_sqrt @ d.x,
        y=inv_sqrt @ d.y,
        column_names=list(d.column_names),
        task=d.task,
        response_name=d.response_name,
    )


def condition_report(
    d: Dataset,
    support: Sequence[int],
    signs: Sequence[float],
    s: Optional[int] = None,
    subset_id: Optional[int] = None,
    seed: int = 0,
) -> ConditionReport:
    """
    Evaluate every check on a dataset. Failed checks are reported as warnings
    and never raise.

    Args:
        d (Dataset): dataset (the full data or one subset).
        support (Sequence[int]): support indices.
        signs (Sequence[float]): signs on the support.
        s (Optional[int], optional): sparse Riesz size, None to skip. Defaults to None.
        subset_id (Optional[int], optional): subset id when d is a subset. Defaults to None.
        seed (int, optional): seed of the sampled sparse Riesz estimate. Defaults to 0.

    Returns:
        ConditionReport: the report.
    """
    warnings: List[str] = []
    v1_hat, v2_hat = check_a1(d, support)
    if v2_hat < 1e-6:
        warnings.append(f"Smallest support eigenvalue {v2_hat:.3g} is below 1e-6.")

    stat: Optional[float]
    try:
        stat = check_a3(d, support, signs)
    except NumericalError as exc:
        stat = None
        warnings.append(f"Irrepresentable statistic not computable: {exc}")
    if stat is not None and stat >= 1.0:
        warnings.append(f"Irrepresentable statistic {stat:.3g} is not below 1.")

    rho: Optional[float] = None
    estimated = False
    if s is not None:
        try:
            rho = check_a4(d, s)
        except NumericalError:
            rho = sparse_riesz_estimate(d, s, seed=seed)
            estimated = True

    for message in warnings:
        if subset_id is None:
            logger.warning("%s", message)
        else:
            logger.warning("Subset %d: %s", subset_id, message)
    return ConditionReport(
        v1_hat=v1_hat,
        v2_hat=v2_hat,
        irrepresentable_stat=stat,
        eta_hat=None if stat is None else 1.0 - stat,
        sparse_riesz_rho=rho,
        sparse_riesz_estimated=estimated,
        per_subset=subset_id is not None,
        subset_id=subset_id,
        warnings=warnings,
    )
