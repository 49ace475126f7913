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
Inclusion and coefficient vectors, and the rules combining them across subsets.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from message_estimator.exceptions import ConfigError

logger = logging.getLogger(__name__)

#: Distance under which a Weiszfeld iterate is considered equal to a data point.
COINCIDENCE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class InclusionVector:
    """
    Feature inclusion indicator of a fitted model.
    """

    bits: np.ndarray  #: Boolean vector of length p.

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=bool).copy())

    @classmethod
    def from_indices(cls, p: int, indices: Iterable[int]) -> "InclusionVector":
        """
        Args:
            p (int): number of features.
            indices (Iterable[int]): included features.

        Returns:
            InclusionVector: the inclusion vector.
        """
        bits = np.zeros(p, dtype=bool)
        bits[list(indices)] = True
        return cls(bits)

    @classmethod
    def empty(cls, p: int) -> "InclusionVector":
        """
        Args:
            p (int): number of features.

        Returns:
            InclusionVector: the empty model.
        """
        return cls(np.zeros(p, dtype=bool))

    @property
    def p(self) -> int:
        """Number of features."""
        return self.bits.shape[0]

    @property
    def size(self) -> int:
        """Number of included features."""
        return int(self.bits.sum())

    @property
    def indices(self) -> np.ndarray:
        """Sorted indices of the included features."""
        return np.flatnonzero(self.bits)

    def key(self) -> Tuple[int, ...]:
        """
        Hashable key, the bits as a tuple of 0 and 1.

        Returns:
            Tuple[int, ...]: the key.
        """
        return tuple(int(b) for b in self.bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InclusionVector):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"InclusionVector({self.indices.tolist()}, p={self.p})"


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """
    Dense coefficient vector, zeros off the support, with its provenance.
    """

    values: np.ndarray  #: Coefficients of length p.
    intercept: float = 0.0  #: Unpenalized intercept.
    method: str = ""  #: Provenance tag.
    subset_id: Optional[int] = None  #: Subset the estimate comes from, if any.

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64).copy()
        if not np.all(np.isfinite(values)) or not np.isfinite(self.intercept):
            raise ConfigError("Coefficient vectors must have finite entries.")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def p(self) -> int:
        """Number of features."""
        return self.values.shape[0]

    def support(self) -> InclusionVector:
        """
        Returns:
            InclusionVector: the nonzero coordinates.
        """
        return InclusionVector(self.values != 0)

    def linear_predictor(self, x: np.ndarray) -> np.ndarray:
        """
        Args:
            x (np.ndarray): design matrix, n x p.

        Returns:
            np.ndarray: intercept + x @ values.
        """
        return self.intercept + x @ self.values

    def as_array(self) -> np.ndarray:
        """
        Returns:
            np.ndarray: the full parameter, intercept first.
        """
        return np.concatenate(([self.intercept], self.values))


def _check_lengths(vectors: Sequence, what: str) -> int:
    """
    Check that a collection is nonempty with equal lengths.

    Args:
        vectors (Sequence): inclusion or coefficient vectors.
        what (str): name used in error messages.

    Raises:
        ConfigError: if empty or lengths differ.

    Returns:
        int: the common length.
    """
    if len(vectors) == 0:
        raise ConfigError(f"Cannot aggregate an empty list of {what}.")
    lengths = {v.p for v in vectors}
    if len(lengths) != 1:
        raise ConfigError(f"Length mismatch among {what}: {sorted(lengths)}.")
    return lengths.pop()


def median_model(gammas: Sequence[InclusionVector]) -> InclusionVector:
    """
    Median model: include a feature when a strict majority of the subsets include it.

    An exact tie (m/2 votes for an even m) excludes the feature. The result
    minimizes the total Hamming distance to the inputs.

    Args:
        gammas (Sequence[InclusionVector]): inclusion vectors of the m subsets.

    Returns:
        InclusionVector: the median model.
    """
    _check_lengths(gammas, "inclusion vectors")
    votes = np.sum([g.bits for g in gammas], axis=0)
    return InclusionVector(2 * votes > len(gammas))


def average_coefficients(betas: Sequence[CoefficientVector]) -> CoefficientVector:
    """
    Coordinatewise mean of the coefficient vectors (and of the intercepts).

    Args:
        betas (Sequence[CoefficientVector]): estimates of the m subsets.

    Returns:
        CoefficientVector: the average.
    """
    _check_lengths(betas, "coefficient vectors")
    stacked = np.stack([b.as_array() for b in betas])
    mean = stacked.mean(axis=0)
    return CoefficientVector(values=mean[1:], intercept=mean[0], method="average")


def intersect_models(gammas: Sequence[InclusionVector]) -> InclusionVector:
    """
    Keep the features included by every model.

    Args:
        gammas (Sequence[InclusionVector]): inclusion vectors.

    Returns:
        InclusionVector: the intersection.
    """
    _check_lengths(gammas, "inclusion vectors")
    return InclusionVector(np.all([g.bits for g in gammas], axis=0))


def geometric_median_objective(z: np.ndarray, points: np.ndarray) -> float:
    """
    Sum of the Euclidean distances from z to the points.

    Args:
        z (np.ndarray): candidate, of dimension d.
        points (np.ndarray): points, m x d.

    Returns:
        float: the objective.
    """
    return float(np.linalg.norm(points - z, axis=1).sum())


def geometric_median(
    betas: Sequence[CoefficientVector], tol: float = 1e-9, max_iter: int = 1000
) -> CoefficientVector:
    """
    Geometric median of the estimates, computed on the full parameter (intercept included).

    Weiszfeld iterations with the Vardi-Zhang correction when an iterate hits a
    data point. Collinear inputs are reduced to a one dimensional median along
    their common line.

    Args:
        betas (Sequence[CoefficientVector]): estimates of the m subsets.
        tol (float, optional): stop when the step is smaller. Defaults to 1e-9.
        max_iter (int, optional): maximal number of iterations. Defaults to 1000.

    Returns:
        CoefficientVector: the geometric median.
    """
    _check_lengths(betas, "coefficient vectors")
    points = np.stack([b.as_array() for b in betas])
    center = points.mean(axis=0)
    _, singular, vt = np.linalg.svd(points - center, full_matrices=False)

    if singular[0] <= COINCIDENCE_TOL:
        z = points[0].copy()
    elif singular.shape[0] < 2 or singular[1] <= COINCIDENCE_TOL * singular[0]:
        direction = vt[0]
        z = center + np.median((points - center) @ direction) * direction
    else:
        z = _weiszfeld(points, center, tol, max_iter)

    # The best data point is a valid fallback for the objective guarantee.
    objectives = [geometric_median_objective(point, points) for point in points]
    best = int(np.argmin(objectives))
    if objectives[best] < geometric_median_objective(z, points):
        z = points[best].copy()
    return CoefficientVector(values=z[1:], intercept=z[0], method="geometric_median")


def _weiszfeld(points: np.ndarray, start: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    """
    Weiszfeld iterations with anchor correction.

    Args:
        points (np.ndarray): points, m x d.
        start (np.ndarray): starting point.
        tol (float): stopping step size.
        max_iter (int): maximal number of iterations.

    Returns:
        np.ndarray: the minimizer.
    """
    z = start.copy()
    for iteration in range(max_iter):
        distances = np.linalg.norm(points - z, axis=1)
        coincident = distances < COINCIDENCE_TOL
        weights = 1.0 / distances[~coincident]
        others = points[~coincident]
        target = weights @ others / weights.sum()
        if coincident.any():
            multiplicity = float(coincident.sum())
            pull = np.linalg.norm(weights @ (others - z))
            if pull <= multiplicity:
                logger.debug("Weiszfeld stopped on a data point after %d iterations.", iteration)
                return z
            ratio = multiplicity / pull
            new_z = (1.0 - ratio) * target + ratio * z
        else:
            new_z = target
        step = np.linalg.norm(new_z - z)
        z = new_z
        if step < tol:
            logger.debug("Weiszfeld converged after %d iterations.", iteration + 1)
            return z
    logger.warning("Weiszfeld did not converge in %d iterations.", max_iter)
    return z


def expand(values: np.ndarray, gamma: InclusionVector) -> np.ndarray:
    """
    Scatter coefficients fitted on the columns of gamma into a length p vector.

    Args:
        values (np.ndarray): coefficients of the selected columns.
        gamma (InclusionVector): selected columns.

    Returns:
        np.ndarray: dense vector of length p.
    """
    full = np.zeros(gamma.p)
    full[gamma.indices] = values
    return full
