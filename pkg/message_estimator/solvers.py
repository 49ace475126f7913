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
Per-subset estimation primitives.

The Lasso objective is ``(1/n) ||y - b0 - X beta||^2 + lambda ||beta||_1`` with an
unpenalized intercept ``b0``. It is solved by cyclic coordinate descent with
covariance updates on a working scale where the columns are centered and,
optionally, divided by their population standard deviation. The penalized
logistic regression minimizes ``(1/n) NLL(b0, beta) + lambda ||beta||_1`` by
proximal Newton steps whose quadratic subproblems reuse the same solver, on
the working set left by the sequential strong rule.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.special import expit

from message_estimator.aggregation import CoefficientVector, InclusionVector, expand
from message_estimator.dataset import Dataset, Task
from message_estimator.exceptions import ConfigError, DataError, NumericalError

logger = logging.getLogger(__name__)

KKT_TOL = 1e-6  #: Tolerance of the Lasso optimality conditions.
STATIONARITY_TOL = 1e-6  #: Target stationarity residual of the logistic Lasso.
CONDITION_LIMIT = 1e12  #: Largest accepted condition number of a normal matrix.
SEPARATION_BOUND = 1e3  #: Coefficient size flagging complete separation.
SEPARATION_MARGIN = 10.0  #: Margin above which every observation counts as separated.
MAX_HALVINGS = 30  #: Step-halving cap of the Newton line searches.
MAX_NEWTON_STEPS = 100  #: Outer iteration cap of the logistic Lasso.
RSS_FLOOR = 1e-20  #: Relative residual sum of squares treated as an exact fit.


class GicPenalty(Enum):
    """
    Choice of the GIC penalty weight.
    """

    RIC = "ric"  #: 2 (log p + log log p).
    EBIC = "ebic"  #: 2 log p + log n.
    BIC = "bic"  #: log n.
    CUSTOM = "custom"  #: User supplied weight.


@dataclass(frozen=True)
class LassoConfig:
    """
    Configuration of the Lasso solvers.
    """

    lambda_grid: Optional[Tuple[float, ...]] = None  #: Descending grid, automatic when None.
    tol: float = 1e-7  #: Tolerance on the largest coordinate change of a sweep.
    max_iter: int = 10000  #: Maximal number of sweeps.
    standardize_internally: bool = True  #: Penalize coefficients of standardized columns.
    path_length: int = 100  #: Number of points of the automatic grid.
    lambda_min_ratio: float = 1e-3  #: Smallest automatic lambda, relative to lambda_max.
    max_active: Optional[int] = None  #: Stop the path once more features are active.

    def __post_init__(self) -> None:
        """
        Raises:
            ConfigError: if the configuration is invalid.
        """
        if self.lambda_grid is not None:
            grid = np.asarray(self.lambda_grid, dtype=float)
            if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) >= 0):
                raise ConfigError("lambda_grid must be strictly descending positive reals.")
            object.__setattr__(self, "lambda_grid", tuple(float(v) for v in grid))
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}.")
        if self.max_iter < 1 or self.path_length < 1:
            raise ConfigError("max_iter and path_length must be at least 1.")
        if not 0 < self.lambda_min_ratio < 1:
            raise ConfigError(f"lambda_min_ratio must be in (0, 1), got {self.lambda_min_ratio}.")
        if self.max_active is not None and self.max_active < 1:
            raise ConfigError(f"max_active must be at least 1, got {self.max_active}.")

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        return {
            "lambda_grid": list(self.lambda_grid) if self.lambda_grid is not None else None,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "standardize_internally": self.standardize_internally,
            "path_length": self.path_length,
            "lambda_min_ratio": self.lambda_min_ratio,
            "max_active": self.max_active,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LassoConfig":
        """
        Args:
            data (Dict[str, Any]): JSON document.

        Raises:
            ConfigError: if a field is invalid.

        Returns:
            LassoConfig: the configuration.
        """
        try:
            grid = data.get("lambda_grid")
            return cls(
                lambda_grid=tuple(grid) if grid is not None else None,
                tol=float(data.get("tol", 1e-7)),
                max_iter=int(data.get("max_iter", 10000)),
                standardize_internally=bool(data.get("standardize_internally", True)),
                path_length=int(data.get("path_length", 100)),
                lambda_min_ratio=float(data.get("lambda_min_ratio", 1e-3)),
                max_active=data.get("max_active"),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid Lasso configuration: {exc}") from exc


@dataclass(frozen=True)
class GicConfig:
    """
    Configuration of the generalized information criterion.
    """

    penalty: GicPenalty = GicPenalty.RIC  #: Penalty family.
    custom_lambda: Optional[float] = None  #: Weight used with GicPenalty.CUSTOM.

    def __post_init__(self) -> None:
        """
        Raises:
            ConfigError: if a custom penalty has no positive weight.
        """
        if self.penalty == GicPenalty.CUSTOM and not (
            self.custom_lambda is not None and self.custom_lambda > 0
        ):
            raise ConfigError("A custom GIC penalty needs a positive custom_lambda.")

    def weight(self, n: int, p: int) -> float:
        """
        Penalty weight per selected feature.

        Args:
            n (int): number of rows.
            p (int): number of features.

        Returns:
            float: the weight.
        """
        if self.penalty == GicPenalty.RIC:
            # log log p is undefined below e.
            return 2.0 * (np.log(p) + np.log(np.log(max(p, np.e))))
        if self.penalty == GicPenalty.EBIC:
            return 2.0 * np.log(p) + np.log(n)
        if self.penalty == GicPenalty.BIC:
            return float(np.log(n))
        assert self.custom_lambda is not None
        return float(self.custom_lambda)

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: JSON compatible representation.
        """
        return {"penalty": self.penalty.value, "custom_lambda": self.custom_lambda}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GicConfig":
        """
        Args:
            data (Dict[str, Any]): JSON document.

        Raises:
            ConfigError: if a field is invalid.

        Returns:
            GicConfig: the configuration.
        """
        try:
            custom = data.get("custom_lambda")
            return cls(
                penalty=GicPenalty(data.get("penalty", GicPenalty.RIC.value)),
                custom_lambda=float(custom) if custom is not None else None,
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid GIC configuration: {exc}") from exc


@dataclass(frozen=True, eq=False)
class FitResult:
    """
    Outcome of a solver call.
    """

    beta: CoefficientVector  #: Coefficients on the raw scale.
    gamma: InclusionVector  #: Support of beta.
    objective: float  #: Objective value at the solution.
    iterations: int  #: Sweeps (Lasso) or Newton steps (logistic).
    converged: bool  #: Whether the stopping rule was met before the iteration cap.
    lam: Optional[float] = None  #: Penalty level, for penalized fits.
    separated: bool = False  #: Complete separation detected (logistic fits).


@dataclass(frozen=True, eq=False)
class _Working:
    """
    Quadratic problem ``beta' G beta - 2 c' beta + zz`` on the working scale.
    """

    gram: np.ndarray
    corr: np.ndarray
    zz: float
    x_mean: np.ndarray
    z_mean: float


def _check_finite(d: Dataset) -> None:
    """
    Raises:
        DataError: if the design or the response has non-finite entries.
    """
    if not (np.all(np.isfinite(d.x)) and np.all(np.isfinite(d.y))):
        raise DataError("Data contain non-finite values.")


def _column_scale(x: np.ndarray, standardize: bool) -> Tuple[np.ndarray, np.ndarray]:
    """
    Working scale of the columns.

    Args:
        x (np.ndarray): design matrix.
        standardize (bool): divide by the population standard deviation.

    Returns:
        Tuple[np.ndarray, np.ndarray]: the scale of every column and the mask of non-constant columns.
    """
    free = np.ptp(x, axis=0) > 0
    scale = np.ones(x.shape[1])
    if standardize:
        scale[free] = x[:, free].std(axis=0)
    return scale, free


def _working_problem(
    x: np.ndarray,
    z: np.ndarray,
    scale: np.ndarray,
    free: np.ndarray,
    weights: Optional[np.ndarray] = None,
) -> _Working:
    """
    Center (with optional observation weights) and scale the data, and build the Gram quantities.

    Args:
        x (np.ndarray): design matrix.
        z (np.ndarray): response.
        scale (np.ndarray): column scale.
        free (np.ndarray): mask of non-constant columns.
        weights (Optional[np.ndarray], optional): observation weights. Defaults to None.

    Returns:
        _Working: the quadratic problem.
    """
    n = x.shape[0]
    if weights is None:
        x_mean = x.mean(axis=0)
        z_mean = float(z.mean())
        xc = (x - x_mean) / scale
        xc[:, ~free] = 0.0
        zc = z - z_mean
        return _Working(
            gram=xc.T @ xc / n,
            corr=xc.T @ zc / n,
            zz=float(zc @ zc) / n,
            x_mean=x_mean,
            z_mean=z_mean,
        )
    total = weights.sum()
    x_mean = weights @ x / total
    z_mean = float(weights @ z / total)
    xc = (x - x_mean) / scale
    xc[:, ~free] = 0.0
    zc = z - z_mean
    weighted = xc * weights[:, None]
    return _Working(
        gram=weighted.T @ xc / n,
        corr=weighted.T @ zc / n,
        zz=float(weights @ (zc * zc)) / n,
        x_mean=x_mean,
        z_mean=z_mean,
    )


def _kkt_violation(
    beta: np.ndarray, q: np.ndarray, corr: np.ndarray, lam: float, free: np.ndarray
) -> float:
    """
    Largest violation of the Lasso optimality conditions on the working scale.

    Args:
        beta (np.ndarray): working coefficients.
        q (np.ndarray): Gram matrix times beta.
        corr (np.ndarray): correlations c.
        lam (float): penalty level.
        free (np.ndarray): mask of the coordinates that are optimized.

    Returns:
        float: the violation.
    """
    grad = 2.0 * (q - corr)
    active = beta != 0
    violation = np.where(
        active,
        np.abs(grad + lam * np.sign(beta)),
        np.maximum(np.abs(grad) - lam, 0.0),
    )
    violation[~free] = 0.0
    return float(violation.max(initial=0.0))


def _cd_solve(
    work: _Working,
    lam: float,
    beta0: np.ndarray,
    free: np.ndarray,
    tol: float,
    max_iter: int,
) -> Tuple[np.ndarray, int, bool, float]:
    """
    Cyclic coordinate descent with covariance updates and active-set cycling.

    Full sweeps alternate with sweeps restricted to the active set; the solver
    stops after a full sweep whose largest change is below tol and whose
    optimality conditions hold within half of KKT_TOL.

    Args:
        work (_Working): quadratic problem.
        lam (float): penalty level.
        beta0 (np.ndarray): starting point.
        free (np.ndarray): mask of the coordinates to optimize.
        tol (float): tolerance on the largest coordinate change.
        max_iter (int): maximal number of sweeps.

    Returns:
        Tuple[np.ndarray, int, bool, float]: coefficients, sweeps, convergence flag and objective.
    """
    gram, corr = work.gram, work.corr
    diag = np.diag(gram)
    beta = np.where(free, beta0, 0.0).astype(np.float64)
    candidates = np.flatnonzero(free & (diag > 0)).tolist()
    corr_list = corr.tolist()
    diag_list = diag.tolist()
    half = lam / 2.0

    def objective(q: np.ndarray) -> float:
        return float(beta @ q - 2.0 * corr @ beta + work.zz + lam * np.abs(beta).sum())

    q = gram @ beta
    current = objective(q)
    coords = candidates
    full = True
    sweeps = 0
    converged = False
    while sweeps < max_iter:
        if full:
            q = gram @ beta
        max_change = 0.0
        for j in coords:
            old = beta[j]
            rho = corr_list[j] - q[j] + diag_list[j] * old
            if rho > half:
                new = (rho - half) / diag_list[j]
            elif rho < -half:
                new = (rho + half) / diag_list[j]
            else:
                new = 0.0
            if new != old:
                delta = new - old
                beta[j] = new
                q += delta * gram[j]
                max_change = max(max_change, abs(delta))
        sweeps += 1
        updated = objective(q)
        assert updated <= current + 1e-10 * (1.0 + abs(current)), "Lasso objective increased"
        current = updated

        if full and max_change < tol:
            if _kkt_violation(beta, q, corr, lam, free) <= KKT_TOL / 2:
                converged = True
                break
        elif full:
            coords = [j for j in candidates if beta[j] != 0]
            full = False
        elif max_change < tol:
            coords = candidates
            full = True
    return beta, sweeps, converged, current


def _fit_from_working(
    beta_w: np.ndarray,
    work: _Working,
    scale: np.ndarray,
    method: str,
    **kwargs: Any,
) -> FitResult:
    """
    Map working coefficients back to the raw scale.

    Args:
        beta_w (np.ndarray): working coefficients.
        work (_Working): quadratic problem (for the centering).
        scale (np.ndarray): column scale.
        method (str): provenance tag.
        kwargs: remaining FitResult fields.

    Returns:
        FitResult: the fit.
    """
    values = beta_w / scale
    intercept = work.z_mean - float(work.x_mean @ values)
    beta = CoefficientVector(values=values, intercept=intercept, method=method)
    return FitResult(beta=beta, gamma=beta.support(), **kwargs)


def lambda_max(d: Dataset, cfg: LassoConfig = LassoConfig()) -> float:
    """
    Smallest penalty level giving the empty linear Lasso model.

    Args:
        d (Dataset): dataset.
        cfg (LassoConfig, optional): configuration. Defaults to LassoConfig().

    Returns:
        float: max_j |(2/n) x_j' (y - mean(y))| on the working scale.
    """
    scale, free = _column_scale(d.x, cfg.standardize_internally)
    work = _working_problem(d.x, d.y, scale, free)
    return float(2.0 * np.abs(work.corr).max(initial=0.0))


def _auto_grid(lam_max: float, cfg: LassoConfig) -> np.ndarray:
    """
    Args:
        lam_max (float): largest penalty level.
        cfg (LassoConfig): configuration.

    Returns:
        np.ndarray: the grid, given or log-spaced from lam_max.
    """
    if cfg.lambda_grid is not None:
        return np.asarray(cfg.lambda_grid)
    if lam_max <= 0:
        # Constant response: every lambda gives the empty model.
        lam_max = 1.0
    return np.geomspace(lam_max, cfg.lambda_min_ratio * lam_max, cfg.path_length)


def lasso_cd(
    d: Dataset,
    lam: float,
    cfg: LassoConfig = LassoConfig(),
    beta0: Optional[np.ndarray] = None,
) -> FitResult:
    """
    Lasso by cyclic coordinate descent.

    Args:
        d (Dataset): dataset.
        lam (float): penalty level, nonnegative.
        cfg (LassoConfig, optional): configuration. Defaults to LassoConfig().
        beta0 (Optional[np.ndarray], optional): raw-scale starting point. Defaults to None.

    Raises:
        ConfigError: if lam is negative.
        DataError: if the data are not finite.

    Returns:
        FitResult: the fit.
    """
    if lam < 0:
        raise ConfigError(f"lambda must be nonnegative, got {lam}.")
    _check_finite(d)
    scale, free = _column_scale(d.x, cfg.standardize_internally)
    work = _working_problem(d.x, d.y, scale, free)
    start = np.zeros(d.p) if beta0 is None else np.asarray(beta0) * scale
    beta_w, sweeps, converged, objective = _cd_solve(work, lam, start, free, cfg.tol, cfg.max_iter)
    if not converged:
        logger.warning("Lasso did not converge in %d sweeps (lambda=%g).", sweeps, lam)
    return _fit_from_working(
        beta_w,
        work,
        scale,
        "lasso",
        objective=objective,
        iterations=sweeps,
        converged=converged,
        lam=float(lam),
    )


def lasso_path(d: Dataset, cfg: LassoConfig = LassoConfig()) -> List[FitResult]:
    """
    Lasso along a descending grid of penalty levels, warm started.

    Without a grid, the grid has ``cfg.path_length`` log-spaced points from
    lambda_max down to ``cfg.lambda_min_ratio * lambda_max``.

    Args:
        d (Dataset): dataset.
        cfg (LassoConfig, optional): configuration. Defaults to LassoConfig().

    Raises:
        DataError: if the data are not finite.

    Returns:
        List[FitResult]: one fit per grid point, truncated after ``cfg.max_active`` is exceeded.
    """
    _check_finite(d)
    scale, free = _column_scale(d.x, cfg.standardize_internally)
    work = _working_problem(d.x, d.y, scale, free)
    grid = _auto_grid(float(2.0 * np.abs(work.corr).max(initial=0.0)), cfg)

    fits: List[FitResult] = []
    beta_w = np.zeros(d.p)
    for lam in grid:
        beta_w, sweeps, converged, objective = _cd_solve(
            work, float(lam), beta_w, free, cfg.tol, cfg.max_iter
        )
        if not converged:
            logger.warning("Lasso path did not converge at lambda=%g.", lam)
        fit = _fit_from_working(
            beta_w,
            work,
            scale,
            "lasso",
            objective=objective,
            iterations=sweeps,
            converged=converged,
            lam=float(lam),
        )
        fits.append(fit)
        if cfg.max_active is not None and fit.gamma.size > cfg.max_active:
            logger.debug("Path stopped at lambda=%g with %d active.", lam, fit.gamma.size)
            break
    return fits


def kkt_residual(d: Dataset, fit: FitResult, cfg: LassoConfig = LassoConfig()) -> float:
    """
    Largest violation of the Lasso optimality conditions, on the working scale.

    Args:
        d (Dataset): dataset the fit was computed on.
        fit (FitResult): Lasso fit.
        cfg (LassoConfig, optional): configuration used for the fit. Defaults to LassoConfig().

    Returns:
        float: the violation.
    """
    assert fit.lam is not None
    scale, free = _column_scale(d.x, cfg.standardize_internally)
    work = _working_problem(d.x, d.y, scale, free)
    beta_w = fit.beta.values * scale
    return _kkt_violation(beta_w, work.gram @ beta_w, work.corr, fit.lam, free)


def _design(d: Dataset, gamma: InclusionVector, fit_intercept: bool) -> np.ndarray:
    """
    Args:
        d (Dataset): dataset.
        gamma (InclusionVector): selected columns.
        fit_intercept (bool): prepend a column of ones.

    Returns:
        np.ndarray: the design restricted to gamma.
    """
    design = d.x[:, gamma.indices]
    if fit_intercept:
        design = np.column_stack((np.ones(d.n), design))
    return design


def _check_rank(design: np.ndarray, subset: Optional[int] = None) -> None:
    """
    Check that the normal matrix of the design is well conditioned.

    The condition number is computed after equilibrating the columns, so it
    does not depend on the units of the features.

    Args:
        design (np.ndarray): design matrix.
        subset (Optional[int], optional): subset id for error messages. Defaults to None.

    Raises:
        NumericalError: if the design is rank deficient or ill conditioned.
    """
    rows, cols = design.shape
    if cols == 0:
        return
    if rows < cols:
        raise NumericalError(f"{cols} columns for only {rows} rows.", subset=subset)
    norms = np.linalg.norm(design, axis=0)
    if np.any(norms == 0):
        raise NumericalError("Design has a zero column.", subset=subset)
    singular = scipy.linalg.svdvals(design / norms)
    condition = (singular[0] / singular[-1]) ** 2 if singular[-1] > 0 else np.inf
    if not condition < CONDITION_LIMIT:
        raise NumericalError(
            f"Normal matrix is singular or ill conditioned (condition number {condition:.3g}).",
            subset=subset,
        )


def _least_squares(design: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Least squares by an economic QR factorization.

    Args:
        design (np.ndarray): full column rank design.
        y (np.ndarray): response.

    Returns:
        Tuple[np.ndarray, np.ndarray]: coefficients and residuals.
    """
    if design.shape[1] == 0:
        return np.zeros(0), y.copy()
    q, r = scipy.linalg.qr(design, mode="economic")
    coef = scipy.linalg.solve_triangular(r, q.T @ y)
    return coef, y - design @ coef


def ols_fit(d: Dataset, gamma: InclusionVector, fit_intercept: bool = True) -> CoefficientVector:
    """
    Ordinary least squares on the selected columns, zeros elsewhere.

    Args:
        d (Dataset): dataset.
        gamma (InclusionVector): selected columns.
        fit_intercept (bool, optional): include an intercept. Defaults to True.

    Raises:
        NumericalError: if the normal matrix is singular or ill conditioned.

    Returns:
        CoefficientVector: the estimate.
    """
    design = _design(d, gamma, fit_intercept)
    _check_rank(design)
    coef, _ = _least_squares(design, d.y)
    if fit_intercept:
        return CoefficientVector(values=expand(coef[1:], gamma), intercept=coef[0], method="ols")
    return CoefficientVector(values=expand(coef, gamma), method="ols")


def _logistic_loss(eta: np.ndarray, y: np.ndarray) -> float:
    """
    Mean negative log-likelihood of the logistic model.
    """
    return float(np.mean(np.logaddexp(0.0, eta) - y * eta))


def _is_separated(coef: np.ndarray, eta: np.ndarray, y: np.ndarray) -> bool:
    """
    Complete separation heuristic: huge coefficients, or every observation on its side with a large margin.
    """
    if np.abs(coef).max(initial=0.0) > SEPARATION_BOUND:
        return True
    return bool(np.all((2.0 * y - 1.0) * eta > SEPARATION_MARGIN))


def logistic_irls(
    d: Dataset, gamma: InclusionVector, tol: float = 1e-8, max_iter: int = 100
) -> FitResult:
    """
    Logistic regression maximum likelihood on the selected columns (plus an intercept).

    Newton steps (iteratively reweighted least squares) with step-halving; the
    fit converges when every component of the mean score is below tol.

    Args:
        d (Dataset): classification dataset.
        gamma (InclusionVector): selected columns, possibly empty (intercept only).
        tol (float, optional): tolerance on the mean score. Defaults to 1e-8.
        max_iter (int, optional): maximal number of Newton steps. Defaults to 100.

    Raises:
        ConfigError: if the dataset is not a classification dataset.
        NumericalError: if the design is rank deficient.

    Returns:
        FitResult: the fit, with ``separated`` set when complete separation is detected.
    """
    if d.task != Task.CLASSIFICATION:
        raise ConfigError("logistic_irls needs a classification dataset.")
    design = _design(d, gamma, True)
    _check_rank(design)
    y = d.y
    n = d.n

    coef = np.zeros(design.shape[1])
    eta = design @ coef
    loss = _logistic_loss(eta, y)
    converged = False
    separated = False
    steps = 0
    for _ in range(max_iter):
        mu = expit(eta)
        score = design.T @ (y - mu) / n
        if np.abs(score).max() < tol:
            converged = True
            break
        if _is_separated(coef, eta, y):
            separated = True
            break
        weights = mu * (1.0 - mu)
        hessian = (design * weights[:, None]).T @ design / n
        try:
            step = scipy.linalg.solve(hessian, score, assume_a="pos")
        except (np.linalg.LinAlgError, ValueError):
            separated = True
            break
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            candidate = coef + scale * step
            eta_candidate = design @ candidate
            loss_candidate = _logistic_loss(eta_candidate, y)
            if loss_candidate <= loss:
                break
            scale /= 2.0
        else:
            logger.debug("Step-halving failed after %d halvings.", MAX_HALVINGS)
            break
        coef, eta, loss = candidate, eta_candidate, loss_candidate
        steps += 1

    separated = separated or _is_separated(coef, eta, y)
    if separated:
        converged = False
        logger.warning("Complete separation detected in logistic regression.")
    elif not converged:
        logger.warning("Logistic regression did not converge in %d steps.", max_iter)
    beta = CoefficientVector(
        values=expand(coef[1:], gamma), intercept=coef[0], method="logistic_irls"
    )
    return FitResult(
        beta=beta,
        gamma=beta.support(),
        objective=loss,
        iterations=steps,
        converged=converged,
        separated=separated,
    )


def _logistic_stationarity(
    xs: np.ndarray, y: np.ndarray, b0: float, beta_w: np.ndarray, lam: float, free: np.ndarray
) -> float:
    """
    Stationarity residual of the logistic Lasso on the working scale.
    """
    mu = expit(b0 + xs @ beta_w)
    resid = y - mu
    grad = -(xs.T @ resid) / y.shape[0]
    active = beta_w != 0
    violation = np.where(
        active,
        np.abs(grad + lam * np.sign(beta_w)),
        np.maximum(np.abs(grad) - lam, 0.0),
    )
    violation[~free] = 0.0
    return max(abs(float(resid.mean())), float(violation.max(initial=0.0)))


def _logistic_lasso_solve(
    xs: np.ndarray,
    y: np.ndarray,
    lam: float,
    free: np.ndarray,
    start: Tuple[float, np.ndarray],
    cfg: LassoConfig,
) -> Tuple[float, np.ndarray, int, bool, float]:
    """
    Proximal Newton iterations for the logistic Lasso on the scaled design.

    Args:
        xs (np.ndarray): design divided by the column scale.
        y (np.ndarray): response in {0, 1}.
        lam (float): penalty level.
        free (np.ndarray): mask of the coordinates to optimize.
        start (Tuple[float, np.ndarray]): starting intercept and coefficients.
        cfg (LassoConfig): configuration of the inner coordinate descent.

    Returns:
        Tuple[float, np.ndarray, int, bool, float]: intercept, coefficients, Newton steps, convergence flag and objective.
    """
    b0, beta_w = start[0], start[1].copy()
    inner_tol = min(cfg.tol, 1e-8)
    ones = np.ones(xs.shape[1])

    def objective(b: float, w: np.ndarray) -> float:
        return _logistic_loss(b + xs @ w, y) + lam * float(np.abs(w).sum())

    current = objective(b0, beta_w)
    converged = False
    steps = 0
    for steps in range(MAX_NEWTON_STEPS + 1):
        if _logistic_stationarity(xs, y, b0, beta_w, lam, free) <= STATIONARITY_TOL:
            converged = True
            break
        if steps == MAX_NEWTON_STEPS:
            break
        eta = b0 + xs @ beta_w
        mu = expit(eta)
        weights = np.maximum(mu * (1.0 - mu), 1e-10)
        z = eta + (y - mu) / weights
        work = _working_problem(xs, z, ones, free, weights)
        new_beta, _, _, _ = _cd_solve(work, 2.0 * lam, beta_w, free, inner_tol, cfg.max_iter)
        new_b0 = work.z_mean - float(work.x_mean @ new_beta)

        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand_b0 = b0 + scale * (new_b0 - b0)
            cand_beta = beta_w + scale * (new_beta - beta_w)
            cand = objective(cand_b0, cand_beta)
            if cand <= current:
                break
            scale /= 2.0
        else:
            logger.debug("Proximal Newton line search failed.")
            break
        b0, beta_w, current = cand_b0, cand_beta, cand
    return b0, beta_w, steps, converged, current


def _logistic_gradient(xs: np.ndarray, y: np.ndarray, b0: float, beta_w: np.ndarray) -> np.ndarray:
    """
    Gradient of the mean negative log-likelihood with respect to the working coefficients.
    """
    return -(xs.T @ (y - expit(b0 + xs @ beta_w))) / y.shape[0]


def _logistic_lasso_screened(
    xs: np.ndarray,
    y: np.ndarray,
    lam: float,
    lam_prev: float,
    free: np.ndarray,
    start: Tuple[float, np.ndarray],
    cfg: LassoConfig,
) -> Tuple[float, np.ndarray, int, bool, float]:
    """
    Logistic Lasso on the features kept by the sequential strong rule.

    A feature enters the working set when it is active at the starting point or
    when its gradient there is at least ``2 lam - lam_prev`` in absolute value.
    After each restricted solve the optimality conditions are checked on every
    feature and the violators join the working set, so the solution is the one
    of the full problem.

    Args:
        xs (np.ndarray): design divided by the column scale.
        y (np.ndarray): response in {0, 1}.
        lam (float): penalty level.
        lam_prev (float): previous penalty level of the path (lambda_max for a single fit).
        free (np.ndarray): mask of the coordinates to optimize.
        start (Tuple[float, np.ndarray]): starting intercept and coefficients.
        cfg (LassoConfig): configuration of the inner coordinate descent.

    Returns:
        Tuple[float, np.ndarray, int, bool, float]: intercept, coefficients, Newton steps, convergence flag and objective.
    """
    b0, beta_w = start[0], start[1].copy()
    grad = _logistic_gradient(xs, y, b0, beta_w)
    working = free & ((beta_w != 0) | (np.abs(grad) >= 2.0 * lam - lam_prev))
    steps = 0
    while True:
        cols = np.flatnonzero(working)
        if cols.size == 0:
            b0 = _intercept_start(y, 0)[0]
            beta_w = np.zeros(xs.shape[1])
            objective = _logistic_loss(np.full(y.shape[0], b0), y)
        else:
            b0, sub, sub_steps, _, objective = _logistic_lasso_solve(
                xs[:, cols], y, lam, np.ones(cols.size, dtype=bool), (b0, beta_w[cols]), cfg
            )
            steps += sub_steps
            beta_w = np.zeros(xs.shape[1])
            beta_w[cols] = sub
        grad = _logistic_gradient(xs, y, b0, beta_w)
        violators = free & ~working & (np.abs(grad) - lam > STATIONARITY_TOL)
        if not violators.any():
            break
        logger.debug("%d features violate the strong rule at lambda=%g.", violators.sum(), lam)
        working |= violators
    converged = _logistic_stationarity(xs, y, b0, beta_w, lam, free) <= STATIONARITY_TOL
    return b0, beta_w, steps, converged, objective


def _logistic_setup(d: Dataset, cfg: LassoConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Validate a logistic Lasso problem and scale its design.

    Raises:
        ConfigError: if the dataset is not a classification dataset.
        NumericalError: if the response has a single class.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: scaled design, column scale and mask of non-constant columns.
    """
    if d.task != Task.CLASSIFICATION:
        raise ConfigError("Logistic Lasso needs a classification dataset.")
    _check_finite(d)
    if d.y.min() == d.y.max():
        raise NumericalError("Logistic Lasso needs both classes in the response.")
    scale, free = _column_scale(d.x, cfg.standardize_internally)
    xs = d.x / scale
    xs[:, ~free] = 0.0
    return xs, scale, free


def _logistic_fit(
    b0: float, beta_w: np.ndarray, scale: np.ndarray, lam: float, **kwargs: Any
) -> FitResult:
    """
    Map a logistic Lasso solution back to the raw scale.
    """
    beta = CoefficientVector(values=beta_w / scale, intercept=b0, method="logistic_lasso")
    return FitResult(beta=beta, gamma=beta.support(), lam=float(lam), **kwargs)


def logistic_lambda_max(d: Dataset, cfg: LassoConfig = LassoConfig()) -> float:
    """
    Smallest penalty level giving the intercept-only logistic Lasso model.

    Args:
        d (Dataset): classification dataset.
        cfg (LassoConfig, optional): configuration. Defaults to LassoConfig().

    Returns:
        float: max_j |(1/n) x_j' (y - mean(y))| on the working scale.
    """
    xs, _, _ = _logistic_setup(d, cfg)
    return _logistic_lam_max(xs, d.y)


def _logistic_lam_max(xs: np.ndarray, y: np.ndarray) -> float:
    """
    Largest absolute gradient at the intercept-only fit, on the working scale.
    """
    return float(np.abs(xs.T @ (y - y.mean())).max(initial=0.0) / y.shape[0])


def _intercept_start(y: np.ndarray, p: int) -> Tuple[float, np.ndarray]:
    """
    Intercept-only maximum likelihood as starting point.
    """
    mean = float(y.mean())
    return float(np.log(mean / (1.0 - mean))), np.zeros(p)


def logistic_lasso(
    d: Dataset,
    lam: float,
    cfg: LassoConfig = LassoConfig(),
) -> FitResult:
    """
    L1-penalized logistic regression by proximal Newton.

    Minimizes ``(1/n) NLL + lambda ||beta||_1`` with an unpenalized intercept.

    Args:
        d (Dataset): classification dataset.
        lam (float): penalty level, nonnegative.
        cfg (LassoConfig, optional): configuration. Defaults to LassoConfig().

    Raises:
        ConfigError: if lam is negative or the dataset is not a classification dataset.

    Returns:
        FitResult: the fit.
    """
    if lam < 0:
        raise ConfigError(f"lambda must be nonnegative, got {lam}.")
    xs, scale, free = _logistic_setup(d, cfg)
    b0, beta_w, steps, converged, objective = _logistic_lasso_screened(
        xs, d.y, float(lam), _logistic_lam_max(xs, d.y), free, _intercept_start(d.y, d.p), cfg
    )
    if not converged:
        logger.warning("Logistic Lasso did not converge (lambda=%g).", lam)
    return _logistic_fit(
        b0, beta_w, scale, lam, objective=objective, iterations=steps, converged=converged
    )


def logistic_lasso_path(d: Dataset, cfg: LassoConfig = LassoConfig()) -> List[FitResult]:
    """
    Logistic Lasso along a descending grid of penalty levels, warm started.

    Args:
        d (Dataset): classification dataset.
        cfg (LassoConfig, optional): configuration. Defaults to LassoConfig().

    Returns:
        List[FitResult]: one fit per grid point, truncated after ``cfg.max_active`` is exceeded.
    """
    xs, scale, free = _logistic_setup(d, cfg)
    lam_max = _logistic_lam_max(xs, d.y)
    grid = _auto_grid(lam_max, cfg)

    fits: List[FitResult] = []
    state = _intercept_start(d.y, d.p)
    lam_prev = lam_max
    for lam in grid:
        b0, beta_w, steps, converged, objective = _logistic_lasso_screened(
            xs, d.y, float(lam), lam_prev, free, state, cfg
        )
        state, lam_prev = (b0, beta_w), float(lam)
        if not converged:
            logger.warning("Logistic Lasso path did not converge at lambda=%g.", lam)
        fit = _logistic_fit(
            b0, beta_w, scale, lam, objective=objective, iterations=steps, converged=converged
        )
        fits.append(fit)
        if cfg.max_active is not None and fit.gamma.size > cfg.max_active:
            logger.debug("Path stopped at lambda=%g with %d active.", lam, fit.gamma.size)
            break
    return fits


def logistic_stationarity(d: Dataset, fit: FitResult, cfg: LassoConfig = LassoConfig()) -> float:
    """
    Stationarity residual of a logistic Lasso fit, on the working scale.

    Args:
        d (Dataset): dataset the fit was computed on.
        fit (FitResult): logistic Lasso fit.
        cfg (LassoConfig, optional): configuration used for the fit. Defaults to LassoConfig().

    Returns:
        float: the residual.
    """
    assert fit.lam is not None
    xs, scale, free = _logistic_setup(d, cfg)
    return _logistic_stationarity(
        xs, d.y, fit.beta.intercept, fit.beta.values * scale, fit.lam, free
    )


def gic_score(d: Dataset, gamma: InclusionVector, cfg: GicConfig = GicConfig()) -> float:
    """
    Generalized information criterion of a support, with the noise variance profiled out.

    Regression: ``n log(RSS / n) + w |gamma|`` where RSS comes from the least
    squares refit (with intercept) on gamma; an exact fit scores -inf.
    Classification: ``2 NLL + w |gamma|`` from the maximum likelihood refit.

    Args:
        d (Dataset): dataset.
        gamma (InclusionVector): support to score.
        cfg (GicConfig, optional): penalty. Defaults to GicConfig().

    Raises:
        NumericalError: if the refit is rank deficient (or separated, for classification).

    Returns:
        float: the score.
    """
    penalty = cfg.weight(d.n, d.p) * gamma.size
    if d.task == Task.CLASSIFICATION:
        fit = logistic_irls(d, gamma)
        if fit.separated:
            raise NumericalError("Logistic refit is separated.")
        return 2.0 * d.n * fit.objective + penalty
    design = _design(d, gamma, True)
    _check_rank(design)
    _, resid = _least_squares(design, d.y)
    rss = float(resid @ resid)
    centered = d.y - d.y.mean()
    if rss <= RSS_FLOOR * float(centered @ centered):
        return -np.inf
    return d.n * np.log(rss / d.n) + penalty


def gic_support_bound(d: Dataset, cfg: GicConfig = GicConfig()) -> int:
    """
    Largest support size the GIC can select on a classification dataset.

    The score of a support is at least its penalty term and the empty model
    scores ``2 NLL``, so no support larger than ``GIC(empty) / w`` wins.

    Args:
        d (Dataset): classification dataset.
        cfg (GicConfig, optional): penalty. Defaults to GicConfig().

    Returns:
        int: the bound, at least 1.
    """
    empty = gic_score(d, InclusionVector.empty(d.p), cfg)
    return max(1, int(empty // cfg.weight(d.n, d.p)))

def gic_select(
    d: Dataset, candidates: Sequence[InclusionVector], cfg: GicConfig = GicConfig()
) -> InclusionVector:
    """
    Candidate minimizing the GIC score.

    Ties go to the smaller support, then to the lexicographically smaller
    index list. Rank deficient candidates are skipped. For classification the
    score is at least the penalty term, so candidates are visited by size and
    the scan stops once the penalty alone exceeds the best score.

    Args:
        d (Dataset): dataset.
        candidates (Sequence[InclusionVector]): supports to compare.
        cfg (GicConfig, optional): penalty. Defaults to GicConfig().

    Raises:
        ConfigError: if there is no candidate.
        NumericalError: if every candidate is rank deficient.

    Returns:
        InclusionVector: the selected support.
    """
    if len(candidates) == 0:
        raise ConfigError("gic_select needs at least one candidate.")
    weight = cfg.weight(d.n, d.p)
    unique = {g.key(): g for g in candidates}.values()
    best: Optional[Tuple[float, int, Tuple[int, ...]]] = None
    chosen: Optional[InclusionVector] = None
    for gamma in sorted(unique, key=lambda g: (g.size, tuple(g.indices.tolist()))):
        if d.task == Task.CLASSIFICATION and best is not None and weight * gamma.size > best[0]:
            logger.debug("Candidates above %d features skipped by the GIC bound.", gamma.size - 1)
            break
        try:
            score = gic_score(d, gamma, cfg)
        except NumericalError as exc:
            logger.debug("Candidate of size %d skipped: %s", gamma.size, exc)
            continue
        key = (score, gamma.size, tuple(gamma.indices.tolist()))
        if best is None or key < best:
            best, chosen = key, gamma
    if chosen is None:
        raise NumericalError("Every GIC candidate is rank deficient.")
    return chosen
