"""
Tests of the Lasso, least squares, logistic and GIC solvers.
"""
import numpy as np
import pytest

from message_estimator.aggregation import InclusionVector
from message_estimator.dataset import Task
from message_estimator.exceptions import ConfigError, DataError, NumericalError
from message_estimator.solvers import (
    KKT_TOL,
    GicConfig,
    GicPenalty,
    LassoConfig,
    gic_score,
    gic_select,
    gic_support_bound,
    kkt_residual,
    lambda_max,
    lasso_cd,
    lasso_path,
    logistic_irls,
    logistic_lambda_max,
    logistic_lasso,
    logistic_lasso_path,
    logistic_stationarity,
    ols_fit,
)
from tests.conftest import make_dataset, orthonormal_design

RAW = LassoConfig(standardize_internally=False)


def soft_threshold(value: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(value) * np.maximum(np.abs(value) - threshold, 0.0)


def test_lasso_orthogonal_closed_form(rng):
    n, p = 200, 8
    x = orthonormal_design(n, p, seed=1)
    y = x @ np.array([3.0, -2.0, 0.5, 0.0, 0.1, -0.05, 1.0, 0.0]) + 0.1 * rng.standard_normal(n)
    d = make_dataset(x, y)
    corr = x.T @ (y - y.mean()) / n
    for lam in (0.05, 0.3, 1.0, 4.0):
        fit = lasso_cd(d, lam, RAW)
        np.testing.assert_allclose(fit.beta.values, soft_threshold(corr, lam / 2.0), atol=1e-8)
        assert fit.converged


def test_lasso_kkt_random_instances():
    gen = np.random.default_rng(2024)
    for _ in range(20):
        x = gen.standard_normal((50, 20))
        y = x[:, :3] @ gen.standard_normal(3) + gen.standard_normal(50)
        d = make_dataset(x, y)
        lam = gen.uniform(0.0, 1.0) * lambda_max(d)
        fit = lasso_cd(d, lam)
        assert kkt_residual(d, fit) <= KKT_TOL


def test_lasso_at_lambda_max_is_empty(regression):
    fit = lasso_cd(regression, lambda_max(regression))
    assert fit.gamma.size == 0
    assert fit.beta.intercept == pytest.approx(regression.y.mean())


def test_lasso_zero_lambda_is_least_squares(regression):
    fit = lasso_cd(regression, 0.0, LassoConfig(tol=1e-12))
    ols = ols_fit(regression, InclusionVector(np.ones(regression.p, dtype=bool)))
    np.testing.assert_allclose(fit.beta.values, ols.values, atol=1e-5)


def test_lasso_errors(regression):
    with pytest.raises(ConfigError):
        lasso_cd(regression, -1.0)
    x = regression.x.copy()
    x[0, 0] = np.nan
    with pytest.raises(DataError):
        lasso_cd(make_dataset(x, regression.y), 0.1)


def test_lasso_constant_column_held_at_zero(rng):
    x = rng.standard_normal((100, 3))
    x[:, 1] = 2.0
    fit = lasso_cd(make_dataset(x, x[:, 0] + x[:, 2]), 0.01)
    assert fit.beta.values[1] == 0.0


def test_lasso_path_default_grid(regression):
    fits = lasso_path(regression)
    assert len(fits) == 100
    lams = [fit.lam for fit in fits]
    assert np.all(np.diff(lams) < 0)
    assert lams[-1] == pytest.approx(1e-3 * lams[0])
    assert fits[0].gamma.size == 0
    for fit in fits[::10]:
        assert kkt_residual(regression, fit) <= KKT_TOL


def test_lasso_path_given_grid_and_truncation(regression):
    fits = lasso_path(regression, LassoConfig(lambda_grid=(2.0, 1.0, 0.5)))
    assert [fit.lam for fit in fits] == [2.0, 1.0, 0.5]
    truncated = lasso_path(regression, LassoConfig(max_active=2))
    assert truncated[-1].gamma.size > 2
    assert all(fit.gamma.size <= 2 for fit in truncated[:-1])


def test_lasso_path_warm_start_matches_cold_start(regression):
    fits = lasso_path(regression, LassoConfig(path_length=15))
    for fit in fits:
        cold = lasso_cd(regression, fit.lam)
        np.testing.assert_allclose(fit.beta.values, cold.beta.values, rtol=0, atol=1e-5)


def test_lasso_config_validation():
    with pytest.raises(ConfigError):
        LassoConfig(lambda_grid=(1.0, 2.0))
    with pytest.raises(ConfigError):
        LassoConfig(tol=0.0)
    cfg = LassoConfig(lambda_grid=(3.0, 1.0), max_active=5)
    assert LassoConfig.from_dict(cfg.to_dict()) == cfg


def test_ols_single_column_without_intercept():
    d = make_dataset(np.array([[1.0], [1.0]]), np.array([1.0, 3.0]))
    beta = ols_fit(d, InclusionVector.from_indices(1, [0]), fit_intercept=False)
    assert beta.values[0] == pytest.approx(2.0)
    assert beta.intercept == 0.0


def test_ols_exact_recovery(noiseless):
    d = noiseless(n=200, p=10, support=(1, 4), values=(2.0, -3.0), intercept=1.0)
    beta = ols_fit(d, InclusionVector.from_indices(10, [1, 4]))
    np.testing.assert_allclose(beta.values[[1, 4]], [2.0, -3.0], atol=1e-10)
    assert beta.intercept == pytest.approx(1.0)
    assert beta.support() == InclusionVector.from_indices(10, [1, 4])


def test_ols_empty_model_is_mean(regression):
    beta = ols_fit(regression, InclusionVector.empty(regression.p))
    assert beta.intercept == pytest.approx(regression.y.mean())
    assert not beta.values.any()


def test_ols_residuals_orthogonal_to_support(regression):
    gamma = InclusionVector.from_indices(regression.p, [0, 1, 2, 9])
    beta = ols_fit(regression, gamma)
    resid = regression.y - beta.linear_predictor(regression.x)
    assert np.abs(regression.x[:, gamma.indices].T @ resid).max() / regression.n <= 1e-8
    assert abs(resid.mean()) <= 1e-8


def test_ols_rank_deficient(rng):
    x = rng.standard_normal((30, 3))
    x[:, 2] = x[:, 0]
    with pytest.raises(NumericalError):
        ols_fit(make_dataset(x, rng.standard_normal(30)), InclusionVector.from_indices(3, [0, 2]))
    with pytest.raises(NumericalError):
        ols_fit(make_dataset(x[:2], rng.standard_normal(2)), InclusionVector.from_indices(3, [0, 1]))


def test_logistic_irls_score(classification):
    gamma = InclusionVector.from_indices(classification.p, [0, 1])
    fit = logistic_irls(classification, gamma)
    assert fit.converged and not fit.separated
    eta = fit.beta.linear_predictor(classification.x)
    mu = 1.0 / (1.0 + np.exp(-eta))
    design = np.column_stack((np.ones(classification.n), classification.x[:, [0, 1]]))
    assert np.abs(design.T @ (classification.y - mu)).max() / classification.n < 1e-7
    assert fit.beta.values[0] > 0 > fit.beta.values[1]


def test_logistic_irls_intercept_only():
    y = np.array([1.0, 1.0, 1.0, 0.0] * 25)
    d = make_dataset(np.random.default_rng(3).standard_normal((100, 2)), y, Task.CLASSIFICATION)
    fit = logistic_irls(d, InclusionVector.empty(2))
    assert fit.converged
    assert fit.beta.intercept == pytest.approx(np.log(3.0), abs=1e-8)
    assert not fit.beta.values.any()


def test_logistic_irls_separation():
    x = np.linspace(-2.0, 2.0, 40)[:, None]
    y = (x[:, 0] > 0).astype(float)
    fit = logistic_irls(make_dataset(x, y, Task.CLASSIFICATION), InclusionVector.from_indices(1, [0]))
    assert fit.separated
    assert not fit.converged


def test_logistic_irls_needs_classification(regression):
    with pytest.raises(ConfigError):
        logistic_irls(regression, InclusionVector.empty(regression.p))


def test_logistic_lasso(classification):
    lam_max = logistic_lambda_max(classification)
    empty = logistic_lasso(classification, lam_max)
    assert empty.gamma.size == 0
    assert empty.beta.intercept == pytest.approx(np.log(classification.y.mean() / (1 - classification.y.mean())))
    fit = logistic_lasso(classification, 0.05 * lam_max)
    assert fit.converged
    assert logistic_stationarity(classification, fit) <= 1e-6
    assert {0, 1} <= set(fit.gamma.indices.tolist())


def test_logistic_lasso_zero_penalty_is_maximum_likelihood(classification):
    fit = logistic_lasso(classification, 0.0)
    mle = logistic_irls(classification, InclusionVector(np.ones(classification.p, dtype=bool)))
    np.testing.assert_allclose(fit.beta.values, mle.beta.values, rtol=0, atol=1e-4)
    assert fit.beta.intercept == pytest.approx(mle.beta.intercept, abs=1e-4)


def test_logistic_lasso_path_screening_is_exact(classification):
    cfg = LassoConfig(path_length=25)
    for fit in logistic_lasso_path(classification, cfg):
        assert fit.converged
        assert logistic_stationarity(classification, fit, cfg) <= 1e-6
    truncated = logistic_lasso_path(classification, LassoConfig(path_length=25, max_active=1))
    assert truncated[-1].gamma.size > 1
    assert all(fit.gamma.size <= 1 for fit in truncated[:-1])


def test_logistic_lasso_path(classification):
    fits = logistic_lasso_path(classification, LassoConfig(path_length=20))
    assert len(fits) == 20
    assert fits[0].gamma.size == 0
    assert fits[-1].gamma.size >= 2


def test_logistic_lasso_single_class():
    x = np.random.default_rng(0).standard_normal((10, 2))
    with pytest.raises(NumericalError):
        logistic_lasso(make_dataset(x, np.ones(10), Task.CLASSIFICATION), 0.1)


def test_gic_weights():
    assert GicConfig(GicPenalty.BIC).weight(100, 10) == pytest.approx(np.log(100))
    assert GicConfig(GicPenalty.EBIC).weight(100, 10) == pytest.approx(2 * np.log(10) + np.log(100))
    assert GicConfig(GicPenalty.RIC).weight(100, 10) == pytest.approx(
        2 * (np.log(10) + np.log(np.log(10)))
    )
    assert GicConfig(GicPenalty.RIC).weight(100, 2) == pytest.approx(2 * np.log(2))
    assert GicConfig(GicPenalty.CUSTOM, custom_lambda=3.5).weight(100, 10) == 3.5
    with pytest.raises(ConfigError):
        GicConfig(GicPenalty.CUSTOM)


def test_gic_score_regression(regression):
    gamma = InclusionVector.from_indices(regression.p, [0, 1, 2])
    beta = ols_fit(regression, gamma)
    resid = regression.y - beta.linear_predictor(regression.x)
    rss = float(resid @ resid)
    cfg = GicConfig(GicPenalty.BIC)
    expected = regression.n * np.log(rss / regression.n) + 3 * np.log(regression.n)
    assert gic_score(regression, gamma, cfg) == pytest.approx(expected)


def test_gic_score_exact_fit(noiseless):
    d = noiseless(n=100, p=5, support=(0,), values=(1.0,))
    assert gic_score(d, InclusionVector.from_indices(5, [0])) == -np.inf


def test_gic_select(regression):
    candidates = [InclusionVector.from_indices(regression.p, idx) for idx in ([], [0], [0, 1], [0, 1, 2], [0, 1, 2, 7])]
    assert gic_select(regression, candidates) == InclusionVector.from_indices(regression.p, [0, 1, 2])
    with pytest.raises(ConfigError):
        gic_select(regression, [])


def test_gic_select_tie_prefers_smaller(noiseless):
    d = noiseless(n=100, p=5, support=(0,), values=(1.0,))
    candidates = [InclusionVector.from_indices(5, [0, 3]), InclusionVector.from_indices(5, [0])]
    assert gic_select(d, candidates) == InclusionVector.from_indices(5, [0])


def test_gic_select_skips_rank_deficient(rng):
    x = rng.standard_normal((40, 3))
    x[:, 1] = x[:, 0]
    d = make_dataset(x, x[:, 0] + rng.standard_normal(40))
    bad = InclusionVector.from_indices(3, [0, 1])
    good = InclusionVector.from_indices(3, [0])
    assert gic_select(d, [bad, good]) == good
    with pytest.raises(NumericalError):
        gic_select(d, [bad])


def test_gic_classification(classification):
    candidates = [InclusionVector.from_indices(classification.p, idx) for idx in ([], [0], [0, 1], [0, 1, 5])]
    assert gic_select(classification, candidates) == InclusionVector.from_indices(classification.p, [0, 1])


def test_gic_select_ignores_candidate_order(regression, classification):
    for d in (regression, classification):
        candidates = [
            InclusionVector.from_indices(d.p, idx)
            for idx in ([], [1], [0], [0, 1], [0, 2], [0, 1, 2], [0, 1, 5], [0, 1, 2, 3, 4, 5])
        ]
        assert gic_select(d, candidates) == gic_select(d, candidates[::-1])


def test_gic_select_bound_keeps_the_minimum(classification):
    d = classification
    cfg = GicConfig(GicPenalty.BIC)
    candidates = [
        InclusionVector.from_indices(d.p, list(range(k))) for k in range(d.p + 1)
    ] + [InclusionVector.from_indices(d.p, [1, 4, 7])]
    scores = {gamma.key(): gic_score(d, gamma, cfg) for gamma in candidates}
    best = min(candidates, key=lambda g: (scores[g.key()], g.size, tuple(g.indices.tolist())))
    assert gic_select(d, candidates, cfg) == best


def test_gic_support_bound(classification):
    d = classification
    cfg = GicConfig(GicPenalty.RIC)
    empty = gic_score(d, InclusionVector.empty(d.p), cfg)
    assert gic_support_bound(d, cfg) == int(empty // cfg.weight(d.n, d.p))
    assert gic_support_bound(d, GicConfig(GicPenalty.CUSTOM, custom_lambda=1e9)) == 1
