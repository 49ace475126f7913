"""
Tests of the estimation methods.
"""
import numpy as np
import pytest

from message_estimator.dataset import PartitionPlan, random_partition
from message_estimator.exceptions import ConfigError, NumericalError
from message_estimator.pipeline import (
    CommLedger,
    MethodConfig,
    MethodName,
    MethodResult,
    communication_cost,
    run_averaging,
    run_bolasso,
    run_full_data,
    run_geometric_median,
    run_message,
    run_method,
)
from message_estimator.selectors import SelectorConfig, SelectorKind
from message_estimator.solvers import LassoConfig
from tests.conftest import make_dataset

FAST = SelectorConfig(lasso=LassoConfig(path_length=30))


def _two_halves(n: int) -> PartitionPlan:
    assignment = np.repeat([0, 1], n // 2)
    return PartitionPlan(m=2, assignment=assignment, seed=0)


@pytest.fixture
def disjoint_signals():
    """Subset 0 follows 5 x1, subset 1 follows 5 x2."""
    x = np.random.default_rng(3).standard_normal((100, 3))
    y = np.where(np.arange(100) < 50, 5.0 * x[:, 1], 5.0 * x[:, 2])
    return make_dataset(x, y)


def test_message_noiseless_recovery(noiseless):
    d = noiseless()
    cfg = MethodConfig(m=4, seed=1, selector=FAST)
    res = run_message(d, cfg, random_partition(d.n, 4, 1))
    assert res.gamma.indices.tolist() == [3, 17, 41]
    expected = np.zeros(50)
    expected[[3, 17, 41]] = [2.0, -1.5, 3.0]
    np.testing.assert_allclose(res.beta.values, expected, atol=1e-6)
    assert res.beta.intercept == pytest.approx(0.5, abs=1e-6)
    assert not res.empty_model
    assert len(res.per_subset) == 4
    assert [beta.subset_id for beta in res.refits] == [0, 1, 2, 3]


def test_message_single_subset_is_full_data(regression):
    cfg = MethodConfig(m=1, selector=FAST)
    message = run_message(regression, cfg, random_partition(regression.n, 1, 0))
    full = run_full_data(regression, cfg)
    assert message.gamma == full.gamma
    np.testing.assert_allclose(message.beta.values, full.beta.values, atol=1e-10)
    assert message.beta.intercept == pytest.approx(full.beta.intercept, abs=1e-10)


def test_message_independent_of_workers(regression):
    cfg = MethodConfig(m=3, seed=5, selector=FAST)
    plan = random_partition(regression.n, 3, 5)
    single = run_message(regression, cfg, plan, threads=1)
    pooled = run_message(regression, cfg, plan, threads=2)
    assert single.gamma == pooled.gamma
    assert np.array_equal(single.beta.values, pooled.beta.values)
    assert single.beta.intercept == pooled.beta.intercept
    assert [fit.gamma for fit in single.per_subset] == [fit.gamma for fit in pooled.per_subset]


def test_averaging_inflates_support(disjoint_signals):
    cfg = MethodConfig(m=2, selector=FAST)
    plan = _two_halves(100)
    averaged = run_averaging(disjoint_signals, cfg, plan)
    assert averaged.gamma.indices.tolist() == [1, 2]
    np.testing.assert_allclose(averaged.beta.values, [0.0, 2.5, 2.5], atol=1e-8)

    message = run_message(disjoint_signals, cfg, plan)
    assert message.gamma.size == 0
    assert message.empty_model
    assert np.all(message.beta.values == 0)


def test_geometric_median_single_subset_is_full_data(regression):
    cfg = MethodConfig(method=MethodName.GEOMETRIC_MEDIAN, m=1, selector=FAST)
    gm = run_geometric_median(regression, cfg, random_partition(regression.n, 1, 0))
    full = run_full_data(regression, cfg)
    np.testing.assert_allclose(gm.beta.values, full.beta.values, atol=1e-10)
    assert gm.method == MethodName.GEOMETRIC_MEDIAN
    assert gm.beta.method == "geometric_median"


@pytest.mark.parametrize("resamples", [1, 3])
def test_bolasso_without_resampling_is_full_data(regression, resamples):
    cfg = MethodConfig(method=MethodName.BOLASSO, bolasso_B=resamples, selector=FAST)
    bolasso = run_bolasso(regression, cfg, resample=lambda n, seed, b: np.arange(n))
    full = run_full_data(regression, cfg)
    assert bolasso.gamma == full.gamma
    np.testing.assert_allclose(bolasso.beta.values, full.beta.values, atol=1e-10)
    assert len(bolasso.per_subset) == resamples


def test_bolasso_bootstrap(regression):
    cfg = MethodConfig(method=MethodName.BOLASSO, bolasso_B=4, seed=2, selector=FAST)
    res = run_bolasso(regression, cfg)
    assert set(res.gamma.indices.tolist()) <= set(res.per_subset[0].gamma.indices.tolist())
    assert res.ledger == CommLedger()


def test_plan_mismatch(regression):
    cfg = MethodConfig(m=3)
    with pytest.raises(ConfigError):
        run_message(regression, cfg, random_partition(regression.n, 2, 0))
    with pytest.raises(ConfigError):
        run_message(regression, cfg, random_partition(regression.n - 1, 3, 0))
    with pytest.raises(ConfigError):
        run_method(regression, cfg)


def test_selection_failure_names_subset(rng):
    x = rng.standard_normal((40, 3))
    x[20:, 1] = x[20:, 0]
    d = make_dataset(x, x[:, 0] + rng.standard_normal(40))
    cfg = MethodConfig(m=2, selector=SelectorConfig(SelectorKind.FIXED_SUPPORT, support=(0, 1)))
    with pytest.raises(NumericalError) as info:
        run_message(d, cfg, _two_halves(40))
    assert info.value.subset == 1
    assert "subset 1" in str(info.value)


def test_ledger():
    ledger = CommLedger(uplink_bits=1000, downlink_bits=1000, uplink_floats=30, rounds=2)
    assert CommLedger.from_dict(ledger.to_dict()) == ledger


def test_communication_cost(noiseless):
    d = noiseless(n=2000, p=100, support=(1, 2, 3))
    cfg = MethodConfig(m=10, selector=FAST)
    plan = random_partition(d.n, 10, 0)
    res = run_message(d, cfg, plan)
    assert res.gamma.size == 3
    assert res.ledger == CommLedger(1000, 1000, 30, 2)
    assert communication_cost(res) == res.ledger

    avg = run_averaging(d, cfg.replace(method=MethodName.AVERAGING), plan)
    assert avg.ledger == CommLedger(0, 0, 1000, 1)
    assert run_full_data(d, cfg).ledger == CommLedger()


@pytest.mark.parametrize("method", list(MethodName))
def test_run_method_dispatch(regression, method):
    cfg = MethodConfig(method=method, m=2, bolasso_B=2, selector=FAST)
    res = run_method(regression, cfg, random_partition(regression.n, 2, 0))
    assert isinstance(res, MethodResult)
    assert res.method == method
    assert res.beta.p == regression.p
    assert res.wall_time >= 0


def test_result_to_dict(regression):
    cfg = MethodConfig(m=2, selector=FAST)
    res = run_message(regression, cfg, random_partition(regression.n, 2, 0))
    data = res.to_dict(regression.column_names)
    assert data["method"] == "message"
    assert data["gamma"] == res.gamma.indices.tolist()
    assert data["selected_features"] == [regression.column_names[j] for j in data["gamma"]]
    assert len(data["per_subset"]) == 2
    assert data["ledger"]["rounds"] == 2


def test_method_config():
    cfg = MethodConfig(method=MethodName.BOLASSO, m=4, bolasso_B=8, seed=2**63)
    assert MethodConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.replace(m=2).m == 2
    for bad in ({"m": 0}, {"bolasso_B": 0}, {"seed": -1}):
        with pytest.raises(ConfigError):
            MethodConfig(**bad)
    with pytest.raises(ConfigError):
        MethodConfig.from_dict({"method": "ridge"})
