"""
Tests of the dataset module.
"""
import numpy as np
import pytest

from message_estimator.dataset import (
    Case,
    Dataset,
    NoiseFamily,
    SyntheticConfig,
    Task,
    generate_synthetic,
    load_csv,
    random_partition,
    split_train_test,
    standardize,
    write_csv,
)
from message_estimator.exceptions import ConfigError, DataError
from tests.conftest import make_dataset


def test_dataset_validation():
    with pytest.raises(DataError):
        make_dataset(np.zeros((3, 2)), np.zeros(4))
    with pytest.raises(DataError):
        Dataset(x=np.zeros((3, 2)), y=np.zeros(3), column_names=["a"])
    with pytest.raises(DataError):
        make_dataset(np.zeros((3, 2)), np.array([0.0, 1.0, 2.0]), Task.CLASSIFICATION)


def test_subset_and_digest(rng):
    d = make_dataset(rng.standard_normal((10, 3)), rng.standard_normal(10))
    sub = d.subset([2, 5, 7])
    assert sub.n == 3
    np.testing.assert_array_equal(sub.x, d.x[[2, 5, 7]])
    assert d.subset(np.arange(10)) == d
    assert d.subset(np.arange(10)).digest() == d.digest()
    assert sub.digest() != d.digest()


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 1, "p": 5, "s": 1},
        {"n": 10, "p": 0, "s": 0},
        {"n": 10, "p": 5, "s": 6},
        {"n": 10, "p": 5, "s": 1, "rho": 1.0},
        {"n": 10, "p": 5, "s": 1, "rho": -0.1},
    ],
)
def test_synthetic_config_invalid(kwargs):
    with pytest.raises(ConfigError):
        SyntheticConfig(**kwargs)


def test_synthetic_config_round_trip():
    cfg = SyntheticConfig(n=100, p=10, s=2, rho=0.3, case=Case.CASE2, seed=9)
    assert SyntheticConfig.from_dict(cfg.to_dict()) == cfg


def test_generate_synthetic_reproducible():
    cfg = SyntheticConfig(n=500, p=30, s=3, rho=0.2, seed=4)
    d1, t1 = generate_synthetic(cfg)
    d2, t2 = generate_synthetic(cfg)
    assert d1 == d2
    np.testing.assert_array_equal(t1.beta, t2.beta)
    d3, _ = generate_synthetic(SyntheticConfig(n=500, p=30, s=3, rho=0.2, seed=5))
    assert d3 != d1


def test_generate_synthetic_coefficients():
    cfg = SyntheticConfig(n=1000, p=40, s=5, seed=1)
    d, truth = generate_synthetic(cfg)
    assert d.n == 1000 and d.p == 40
    assert truth.s == 5
    assert truth.noise == NoiseFamily.GAUSSIAN
    assert truth.sigma2 == 4.0
    floor = 8.0 * np.log(1000) / np.sqrt(1000)
    assert np.all(np.abs(truth.beta[truth.support]) >= floor)


def test_generate_synthetic_correlation():
    d, _ = generate_synthetic(SyntheticConfig(n=20000, p=4, s=1, rho=0.5, seed=2))
    corr = np.corrcoef(d.x, rowvar=False)
    off = corr[~np.eye(4, dtype=bool)]
    assert np.all(np.abs(off - 0.5) < 0.03)


def test_generate_synthetic_covariance_converges():
    rho = 0.3
    d, _ = generate_synthetic(SyntheticConfig(n=50000, p=10, s=2, rho=rho, seed=4))
    target = (1.0 - rho) * np.eye(10) + rho * np.ones((10, 10))
    assert np.linalg.norm(np.cov(d.x, rowvar=False) - target) < 0.1


def test_generate_synthetic_cases():
    d2, t2 = generate_synthetic(SyntheticConfig(n=200, p=10, s=2, case=Case.CASE2))
    assert t2.noise == NoiseFamily.STUDENT_T and d2.task == Task.REGRESSION
    d3, t3 = generate_synthetic(SyntheticConfig(n=200, p=10, s=2, case=Case.CASE3))
    assert t3.noise == NoiseFamily.LOGISTIC
    assert d3.task == Task.CLASSIFICATION
    assert set(np.unique(d3.y)) <= {0.0, 1.0}


def test_random_partition():
    plan = random_partition(103, 10, seed=3)
    sizes = plan.sizes()
    assert sum(sizes) == 103
    assert max(sizes) - min(sizes) <= 1
    rows = np.concatenate([plan.indices(i) for i in range(10)])
    np.testing.assert_array_equal(np.sort(rows), np.arange(103))
    assert np.all(np.diff(plan.indices(0)) > 0)
    again = random_partition(103, 10, seed=3)
    np.testing.assert_array_equal(plan.assignment, again.assignment)


@pytest.mark.parametrize("m", [0, 11])
def test_random_partition_invalid(m):
    with pytest.raises(ConfigError):
        random_partition(10, m, seed=0)


def test_split_train_test(rng):
    d = make_dataset(rng.standard_normal((10, 2)), rng.standard_normal(10))
    train, test = split_train_test(d, 7)
    assert train.n == 7 and test.n == 3
    np.testing.assert_array_equal(test.y, d.y[7:])
    with pytest.raises(ConfigError):
        split_train_test(d, 10)


def test_standardize(rng):
    d = make_dataset(3.0 + 2.0 * rng.standard_normal((50, 3)), rng.standard_normal(50))
    std, record = standardize(d)
    np.testing.assert_allclose(std.x.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(std.x.std(axis=0, ddof=1), 1.0)
    beta = np.array([1.0, -2.0, 0.5])
    raw, intercept = record.to_raw(beta, 0.3)
    np.testing.assert_allclose(intercept + d.x @ raw, 0.3 + std.x @ beta)


def test_standardize_constant_column(rng):
    x = rng.standard_normal((20, 2))
    x[:, 1] = 4.0
    with pytest.raises(DataError) as info:
        standardize(make_dataset(x, rng.standard_normal(20)))
    assert info.value.column == "x1"


def test_load_csv_categorical(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("a,color,y\n1.5,red,1\n2,blue,0\n-1,green,2\n0,red,3\n", encoding="utf-8")
    d = load_csv(path, "y", categorical=["color"])
    assert d.column_names == ["a", "color=green", "color=red"]
    np.testing.assert_array_equal(d.x[:, 1], [0, 0, 1, 0])
    np.testing.assert_array_equal(d.x[:, 2], [1, 0, 0, 1])
    np.testing.assert_array_equal(d.y, [1, 0, 2, 3])


def test_load_csv_errors(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("a,y\n1,2\nfoo,3\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_csv(path, "y")
    assert info.value.row == 2
    assert info.value.column == "a"
    with pytest.raises(DataError):
        load_csv(path, "target")
    with pytest.raises(DataError):
        load_csv(tmp_path / "missing.csv", "y")


def test_write_then_load(tmp_path, rng):
    d = make_dataset(rng.standard_normal((15, 3)), rng.standard_normal(15))
    write_csv(d, tmp_path / "d.csv")
    assert load_csv(tmp_path / "d.csv", "y") == d
