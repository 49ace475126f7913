"""
Shared fixtures.
"""
from typing import Callable, Sequence

import numpy as np
import pytest

from message_estimator.dataset import Dataset, Task


def make_dataset(
    x: np.ndarray, y: np.ndarray, task: Task = Task.REGRESSION
) -> Dataset:
    """Dataset with default column names."""
    return Dataset(x=x, y=y, column_names=[f"x{j}" for j in range(x.shape[1])], task=task)


def orthonormal_design(n: int, p: int, seed: int = 0) -> np.ndarray:
    """Centered design with X^T X / n = I."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, p))
    q, _ = np.linalg.qr(raw - raw.mean(axis=0))
    return np.sqrt(n) * q


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def noiseless() -> Callable[..., Dataset]:
    """Factory of noiseless sparse linear datasets."""

    def factory(
        n: int = 2000,
        p: int = 50,
        support: Sequence[int] = (3, 17, 41),
        values: Sequence[float] = (2.0, -1.5, 3.0),
        intercept: float = 0.5,
        seed: int = 0,
    ) -> Dataset:
        x = np.random.default_rng(seed).standard_normal((n, p))
        beta = np.zeros(p)
        beta[list(support)] = values
        return make_dataset(x, intercept + x @ beta)

    return factory


@pytest.fixture
def regression() -> Dataset:
    """Small noisy regression dataset with support {0, 1, 2}."""
    gen = np.random.default_rng(7)
    x = gen.standard_normal((300, 20))
    y = 1.0 + x[:, 0] * 2.0 - x[:, 1] * 1.5 + x[:, 2] + 0.5 * gen.standard_normal(300)
    return make_dataset(x, y)


@pytest.fixture
def classification() -> Dataset:
    """Logistic dataset with support {0, 1}."""
    gen = np.random.default_rng(11)
    x = gen.standard_normal((600, 8))
    eta = -0.3 + 1.5 * x[:, 0] - 1.0 * x[:, 1]
    y = (gen.random(600) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    return make_dataset(x, y, Task.CLASSIFICATION)
