import numpy as np
import pytest

from rssbag.data.dataset import Dataset
from rssbag.mlp.config import MlpConfig
from rssbag.numerics.rng import RngStream


def separable(n: int = 40, d: int = 3, classes: int = 2, shift: float = 3.0, seed: int = 11) -> Dataset:
    """Gaussian clusters far enough apart that any sane classifier separates them."""
    rng = RngStream(seed)
    labels = np.arange(n) % classes
    features = rng.normal(size=(n, d))
    features[:, 0] += shift * labels

    return Dataset(features, labels, classes, name='separable')


@pytest.fixture
def rng():
    return RngStream(2024)


@pytest.fixture
def binary():
    return separable()


@pytest.fixture
def ternary():
    return separable(n=45, classes=3)


@pytest.fixture
def small_mlp():
    return MlpConfig(1, 2, hidden=(8,), epochs=3, batch_size=8, learning_rate=0.05)


@pytest.fixture
def csv_file(tmp_path):
    def write(text: str, name: str = 'data.csv'):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return path

    return write
