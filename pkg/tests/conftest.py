import numpy as np
import pytest

from fraudlab.txdata import GeneratorConfig, generate


@pytest.fixture(scope="session")
def small_dataset():
    """20k-row synthetic set with enough fraud for split/fold tests."""
    return generate(GeneratorConfig(n_rows=20_000, fraud_rate=0.005, seed=7))


@pytest.fixture(scope="session")
def blob_xy():
    """Two well-separated Gaussian blobs, 300 legit / 60 fraud."""
    rng = np.random.default_rng(3)
    x = np.vstack([rng.normal(0.0, 1.0, (300, 4)),
                   rng.normal(2.5, 1.0, (60, 4))])
    y = np.concatenate([np.zeros(300, dtype=np.int8),
                        np.ones(60, dtype=np.int8)])
    return x, y


@pytest.fixture(scope="session")
def xor_xy():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0], dtype=np.int8)
    return x, y
