import os
from pathlib import Path

import numpy as np
import pytest

from racorn import PriceRelativeSeries

DATA_DIR = Path(os.environ.get("RACORN_DATA_DIR", Path(__file__).parent / "data"))


def random_walk(n, m, seed, vol=0.02):
    rng = np.random.default_rng(seed)
    return PriceRelativeSeries(np.exp(rng.normal(0.0, vol, (n, m))), ())


@pytest.fixture
def walk_5x100():
    return random_walk(100, 5, seed=7)


@pytest.fixture
def walk_2x30():
    return random_walk(30, 2, seed=3, vol=0.05)


@pytest.fixture
def symmetric_fixture():
    rows = np.array([[1.2, 0.8], [0.8, 1.2]] * 4)
    return PriceRelativeSeries(rows, ("A", "B"))


def dataset(name):
    path = DATA_DIR / f"{name}.csv"
    if not path.exists():
        pytest.skip(f"{path} not present (run scripts/fetch_olps_data.py)")
    return path
