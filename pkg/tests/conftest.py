import numpy as np
import pytest

from regio_forecast import SyntheticSpec, generate_regions, split_train_test, train_mtl


@pytest.fixture(scope="session")
def small_datasets():
    """Three regions, 80 days each; fast enough for per-test reuse."""
    return generate_regions(SyntheticSpec(regions=3, rows=80, seed=7))


@pytest.fixture(scope="session")
def trained_small_model(small_datasets):
    ds = small_datasets[0]
    split = split_train_test(ds, 16, seed=7)
    model, report = train_mtl(small_datasets, ds.region, split.train_indices)
    return model, report, split


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
