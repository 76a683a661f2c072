import os
import sys

import numpy as np
import pytest

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)
sys.path.insert(0, HERE)

CONFIGS = os.path.join(ROOT, "configs")
GOLDEN = os.path.join(HERE, "golden")


def desk_config(name):
    return os.path.join(CONFIGS, "desk", f"{name}.cfg")


def data_spec(name):
    return os.path.join(CONFIGS, "data", f"{name}.spec")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _dataset(name, tmp_path_factory):
    from recipekit.harness.data import SyntheticDatasetSpec, generate_dataset, write_dataset

    with open(data_spec(name)) as fh:
        spec = SyntheticDatasetSpec.from_text(fh.read())
    stem = str(tmp_path_factory.mktemp(f"data-{name}") / name)
    ds = generate_dataset(spec)
    write_dataset(stem, ds)
    return stem, ds


@pytest.fixture(scope="session")
def default_data(tmp_path_factory):
    """``(stem, Dataset)`` for the default desk dataset, written once per session."""
    return _dataset("default", tmp_path_factory)


@pytest.fixture(scope="session")
def noisy_data(tmp_path_factory):
    return _dataset("noisy", tmp_path_factory)
