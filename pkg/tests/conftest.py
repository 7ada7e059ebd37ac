import numpy as np
import pytest

from src.weaksim.scenario import box_basis, three_box


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """Keep developer WEAKSIM_* settings out of the tests"""
    for name in ("WEAKSIM_ZERO_TOL", "WEAKSIM_ZERO_TEST_K", "WEAKSIM_SEED",
                 "WEAKSIM_TRIALS", "WEAKSIM_WORKERS", "WEAKSIM_VERBOSE"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def box():
    return three_box()


@pytest.fixture
def basis():
    return box_basis()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
