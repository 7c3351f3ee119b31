import os
import sys

import pytest

# Add project root to path for imports
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from src.data.ingestion import gen_clustered, gen_uniform  # noqa: E402
from src.index.models import IndexConfig  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def default_cfg():
    return IndexConfig()


@pytest.fixture(scope="session")
def small_cfg():
    """Shallow tree with a low split threshold so small datasets get deep."""
    return IndexConfig(L=10, psi=8)


@pytest.fixture(scope="session")
def uniform_2k(default_cfg):
    return gen_uniform(2000, seed=7, cfg=default_cfg)


@pytest.fixture(scope="session")
def clustered_2k(default_cfg):
    return gen_clustered(2000, clusters=5, sigma=150.0, seed=7, cfg=default_cfg)


@pytest.fixture(scope="session")
def uniform_10k(default_cfg):
    return gen_uniform(10_000, seed=42, cfg=default_cfg)


@pytest.fixture(scope="session")
def clustered_10k(default_cfg):
    return gen_clustered(10_000, clusters=10, sigma=200.0, seed=42, cfg=default_cfg)
