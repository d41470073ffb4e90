"""
Pytest configuration file for G2G SDK tests.
Sets up logging to debug level for g2g_sdk only.
"""

import logging
import sys

import numpy as np
import pytest

from tests.config import RUN_SLOW_TESTS, TEST_SEED

# Configure logging: root logger at WARNING to suppress noisy dependencies
logging.basicConfig(
    level=logging.WARNING,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S',
    handlers=[
        logging.StreamHandler(sys.stdout)
    ]
)

# Debug for the simulator/detector path; per-sample chatter stays at INFO
logging.getLogger('g2g_sdk').setLevel(logging.DEBUG)
logging.getLogger('g2g_sdk.core.detector').setLevel(logging.INFO)


@pytest.fixture
def rng():
    """Fresh generator with the suite seed for every test."""
    return np.random.default_rng(TEST_SEED)


def pytest_collection_modifyitems(config, items):
    if RUN_SLOW_TESTS:
        return
    skip_slow = pytest.mark.skip(reason="RUN_SLOW_TESTS=0")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
