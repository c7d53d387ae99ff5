"""
Shared pytest configuration for targetnet

Long benchmark runs are opt-in: set TARGETNET_SLOW_TESTS=1 to enable tests
marked `slow`.
"""

import os

import numpy as np
import pytest
import structlog


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running benchmark (set TARGETNET_SLOW_TESTS=1)")


def pytest_collection_modifyitems(config, items):
    if os.getenv("TARGETNET_SLOW_TESTS", "").lower() in ("1", "true", "yes"):
        return
    skip_slow = pytest.mark.skip(reason="set TARGETNET_SLOW_TESTS=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Seeded generator for test data"""
    return np.random.default_rng(20240607)


@pytest.fixture(autouse=True)
def reset_logging():
    """Undo configure_logging calls made by CLI tests"""
    yield
    structlog.reset_defaults()
