"""Shared fixtures for the jsrlab test-suite."""

import numpy as np
import pytest

from jsrlab.schemas import MatrixSet, NetworkParams
from jsrlab.tools.matset import benchmark_sigma2, benchmark_sigma8


@pytest.fixture
def sigma2() -> MatrixSet:
    return benchmark_sigma2()


@pytest.fixture
def sigma8() -> MatrixSet:
    return benchmark_sigma8()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def l1_network() -> NetworkParams:
    """V(x) = |x_1| + |x_2| written as a one-layer ReLU network."""
    return NetworkParams(
        layers=[[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]],
        output=[1.0, 1.0, 1.0, 1.0],
    )


@pytest.fixture(autouse=True)
def _single_worker(monkeypatch):
    monkeypatch.setenv("JSRLAB_WORKERS", "1")
    monkeypatch.delenv("JSRLAB_TEMPLATES_DIR", raising=False)
