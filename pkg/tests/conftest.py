"""Shared pytest fixtures."""

import numpy as np
import pytest

from helpers import separable_points


@pytest.fixture
def separable_fixture():
    """200 linearly separable 2-D points with string labels."""
    return separable_points(seed=7, n=200)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
