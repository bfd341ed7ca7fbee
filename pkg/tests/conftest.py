"""
Shared test fixtures.
"""

import numpy as np
import pytest
from click.testing import CliRunner

from polynomial_sdf.schemas.basis import BasisConfig


@pytest.fixture
def unit3():
    """Cubic basis, four segments, over the unit cube."""
    return BasisConfig.unit(degree=3, segments=4, dim=3)


@pytest.fixture
def unit2():
    return BasisConfig.unit(degree=3, segments=4, dim=2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def runner():
    """Click test runner for in-process command invocations."""
    return CliRunner()
