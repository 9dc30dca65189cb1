# tests/conftest.py

import numpy as np
import pytest

from mirror_mass.physics.quadrature import QuadratureSpec


@pytest.fixture
def spec():
    """Default tolerances."""
    return QuadratureSpec()


@pytest.fixture
def quick_spec():
    """Loose tolerances and a short history window for smoke-level runs."""
    return QuadratureSpec(rel_tol=1e-6, abs_tol=1e-10, window_lambda=30)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
