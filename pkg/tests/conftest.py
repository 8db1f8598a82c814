"""
Pytest configuration and shared fixtures for all tests.
"""

import os
import sys

# Add the project root to the path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

import numpy as np
import pytest

from tensor_riemann.regression import (
    DesignKind,
    LinearDesign,
    ProblemInstance,
    apply,
    generate_gaussian_instance,
)
from tensor_riemann.regression.trip import random_unit_tucker


# =============================================================================
# Numerical Fixtures
# =============================================================================

@pytest.fixture
def rng():
    """Seeded generator, fresh for every test."""
    return np.random.Generator(np.random.PCG64(20240501))


@pytest.fixture
def scalar_instance():
    """Small noiseless scalar-on-tensor instance, well above the recovery threshold."""
    return generate_gaussian_instance((6, 5, 4), d=3, m=0, r_star=2, sigma=0.0, n=400, seed=7)


@pytest.fixture
def mixed_instance():
    """General design with two covariate modes and one response mode."""
    return generate_gaussian_instance((6, 5, 4), d=2, m=1, r_star=2, sigma=0.0, n=60, seed=11)


@pytest.fixture
def vector_instance():
    """Tensor-on-vector instance with a tall covariate matrix."""
    return generate_gaussian_instance(
        (6, 5, 4), d=1, m=2, r_star=2, sigma=0.0, n=40, seed=13, kind=DesignKind.VECTOR
    )


@pytest.fixture
def matrix_trace_instance():
    """Matrix trace regression instance."""
    return generate_gaussian_instance(
        (8, 7), d=2, m=0, r_star=1, sigma=0.0, n=120, seed=17, kind=DesignKind.MATRIX_TRACE
    )


@pytest.fixture
def identity_instance(rng):
    """Identity design (``A = vec``) observing a unit-norm rank-(2, 2, 2) tensor."""
    truth = random_unit_tucker(rng, (5, 4, 3), (2, 2, 2))
    design = LinearDesign.identity((5, 4, 3))
    return ProblemInstance(design, apply(design, truth.dense()), truth)
