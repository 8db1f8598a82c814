"""
Fixtures for experiment harness tests.
"""

import pytest

from tensor_riemann.experiments import ExperimentConfig, ModelKind


# Tiny instances that run in well under a second per cell.
SMALL_SCALAR = {
    "model.dims": [6, 5, 4],
    "model.d": 3,
    "model.m": 0,
    "model.r_star": 2,
    "grid.n_rule": None,
    "grid.n": [200],
    "grid.r": [2],
    "grid.seeds": 2,
    "solver.max_iters": 8,
    "solver.tol_rel_rmse": 1e-10,
}


@pytest.fixture
def small_config():
    """Factory for small experiment configs: ``small_config(kind, **overrides)``."""

    def _make(kind="convergence", model=None, **overrides):
        cfg = ExperimentConfig.default_for(kind, model)
        scalar = cfg.model.kind is ModelKind.SCALAR_TENSOR
        values = dict(SMALL_SCALAR) if scalar else {}
        values.update({key.replace("__", "."): value for key, value in overrides.items()})
        return cfg.with_overrides(values)

    return _make
