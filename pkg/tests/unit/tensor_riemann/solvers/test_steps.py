"""
Tests for the objective, the Riemannian steps and the baselines.
"""

import numpy as np
import pytest

from tensor_riemann.core import (
    DegenerateDesignError,
    InvalidArgumentError,
    NumericalFailureError,
    inner,
)
from tensor_riemann.manifold import (
    compute_gauge,
    project_tangent,
    tangent_basis,
    tangent_to_dense,
)
from tensor_riemann.regression import DesignKind, apply, generate_gaussian_instance
from tensor_riemann.regression.trip import random_unit_tucker
from tensor_riemann.solvers import (
    Algorithm,
    FactoredState,
    SolverConfig,
    closed_form_vector_update,
    euclidean_gradient,
    exact_line_search_stepsize,
    factored_gd_step,
    least_squares,
    loss,
    pgd_step,
    rgd_step,
    rgn_step_vector_closed_form,
    rgn_tangent_update,
    riemannian_gradient,
    select_baseline_stepsize,
)
from tensor_riemann.tucker import sthosvd


pytestmark = [pytest.mark.tensor_riemann, pytest.mark.unit, pytest.mark.solvers]


def _near_truth(instance, rng, rel=0.05):
    truth = instance.truth_dense
    noise = rng.standard_normal(truth.shape)
    noise *= rel * np.linalg.norm(truth) / np.linalg.norm(noise)
    return sthosvd(truth + noise, instance.ground_truth.rank)


def _dense_gn_oracle(instance, gauge):
    # Least squares over the explicit tangent basis.
    basis = tangent_basis(gauge)
    images = np.column_stack(
        [
            np.ravel(
                apply(instance.design, np.reshape(col, gauge.shape, order="F")),
                order="F",
            )
            for col in basis.T
        ]
    )
    theta, *_ = np.linalg.lstsq(
        images, np.ravel(instance.observations, order="F"), rcond=None
    )
    return np.reshape(basis @ theta, gauge.shape, order="F")


class TestObjective:
    """Test cases for the loss and its gradients."""

    def test_loss_zero_at_truth(self, scalar_instance):
        """Test the noiseless loss vanishes at the truth."""
        assert loss(scalar_instance, scalar_instance.truth_dense) < 1e-25

    def test_gradient_matches_finite_difference(self, rng, mixed_instance):
        """Test <grad, h> against a central difference of the quadratic loss."""
        x = rng.standard_normal(mixed_instance.param_shape)
        h = rng.standard_normal(mixed_instance.param_shape)
        t = 1e-3
        fd = (loss(mixed_instance, x + t * h) - loss(mixed_instance, x - t * h)) / (2 * t)
        assert inner(euclidean_gradient(mixed_instance, x), h) == pytest.approx(
            fd, rel=1e-7
        )

    @pytest.mark.parametrize("seed", range(10))
    def test_riemannian_gradient_matches_finite_difference(self, seed):
        """Test <grad_R, xi> against central differences along tangent directions."""
        d, m = [(3, 0), (2, 1), (1, 2)][seed % 3]
        instance = generate_gaussian_instance((6, 5, 4), d, m, 2, 0.1, 30, seed=seed)
        rng = np.random.Generator(np.random.PCG64(seed))
        x = random_unit_tucker(rng, (6, 5, 4), (2, 2, 2))
        g = compute_gauge(x)
        grad = riemannian_gradient(instance, x, g)
        base = x.dense()
        h = 1e-3
        for _ in range(20):
            xi = project_tangent(g, rng.standard_normal(base.shape))
            fd = (loss(instance, base + h * xi) - loss(instance, base - h * xi)) / (2 * h)
            scale = np.linalg.norm(grad) * np.linalg.norm(xi)
            assert abs(inner(grad, xi) - fd) <= 1e-5 * scale

    def test_riemannian_gradient_is_tangent(self, rng, mixed_instance):
        """Test the Riemannian gradient is the projected Euclidean gradient."""
        x = _near_truth(mixed_instance, rng)
        g = compute_gauge(x)
        grad = riemannian_gradient(mixed_instance, x, g)
        expected = project_tangent(g, euclidean_gradient(mixed_instance, x.dense()))
        np.testing.assert_allclose(grad, expected, atol=1e-12)

    def test_iterate_shape_checked(self, rng, scalar_instance):
        """Test iterates of the wrong shape are rejected."""
        x = sthosvd(rng.standard_normal((6, 5, 3)), (2, 2, 2))
        with pytest.raises(InvalidArgumentError) as exc_info:
            riemannian_gradient(scalar_instance, x)
        assert exc_info.value.field == "x"

    def test_identity_line_search(self, rng, identity_instance):
        """Test the exact stepsize is one for an isometric design."""
        g = rng.standard_normal(identity_instance.param_shape)
        assert exact_line_search_stepsize(identity_instance, g) == pytest.approx(1.0)


class TestRgdStep:
    """Test cases for the gradient step."""

    def test_decreases_loss(self, rng, scalar_instance):
        """Test one step lowers the loss and keeps the rank."""
        x = _near_truth(scalar_instance, rng)
        cfg = SolverConfig(algorithm=Algorithm.RGD, input_rank=x.rank)
        x_next, alpha = rgd_step(scalar_instance, x, cfg)
        assert alpha > 0
        assert x_next.rank == x.rank
        assert loss(scalar_instance, x_next.dense()) < loss(scalar_instance, x.dense())

    @pytest.mark.parametrize(
        "fixture", ["scalar_instance", "mixed_instance", "vector_instance"]
    )
    def test_exact_stepsize_minimizes_along_gradient(self, request, rng, fixture):
        """Test the exact stepsize decreases the loss before retraction."""
        instance = request.getfixturevalue(fixture)
        x = _near_truth(instance, rng)
        grad = riemannian_gradient(instance, x)
        alpha = exact_line_search_stepsize(instance, grad)
        base = x.dense()
        best = loss(instance, base - alpha * grad)
        assert best <= loss(instance, base)
        for t in (0.5 * alpha, 1.5 * alpha):
            assert best <= loss(instance, base - t * grad)

        cfg = SolverConfig(algorithm=Algorithm.RGD, input_rank=x.rank)
        _, used = rgd_step(instance, x, cfg)
        assert used == pytest.approx(alpha)


class TestLeastSquares:
    """Test cases for the QR least-squares helper."""

    def test_full_rank(self, rng):
        """Test a well-posed system matches numpy's solution."""
        a = rng.standard_normal((10, 4))
        b = rng.standard_normal(10)
        expected, *_ = np.linalg.lstsq(a, b, rcond=None)
        np.testing.assert_allclose(least_squares(a, b, 1e-12), expected, atol=1e-12)

    def test_underdetermined_gets_ridge(self, rng):
        """Test a wide system is regularized instead of failing."""
        a = rng.standard_normal((2, 4))
        b = rng.standard_normal(2)
        x = least_squares(a, b, 1e-12)
        np.testing.assert_allclose(a @ x, b, atol=1e-6)

    @pytest.mark.parametrize("shape", [(2, 4), (6, 3)])
    def test_ridge_solves_regularized_normal_equations(self, rng, shape):
        """Test the ridge adds ridge_eps * I to the normal equations."""
        a = rng.standard_normal(shape)
        if shape[0] > shape[1]:
            a[:, 2] = a[:, 0]
        b = rng.standard_normal(shape[0])
        ridge = 1e-2
        expected = np.linalg.solve(a.T @ a + ridge * np.eye(shape[1]), a.T @ b)
        np.testing.assert_allclose(least_squares(a, b, ridge), expected, atol=1e-10)

    def test_rank_deficient_without_ridge(self, rng):
        """Test a singular system fails when no ridge is allowed."""
        a = np.ones((5, 2))
        with pytest.raises(NumericalFailureError):
            least_squares(a, rng.standard_normal(5), 0.0)

    def test_non_finite(self):
        """Test non-finite systems are rejected."""
        with pytest.raises(NumericalFailureError):
            least_squares(np.full((3, 2), np.inf), np.zeros(3), 1e-12)


class TestRgnUpdate:
    """Test cases for the Gauss-Newton tangent update."""

    @pytest.mark.parametrize(
        "fixture", ["scalar_instance", "mixed_instance", "vector_instance"]
    )
    def test_matches_dense_oracle(self, request, rng, fixture):
        """Test the structured solve equals least squares over the tangent basis."""
        instance = request.getfixturevalue(fixture)
        g = compute_gauge(_near_truth(instance, rng))
        update = tangent_to_dense(rgn_tangent_update(instance, g))
        np.testing.assert_allclose(update, _dense_gn_oracle(instance, g), atol=1e-8)

    def test_matrix_trace_matches_oracle(self, rng, matrix_trace_instance):
        """Test the order-2 update against the dense oracle."""
        g = compute_gauge(_near_truth(matrix_trace_instance, rng))
        update = tangent_to_dense(rgn_tangent_update(matrix_trace_instance, g))
        expected = _dense_gn_oracle(matrix_trace_instance, g)
        np.testing.assert_allclose(update, expected, atol=1e-8)

    def test_identity_design_projects_truth(self, rng, identity_instance):
        """Test the update is P_T(X*) when the design is the identity."""
        g = compute_gauge(_near_truth(identity_instance, rng))
        update = tangent_to_dense(rgn_tangent_update(identity_instance, g))
        expected = project_tangent(g, identity_instance.truth_dense)
        np.testing.assert_allclose(update, expected, atol=1e-10)

    def test_closed_form_matches_least_squares(self, rng, vector_instance):
        """Test the closed-form vector update equals the general solve."""
        g = compute_gauge(_near_truth(vector_instance, rng))
        closed = tangent_to_dense(closed_form_vector_update(vector_instance, g))
        general = tangent_to_dense(rgn_tangent_update(vector_instance, g))
        np.testing.assert_allclose(closed, general, atol=1e-8)

    def test_closed_form_needs_tall_design(self, rng):
        """Test the closed form rejects n < p_1."""
        instance = generate_gaussian_instance(
            (6, 3, 3), 1, 2, 1, 0.0, 4, seed=2, kind=DesignKind.VECTOR
        )
        cfg = SolverConfig(input_rank=(1, 1, 1))
        with pytest.raises(DegenerateDesignError):
            rgn_step_vector_closed_form(instance, _near_truth(instance, rng), cfg)

    def test_closed_form_needs_vector_design(self, rng, mixed_instance):
        """Test general designs are refused by the closed form."""
        cfg = SolverConfig(input_rank=(2, 2, 2))
        with pytest.raises(DegenerateDesignError):
            x = _near_truth(mixed_instance, rng)
            rgn_step_vector_closed_form(mixed_instance, x, cfg)


class TestBaselines:
    """Test cases for PGD and factored gradient descent."""

    def test_zero_stepsize_is_identity(self, rng, scalar_instance):
        """Test a zero step returns the iterate unchanged."""
        x = _near_truth(scalar_instance, rng)
        cfg = SolverConfig(algorithm=Algorithm.PGD, input_rank=x.rank)
        assert pgd_step(scalar_instance, x, 0.0, cfg) is x
        state = FactoredState.from_tucker(x)
        assert factored_gd_step(scalar_instance, state, 0.0) is state

    def test_pgd_decreases_loss(self, rng, scalar_instance):
        """Test a moderate PGD step lowers the loss."""
        x = _near_truth(scalar_instance, rng)
        cfg = SolverConfig(algorithm=Algorithm.PGD, input_rank=x.rank)
        x_next = pgd_step(scalar_instance, x, 0.5, cfg)
        assert loss(scalar_instance, x_next.dense()) < loss(scalar_instance, x.dense())

    def test_factored_state_round_trip(self, rng, scalar_instance):
        """Test the factored state represents the same tensor."""
        x = _near_truth(scalar_instance, rng)
        state = FactoredState.from_tucker(x)
        np.testing.assert_allclose(state.dense(), x.dense(), atol=1e-12)
        np.testing.assert_allclose(state.to_tucker().dense(), x.dense(), atol=1e-10)

    def test_factored_step_decreases_loss(self, rng, scalar_instance):
        """Test a small factored step lowers the loss."""
        x = _near_truth(scalar_instance, rng)
        state = FactoredState.from_tucker(x)
        nxt = factored_gd_step(scalar_instance, state, 0.05)
        assert loss(scalar_instance, nxt.dense()) < loss(scalar_instance, state.dense())

    def test_selects_descending_stepsize(self, rng, scalar_instance):
        """Test a useful stepsize beats a zero one."""
        x = _near_truth(scalar_instance, rng)
        cfg = SolverConfig(
            algorithm=Algorithm.PGD, input_rank=x.rank, baseline_stepsizes=(0.0, 0.5)
        )
        assert select_baseline_stepsize(scalar_instance, x, cfg, trial_iters=3) == 0.5

    def test_all_divergent_falls_back_to_smallest(self, rng, scalar_instance):
        """Test the smallest grid entry is kept when every trial run diverges."""
        x = _near_truth(scalar_instance, rng)
        cfg = SolverConfig(
            algorithm=Algorithm.FACTORED_GD,
            input_rank=x.rank,
            baseline_stepsizes=(1e8, 1e6),
        )
        assert select_baseline_stepsize(scalar_instance, x, cfg, trial_iters=3) == 1e6
