"""
Tests for problem instances and isometry diagnostics.
"""

import numpy as np
import pytest

from tensor_riemann.core import InvalidArgumentError
from tensor_riemann.regression import (
    DesignKind,
    LinearDesign,
    ProblemInstance,
    apply,
    degrees_of_freedom,
    estimate_trip,
    generate_gaussian_instance,
    load_instance,
    min_mode_singular_value,
    relative_error,
    save_instance,
)


pytestmark = [pytest.mark.tensor_riemann, pytest.mark.unit, pytest.mark.regression]


class TestGenerateGaussianInstance:
    """Test cases for the Gaussian ensemble."""

    def test_shapes(self, mixed_instance):
        """Test observation and truth shapes."""
        assert mixed_instance.observations.shape == (60, 4)
        assert mixed_instance.ground_truth.rank == (2, 2, 2)
        assert mixed_instance.param_shape == (6, 5, 4)
        assert mixed_instance.design.scale == pytest.approx(1.0 / np.sqrt(60))

    def test_noiseless_observations(self, scalar_instance):
        """Test noiseless observations equal A(X*)."""
        expected = apply(scalar_instance.design, scalar_instance.truth_dense)
        np.testing.assert_allclose(scalar_instance.observations, expected, atol=1e-14)

    def test_deterministic(self):
        """Test the same seed reproduces the instance exactly."""
        a = generate_gaussian_instance((4, 3, 2), 2, 1, 1, 0.1, 10, seed=3)
        b = generate_gaussian_instance((4, 3, 2), 2, 1, 1, 0.1, 10, seed=3)
        np.testing.assert_array_equal(a.observations, b.observations)
        np.testing.assert_array_equal(a.design.covariates, b.design.covariates)

    def test_truth_independent_of_n(self):
        """Test the truth is drawn before the covariates."""
        a = generate_gaussian_instance((4, 3, 2), 3, 0, 2, 0.0, 5, seed=9)
        b = generate_gaussian_instance((4, 3, 2), 3, 0, 2, 0.0, 50, seed=9)
        np.testing.assert_array_equal(a.truth_dense, b.truth_dense)

    def test_noise_is_scaled(self):
        """Test noisy observations differ from A(X*) by scale times the noise."""
        inst = generate_gaussian_instance((4, 3), 2, 0, 1, 1.0, 400, seed=5)
        residual = inst.observations - apply(inst.design, inst.truth_dense)
        # Raw N(0, 1) noise scaled by 1/sqrt(400) has unit total energy on average.
        assert np.sum(residual**2) == pytest.approx(1.0, rel=0.3)

    def test_sample_moments(self):
        """Test scaled covariates have variance 1/n and scaled noise sigma^2/n."""
        n, sigma = 2000, 0.5
        inst = generate_gaussian_instance((10, 8, 6), 1, 2, 2, sigma, n, seed=21)
        covariates = inst.design.scale * inst.design.covariates
        assert covariates.mean() == pytest.approx(0.0, abs=5 * np.sqrt(1.0 / n / 20000))
        assert covariates.var() == pytest.approx(1.0 / n, rel=0.05)

        noise = inst.observations - apply(inst.design, inst.truth_dense)
        assert noise.var() == pytest.approx(sigma**2 / n, rel=0.05)

    def test_vector_kind(self, vector_instance):
        """Test vector designs carry an n x p_1 covariate matrix."""
        assert vector_instance.design.kind is DesignKind.VECTOR
        assert vector_instance.design.covariates.shape == (40, 6)
        assert vector_instance.observations.shape == (40, 5, 4)

    @pytest.mark.parametrize(
        "kwargs,field",
        [
            ({"dims": (4, 3), "d": 1, "m": 0}, "dims"),
            ({"r_star": 5}, "r_star"),
            ({"n": 0}, "n"),
            ({"sigma": -1.0}, "sigma"),
            ({"kind": DesignKind.VECTOR}, "d"),
        ],
    )
    def test_invalid(self, kwargs, field):
        """Test invalid arguments name the offending field."""
        args = {"dims": (4, 3), "d": 2, "m": 0, "r_star": 1, "sigma": 0.0, "n": 5}
        args.update(kwargs)
        with pytest.raises(InvalidArgumentError) as exc_info:
            generate_gaussian_instance(seed=0, **args)
        assert exc_info.value.field == field


class TestProblemInstance:
    """Test cases for ProblemInstance."""

    def test_observation_shape_checked(self, rng):
        """Test observations must match the design."""
        design = LinearDesign(DesignKind.GENERAL, rng.standard_normal((4, 3)), (3,))
        with pytest.raises(InvalidArgumentError) as exc_info:
            ProblemInstance(design, np.zeros(5))
        assert exc_info.value.field == "observations"

    def test_truth_dense_without_truth(self, rng):
        """Test the dense truth is absent when not known."""
        design = LinearDesign(DesignKind.GENERAL, rng.standard_normal((4, 3)), (3,))
        assert ProblemInstance(design, np.zeros(4)).truth_dense is None


class TestPersistence:
    """Test cases for saving and loading instances."""

    def test_round_trip(self, tmp_path, mixed_instance):
        """Test a saved instance loads back unchanged."""
        save_instance(tmp_path / "inst", mixed_instance)
        loaded = load_instance(tmp_path / "inst")
        assert loaded.design.kind is mixed_instance.design.kind
        assert loaded.design.scale == mixed_instance.design.scale
        assert loaded.seed == mixed_instance.seed
        np.testing.assert_array_equal(loaded.observations, mixed_instance.observations)
        np.testing.assert_array_equal(
            loaded.design.covariates, mixed_instance.design.covariates
        )
        np.testing.assert_array_equal(loaded.truth_dense, mixed_instance.truth_dense)

    def test_metadata_written(self, tmp_path, vector_instance):
        """Test the metadata record lists the layout."""
        path = save_instance(tmp_path, vector_instance)
        text = (path / "instance.json").read_text()
        assert '"kind": "vector"' in text
        assert '"n": 40' in text


class TestSummaries:
    """Test cases for instance summaries."""

    def test_degrees_of_freedom(self):
        """Test sum r (p - r) + prod r."""
        assert degrees_of_freedom((30, 30, 30), (3, 3, 3)) == 3 * 3 * 27 + 27

    def test_relative_error(self):
        """Test the relative Frobenius error."""
        truth = np.ones((2, 2))
        assert relative_error(truth * 1.5, truth) == pytest.approx(0.5)

    def test_min_mode_singular_value(self):
        """Test the smallest r*-th singular value over all unfoldings."""
        x = np.diag([3.0, 2.0, 1.0])
        assert min_mode_singular_value(x, (2, 2)) == pytest.approx(2.0)
        assert min_mode_singular_value(x, (3, 1)) == pytest.approx(1.0)


class TestEstimateTrip:
    """Test cases for the sampled isometry constant."""

    def test_identity_design_is_isometric(self):
        """Test the identity design has constant zero."""
        estimate = estimate_trip(LinearDesign.identity((5, 4, 3)), (2, 2, 2), 20, seed=1)
        assert estimate.constant == pytest.approx(0.0, abs=1e-12)
        assert estimate.trials == 20

    def test_gaussian_design(self, scalar_instance):
        """Test a well-sampled Gaussian design is near-isometric."""
        estimate = estimate_trip(scalar_instance.design, (2, 2, 2), 50, seed=2)
        assert estimate.rmin <= estimate.rmax
        assert 0.0 < estimate.constant < 0.5

    def test_near_isometry_frequency(self):
        """Test n = 50 df Gaussian designs stay below 0.5 on nearly every seed."""
        rank = (2, 2, 2)
        n = 50 * degrees_of_freedom((4, 4, 4), rank)
        below = 0
        for seed in range(20):
            inst = generate_gaussian_instance((4, 4, 4), 3, 0, rank, 0.0, n, seed=seed)
            estimate = estimate_trip(inst.design, rank, 50, seed=seed)
            below += estimate.constant < 0.5
        assert below >= 19

    def test_single_measurement(self):
        """Test one measurement annihilates part of the sphere."""
        inst = generate_gaussian_instance((5, 4, 3), 3, 0, 2, 0.0, 1, seed=8)
        estimate = estimate_trip(inst.design, (2, 2, 2), 200, seed=8)
        assert 0.0 <= estimate.rmin <= estimate.rmax
        assert estimate.constant > 0.9

    def test_deterministic(self, scalar_instance):
        """Test the same seed reproduces the estimate."""
        a = estimate_trip(scalar_instance.design, (2, 2, 2), 10, seed=4)
        b = estimate_trip(scalar_instance.design, (2, 2, 2), 10, seed=4)
        assert a == b

    def test_trials_validated(self, scalar_instance):
        """Test at least one trial is required."""
        with pytest.raises(InvalidArgumentError) as exc_info:
            estimate_trip(scalar_instance.design, (2, 2, 2), 0, seed=0)
        assert exc_info.value.field == "trials"
