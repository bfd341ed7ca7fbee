"""
Tests for tensor-product features, queries and the spherical prior.

Tests cover:
- Parameter counts
- Feature sums and the one-dimensional reduction
- Gradient and Hessian consistency with finite differences
- Value and gradient continuity across interior knot planes
- Constant fields
- Spherical prior fit and its validation
"""

import numpy as np
import pytest

from polynomial_sdf.exceptions import NumericalError, OutOfDomainError
from polynomial_sdf.models.field_model import FieldModel
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.services.basis_service import axis_bases, phi_1d
from polynomial_sdf.services.field_service import (
    features,
    features_batch,
    init_spherical_prior,
    param_count,
    query,
    query_batch,
    query_hessian,
    unit_orders,
)
from tests.builders import random_points


def random_model(config, seed=0):
    n = config.n_weights
    w = np.random.default_rng(seed).normal(size=n)
    return FieldModel(config=config, w=w, P=np.eye(n))


def away_from_knots(points, config, margin):
    knots = np.linspace(0.0, 1.0, config.segments + 1)
    gaps = np.abs(points[:, :, None] - knots[None, None, :]).min(axis=2)
    return points[np.all(gaps > margin, axis=1)]


# --- Parameter Count Tests ---

class TestParamCount:

    def test_six_segments_in_3d(self):
        assert param_count(BasisConfig.unit(degree=3, segments=6, dim=3)) == 2744

    def test_four_segments_in_3d(self):
        assert param_count(BasisConfig.unit(degree=3, segments=4, dim=3)) == 1000

    def test_single_cubic_segment(self):
        assert param_count(BasisConfig.unit(degree=3, segments=1, dim=1)) == 4

    def test_cubic_closed_form(self):
        for segments in range(1, 7):
            config = BasisConfig.unit(degree=3, segments=segments, dim=3)
            assert param_count(config) == 8 * (segments + 1) ** 3


# --- Feature Tests ---

class TestFeatures:

    def test_values_sum_to_one(self, unit3):
        rows = features_batch(unit3, random_points(unit3, 100))
        np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-9)

    def test_derivative_rows_sum_to_zero(self, unit3):
        points = random_points(unit3, 50)
        for orders in [(1, 0, 0), (0, 0, 2), (1, 1, 0), (0, 1, 1)]:
            np.testing.assert_allclose(
                features_batch(unit3, points, orders).sum(axis=1), 0.0, atol=1e-8
            )

    def test_one_dimension_reduces_to_axis_row(self):
        config = BasisConfig.unit(dim=1)
        axis = axis_bases(config)[0]
        for x in (0.0, 0.3, 0.75, 1.0):
            np.testing.assert_array_equal(features(config, [x]), phi_1d(x, axis))

    def test_kronecker_order_axis_one_outermost(self, unit2):
        axis_x, axis_y = axis_bases(unit2)
        x, y = 0.3, 0.8
        expected = np.outer(phi_1d(x, axis_x), phi_1d(y, axis_y)).ravel()
        np.testing.assert_allclose(features(unit2, [x, y]), expected, atol=1e-15)

    def test_single_point_matches_batch(self, unit3):
        points = random_points(unit3, 3)
        np.testing.assert_array_equal(features(unit3, points[1]), features_batch(unit3, points)[1])

    def test_orders_validated(self, unit3):
        with pytest.raises(ValueError, match="sum <= 2"):
            features(unit3, [0.5, 0.5, 0.5], (1, 1, 1))
        with pytest.raises(ValueError, match="need 3"):
            features(unit3, [0.5, 0.5, 0.5], (1, 0))

    def test_out_of_domain_rejected(self, unit3):
        with pytest.raises(OutOfDomainError):
            features(unit3, [0.5, 1.2, 0.5])

    def test_wrong_dimension_rejected(self, unit3):
        with pytest.raises(OutOfDomainError, match="coordinates"):
            features(unit3, [0.5, 0.5])

    def test_unit_orders(self):
        assert unit_orders(3, 0) == (1, 0, 0)
        assert unit_orders(3, 1, 1) == (0, 2, 0)
        assert unit_orders(2, 0, 1) == (1, 1)


# --- Query Tests ---

class TestQuery:

    def test_constant_field(self, unit3):
        model = FieldModel.constant(unit3, 0.7)
        for x in random_points(unit3, 10):
            result = query(model, x)
            assert result.distance == pytest.approx(0.7, abs=1e-12)
            np.testing.assert_allclose(result.gradient, 0.0, atol=1e-9)

    def test_constant_field_has_zero_hessian(self, unit3):
        model = FieldModel.constant(unit3, -1.5)
        np.testing.assert_allclose(query_hessian(model, [0.2, 0.6, 0.9]), 0.0, atol=1e-7)

    def test_batch_matches_single(self, unit3):
        model = random_model(unit3)
        points = random_points(unit3, 5)
        distances, gradients = query_batch(model, points)
        for i, x in enumerate(points):
            result = query(model, x)
            assert result.distance == pytest.approx(distances[i], rel=1e-12)
            np.testing.assert_allclose(result.gradient, gradients[i], rtol=1e-12)

    def test_distance_is_feature_dot_weights(self, unit3):
        model = random_model(unit3, seed=3)
        x = [0.1, 0.45, 0.9]
        assert query(model, x).distance == pytest.approx(features(unit3, x) @ model.w, rel=1e-12)

    @pytest.mark.parametrize("dim", [2, 3])
    def test_gradient_matches_central_difference(self, dim):
        config = BasisConfig.unit(dim=dim)
        model = random_model(config, seed=dim)
        h = 1e-6
        points = 0.01 + 0.98 * random_points(config, 100, seed=dim)
        for x in points:
            analytic = query(model, x).gradient
            numeric = np.empty(dim)
            for d in range(dim):
                step = np.zeros(dim)
                step[d] = h
                numeric[d] = (query(model, x + step).distance
                              - query(model, x - step).distance) / (2 * h)
            assert np.linalg.norm(analytic - numeric) <= 1e-5 * max(np.linalg.norm(analytic), 1.0)

    @pytest.mark.parametrize("dim", [2, 3])
    def test_hessian_matches_gradient_difference(self, dim):
        config = BasisConfig.unit(dim=dim)
        model = random_model(config, seed=10 + dim)
        h = 1e-4
        points = away_from_knots(0.01 + 0.98 * random_points(config, 100, seed=dim), config, 2 * h)
        assert len(points) > 50
        for x in points:
            analytic = query_hessian(model, x)
            numeric = np.empty((dim, dim))
            for d in range(dim):
                step = np.zeros(dim)
                step[d] = h
                numeric[:, d] = (query(model, x + step).gradient
                                 - query(model, x - step).gradient) / (2 * h)
            assert np.linalg.norm(analytic - numeric) <= 1e-4 * max(np.linalg.norm(analytic), 1.0)

    @pytest.mark.parametrize("dim", [2, 3])
    def test_continuous_across_knot_planes(self, dim):
        config = BasisConfig.unit(degree=3, segments=4, dim=dim)
        model = random_model(config, seed=20 + dim)
        eps = 1e-12
        points = 0.05 + 0.9 * random_points(config, 20, seed=dim)
        for d in range(dim):
            for knot in (0.25, 0.5, 0.75):
                on_plane = points.copy()
                on_plane[:, d] = knot
                below, above = on_plane.copy(), on_plane.copy()
                below[:, d] -= eps
                above[:, d] += eps
                f_below, g_below = query_batch(model, below)
                f_above, g_above = query_batch(model, above)
                scale = max(np.abs(f_below).max(), 1.0)
                np.testing.assert_allclose(f_above, f_below, atol=1e-9 * scale)
                scale = max(np.abs(g_below).max(), 1.0)
                np.testing.assert_allclose(g_above, g_below, atol=1e-6 * scale)

    def test_hessian_is_exactly_symmetric(self, unit3):
        model = random_model(unit3, seed=7)
        for x in random_points(unit3, 100):
            H = query_hessian(model, x)
            np.testing.assert_array_equal(H, H.T)

    def test_query_out_of_domain_rejected(self, unit2):
        with pytest.raises(OutOfDomainError):
            query(random_model(unit2), [-0.01, 0.5])


# --- Spherical Prior Tests ---

class TestSphericalPrior:

    def test_center_is_inside(self, unit3):
        model = init_spherical_prior(unit3, (0.5, 0.5, 0.5), 0.25, 1e2)
        # the cone tip at the center is the hardest point to fit
        assert query(model, [0.5, 0.5, 0.5]).distance == pytest.approx(-0.25, abs=0.05)

    def test_surface_is_near_zero(self, unit3):
        model = init_spherical_prior(unit3, (0.5, 0.5, 0.5), 0.25, 1e2)
        assert query(model, [0.75, 0.5, 0.5]).distance == pytest.approx(0.0, abs=2e-2)

    def test_gradient_points_outward(self, unit3):
        center = np.array([0.5, 0.5, 0.5])
        model = init_spherical_prior(unit3, center, 0.25, 1e2)
        for p in ([0.85, 0.5, 0.5], [0.3, 0.2, 0.75], [0.8, 0.8, 0.8]):
            gradient = query(model, p).gradient
            expected = (np.array(p) - center) / np.linalg.norm(np.array(p) - center)
            cosine = gradient @ expected / np.linalg.norm(gradient)
            assert 1.0 - cosine < 1e-2

    def test_initial_matrix_is_scaled_identity(self, unit3):
        model = init_spherical_prior(unit3, (0.5, 0.5, 0.5), 0.25, 37.0)
        np.testing.assert_array_equal(model.P, 37.0 * np.eye(1000))
        model.check_positive_definite()

    def test_two_dimensional_prior(self, unit2):
        model = init_spherical_prior(unit2, (0.4, 0.6), 0.2, 1.0)
        assert query(model, [0.6, 0.6]).distance == pytest.approx(0.0, abs=2e-2)

    def test_non_positive_radius_rejected(self, unit3):
        with pytest.raises(ValueError, match="radius"):
            init_spherical_prior(unit3, (0.5, 0.5, 0.5), 0.0, 1e2)

    def test_non_positive_strength_rejected(self, unit3):
        with pytest.raises(ValueError, match="strength"):
            init_spherical_prior(unit3, (0.5, 0.5, 0.5), 0.2, -1.0)

    def test_sphere_outside_domain_rejected(self, unit3):
        with pytest.raises(ValueError, match="does not intersect"):
            init_spherical_prior(unit3, (3.0, 3.0, 3.0), 0.5, 1e2)

    def test_sphere_enclosing_domain_rejected(self, unit3):
        with pytest.raises(ValueError, match="does not intersect"):
            init_spherical_prior(unit3, (0.5, 0.5, 0.5), 5.0, 1e2)

    def test_center_dimension_checked(self, unit3):
        with pytest.raises(ValueError, match="3 coordinates"):
            init_spherical_prior(unit3, (0.5, 0.5), 0.2, 1e2)


# --- Model Record Tests ---

class TestFieldModel:

    def test_state_size(self, unit3):
        model = FieldModel.constant(unit3, 0.0)
        assert model.state_size() == 1000 + 1000 * 1000

    def test_arrays_are_read_only(self, unit2):
        model = FieldModel.constant(unit2, 0.0)
        with pytest.raises(ValueError):
            model.w[0] = 1.0

    def test_caller_arrays_stay_writeable(self, unit2):
        w, P = np.zeros(100), np.eye(100)
        model = FieldModel(config=unit2, w=w, P=P)
        assert w.flags.writeable and P.flags.writeable
        w[0], P[0, 0] = 5.0, 7.0
        assert model.w[0] == 0.0
        assert model.P[0, 0] == 1.0

    def test_frozen_arrays_are_shared(self, unit2):
        model = FieldModel.constant(unit2, 0.0)
        assert model.with_transform(None).w is model.w

    def test_shape_mismatch_rejected(self, unit2):
        with pytest.raises(ValueError, match="weights must have shape"):
            FieldModel(config=unit2, w=np.zeros(5), P=np.eye(100))

    def test_indefinite_matrix_detected(self, unit2):
        P = np.eye(100)
        P[0, 0] = -1.0
        with pytest.raises(NumericalError, match="positive definite"):
            FieldModel(config=unit2, w=np.zeros(100), P=P).check_positive_definite()
