"""
Tests for the one-dimensional constrained Bernstein basis.

Tests cover:
- Bernstein values and the coefficient matrix
- Constraint matrix shape, row sums and boundary ties
- Segment location and the knot ownership convention
- Partition of unity, C1 continuity and derivative consistency
"""

import numpy as np
import pytest

from polynomial_sdf.exceptions import OutOfDomainError
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.services.basis_service import (
    AxisBasis,
    axis_bases,
    bernstein_basis,
    clamp_to_domain,
    coeff_matrix,
    constraint_matrix,
    locate_segment,
    phi_1d,
)


def monomial_row(degree, t):
    return t ** np.arange(degree + 1)


# --- Bernstein Polynomial Tests ---

class TestBernsteinBasis:

    def test_endpoint_interpolation(self):
        np.testing.assert_array_equal(bernstein_basis(3, 0.0), [1, 0, 0, 0])
        np.testing.assert_array_equal(bernstein_basis(3, 1.0), [0, 0, 0, 1])

    def test_midpoint_values(self):
        np.testing.assert_allclose(
            bernstein_basis(3, 0.5), [0.125, 0.375, 0.375, 0.125], atol=1e-15
        )

    def test_linear_basis(self):
        np.testing.assert_allclose(bernstein_basis(1, 0.25), [0.75, 0.25])

    def test_entries_sum_to_one(self, rng):
        for t in rng.random(20):
            assert bernstein_basis(5, t).sum() == pytest.approx(1.0, abs=1e-14)

    def test_rejects_unlocalized_t(self):
        with pytest.raises(OutOfDomainError, match="outside"):
            bernstein_basis(3, 1.5)

    def test_rejects_negative_degree(self):
        with pytest.raises(ValueError, match="degree"):
            bernstein_basis(-1, 0.5)


# --- Coefficient Matrix Tests ---

class TestCoeffMatrix:

    def test_linear(self):
        np.testing.assert_array_equal(coeff_matrix(1), [[1, 0], [-1, 1]])

    def test_quadratic(self):
        np.testing.assert_array_equal(
            coeff_matrix(2), [[1, 0, 0], [-2, 2, 0], [1, -2, 1]]
        )

    def test_cubic_at_one_picks_last(self):
        np.testing.assert_allclose(
            monomial_row(3, 1.0) @ coeff_matrix(3), [0, 0, 0, 1], atol=1e-12
        )

    def test_lower_triangular(self):
        B = coeff_matrix(4)
        np.testing.assert_array_equal(B, np.tril(B))

    def test_matches_bernstein_formula(self, rng):
        B = coeff_matrix(4)
        for t in rng.random(10):
            np.testing.assert_allclose(
                monomial_row(4, t) @ B, bernstein_basis(4, t), atol=1e-12
            )

    def test_is_read_only(self):
        with pytest.raises(ValueError):
            coeff_matrix(3)[0, 0] = 2.0


# --- Constraint Matrix Tests ---

class TestConstraintMatrix:

    def test_single_segment_is_identity(self):
        np.testing.assert_array_equal(constraint_matrix(3, 1), np.eye(4))

    def test_shape(self):
        assert constraint_matrix(3, 2).shape == (8, 6)
        assert constraint_matrix(3, 6).shape == (24, 14)

    def test_rows_sum_to_one(self):
        for degree, segments in [(2, 3), (3, 4), (5, 2)]:
            np.testing.assert_allclose(
                constraint_matrix(degree, segments).sum(axis=1), 1.0, atol=1e-12
            )

    def test_boundary_ties_hold(self, rng):
        degree, segments = 3, 4
        raw = constraint_matrix(degree, segments) @ rng.normal(size=(degree - 1) * segments + 2)
        per_segment = raw.reshape(segments, degree + 1)
        for a, b in zip(per_segment[:-1], per_segment[1:]):
            assert b[0] == pytest.approx(a[-1], abs=1e-12)
            assert b[1] == pytest.approx(-a[-2] + 2.0 * b[0], abs=1e-12)

    def test_free_parameter_order(self):
        C = constraint_matrix(3, 2)
        np.testing.assert_array_equal(C[:4, :4], np.eye(4))
        np.testing.assert_array_equal(C[:4, 4:], 0.0)
        np.testing.assert_array_equal(C[6:, 4:], np.eye(2))
        np.testing.assert_array_equal(C[4], [0, 0, 0, 1, 0, 0])
        np.testing.assert_array_equal(C[5], [0, 0, -1, 2, 0, 0])

    def test_rejects_degree_below_two(self):
        with pytest.raises(ValueError, match="degree >= 2"):
            constraint_matrix(1, 3)

    def test_rejects_zero_segments(self):
        with pytest.raises(ValueError, match="segments"):
            constraint_matrix(3, 0)


# --- Segment Location Tests ---

class TestLocateSegment:

    @pytest.fixture
    def axis(self):
        return AxisBasis(degree=3, segments=4, lo=0.0, hi=1.0)

    def test_lower_bound(self, axis):
        assert locate_segment(0.0, axis) == (0, 0.0)

    def test_upper_bound_belongs_to_last_segment(self, axis):
        assert locate_segment(1.0, axis) == (3, 1.0)

    def test_interior_knot_belongs_to_right_segment(self, axis):
        assert locate_segment(0.5, axis) == (2, 0.0)

    def test_local_coordinate(self, axis):
        index, t = locate_segment(0.3, axis)
        assert index == 1
        assert t == pytest.approx(0.2)

    def test_shifted_domain(self):
        axis = AxisBasis(degree=3, segments=2, lo=-2.0, hi=2.0)
        index, t = locate_segment(1.0, axis)
        assert index == 1
        assert t == pytest.approx(0.5)

    def test_out_of_domain_rejected(self, axis):
        with pytest.raises(OutOfDomainError):
            locate_segment(1.0 + 1e-9, axis)
        with pytest.raises(OutOfDomainError):
            axis.locate_batch(np.array([0.5, -0.1]))

    def test_clamp_is_explicit(self):
        config = BasisConfig.unit(dim=2)
        np.testing.assert_array_equal(
            clamp_to_domain([[1.5, -0.2]], config), [[1.0, 0.0]]
        )


# --- Basis Row Tests ---

class TestPhi1d:

    @pytest.fixture
    def axis(self):
        return AxisBasis(degree=3, segments=4, lo=0.0, hi=1.0)

    def test_partition_of_unity(self, axis, rng):
        rows = axis.phi_batch(rng.random(100), 0)
        np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-12)

    def test_derivative_rows_sum_to_zero(self, axis, rng):
        xs = rng.random(100)
        for order in (1, 2):
            np.testing.assert_allclose(axis.phi_batch(xs, order).sum(axis=1), 0.0, atol=1e-9)

    def test_only_containing_segment_is_nonzero(self, axis):
        row = phi_1d(0.1, axis)
        # segment 0 touches the first K+1 free weights only
        assert np.all(row[4:] == 0.0)
        assert np.count_nonzero(row[:4]) == 4

    def test_row_length(self, axis):
        assert phi_1d(0.7, axis).shape == (axis.n_free,)
        assert axis.n_free == 10

    def test_first_derivative_matches_central_difference(self, axis, rng):
        w = rng.normal(size=axis.n_free)
        h = 1e-6
        for x in rng.uniform(0.01, 0.99, 100):
            analytic = phi_1d(x, axis, 1) @ w
            numeric = (phi_1d(x + h, axis) @ w - phi_1d(x - h, axis) @ w) / (2 * h)
            assert abs(analytic - numeric) <= 1e-5 * max(abs(analytic), 1.0)

    def test_second_derivative_matches_central_difference(self, axis, rng):
        w = rng.normal(size=axis.n_free)
        h = 1e-6
        knots = np.linspace(0.0, 1.0, 5)
        xs = [x for x in rng.uniform(0.01, 0.99, 100) if np.min(np.abs(knots - x)) > 2 * h]
        for x in xs:
            analytic = phi_1d(x, axis, 2) @ w
            numeric = (phi_1d(x + h, axis, 1) @ w - phi_1d(x - h, axis, 1) @ w) / (2 * h)
            assert abs(analytic - numeric) <= 1e-5 * max(abs(analytic), 1.0)

    def test_chain_rule_factor(self):
        # x on [0, 2] with one segment: phi(x) = bernstein(x / 2)
        axis = AxisBasis(degree=2, segments=1, lo=0.0, hi=2.0)
        np.testing.assert_allclose(phi_1d(1.0, axis, 1), [-0.5, 0.0, 0.5], atol=1e-15)

    def test_order_above_degree_rejected(self, axis):
        with pytest.raises(ValueError, match="derivative order"):
            phi_1d(0.5, axis, 4)

    def test_c1_continuity_at_knots(self, axis, rng):
        eps = 1e-12
        for _ in range(10):
            w = rng.normal(size=axis.n_free)
            for knot in (0.25, 0.5, 0.75):
                left, right = knot - eps, knot + eps
                assert abs(phi_1d(left, axis) @ w - phi_1d(right, axis) @ w) < 1e-9
                assert abs(phi_1d(left, axis, 1) @ w - phi_1d(right, axis, 1) @ w) < 1e-6

    def test_second_derivative_may_jump_at_knot(self, axis):
        w = np.zeros(axis.n_free)
        w[3] = 1.0
        left = phi_1d(0.25 - 1e-12, axis, 2) @ w
        right = phi_1d(0.25, axis, 2) @ w
        assert abs(left - right) > 1.0


# --- Per-Config Cache Tests ---

class TestAxisBases:

    def test_one_evaluator_per_axis(self):
        config = BasisConfig(dim=2, domain=((0.0, 1.0), (-1.0, 3.0)))
        axes = axis_bases(config)
        assert len(axes) == 2
        assert (axes[1].lo, axes[1].hi) == (-1.0, 3.0)

    def test_cached_per_config(self):
        config = BasisConfig.unit(dim=3)
        assert axis_bases(config) is axis_bases(BasisConfig.unit(dim=3))
