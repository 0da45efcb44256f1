"""Tests for Lipschitz and ABV curves and the transforms between them."""

import numpy as np
import pytest

from utils.singular_flux.curves import (
    ABVCurve,
    Jump,
    LipCurve,
    d_metric,
    derivative_decomposition,
    injectivity_check,
    random_normalized_curve,
    s_bounds,
    segment_check,
    stationary_curve,
    theta_u,
    to_abv,
    to_lip,
)
from utils.singular_flux.examples_corpus import build, jump_curves
from utils.singular_flux.measures import NormSpec

ROUNDTRIP_TOL = 1e-9
PAIRING_TOL = 1e-6
L2 = NormSpec('l2')


def _jump_curve():
    return jump_curves(np.array([[0.0], [1.0]]), [0.5], 2.0, L2)[0]


def _smooth_phi(t, X):
    phi0 = np.sin(t) + X[:, 0] ** 2
    phivec = np.cos(X) * t[:, None]
    return phi0, phivec


def _stacked(t, X):
    phi0, phivec = _smooth_phi(t, X)
    return np.column_stack([phi0, phivec])


# ═══════════════════════════════════════════════════════════════════
# Lipschitz curves
# ═══════════════════════════════════════════════════════════════════


class TestLipCurve:

    def test_breakpoints_start_at_zero(self):
        with pytest.raises(ValueError):
            LipCurve(np.array([0.5, 1.0]), np.array([[0.0, 0.0], [0.5, 0.0]]))

    def test_speed_bound(self):
        with pytest.raises(ValueError):
            LipCurve(np.array([0.0, 1.0]), np.array([[0.0, 0.0], [1.0, 1.0]]))

    def test_time_nondecreasing(self):
        with pytest.raises(ValueError):
            LipCurve.from_vertices(np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]]))

    def test_anchoring(self):
        vertices = np.array([[0.5, 0.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            LipCurve.from_vertices(vertices)
        assert not LipCurve.from_vertices(vertices, anchored=False).anchored

    def test_from_vertices_unit_speed(self):
        y = LipCurve.from_vertices(np.array([[0.0, 0.0], [0.0, 0.0], [0.3, 0.4], [1.0, 0.4]]))
        assert y.n_segments == 2
        np.testing.assert_allclose(y.breakpoints, [0.0, 0.5, 1.2])
        assert y.is_normalized()

    def test_evaluation_is_clamped(self):
        y = stationary_curve([1.0, 2.0], 1.0)
        np.testing.assert_allclose(y(0.5), [0.5, 1.0, 2.0])
        np.testing.assert_allclose(y(5.0), [1.0, 1.0, 2.0])

    def test_restrict(self):
        y = _jump_curve().restrict(1.0)
        assert y.s_end == pytest.approx(1.0)
        np.testing.assert_allclose(y(1.0), [0.5, 0.5])

    def test_flat_mask(self):
        np.testing.assert_array_equal(_jump_curve().flat_mask(), [False, True, False])

    def test_dict_round_trip(self):
        y = _jump_curve()
        again = LipCurve.from_dict(y.to_dict())
        np.testing.assert_array_equal(again.points, y.points)


class TestMetricAndBounds:

    def test_d_metric_of_shift(self):
        y1 = stationary_curve([0.0], 2.0)
        y2 = stationary_curve([0.1], 2.0)
        assert d_metric(y1, y2) == pytest.approx(0.1 * (1.0 - 2.0 ** -20), abs=1e-15)

    def test_d_metric_caps_terms(self):
        y1 = stationary_curve([0.0], 2.0)
        y2 = stationary_curve([5.0], 2.0)
        assert d_metric(y1, y2, n_terms=3) == pytest.approx(0.875)

    @pytest.mark.parametrize("kind", ['l1', 'l2', 'linf'])
    def test_d_metric_triangle(self, rng, kind):
        for _ in range(20):
            y1, y2, y3 = (random_normalized_curve(rng, n_segments=6, norm=kind) for _ in range(3))
            assert d_metric(y1, y3) <= d_metric(y1, y2) + d_metric(y2, y3) + 1e-12
            assert d_metric(y1, y2) == pytest.approx(d_metric(y2, y1), abs=1e-15)

    def test_s_bounds_at_jump(self):
        s_minus, s_plus = s_bounds(_jump_curve(), 0.5)
        assert s_minus == pytest.approx(0.5)
        assert s_plus == pytest.approx(1.5)

    def test_s_bounds_on_moving_part(self):
        assert s_bounds(_jump_curve(), 1.0) == pytest.approx((2.0, 2.0))

    def test_s_bounds_outside(self):
        with pytest.raises(ValueError):
            s_bounds(_jump_curve(), 3.0)


# ═══════════════════════════════════════════════════════════════════
# ABV curves
# ═══════════════════════════════════════════════════════════════════


class TestABVCurve:

    def test_transition_from_jump_curve(self):
        u = to_abv(_jump_curve())
        np.testing.assert_allclose(u.sample_times, [0.0, 0.5, 2.0])
        assert len(u.jumps) == 1
        np.testing.assert_allclose(u.jumps[0].path, [[0.0], [1.0]])

    def test_skeleton_limits(self):
        u = to_abv(_jump_curve())
        assert u.skeleton(0.5, side='left')[0] == pytest.approx(0.0)
        assert u.skeleton(0.5, side='right')[0] == pytest.approx(1.0)
        assert u.skeleton(1.0)[0] == pytest.approx(1.0)
        assert u.skeleton(0.25)[0] == pytest.approx(0.0)

    def test_jump_must_sit_on_sample_time(self):
        with pytest.raises(ValueError):
            ABVCurve(np.array([0.0, 1.0]), np.zeros((2, 1)), (Jump(0.5, np.array([[0.0], [1.0]])),))

    def test_jump_must_start_at_skeleton(self):
        with pytest.raises(ValueError):
            ABVCurve(np.array([0.0, 1.0]), np.zeros((2, 1)), (Jump(0.0, np.array([[0.5], [1.0]])),))

    def test_jump_needs_length(self):
        with pytest.raises(ValueError):
            ABVCurve(np.array([0.0, 1.0]), np.zeros((2, 1)), (Jump(0.0, np.array([[0.0], [0.0]])),))

    def test_jump_constant_speed(self):
        jump = Jump(0.0, np.array([[0.0], [1.0], [3.0]]))
        assert jump.length(L2) == pytest.approx(3.0)
        assert jump.at(np.array([0.5]), L2)[0, 0] == pytest.approx(1.5)

    def test_dict_round_trip(self):
        u = to_abv(_jump_curve())
        assert ABVCurve.from_dict(u.to_dict()).to_dict() == u.to_dict()

    def test_decomposition_rebuilds_increments(self, rng):
        for _ in range(20):
            u = to_abv(random_normalized_curve(rng))
            parts = derivative_decomposition(u)
            np.testing.assert_allclose(parts.reconstruct_increments(u.sample_times),
                                       np.diff(u.values, axis=0), atol=1e-12)
            np.testing.assert_array_equal(parts.cantor_part, np.zeros(u.dim))


# ═══════════════════════════════════════════════════════════════════
# Transforms and predicates
# ═══════════════════════════════════════════════════════════════════


class TestTransforms:

    @pytest.mark.parametrize("kind", ['l1', 'l2', 'linf'])
    def test_roundtrip(self, rng, kind):
        for _ in range(100):
            y = random_normalized_curve(rng, norm=kind)
            back = to_lip(to_abv(y))
            assert back.is_normalized()
            assert np.all(np.diff(back.points[:, 0]) >= 0)
            assert d_metric(y, back) <= ROUNDTRIP_TOL

    def test_theta_matches_omega(self, rng):
        for _ in range(50):
            u = to_abv(random_normalized_curve(rng, dim=1))
            assert abs(theta_u(u, _smooth_phi) - to_lip(u).omega_curve(_stacked)) <= PAIRING_TOL

    def test_to_abv_needs_unit_speed(self):
        slow = LipCurve(np.array([0.0, 2.0]), np.array([[0.0, 0.0], [1.0, 0.0]]))
        with pytest.raises(ValueError):
            to_abv(slow)


class TestPredicates:

    def test_injectivity(self):
        assert injectivity_check(_jump_curve())
        assert injectivity_check(stationary_curve([0.0, 0.0], 1.0))
        loop = build("7.3").eta.curves[0]
        assert not injectivity_check(loop)

    def test_segment_check(self):
        assert segment_check(build("7.1", 4).eta.curves[0])
        assert not segment_check(build("7.3").eta.curves[0])

    def test_segment_check_needs_unit_speed(self):
        slow = LipCurve(np.array([0.0, 2.0]), np.array([[0.0, 0.0], [1.0, 0.0]]))
        with pytest.raises(ValueError):
            segment_check(slow)

    @pytest.mark.parametrize("norm, bent", [
        ('l1', [[0.5, 0.0, 0.0], [0.5, 1.0, 0.0], [0.5, 1.0, 1.0]]),
        ('linf', [[0.5, 0.0, 0.0], [0.5, 1.0, 0.5], [0.5, 2.0, 0.0]]),
    ])
    def test_segment_check_bent_run(self, norm, bent):
        y = LipCurve.from_vertices(bent, NormSpec(norm), anchored=False)
        assert y.is_normalized()
        assert not segment_check(y)

    @pytest.mark.parametrize("norm", ['l1', 'l2', 'linf'])
    def test_segment_check_split_straight_run(self, norm):
        straight = [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.5, 0.3, 0.3], [0.5, 1.0, 1.0], [1.5, 1.0, 1.0]]
        assert segment_check(LipCurve.from_vertices(straight, NormSpec(norm)))
