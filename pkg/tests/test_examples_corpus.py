"""Tests for the named example fixtures and their closed-form fields."""

import numpy as np
import pytest

from utils.singular_flux.examples_corpus import (
    CIRCLE_SEGMENTS,
    build,
    build_7_4,
    circle_polyline,
    expected_fields,
    flux_pairing,
    quarter_arc,
    stratified,
    tangent_test_field,
)

ALL_IDS = ["2.5", "7.1", "7.2", "7.3", "7.3b", "7.4(3)", "7.5", "7.6"]
GAP = 2.0 * np.pi - 0.1
TOL = 1e-9


# ═══════════════════════════════════════════════════════════════════
# Building
# ═══════════════════════════════════════════════════════════════════


class TestBuild:

    @pytest.mark.parametrize("example_id", ALL_IDS)
    def test_builds(self, example_id):
        fixture = build(example_id, 8)
        assert fixture.horizon == pytest.approx(2.0)
        assert fixture.mu.total_variation() > 0
        if fixture.representable:
            assert fixture.eta is not None
            assert fixture.eta.dim == fixture.dim
        for entry in fixture.expectations.values():
            assert entry['source'] in ('closed_form', 'derived')

    def test_unknown_id(self):
        with pytest.raises(ValueError):
            build("9.9")

    def test_loop_count_parsed(self):
        fixture = build("7.4(3)")
        assert fixture.id == "7.4(3)"
        np.testing.assert_allclose(fixture.eta.weights, [2.0 / 3.0, 1.0 / 3.0])
        with pytest.raises(ValueError):
            build_7_4(0)

    def test_circle_is_not_representable(self, circle_flux):
        assert not circle_flux.representable
        assert circle_flux.eta is None

    def test_to_dict(self):
        data = build("7.1", 4).to_dict()
        for key in ('id', 'horizon', 'representable', 'mu', 'nu', 'mu0', 'expectations', 'metadata'):
            assert key in data


class TestGeometry:

    def test_stratified(self):
        np.testing.assert_allclose(stratified(4), [0.125, 0.375, 0.625, 0.875])
        with pytest.raises(ValueError):
            stratified(0)

    def test_circle_closed(self):
        pts = circle_polyline()
        assert pts.shape == (CIRCLE_SEGMENTS + 1, 2)
        np.testing.assert_array_equal(pts[0], pts[-1])
        np.testing.assert_allclose(np.sqrt(np.sum(pts ** 2, axis=1)), 1.0)

    def test_quarter_arc_endpoints(self):
        pts = quarter_arc(16)
        np.testing.assert_array_equal(pts[0], [0.0, 0.0])
        np.testing.assert_array_equal(pts[-1], [1.0, 1.0])


# ═══════════════════════════════════════════════════════════════════
# Circle fluxes
# ═══════════════════════════════════════════════════════════════════


class TestCirculation:

    def test_tangent_pairing(self, circle_flux):
        value = flux_pairing(circle_flux.nu, tangent_test_field())
        assert value >= GAP
        assert value == pytest.approx(circle_flux.expected('tangent_pairing'), abs=TOL)

    def test_loop_ensemble_carries_nu(self):
        fixture = build("7.3")
        phi = tangent_test_field()
        assert flux_pairing(fixture.eta, phi) == pytest.approx(flux_pairing(fixture.nu, phi), abs=TOL)

    def test_weak_star_limit_loses_flux(self):
        fixture = build("7.4(10)")
        phi = tangent_test_field()
        kept = flux_pairing(fixture.eta, phi)
        lost = flux_pairing(fixture.alternatives['weak_star_limit'], phi)
        assert abs(kept - lost) >= GAP
        assert lost == pytest.approx(0.0, abs=TOL)

    def test_bump_width(self):
        with pytest.raises(ValueError):
            tangent_test_field(width=0.0)
        phi = tangent_test_field()
        np.testing.assert_allclose(phi(np.array([0.5]), np.array([[1.0, 0.0]])), [[0.0, 1.0]])
        np.testing.assert_allclose(phi(np.array([1.5]), np.array([[1.0, 0.0]])), [[0.0, 0.0]])


# ═══════════════════════════════════════════════════════════════════
# Closed-form fields
# ═══════════════════════════════════════════════════════════════════


class TestExpectedFields:

    def test_transfer_field(self):
        tau, v = expected_fields("7.1")(np.array([0.5, 0.5, 1.5]), np.array([[0.5], [0.0], [0.5]]))
        np.testing.assert_allclose(tau, [0.0, 1.0, 1.0])
        np.testing.assert_allclose(v[:, 0], [1.0, 0.0, 0.0])

    def test_diagonal_field(self):
        fixture = build("7.6", 4)
        tau, v = expected_fields("7.6")(np.array([0.5, 1.5]), np.array([[0.5], [0.5]]))
        np.testing.assert_allclose([tau[0], v[0, 0]], fixture.expected('interior_field'))
        np.testing.assert_allclose([tau[1], v[1, 0]], [1.0, 0.0])

    def test_circle_field_only_at_t0(self):
        field = expected_fields("7.3")
        tau, v = field(np.array([0.5, 1.0]), np.array([[1.0, 0.0], [1.0, 0.0]]))
        np.testing.assert_allclose(tau, [0.0, 1.0])
        np.testing.assert_allclose(v[0], [0.0, 1.0])

    def test_unknown_field(self):
        with pytest.raises(ValueError):
            expected_fields("9.9")
