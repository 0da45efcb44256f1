"""Tests for curve ensembles and their pushforward pairings."""

import numpy as np
import pytest

from utils.singular_flux.curves import LipCurve, stationary_curve
from utils.singular_flux.examples_corpus import build, expected_fields
from utils.singular_flux.superposition import (
    AbvEnsemble,
    SuperpositionMeasure,
    bv_representation,
    characteristic_residual,
    compare_pairings,
    measure_pairings,
    push_mu,
    push_nu,
    push_tv,
    representation_report,
    slice_limits,
    split_D,
    transition_alignment,
)

REPRESENTATION_TOL = 2e-2
EXACT_TOL = 1e-9


# ═══════════════════════════════════════════════════════════════════
# Construction
# ═══════════════════════════════════════════════════════════════════


class TestEnsembleConstruction:

    def test_weight_validation(self):
        curves = [stationary_curve([0.0], 1.0), stationary_curve([1.0], 1.0)]
        with pytest.raises(ValueError):
            SuperpositionMeasure(curves, np.array([1.0]))
        with pytest.raises(ValueError):
            SuperpositionMeasure(curves, np.array([1.5, -0.5]))
        with pytest.raises(ValueError):
            SuperpositionMeasure(curves, np.array([0.5, 0.6]))

    def test_curves_must_be_anchored(self):
        floating = LipCurve.from_vertices(np.array([[0.5, 0.0], [1.0, 0.0]]), anchored=False)
        with pytest.raises(ValueError):
            SuperpositionMeasure([floating], np.ones(1))

    def test_mixed_dimensions(self):
        with pytest.raises(ValueError):
            SuperpositionMeasure([stationary_curve([0.0], 1.0), stationary_curve([0.0, 0.0], 1.0)],
                                 np.array([0.5, 0.5]))

    def test_default_horizon(self):
        eta = SuperpositionMeasure([stationary_curve([0.0], 1.0), stationary_curve([0.0], 2.0)],
                                   np.array([0.5, 0.5]))
        assert eta.s_max == pytest.approx(2.0)
        assert eta.is_normalized()

    def test_mixture(self):
        a = SuperpositionMeasure([stationary_curve([0.0], 1.0)], np.ones(1))
        b = SuperpositionMeasure([stationary_curve([1.0], 1.0)], np.ones(1))
        mixed = SuperpositionMeasure.mixture([(a, 0.25), (b, 0.75)])
        np.testing.assert_allclose(mixed.weights, [0.25, 0.75])

    def test_dict_round_trip(self, transfer_1d):
        data = transfer_1d.eta.to_dict()
        again = SuperpositionMeasure.from_dict(data)
        assert again.n_curves == transfer_1d.eta.n_curves
        assert again.to_dict() == data


# ═══════════════════════════════════════════════════════════════════
# Pushforwards
# ═══════════════════════════════════════════════════════════════════


class TestPushforwards:

    def test_transfer_refinement(self):
        coarse = build("7.1", 200)
        fine = build("7.1", 1600)
        basis = coarse.basis()
        dev_coarse = max(representation_report(coarse.eta, coarse.mu, coarse.nu, basis).deviations.values())
        dev_fine = max(representation_report(fine.eta, fine.mu, fine.nu, basis).deviations.values())
        assert dev_coarse <= REPRESENTATION_TOL
        assert dev_fine <= 5e-3
        assert dev_fine <= dev_coarse / 3.0 + 1e-12

    def test_single_loop_is_exact(self):
        fixture = build("7.3")
        report = representation_report(fixture.eta, fixture.mu, fixture.nu, fixture.basis(12))
        assert max(report.deviations.values()) <= EXACT_TOL
        assert report.passed

    def test_shapes(self, transfer_1d, transfer_basis):
        assert push_mu(transfer_1d.eta, transfer_basis).shape == (transfer_basis.size,)
        assert push_nu(transfer_1d.eta, transfer_basis).shape == (transfer_basis.size, 1)

    def test_unit_speed_tv(self, transfer_1d, transfer_basis):
        tv = push_tv(transfer_1d.eta, transfer_basis)
        assert not tv.normalized_check_skipped
        assert tv.unit_speed_gap <= 1e-12

    def test_reference_pairings(self, transfer_1d, transfer_basis):
        ref = measure_pairings(transfer_1d.mu, transfer_1d.nu, transfer_basis)
        assert ref['mu'].shape == (transfer_basis.size,)
        assert ref['nu'].shape == (transfer_basis.size, 1)
        assert compare_pairings(ref['mu'], ref['mu'], transfer_basis) == 0.0

    def test_report_dict(self, transfer_1d, transfer_basis):
        data = representation_report(transfer_1d.eta, transfer_1d.mu, transfer_1d.nu, transfer_basis).to_dict()
        assert set(data['deviations']) == {'mu', 'nu', 'tv'}
        assert data['n_curves'] == 20
        assert 'split' in data


# ═══════════════════════════════════════════════════════════════════
# Flat / moving split
# ═══════════════════════════════════════════════════════════════════


class TestSplit:

    def test_transfer_flux_is_flat(self):
        fixture = build("7.1", 200)
        basis = fixture.basis()
        split = split_D(fixture.eta, basis)
        ref = measure_pairings(fixture.mu, fixture.nu, basis)
        assert compare_pairings(split.zero_flux, ref['nu'], basis) <= REPRESENTATION_TOL
        assert split.plus_mass == 0.0
        assert split.zero_mass == pytest.approx(1.0)

    def test_interior_flux_is_moving(self):
        fixture = build("7.6", 200)
        basis = fixture.basis()
        split = split_D(fixture.eta, basis)
        ref = measure_pairings(fixture.mu, fixture.nu, basis)
        assert compare_pairings(split.plus_flux, ref['nu'], basis) <= REPRESENTATION_TOL
        assert split.zero_mass == 0.0

    def test_moving_time_matches_mu(self, transfer_1d, transfer_basis):
        split = split_D(transfer_1d.eta, transfer_basis)
        np.testing.assert_allclose(split.plus_time, push_mu(transfer_1d.eta, transfer_basis), atol=1e-12)


# ═══════════════════════════════════════════════════════════════════
# Characteristics
# ═══════════════════════════════════════════════════════════════════


class TestCharacteristics:

    @pytest.mark.parametrize("example_id", ["7.1", "7.6"])
    def test_ensemble_follows_field(self, example_id):
        fixture = build(example_id, 20)
        assert characteristic_residual(fixture.eta, expected_fields(example_id)) <= EXACT_TOL

    def test_alternative_leaves_field(self):
        fixture = build("7.6", 20)
        residual = characteristic_residual(fixture.alternatives['alternative'], expected_fields("7.6"))
        assert residual >= fixture.expected('alternative_residual_min')

    def test_s_grid_samples(self, transfer_1d):
        # step chosen so that no sample lands on a breakpoint of the stratified jump curves
        assert characteristic_residual(transfer_1d.eta, expected_fields("7.1"), s_step=0.013) <= EXACT_TOL


# ═══════════════════════════════════════════════════════════════════
# ABV ensembles
# ═══════════════════════════════════════════════════════════════════


class TestAbvEnsemble:

    def test_theta_matches_push(self, transfer_1d, transfer_basis):
        eta_hat = AbvEnsemble.from_superposition(transfer_1d.eta)
        report = bv_representation(eta_hat, transfer_basis, transfer_1d.mu, transfer_1d.nu)
        np.testing.assert_allclose(report.extras['theta_mu'], push_mu(transfer_1d.eta, transfer_basis), atol=EXACT_TOL)
        np.testing.assert_allclose(report.extras['theta_nu'], push_nu(transfer_1d.eta, transfer_basis), atol=EXACT_TOL)

    def test_bv_representation_passes(self):
        fixture = build("7.1", 200)
        eta_hat = AbvEnsemble.from_superposition(fixture.eta)
        report = bv_representation(eta_hat, fixture.basis(), fixture.mu, fixture.nu, times=[0.5],
                                   direction=expected_fields("7.1"))
        assert report.passed
        assert report.deviations['transition_direction'] <= EXACT_TOL
        assert 0.5 in report.extras['slices']

    def test_slice_limits(self):
        eta_hat = AbvEnsemble.from_superposition(build("7.1", 4).eta)
        left, right = slice_limits(eta_hat, 0.375)
        np.testing.assert_allclose(left.points[:, 0], [1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(right.points[:, 0], [1.0, 1.0, 0.0, 0.0])
        np.testing.assert_allclose(left.weights[:, 0], 0.25)

    def test_alignment(self):
        eta_hat = AbvEnsemble.from_superposition(build("7.1", 4).eta)
        assert transition_alignment(eta_hat, expected_fields("7.1")) == pytest.approx(0.0, abs=1e-12)

    def test_dict_round_trip(self):
        eta_hat = AbvEnsemble.from_superposition(build("7.1", 4).eta)
        again = AbvEnsemble.from_dict(eta_hat.to_dict())
        assert again.to_dict() == eta_hat.to_dict()
