"""Tests for input document and run configuration validation."""

import pytest

from utils.singular_flux.curves import stationary_curve, to_abv
from utils.singular_flux.examples_corpus import build
from utils.singular_flux.validations import (
    get_validation_summary,
    validate_abv_json,
    validate_curve_json,
    validate_ensemble_json,
    validate_measure_json,
    validate_pair_json,
    validate_run_config,
)


def _lebesgue_atoms(**overrides):
    comp = {
        'time': {'kind': 'lebesgue', 'a': 0.0, 'b': 1.0, 'density': [1.0, 0.0]},
        'space': {'kind': 'atoms', 'points': [[0.0]], 'weights': [[1.0]]},
        'scale': 1.0,
    }
    comp.update(overrides)
    return {'dim': 1, 'norm': 'l2', 'components': [comp]}


# ═══════════════════════════════════════════════════════════════════
# Measures
# ═══════════════════════════════════════════════════════════════════


class TestMeasureDocuments:

    @pytest.mark.parametrize("example_id", ["7.1", "7.2", "7.6"])
    def test_fixture_documents_are_valid(self, example_id):
        fixture = build(example_id, 4)
        for measure in (fixture.mu, fixture.nu, fixture.mu0):
            ok, errors = validate_measure_json(measure.to_dict())
            assert ok, errors

    def test_minimal_document(self):
        assert validate_measure_json(_lebesgue_atoms()) == (True, [])

    def test_bad_dimension(self):
        ok, errors = validate_measure_json({'dim': 0, 'components': []})
        assert not ok
        assert 'dim' in errors[0]

    def test_bad_norm(self):
        data = _lebesgue_atoms()
        data['norm'] = 'l3'
        ok, errors = validate_measure_json(data)
        assert not ok

    def test_reversed_interval(self):
        ok, errors = validate_measure_json(_lebesgue_atoms(time={'kind': 'lebesgue', 'a': 1.0, 'b': 0.5}))
        assert not ok
        assert 'a < b' in errors[0]

    def test_negative_dirac_time(self):
        ok, _ = validate_measure_json(_lebesgue_atoms(time={'kind': 'dirac', 't': -1.0}))
        assert not ok

    def test_unknown_space_kind(self):
        ok, errors = validate_measure_json(_lebesgue_atoms(space={'kind': 'sphere'}))
        assert not ok
        assert 'sphere' in errors[0]

    def test_degenerate_polyline(self):
        space = {'kind': 'polyline', 'points': [[0.0], [1.0], [1.0]]}
        ok, errors = validate_measure_json(_lebesgue_atoms(space=space))
        assert not ok
        assert any('degenerate' in e for e in errors)

    def test_degenerate_segment(self):
        ok, _ = validate_measure_json(_lebesgue_atoms(space={'kind': 'segment', 'a': [0.5], 'b': [0.5]}))
        assert not ok

    def test_atom_weight_arity(self):
        space = {'kind': 'atoms', 'points': [[0.0]], 'weights': [[1.0, 2.0, 3.0]]}
        ok, _ = validate_measure_json(_lebesgue_atoms(space=space))
        assert not ok

    def test_non_finite_scale(self):
        ok, _ = validate_measure_json(_lebesgue_atoms(scale=float('nan')))
        assert not ok


class TestPairDocuments:

    def test_fixture_pair(self):
        ok, errors = validate_pair_json(build("7.1", 4).to_dict())
        assert ok, errors

    def test_missing_field(self):
        ok, errors = validate_pair_json({'mu': _lebesgue_atoms(), 'nu': _lebesgue_atoms()})
        assert not ok
        assert errors == ["Missing required field: mu0"]

    def test_dimension_mismatch(self):
        data = build("7.1", 4).to_dict()
        data['nu'] = build("7.2").nu.to_dict()
        ok, errors = validate_pair_json(data)
        assert not ok
        assert 'dimension' in errors[-1]


# ═══════════════════════════════════════════════════════════════════
# Curves and ensembles
# ═══════════════════════════════════════════════════════════════════


class TestCurveDocuments:

    def test_curve_round_trip(self):
        assert validate_curve_json(stationary_curve([0.0, 1.0], 2.0).to_dict()) == (True, [])

    def test_breakpoints_start_at_zero(self):
        ok, errors = validate_curve_json({'breakpoints': [0.5, 1.0], 'points': [[0.0, 0.0], [0.5, 0.0]]})
        assert not ok
        assert "start at 0" in errors[0]

    def test_time_must_not_decrease(self):
        ok, _ = validate_curve_json({'breakpoints': [0.0, 1.0], 'points': [[1.0, 0.0], [0.0, 0.0]]})
        assert not ok

    def test_abv_round_trip(self, transfer_1d):
        u = to_abv(transfer_1d.eta.curves[0])
        assert validate_abv_json(u.to_dict()) == (True, [])

    def test_abv_jump_off_grid(self):
        data = {'times': [0.0, 1.0], 'values': [[0.0], [1.0]], 'jumps': [{'t': 0.5, 'path': [[0.0], [1.0]]}]}
        ok, errors = validate_abv_json(data)
        assert not ok
        assert 'not a sample time' in errors[0]

    def test_ensemble_round_trip(self, transfer_1d):
        ok, errors = validate_ensemble_json(transfer_1d.eta.to_dict())
        assert ok, errors

    def test_ensemble_weights(self):
        curve = stationary_curve([0.0], 1.0).to_dict()
        ok, errors = validate_ensemble_json({'weights': [0.4, 0.4], 'curves': [curve, curve]})
        assert not ok
        assert 'sum to 1' in errors[0]

    def test_empty_ensemble(self):
        assert not validate_ensemble_json({'weights': [], 'curves': []})[0]


# ═══════════════════════════════════════════════════════════════════
# Run configuration
# ═══════════════════════════════════════════════════════════════════


class TestRunConfig:

    def test_valid(self):
        assert validate_run_config({'tol': 1e-6, 'basis_grid': 16, 'norm': 'l1', 'seed': 0}) == (True, [])

    def test_collects_all_errors(self):
        ok, errors = validate_run_config({'tol': -1.0, 'basis_grid': 4, 'n_curves': 0, 'seed': -3})
        assert not ok
        assert len(errors) == 4

    def test_summary(self):
        assert get_validation_summary([]) == "All validations passed"
        assert get_validation_summary(["bad"]) == "Validation error: bad"
        summary = get_validation_summary([f"e{k}" for k in range(12)])
        assert summary.startswith("Found 12 validation errors")
        assert "... and 2 more errors" in summary
