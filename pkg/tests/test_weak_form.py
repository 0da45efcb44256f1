"""Tests for the spline test basis and continuity-equation residuals."""

import numpy as np
import pytest

from utils.singular_flux.examples_corpus import build
from utils.singular_flux.measures import (
    AtomicVectorMeasure,
    Atoms,
    LebesgueInterval,
    LebesgueSegment,
    SymbolicComponent,
    SymbolicMeasure,
)
from utils.singular_flux.weak_form import (
    TestBasis,
    augmented_residual,
    ce_residual,
    divergence_matrix,
    divergence_pairing,
    divergence_pairings,
    extend_solution,
    initial_datum,
)

SYMBOLIC_TOL = 1e-10
DISCRETE_TOL = 1e-3


# ═══════════════════════════════════════════════════════════════════
# Basis
# ═══════════════════════════════════════════════════════════════════


class TestSplineBasis:

    def test_shape(self):
        basis = TestBasis.from_box([0.0, 0.0], [1.0, 1.0], 8)
        assert basis.shape == (4, 4)
        assert basis.size == 16
        assert basis.n_axes == 2 and basis.space_dim == 1

    def test_too_few_knots(self):
        with pytest.raises(ValueError):
            TestBasis([np.linspace(0.0, 1.0, 4)])

    def test_knots_must_increase(self):
        with pytest.raises(ValueError):
            TestBasis([np.array([0.0, 0.2, 0.2, 0.5, 0.7, 1.0])])

    def test_auto_needs_eight_knots(self):
        with pytest.raises(ValueError):
            TestBasis.auto([build("7.1", 4).mu], 7)

    def test_auto_clamps_time_at_horizon(self):
        fixture = build("7.1", 4)
        basis = TestBasis.auto([fixture.mu, fixture.nu], 12, fixture.horizon)
        assert basis.upper[0] == pytest.approx(fixture.horizon)
        assert basis.lower[1] < 0.0 and basis.upper[1] > 1.0

    def test_partition_of_unity_inside(self):
        basis = TestBasis.from_box([0.0], [1.0], 10, space_dim=0)
        x = np.linspace(3.0 / 9.0, 6.0 / 9.0, 25)
        np.testing.assert_allclose(basis.axis_matrix(0, x).sum(axis=1), 1.0, atol=1e-12)

    def test_empty_pairing(self):
        basis = TestBasis.from_box([0.0, 0.0], [1.0, 1.0], 8)
        out = basis.pair_scalar(np.zeros((0, 2)), np.zeros(0))
        np.testing.assert_array_equal(out, np.zeros(16))

    def test_member_matches_pairing(self):
        basis = TestBasis.from_box([0.0, 0.0], [1.0, 1.0], 8)
        coords = np.array([[0.4, 0.5], [0.6, 0.45]])
        weights = np.array([1.0, -2.0])
        paired = basis.pair_scalar(coords, weights)
        fn = basis.member(5)
        direct = np.sum(fn.value(coords[:, 0], coords[:, 1:]) * weights)
        assert paired[5] == pytest.approx(direct, abs=1e-14)
        with pytest.raises(IndexError):
            basis.member(16)

    def test_c1_norms_positive(self):
        basis = TestBasis.from_box([0.0, 0.0], [1.0, 1.0], 8)
        norms = basis.c1_norms()
        assert norms.shape == (16,)
        assert np.all(norms > 0)


# ═══════════════════════════════════════════════════════════════════
# Continuity residuals
# ═══════════════════════════════════════════════════════════════════


class TestContinuityResidual:

    @pytest.mark.parametrize("example_id", ["2.5", "7.1", "7.2", "7.3", "7.3b", "7.4(10)", "7.5", "7.6"])
    def test_symbolic_fixtures_solve(self, example_id):
        fixture = build(example_id, 8)
        report = ce_residual(fixture.mu, fixture.nu, fixture.mu0, fixture.basis(12))
        assert report.max_normalized <= SYMBOLIC_TOL
        assert not report.cover_warning

    def test_discretized_transfer(self):
        fixture = build("7.1", 4)
        basis = fixture.basis()
        report = ce_residual(fixture.mu.discretize(10000), fixture.nu.discretize(10000),
                             fixture.mu0.discretize(10000), basis, tol=DISCRETE_TOL)
        assert report.passed

    def test_missing_flux_detected(self):
        fixture = build("7.1", 4)
        no_flux = SymbolicMeasure(1, (), weight_dim=1)
        report = ce_residual(fixture.mu, no_flux, fixture.mu0, fixture.basis(12))
        assert report.max_normalized > DISCRETE_TOL
        assert not report.passed

    def test_report_dict(self):
        fixture = build("7.1", 4)
        data = ce_residual(fixture.mu, fixture.nu, fixture.mu0, fixture.basis(10)).to_dict()
        assert data['label'] == 'continuity'
        assert data['n_basis'] == len(data['per_fn'])
        assert data['pass'] is True

    def test_linear_in_the_pair(self, rng):
        basis = TestBasis.from_box([0.0, -1.0], [2.0, 2.0], 10)

        def random_pair():
            mu = AtomicVectorMeasure(rng.uniform(0.0, 2.0, 30), rng.uniform(-1.0, 2.0, (30, 1)),
                                     rng.uniform(0.0, 1.0, (30, 1)))
            nu = AtomicVectorMeasure(rng.uniform(0.0, 2.0, 20), rng.uniform(-1.0, 2.0, (20, 1)),
                                     rng.normal(size=(20, 1)))
            mu0 = AtomicVectorMeasure(np.zeros(5), rng.uniform(-1.0, 2.0, (5, 1)), rng.dirichlet(np.ones(5))[:, None])
            return mu, nu, mu0

        first, second = random_pair(), random_pair()
        a, b = 0.7, -2.3
        combined = [x.scale(a).concatenate(y.scale(b)) for x, y in zip(first, second)]
        r1 = ce_residual(*first, basis)
        r2 = ce_residual(*second, basis)
        rc = ce_residual(*combined, basis)
        np.testing.assert_allclose(rc.per_fn / rc.normalization,
                                   (a * r1.per_fn + b * r2.per_fn) / rc.normalization, rtol=0.0, atol=1e-12)


class TestAugmentedResidual:

    def test_axis_count_checked(self):
        sigma = AtomicVectorMeasure(np.zeros(1), np.zeros((1, 2)), np.ones((1, 1)))
        basis = TestBasis.from_box([0.0, 0.0], [1.0, 1.0], 8)
        with pytest.raises(ValueError):
            augmented_residual(sigma, sigma, sigma, initial_datum([[0.0]]), basis)

    def test_resting_curve_solves(self):
        # sigma = L^1 in s along (t, x) = (s, 0): d_s sigma + d_t sigma0 = 0 with sigma0 = sigma
        s = np.linspace(0.0, 3.0, 3001)
        ds = np.diff(s)
        mid = 0.5 * (s[:-1] + s[1:])
        points = np.column_stack([mid, np.zeros_like(mid)])
        sigma = AtomicVectorMeasure(mid, points, ds[:, None])
        sigma_vec = AtomicVectorMeasure(mid, points, np.zeros((mid.shape[0], 1)))
        basis = TestBasis.from_box([-0.5, -0.5, -1.0], [2.0, 2.0, 1.0], 8)
        report = augmented_residual(sigma, sigma, sigma_vec, initial_datum([[0.0]]), basis, tol=1e-3)
        assert report.passed


# ═══════════════════════════════════════════════════════════════════
# Divergence and extension
# ═══════════════════════════════════════════════════════════════════


class TestDivergence:

    def test_matrix_rows_match_pairings(self):
        fixture = build("2.5", 4)
        basis = fixture.basis(10)
        theta = fixture.nu.quadrature(basis.knots)
        np.testing.assert_allclose(divergence_matrix(theta, basis).sum(axis=1),
                                   divergence_pairings(theta, basis), atol=1e-12)

    def test_single_member_matches_rows(self):
        fixture = build("2.5", 4)
        basis = fixture.basis(10)
        theta = fixture.nu.quadrature(basis.knots)
        rows = divergence_pairings(theta, basis)
        for k in (0, basis.size // 2, basis.size - 1):
            assert divergence_pairing(theta, basis.member(k)) == pytest.approx(rows[k], abs=1e-12)

    def test_empty_flux(self):
        basis = TestBasis.from_box([0.0, 0.0], [1.0, 1.0], 8)
        np.testing.assert_array_equal(divergence_pairings(AtomicVectorMeasure.empty(1, 1), basis), np.zeros(16))


class TestExtension:

    def _shifted_transfer(self):
        """Transfer from 0 to 1 on [0.5, 1.5]"""
        x0 = Atoms(np.array([[0.0]]), np.ones((1, 1)))
        x1 = Atoms(np.array([[1.0]]), np.ones((1, 1)))
        mu = SymbolicMeasure(1, (
            SymbolicComponent(LebesgueInterval(0.5, 1.5, (1.5, -1.0)), x0),
            SymbolicComponent(LebesgueInterval(0.5, 1.5, (-0.5, 1.0)), x1),
        ))
        nu = SymbolicMeasure(1, (SymbolicComponent(LebesgueInterval(0.5, 1.5), LebesgueSegment([0.0], [1.0])),))
        return mu, nu, x0, x1

    def test_extended_pair_solves(self):
        mu, nu, x0, x1 = self._shifted_transfer()
        mu_tilde, nu_tilde, mu0 = extend_solution(mu, nu, 0.5, 1.5, x0, x1, 2.0)
        basis = TestBasis.auto([mu_tilde, nu_tilde], 12, 2.0)
        report = ce_residual(mu_tilde, nu_tilde, mu0, basis)
        assert report.max_normalized <= SYMBOLIC_TOL
        assert mu_tilde.total_variation() == pytest.approx(2.0)

    def test_window_validation(self):
        mu, nu, x0, x1 = self._shifted_transfer()
        with pytest.raises(ValueError):
            extend_solution(mu, nu, 1.5, 0.5, x0, x1, 2.0)
        with pytest.raises(ValueError):
            extend_solution(mu, nu, 0.5, 2.5, x0, x1, 2.0)

    def test_initial_datum_uniform(self):
        mu0 = initial_datum(np.array([[0.0, 0.0], [1.0, 0.0]]))
        atoms = mu0.quadrature()
        np.testing.assert_allclose(atoms.weights[:, 0], [0.5, 0.5])
        np.testing.assert_allclose(atoms.times, 0.0)
