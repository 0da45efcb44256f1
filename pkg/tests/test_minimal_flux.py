"""Tests for the minimal-flux LP."""

import itertools

import numpy as np
import pytest

from utils.singular_flux.examples_corpus import build
from utils.singular_flux.minimal_flux import (
    LpProblem,
    LpSolveError,
    minimal_pair,
    minimal_submeasure,
    snap_identity,
    solve_lp,
)

ORACLE_TOL = 1e-9
IDENTITY_TOL = 1e-6


def _vertex_optimum(cost, row, eps):
    """
    Optimum of min c.lam s.t. |row.(1 - lam)| <= eps, 0 <= lam <= 1 by vertex enumeration

    With one row every vertex has at most one coordinate strictly inside (0, 1).
    """
    n = cost.shape[0]
    best = np.inf
    for bits in itertools.product((0.0, 1.0), repeat=n):
        lam = np.array(bits)
        if abs(row @ (1.0 - lam)) <= eps + 1e-15:
            best = min(best, cost @ lam)
        for i in range(n):
            rest = row @ (1.0 - lam) - row[i] * (1.0 - lam[i])
            for bound in (eps, -eps):
                lam_i = 1.0 - (bound - rest) / row[i]
                if 0.0 <= lam_i <= 1.0:
                    trial = lam.copy()
                    trial[i] = lam_i
                    best = min(best, cost @ trial)
    return best


class TestLpProblem:

    def test_validation(self):
        with pytest.raises(ValueError):
            LpProblem(np.ones(2), np.ones((1, 2)), np.ones(2))
        with pytest.raises(ValueError):
            LpProblem(np.ones(2), np.ones((1, 2)), np.zeros(1))
        with pytest.raises(ValueError):
            LpProblem(-np.ones(2), np.ones((1, 2)), np.ones(1))

    def test_no_rows_drops_everything(self):
        lam, objective = solve_lp(LpProblem(np.ones(3), np.zeros((0, 3)), np.zeros(0)))
        np.testing.assert_array_equal(lam, np.zeros(3))
        assert objective == 0.0

    def test_no_variables(self):
        lam, objective = solve_lp(LpProblem(np.zeros(0), np.zeros((0, 0)), np.zeros(0)))
        assert lam.size == 0 and objective == 0.0

    def test_violation(self):
        problem = LpProblem(np.ones(2), np.array([[1.0, -1.0]]), np.array([0.5]))
        np.testing.assert_allclose(problem.violation(np.array([0.0, 1.0])), [2.0])

    def test_error_is_runtime_error(self):
        assert issubclass(LpSolveError, RuntimeError)


class TestVertexOracle:

    def test_random_single_row_problems(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 9))
            row = rng.uniform(0.5, 1.0, n) * rng.choice([-1.0, 1.0], n)
            cost = rng.uniform(0.0, 1.0, n)
            eps = 0.05
            lam, objective = solve_lp(LpProblem(cost, row[None, :], np.array([eps])))
            assert objective == pytest.approx(_vertex_optimum(cost, row, eps), abs=ORACLE_TOL)
            assert abs(row @ (1.0 - lam)) <= eps + 1e-9


class TestSnapIdentity:

    def test_snaps_near_total(self):
        lam, objective = snap_identity(np.array([0.9999999, 1.0]), 2.0 - 1e-7, 2.0)
        np.testing.assert_array_equal(lam, [1.0, 1.0])
        assert objective == 2.0

    def test_keeps_real_reduction(self):
        lam, objective = snap_identity(np.array([0.0, 1.0]), 1.0, 2.0)
        np.testing.assert_array_equal(lam, [0.0, 1.0])
        assert objective == 1.0


class TestMinimalPair:

    def test_polyline_transfer_is_minimal(self):
        fixture = build("2.5", 2)
        mp = minimal_pair(fixture.mu, fixture.nu, fixture.basis())
        assert mp.lam.size > 0
        assert mp.lam.min() >= 1.0 - IDENTITY_TOL
        assert mp.is_identity

    def test_circle_flux_removed(self, circle_flux):
        mp = minimal_pair(circle_flux.mu, circle_flux.nu, circle_flux.basis())
        assert mp.objective <= IDENTITY_TOL
        assert mp.tv_perp == pytest.approx(circle_flux.nu.total_variation(), rel=1e-9)
        assert mp.nu_bar.total_variation() <= IDENTITY_TOL

    def test_loop_flux_removed(self):
        fixture = build("7.3")
        mp = minimal_pair(fixture.mu, fixture.nu, fixture.basis(), eps_loc=1e-6)
        assert mp.objective <= IDENTITY_TOL

    def test_to_dict_keys(self, circle_flux):
        mp = minimal_pair(circle_flux.mu, circle_flux.nu, circle_flux.basis(10))
        data = mp.to_dict()
        for key in ('lambda', 'objective', 'tv_perp', 'tv_nu_bar', 'n_colocated', 'max_violation',
                    'lambda_min', 'n_rows', 'eps_con', 'objective_raw', 'snapped'):
            assert key in data
        assert len(data['lambda']) == mp.lam.size

    def test_unsnapped_objective_reported(self, circle_flux):
        data = minimal_pair(circle_flux.mu, circle_flux.nu, circle_flux.basis(10)).to_dict()
        assert data['snapped'] is False
        assert data['objective_raw'] == data['objective']

    def test_snap_is_auditable(self, circle_flux, monkeypatch):
        def near_identity(problem):
            lam = np.full(problem.cost.shape[0], 1.0 - 1e-8)
            return lam, float(problem.cost @ lam)

        monkeypatch.setattr('utils.singular_flux.minimal_flux.solve_lp', near_identity)
        mp = minimal_pair(circle_flux.mu, circle_flux.nu, circle_flux.basis(10))
        data = mp.to_dict()
        assert data['snapped'] is True
        assert mp.is_identity
        assert data['objective'] == pytest.approx(mp.tv_perp, rel=1e-12)
        assert data['objective_raw'] == pytest.approx(mp.tv_perp * (1.0 - 1e-8), rel=1e-12)
        assert data['objective_raw'] < data['objective']

    def test_submeasure_of_circle(self, circle_flux):
        basis = circle_flux.basis(10)
        theta = circle_flux.nu.quadrature(basis.knots)
        lam, zeta = minimal_submeasure(theta, basis)
        assert lam.shape == (theta.n_atoms,)
        assert zeta.total_variation() <= IDENTITY_TOL
