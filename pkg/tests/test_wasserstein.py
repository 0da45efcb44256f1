"""Tests for W1 distances and W1-variation profiles."""

import itertools

import numpy as np
import pytest

from utils.singular_flux.examples_corpus import build
from utils.singular_flux.measures import AtomicVectorMeasure, NormSpec, TimeSlicedMeasure, slice_symbolic
from utils.singular_flux.wasserstein import (
    flux_variation_gap,
    var_w1,
    var_w1_refined,
    w1,
    w1_1d,
    w1_lp,
)

TOL = 1e-9


def _prob(points, weights=None, norm='l2'):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    weights = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    return AtomicVectorMeasure(np.zeros(n), points, weights[:, None], norm)


def _brute_force(a_pts, b_pts, norm):
    """Uniform measures with equal atom counts: optimum over permutations"""
    n = a_pts.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        cost = np.mean(norm(a_pts - b_pts[list(perm)]))
        best = min(best, cost)
    return best


class TestW1Line:

    def test_diracs(self):
        assert w1_1d(_prob([0.0]), _prob([1.0])) == pytest.approx(1.0)

    def test_mass_mismatch(self):
        with pytest.raises(ValueError):
            w1_1d(_prob([0.0]), _prob([1.0], [0.5]))

    def test_needs_line(self):
        with pytest.raises(ValueError):
            w1_1d(_prob([[0.0, 0.0]]), _prob([[1.0, 0.0]]))

    def test_cdf_matches_lp(self, rng):
        for _ in range(20):
            a = _prob(rng.uniform(-1, 1, 6), rng.dirichlet(np.ones(6)))
            b = _prob(rng.uniform(-1, 1, 4), rng.dirichlet(np.ones(4)))
            assert abs(w1_1d(a, b) - w1_lp(a, b)[0]) <= TOL

    def test_transfer_slices(self):
        fixture = build("7.1", 4)
        for t, s in [(0.25, 0.75), (0.0, 1.0), (0.1, 0.3)]:
            d = w1(fixture.slice_at(t), fixture.slice_at(s))
            assert d == pytest.approx(abs(t - s), abs=TOL)


class TestW1LP:

    @pytest.mark.parametrize("kind", ['l1', 'l2', 'linf'])
    def test_brute_force_oracle(self, rng, kind):
        norm = NormSpec(kind)
        for n in (1, 2, 3, 4):
            a_pts = rng.normal(size=(n, 2))
            b_pts = rng.normal(size=(n, 2))
            value, _ = w1_lp(_prob(a_pts, norm=kind), _prob(b_pts, norm=kind), norm)
            assert abs(value - _brute_force(a_pts, b_pts, norm)) <= 1e-12

    def test_plan_marginals(self, rng):
        a = _prob(rng.normal(size=(5, 2)), rng.dirichlet(np.ones(5)))
        b = _prob(rng.normal(size=(3, 2)), rng.dirichlet(np.ones(3)))
        _, plan = w1_lp(a, b)
        dense = plan.dense(5, 3)
        np.testing.assert_allclose(dense.sum(axis=1), a.weights[:, 0], atol=1e-12)
        np.testing.assert_allclose(dense.sum(axis=0), b.weights[:, 0], atol=1e-12)

    @pytest.mark.parametrize("kind", ['l1', 'l2', 'linf'])
    def test_triangle_inequality(self, rng, kind):
        norm = NormSpec(kind)
        for _ in range(10):
            a, b, c = (_prob(rng.normal(size=(n, 2)), rng.dirichlet(np.ones(n)), norm=kind) for n in (3, 5, 4))
            ab, _ = w1_lp(a, b, norm)
            bc, _ = w1_lp(b, c, norm)
            ac, _ = w1_lp(a, c, norm)
            assert ac <= ab + bc + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            w1_lp(_prob([0.0]), _prob([[0.0, 1.0]]))


class TestVariation:

    def test_transfer_variation(self):
        mu = build("7.1", 4).mu
        curve = TimeSlicedMeasure.from_symbolic(mu, np.linspace(0.0, 1.0, 11), horizon=2.0)
        profile = var_w1(curve, 0.0, 1.0)
        assert profile.total == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(profile.derivative(), 1.0, atol=1e-9)

    def test_refinement_monotone(self, rng):
        times = np.linspace(0.0, 1.0, 33)
        slices = tuple(_prob(rng.normal(size=(4, 2)), rng.dirichlet(np.ones(4))) for _ in times)
        totals = []
        for stride in (16, 8, 4, 2, 1):
            curve = TimeSlicedMeasure(times[::stride], slices[::stride], horizon=1.5)
            totals.append(var_w1(curve, 0.0, 1.0).total)
        assert np.all(np.diff(totals) >= -TOL)
        assert totals[-1] > totals[0]

    def test_refined_variation(self):
        fixture = build("7.1", 4)
        profile = var_w1_refined(lambda t: slice_symbolic(fixture.mu, t, fixture.horizon), 0.0, 1.0)
        assert profile.total == pytest.approx(1.0, abs=1e-9)

    def test_flux_bounds_variation(self):
        fixture = build("7.1", 4)
        profile = var_w1_refined(lambda t: slice_symbolic(fixture.mu, t, fixture.horizon), 0.0, 1.0)
        assert flux_variation_gap(profile, fixture.nu) == pytest.approx(0.0, abs=1e-9)

    def test_window_validation(self):
        curve = TimeSlicedMeasure.from_symbolic(build("7.1", 4).mu, np.linspace(0.0, 1.0, 5), horizon=2.0)
        with pytest.raises(ValueError):
            var_w1(curve, 0.8, 0.2)
        with pytest.raises(ValueError):
            var_w1(curve, 0.0, 3.0)

    def test_profile_dict(self):
        curve = TimeSlicedMeasure.from_symbolic(build("7.1", 4).mu, np.linspace(0.0, 1.0, 5), horizon=2.0)
        data = var_w1(curve, 0.0, 1.0).to_dict()
        assert set(data) == {'times', 'cumulative', 'total'}
        assert data['cumulative'][0] == 0.0
