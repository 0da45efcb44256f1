# utils/singular_flux/superposition.py
"""
Finite curve ensembles standing in for a superposition measure

An ensemble sum_j p_j delta_{y_j} of anchored LipCurves is paired with a test
basis through per-segment Gauss-Legendre quadrature. The pushforwards of
t' ds, x' ds and ||y'|| ds reproduce mu, nu and |(mu, nu)| when the ensemble
represents the pair.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .curves import ABVCurve, LipCurve, to_abv
from .measures import (
    AtomicVectorMeasure,
    DEFAULT_GAUSS_NODES,
    MeasureLike,
    NormSpec,
    _as_norm,
    concatenate_all,
    joint_variation,
    to_atoms,
)
from .weak_form import TestBasis

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-9
EPS_FLAT = 1e-6

VectorField = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def _check_weights(weights: np.ndarray, n: int) -> np.ndarray:
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.shape[0] != n:
        raise ValueError(f"Expected {n} weights, got {weights.shape[0]}")
    if np.any(weights < 0):
        raise ValueError("Ensemble weights must be nonnegative")
    if n and abs(weights.sum() - 1.0) > WEIGHT_TOL:
        raise ValueError(f"Ensemble weights must sum to 1, got {weights.sum():.12g}")
    return weights


# ==================== Ensembles ====================

@dataclass(eq=False)
class EnsembleSamples:
    """Quadrature nodes along all curves; ds already carries the curve weight"""
    points: np.ndarray
    ds: np.ndarray
    velocity: np.ndarray

    @property
    def n(self) -> int:
        return self.ds.shape[0]


@dataclass(eq=False)
class SuperpositionMeasure:
    """Weighted anchored curves with a common s-horizon"""
    curves: List[LipCurve]
    weights: np.ndarray
    s_max: Optional[float] = None
    s_step: Optional[float] = None

    def __post_init__(self):
        self.curves = list(self.curves)
        self.weights = _check_weights(self.weights, len(self.curves))
        for k, c in enumerate(self.curves):
            if not c.anchored:
                raise ValueError(f"Curve {k} is not anchored at t = 0")
        dims = {c.dim for c in self.curves}
        if len(dims) > 1:
            raise ValueError(f"Curves of different dimension in one ensemble: {sorted(dims)}")
        if self.s_max is None and self.curves:
            self.s_max = max(c.s_end for c in self.curves)

    @property
    def n_curves(self) -> int:
        return len(self.curves)

    @property
    def dim(self) -> int:
        return self.curves[0].dim if self.curves else 1

    @property
    def norm(self) -> NormSpec:
        return self.curves[0].norm if self.curves else _as_norm(None)

    def horizon_curves(self) -> List[LipCurve]:
        if self.s_max is None:
            return self.curves
        return [c.restrict(self.s_max) for c in self.curves]

    def is_normalized(self) -> bool:
        return all(c.is_normalized() for c in self.curves)

    def samples(self, knots: Optional[Sequence[np.ndarray]] = None,
                n_gauss: int = DEFAULT_GAUSS_NODES) -> EnsembleSamples:
        pts_parts, ds_parts, vel_parts = [], [], []
        for p, c in zip(self.weights, self.horizon_curves()):
            if p == 0 or c.n_segments == 0:
                continue
            pts, ds, seg = c.quadrature(knots, n_gauss)
            pts_parts.append(pts)
            ds_parts.append(p * ds)
            vel_parts.append(c.velocities()[seg])
        if not pts_parts:
            width = self.dim + 1
            return EnsembleSamples(np.zeros((0, width)), np.zeros(0), np.zeros((0, width)))
        return EnsembleSamples(np.vstack(pts_parts), np.concatenate(ds_parts), np.vstack(vel_parts))

    def omega(self, knots: Optional[Sequence[np.ndarray]] = None,
              n_gauss: int = DEFAULT_GAUSS_NODES) -> AtomicVectorMeasure:
        """(1 + d)-vector atoms of the weighted curve integration measures"""
        smp = self.samples(knots, n_gauss)
        return AtomicVectorMeasure(smp.points[:, 0], smp.points[:, 1:], smp.ds[:, None] * smp.velocity, self.norm)

    @classmethod
    def mixture(cls, parts: Sequence[Tuple['SuperpositionMeasure', float]]) -> 'SuperpositionMeasure':
        """Convex combination of ensembles"""
        curves: List[LipCurve] = []
        weights: List[float] = []
        s_max = 0.0
        for eta, alpha in parts:
            curves.extend(eta.curves)
            weights.extend((alpha * eta.weights).tolist())
            s_max = max(s_max, eta.s_max or 0.0)
        return cls(curves, np.asarray(weights), s_max or None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'weights': self.weights.tolist(),
            'curves': [c.to_dict() for c in self.curves],
            's_max': self.s_max,
            's_step': self.s_step,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], norm: Optional[str] = None) -> 'SuperpositionMeasure':
        curves = [LipCurve.from_dict(c, norm) for c in data['curves']]
        return cls(curves, np.asarray(data['weights'], dtype=float), data.get('s_max'), data.get('s_step'))


# ==================== Pushforward pairings ====================

def push_mu(eta: SuperpositionMeasure, basis: TestBasis, n_gauss: int = DEFAULT_GAUSS_NODES) -> np.ndarray:
    """Pairings of e # (t' eta_L) with every basis function"""
    smp = eta.samples(basis.knots, n_gauss)
    return basis.pair_scalar(smp.points, smp.ds * smp.velocity[:, 0])


def push_nu(eta: SuperpositionMeasure, basis: TestBasis, n_gauss: int = DEFAULT_GAUSS_NODES) -> np.ndarray:
    """(size, d) pairings of e # (x' eta_L), one column per flux component"""
    smp = eta.samples(basis.knots, n_gauss)
    return np.column_stack([basis.pair_scalar(smp.points, smp.ds * smp.velocity[:, k])
                            for k in range(1, eta.dim + 1)])


@dataclass(eq=False)
class TvPairings:
    values: np.ndarray
    plain: np.ndarray
    normalized_check_skipped: bool

    @property
    def unit_speed_gap(self) -> float:
        return float(np.max(np.abs(self.values - self.plain))) if self.values.size else 0.0


def push_tv(eta: SuperpositionMeasure, basis: TestBasis, n_gauss: int = DEFAULT_GAUSS_NODES) -> TvPairings:
    """
    Pairings of e # (||y'|| eta_L), and of e # eta_L for comparison

    The two agree for unit-speed ensembles; otherwise the comparison is skipped.
    """
    smp = eta.samples(basis.knots, n_gauss)
    speeds = eta.norm(smp.velocity) if smp.n else np.zeros(0)
    values = basis.pair_scalar(smp.points, smp.ds * speeds)
    plain = basis.pair_scalar(smp.points, smp.ds)
    skipped = not eta.is_normalized()
    if skipped:
        logger.debug("Ensemble is not unit-speed; e # eta_L comparison skipped")
    return TvPairings(values, plain, skipped)


def measure_pairings(mu: MeasureLike, nu: MeasureLike, basis: TestBasis,
                     n_gauss: int = DEFAULT_GAUSS_NODES) -> Dict[str, np.ndarray]:
    """Reference pairings of mu, the components of nu and |(mu, nu)| with the basis"""
    mu_a = to_atoms(mu, basis.knots, n_gauss)
    nu_a = to_atoms(nu, basis.knots, n_gauss)
    d = mu_a.dim
    nu_cols = [basis.pair_scalar(nu_a.coords, nu_a.weights[:, k]) if nu_a.n_atoms else np.zeros(basis.size)
               for k in range(d)]
    tv = joint_variation(mu_a, nu_a)
    return {
        'mu': basis.pair_scalar(mu_a.coords, mu_a.weights[:, 0]),
        'nu': np.column_stack(nu_cols),
        'tv': basis.pair_scalar(tv.coords, tv.weights[:, 0]),
    }


def compare_pairings(a: np.ndarray, b: np.ndarray, basis: TestBasis) -> float:
    """Max over basis functions of |a - b| / (1 + ||phi||_C1); columns are compared separately"""
    diff = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    if diff.ndim == 2:
        diff = diff.max(axis=1)
    if diff.size == 0:
        return 0.0
    return float(np.max(diff / (1.0 + basis.c1_norms())))


# ==================== Flat / moving split ====================

@dataclass(eq=False)
class SplitReport:
    """Flux pushforwards restricted to samples with t' > eps_flat (moving) or t' <= eps_flat (flat)"""
    plus_flux: np.ndarray
    zero_flux: np.ndarray
    plus_time: np.ndarray
    plus_mass: float
    zero_mass: float
    eps_flat: float

    def to_dict(self) -> Dict[str, Any]:
        return {'plus_mass': self.plus_mass, 'zero_mass': self.zero_mass, 'eps_flat': self.eps_flat}


def split_D(eta: SuperpositionMeasure, basis: TestBasis, eps_flat: float = EPS_FLAT,
            n_gauss: int = DEFAULT_GAUSS_NODES) -> SplitReport:
    smp = eta.samples(basis.knots, n_gauss)
    moving = smp.velocity[:, 0] > eps_flat if smp.n else np.zeros(0, dtype=bool)

    def flux(mask):
        return np.column_stack([basis.pair_scalar(smp.points[mask], smp.ds[mask] * smp.velocity[mask, k])
                                for k in range(1, eta.dim + 1)])

    def mass(mask):
        if not mask.any():
            return 0.0
        return float(np.sum(smp.ds[mask] * eta.norm(smp.velocity[mask, 1:])))

    return SplitReport(
        plus_flux=flux(moving),
        zero_flux=flux(~moving),
        plus_time=basis.pair_scalar(smp.points[moving], smp.ds[moving] * smp.velocity[moving, 0]),
        plus_mass=mass(moving),
        zero_mass=mass(~moving),
        eps_flat=eps_flat,
    )


# ==================== Characteristics ====================

def characteristic_residual(eta: SuperpositionMeasure, field_obj: VectorField,
                            s_step: Optional[float] = None) -> float:
    """
    Max over samples of ||y'(s) - (tau, v)(y(s))||

    Samples are segment midpoints, plus an s-grid of step s_step (or eta.s_step).
    """
    s_step = s_step if s_step is not None else eta.s_step
    worst = 0.0
    for c in eta.horizon_curves():
        if c.n_segments == 0:
            continue
        s = 0.5 * (c.breakpoints[:-1] + c.breakpoints[1:])
        if s_step:
            grid = np.arange(0.5 * s_step, c.s_end, s_step)
            s = np.union1d(s, grid[~np.isin(grid, c.breakpoints)])
        seg = np.clip(np.searchsorted(c.breakpoints, s, side='right') - 1, 0, c.n_segments - 1)
        pts = c(s)
        tau, v = field_obj(pts[:, 0], pts[:, 1:])
        target = np.column_stack([np.asarray(tau).reshape(-1), np.asarray(v).reshape(s.shape[0], -1)])
        worst = max(worst, float(np.max(c.norm(c.velocities()[seg] - target))))
    return worst


# ==================== ABV ensembles ====================

@dataclass(eq=False)
class AbvEnsemble:
    curves: List[ABVCurve]
    weights: np.ndarray

    def __post_init__(self):
        self.curves = list(self.curves)
        self.weights = _check_weights(self.weights, len(self.curves))

    @property
    def dim(self) -> int:
        return self.curves[0].dim if self.curves else 1

    @classmethod
    def from_superposition(cls, eta: SuperpositionMeasure) -> 'AbvEnsemble':
        return cls([to_abv(c) for c in eta.horizon_curves()], eta.weights)

    def theta(self, knots: Optional[Sequence[np.ndarray]] = None,
              n_gauss: int = DEFAULT_GAUSS_NODES) -> AtomicVectorMeasure:
        parts = [u.theta_measure(knots, n_gauss).scale(p) for u, p in zip(self.curves, self.weights) if p > 0]
        norm = self.curves[0].norm if self.curves else None
        return concatenate_all(parts, self.dim, self.dim + 1, norm)

    def to_dict(self) -> Dict[str, Any]:
        return {'weights': self.weights.tolist(), 'curves': [u.to_dict() for u in self.curves]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], norm: Optional[str] = None) -> 'AbvEnsemble':
        return cls([ABVCurve.from_dict(u, norm) for u in data['curves']], np.asarray(data['weights'], dtype=float))


def slice_limits(eta_hat: AbvEnsemble, t: float) -> Tuple[AtomicVectorMeasure, AtomicVectorMeasure]:
    """Left and right slices mu_t-, mu_t+ read from the skeletons"""
    left = np.vstack([u.skeleton(t, 'left') for u in eta_hat.curves])
    right = np.vstack([u.skeleton(t, 'right') for u in eta_hat.curves])
    times = np.full(left.shape[0], t)
    w = eta_hat.weights[:, None]
    return AtomicVectorMeasure(times, left, w), AtomicVectorMeasure(times, right, w)


def transition_alignment(eta_hat: AbvEnsemble, direction: VectorField, n_samples: int = 5) -> float:
    """
    Max deviation between transition directions d_r u / ||d_r u|| and a unit direction field

    direction(t, X) returns (ignored, unit vectors); transitions are sampled at interior r.
    """
    worst = 0.0
    r = (np.arange(n_samples) + 0.5) / n_samples
    for u in eta_hat.curves:
        for jump in u.jumps:
            seg = u.norm(np.diff(jump.path, axis=0))
            cum = np.concatenate([[0.0], np.cumsum(seg)]) / np.sum(seg)
            k = np.clip(np.searchsorted(cum, r, side='right') - 1, 0, seg.shape[0] - 1)
            tangent = np.diff(jump.path, axis=0)[k] / seg[k][:, None]
            pts = jump.at(r, u.norm)
            _, target = direction(np.full(r.shape[0], jump.t), pts)
            worst = max(worst, float(np.max(u.norm(tangent - np.asarray(target).reshape(tangent.shape)))))
    return worst


@dataclass(eq=False)
class RepresentationReport:
    """Per-formula normalized deviations with a shared tolerance"""
    deviations: Dict[str, float]
    tol: float
    split: Optional[Dict[str, float]] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def flags(self) -> Dict[str, bool]:
        return {k: v <= self.tol for k, v in self.deviations.items()}

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> Dict[str, Any]:
        result = {
            'deviations': dict(self.deviations),
            'flags': self.flags,
            'pass': self.passed,
            'tol': self.tol,
        }
        if self.split is not None:
            result['split'] = dict(self.split)
        result.update(self.extras)
        return result


def representation_report(eta: SuperpositionMeasure, mu: MeasureLike, nu: MeasureLike, basis: TestBasis,
                          tol: float = 2e-2, eps_flat: float = EPS_FLAT) -> RepresentationReport:
    """Compare the ensemble's pushforwards with (mu, nu, |(mu, nu)|)"""
    ref = measure_pairings(mu, nu, basis)
    tv = push_tv(eta, basis)
    split = split_D(eta, basis, eps_flat)
    deviations = {
        'mu': compare_pairings(push_mu(eta, basis), ref['mu'], basis),
        'nu': compare_pairings(push_nu(eta, basis), ref['nu'], basis),
        'tv': compare_pairings(tv.values, ref['tv'], basis),
    }
    extras: Dict[str, Any] = {'normalized_check_skipped': tv.normalized_check_skipped, 'n_curves': eta.n_curves}
    if not tv.normalized_check_skipped:
        extras['unit_speed_gap'] = tv.unit_speed_gap
    report = RepresentationReport(deviations, tol, split.to_dict(), extras)
    logger.info(f"{'✅' if report.passed else '⚠️'} Superposition check over {eta.n_curves} curves: "
                f"mu {deviations['mu']:.3e}, nu {deviations['nu']:.3e}, tv {deviations['tv']:.3e}")
    return report


def bv_representation(eta_hat: AbvEnsemble, basis: TestBasis, mu: MeasureLike, nu: MeasureLike,
                      times: Sequence[float] = (), direction: Optional[VectorField] = None,
                      tol: float = 2e-2, n_gauss: int = DEFAULT_GAUSS_NODES) -> RepresentationReport:
    """
    Pair sum_j p_j theta_{u_j} with the basis and compare with (mu, nu)

    Also returns the left/right slices at the requested times and, when a
    direction field is given, the alignment of transitions with it.
    """
    theta = eta_hat.theta(basis.knots, n_gauss)
    ref = measure_pairings(mu, nu, basis, n_gauss)
    theta_mu = basis.pair_scalar(theta.coords, theta.weights[:, 0]) if theta.n_atoms else np.zeros(basis.size)
    theta_nu = np.column_stack([
        basis.pair_scalar(theta.coords, theta.weights[:, k]) if theta.n_atoms else np.zeros(basis.size)
        for k in range(1, eta_hat.dim + 1)
    ])
    deviations = {
        'mu': compare_pairings(theta_mu, ref['mu'], basis),
        'nu': compare_pairings(theta_nu, ref['nu'], basis),
    }
    extras: Dict[str, Any] = {'theta_mu': theta_mu, 'theta_nu': theta_nu}
    slices = {}
    for t in times:
        left, right = slice_limits(eta_hat, float(t))
        slices[float(t)] = {'left': left.points.tolist(), 'right': right.points.tolist(),
                            'weights': eta_hat.weights.tolist()}
    if slices:
        extras['slices'] = slices
    if direction is not None:
        deviations['transition_direction'] = transition_alignment(eta_hat, direction)
    return RepresentationReport(deviations, tol, None, extras)
