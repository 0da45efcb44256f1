# utils/singular_flux/wasserstein.py
"""
Wasserstein-1 distances between discrete probability measures

Exact values come from the 1-D CDF identity or from the transport LP solved by
POT's network simplex (ot.emd). W1-variation profiles of time-sliced curves are
cumulative sums of consecutive-slice distances.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
import ot

from .measures import (
    AtomicVectorMeasure,
    DEFAULT_NORM,
    NormSpec,
    SymbolicMeasure,
    TimeSlicedMeasure,
    to_atoms,
)

logger = logging.getLogger(__name__)

MASS_TOL = 1e-9
EMD_MAX_ITER = 1_000_000


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Nonzero entries of an optimal coupling"""
    rows: np.ndarray
    cols: np.ndarray
    flows: np.ndarray

    def dense(self, n_rows: int, n_cols: int) -> np.ndarray:
        plan = np.zeros((n_rows, n_cols))
        plan[self.rows, self.cols] = self.flows
        return plan

    def to_dict(self) -> Dict:
        return {'rows': self.rows.tolist(), 'cols': self.cols.tolist(), 'flows': self.flows.tolist()}


@dataclass(frozen=True, eq=False)
class VariationProfile:
    """Cumulative W1-variation V(t) on partition nodes"""
    times: np.ndarray
    cumulative: np.ndarray

    @property
    def total(self) -> float:
        return float(self.cumulative[-1]) if self.cumulative.size else 0.0

    def increments(self) -> np.ndarray:
        return np.diff(self.cumulative)

    def derivative(self) -> np.ndarray:
        """Finite-difference density of the variation measure on each cell"""
        return self.increments() / np.diff(self.times)

    def to_dict(self) -> Dict:
        return {'times': self.times.tolist(), 'cumulative': self.cumulative.tolist(), 'total': self.total}


def _scalar_weights(m: AtomicVectorMeasure, label: str) -> np.ndarray:
    if m.m != 1:
        raise ValueError(f"{label} must be a scalar measure")
    w = m.weights[:, 0]
    if np.any(w < -MASS_TOL):
        raise ValueError(f"{label} has negative weights")
    return np.clip(w, 0.0, None)


def _check_balanced(wa: np.ndarray, wb: np.ndarray):
    diff = abs(float(np.sum(wa)) - float(np.sum(wb)))
    if diff > MASS_TOL:
        raise ValueError(f"Mass mismatch between measures: {np.sum(wa)} vs {np.sum(wb)}")


def w1_1d(a: AtomicVectorMeasure, b: AtomicVectorMeasure) -> float:
    """W1 on the line via the CDF identity: integral of |F_a - F_b|"""
    if a.dim != 1 or b.dim != 1:
        raise ValueError("w1_1d needs measures on the line (d = 1)")
    wa = _scalar_weights(a, "a")
    wb = _scalar_weights(b, "b")
    _check_balanced(wa, wb)
    xs = np.concatenate([a.points[:, 0], b.points[:, 0]])
    signed = np.concatenate([wa, -wb])
    order = np.argsort(xs, kind='mergesort')
    xs, signed = xs[order], signed[order]
    cdf_gap = np.cumsum(signed)[:-1]
    return float(np.sum(np.abs(cdf_gap) * np.diff(xs)))


def w1_lp(a: AtomicVectorMeasure, b: AtomicVectorMeasure,
          norm: Optional[NormSpec] = None) -> Tuple[float, TransportPlan]:
    """
    W1 by the transport LP with cost ||x_i - y_j||

    Args:
        a, b: scalar probability measures on the same d-space
        norm: ground norm (defaults to the norm carried by a)

    Returns:
        Tuple of (distance, optimal TransportPlan)
    """
    if a.dim != b.dim:
        raise ValueError(f"Dimension mismatch: {a.dim} vs {b.dim}")
    norm = norm or a.norm or DEFAULT_NORM
    wa = _scalar_weights(a, "a")
    wb = _scalar_weights(b, "b")
    _check_balanced(wa, wb)
    if wa.size == 0 or wb.size == 0:
        return 0.0, TransportPlan(np.zeros(0, int), np.zeros(0, int), np.zeros(0))
    wb = wb * (np.sum(wa) / np.sum(wb))
    cost = norm(a.points[:, None, :] - b.points[None, :, :])
    plan, log = ot.emd(wa, wb, cost, numItermax=EMD_MAX_ITER, log=True)
    if log.get('result_code', 1) != 1:
        raise RuntimeError(f"Transport solver failed: {log.get('warning')}")
    rows, cols = np.nonzero(plan > 0)
    value = float(np.sum(plan * cost))
    return value, TransportPlan(rows, cols, plan[rows, cols])


def w1(a: AtomicVectorMeasure, b: AtomicVectorMeasure, norm: Optional[NormSpec] = None) -> float:
    """Distance only, routed to the CDF identity on the line"""
    if a.dim == 1:
        return w1_1d(a, b)
    return w1_lp(a, b, norm)[0]


def _profile(nodes: np.ndarray, slice_at: Callable[[float], AtomicVectorMeasure],
             norm: Optional[NormSpec]) -> VariationProfile:
    slices = [slice_at(float(t)) for t in nodes]
    dists = [w1(p, q, norm) for p, q in zip(slices[:-1], slices[1:])]
    return VariationProfile(nodes, np.concatenate([[0.0], np.cumsum(dists)]))


def var_w1(curve: TimeSlicedMeasure, a: float, b: float,
           norm: Optional[NormSpec] = None) -> VariationProfile:
    """Cumulative consecutive-slice distances over the curve's grid nodes in [a, b]"""
    if a > b:
        raise ValueError(f"Need a <= b, got [{a}, {b}]")
    if a < curve.times[0] or b > curve.horizon:
        raise ValueError(f"[{a}, {b}] is outside the curve's time range [{curve.times[0]}, {curve.horizon}]")
    inner = curve.times[(curve.times > a) & (curve.times < b)]
    nodes = np.unique(np.concatenate([[a], inner, [b]]))
    return _profile(nodes, curve.slice_at, norm)


def var_w1_refined(slice_at: Callable[[float], AtomicVectorMeasure], a: float, b: float,
                   tol: float = 1e-8, max_slices: int = 2 ** 14,
                   norm: Optional[NormSpec] = None) -> VariationProfile:
    """
    Dyadic refinement of the W1-variation on [a, b]

    Stops when successive totals differ by less than tol or max_slices is reached.
    """
    n = 1
    profile = _profile(np.linspace(a, b, n + 1), slice_at, norm)
    while n < max_slices:
        n *= 2
        finer = _profile(np.linspace(a, b, n + 1), slice_at, norm)
        converged = abs(finer.total - profile.total) < tol
        profile = finer
        if converged:
            break
    logger.debug(f"W1-variation on [{a}, {b}] with {n} slices: {profile.total:.12g}")
    return profile


def flux_variation_gap(profile: VariationProfile, nu: Union[AtomicVectorMeasure, SymbolicMeasure]) -> float:
    """V(b) - V(a) minus |nu|([a, b) x R^d); nonpositive up to quadrature for solutions"""
    a, b = float(profile.times[0]), float(profile.times[-1])
    if isinstance(nu, SymbolicMeasure):
        knots = [np.array([a, b])] + [None] * nu.dim
        nu = to_atoms(nu, knots)
    flux = nu.total_variation((a, b), right_open=True)
    return profile.total - flux
