# utils/singular_flux/weak_form.py
"""
Distributional residuals of the continuity equation

Test functions are tensor products of cubic B-spline bumps on a uniform knot
grid per axis. Pairings are evaluated through per-axis value / derivative
matrices, so every residual component is a sum of exact spline evaluations
at the atoms of the measures.
"""

import logging
import string
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import BSpline

from .measures import (
    AtomicVectorMeasure,
    Atoms,
    Dirac,
    LebesgueInterval,
    MeasureLike,
    SpacePart,
    SymbolicComponent,
    SymbolicMeasure,
    to_atoms,
)

logger = logging.getLogger(__name__)

SPLINE_ORDER = 3
MIN_KNOTS = SPLINE_ORDER + 2
DEFAULT_KNOTS = 16
CHUNK_ATOMS = 20000
SUP_SAMPLES = 401


# ==================== Test basis ====================

class BasisFunction:
    """One tensor bump of a TestBasis, evaluable at (t, X) point sets"""

    def __init__(self, basis: 'TestBasis', index: int):
        self.basis = basis
        self.index = index
        self.multi_index = np.unravel_index(index, basis.shape)

    def _factors(self, coords: np.ndarray, deriv_axis: Optional[int] = None) -> List[np.ndarray]:
        out = []
        for axis, j in enumerate(self.multi_index):
            spline = self.basis.element(axis, j, derivative=(axis == deriv_axis))
            out.append(np.nan_to_num(spline(coords[:, axis]), nan=0.0))
        return out

    def value(self, t: np.ndarray, X: np.ndarray) -> np.ndarray:
        coords = self.basis.stack(t, X)
        return np.prod(self._factors(coords), axis=0)

    def gradient(self, t: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Full gradient (time axis first), shape (n, n_axes)"""
        coords = self.basis.stack(t, X)
        cols = [np.prod(self._factors(coords, axis), axis=0) for axis in range(self.basis.n_axes)]
        return np.column_stack(cols)

    def spatial_gradient(self, t: np.ndarray, X: np.ndarray) -> np.ndarray:
        return self.gradient(t, X)[:, self.basis.n_axes - self.basis.space_dim:]


class TestBasis:
    """
    Tensor cubic B-spline bumps over a box

    Each axis carries a uniform knot vector of K knots and K - 4 cubic bump
    elements supported between five consecutive knots. The first axis plays the
    role of time; the last space_dim axes are the spatial ones.
    """

    __test__ = False

    def __init__(self, knots: Sequence[np.ndarray], space_dim: Optional[int] = None):
        self.knots = [np.asarray(k, dtype=float) for k in knots]
        for k in self.knots:
            if k.shape[0] < MIN_KNOTS:
                raise ValueError(f"Each axis needs at least {MIN_KNOTS} knots, got {k.shape[0]}")
            if np.any(np.diff(k) <= 0):
                raise ValueError("Knot vectors must be strictly increasing")
        self.space_dim = len(self.knots) - 1 if space_dim is None else space_dim
        self._elements = [
            [BSpline.basis_element(k[j:j + MIN_KNOTS], extrapolate=False) for j in range(k.shape[0] - SPLINE_ORDER - 1)]
            for k in self.knots
        ]
        self._derivatives = [[e.derivative() for e in els] for els in self._elements]
        self._sup_value, self._sup_deriv = self._axis_sups()

    # ---------- construction ----------

    @classmethod
    def from_box(cls, lower: Sequence[float], upper: Sequence[float], n_knots: int = DEFAULT_KNOTS,
                 space_dim: Optional[int] = None) -> 'TestBasis':
        knots = [np.linspace(lo, hi, n_knots) for lo, hi in zip(lower, upper)]
        return cls(knots, space_dim)

    @classmethod
    def auto(cls, measures: Sequence[MeasureLike], n_knots: int = DEFAULT_KNOTS,
             horizon: Optional[float] = None, space_dim: Optional[int] = None) -> 'TestBasis':
        """
        Cover the joint bounding box of the measures

        The box is inflated per axis by max(20%, 3 / (K - 7)) of its width, which
        keeps affine functions inside the spline span over the whole support.
        The first axis is clamped at the horizon so that every bump vanishes there.
        """
        if n_knots < 8:
            raise ValueError(f"Basis grid must have at least 8 knots per axis, got {n_knots}")
        boxes = [m.bbox() for m in measures if not (isinstance(m, AtomicVectorMeasure) and m.n_atoms == 0)]
        if not boxes:
            raise ValueError("Cannot build a test basis without any support")
        lower = np.min([b[0] for b in boxes], axis=0)
        upper = np.max([b[1] for b in boxes], axis=0)
        if horizon is not None:
            upper[0] = horizon
        width = upper - lower
        degenerate = width <= 0
        lower = np.where(degenerate, lower - 0.5, lower)
        upper = np.where(degenerate, upper + 0.5, upper)
        width = upper - lower
        margin = max(0.2, 3.0 / (n_knots - 7)) * width
        lower = lower - margin
        upper = upper + margin
        if horizon is not None:
            upper[0] = horizon
        logger.debug(f"Test basis box: {lower.tolist()} .. {upper.tolist()} with {n_knots} knots/axis")
        return cls.from_box(lower, upper, n_knots, space_dim)

    # ---------- shape ----------

    @property
    def n_axes(self) -> int:
        return len(self.knots)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(e) for e in self._elements)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def __len__(self) -> int:
        return self.size

    @property
    def lower(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots])

    @property
    def upper(self) -> np.ndarray:
        return np.array([k[-1] for k in self.knots])

    def element(self, axis: int, j: int, derivative: bool = False) -> BSpline:
        return (self._derivatives if derivative else self._elements)[axis][j]

    def member(self, k: int) -> BasisFunction:
        if not 0 <= k < self.size:
            raise IndexError(f"Basis index {k} out of range (size {self.size})")
        return BasisFunction(self, k)

    def stack(self, t: np.ndarray, X: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1)
        X = np.asarray(X, dtype=float).reshape(t.shape[0], -1)
        coords = np.column_stack([t, X])
        if coords.shape[1] != self.n_axes:
            raise ValueError(f"Points have {coords.shape[1]} coordinates, basis has {self.n_axes} axes")
        return coords

    # ---------- evaluation ----------

    def axis_matrix(self, axis: int, x: np.ndarray, derivative: bool = False) -> np.ndarray:
        """(n, K - 4) matrix of element values (or derivatives) on one axis"""
        splines = self._derivatives[axis] if derivative else self._elements[axis]
        x = np.asarray(x, dtype=float)
        return np.nan_to_num(np.column_stack([s(x) for s in splines]), nan=0.0)

    def pair_scalar(self, coords: np.ndarray, weights: np.ndarray, deriv_axis: Optional[int] = None) -> np.ndarray:
        """
        Pair scalar atom weights with every basis function (or one partial derivative)

        Args:
            coords: (n, n_axes) atom coordinates
            weights: (n,) scalar weights
            deriv_axis: axis to differentiate along, or None for values

        Returns:
            Flattened (size,) vector of pairings
        """
        coords = np.asarray(coords, dtype=float)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        out = np.zeros(self.shape)
        if coords.shape[0] == 0:
            return out.ravel()
        letters = string.ascii_lowercase[:self.n_axes]
        subscripts = ','.join(f'n{c}' for c in letters) + ',n->' + letters
        for start in range(0, coords.shape[0], CHUNK_ATOMS):
            chunk = slice(start, start + CHUNK_ATOMS)
            mats = [self.axis_matrix(a, coords[chunk, a], derivative=(a == deriv_axis)) for a in range(self.n_axes)]
            out += np.einsum(subscripts, *mats, weights[chunk], optimize=True)
        return out.ravel()

    def pair_gradient(self, coords: np.ndarray, weights: np.ndarray, first_axis: int) -> np.ndarray:
        """Pair vector weights with gradients along axes first_axis, first_axis + 1, ..."""
        weights = np.asarray(weights, dtype=float)
        total = np.zeros(self.size)
        for j in range(weights.shape[1] if weights.ndim == 2 else 0):
            total += self.pair_scalar(coords, weights[:, j], deriv_axis=first_axis + j)
        return total

    def _axis_sups(self) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        sup_v, sup_d = [], []
        for axis, k in enumerate(self.knots):
            grid = np.linspace(k[0], k[-1], SUP_SAMPLES)
            sup_v.append(np.abs(self.axis_matrix(axis, grid)).max(axis=0))
            sup_d.append(np.abs(self.axis_matrix(axis, grid, derivative=True)).max(axis=0))
        return sup_v, sup_d

    def c1_norms(self) -> np.ndarray:
        """Per-function proxy max|phi| + max||D phi|| from per-axis maxima"""
        sup_value = np.ones(self.shape)
        for axis, sv in enumerate(self._sup_value):
            sup_value = sup_value * _along(sv, axis, self.n_axes)
        grad_sq = np.zeros(self.shape)
        for axis in range(self.n_axes):
            part = np.ones(self.shape)
            for other in range(self.n_axes):
                vec = self._sup_deriv[other] if other == axis else self._sup_value[other]
                part = part * _along(vec, other, self.n_axes)
            grad_sq += part ** 2
        return (sup_value + np.sqrt(grad_sq)).ravel()

    def contains(self, coords: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        return np.all((coords >= self.lower - tol) & (coords <= self.upper + tol), axis=1)


def _along(vec: np.ndarray, axis: int, n_axes: int) -> np.ndarray:
    shape = [1] * n_axes
    shape[axis] = vec.shape[0]
    return vec.reshape(shape)


# ==================== Residual reports ====================

@dataclass(eq=False)
class ResidualReport:
    """Per-basis-function residuals with their normalization"""
    per_fn: np.ndarray
    normalization: np.ndarray
    tol: float
    cover_warning: bool = False
    label: str = ''
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_basis(self) -> int:
        return int(self.per_fn.shape[0])

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.per_fn))) if self.per_fn.size else 0.0

    @property
    def max_normalized(self) -> float:
        if not self.per_fn.size:
            return 0.0
        return float(np.max(np.abs(self.per_fn) / self.normalization))

    @property
    def passed(self) -> bool:
        return self.max_normalized <= self.tol

    def to_dict(self) -> Dict[str, Any]:
        result = {
            'max_abs': self.max_abs,
            'max_normalized': self.max_normalized,
            'n_basis': self.n_basis,
            'per_fn': self.per_fn.tolist(),
            'pass': self.passed,
            'tol': self.tol,
            'cover_warning': self.cover_warning,
        }
        if self.label:
            result['label'] = self.label
        result.update(self.extras)
        return result


def _check_cover(basis: TestBasis, label: str, *measures: AtomicVectorMeasure) -> bool:
    outside = False
    for m in measures:
        if m.n_atoms == 0:
            continue
        coords = m.coords
        if coords.shape[1] != basis.n_axes:
            continue
        live = np.any(m.weights != 0, axis=1)
        if np.any(live & ~basis.contains(coords)):
            outside = True
    if outside:
        logger.warning(f"⚠️ {label}: basis cover does not contain the whole support")
    return outside


def _initial_coords(mu0: AtomicVectorMeasure, n_leading: int) -> np.ndarray:
    return np.column_stack([np.zeros((mu0.n_atoms, n_leading)), mu0.points])


def ce_residual(mu: MeasureLike, nu: MeasureLike, mu0: MeasureLike, basis: TestBasis,
                tol: float = 1e-3, n_gauss: int = 4) -> ResidualReport:
    """
    Residuals r_k = <mu, d_t phi_k> + <nu, D phi_k> + <mu0, phi_k(0, .)>

    Symbolic inputs are converted with Gauss-Legendre quadrature split at the
    basis knots; atomic inputs are used as given.
    """
    mu = to_atoms(mu, basis.knots, n_gauss)
    nu = to_atoms(nu, basis.knots, n_gauss)
    mu0 = to_atoms(mu0, basis.knots, n_gauss)
    if mu.m != 1:
        raise ValueError("mu must be a scalar measure")
    if nu.n_atoms and nu.m != nu.dim:
        raise ValueError(f"nu weights must be d-vectors (d = {nu.dim}), got m = {nu.m}")
    if mu0.m != 1:
        raise ValueError("mu0 must be a scalar measure")

    residual = basis.pair_scalar(mu.coords, mu.weights[:, 0], deriv_axis=0)
    if nu.n_atoms:
        residual = residual + basis.pair_gradient(nu.coords, nu.weights, first_axis=1)
    residual = residual + basis.pair_scalar(_initial_coords(mu0, 1), mu0.weights[:, 0])

    cover_warning = _check_cover(basis, "ce_residual", mu, nu)
    report = ResidualReport(residual, 1.0 + basis.c1_norms(), tol, cover_warning, 'continuity')
    logger.debug(f"CE residual: max_abs={report.max_abs:.3e} over {report.n_basis} functions")
    return report


def augmented_residual(sigma: AtomicVectorMeasure, sigma0: AtomicVectorMeasure,
                       sigma_vec: AtomicVectorMeasure, mu0: MeasureLike, basis: TestBasis,
                       tol: float = 5e-2) -> ResidualReport:
    """
    Residuals of d_s sigma + d_t sigma0 + div sigma_vec = 0 with datum delta_0 x mu0

    Augmented atoms store s as their time coordinate and (t, x) as their point.
    """
    if basis.n_axes != sigma.dim + 1:
        raise ValueError(f"Augmented basis needs {sigma.dim + 1} axes (s, t, x), got {basis.n_axes}")
    mu0 = to_atoms(mu0)
    residual = basis.pair_scalar(sigma.coords, sigma.weights[:, 0], deriv_axis=0) if sigma.n_atoms else np.zeros(basis.size)
    if sigma0.n_atoms:
        residual = residual + basis.pair_scalar(sigma0.coords, sigma0.weights[:, 0], deriv_axis=1)
    if sigma_vec.n_atoms:
        residual = residual + basis.pair_gradient(sigma_vec.coords, sigma_vec.weights, first_axis=2)
    if mu0.n_atoms:
        residual = residual + basis.pair_scalar(_initial_coords(mu0, 2), mu0.weights[:, 0])
    cover_warning = _check_cover(basis, "augmented_residual", sigma, sigma0, sigma_vec)
    return ResidualReport(residual, 1.0 + basis.c1_norms(), tol, cover_warning, 'augmented')


# ==================== Divergence pairings ====================

def divergence_pairing(theta: AtomicVectorMeasure, grad_phi: Union[BasisFunction, Any]) -> float:
    """<theta, D phi> for a spatial gradient callable or a basis member"""
    if isinstance(grad_phi, BasisFunction):
        return theta.pair(grad_phi.spatial_gradient)
    return theta.pair(grad_phi)


def divergence_pairings(theta: AtomicVectorMeasure, basis: TestBasis) -> np.ndarray:
    """<theta, D phi_k> for every basis member (the minimal-flux constraint rows)"""
    if theta.n_atoms == 0:
        return np.zeros(basis.size)
    return basis.pair_gradient(theta.coords, theta.weights, first_axis=basis.n_axes - theta.dim)


def divergence_matrix(theta: AtomicVectorMeasure, basis: TestBasis) -> np.ndarray:
    """(size, n_atoms) matrix with entries D phi_k(t_i, x_i) . w_i"""
    coords = theta.coords
    first = basis.n_axes - theta.dim
    n = theta.n_atoms
    out = np.zeros((basis.size, n))
    letters = string.ascii_lowercase[:basis.n_axes]
    subscripts = ','.join(f'n{c}' for c in letters) + ',n->' + letters + 'n'
    for j in range(theta.m):
        mats = [basis.axis_matrix(a, coords[:, a], derivative=(a == first + j)) for a in range(basis.n_axes)]
        out += np.einsum(subscripts, *mats, theta.weights[:, j], optimize=True).reshape(basis.size, n)
    return out


# ==================== Interval extension ====================

def extend_solution(mu: SymbolicMeasure, nu: SymbolicMeasure, a: float, b: float,
                    mu_a: SpacePart, mu_b: SpacePart, horizon: float
                    ) -> Tuple[SymbolicMeasure, SymbolicMeasure, SymbolicMeasure]:
    """
    Extend a solution on [a, b] to [0, horizon)

    mu is frozen at mu_a on [0, a) and at mu_b on (b, horizon); nu is unchanged.
    The new initial datum is mu_a.

    Returns:
        Tuple of (mu_tilde, nu, mu0)
    """
    if not 0 <= a < b <= horizon:
        raise ValueError(f"Need 0 <= a < b <= horizon, got a={a}, b={b}, horizon={horizon}")
    components = list(mu.components)
    if a > 0:
        components.append(SymbolicComponent(LebesgueInterval(0.0, a), mu_a))
    if horizon > b:
        components.append(SymbolicComponent(LebesgueInterval(b, horizon), mu_b))
    mu_tilde = SymbolicMeasure(mu.dim, tuple(components), mu.norm)
    mu0 = SymbolicMeasure(mu.dim, (SymbolicComponent(Dirac(0.0), mu_a),), mu.norm)
    return mu_tilde, nu, mu0


def initial_datum(points: np.ndarray, weights: Optional[np.ndarray] = None, norm=None) -> SymbolicMeasure:
    """Dirac(0) x Atoms convenience constructor for mu0"""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(1, -1)
    if weights is None:
        weights = np.full(points.shape[0], 1.0 / points.shape[0])
    comp = SymbolicComponent(Dirac(0.0), Atoms(points, np.asarray(weights, dtype=float).reshape(-1, 1)))
    return SymbolicMeasure(points.shape[1], (comp,), norm)
